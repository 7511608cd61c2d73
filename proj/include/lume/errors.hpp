#pragma once

#include <stdexcept>
#include <string>

namespace lume {

/// Dataset or prediction content violates the documented schema or an invariant.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failure (missing file, unwritable path, short read).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Image file exists but is not a supported format (wrong depth, channels, magic).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lume
