#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "lume/errors.hpp"

namespace lume {

/// Single-channel image. Storage is always 16-bit; `bit_depth` records the
/// source depth (8 or 16) so one code path serves both exposure cycles.
struct GrayImage {
    int width = 0;
    int height = 0;
    int bit_depth = 8;
    std::vector<std::uint16_t> pixels;  // row-major

    GrayImage() = default;
    GrayImage(int w, int h, int depth = 8, std::uint16_t fill = 0)
        : width(w), height(h), bit_depth(depth),
          pixels(static_cast<std::size_t>(w) * h, fill) {}

    [[nodiscard]] std::uint16_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint16_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    [[nodiscard]] bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    [[nodiscard]] std::uint16_t max_value() const {
        return static_cast<std::uint16_t>((1u << bit_depth) - 1);
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Binary mask with the same layout as GrayImage; values are 0 or 1.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    Mask() = default;
    Mask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    [[nodiscard]] std::uint8_t at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return data[static_cast<std::size_t>(y) * width + x];
    }

    friend bool operator==(const Mask&, const Mask&) = default;
};

/// Summed-area table with exact integer arithmetic. Safe up to 2^16 x 2^16
/// images at 16-bit depth (sums stay below 2^48).
class Integral {
public:
    explicit Integral(const GrayImage& img) : width_(img.width), height_(img.height) {
        table_.assign(static_cast<std::size_t>(width_ + 1) * (height_ + 1), 0);
        for (int y = 0; y < height_; ++y) {
            std::uint64_t row = 0;
            for (int x = 0; x < width_; ++x) {
                row += img.at(x, y);
                tab(x + 1, y + 1) = tab(x + 1, y) + row;
            }
        }
    }

    /// Sum over the half-open rectangle [x1,x2) x [y1,y2).
    [[nodiscard]] std::uint64_t sum(int x1, int y1, int x2, int y2) const {
        return tab(x2, y2) - tab(x1, y2) - tab(x2, y1) + tab(x1, y1);
    }

private:
    std::uint64_t& tab(int x, int y) {
        return table_[static_cast<std::size_t>(y) * (width_ + 1) + x];
    }
    [[nodiscard]] std::uint64_t tab(int x, int y) const {
        return table_[static_cast<std::size_t>(y) * (width_ + 1) + x];
    }

    int width_, height_;
    std::vector<std::uint64_t> table_;
};

/// Per-pixel local mean and mean absolute deviation over a border-clamped
/// square window.
struct LocalStats {
    int window = 0;
    std::vector<double> mean;
    std::vector<double> mean_dev;
};

/// Computes LocalStats for an odd window, clamping the window at image borders
/// instead of padding. The mean comes from an exact integer summed-area table;
/// the deviation pass walks each clamped window in row-major order.
inline LocalStats local_stats(const GrayImage& img, int window) {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("local_stats: window must be odd and >= 3");
    if (window > std::min(img.width, img.height))
        throw std::invalid_argument("local_stats: window larger than image");
    const int r = window / 2;
    LocalStats st;
    st.window = window;
    st.mean.resize(static_cast<std::size_t>(img.width) * img.height);
    st.mean_dev.resize(st.mean.size());
    Integral integ(img);
    for (int y = 0; y < img.height; ++y) {
        const int y1 = std::max(0, y - r), y2 = std::min(img.height, y + r + 1);
        for (int x = 0; x < img.width; ++x) {
            const int x1 = std::max(0, x - r), x2 = std::min(img.width, x + r + 1);
            const int count = (x2 - x1) * (y2 - y1);
            const double m =
                static_cast<double>(integ.sum(x1, y1, x2, y2)) / count;
            double dev = 0.0;
            for (int wy = y1; wy < y2; ++wy)
                for (int wx = x1; wx < x2; ++wx)
                    dev += std::abs(static_cast<double>(img.at(wx, wy)) - m);
            const std::size_t idx = static_cast<std::size_t>(y) * img.width + x;
            st.mean[idx] = m;
            st.mean_dev[idx] = dev / count;
        }
    }
    return st;
}

enum class Downscale { box_average, nearest };

/// Halves the resolution. box_average rounds the 2x2 mean to the nearest
/// integer; odd trailing rows/columns are dropped.
inline GrayImage downscale_half(const GrayImage& img, Downscale mode = Downscale::box_average) {
    GrayImage out(img.width / 2, img.height / 2, img.bit_depth);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            if (mode == Downscale::nearest) {
                out.at(x, y) = img.at(2 * x, 2 * y);
            } else {
                const unsigned s = img.at(2 * x, 2 * y) + img.at(2 * x + 1, 2 * y) +
                                   img.at(2 * x, 2 * y + 1) + img.at(2 * x + 1, 2 * y + 1);
                out.at(x, y) = static_cast<std::uint16_t>((s + 2) / 4);
            }
        }
    }
    return out;
}

namespace detail {

inline GrayImage load_pgm(std::ifstream& in, const std::string& path) {
    std::string magic;
    in >> magic;
    if (magic != "P5") throw FormatError(path + ": not a binary PGM (P5)");
    auto next_token = [&in, &path]() -> long {
        // skip whitespace and '#' comments
        int c;
        while ((c = in.peek()) != EOF) {
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        long v;
        if (!(in >> v)) throw FormatError(path + ": truncated PGM header");
        return v;
    };
    const long w = next_token();
    const long h = next_token();
    const long maxval = next_token();
    if (w <= 0 || h <= 0) throw FormatError(path + ": bad PGM dimensions");
    if (maxval != 255 && maxval != 65535)
        throw FormatError(path + ": unsupported PGM maxval " + std::to_string(maxval));
    in.get();  // single whitespace byte after maxval
    GrayImage img(static_cast<int>(w), static_cast<int>(h), maxval == 255 ? 8 : 16);
    const std::size_t n = img.pixels.size();
    if (maxval == 255) {
        std::vector<std::uint8_t> buf(n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw FormatError(path + ": truncated PGM data");
        std::copy(buf.begin(), buf.end(), img.pixels.begin());
    } else {
        std::vector<std::uint8_t> buf(n * 2);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 2));
        if (static_cast<std::size_t>(in.gcount()) != n * 2)
            throw FormatError(path + ": truncated PGM data");
        for (std::size_t i = 0; i < n; ++i)  // big-endian per the format
            img.pixels[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
    return img;
}

struct PngCloser {
    std::FILE* fp = nullptr;
    ~PngCloser() {
        if (fp) std::fclose(fp);
    }
};

inline GrayImage load_png(const std::string& path) {
    PngCloser f{std::fopen(path.c_str(), "rb")};
    if (!f.fp) throw IoError("load_gray: cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path + ": PNG decode failed");
    }
    png_init_io(png, f.fp);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path + ": not a single-channel grayscale PNG");
    }
    if (depth != 8 && depth != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path + ": unsupported PNG bit depth " + std::to_string(depth));
    }
    GrayImage img(static_cast<int>(png_get_image_width(png, info)),
                  static_cast<int>(png_get_image_height(png, info)), depth);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<std::uint8_t> row(rowbytes);
    for (int y = 0; y < img.height; ++y) {
        png_read_row(png, row.data(), nullptr);
        if (depth == 8) {
            for (int x = 0; x < img.width; ++x) img.at(x, y) = row[x];
        } else {
            for (int x = 0; x < img.width; ++x)  // PNG stores 16-bit big-endian
                img.at(x, y) =
                    static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

} // namespace detail

/// Loads an 8/16-bit single-channel PNG or binary PGM, detected by magic bytes.
inline GrayImage load_gray(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_gray: cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    in.seekg(0);
    if (magic[0] == 'P' && magic[1] == '5') return detail::load_pgm(in, path.string());
    if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') {
        in.close();
        return detail::load_png(path.string());
    }
    throw FormatError(path.string() + ": unrecognized image format");
}

/// Writes a binary PGM (P5); 16-bit samples are big-endian per the format.
inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_pgm: cannot write " + path.string());
    const int maxval = img.bit_depth == 8 ? 255 : 65535;
    out << "P5\n" << img.width << ' ' << img.height << '\n' << maxval << '\n';
    if (img.bit_depth == 8) {
        for (std::uint16_t v : img.pixels) out.put(static_cast<char>(v & 0xff));
    } else {
        for (std::uint16_t v : img.pixels) {
            out.put(static_cast<char>(v >> 8));
            out.put(static_cast<char>(v & 0xff));
        }
    }
    if (!out) throw IoError("save_pgm: write failed for " + path.string());
}

/// Writes an 8/16-bit grayscale PNG matching the image bit depth.
inline void save_png(const GrayImage& img, const std::filesystem::path& path) {
    detail::PngCloser f{std::fopen(path.string().c_str(), "wb")};
    if (!f.fp) throw IoError("save_png: cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("save_png: encode failed for " + path.string());
    }
    png_init_io(png, f.fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), img.bit_depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) *
                                  (img.bit_depth == 8 ? 1 : 2));
    for (int y = 0; y < img.height; ++y) {
        if (img.bit_depth == 8) {
            for (int x = 0; x < img.width; ++x)
                row[x] = static_cast<std::uint8_t>(img.at(x, y) & 0xff);
        } else {
            for (int x = 0; x < img.width; ++x) {
                row[2 * x] = static_cast<std::uint8_t>(img.at(x, y) >> 8);
                row[2 * x + 1] = static_cast<std::uint8_t>(img.at(x, y) & 0xff);
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace lume
