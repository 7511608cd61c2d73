#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "lume/errors.hpp"
#include "lume/geometry.hpp"
#include "lume/image.hpp"

namespace lume {

/// Parameters of the seeded Boolean-map saliency sweep. `step` is on the
/// 0-255 scale for 8-bit sources and is scaled x256 for 16-bit ones.
struct BmsParams {
    int step = 8;
    double cap_factor = 1.2;
    int connectivity = 4;  // 4 or 8
};

/// Saliency conditioned on a single seed KP. Values are the fraction of swept
/// thresholds whose flooded region contains the pixel.
struct SaliencyMap {
    int width = 0;
    int height = 0;
    Keypoint seed;
    int thresholds_used = 0;
    bool degenerate = false;  // seed intensity below the first threshold
    std::vector<float> values;

    [[nodiscard]] float at(int x, int y) const {
        return values[static_cast<std::size_t>(y) * width + x];
    }
    float& at(int x, int y) {
        return values[static_cast<std::size_t>(y) * width + x];
    }
};

/// mask[p] = 1 iff img[p] >= threshold.
inline Mask boolean_map(const GrayImage& img, int threshold) {
    Mask m(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        m.data[i] = img.pixels[i] >= threshold ? 1 : 0;
    return m;
}

/// Connected component of set pixels containing the seed; empty mask when the
/// seed pixel itself is unset. Connectivity 4 or 8.
inline Mask flood_region(const Mask& mask, const Keypoint& seed, int connectivity = 4) {
    if (seed.x < 0 || seed.x >= mask.width || seed.y < 0 || seed.y >= mask.height)
        throw std::invalid_argument("flood_region: seed out of bounds");
    Mask out(mask.width, mask.height);
    if (!mask.at(seed.x, seed.y)) return out;
    std::vector<std::pair<int, int>> stack{{seed.x, seed.y}};
    out.at(seed.x, seed.y) = 1;
    static constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int ndirs = connectivity == 8 ? 8 : 4;
    while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        for (int d = 0; d < ndirs; ++d) {
            const int nx = x + dx8[d], ny = y + dy8[d];
            if (nx < 0 || nx >= mask.width || ny < 0 || ny >= mask.height) continue;
            if (mask.at(nx, ny) && !out.at(nx, ny)) {
                out.at(nx, ny) = 1;
                stack.push_back({nx, ny});
            }
        }
    }
    return out;
}

/// Seeded Boolean-map saliency. Thresholds sweep t = step, 2*step, ... up to
/// min(cap_factor * seed intensity, max intensity); each swept threshold
/// contributes its flood region from the seed, and empty regions still count
/// in the denominator. A seed dimmer than the first threshold yields an
/// all-zero map with the degenerate flag set.
inline SaliencyMap saliency_map(const GrayImage& img, const Keypoint& seed,
                                const BmsParams& params = {}) {
    if (!img.in_bounds(seed.x, seed.y))
        throw std::invalid_argument("saliency_map: seed out of bounds");
    if (params.step < 1) throw std::invalid_argument("saliency_map: step must be >= 1");
    if (params.cap_factor <= 1.0)
        throw std::invalid_argument("saliency_map: cap_factor must be > 1");
    const int step = img.bit_depth == 16 ? params.step * 256 : params.step;
    const int seed_val = img.at(seed.x, seed.y);
    const double cap =
        std::min(params.cap_factor * seed_val, static_cast<double>(img.max_value()));
    SaliencyMap map;
    map.width = img.width;
    map.height = img.height;
    map.seed = seed;
    map.values.assign(static_cast<std::size_t>(img.width) * img.height, 0.0f);
    const int n = static_cast<int>(std::floor(cap / step));
    map.thresholds_used = n;
    map.degenerate = seed_val < step;
    if (n == 0 || map.degenerate) return map;
    std::vector<int> counts(map.values.size(), 0);
    for (int k = 1; k <= n; ++k) {
        const Mask region = flood_region(boolean_map(img, k * step), seed, params.connectivity);
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += region.data[i];
    }
    for (std::size_t i = 0; i < counts.size(); ++i)
        map.values[i] = static_cast<float>(counts[i]) / static_cast<float>(n);
    return map;
}

/// Stored saliency value at p; throws on out-of-bounds lookups.
inline double saliency_at(const SaliencyMap& map, const Keypoint& p) {
    if (p.x < 0 || p.x >= map.width || p.y < 0 || p.y >= map.height)
        throw std::invalid_argument("saliency_at: point out of bounds");
    return map.at(p.x, p.y);
}

/// Exports the map as a 16-bit PNG with values scaled by 65535 and rounded.
inline void save_saliency_png(const SaliencyMap& map, const std::filesystem::path& path) {
    GrayImage img(map.width, map.height, 16);
    for (std::size_t i = 0; i < map.values.size(); ++i)
        img.pixels[i] =
            static_cast<std::uint16_t>(std::lround(static_cast<double>(map.values[i]) * 65535.0));
    save_png(img, path);
}

/// Raw float32 little-endian dump with an 8-byte header (uint32 width, height).
inline void save_saliency_raw(const SaliencyMap& map, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_saliency_raw: cannot write " + path.string());
    const std::uint32_t wh[2] = {static_cast<std::uint32_t>(map.width),
                                 static_cast<std::uint32_t>(map.height)};
    out.write(reinterpret_cast<const char*>(wh), sizeof(wh));
    out.write(reinterpret_cast<const char*>(map.values.data()),
              static_cast<std::streamsize>(map.values.size() * sizeof(float)));
    if (!out) throw IoError("save_saliency_raw: write failed for " + path.string());
}

} // namespace lume
