#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lume/geometry.hpp"
#include "lume/image.hpp"
#include "lume/saliency.hpp"

namespace lume {

/// Free parameters of the local mean/mean-deviation threshold.
struct AdaptiveParams {
    int window = 25;      // odd, >= 3
    double k = 0.06;      // bias against the image-max mean deviation
    int min_area = 4;     // pixels
    int max_boxes = 256;
    int connectivity = 4;

    void validate() const {
        if (window < 3 || window % 2 == 0)
            throw std::invalid_argument("AdaptiveParams: window must be odd and >= 3");
        if (min_area < 1) throw std::invalid_argument("AdaptiveParams: min_area must be >= 1");
    }
};

/// Parameters of the KP-seeded relative-threshold blob boxes.
struct SeededParams {
    double rel_factor = 0.7;  // binarize at rel_factor * KP intensity
    int connectivity = 4;

    void validate() const {
        if (rel_factor <= 0.0 || rel_factor > 1.0)
            throw std::invalid_argument("SeededParams: rel_factor must be in (0,1]");
    }
};

/// Locally adaptive binarization: mask[p] = 1 iff img[p] > T(p) with
/// T(p) = mean(p) * (1 + k * (mean_dev(p)/D_max - 1)), D_max the image-wide
/// maximum mean deviation (D_max = 0 degrades to T(p) = mean(p)).
inline Mask adaptive_mask(const GrayImage& img, const AdaptiveParams& params = {}) {
    params.validate();
    const LocalStats st = local_stats(img, params.window);
    double dmax = 0.0;
    for (double d : st.mean_dev) dmax = std::max(dmax, d);
    Mask mask(img.width, img.height);
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        const double t = dmax == 0.0
                             ? st.mean[i]
                             : st.mean[i] * (1.0 + params.k * (st.mean_dev[i] / dmax - 1.0));
        mask.data[i] = static_cast<double>(img.pixels[i]) > t ? 1 : 0;
    }
    return mask;
}

/// Tight half-open enclosing box per connected component with at least
/// min_area pixels. Ordered by descending area, ties by (y1, x1), truncated
/// to max_boxes.
inline std::vector<Box> connected_boxes(const Mask& mask, int min_area = 1, int max_boxes = 256,
                                        int connectivity = 4) {
    std::vector<std::int32_t> label(mask.data.size(), -1);
    static constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int ndirs = connectivity == 8 ? 8 : 4;
    struct Component {
        Box box;
        std::int64_t area = 0;
    };
    std::vector<Component> comps;
    std::vector<std::pair<int, int>> stack;
    for (int sy = 0; sy < mask.height; ++sy) {
        for (int sx = 0; sx < mask.width; ++sx) {
            const std::size_t sidx = static_cast<std::size_t>(sy) * mask.width + sx;
            if (!mask.data[sidx] || label[sidx] >= 0) continue;
            const auto id = static_cast<std::int32_t>(comps.size());
            Component c{Box{sx, sy, sx + 1, sy + 1}, 0};
            label[sidx] = id;
            stack.assign(1, {sx, sy});
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                ++c.area;
                c.box.x1 = std::min(c.box.x1, x);
                c.box.y1 = std::min(c.box.y1, y);
                c.box.x2 = std::max(c.box.x2, x + 1);
                c.box.y2 = std::max(c.box.y2, y + 1);
                for (int d = 0; d < ndirs; ++d) {
                    const int nx = x + dx8[d], ny = y + dy8[d];
                    if (nx < 0 || nx >= mask.width || ny < 0 || ny >= mask.height) continue;
                    const std::size_t nidx = static_cast<std::size_t>(ny) * mask.width + nx;
                    if (mask.data[nidx] && label[nidx] < 0) {
                        label[nidx] = id;
                        stack.push_back({nx, ny});
                    }
                }
            }
            comps.push_back(c);
        }
    }
    std::erase_if(comps, [min_area](const Component& c) { return c.area < min_area; });
    std::sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
        if (a.area != b.area) return a.area > b.area;
        return std::tie(a.box.y1, a.box.x1) < std::tie(b.box.y1, b.box.x1);
    });
    if (static_cast<int>(comps.size()) > max_boxes) comps.resize(max_boxes);
    std::vector<Box> boxes;
    boxes.reserve(comps.size());
    for (const Component& c : comps) boxes.push_back(c.box);
    return boxes;
}

/// Splits candidates into those containing at least one KP (kept) and the
/// rest (rejected). Input order is preserved in both lists.
inline std::pair<std::vector<Box>, std::vector<Box>> filter_by_kps(
    std::span<const Box> candidates, std::span<const Keypoint> kps) {
    std::vector<Box> kept, rejected;
    for (const Box& b : candidates) {
        const bool hit = std::any_of(kps.begin(), kps.end(),
                                     [&b](const Keypoint& k) { return contains_kp(b, k); });
        (hit ? kept : rejected).push_back(b);
    }
    return {std::move(kept), std::move(rejected)};
}

/// One blob box per KP: binarize at rel_factor * KP intensity, flood from the
/// KP and take the tight enclosing box. Zero-intensity KPs yield their own
/// 1-pixel box. Boxes with identical coordinates are deduplicated, first
/// occurrence wins.
inline std::vector<Box> kp_seeded_boxes(const GrayImage& img, std::span<const Keypoint> kps,
                                        const SeededParams& params = {}) {
    params.validate();
    std::vector<Box> boxes;
    for (const Keypoint& kp : kps) {
        if (!img.in_bounds(kp.x, kp.y))
            throw std::invalid_argument("kp_seeded_boxes: keypoint out of bounds");
        const int intensity = img.at(kp.x, kp.y);
        Box box{kp.x, kp.y, kp.x + 1, kp.y + 1};
        if (intensity > 0) {
            const int threshold =
                std::max(1, static_cast<int>(std::ceil(params.rel_factor * intensity)));
            const Mask region =
                flood_region(boolean_map(img, threshold), kp, params.connectivity);
            for (int y = 0; y < region.height; ++y)
                for (int x = 0; x < region.width; ++x)
                    if (region.at(x, y)) {
                        box.x1 = std::min(box.x1, x);
                        box.y1 = std::min(box.y1, y);
                        box.x2 = std::max(box.x2, x + 1);
                        box.y2 = std::max(box.y2, y + 1);
                    }
        }
        if (std::find(boxes.begin(), boxes.end(), box) == boxes.end()) boxes.push_back(box);
    }
    return boxes;
}

/// Context patches for classification: each box is scaled about its center,
/// clamped to the image and resampled to out_size x out_size by area-weighted
/// box averaging. Zero-area boxes after clamping are skipped and reported in
/// `skipped` when provided.
inline std::vector<GrayImage> extract_patches(const GrayImage& img, std::span<const Box> boxes,
                                              double scale = 2.0, int out_size = 64,
                                              std::vector<std::string>* skipped = nullptr) {
    std::vector<GrayImage> patches;
    for (std::size_t bi = 0; bi < boxes.size(); ++bi) {
        const Box& b = boxes[bi];
        const double cx = 0.5 * (b.x1 + b.x2), cy = 0.5 * (b.y1 + b.y2);
        const long sw = std::lround(scale * (b.x2 - b.x1));
        const long sh = std::lround(scale * (b.y2 - b.y1));
        int x1 = static_cast<int>(std::lround(cx - 0.5 * static_cast<double>(sw)));
        int y1 = static_cast<int>(std::lround(cy - 0.5 * static_cast<double>(sh)));
        int x2 = static_cast<int>(x1 + sw), y2 = static_cast<int>(y1 + sh);
        x1 = std::max(0, x1);
        y1 = std::max(0, y1);
        x2 = std::min(img.width, x2);
        y2 = std::min(img.height, y2);
        if (x2 <= x1 || y2 <= y1) {
            if (skipped)
                skipped->push_back("box " + std::to_string(bi) +
                                   ": zero area after clamping, skipped");
            continue;
        }
        GrayImage patch(out_size, out_size, img.bit_depth);
        const double w = x2 - x1, h = y2 - y1;
        for (int oy = 0; oy < out_size; ++oy) {
            const double sy0 = y1 + h * oy / out_size, sy1 = y1 + h * (oy + 1) / out_size;
            for (int ox = 0; ox < out_size; ++ox) {
                const double sx0 = x1 + w * ox / out_size, sx1 = x1 + w * (ox + 1) / out_size;
                double acc = 0.0, weight = 0.0;
                for (int py = static_cast<int>(std::floor(sy0));
                     py < static_cast<int>(std::ceil(sy1)); ++py) {
                    const double wy = std::min(sy1, static_cast<double>(py + 1)) -
                                      std::max(sy0, static_cast<double>(py));
                    for (int px = static_cast<int>(std::floor(sx0));
                         px < static_cast<int>(std::ceil(sx1)); ++px) {
                        const double wx = std::min(sx1, static_cast<double>(px + 1)) -
                                          std::max(sx0, static_cast<double>(px));
                        acc += wx * wy * img.at(px, py);
                        weight += wx * wy;
                    }
                }
                patch.at(ox, oy) = static_cast<std::uint16_t>(std::lround(acc / weight));
            }
        }
        patches.push_back(std::move(patch));
    }
    return patches;
}

} // namespace lume
