#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace lume {

/// A single annotated pixel. `direct` distinguishes light sources from reflections.
struct Keypoint {
    int x = 0;
    int y = 0;
    bool direct = true;

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

/// Axis-aligned pixel box with half-open extent [x1,x2) x [y1,y2).
struct Box {
    int x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    [[nodiscard]] std::int64_t area() const {
        return static_cast<std::int64_t>(x2 - x1) * (y2 - y1);
    }
    [[nodiscard]] bool valid() const { return x1 <= x2 && y1 <= y2; }

    friend bool operator==(const Box&, const Box&) = default;
    friend auto operator<=>(const Box&, const Box&) = default;
};

/// Box with real-valued corners, used for corner-wise means of pixel boxes.
struct BoxF {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    BoxF() = default;
    BoxF(double x1_, double y1_, double x2_, double y2_) : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {}
    BoxF(const Box& b)
        : x1(b.x1), y1(b.y1), x2(b.x2), y2(b.y2) {}

    [[nodiscard]] double area() const { return (x2 - x1) * (y2 - y1); }

    friend bool operator==(const BoxF&, const BoxF&) = default;
};

/// Half-open containment test: the KP counts as inside iff x1 <= x < x2 and y1 <= y < y2.
inline bool contains_kp(const Box& b, const Keypoint& k) {
    return b.x1 <= k.x && k.x < b.x2 && b.y1 <= k.y && k.y < b.y2;
}

/// Area-based intersection over union under half-open semantics.
/// Returns 0 when the union has zero area.
inline double iou(const BoxF& a, const BoxF& b) {
    const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
    const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

/// Corner-wise arithmetic mean of a non-empty box list. Corners stay real-valued.
inline BoxF mean_bb(std::span<const Box> boxes) {
    if (boxes.empty()) throw std::invalid_argument("mean_bb: empty box list");
    BoxF m;
    for (const Box& b : boxes) {
        m.x1 += b.x1;
        m.y1 += b.y1;
        m.x2 += b.x2;
        m.y2 += b.y2;
    }
    const double n = static_cast<double>(boxes.size());
    m.x1 /= n;
    m.y1 /= n;
    m.x2 /= n;
    m.y2 /= n;
    return m;
}

/// Minimal axis-aligned rectangle containing the position KP and all headlight
/// KPs. The lower-right corner is pushed out by one pixel so every input point
/// is inside the returned half-open box.
inline Box envelope_vehicle_bb(const Keypoint& position, std::span<const Keypoint> headlights) {
    if (headlights.empty()) throw std::invalid_argument("envelope_vehicle_bb: empty headlight list");
    int xmin = position.x, xmax = position.x;
    int ymin = position.y, ymax = position.y;
    for (const Keypoint& k : headlights) {
        xmin = std::min(xmin, k.x);
        xmax = std::max(xmax, k.x);
        ymin = std::min(ymin, k.y);
        ymax = std::max(ymax, k.y);
    }
    return Box{xmin, ymin, xmax + 1, ymax + 1};
}

} // namespace lume
