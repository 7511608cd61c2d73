#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lume/annotations.hpp"
#include "lume/image.hpp"

namespace lume {

/// One Gaussian light blob. Direct blobs stand in for headlamps, indirect
/// ones for reflections.
struct BlobSpec {
    double cx = 0.0, cy = 0.0;
    double amplitude = 255.0;
    double sigma = 2.0;
    bool direct = true;

    friend bool operator==(const BlobSpec&, const BlobSpec&) = default;
};

/// Frame sequence of blobs plus rendering parameters. Fully deterministic for
/// a fixed rng_seed.
struct SynthScene {
    int width = 256;
    int height = 256;
    int bit_depth = 8;
    std::vector<std::vector<BlobSpec>> frames;
    double noise_sigma = 0.0;
    std::uint64_t rng_seed = 0;
};

namespace detail {

/// Deterministic Box-Muller normal on top of mt19937_64; std::normal_distribution
/// is implementation-defined and would break byte-identical reruns across stdlibs.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

private:
    double uniform() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace detail

/// Renders the scene and synthesizes the matching annotation. Each blob
/// becomes an instance KP at round(center); one vehicle per direct blob with
/// the indirect blobs attached to their nearest direct blob. Blob list
/// positions double as stable ids across frames.
inline std::pair<std::vector<GrayImage>, SceneAnnotation> render(const SynthScene& scene,
                                                                 int scene_id = 0) {
    std::vector<GrayImage> images;
    SceneAnnotation ann;
    ann.scene_id = scene_id;
    ann.exposure = Exposure::night;
    const double maxval = (1u << scene.bit_depth) - 1;
    for (std::size_t fi = 0; fi < scene.frames.size(); ++fi) {
        const auto& blobs = scene.frames[fi];
        for (const BlobSpec& b : blobs) {
            if (b.amplitude <= 0.0 || b.sigma <= 0.0)
                throw std::invalid_argument("render: amplitude and sigma must be positive");
            if (b.cx < 0 || b.cx >= scene.width || b.cy < 0 || b.cy >= scene.height)
                throw std::invalid_argument("render: blob center out of bounds in frame " +
                                            std::to_string(fi));
        }
        GrayImage img(scene.width, scene.height, scene.bit_depth);
        detail::NormalSampler noise(scene.rng_seed * 0x9e3779b97f4a7c15ull + fi + 1);
        for (int y = 0; y < scene.height; ++y) {
            for (int x = 0; x < scene.width; ++x) {
                double v = 0.0;
                for (const BlobSpec& b : blobs) {
                    const double dx = x - b.cx, dy = y - b.cy;
                    v += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
                }
                if (scene.noise_sigma > 0.0) v += scene.noise_sigma * noise.next();
                img.at(x, y) = static_cast<std::uint16_t>(
                    std::lround(std::clamp(v, 0.0, maxval)));
            }
        }
        images.push_back(std::move(img));

        FrameAnnotation frame;
        frame.frame_id = static_cast<int>(fi);
        frame.image_path = "images/frame_" + std::to_string(fi) + ".png";
        std::vector<int> direct_ids;
        for (std::size_t bi = 0; bi < blobs.size(); ++bi)
            if (blobs[bi].direct) direct_ids.push_back(static_cast<int>(bi));
        auto kp_of = [](const BlobSpec& b, bool direct) {
            return Keypoint{static_cast<int>(std::lround(b.cx)),
                            static_cast<int>(std::lround(b.cy)), direct};
        };
        if (direct_ids.empty()) {
            if (!blobs.empty()) {
                VehicleAnnotation v;
                v.id = 0;
                v.direct = false;
                v.position = kp_of(blobs[0], false);
                for (std::size_t bi = 0; bi < blobs.size(); ++bi)
                    v.instances.push_back({static_cast<int>(bi), kp_of(blobs[bi], false)});
                frame.vehicles.push_back(std::move(v));
            }
        } else {
            std::vector<VehicleAnnotation> vehicles;
            for (int d : direct_ids) {
                VehicleAnnotation v;
                v.id = d;
                v.direct = true;
                v.position = kp_of(blobs[d], true);
                v.instances.push_back({d, kp_of(blobs[d], true)});
                vehicles.push_back(std::move(v));
            }
            for (std::size_t bi = 0; bi < blobs.size(); ++bi) {
                if (blobs[bi].direct) continue;
                // attach to the nearest direct blob
                int best = 0;
                double best_d2 = std::numeric_limits<double>::infinity();
                for (std::size_t vi = 0; vi < direct_ids.size(); ++vi) {
                    const BlobSpec& db = blobs[direct_ids[vi]];
                    const double dx = db.cx - blobs[bi].cx, dy = db.cy - blobs[bi].cy;
                    const double d2 = dx * dx + dy * dy;
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = static_cast<int>(vi);
                    }
                }
                vehicles[best].instances.push_back(
                    {static_cast<int>(bi), kp_of(blobs[bi], false)});
            }
            frame.vehicles = std::move(vehicles);
        }
        ann.frames.push_back(std::move(frame));
    }
    return {std::move(images), std::move(ann)};
}

/// Translates every blob by `velocity` per frame index. Blob ids (list
/// positions) stay fixed, so annotation ids are stable across frames.
inline SynthScene drift(const SynthScene& scene, double vx, double vy) {
    SynthScene out = scene;
    for (std::size_t fi = 0; fi < out.frames.size(); ++fi) {
        for (BlobSpec& b : out.frames[fi]) {
            b.cx += vx * static_cast<double>(fi);
            b.cy += vy * static_cast<double>(fi);
            if (b.cx < 0 || b.cx >= scene.width || b.cy < 0 || b.cy >= scene.height)
                throw std::invalid_argument("drift: blob drifts out of bounds at frame " +
                                            std::to_string(fi));
        }
    }
    return out;
}

/// A frame list replicating `blobs` `n_frames` times, convenient with drift().
inline std::vector<std::vector<BlobSpec>> repeat_blobs(const std::vector<BlobSpec>& blobs,
                                                       int n_frames) {
    return std::vector<std::vector<BlobSpec>>(static_cast<std::size_t>(n_frames), blobs);
}

} // namespace lume
