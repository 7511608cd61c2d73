// lume: batch front end for keypoint-annotated low-light datasets.
// Subcommands: synth, saliency, genboxes, eval, consistency, tune.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lume/lume.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

/// Deterministic RNG helpers. std::*_distribution is implementation-defined,
/// which would break byte-identical reruns, so draws come straight from the
/// engine's bits.
struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double uniform(double lo, double hi) {
        const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }
    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(engine() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

/// Runs fn(0..n) on `jobs` workers. Output must go to index-addressed slots or
/// per-index files so the result is independent of scheduling.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < jobs; ++t) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

struct CommonOpts {
    std::string dataset;
    std::string out = "out";
    std::uint64_t seed = 0;
    int jobs = 1;
    bool half_res = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_dataset = true) {
    auto* ds = cmd->add_option("--dataset", opts.dataset, "Dataset root directory");
    if (needs_dataset) ds->required();
    cmd->add_option("--out", opts.out, "Output directory");
    cmd->add_option("--seed", opts.seed, "RNG seed");
    cmd->add_option("--jobs", opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--half-res", opts.half_res, "Halve image resolution before box generation");
}

struct FlatFrame {
    int scene_id = 0;
    const lume::SceneAnnotation* scene = nullptr;
    const lume::FrameAnnotation* frame = nullptr;
};

std::vector<FlatFrame> flatten(const std::vector<lume::SceneAnnotation>& scenes) {
    std::vector<FlatFrame> out;
    for (const auto& s : scenes)
        for (const auto& f : s.frames) out.push_back({s.scene_id, &s, &f});
    return out;
}

/// Unique frame key across scenes for the metric accumulators.
int frame_key(int scene_id, int frame_id) { return scene_id * 100000 + frame_id; }

json box_to_json(const lume::Box& b, double score) {
    return json{{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}, {"score", score}};
}

void write_json(const json& js, const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw lume::IoError("cannot write " + path.string());
    out << js.dump(2) << '\n';
    if (!out) throw lume::IoError("write failed for " + path.string());
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw lume::IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw lume::ValidationError(path.string() + ": parse error at byte " +
                                    std::to_string(e.byte) + ": " + e.what());
    }
}

lume::GrayImage load_frame_image(const fs::path& root, const lume::FrameAnnotation& frame) {
    const fs::path path = root / frame.image_path;
    if (!fs::exists(path))
        throw lume::IoError("missing image for frame " + std::to_string(frame.frame_id) + ": " +
                            path.string());
    return lume::load_gray(path);
}

// ---------------------------------------------------------------- synth ----

struct SynthOpts {
    CommonOpts common;
    int width = 256, height = 256;
    int frames = 10;
    int vehicles = 3;
    int reflections = 2;
    double noise = 0.0;
    double drift_x = 0.0, drift_y = 0.0;
};

int run_synth(const SynthOpts& o) {
    lume::SynthScene scene;
    scene.width = o.width;
    scene.height = o.height;
    scene.noise_sigma = o.noise;
    scene.rng_seed = o.common.seed;
    Rng rng(o.common.seed);
    std::vector<lume::BlobSpec> blobs;
    const double margin = 24.0;
    const double min_sep = 40.0;
    auto place = [&](bool direct) {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            lume::BlobSpec b;
            b.cx = rng.uniform(margin, o.width - margin);
            b.cy = rng.uniform(margin, o.height - margin);
            b.amplitude = rng.uniform(180.0, 255.0);
            b.sigma = rng.uniform(1.5, 3.0);
            b.direct = direct;
            bool ok = true;
            for (const auto& other : blobs) {
                const double dx = b.cx - other.cx, dy = b.cy - other.cy;
                if (dx * dx + dy * dy < min_sep * min_sep) ok = false;
            }
            if (ok) {
                blobs.push_back(b);
                return;
            }
        }
        throw lume::ValidationError("synth: could not place blobs with the requested separation");
    };
    for (int v = 0; v < o.vehicles; ++v) place(true);
    for (int r = 0; r < o.reflections; ++r) place(false);
    scene.frames = lume::repeat_blobs(blobs, o.frames);
    if (o.drift_x != 0.0 || o.drift_y != 0.0) scene = lume::drift(scene, o.drift_x, o.drift_y);

    auto [images, ann] = lume::render(scene);
    const fs::path root(o.common.out);
    fs::create_directories(root / "images");
    for (std::size_t i = 0; i < images.size(); ++i)
        lume::save_png(images[i], root / ann.frames[i].image_path);
    lume::save_dataset({ann}, root);
    std::cout << "wrote " << images.size() << " frames to " << root.string() << '\n';
    return 0;
}

// ------------------------------------------------------------- saliency ----

struct SaliencyOpts {
    CommonOpts common;
    lume::BmsParams bms;
    bool combined = false;
};

int run_saliency(const SaliencyOpts& o) {
    const auto scenes = lume::load_dataset(o.common.dataset);
    const auto frames = flatten(scenes);
    const fs::path outdir = fs::path(o.common.out) / "saliency";
    parallel_for(frames.size(), o.common.jobs, [&](std::size_t i) {
        const FlatFrame& ff = frames[i];
        const lume::GrayImage img = load_frame_image(o.common.dataset, *ff.frame);
        const fs::path dir = outdir / ("scene_" + std::to_string(ff.scene_id));
        fs::create_directories(dir);
        lume::GrayImage combined(img.width, img.height, 16);
        for (const auto& v : ff.frame->vehicles) {
            for (const auto& inst : v.instances) {
                if (!img.in_bounds(inst.kp.x, inst.kp.y))
                    throw lume::ValidationError(
                        "saliency: keypoint out of image bounds in frame " +
                        std::to_string(ff.frame->frame_id));
                const lume::SaliencyMap map = lume::saliency_map(img, inst.kp, o.bms);
                lume::save_saliency_png(map, dir / ("frame_" +
                                                    std::to_string(ff.frame->frame_id) + "_kp" +
                                                    std::to_string(inst.id) + ".png"));
                if (o.combined)
                    for (std::size_t p = 0; p < map.values.size(); ++p)
                        combined.pixels[p] = std::max(
                            combined.pixels[p],
                            static_cast<std::uint16_t>(
                                std::lround(static_cast<double>(map.values[p]) * 65535.0)));
            }
        }
        if (o.combined)
            lume::save_png(combined, dir / ("frame_" + std::to_string(ff.frame->frame_id) +
                                            "_combined.png"));
    });
    std::cout << "saliency maps written to " << outdir.string() << '\n';
    return 0;
}

// ------------------------------------------------------------- genboxes ----

struct GenboxesOpts {
    CommonOpts common;
    std::string mode = "adaptive";
    lume::AdaptiveParams adaptive;
    lume::SeededParams seeded;
};

int run_genboxes(const GenboxesOpts& o) {
    const auto scenes = lume::load_dataset(o.common.dataset);
    const auto frames = flatten(scenes);
    const fs::path outdir = fs::path(o.common.out) / "boxes";
    parallel_for(frames.size(), o.common.jobs, [&](std::size_t i) {
        const FlatFrame& ff = frames[i];
        lume::GrayImage img = load_frame_image(o.common.dataset, *ff.frame);
        std::vector<lume::Keypoint> kps = ff.frame->instance_kps();
        int scale = 1;
        if (o.common.half_res) {
            img = lume::downscale_half(img);
            scale = 2;
            for (auto& k : kps) {
                k.x /= 2;
                k.y /= 2;
            }
        }
        std::vector<lume::Box> kept, rejected;
        if (o.mode == "adaptive") {
            const lume::Mask mask = lume::adaptive_mask(img, o.adaptive);
            const auto candidates = lume::connected_boxes(mask, o.adaptive.min_area,
                                                          o.adaptive.max_boxes,
                                                          o.adaptive.connectivity);
            std::tie(kept, rejected) = lume::filter_by_kps(candidates, kps);
        } else {
            kept = lume::kp_seeded_boxes(img, kps, o.seeded);
        }
        auto upscale = [scale](lume::Box b) {
            return lume::Box{b.x1 * scale, b.y1 * scale, b.x2 * scale, b.y2 * scale};
        };
        const fs::path dir = outdir / ("scene_" + std::to_string(ff.scene_id));
        json jf;
        jf["frame_id"] = ff.frame->frame_id;
        jf["boxes"] = json::array();
        for (const auto& b : kept) jf["boxes"].push_back(box_to_json(upscale(b), 1.0));
        write_json(jf, dir / ("frame_" + std::to_string(ff.frame->frame_id) + ".json"));
        if (o.mode == "adaptive") {
            json jr;
            jr["frame_id"] = ff.frame->frame_id;
            jr["boxes"] = json::array();
            for (const auto& b : rejected) jr["boxes"].push_back(box_to_json(upscale(b), 1.0));
            write_json(jr,
                       dir / ("frame_" + std::to_string(ff.frame->frame_id) + "_rejected.json"));
        }
    });
    std::cout << "boxes written to " << outdir.string() << '\n';
    return 0;
}

// ----------------------------------------------------------------- eval ----

struct EvalOpts {
    CommonOpts common;
    std::string kind = "boxes";
    std::string pred;
    lume::BmsParams bms;
    std::vector<double> thresholds;
};

json threshold_entry_json(const lume::ThresholdEntry& e) {
    return json{{"threshold", e.threshold},
                {"precision", e.precision},
                {"recall", e.recall},
                {"ap", e.ap}};
}

int run_eval(const EvalOpts& o) {
    const auto scenes = lume::load_dataset(o.common.dataset);
    const auto frames = flatten(scenes);
    const fs::path preddir(o.pred);
    const fs::path outdir(o.common.out);
    fs::create_directories(outdir);

    if (o.kind == "boxes") {
        std::vector<lume::BoxFrame> pred;
        std::vector<lume::KpFrame> gt;
        for (const FlatFrame& ff : frames) {
            const fs::path file = preddir / ("scene_" + std::to_string(ff.scene_id)) /
                                  ("frame_" + std::to_string(ff.frame->frame_id) + ".json");
            const json jf = read_json(file);
            lume::BoxFrame bf;
            bf.frame_id = frame_key(ff.scene_id, ff.frame->frame_id);
            try {
                for (const auto& jb : jf.at("boxes"))
                    bf.boxes.push_back({jb.at("x1").get<int>(), jb.at("y1").get<int>(),
                                        jb.at("x2").get<int>(), jb.at("y2").get<int>()});
            } catch (const json::exception& e) {
                throw lume::ValidationError(file.string() + ": " + e.what());
            }
            pred.push_back(std::move(bf));
            gt.push_back({frame_key(ff.scene_id, ff.frame->frame_id), ff.frame->instance_kps()});
        }
        const lume::BoxEvalReport rep = lume::evaluate_boxes(pred, gt);
        json js{{"tp", rep.tp},
                {"fp", rep.fp},
                {"fn", rep.fn},
                {"precision", rep.precision},
                {"recall", rep.recall},
                {"f_score", rep.f_score},
                {"q_k", rep.q_k},
                {"q_b", rep.q_b},
                {"q", rep.q},
                {"zero_tp", rep.zero_tp}};
        js["per_frame"] = json::array();
        for (const auto& fc : rep.per_frame)
            js["per_frame"].push_back(
                {{"frame", fc.frame_id}, {"tp", fc.tp}, {"fp", fc.fp}, {"fn", fc.fn}});
        write_json(js, outdir / "box_eval.json");
        std::ostringstream table;
        table << "metric      value\n"
              << "precision   " << rep.precision << "\n"
              << "recall      " << rep.recall << "\n"
              << "f_score     " << rep.f_score << "\n"
              << "q_k         " << rep.q_k << "\n"
              << "q_b         " << rep.q_b << "\n"
              << "q           " << rep.q << "\n";
        std::ofstream(outdir / "box_eval.txt") << table.str();
        std::cout << table.str();
        return 0;
    }

    // keypoints
    std::vector<lume::KpPredFrame> pred(frames.size());
    std::vector<lume::KpGtFrame> gt(frames.size());
    parallel_for(frames.size(), o.common.jobs, [&](std::size_t i) {
        const FlatFrame& ff = frames[i];
        const fs::path file = preddir / ("scene_" + std::to_string(ff.scene_id)) /
                              ("frame_" + std::to_string(ff.frame->frame_id) + ".json");
        const json jf = read_json(file);
        lume::KpPredFrame pf;
        pf.frame_id = frame_key(ff.scene_id, ff.frame->frame_id);
        try {
            for (const auto& jk : jf.at("keypoints"))
                pf.preds.push_back({{jk.at("x").get<int>(), jk.at("y").get<int>(), true},
                                    jk.at("score").get<double>()});
        } catch (const json::exception& e) {
            throw lume::ValidationError(file.string() + ": " + e.what());
        }
        const lume::GrayImage img = load_frame_image(o.common.dataset, *ff.frame);
        lume::KpGtFrame gf;
        gf.frame_id = pf.frame_id;
        for (const auto& kp : ff.frame->instance_kps()) {
            gf.kps.push_back(kp);
            gf.maps.push_back(lume::saliency_map(img, kp, o.bms));
        }
        pred[i] = std::move(pf);
        gt[i] = std::move(gf);
    });
    const lume::KpEvalReport rep =
        o.thresholds.empty() ? lume::evaluate_keypoints(pred, gt)
                             : lume::evaluate_keypoints(pred, gt, o.thresholds);
    json js{{"map", rep.map}, {"mar", rep.mar}};
    js["per_threshold"] = json::array();
    for (const auto& e : rep.per_threshold) js["per_threshold"].push_back(threshold_entry_json(e));
    js["matches"] = json::array();
    for (const auto& fm : rep.matches) {
        json jm{{"frame", fm.frame_id}, {"pairs", json::array()}};
        for (const auto& m : fm.matches)
            jm["pairs"].push_back(
                {{"pred", m.pred_index}, {"gt", m.gt_index}, {"kps", m.kps}});
        js["matches"].push_back(std::move(jm));
    }
    write_json(js, outdir / "kp_eval.json");
    std::ostringstream table;
    table << "mAP  " << rep.map << "\nmAR  " << rep.mar << "\n";
    std::ofstream(outdir / "kp_eval.txt") << table.str();
    std::cout << table.str();
    return 0;
}

// ---------------------------------------------------------- consistency ----

struct ConsistencyOpts {
    std::vector<std::string> files;
    CommonOpts common;
    int bins = 20;
};

int run_consistency(const ConsistencyOpts& o) {
    if (o.files.size() < 2)
        throw lume::ValidationError("consistency: need at least 2 annotator files");
    // stream name -> frame_id -> per-annotator box
    std::map<std::string, std::map<int, std::vector<std::optional<lume::Box>>>> streams;
    for (std::size_t ai = 0; ai < o.files.size(); ++ai) {
        const json ja = read_json(o.files[ai]);
        try {
            for (const auto& jf : ja.at("frames")) {
                const int fid = jf.at("frame_id").get<int>();
                for (const char* stream : {"direct", "indirect"}) {
                    auto& slot = streams[stream][fid];
                    slot.resize(o.files.size());
                    if (jf.contains(stream) && !jf.at(stream).is_null()) {
                        const auto& jb = jf.at(stream);
                        slot[ai] = lume::Box{jb.at("x1").get<int>(), jb.at("y1").get<int>(),
                                             jb.at("x2").get<int>(), jb.at("y2").get<int>()};
                    }
                }
            }
        } catch (const json::exception& e) {
            throw lume::ValidationError(o.files[ai] + ": " + e.what());
        }
    }
    const fs::path outdir(o.common.out);
    fs::create_directories(outdir);
    json js;
    for (const auto& [name, by_frame] : streams) {
        std::vector<std::vector<std::optional<lume::Box>>> frames;
        for (const auto& [fid, boxes] : by_frame) {
            auto padded = boxes;
            padded.resize(o.files.size());
            frames.push_back(padded);
        }
        const lume::ConsistencyReport rep = lume::consistency_report(frames, o.bins);
        json jr{{"median_iou", rep.median_iou}, {"bins", rep.bins}};
        jr["histogram"] = rep.histogram;
        jr["per_frame_iou"] = rep.per_frame_iou;
        js[name] = std::move(jr);
        std::ofstream csv(outdir / ("consistency_" + name + ".csv"));
        csv << "bin_left,bin_right,count\n";
        for (int b = 0; b < rep.bins; ++b)
            csv << static_cast<double>(b) / rep.bins << ','
                << static_cast<double>(b + 1) / rep.bins << ',' << rep.histogram[b] << '\n';
        std::cout << name << " median IoU: " << rep.median_iou << '\n';
    }
    write_json(js, outdir / "consistency.json");
    return 0;
}

// ----------------------------------------------------------------- tune ----

struct TuneOpts {
    CommonOpts common;
    int budget = 50;
    std::string mode = "adaptive";
};

int run_tune(const TuneOpts& o) {
    if (o.budget < 1) throw lume::ValidationError("tune: budget must be >= 1");
    auto scenes = lume::load_dataset(o.common.dataset);
    // optional validation-split marker: split.json {"val": [scene ids]}
    const fs::path split_file = fs::path(o.common.dataset) / "split.json";
    if (fs::exists(split_file)) {
        const json js = read_json(split_file);
        std::set<int> val(js.at("val").begin(), js.at("val").end());
        std::erase_if(scenes,
                      [&val](const lume::SceneAnnotation& s) { return !val.contains(s.scene_id); });
        if (scenes.empty()) throw lume::ValidationError("tune: validation split is empty");
    }
    const auto frames = flatten(scenes);
    std::vector<lume::GrayImage> images(frames.size());
    std::vector<std::vector<lume::Keypoint>> kps(frames.size());
    parallel_for(frames.size(), o.common.jobs, [&](std::size_t i) {
        lume::GrayImage img = load_frame_image(o.common.dataset, *frames[i].frame);
        std::vector<lume::Keypoint> k = frames[i].frame->instance_kps();
        if (o.common.half_res) {
            img = lume::downscale_half(img);
            for (auto& p : k) {
                p.x /= 2;
                p.y /= 2;
            }
        }
        images[i] = std::move(img);
        kps[i] = std::move(k);
    });

    Rng rng(o.common.seed);
    struct Trial {
        lume::AdaptiveParams adaptive;
        lume::SeededParams seeded;
        double f_score = 0.0;
    };
    std::vector<Trial> trials(o.budget);
    for (Trial& t : trials) {
        t.adaptive.window = 2 * rng.uniform_int(2, 25) + 1;  // odd in [5, 51]
        t.adaptive.k = rng.uniform(0.01, 0.3);
        t.adaptive.min_area = rng.uniform_int(1, 32);
        t.seeded.rel_factor = rng.uniform(0.3, 0.95);
    }
    parallel_for(trials.size(), o.common.jobs, [&](std::size_t ti) {
        Trial& t = trials[ti];
        std::vector<lume::BoxFrame> pred;
        std::vector<lume::KpFrame> gt;
        for (std::size_t i = 0; i < frames.size(); ++i) {
            lume::BoxFrame bf;
            bf.frame_id = static_cast<int>(i);
            if (o.mode == "adaptive") {
                if (t.adaptive.window > std::min(images[i].width, images[i].height))
                    t.adaptive.window =
                        std::min(images[i].width, images[i].height) / 2 * 2 - 1;
                const lume::Mask mask = lume::adaptive_mask(images[i], t.adaptive);
                bf.boxes = lume::connected_boxes(mask, t.adaptive.min_area,
                                                 t.adaptive.max_boxes, t.adaptive.connectivity);
            } else {
                bf.boxes = lume::kp_seeded_boxes(images[i], kps[i], t.seeded);
            }
            pred.push_back(std::move(bf));
            gt.push_back({static_cast<int>(i), kps[i]});
        }
        t.f_score = lume::evaluate_boxes(pred, gt).f_score;
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < trials.size(); ++i)
        if (trials[i].f_score > trials[best].f_score) best = i;

    const fs::path outdir(o.common.out);
    fs::create_directories(outdir);
    auto trial_json = [&](const Trial& t) {
        return json{{"window", t.adaptive.window},
                    {"k", t.adaptive.k},
                    {"min_area", t.adaptive.min_area},
                    {"rel_factor", t.seeded.rel_factor},
                    {"f_score", t.f_score}};
    };
    std::ofstream log(outdir / "tune_trials.jsonl");
    for (const Trial& t : trials) log << trial_json(t).dump() << '\n';
    const json js{{"best", trial_json(trials[best])}, {"budget", o.budget}, {"mode", o.mode}};
    write_json(js, outdir / "tune.json");
    std::cout << "best f_score " << trials[best].f_score << " (window "
              << trials[best].adaptive.window << ", k " << trials[best].adaptive.k
              << ", min_area " << trials[best].adaptive.min_area << ", rel_factor "
              << trials[best].seeded.rel_factor << ")\n";
    return 0;
}

void add_bms_options(CLI::App* cmd, lume::BmsParams& bms) {
    cmd->add_option("--bms-step", bms.step, "Threshold sweep step (0-255 scale)");
    cmd->add_option("--bms-cap", bms.cap_factor, "Threshold cap as a factor of seed intensity");
    cmd->add_option("--bms-connectivity", bms.connectivity, "Flood connectivity (4 or 8)")
        ->check(CLI::IsMember({4, 8}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"keypoint-annotation tooling: saliency maps, box generation, evaluation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a TOML config file");

    SynthOpts synth;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic annotated dataset");
    add_common(cmd_synth, synth.common, false);
    cmd_synth->add_option("--width", synth.width);
    cmd_synth->add_option("--height", synth.height);
    cmd_synth->add_option("--frames", synth.frames)->check(CLI::PositiveNumber);
    cmd_synth->add_option("--vehicles", synth.vehicles);
    cmd_synth->add_option("--reflections", synth.reflections);
    cmd_synth->add_option("--noise", synth.noise);
    cmd_synth->add_option("--drift-x", synth.drift_x);
    cmd_synth->add_option("--drift-y", synth.drift_y);

    SaliencyOpts sal;
    auto* cmd_sal = app.add_subcommand("saliency", "Per-keypoint saliency maps");
    add_common(cmd_sal, sal.common);
    add_bms_options(cmd_sal, sal.bms);
    cmd_sal->add_flag("--combined", sal.combined, "Also write the per-frame max map");

    GenboxesOpts gen;
    auto* cmd_gen = app.add_subcommand("genboxes", "Generate bounding boxes from keypoints");
    add_common(cmd_gen, gen.common);
    cmd_gen->add_option("--mode", gen.mode)->check(CLI::IsMember({"adaptive", "seeded"}));
    cmd_gen->add_option("--window", gen.adaptive.window);
    cmd_gen->add_option("--k", gen.adaptive.k);
    cmd_gen->add_option("--min-area", gen.adaptive.min_area);
    cmd_gen->add_option("--max-boxes", gen.adaptive.max_boxes);
    cmd_gen->add_option("--rel-factor", gen.seeded.rel_factor);
    cmd_gen->add_option("--connectivity", gen.adaptive.connectivity)
        ->check(CLI::IsMember({4, 8}));

    EvalOpts ev;
    auto* cmd_eval = app.add_subcommand("eval", "Evaluate box or keypoint predictions");
    add_common(cmd_eval, ev.common);
    cmd_eval->add_option("--kind", ev.kind)->check(CLI::IsMember({"boxes", "keypoints"}));
    cmd_eval->add_option("--pred", ev.pred, "Predictions directory")->required();
    cmd_eval->add_option("--thresholds", ev.thresholds, "kps threshold grid");
    add_bms_options(cmd_eval, ev.bms);

    ConsistencyOpts cons;
    auto* cmd_cons = app.add_subcommand("consistency", "Annotator agreement statistics");
    cmd_cons->add_option("files", cons.files, "Annotator JSON files (>= 2)")->expected(-1);
    add_common(cmd_cons, cons.common, false);
    cmd_cons->add_option("--bins", cons.bins)->check(CLI::PositiveNumber);

    TuneOpts tune;
    auto* cmd_tune = app.add_subcommand("tune", "Random search over box-generation parameters");
    add_common(cmd_tune, tune.common);
    cmd_tune->add_option("--budget", tune.budget)->check(CLI::PositiveNumber);
    cmd_tune->add_option("--mode", tune.mode)->check(CLI::IsMember({"adaptive", "seeded"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_synth->parsed()) return run_synth(synth);
        if (cmd_sal->parsed()) return run_saliency(sal);
        if (cmd_gen->parsed()) return run_genboxes(gen);
        if (cmd_eval->parsed()) return run_eval(ev);
        if (cmd_cons->parsed()) return run_consistency(cons);
        if (cmd_tune->parsed()) return run_tune(tune);
    } catch (const lume::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
