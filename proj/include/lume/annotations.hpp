#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lume/errors.hpp"
#include "lume/geometry.hpp"

namespace lume {

struct InstanceAnnotation {
    int id = 0;
    Keypoint kp;

    friend bool operator==(const InstanceAnnotation&, const InstanceAnnotation&) = default;
};

struct VehicleAnnotation {
    int id = 0;
    bool direct = true;
    Keypoint position;
    std::vector<InstanceAnnotation> instances;

    friend bool operator==(const VehicleAnnotation&, const VehicleAnnotation&) = default;
};

struct FrameAnnotation {
    int frame_id = 0;
    std::string image_path;  // relative to the dataset root
    std::vector<VehicleAnnotation> vehicles;

    /// All instance KPs of the frame in vehicle/instance order.
    [[nodiscard]] std::vector<Keypoint> instance_kps() const {
        std::vector<Keypoint> out;
        for (const auto& v : vehicles)
            for (const auto& inst : v.instances) out.push_back(inst.kp);
        return out;
    }

    friend bool operator==(const FrameAnnotation&, const FrameAnnotation&) = default;
};

enum class Exposure { day, night };

struct SceneAnnotation {
    int scene_id = 0;
    Exposure exposure = Exposure::night;
    std::vector<FrameAnnotation> frames;

    friend bool operator==(const SceneAnnotation&, const SceneAnnotation&) = default;
};

namespace detail {

inline void validate_scene(const SceneAnnotation& scene) {
    const std::string where = "scene " + std::to_string(scene.scene_id);
    if (scene.frames.empty())
        throw ValidationError(where + ": empty frame list");
    int prev_frame = -1;
    bool first = true;
    for (const auto& frame : scene.frames) {
        const std::string fwhere = where + ", frame " + std::to_string(frame.frame_id);
        if (!first && frame.frame_id <= prev_frame)
            throw ValidationError(fwhere + ": frame_id not strictly increasing");
        first = false;
        prev_frame = frame.frame_id;
        std::set<int> vehicle_ids;
        std::set<int> instance_ids;
        for (const auto& v : frame.vehicles) {
            if (!vehicle_ids.insert(v.id).second)
                throw ValidationError(fwhere + ": duplicate vehicle id " + std::to_string(v.id));
            if (v.position.x < 0 || v.position.y < 0)
                throw ValidationError(fwhere + ", vehicle " + std::to_string(v.id) +
                                      ": negative position coordinate");
            for (const auto& inst : v.instances) {
                if (!instance_ids.insert(inst.id).second)
                    throw ValidationError(fwhere + ": duplicate instance id " +
                                          std::to_string(inst.id));
                if (inst.kp.x < 0 || inst.kp.y < 0)
                    throw ValidationError(fwhere + ", instance " + std::to_string(inst.id) +
                                          ": negative keypoint coordinate");
            }
        }
    }
}

inline nlohmann::json scene_to_json(const SceneAnnotation& scene) {
    nlohmann::json js;
    js["scene_id"] = scene.scene_id;
    js["exposure"] = scene.exposure == Exposure::day ? "day" : "night";
    js["frames"] = nlohmann::json::array();
    for (const auto& frame : scene.frames) {
        nlohmann::json jf;
        jf["frame_id"] = frame.frame_id;
        jf["image"] = frame.image_path;
        jf["vehicles"] = nlohmann::json::array();
        for (const auto& v : frame.vehicles) {
            nlohmann::json jv;
            jv["id"] = v.id;
            jv["direct"] = v.direct;
            jv["position"] = {{"x", v.position.x}, {"y", v.position.y}};
            jv["instances"] = nlohmann::json::array();
            for (const auto& inst : v.instances) {
                jv["instances"].push_back({{"id", inst.id},
                                           {"direct", inst.kp.direct},
                                           {"x", inst.kp.x},
                                           {"y", inst.kp.y}});
            }
            jf["vehicles"].push_back(std::move(jv));
        }
        js["frames"].push_back(std::move(jf));
    }
    return js;
}

inline SceneAnnotation scene_from_json(const nlohmann::json& js, const std::string& file) {
    try {
        SceneAnnotation scene;
        scene.scene_id = js.at("scene_id").get<int>();
        const std::string exp = js.at("exposure").get<std::string>();
        if (exp == "day")
            scene.exposure = Exposure::day;
        else if (exp == "night")
            scene.exposure = Exposure::night;
        else
            throw ValidationError(file + ": exposure must be \"day\" or \"night\", got \"" + exp +
                                  "\"");
        for (const auto& jf : js.at("frames")) {
            FrameAnnotation frame;
            frame.frame_id = jf.at("frame_id").get<int>();
            frame.image_path = jf.at("image").get<std::string>();
            for (const auto& jv : jf.at("vehicles")) {
                VehicleAnnotation v;
                v.id = jv.at("id").get<int>();
                v.direct = jv.at("direct").get<bool>();
                v.position.x = jv.at("position").at("x").get<int>();
                v.position.y = jv.at("position").at("y").get<int>();
                v.position.direct = v.direct;
                for (const auto& ji : jv.at("instances")) {
                    InstanceAnnotation inst;
                    inst.id = ji.at("id").get<int>();
                    inst.kp.direct = ji.at("direct").get<bool>();
                    inst.kp.x = ji.at("x").get<int>();
                    inst.kp.y = ji.at("y").get<int>();
                    v.instances.push_back(inst);
                }
                frame.vehicles.push_back(std::move(v));
            }
            scene.frames.push_back(std::move(frame));
        }
        return scene;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(file + ": " + e.what());
    }
}

} // namespace detail

/// Reads every scene_<id>.json file under `root`, validates all invariants and
/// returns the scenes ordered by scene_id. Image paths stay relative to `root`.
inline std::vector<SceneAnnotation> load_dataset(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root))
        throw IoError("load_dataset: not a directory: " + root.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(root)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.starts_with("scene_") && name.ends_with(".json"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<SceneAnnotation> scenes;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw IoError("load_dataset: cannot open " + file.string());
        nlohmann::json js;
        try {
            js = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(file.string() + ": parse error at byte " +
                                  std::to_string(e.byte) + ": " + e.what());
        }
        SceneAnnotation scene = detail::scene_from_json(js, file.string());
        detail::validate_scene(scene);
        scenes.push_back(std::move(scene));
    }
    std::sort(scenes.begin(), scenes.end(),
              [](const auto& a, const auto& b) { return a.scene_id < b.scene_id; });
    return scenes;
}

/// Writes one scene_<id>.json per scene. load_dataset(save_dataset(x)) == x.
inline void save_dataset(const std::vector<SceneAnnotation>& scenes,
                         const std::filesystem::path& root) {
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    for (const auto& scene : scenes) {
        detail::validate_scene(scene);
        const auto file = root / ("scene_" + std::to_string(scene.scene_id) + ".json");
        std::ofstream out(file);
        if (!out) throw IoError("save_dataset: cannot write " + file.string());
        out << detail::scene_to_json(scene).dump(2) << '\n';
        if (!out) throw IoError("save_dataset: write failed for " + file.string());
    }
}

} // namespace lume
