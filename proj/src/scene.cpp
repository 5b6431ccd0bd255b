#include "pegsim/scene.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pegsim {

SceneConfig default_scene() { return SceneConfig{}; }

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void set_field(SceneConfig& s, const std::string& key, const std::string& val) {
    auto num = [&]() {
        size_t pos = 0;
        double v = std::stod(val, &pos);
        return v;
    };
    if (key == "part_width") s.part_width = num();
    else if (key == "part_thickness") s.part_thickness = num();
    else if (key == "part_length") s.part_length = num();
    else if (key == "receptacle_clearance") s.receptacle_clearance = num();
    else if (key == "insertion_depth") s.insertion_depth = num();
    else if (key == "contact_stiffness") s.contact_stiffness = num();
    else if (key == "friction_mu") s.friction_mu = num();
    else if (key == "grip_force") s.grip_force = num();
    else if (key == "torque_weight") s.torque_weight = num();
    else if (key == "tactile_extent_w") s.tactile_extent_w = num();
    else if (key == "tactile_extent_h") s.tactile_extent_h = num();
    else if (key == "tactile_res_w") s.tactile_res_w = (int)num();
    else if (key == "tactile_res_h") s.tactile_res_h = (int)num();
    else if (key == "camera_offset") s.camera_offset = pose_from_string(val);
    else if (key == "camera_focal_px") s.camera_focal_px = num();
    else if (key == "camera_res_w") s.camera_res_w = (int)num();
    else if (key == "camera_res_h") s.camera_res_h = (int)num();
    else if (key == "noise_sigma_tactile") s.noise_sigma_tactile = num();
    else if (key == "noise_sigma_camera") s.noise_sigma_camera = num();
    else if (key == "slip_enabled") s.slip_enabled = num() != 0.0;
    else if (key == "slip_mu") s.slip_mu = num();
    else if (key == "captures_per_offset") s.captures_per_offset = (int)num();
    else throw std::runtime_error("scene config: unknown key '" + key + "'");
}

}  // namespace

SceneConfig parse_scene(const std::string& text) {
    SceneConfig s = default_scene();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::runtime_error("scene config line " + std::to_string(lineno) +
                                         ": expected 'key = value'");
            continue;
        }
        auto trim = [](std::string v) {
            auto a = v.find_first_not_of(" \t\r");
            auto b = v.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
        };
        set_field(s, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    validate_scene(s);
    return s;
}

SceneConfig load_scene(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open scene config: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scene(ss.str());
}

std::string scene_to_string(const SceneConfig& s) {
    std::ostringstream out;
    out << "part_width = " << fmt_double(s.part_width) << "\n"
        << "part_thickness = " << fmt_double(s.part_thickness) << "\n"
        << "part_length = " << fmt_double(s.part_length) << "\n"
        << "receptacle_clearance = " << fmt_double(s.receptacle_clearance) << "\n"
        << "insertion_depth = " << fmt_double(s.insertion_depth) << "\n"
        << "contact_stiffness = " << fmt_double(s.contact_stiffness) << "\n"
        << "friction_mu = " << fmt_double(s.friction_mu) << "\n"
        << "grip_force = " << fmt_double(s.grip_force) << "\n"
        << "torque_weight = " << fmt_double(s.torque_weight) << "\n"
        << "tactile_extent_w = " << fmt_double(s.tactile_extent_w) << "\n"
        << "tactile_extent_h = " << fmt_double(s.tactile_extent_h) << "\n"
        << "tactile_res_w = " << s.tactile_res_w << "\n"
        << "tactile_res_h = " << s.tactile_res_h << "\n"
        << "camera_offset = " << pose_to_string(s.camera_offset) << "\n"
        << "camera_focal_px = " << fmt_double(s.camera_focal_px) << "\n"
        << "camera_res_w = " << s.camera_res_w << "\n"
        << "camera_res_h = " << s.camera_res_h << "\n"
        << "noise_sigma_tactile = " << fmt_double(s.noise_sigma_tactile) << "\n"
        << "noise_sigma_camera = " << fmt_double(s.noise_sigma_camera) << "\n"
        << "slip_enabled = " << (s.slip_enabled ? 1 : 0) << "\n"
        << "slip_mu = " << fmt_double(s.slip_mu) << "\n"
        << "captures_per_offset = " << s.captures_per_offset << "\n";
    return out.str();
}

void validate_scene(const SceneConfig& s) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::runtime_error(std::string("scene config: ") + name +
                                     " must be > 0");
    };
    positive(s.part_width, "part_width");
    positive(s.part_thickness, "part_thickness");
    positive(s.part_length, "part_length");
    positive(s.receptacle_clearance, "receptacle_clearance");
    positive(s.insertion_depth, "insertion_depth");
    positive(s.contact_stiffness, "contact_stiffness");
    positive(s.grip_force, "grip_force");
    positive(s.tactile_extent_w, "tactile_extent_w");
    positive(s.tactile_extent_h, "tactile_extent_h");
    positive(s.camera_focal_px, "camera_focal_px");
    if (s.friction_mu < 0.0) throw std::runtime_error("scene config: friction_mu must be >= 0");
    if (s.torque_weight < 0.0) throw std::runtime_error("scene config: torque_weight must be >= 0");
    if (s.receptacle_clearance >= 0.5 * s.part_width)
        throw std::runtime_error("scene config: receptacle_clearance must be < part_width/2");
    if (s.insertion_depth >= s.part_length)
        throw std::runtime_error("scene config: insertion_depth must be < part_length");
    if (s.tactile_res_w < 8 || s.tactile_res_h < 8 || s.camera_res_w < 8 || s.camera_res_h < 8)
        throw std::runtime_error("scene config: image resolutions must be >= 8");
    if (s.noise_sigma_tactile < 0.0 || s.noise_sigma_camera < 0.0)
        throw std::runtime_error("scene config: noise sigmas must be >= 0");
    if (s.captures_per_offset < 1)
        throw std::runtime_error("scene config: captures_per_offset must be >= 1");
}

uint64_t scene_hash(const SceneConfig& s) {
    const std::string text = scene_to_string(s);
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Pose part_pose_in_world(const SceneConfig&, const SimState& state) {
    if (!state.gripper_closed)
        throw std::runtime_error("part_pose_in_world: gripper is open, part pose is not tracked by the gripper");
    return compose(state.gripper_pose, state.grasp_offset);
}

}  // namespace pegsim
