#pragma once

#include <cstdint>
#include <string>

#include "pegsim/geometry.hpp"

namespace pegsim {

// World layout: the receptacle is a rectangular slot cut into the z = 0
// taskboard plane, centered on the world origin, insertion direction -z.
// The part is a rectangular box; its frame sits at the center of the TOP
// face, so the body occupies z in [-part_length, 0] in part coordinates.
// All geometry constants here are artifact choices (the task's real part
// dimensions are unpublished); any values passing validate_scene() work.
struct SceneConfig {
    double part_width = 0.012;        // x extent, meters
    double part_thickness = 0.0045;   // y extent
    double part_length = 0.014;       // z extent
    double receptacle_clearance = 0.0004;  // per side
    double insertion_depth = 0.008;
    double contact_stiffness = 5000.0;  // N/m per boundary sample
    double friction_mu = 0.3;
    double grip_force = 70.0;  // N
    double torque_weight = 1.0;
    double tactile_extent_w = 0.019;  // gel patch, meters
    double tactile_extent_h = 0.016;
    int tactile_res_w = 64;
    int tactile_res_h = 64;
    Pose camera_offset = translate(0.0, 0.0, 0.040);  // camera in gripper frame
    double camera_focal_px = 128.0;
    int camera_res_w = 64;
    int camera_res_h = 64;
    double noise_sigma_tactile = 0.02;
    double noise_sigma_camera = 0.02;
    bool slip_enabled = false;
    double slip_mu = 0.5;
    int captures_per_offset = 2;  // tactile captures recorded per grasp offset

    // Slot half extents (part half size plus clearance).
    double slot_half_x() const { return 0.5 * part_width + receptacle_clearance; }
    double slot_half_y() const { return 0.5 * part_thickness + receptacle_clearance; }

    // Part pose when fully seated in the slot: bottom face on the slot
    // floor, centered, upright.
    Pose inserted_part_pose() const {
        return translate(0.0, 0.0, part_length - insertion_depth);
    }
};

SceneConfig default_scene();

// Flat "key = value" config text; unknown keys are rejected, missing keys
// keep their defaults. camera_offset takes 5 fields (x y z beta gamma).
SceneConfig load_scene(const std::string& path);
SceneConfig parse_scene(const std::string& text);
std::string scene_to_string(const SceneConfig& s);

// Throws std::runtime_error naming the offending field.
void validate_scene(const SceneConfig& s);

// FNV-1a over the canonical serialization.
uint64_t scene_hash(const SceneConfig& s);

struct SimState {
    Pose gripper_pose;   // in robot/world frame
    Pose grasp_offset;   // part in gripper frame
    bool gripper_closed = true;
};

Pose part_pose_in_world(const SceneConfig& scene, const SimState& state);

}  // namespace pegsim
