#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pegsim/refine.hpp"
#include "pegsim/sensors.hpp"

namespace pegsim {

// Sampling ranges shared by both collection procedures: grasp offsets in
// x, z (slide along the jaw plane) and beta (tilt about the jaw axis).
inline constexpr double kGraspRangeX = 0.003;      // |x| <= 3mm
inline constexpr double kGraspRangeZLo = -0.008;   // z in [-8, -2]mm
inline constexpr double kGraspRangeZHi = -0.002;
inline constexpr double kGraspRangeBeta = M_PI / 15;

// Tour ranges for insertion collection: lateral offsets and rise above the
// unplug pose, plus the rise-scaled tilt draws.
inline constexpr double kTourRangeXY = 0.005;  // |x|, |y| <= 5mm
inline constexpr double kTourRise = 0.005;     // rise in [0, 5]mm

struct AlignmentRecord {
    Image tactile;
    double x = 0.0, z = 0.0, beta = 0.0;  // seated grasp offset (the label)
    uint64_t render_seed = 0;
};

struct AlignmentDataset {
    SceneConfig scene;
    uint64_t seed = 0;
    std::vector<AlignmentRecord> records;
};

struct InsertionRecord {
    // Displacement from the recorded gripper pose to the grasp's unplug
    // pose: the regression label.
    double label_dx = 0.0, label_dy = 0.0, label_dbeta = 0.0;
    // Gripper pose features relative to the unplug pose, workspace axes.
    double feat_beta = 0.0, feat_x = 0.0, feat_y = 0.0;
    double rise = 0.0;  // height above the unplug pose
    int grasp_index = 0;
    uint64_t render_seed = 0;
    Image camera;            // empty unless images were materialized
    bool has_image = false;
};

struct CollectStats {
    int grasps_completed = 0;
    int guard_trips = 0;
    int first_failure_grasp = -1;     // -1 when the run was clean
    double max_accepted_force = 0.0;  // peak held force over every motion
};

struct InsertionDataset {
    SceneConfig scene;
    uint64_t seed = 0;
    double z_min = 0.0;
    std::vector<Pose> unplug_poses;  // per grasp
    std::vector<InsertionRecord> records;
    CollectStats stats;

    // Exact reconstruction of the gripper pose a record was captured at
    // (the same composition the collection tour executed).
    Pose record_pose(const InsertionRecord& r) const {
        return compose(compose(translate(r.feat_x, r.feat_y, r.rise),
                               unplug_poses[size_t(r.grasp_index)]),
                       rotate_y(r.feat_beta));
    }
};

// Re-grasps the inserted part at 5 x 10 x 20 uniformly drawn (x, z, beta)
// offsets (Cartesian product, 1000 grasps) and records
// scene.captures_per_offset median-filtered tactile images per offset with
// the seated offset as label. Jaw-open repositioning is collision-free (the
// jaws are outside the contact model); the part never leaves the
// receptacle. Throws if a re-grasp settles above the force limit.
AlignmentDataset collect_alignment(const SceneConfig& scene, SimState& state, uint64_t seed);

enum class TargetMode {
    RefinePerGrasp,  // wrench-refine the target for every grasp
    FixedTarget,     // trust the provided part target as-is
};

struct InsertionOptions {
    TargetMode mode = TargetMode::RefinePerGrasp;
    RefineGrid grid = default_refine_grid();
    bool render_images = false;  // images can be re-rendered from seeds
    bool tour = true;            // visit the 5x5x5 offset grid per grasp
    int grasp_samples = 5;       // per-axis grasp grid resolution
};

// Per grasp g of a grasp_samples^3 grid over the grasp ranges: re-grasp the
// inserted part, derive the gripper target from part_target (refined per
// grasp in RefinePerGrasp mode), raise by z_min to the unplug pose, tour a
// 5x5x5 grid of lateral offsets in [-5,5]mm and rises in [0,5]mm recording
// three samples per pose (no tilt, one negative and one positive rise-scaled
// tilt draw), then re-insert by guarded descent and release. Any force-guard
// halt is logged as that grasp's failure and collection stops (the run is
// reported in stats rather than patched over).
InsertionDataset collect_insertion(const SceneConfig& scene, SimState& state, uint64_t seed,
                                   const Pose& part_target, double z_min,
                                   const InsertionOptions& opts);

// Dataset directory layout: manifest.json, records.csv, and one .img file
// per materialized image. Loading validates the manifest against the CSV
// and the embedded scene against its recorded hash.
void save_dataset(const AlignmentDataset& ds, const std::string& dir);
void save_dataset(const InsertionDataset& ds, const std::string& dir);
AlignmentDataset load_alignment_dataset(const std::string& dir);
InsertionDataset load_insertion_dataset(const std::string& dir);

// Renders (or returns) the camera image for an insertion record.
Image insertion_image(const InsertionDataset& ds, const InsertionRecord& r);

}  // namespace pegsim
