#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pegsim/collect.hpp"
#include "pegsim/exec.hpp"
#include "pegsim/learn.hpp"

namespace pegsim {

// A held-part configuration for the evaluation suite: the part sits in the
// jaws displaced by (x, z) and tilted by beta, all inside the ranges the
// policies were trained on.
struct TestGrasp {
    double x = 0.0;     // meters
    double z = 0.0;     // meters
    double beta = 0.0;  // radians
};

// Tilt-major Cartesian grid: 5 tilts spanning [-pi/20, pi/20], 3 x offsets
// spanning [-3, 3]mm, 3 z offsets spanning [-6, -2]mm. 45 grasps.
std::vector<TestGrasp> make_test_set();

// One evaluated insertion episode.
struct EpisodeRow {
    TestGrasp grasp;
    bool success = false;
    Termination termination = Termination::Horizon;
    int attempts = 0;
    double max_held_force = 0.0;      // peak accepted-state force, N
    double noise_x = 0.0, noise_y = 0.0;  // target noise applied, meters
};

struct BenchOptions {
    ExecParams exec;
    double target_noise_xy = 0.0;  // uniform bound on per-episode x/y noise
    uint64_t seed = 0;
};

// Produces the policy pair for one episode. The state reference stays live
// for the whole episode, so closures may read it (oracle arms do).
using ArmFactory = std::function<void(const TestGrasp&, const SimState&, TactilePolicy&,
                                      VisionPolicy&)>;

struct BenchResult {
    uint64_t seed = 0;
    std::vector<EpisodeRow> rows;
    double max_held_force = 0.0;  // over all episodes
    int successes() const;
};

// Runs one insertion episode per test grasp: the part starts seated, the
// harness lifts it straight out to free space, and the episode runs against
// part_target (plus the per-episode noise draw when enabled). An episode
// counts as a success only when it both converges and leaves the gripper at
// the true target for its grasp.
BenchResult bench_main(const SceneConfig& scene, const ArmFactory& arm, const Pose& part_target,
                       double z_min, const BenchOptions& opts);
BenchResult bench_main(const SceneConfig& scene, const Model& tactile, const Model& vision,
                       const Pose& part_target, double z_min, const BenchOptions& opts);

// Per-axis absolute prediction errors of the grasp estimator over a grasp
// list, captured exactly the way execution captures (median filter of 5).
// stdev is the sample standard deviation of the absolute errors.
struct TactileErrors {
    Eigen::Vector3d mae = Eigen::Vector3d::Zero();    // x, z, beta
    Eigen::Vector3d stdev = Eigen::Vector3d::Zero();  // x, z, beta
    std::vector<Eigen::Vector3d> abs_errors;          // per grasp
};
TactileErrors bench_tactile(const SceneConfig& scene, const Model& tactile,
                            const std::vector<TestGrasp>& grasps, uint64_t seed);

// Seeded stand-in for a hand-taught target: the true seated part pose
// displaced laterally by 0.6 to 1.0mm in a uniform direction and tilted up
// to 1 degree about both the jaw axis and the insertion axis. Depth is not
// perturbed: a hand demo seats the part by contact, so the teaching error
// lives in the lateral plane and the tilts.
Pose demo_target(const SceneConfig& scene, uint64_t seed);

// One target-preparation mode of the re-insertion ablation.
struct FtRow {
    std::string mode;            // "ZA", "ZAWF", "ZAWFG"
    std::vector<int> successes;  // per demo target
    int total = 0;               // grasps attempted per trial
    double mean = 0.0;
    double std_error = 0.0;      // sample std of successes / sqrt(trials)
};

// For each demo target and each mode, re-runs the insertion collection loop
// (tour skipped) over the grasp_samples^3 grasp grid and counts grasps
// completed before the first force-guard failure. Modes: ZA keeps the
// tilt-zeroed demo target as-is, ZAWF refines it once from a center grasp,
// ZAWFG refines it for every grasp.
std::vector<FtRow> bench_ablation_ft(const SceneConfig& scene,
                                     const std::vector<Pose>& demo_targets, double z_min,
                                     int grasp_samples = 5);

// Records of an insertion dataset captured without the extra twist; the
// camera-only arm of the modality ablation trains on this subset.
InsertionDataset no_rotation_subset(const InsertionDataset& ds);

struct ModalityArm {
    std::string name;
    std::vector<EpisodeRow> rows;
    int successes = 0;
    int zero_beta_successes = 0;  // over grasps with beta == 0
    int zero_beta_total = 0;
    int rotated_successes = 0;  // over grasps with beta != 0
    int rotated_total = 0;
};

// Runs the 45-grasp suite under uniform +/-1mm target noise with three
// policy arms sharing the same per-episode noise draws: grasp estimator
// alone (straight descent), camera servo alone (no grasp estimate, model
// trained without twist data), and both combined.
std::vector<ModalityArm> bench_ablation_modality(const SceneConfig& scene, const Model& tactile,
                                                 const Model& vision_norot,
                                                 const Model& vision_full, double z_min,
                                                 uint64_t seed, const ExecParams& exec = {});

// Everything one evaluation run produced; empty sections are skipped in the
// summary but still get a (header-only) CSV.
struct BenchReport {
    uint64_t seed = 0;
    std::string scene_hash_hex;
    std::vector<EpisodeRow> episodes;
    std::vector<TestGrasp> tactile_grasps;
    TactileErrors tactile;
    std::vector<FtRow> ablation;
    std::vector<ModalityArm> modality;
    double max_held_force = 0.0;
    double wall_seconds = 0.0;  // written to the timings sidecar only
};

// Writes summary.txt ("key: value" lines), episodes.csv, tactile.csv,
// ablation_ft.csv, modality.csv, and timings.txt under dir. Every file but
// timings.txt is a deterministic function of the report contents.
void emit_report(const BenchReport& r, const std::string& dir);

// Reads a summary.txt back into key -> value form.
std::map<std::string, std::string> parse_summary(const std::string& path);

}  // namespace pegsim
