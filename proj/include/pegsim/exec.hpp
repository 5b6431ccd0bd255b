#pragma once

#include <functional>
#include <vector>

#include "pegsim/learn.hpp"

namespace pegsim {

// Estimates the grasp offset (x, z, beta) from a tactile image.
using TactilePolicy = std::function<Eigen::Vector3d(const Image&)>;

// Estimates the correction (dx, dy, dbeta) that recenters the gripper over
// the receptacle from a wrist camera image and the pose features
// (beta, x, y) relative to the approach anchor.
using VisionPolicy = std::function<Eigen::Vector3d(const Image&, const Eigen::Vector3d&)>;

TactilePolicy make_tactile_policy(const Model& m);
VisionPolicy make_vision_policy(const Model& m);

// Ablation arms: a policy that always reports a perfectly nominal grasp, and
// one that never asks for a correction.
TactilePolicy zero_tactile_policy();
VisionPolicy zero_vision_policy();

struct ExecParams {
    double epsilon = 0.0005;      // lateral convergence threshold, meters
    double descend_step = 0.0015; // descent per converged iteration, meters
    int horizon = 200;            // servo iteration budget
    double force_limit = kForceLimit;
};

enum class Termination {
    Converged,  // the part reached full insertion depth
    Force,      // a force trip with the part short of full depth (a jam)
    Horizon,    // the iteration budget ran out
};

// Lowercase identifier for reports: "converged", "force", "horizon".
const char* termination_name(Termination t);

struct ServoStep {
    Eigen::Vector3d correction = Eigen::Vector3d::Zero();  // policy output
    bool descended = false;  // this step descended instead of correcting
    double fz = 0.0;         // largest |f_z| evaluated during the move
};

struct EpisodeResult {
    bool success = false;
    Termination termination = Termination::Horizon;
    int attempts = 0;
    double max_held_force = 0.0;  // peak force over accepted motion states
    std::vector<ServoStep> trace;
};

// Pose features of the gripper relative to the approach anchor, matching the
// convention the insertion dataset records: workspace-axis translation
// offsets and the relative rotation about the gripper axis.
Eigen::Vector3d approach_features(const Pose& gripper, const Pose& anchor);

// Two-phase insertion of a grasped part held above the receptacle.
//
// Alignment: a median-filtered tactile capture feeds pi_tac; the estimated
// grasp offset is divided out of part_target and the gripper flies to a
// hover pose 2 z_min above the compensated target.
//
// Approach: each iteration renders the wrist camera, queries pi_vis, and
// either applies the lateral part of the correction (when its lateral size
// exceeds epsilon) or descends by descend_step. The twist prediction is
// recorded in the trace but never actuated: rotation alignment is owned by
// the alignment phase. Every motion is force guarded. A halt or a descent-axis reading beyond force_limit ends the
// episode: as Converged when the part sits at full depth (bottoming out on
// the receptacle floor is the completion signal), otherwise as Force.
// Exhausting the horizon ends it as Horizon; full insertion depth detected
// at the top of an iteration also ends it as Converged.
//
// Throws if the jaws are open, z_min is not positive, or the part already
// sits inserted.
EpisodeResult run_insertion(const SceneConfig& scene, SimState& state, const Pose& part_target,
                            double z_min, const TactilePolicy& pi_tac, const VisionPolicy& pi_vis,
                            Rng& rng, const ExecParams& params = ExecParams{});

// Episode oracle used by benchmarks: the part rests at full depth and the
// gripper ended within 5mm of the target pose it was meant to reach.
bool check_success(const SceneConfig& scene, const SimState& state, const Pose& gripper_target);

}  // namespace pegsim
