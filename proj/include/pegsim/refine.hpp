#pragma once

#include <vector>

#include "pegsim/contact.hpp"
#include "pegsim/scene.hpp"

namespace pegsim {

// Candidate perturbations for target refinement: lateral offsets and a twist
// about the insertion axis. Lists must be symmetric about zero and contain
// or bracket zero; the unperturbed pose is always evaluated as well.
struct RefineGrid {
    std::vector<double> x_values;      // meters
    std::vector<double> y_values;      // meters
    std::vector<double> gamma_values;  // radians
};

// 5 x 5 offsets spanning [-1, 1]mm, 4 twists spanning [-pi/180, pi/180].
RefineGrid default_refine_grid();

// Objectives within this deadband count as tied and the smaller correction
// wins the tie. Real contact forces sit orders of magnitude above it; the
// rounding noise of analytically equal candidates sits orders below, so the
// deadband keeps the selection from being decided by last-bit noise.
inline constexpr double kObjectiveTie = 1e-9;

// Throws std::runtime_error naming the offending list.
void validate_grid(const RefineGrid& grid);

struct ZminParams {
    double delta_z = 0.001;  // rise per iteration, meters
    double delta_x = 0.001;  // probe distance, meters
    double eta = 3.5;        // free-probe force threshold, N
};

// Zeroes the tilt of the pose's z-axis (beta := 0 in the y-z-x Euler
// parameterization), keeping the translation and the rotation about the
// insertion axis (gamma). Idempotent.
Pose z_axis_align(const Pose& t);

// Wrench magnitude objective: |f| + torque_weight * |tau|.
double wrench_objective(const SceneConfig& scene, const SimState& state);

struct RefineInfo {
    Pose t_delta;                // selected perturbation (identity if none better)
    double objective = 0.0;      // objective at the returned pose
    int candidates_skipped = 0;  // approaches halted by the force guard
};

// Grid search for the wrench-minimizing pose near t: for each perturbation
// T_delta the gripper moves (guarded, kForceLimit) to compose(T_delta, t),
// the objective |f| + torque_weight*|tau| is measured, and the gripper
// returns to its starting pose. Candidates whose approach halts on the
// force guard are skipped. Ties break toward the smallest perturbation
// (translation norm plus rotation angle), then toward evaluation order
// (unperturbed first, then x-major). The state is left at the winning pose.
// Throws if every candidate halts.
Pose refine_target(const SceneConfig& scene, SimState& state, const Pose& t,
                   const RefineGrid& grid, RefineInfo* info = nullptr);

// Minimum unplug height: starting from the inserted pose, repeatedly raises
// the gripper by delta_z along its z-axis (out of the receptacle), then
// probes +delta_x along gripper x under the force guard and measures the
// peak |f_x| seen during the probe (reverted afterwards). Returns the total
// rise k*delta_z of the first free probe (|f_x| <= eta). The gripper is
// lowered back to its starting pose before returning. Throws if the part is
// not free after insertion_depth/delta_z + 5 iterations.
double find_zmin(const SceneConfig& scene, SimState& state, const Pose& t_refined,
                 const ZminParams& p);

}  // namespace pegsim
