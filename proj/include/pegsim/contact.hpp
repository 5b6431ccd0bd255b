#pragma once

#include <vector>

#include "pegsim/geometry.hpp"
#include "pegsim/scene.hpp"

namespace pegsim {

// Quasi-static penalty contact between the part box and the slotted
// taskboard. The part boundary is discretized once into midpoint samples on
// its 12 edges; each penetrating sample contributes an independent spring
// force. No dynamics, no mass: the robot abstraction is pose targets with
// force guards, so only the wrench field matters.
//
// Sample generation contract (fixed, relied on by the brute-force oracle in
// the tests):
//   hw = part_width/2, ht = part_thickness/2, L = part_length
//   x-edges (corner a -> b along x), (y, z) in order
//     (-ht,-L), (-ht,0), (+ht,-L), (+ht,0)
//   y-edges, (x, z) in order (-hw,-L), (-hw,0), (+hw,-L), (+hw,0)
//   z-edges (a = z -L, b = z 0), (x, y) in order
//     (-hw,-ht), (-hw,+ht), (+hw,-ht), (+hw,+ht)
//   per edge: n = max(1, llround(len / kBoundarySpacing)),
//   sample_i = a + (i + 0.5) * ((b - a) / n), i ascending.
//
// Per-sample force, world frame, sx/sy the slot half extents, d the
// insertion depth, k the contact_stiffness, p the world sample position:
//   free if p.z >= 0
//   dA = -p.z                                  (exit up through the plane)
//   qx = max(|p.x| - sx, 0), qy = max(|p.y| - sy, 0), qz = max(-d - p.z, 0)
//   dB = sqrt(qx^2 + qy^2 + qz^2)              (exit into the open slot)
//   free if dB == 0 (inside the slot cavity)
//   if dA <= dB: depth = dA, normal = (0, 0, 1)
//   else:        depth = dB,
//                normal = ((px > 0 ? -qx : qx), (py > 0 ? -qy : qy), qz) / dB
//   displacement u = p - (sample + inserted_part_pose translation)
//   lt = u - (u . normal) normal
//   friction = -min(k |lt|, mu k depth) * lt / |lt|   (0 if |lt| < 1e-12)
//   force = k depth normal + friction
// Torque is summed about the gripper origin; the resulting wrench is
// expressed in the gripper frame.
inline constexpr double kBoundarySpacing = 0.00025;  // meters

// Equivalent lever arm converting a rotation angle into an interpolation
// arc length for guarded stepping (bounds the boundary-sample travel).
inline constexpr double kRotationArm = 0.025;  // meters

// Shared safety defaults for every guarded motion in the pipeline.
inline constexpr double kForceLimit = 15.0;  // N, per component
inline constexpr double kMoveStep = 0.00025;  // meters per increment

struct Wrench {
    Eigen::Vector3d f = Eigen::Vector3d::Zero();    // N, gripper frame
    Eigen::Vector3d tau = Eigen::Vector3d::Zero();  // N*m, gripper frame
};

// Part-frame boundary samples in the contract order above.
const std::vector<Eigen::Vector3d>& boundary_samples(const SceneConfig& s);

Wrench wrench(const SceneConfig& scene, const SimState& state);

struct MoveResult {
    Pose final_pose;
    bool halted_by_force = false;
    double peak_force = 0.0;  // max |f component| over accepted increments
    int steps_taken = 0;
    // Componentwise max |f| over every evaluated increment, including a
    // rejected one. A rejected increment was never physically held (the
    // guard retreats), so it is excluded from peak_force but kept here for
    // probing logic and diagnostics.
    Eigen::Vector3d peak_abs_f_evaluated = Eigen::Vector3d::Zero();
};

// Interpolates the gripper pose toward target in increments of at most
// `step` (translation metric; rotation contributes angle * kRotationArm),
// evaluating the wrench after each increment. If any force component
// magnitude exceeds force_limit the move retreats one increment and reports
// halted_by_force. Applies the slip rule after each accepted increment when
// the scene enables it.
MoveResult guarded_move(const SceneConfig& scene, SimState& state,
                        const Pose& target, double force_limit, double step);

// Returns the new grasp offset. If the tangential contact force in the
// gripper x-z plane (across the jaw clamp axis) exceeds slip_mu*grip_force,
// the part shifts along the force direction by the force excess over the
// contact stiffness.
Pose slip_update(const SceneConfig& scene, const SimState& state, const Wrench& w);

// True iff the bottom face sits within 0.5mm of full insertion depth and the
// part boundary stays inside the slot over the whole inserted length.
bool is_inserted(const SceneConfig& scene, const SimState& state);

// Releases the part: the gripper stops tracking it and the caller receives
// its frozen world pose. Open-jaw gripper motion is collision-free in this
// model (the jaws are not part of the contact geometry).
Pose open_gripper(const SceneConfig& scene, SimState& state);

// Closes the jaws around a part resting at part_world. Clamping seats the
// part flush against the jaw planes (which are normal to the gripper y
// axis): the y offset and yaw collapse to zero while the in-plane slide
// (x, z) and tilt (beta) survive as the grasp residual. Returns the seated
// grasp offset; the part snaps to the seated pose.
Pose close_gripper(const SceneConfig& scene, SimState& state, const Pose& part_world);

}  // namespace pegsim
