#include "pegsim/exec.hpp"

#include <algorithm>
#include <stdexcept>

namespace pegsim {

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::Force: return "force";
        case Termination::Horizon: return "horizon";
    }
    return "unknown";
}

TactilePolicy make_tactile_policy(const Model& m) {
    if (m.spec.pose_dim != 0 || m.spec.out_dim != 3) {
        throw std::runtime_error("make_tactile_policy: model must map an image to 3 outputs");
    }
    return [m](const Image& img) { return Eigen::Vector3d(predict(m, img)); };
}

VisionPolicy make_vision_policy(const Model& m) {
    if (m.spec.pose_dim != 3 || m.spec.out_dim != 3) {
        throw std::runtime_error("make_vision_policy: model must take 3 pose features");
    }
    return [m](const Image& img, const Eigen::Vector3d& feats) {
        return Eigen::Vector3d(predict(m, img, feats));
    };
}

TactilePolicy zero_tactile_policy() {
    return [](const Image&) { return Eigen::Vector3d::Zero(); };
}

VisionPolicy zero_vision_policy() {
    return [](const Image&, const Eigen::Vector3d&) { return Eigen::Vector3d::Zero(); };
}

Eigen::Vector3d approach_features(const Pose& gripper, const Pose& anchor) {
    const Eigen::Vector3d dt = gripper.t - anchor.t;
    Pose rel;
    rel.R = anchor.R.transpose() * gripper.R;
    return Eigen::Vector3d(rel.beta(), dt.x(), dt.y());
}

EpisodeResult run_insertion(const SceneConfig& scene, SimState& state, const Pose& part_target,
                            double z_min, const TactilePolicy& pi_tac, const VisionPolicy& pi_vis,
                            Rng& rng, const ExecParams& params) {
    if (!state.gripper_closed) throw std::runtime_error("run_insertion: jaws must be closed");
    if (z_min <= 0.0) throw std::runtime_error("run_insertion: z_min must be positive");
    if (is_inserted(scene, state)) {
        throw std::runtime_error("run_insertion: part is already inserted");
    }

    EpisodeResult result;

    // Alignment: compensate the estimated grasp offset and fly to the hover
    // pose above the receptacle.
    const Image touch = capture_filtered(scene, state.grasp_offset, rng, 5);
    const Eigen::Vector3d grasp = pi_tac(touch);
    const Pose offset_hat = make_pose(grasp(0), 0.0, grasp(1), grasp(2), 0.0);
    const Pose gripper_target = compose(part_target, inverse(offset_hat));
    const Pose anchor = compose(translate(0, 0, z_min), gripper_target);
    const Pose hover = compose(translate(0, 0, 2.0 * z_min), gripper_target);

    const MoveResult fly = guarded_move(scene, state, hover, params.force_limit, kMoveStep);
    result.max_held_force = fly.peak_force;
    if (fly.halted_by_force) {
        result.termination = Termination::Force;
        return result;
    }

    // Approach: correct laterally until the policy is satisfied, then feed
    // in depth, always under the force guard.
    while (result.attempts < params.horizon) {
        if (is_inserted(scene, state)) {
            result.success = true;
            result.termination = Termination::Converged;
            return result;
        }
        ++result.attempts;

        const Image view = render_camera(scene, state.gripper_pose, rng);
        const Eigen::Vector3d feats = approach_features(state.gripper_pose, anchor);
        const Eigen::Vector3d corr = pi_vis(view, feats);

        ServoStep step;
        step.correction = corr;
        Pose target;
        if (corr.head<2>().norm() > params.epsilon) {
            // Only the lateral part of the prediction is actuated. Rotation
            // alignment belongs to the grasp-compensation phase; the twist
            // output is recorded in the trace but never applied.
            target = compose(translate(corr(0), corr(1), 0), state.gripper_pose);
        } else {
            step.descended = true;
            target = compose(translate(0, 0, -params.descend_step), state.gripper_pose);
        }
        const MoveResult mr = guarded_move(scene, state, target, params.force_limit, kMoveStep);
        step.fz = mr.peak_abs_f_evaluated.z();
        result.max_held_force = std::max(result.max_held_force, mr.peak_force);
        result.trace.push_back(step);
        if (mr.halted_by_force || step.fz > params.force_limit) {
            // Bottoming out on the receptacle floor is the completion
            // signal; a force trip anywhere short of full depth is a jam.
            if (is_inserted(scene, state)) {
                result.success = true;
                result.termination = Termination::Converged;
            } else {
                result.termination = Termination::Force;
            }
            return result;
        }
    }

    if (is_inserted(scene, state)) {
        result.success = true;
        result.termination = Termination::Converged;
    } else {
        result.termination = Termination::Horizon;
    }
    return result;
}

bool check_success(const SceneConfig& scene, const SimState& state, const Pose& gripper_target) {
    return is_inserted(scene, state) && (state.gripper_pose.t - gripper_target.t).norm() <= 0.005;
}

}  // namespace pegsim
