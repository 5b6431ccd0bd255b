#include "pegsim/refine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pegsim {

RefineGrid default_refine_grid() {
    RefineGrid g;
    for (int i = 0; i < 5; ++i) {
        g.x_values.push_back(-0.001 + i * 0.0005);
        g.y_values.push_back(-0.001 + i * 0.0005);
    }
    const double gmax = M_PI / 180.0;
    for (int i = 0; i < 4; ++i) {
        g.gamma_values.push_back(-gmax + i * (2.0 * gmax / 3.0));
    }
    return g;
}

namespace {

void validate_axis(const std::vector<double>& vals, const std::string& name) {
    if (vals.empty()) throw std::runtime_error("refine grid: " + name + " is empty");
    double lo = vals.front(), hi = vals.front();
    for (double v : vals) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        bool mirrored = false;
        for (double u : vals) {
            if (std::fabs(u + v) <= 1e-12) {
                mirrored = true;
                break;
            }
        }
        if (!mirrored) {
            throw std::runtime_error("refine grid: " + name + " is not symmetric about zero");
        }
    }
    if (lo > 1e-12 || hi < -1e-12) {
        throw std::runtime_error("refine grid: " + name + " does not contain or bracket zero");
    }
}

}  // namespace

void validate_grid(const RefineGrid& grid) {
    validate_axis(grid.x_values, "x_values");
    validate_axis(grid.y_values, "y_values");
    validate_axis(grid.gamma_values, "gamma_values");
}

Pose z_axis_align(const Pose& t) {
    return make_pose(t.x(), t.y(), t.z(), 0.0, t.gamma());
}

double wrench_objective(const SceneConfig& scene, const SimState& state) {
    const Wrench w = wrench(scene, state);
    return w.f.norm() + scene.torque_weight * w.tau.norm();
}

Pose refine_target(const SceneConfig& scene, SimState& state, const Pose& t,
                   const RefineGrid& grid, RefineInfo* info) {
    validate_grid(grid);

    std::vector<Pose> deltas;
    deltas.push_back(Pose());  // the unperturbed target, evaluated first
    for (double dx : grid.x_values) {
        for (double dy : grid.y_values) {
            for (double dg : grid.gamma_values) {
                deltas.push_back(make_pose(dx, dy, 0.0, 0.0, dg));
            }
        }
    }

    const Pose start = state.gripper_pose;
    double best_obj = std::numeric_limits<double>::infinity();
    double best_key = std::numeric_limits<double>::infinity();
    int best_idx = -1;
    Pose best_pose;
    int skipped = 0;

    for (size_t i = 0; i < deltas.size(); ++i) {
        const Pose candidate = compose(deltas[i], t);
        const MoveResult fwd = guarded_move(scene, state, candidate, kForceLimit, kMoveStep);
        if (fwd.halted_by_force) {
            ++skipped;
        } else {
            const double obj = wrench_objective(scene, state);
            const double key = deltas[i].t.norm() + rotation_angle_between(Pose(), deltas[i]);
            if (obj < best_obj - kObjectiveTie ||
                (obj < best_obj + kObjectiveTie && key < best_key)) {
                best_obj = obj;
                best_key = key;
                best_idx = int(i);
                best_pose = candidate;
            }
        }
        // Retreat along the same line; every pose on it was already held at
        // or below the force limit, so this cannot halt.
        const MoveResult back = guarded_move(scene, state, start, kForceLimit, kMoveStep);
        if (back.halted_by_force) {
            throw std::logic_error("refine_target: retreat halted on a previously safe path");
        }
    }

    if (best_idx < 0) {
        throw std::runtime_error("refine_target: every candidate halted on the force guard");
    }

    const MoveResult fin = guarded_move(scene, state, best_pose, kForceLimit, kMoveStep);
    if (fin.halted_by_force) {
        throw std::logic_error("refine_target: winning candidate unreachable on revisit");
    }
    if (info) {
        info->t_delta = deltas[size_t(best_idx)];
        info->objective = best_obj;
        info->candidates_skipped = skipped;
    }
    return best_pose;
}

double find_zmin(const SceneConfig& scene, SimState& state, const Pose& t_refined,
                 const ZminParams& p) {
    if (p.delta_z <= 0 || p.delta_x <= 0 || p.eta <= 0) {
        throw std::runtime_error("find_zmin: parameters must be positive");
    }
    const Pose base = t_refined;
    if ((state.gripper_pose.t - base.t).norm() > 1e-9 ||
        rotation_angle_between(state.gripper_pose, base) > 1e-9) {
        throw std::runtime_error("find_zmin: state is not at the refined pose");
    }
    const Eigen::Vector3d rise_dir = base.R.col(2);  // out of the receptacle
    const int max_iter = int(std::llround(scene.insertion_depth / p.delta_z)) + 5;

    for (int k = 0; k <= max_iter; ++k) {
        Pose raised = base;
        raised.t = base.t + rise_dir * (k * p.delta_z);
        if (k > 0) {
            const MoveResult up = guarded_move(scene, state, raised, kForceLimit, kMoveStep);
            if (up.halted_by_force) {
                throw std::runtime_error("find_zmin: rise halted on the force guard");
            }
        }
        const Pose probe_target = compose(raised, translate(p.delta_x, 0.0, 0.0));
        const MoveResult probe = guarded_move(scene, state, probe_target, kForceLimit, kMoveStep);
        const double fx = probe.peak_abs_f_evaluated.x();
        const MoveResult back = guarded_move(scene, state, raised, kForceLimit, kMoveStep);
        if (back.halted_by_force) {
            throw std::logic_error("find_zmin: probe retreat halted");
        }
        if (fx <= p.eta) {
            // Settle back into the receptacle so the caller's state is the
            // same inserted pose it supplied.
            const MoveResult down = guarded_move(scene, state, base, kForceLimit, kMoveStep);
            if (down.halted_by_force) {
                throw std::runtime_error("find_zmin: could not re-insert after the search");
            }
            return k * p.delta_z;
        }
    }
    throw std::runtime_error("find_zmin: part still constrained after " +
                             std::to_string(max_iter) + " iterations");
}

}  // namespace pegsim
