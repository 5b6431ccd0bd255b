#include "pegsim/exec.hpp"

#include <cmath>

#include "test_util.hpp"

using namespace pegsim;

namespace {

// Part held by the jaws at `offset`, hovering `height` above its seated
// target pose.
SimState hovering_state(const SceneConfig& sc, const Pose& offset, double height) {
    SimState st;
    st.grasp_offset = offset;
    const Pose part = compose(translate(0, 0, height), sc.inserted_part_pose());
    st.gripper_pose = compose(part, inverse(offset));
    st.gripper_closed = true;
    return st;
}

// Reads the live grasp offset: a perfect tactile estimator.
TactilePolicy oracle_tactile(const SimState& st) {
    return [&st](const Image&) {
        return Eigen::Vector3d(st.grasp_offset.x(), st.grasp_offset.z(), st.grasp_offset.beta());
    };
}

// Steers the part toward its true seated pose: a perfect visual servo.
VisionPolicy oracle_vision(const SceneConfig& sc, const SimState& st) {
    const Pose target = sc.inserted_part_pose();
    return [&sc, &st, target](const Image&, const Eigen::Vector3d&) {
        const Pose part = part_pose_in_world(sc, st);
        return Eigen::Vector3d(target.x() - part.x(), target.y() - part.y(), -part.beta());
    };
}

void features_convention() {
    const Pose anchor = make_pose(0.01, -0.02, 0.05, 0.1, -0.3);
    const Pose gripper = compose(compose(translate(0.001, 0.002, 0.003), anchor), rotate_y(0.07));
    const Eigen::Vector3d f = approach_features(gripper, anchor);
    CHECK_CLOSE(f(0), 0.07, 1e-12);
    CHECK_CLOSE(f(1), 0.001, 1e-15);
    CHECK_CLOSE(f(2), 0.002, 1e-15);
    const Eigen::Vector3d zero = approach_features(anchor, anchor);
    CHECK(zero.cwiseAbs().maxCoeff() < 1e-15);
}

void perfect_policies_nominal() {
    const SceneConfig sc = default_scene();
    const Pose offset = make_pose(0.002, 0, -0.006, 0.1, 0);
    SimState st = hovering_state(sc, offset, 0.02);
    Rng rng(5);
    const EpisodeResult r = run_insertion(sc, st, sc.inserted_part_pose(), 0.008,
                                          oracle_tactile(st), oracle_vision(sc, st), rng);
    CHECK(r.success);
    CHECK(r.termination == Termination::Converged);
    CHECK(r.attempts >= 8 && r.attempts <= 30);
    CHECK(is_inserted(sc, st));
    const Pose t_true = compose(sc.inserted_part_pose(), inverse(offset));
    CHECK(check_success(sc, st, t_true));
    // With a perfect grasp estimate the approach is a straight descent.
    for (const ServoStep& s : r.trace) CHECK(s.descended);
    // Every step but the last stays under the force limit; the final probe
    // reads the rejected bottoming-out increment, which is what ends the
    // episode as converged.
    for (size_t i = 0; i + 1 < r.trace.size(); ++i)
        CHECK(std::fabs(r.trace[i].fz) <= kForceLimit);
    CHECK(std::fabs(r.trace.back().fz) > kForceLimit);
    // Accepted states never hold more than the force limit.
    CHECK(r.max_held_force <= kForceLimit);

    // Determinism: identical start and seed, identical episode.
    SimState st2 = hovering_state(sc, offset, 0.02);
    Rng rng2(5);
    const EpisodeResult r2 = run_insertion(sc, st2, sc.inserted_part_pose(), 0.008,
                                           oracle_tactile(st2), oracle_vision(sc, st2), rng2);
    CHECK(r2.attempts == r.attempts);
    CHECK((st2.gripper_pose.t - st.gripper_pose.t).cwiseAbs().maxCoeff() == 0.0);
}

void perfect_policies_correct_errors() {
    const SceneConfig sc = default_scene();
    // The provided target is 1.2mm off and the grasp estimate will be exact,
    // so the visual servo has to pull the part back over the receptacle.
    const Pose noisy_target = compose(translate(0.001, -0.0008, 0), sc.inserted_part_pose());
    const Pose offset = make_pose(-0.001, 0, -0.004, -0.15, 0);
    SimState st = hovering_state(sc, offset, 0.02);
    Rng rng(9);
    const EpisodeResult r = run_insertion(sc, st, noisy_target, 0.008, oracle_tactile(st),
                                          oracle_vision(sc, st), rng);
    CHECK(r.success);
    int corrective = 0, descending = 0;
    for (const ServoStep& s : r.trace) (s.descended ? descending : corrective)++;
    CHECK(corrective >= 1);
    CHECK(descending >= 8);
    const Pose part = part_pose_in_world(sc, st);
    CHECK((part.t.head<2>() - sc.inserted_part_pose().t.head<2>()).norm() < 5e-4);

    // A tilted grasp with a slightly wrong tilt estimate plus a shifted
    // target: the correction recenters the part laterally and the small
    // residual tilt rides through untouched, because the servo never
    // actuates its twist prediction. The episode still seats the part.
    const Pose target2 = compose(translate(-0.0012, 0.0006, 0), sc.inserted_part_pose());
    const Pose tilted = make_pose(0.001, 0, -0.005, 0.18, 0);
    SimState st2 = hovering_state(sc, tilted, 0.02);
    Rng rng2(10);
    TactilePolicy near_tac = [&st2](const Image&) {
        return Eigen::Vector3d(st2.grasp_offset.x(), st2.grasp_offset.z(),
                               st2.grasp_offset.beta() - 0.015);
    };
    const EpisodeResult r2 =
        run_insertion(sc, st2, target2, 0.008, near_tac, oracle_vision(sc, st2), rng2);
    CHECK(r2.success);
    int corrective2 = 0;
    for (const ServoStep& s : r2.trace) corrective2 += s.descended ? 0 : 1;
    CHECK(corrective2 >= 1);
    const Pose part2 = part_pose_in_world(sc, st2);
    CHECK_CLOSE(part2.beta(), 0.015, 1e-12);
    CHECK((part2.t.head<2>() - sc.inserted_part_pose().t.head<2>()).norm() < 5e-4);
}

void zero_policy_arms() {
    const SceneConfig sc = default_scene();

    // Nominal grasp, no estimates at all: the blind descent still lands.
    SimState st = hovering_state(sc, Pose(), 0.02);
    Rng rng(3);
    const EpisodeResult blind = run_insertion(sc, st, sc.inserted_part_pose(), 0.008,
                                              zero_tactile_policy(), zero_vision_policy(), rng);
    CHECK(blind.success);

    // Tactile-only: perfect grasp compensation, straight descent.
    const Pose offset = make_pose(0.0025, 0, -0.007, -0.12, 0);
    SimState st2 = hovering_state(sc, offset, 0.02);
    Rng rng2(4);
    const EpisodeResult tac_only = run_insertion(sc, st2, sc.inserted_part_pose(), 0.008,
                                                 oracle_tactile(st2), zero_vision_policy(), rng2);
    CHECK(tac_only.success);
    CHECK(check_success(sc, st2, compose(sc.inserted_part_pose(), inverse(offset))));

    // No compensation with a 1mm lateral grasp offset: the part wedges on
    // the receptacle lip and the force guard ends the episode.
    const Pose shifted = make_pose(0.001, 0, -0.005, 0, 0);
    SimState st3 = hovering_state(sc, shifted, 0.02);
    Rng rng3(6);
    const EpisodeResult jam = run_insertion(sc, st3, sc.inserted_part_pose(), 0.008,
                                            zero_tactile_policy(), zero_vision_policy(), rng3);
    CHECK(!jam.success);
    CHECK(jam.termination == Termination::Force);
    CHECK(!is_inserted(sc, st3));

    // A sub-clearance offset squeaks through without any policy help.
    const Pose slight = make_pose(0.0002, 0, -0.005, 0, 0);
    SimState st4 = hovering_state(sc, slight, 0.02);
    Rng rng4(7);
    const EpisodeResult ok = run_insertion(sc, st4, sc.inserted_part_pose(), 0.008,
                                           zero_tactile_policy(), zero_vision_policy(), rng4);
    CHECK(ok.success);
}

void horizon_and_validation() {
    const SceneConfig sc = default_scene();
    SimState st = hovering_state(sc, Pose(), 0.02);
    Rng rng(1);

    ExecParams p;
    p.horizon = 0;
    const EpisodeResult r = run_insertion(sc, st, sc.inserted_part_pose(), 0.008,
                                          zero_tactile_policy(), zero_vision_policy(), rng, p);
    CHECK(!r.success);
    CHECK(r.termination == Termination::Horizon);
    CHECK(r.attempts == 0);

    p.horizon = 3;
    SimState st2 = hovering_state(sc, Pose(), 0.02);
    const EpisodeResult r2 = run_insertion(sc, st2, sc.inserted_part_pose(), 0.008,
                                           zero_tactile_policy(), zero_vision_policy(), rng, p);
    CHECK(!r2.success && r2.termination == Termination::Horizon && r2.attempts == 3);

    SimState open = hovering_state(sc, Pose(), 0.02);
    open.gripper_closed = false;
    CHECK_THROWS(run_insertion(sc, open, sc.inserted_part_pose(), 0.008, zero_tactile_policy(),
                               zero_vision_policy(), rng));
    SimState st3 = hovering_state(sc, Pose(), 0.02);
    CHECK_THROWS(run_insertion(sc, st3, sc.inserted_part_pose(), 0.0, zero_tactile_policy(),
                               zero_vision_policy(), rng));
    SimState seated = hovering_state(sc, Pose(), 0.0);
    CHECK_THROWS(run_insertion(sc, seated, sc.inserted_part_pose(), 0.008, zero_tactile_policy(),
                               zero_vision_policy(), rng));
}

void policy_factories() {
    MlpSpec tac_spec;
    tac_spec.image_w = 4;
    tac_spec.image_h = 4;
    tac_spec.out_dim = 3;
    const Model tac = init_model(tac_spec, 1);
    MlpSpec vis_spec = tac_spec;
    vis_spec.pose_dim = 3;
    const Model vis = init_model(vis_spec, 1);

    CHECK_THROWS(make_tactile_policy(vis));
    CHECK_THROWS(make_vision_policy(tac));

    Image img{4, 4};
    img.px.assign(16, 0.25f);
    const TactilePolicy pt = make_tactile_policy(tac);
    CHECK(pt(img).size() == 3);
    const VisionPolicy pv = make_vision_policy(vis);
    const Eigen::Vector3d out = pv(img, Eigen::Vector3d(0.1, 0.0, -0.2));
    CHECK(out.allFinite());
}

void success_oracle() {
    const SceneConfig sc = default_scene();
    SimState st = hovering_state(sc, make_pose(0.001, 0, -0.005, 0, 0), 0.0);
    const Pose t_true = st.gripper_pose;
    CHECK(is_inserted(sc, st));
    CHECK(check_success(sc, st, t_true));
    CHECK(!check_success(sc, st, compose(translate(0.006, 0, 0), t_true)));

    SimState lifted = hovering_state(sc, make_pose(0.001, 0, -0.005, 0, 0), 0.004);
    CHECK(!is_inserted(sc, lifted));
    CHECK(!check_success(sc, lifted, t_true));
}

}  // namespace

int main() {
    features_convention();
    perfect_policies_nominal();
    perfect_policies_correct_errors();
    zero_policy_arms();
    horizon_and_validation();
    policy_factories();
    success_oracle();
    return test_summary("exec_test");
}
