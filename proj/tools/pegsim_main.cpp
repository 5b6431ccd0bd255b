// Command-line front end for the insertion pipeline. Every subcommand is a
// self-contained stage: collect a dataset, train a regressor, refine a
// target, run or benchmark episodes, or run one of the two ablation tables.
// Exit code 0 means every threshold the invoked stage checks was met.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pegsim/bench.hpp"
#include "pegsim/collect.hpp"
#include "pegsim/exec.hpp"
#include "pegsim/learn.hpp"
#include "pegsim/refine.hpp"
#include "pegsim/rng.hpp"

using namespace pegsim;
namespace fs = std::filesystem;

namespace {

SceneConfig scene_from(const std::string& file) {
    return file.empty() ? default_scene() : load_scene(file);
}

// Fresh state with the part seated in the receptacle under the canonical
// centered grasp (jaws at mid height on the part).
SimState seated_center(const SceneConfig& sc) {
    SimState st;
    st.grasp_offset = make_pose(0.0, 0.0, -0.005, 0.0, 0.0);
    st.gripper_pose = compose(sc.inserted_part_pose(), inverse(st.grasp_offset));
    st.gripper_closed = true;
    return st;
}

// Unplug height for the exact (centered) target, searched on the spot.
double exact_zmin(const SceneConfig& sc) {
    SimState st = seated_center(sc);
    return find_zmin(sc, st, st.gripper_pose, ZminParams{});
}

// Wrench objective of the part teleported to a pose, canonical grasp.
double objective_at(const SceneConfig& sc, const Pose& part_pose) {
    SimState m = seated_center(sc);
    m.gripper_pose = compose(part_pose, inverse(m.grasp_offset));
    return wrench_objective(sc, m);
}

struct Targets {
    Pose demo, aligned, refined_part, refined_grip;
    double z_min = 0.0;
};

// Simulated imperfect demo -> tilt removal -> wrench refinement for the
// canonical grasp -> unplug-height search. The common front half of the
// collection and refinement stages.
Targets prepare_targets(const SceneConfig& sc, uint64_t demo_seed) {
    Targets t;
    SimState st = seated_center(sc);
    t.demo = demo_target(sc, demo_seed);
    t.aligned = z_axis_align(t.demo);
    t.refined_grip = refine_target(sc, st, compose(t.aligned, inverse(st.grasp_offset)),
                                   default_refine_grid());
    t.refined_part = compose(t.refined_grip, st.grasp_offset);
    t.z_min = find_zmin(sc, st, t.refined_grip, ZminParams{});
    return t;
}

void write_targets_file(const std::string& dir, const Targets& t) {
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / "target.txt", std::ios::binary);
    out << "demo: " << pose_to_string(t.demo) << "\n";
    out << "aligned: " << pose_to_string(t.aligned) << "\n";
    out << "refined: " << pose_to_string(t.refined_part) << "\n";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", t.z_min);
    out << "z_min: " << buf << "\n";
}

std::string hash_hex(const SceneConfig& sc) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, scene_hash(sc));
    return buf;
}

int verdict(bool ok) {
    std::printf("%s\n", ok ? "ok: all thresholds met" : "FAIL: thresholds not met");
    return ok ? 0 : 1;
}

bool training_improved(const TrainInfo& info) {
    return !info.val_loss.empty() && std::isfinite(info.val_loss.back()) &&
           info.val_loss.back() <= info.val_loss.front();
}

void print_losses(const TrainInfo& info) {
    if (info.train_loss.empty()) return;
    std::printf("epochs %zu, steps %d, train loss %.6g -> %.6g, val loss %.6g -> %.6g\n",
                info.train_loss.size(), info.steps, info.train_loss.front(),
                info.train_loss.back(), info.val_loss.front(), info.val_loss.back());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic desk-scale peg-in-hole pipeline: self-supervised data "
                 "collection, regressor training, and guarded-insertion benchmarks."};
    app.require_subcommand(1);
    int rc = 0;

    // ----------------------------------------------------------------- //
    std::string ca_scene, ca_out = "out/align";
    uint64_t ca_seed = 42;
    auto* ca = app.add_subcommand("collect-align",
                                  "Collect gel images over 1000 random re-grasps of the "
                                  "seated part and save the labeled dataset.");
    ca->add_option("--scene", ca_scene, "scene config file (default: built-in)");
    ca->add_option("--seed", ca_seed, "grasp-draw seed");
    ca->add_option("--out", ca_out, "output dataset directory");
    ca->callback([&] {
        const SceneConfig sc = scene_from(ca_scene);
        SimState st = seated_center(sc);
        const AlignmentDataset ds = collect_alignment(sc, st, ca_seed);
        save_dataset(ds, ca_out);
        const size_t expect = size_t(5 * 10 * 20) * size_t(sc.captures_per_offset);
        std::printf("collected %zu gel records (%d per grasp) -> %s\n", ds.records.size(),
                    sc.captures_per_offset, ca_out.c_str());
        rc = verdict(ds.records.size() == expect);
    });

    // ----------------------------------------------------------------- //
    std::string ci_scene, ci_out = "out/insert";
    uint64_t ci_seed = 43, ci_demo_seed = 41;
    double ci_zmin = 0.0;
    bool ci_fixed = false, ci_no_tour = false;
    int ci_samples = 5;
    auto* ci = app.add_subcommand("collect-insert",
                                  "Collect camera observations over a grid of grasps by "
                                  "repeatedly unplugging and re-inserting the part.");
    ci->add_option("--scene", ci_scene, "scene config file (default: built-in)");
    ci->add_option("--seed", ci_seed, "tilt-draw seed");
    ci->add_option("--out", ci_out, "output dataset directory");
    ci->add_option("--demo-seed", ci_demo_seed, "seed of the simulated imperfect demo target");
    ci->add_option("--zmin", ci_zmin, "unplug height in meters (default: searched)");
    ci->add_option("--grasp-samples", ci_samples, "grid resolution per grasp axis");
    ci->add_flag("--fixed-target", ci_fixed,
                 "skip per-grasp refinement and reuse the demo target as-is");
    ci->add_flag("--no-tour", ci_no_tour, "skip the offset tour (no records, plumbing check)");
    ci->callback([&] {
        const SceneConfig sc = scene_from(ci_scene);
        const Targets t = prepare_targets(sc, ci_demo_seed);
        const double z_min = ci_zmin > 0.0 ? ci_zmin : t.z_min;
        InsertionOptions opts;
        opts.mode = ci_fixed ? TargetMode::FixedTarget : TargetMode::RefinePerGrasp;
        opts.tour = !ci_no_tour;
        opts.grasp_samples = ci_samples;
        // Per-grasp refinement starts from the tilt-free demo; a fixed
        // target must already be good, so it gets the refined one.
        const Pose base = ci_fixed ? t.refined_part : t.aligned;
        SimState st = seated_center(sc);
        const InsertionDataset ds = collect_insertion(sc, st, ci_seed, base, z_min, opts);
        save_dataset(ds, ci_out);
        write_targets_file(ci_out, t);
        const CollectStats& s = ds.stats;
        const int want = ci_samples * ci_samples * ci_samples;
        const double bound = kForceLimit + sc.contact_stiffness * kMoveStep;
        std::printf("collected %zu records over %d/%d grasps, %d guard trips, peak force "
                    "%.2f N (bound %.2f), z_min %.1f mm -> %s\n",
                    ds.records.size(), s.grasps_completed, want, s.guard_trips,
                    s.max_accepted_force, bound, z_min * 1e3, ci_out.c_str());
        rc = verdict(s.grasps_completed == want && s.guard_trips == 0 &&
                     s.max_accepted_force <= bound);
    });

    // ----------------------------------------------------------------- //
    std::string tt_scene, tt_out = "out/model_tac", tt_data = "out/align";
    uint64_t tt_seed = 11;
    int tt_epochs = 30;
    auto* tt = app.add_subcommand("train-tac",
                                  "Train the gel-image grasp estimator on a collected "
                                  "alignment dataset.");
    tt->add_option("--scene", tt_scene, "unused; accepted for uniformity");
    tt->add_option("--seed", tt_seed, "shuffle and init seed");
    tt->add_option("--out", tt_out, "output model directory");
    tt->add_option("--data", tt_data, "alignment dataset directory");
    tt->add_option("--epochs", tt_epochs, "training epochs");
    tt->callback([&] {
        const AlignmentDataset ds = load_alignment_dataset(tt_data);
        TrainOptions o;
        o.epochs = tt_epochs;
        o.seed = tt_seed;
        TrainInfo info;
        const Model m = train_tactile(ds, o, &info);
        save_model(m, tt_out);
        print_losses(info);
        std::printf("model -> %s\n", tt_out.c_str());
        rc = verdict(training_improved(info));
    });

    // ----------------------------------------------------------------- //
    std::string tv_scene, tv_out = "out/model_vis", tv_data = "out/insert";
    uint64_t tv_seed = 12;
    int tv_epochs = 10;
    bool tv_norot = false;
    auto* tv = app.add_subcommand("train-vis",
                                  "Train the camera lateral-servo regressor on a collected "
                                  "insertion dataset.");
    tv->add_option("--scene", tv_scene, "unused; accepted for uniformity");
    tv->add_option("--seed", tv_seed, "shuffle and init seed");
    tv->add_option("--out", tv_out, "output model directory");
    tv->add_option("--data", tv_data, "insertion dataset directory");
    tv->add_option("--epochs", tv_epochs, "training epochs");
    tv->add_flag("--no-rotation", tv_norot,
                 "train on the no-twist third of the records only");
    tv->callback([&] {
        InsertionDataset ds = load_insertion_dataset(tv_data);
        if (tv_norot) ds = no_rotation_subset(ds);
        TrainOptions o;
        o.epochs = tv_epochs;
        o.seed = tv_seed;
        TrainInfo info;
        const Model m = train_vision(ds, o, &info);
        save_model(m, tv_out);
        print_losses(info);
        std::printf("model -> %s (%zu records%s)\n", tv_out.c_str(), ds.records.size(),
                    tv_norot ? ", no-twist subset" : "");
        rc = verdict(training_improved(info));
    });

    // ----------------------------------------------------------------- //
    std::string rf_scene, rf_out = "out/refine";
    uint64_t rf_seed = 41;
    auto* rf = app.add_subcommand("refine",
                                  "Simulate an imperfect demo target, remove its tilt, "
                                  "refine it by wrench search, and find the unplug height.");
    rf->add_option("--scene", rf_scene, "scene config file (default: built-in)");
    rf->add_option("--seed", rf_seed, "demo perturbation seed");
    rf->add_option("--out", rf_out, "directory for target.txt");
    rf->callback([&] {
        const SceneConfig sc = scene_from(rf_scene);
        const Targets t = prepare_targets(sc, rf_seed);
        write_targets_file(rf_out, t);
        const double before = objective_at(sc, t.aligned);
        const double after = objective_at(sc, t.refined_part);
        const ZminParams zp;
        std::printf("demo     %s\n", pose_to_string(t.demo).c_str());
        std::printf("aligned  %s  objective %.4f\n", pose_to_string(t.aligned).c_str(), before);
        std::printf("refined  %s  objective %.4f\n", pose_to_string(t.refined_part).c_str(),
                    after);
        std::printf("z_min %.1f mm (band %.1f to %.1f) -> %s/target.txt\n", t.z_min * 1e3,
                    sc.insertion_depth * 1e3, (sc.insertion_depth + 2 * zp.delta_z) * 1e3,
                    rf_out.c_str());
        rc = verdict(after < before && t.z_min >= sc.insertion_depth - 1e-12 &&
                     t.z_min <= sc.insertion_depth + 2 * zp.delta_z + 1e-12);
    });

    // ----------------------------------------------------------------- //
    std::string rn_scene, rn_out, rn_tac = "out/model_tac", rn_vis = "out/model_vis";
    uint64_t rn_seed = 1;
    double rn_gx = 0.0, rn_gz = -0.005, rn_gb = 0.0, rn_nx = 0.0, rn_ny = 0.0, rn_zmin = 0.0;
    auto* rn = app.add_subcommand("run",
                                  "Run one guarded insertion episode with trained models "
                                  "from a chosen grasp, optionally with target noise.");
    rn->add_option("--scene", rn_scene, "scene config file (default: built-in)");
    rn->add_option("--seed", rn_seed, "sensor-noise seed");
    rn->add_option("--out", rn_out, "unused; accepted for uniformity");
    rn->add_option("--tac", rn_tac, "grasp-estimator model directory");
    rn->add_option("--vis", rn_vis, "camera-servo model directory");
    rn->add_option("--grasp-x", rn_gx, "grasp offset x in meters");
    rn->add_option("--grasp-z", rn_gz, "grasp offset z in meters (negative: below the top)");
    rn->add_option("--grasp-beta", rn_gb, "grasp tilt in radians");
    rn->add_option("--noise-x", rn_nx, "target offset x in meters");
    rn->add_option("--noise-y", rn_ny, "target offset y in meters");
    rn->add_option("--zmin", rn_zmin, "unplug height in meters (default: searched)");
    rn->callback([&] {
        const SceneConfig sc = scene_from(rn_scene);
        const Model tac = load_model(rn_tac);
        const Model vis = load_model(rn_vis);
        const double z_min = rn_zmin > 0.0 ? rn_zmin : exact_zmin(sc);

        SimState st;
        st.grasp_offset = make_pose(rn_gx, 0.0, rn_gz, rn_gb, 0.0);
        st.gripper_pose = compose(sc.inserted_part_pose(), inverse(st.grasp_offset));
        st.gripper_closed = true;
        const Pose lifted = compose(translate(0, 0, 2.0 * z_min), st.gripper_pose);
        if (guarded_move(sc, st, lifted, kForceLimit, kMoveStep).halted_by_force) {
            throw std::runtime_error("run: extraction from the receptacle halted");
        }

        const Pose target = compose(translate(rn_nx, rn_ny, 0.0), sc.inserted_part_pose());
        Rng er(rn_seed);
        const EpisodeResult ep = run_insertion(sc, st, target, z_min, make_tactile_policy(tac),
                                               make_vision_policy(vis), er);
        const Pose t_true = compose(sc.inserted_part_pose(), inverse(st.grasp_offset));
        const bool success = ep.success && check_success(sc, st, t_true);
        std::printf("%s after %d servo steps, termination %s, peak held force %.2f N\n",
                    success ? "inserted" : "did not insert", ep.attempts,
                    termination_name(ep.termination), ep.max_held_force);
        rc = verdict(success);
    });

    // ----------------------------------------------------------------- //
    std::string bn_scene, bn_out = "out/report", bn_tac = "out/model_tac",
                bn_vis = "out/model_vis";
    uint64_t bn_seed = 600;
    double bn_noise = 0.0, bn_zmin = 0.0;
    auto* bn = app.add_subcommand("bench",
                                  "Benchmark the trained stack over the 45-grasp test grid "
                                  "and emit a report.");
    bn->add_option("--scene", bn_scene, "scene config file (default: built-in)");
    bn->add_option("--seed", bn_seed, "episode noise seed");
    bn->add_option("--out", bn_out, "report directory");
    bn->add_option("--tac", bn_tac, "grasp-estimator model directory");
    bn->add_option("--vis", bn_vis, "camera-servo model directory");
    bn->add_option("--noise", bn_noise, "uniform target noise half-range in meters");
    bn->add_option("--zmin", bn_zmin, "unplug height in meters (default: searched)");
    bn->callback([&] {
        const SceneConfig sc = scene_from(bn_scene);
        const Model tac = load_model(bn_tac);
        const Model vis = load_model(bn_vis);
        const double z_min = bn_zmin > 0.0 ? bn_zmin : exact_zmin(sc);

        const auto t0 = std::chrono::steady_clock::now();
        BenchOptions bo;
        bo.seed = bn_seed;
        bo.target_noise_xy = bn_noise;
        const BenchResult res = bench_main(sc, tac, vis, sc.inserted_part_pose(), z_min, bo);

        BenchReport rep;
        rep.seed = bn_seed;
        rep.scene_hash_hex = hash_hex(sc);
        rep.episodes = res.rows;
        rep.tactile_grasps = make_test_set();
        rep.tactile = bench_tactile(sc, tac, rep.tactile_grasps, 500);
        rep.max_held_force = res.max_held_force;
        rep.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        emit_report(rep, bn_out);

        const double bound = kForceLimit + sc.contact_stiffness * kMoveStep;
        std::printf("insertions %d/45, grasp-estimate MAE %.3f mm / %.3f mm / %.4f rad, peak "
                    "held force %.2f N (bound %.2f) -> %s\n",
                    res.successes(), rep.tactile.mae(0) * 1e3, rep.tactile.mae(1) * 1e3,
                    rep.tactile.mae(2), res.max_held_force, bound, bn_out.c_str());
        const bool accurate = rep.tactile.mae(0) <= 0.0003 && rep.tactile.mae(1) <= 0.0003 &&
                              rep.tactile.mae(2) <= 0.015;
        rc = verdict(res.successes() >= 43 && accurate && res.max_held_force <= bound);
    });

    // ----------------------------------------------------------------- //
    std::string af_scene, af_out = "out/ablate_ft";
    uint64_t af_seed = 71;
    double af_zmin = 0.0;
    int af_samples = 5;
    auto* af = app.add_subcommand("ablate-ft",
                                  "Re-insertion ablation over three simulated demos: tilt "
                                  "removal only, one-shot refinement, per-grasp refinement.");
    af->add_option("--scene", af_scene, "scene config file (default: built-in)");
    af->add_option("--seed", af_seed, "first demo seed (three consecutive seeds are used)");
    af->add_option("--out", af_out, "report directory");
    af->add_option("--zmin", af_zmin, "unplug height in meters (default: searched)");
    af->add_option("--grasp-samples", af_samples, "grid resolution per grasp axis");
    af->callback([&] {
        const SceneConfig sc = scene_from(af_scene);
        const double z_min = af_zmin > 0.0 ? af_zmin : exact_zmin(sc);
        const std::vector<Pose> demos = {demo_target(sc, af_seed), demo_target(sc, af_seed + 1),
                                         demo_target(sc, af_seed + 2)};
        const std::vector<FtRow> table = bench_ablation_ft(sc, demos, z_min, af_samples);

        BenchReport rep;
        rep.seed = af_seed;
        rep.scene_hash_hex = hash_hex(sc);
        rep.ablation = table;
        emit_report(rep, af_out);

        const FtRow *za = nullptr, *zawf = nullptr, *zawfg = nullptr;
        for (const FtRow& r : table) {
            std::printf("%-6s mean %6.1f / %d (se %.1f) over %zu demos\n", r.mode.c_str(),
                        r.mean, r.total, r.std_error, r.successes.size());
            if (r.mode == "ZA") za = &r;
            if (r.mode == "ZAWF") zawf = &r;
            if (r.mode == "ZAWFG") zawfg = &r;
        }
        bool ok = za && zawf && zawfg;
        if (ok) {
            for (int n : zawfg->successes) ok = ok && n == zawfg->total;
            for (int n : za->successes) ok = ok && n == 0;
            ok = ok && zawfg->mean >= zawf->mean && zawf->mean >= za->mean;
        }
        std::printf("report -> %s\n", af_out.c_str());
        rc = verdict(ok);
    });

    // ----------------------------------------------------------------- //
    std::string am_scene, am_out = "out/ablate_modality", am_tac = "out/model_tac",
                am_vis = "out/model_vis", am_visnr = "out/model_vis_norot";
    uint64_t am_seed = 801;
    double am_zmin = 0.0;
    bool am_all_data = false;
    auto* am = app.add_subcommand("ablate-modality",
                                  "Gel-only, camera-only, and combined arms over the test "
                                  "grid with lateral target noise.");
    am->add_option("--scene", am_scene, "scene config file (default: built-in)");
    am->add_option("--seed", am_seed, "episode noise seed");
    am->add_option("--out", am_out, "report directory");
    am->add_option("--tac", am_tac, "grasp-estimator model directory");
    am->add_option("--vis", am_vis, "camera-servo model directory (all records)");
    am->add_option("--vis-norot", am_visnr, "camera-servo model directory (no-twist subset)");
    am->add_option("--zmin", am_zmin, "unplug height in meters (default: searched)");
    am->add_flag("--all-data-arm", am_all_data,
                 "add a camera-only arm that uses the all-records servo");
    am->callback([&] {
        const SceneConfig sc = scene_from(am_scene);
        const Model tac = load_model(am_tac);
        const Model vis = load_model(am_vis);
        const Model visnr = load_model(am_visnr);
        const double z_min = am_zmin > 0.0 ? am_zmin : exact_zmin(sc);
        std::vector<ModalityArm> arms =
            bench_ablation_modality(sc, tac, visnr, vis, z_min, am_seed);

        if (am_all_data) {
            BenchOptions bo;
            bo.target_noise_xy = 0.001;
            bo.seed = am_seed;
            const TactilePolicy pt = zero_tactile_policy();
            const VisionPolicy pv = make_vision_policy(vis);
            const BenchResult res = bench_main(
                sc,
                [&pt, &pv](const TestGrasp&, const SimState&, TactilePolicy& t,
                           VisionPolicy& v) {
                    t = pt;
                    v = pv;
                },
                sc.inserted_part_pose(), z_min, bo);
            ModalityArm arm;
            arm.name = "vision_only_all_data";
            arm.rows = res.rows;
            for (const EpisodeRow& r : res.rows) {
                const bool zb = r.grasp.beta == 0.0;
                (zb ? arm.zero_beta_total : arm.rotated_total)++;
                if (r.success) {
                    arm.successes++;
                    (zb ? arm.zero_beta_successes : arm.rotated_successes)++;
                }
            }
            arms.push_back(std::move(arm));
        }

        BenchReport rep;
        rep.seed = am_seed;
        rep.scene_hash_hex = hash_hex(sc);
        rep.modality = arms;
        emit_report(rep, am_out);

        const ModalityArm *t_arm = nullptr, *v_arm = nullptr, *c_arm = nullptr;
        for (const ModalityArm& a : arms) {
            std::printf("%-21s %2d/%zu (untwisted %d/%d, twisted %d/%d)\n", a.name.c_str(),
                        a.successes, a.rows.size(), a.zero_beta_successes, a.zero_beta_total,
                        a.rotated_successes, a.rotated_total);
            if (a.name == "tactile_only") t_arm = &a;
            if (a.name == "vision_only") v_arm = &a;
            if (a.name == "combined") c_arm = &a;
        }
        bool ok = t_arm && v_arm && c_arm;
        if (ok) {
            ok = c_arm->successes > t_arm->successes && c_arm->successes > v_arm->successes &&
                 v_arm->zero_beta_successes * v_arm->rotated_total >
                     v_arm->rotated_successes * v_arm->zero_beta_total;
        }
        std::printf("report -> %s\n", am_out.c_str());
        rc = verdict(ok);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return rc;
}
