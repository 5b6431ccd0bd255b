#include "pegsim/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pegsim {

namespace {

// Seed stream tags, mixed with the user seed so the suites stay decoupled.
constexpr uint64_t kStreamBench = 0xBE9C;
constexpr uint64_t kStreamBenchTac = 0xBE7A;
constexpr uint64_t kStreamDemo = 0xDE30;

std::vector<double> grid3(double lo, double hi) { return {lo, 0.5 * (lo + hi), hi}; }

// Fresh state with the part seated and held at the given grasp offset.
SimState seated_state(const SceneConfig& scene, const Pose& offset) {
    SimState st;
    st.grasp_offset = offset;
    st.gripper_pose = compose(scene.inserted_part_pose(), inverse(offset));
    st.gripper_closed = true;
    return st;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_report: cannot open " + path);
    out << text;
    if (!out) throw std::runtime_error("emit_report: write failed for " + path);
}

void append_episode_rows(std::ostringstream& csv, const std::vector<EpisodeRow>& rows,
                         const std::string& arm) {
    for (size_t i = 0; i < rows.size(); ++i) {
        const EpisodeRow& r = rows[i];
        if (!arm.empty()) csv << arm << ",";
        csv << i << "," << fmt_double(r.grasp.beta) << "," << fmt_double(r.grasp.x) << ","
            << fmt_double(r.grasp.z) << "," << (r.success ? 1 : 0) << ","
            << termination_name(r.termination) << "," << r.attempts << ","
            << fmt_double(r.max_held_force) << "," << fmt_double(r.noise_x) << ","
            << fmt_double(r.noise_y) << "\n";
    }
}

}  // namespace

std::vector<TestGrasp> make_test_set() {
    const std::vector<double> betas = {-M_PI / 20, -M_PI / 40, 0.0, M_PI / 40, M_PI / 20};
    const std::vector<double> xs = grid3(-0.003, 0.003);
    const std::vector<double> zs = grid3(-0.006, -0.002);
    std::vector<TestGrasp> out;
    out.reserve(betas.size() * xs.size() * zs.size());
    for (double b : betas)
        for (double x : xs)
            for (double z : zs) out.push_back({x, z, b});
    return out;
}

int BenchResult::successes() const {
    int n = 0;
    for (const EpisodeRow& r : rows) n += r.success ? 1 : 0;
    return n;
}

BenchResult bench_main(const SceneConfig& scene, const ArmFactory& arm, const Pose& part_target,
                       double z_min, const BenchOptions& opts) {
    if (z_min <= 0.0) throw std::runtime_error("bench_main: z_min must be positive");
    if (!arm) throw std::runtime_error("bench_main: empty arm factory");

    BenchResult result;
    result.seed = opts.seed;
    const std::vector<TestGrasp> grasps = make_test_set();
    for (size_t i = 0; i < grasps.size(); ++i) {
        const TestGrasp& g = grasps[i];
        SimState st = seated_state(scene, make_pose(g.x, 0.0, g.z, g.beta, 0.0));

        // Lift the part straight out of the receptacle to free space; this
        // is harness plumbing and must never trip the guard.
        const Pose lifted = compose(translate(0, 0, 2.0 * z_min), st.gripper_pose);
        const MoveResult lift = guarded_move(scene, st, lifted, kForceLimit, kMoveStep);
        if (lift.halted_by_force) throw std::runtime_error("bench_main: extraction halted");

        Rng er(mix_seed(mix_seed(opts.seed, kStreamBench), uint64_t(i)));
        EpisodeRow row;
        row.grasp = g;
        Pose target = part_target;
        if (opts.target_noise_xy > 0.0) {
            row.noise_x = er.uniform(-opts.target_noise_xy, opts.target_noise_xy);
            row.noise_y = er.uniform(-opts.target_noise_xy, opts.target_noise_xy);
            target = compose(translate(row.noise_x, row.noise_y, 0.0), target);
        }

        TactilePolicy pi_tac;
        VisionPolicy pi_vis;
        arm(g, st, pi_tac, pi_vis);
        const EpisodeResult ep = run_insertion(scene, st, target, z_min, pi_tac, pi_vis, er,
                                               opts.exec);
        const Pose t_true = compose(scene.inserted_part_pose(), inverse(st.grasp_offset));
        row.success = ep.success && check_success(scene, st, t_true);
        row.termination = ep.termination;
        row.attempts = ep.attempts;
        row.max_held_force = ep.max_held_force;
        result.max_held_force = std::max(result.max_held_force, ep.max_held_force);
        result.rows.push_back(row);
    }
    return result;
}

BenchResult bench_main(const SceneConfig& scene, const Model& tactile, const Model& vision,
                       const Pose& part_target, double z_min, const BenchOptions& opts) {
    const TactilePolicy pt = make_tactile_policy(tactile);
    const VisionPolicy pv = make_vision_policy(vision);
    return bench_main(
        scene,
        [&pt, &pv](const TestGrasp&, const SimState&, TactilePolicy& t, VisionPolicy& v) {
            t = pt;
            v = pv;
        },
        part_target, z_min, opts);
}

TactileErrors bench_tactile(const SceneConfig& scene, const Model& tactile,
                            const std::vector<TestGrasp>& grasps, uint64_t seed) {
    if (tactile.spec.pose_dim != 0 || tactile.spec.out_dim != 3) {
        throw std::runtime_error("bench_tactile: model must map an image to 3 outputs");
    }
    TactileErrors out;
    for (size_t i = 0; i < grasps.size(); ++i) {
        const TestGrasp& g = grasps[i];
        Rng rng(mix_seed(mix_seed(seed, kStreamBenchTac), uint64_t(i)));
        const Image img = capture_filtered(scene, make_pose(g.x, 0.0, g.z, g.beta, 0.0), rng, 5);
        const Eigen::VectorXd pred = predict(tactile, img);
        const Eigen::Vector3d truth(g.x, g.z, g.beta);
        out.abs_errors.push_back((Eigen::Vector3d(pred) - truth).cwiseAbs());
    }
    const double n = double(out.abs_errors.size());
    if (n == 0.0) return out;
    for (const Eigen::Vector3d& e : out.abs_errors) out.mae += e;
    out.mae /= n;
    if (n > 1.0) {
        Eigen::Vector3d ss = Eigen::Vector3d::Zero();
        for (const Eigen::Vector3d& e : out.abs_errors) {
            const Eigen::Vector3d d = e - out.mae;
            ss += d.cwiseProduct(d);
        }
        out.stdev = (ss / (n - 1.0)).cwiseSqrt();
    }
    return out;
}

Pose demo_target(const SceneConfig& scene, uint64_t seed) {
    Rng rng(mix_seed(seed, kStreamDemo));
    const double mag = rng.uniform(0.0006, 0.001);
    const double dir = rng.uniform(0.0, 2.0 * M_PI);
    const double tilt = rng.uniform(-M_PI / 180, M_PI / 180);
    const double twist = rng.uniform(-M_PI / 180, M_PI / 180);
    const Pose misread = compose(scene.inserted_part_pose(),
                                 compose(rotate_y(tilt), rotate_z(twist)));
    return compose(translate(mag * std::cos(dir), mag * std::sin(dir), 0.0), misread);
}

namespace {

// ZAWF's one-shot refinement: refine the gripper target for the center
// grasp of the collection grid and convert back to a part target.
Pose single_refined_target(const SceneConfig& scene, const Pose& part_target) {
    const Pose center = make_pose(0.0, 0.0, 0.5 * (kGraspRangeZLo + kGraspRangeZHi), 0.0, 0.0);
    SimState st = seated_state(scene, center);
    const Pose t_g = refine_target(scene, st, compose(part_target, inverse(center)),
                                   default_refine_grid());
    return compose(t_g, center);
}

int successes_until_failure(const SceneConfig& scene, const Pose& part_target, double z_min,
                            TargetMode mode, int grasp_samples) {
    SimState st = seated_state(scene, Pose());
    InsertionOptions opts;
    opts.mode = mode;
    opts.tour = false;
    opts.grasp_samples = grasp_samples;
    const InsertionDataset ds = collect_insertion(scene, st, 0, part_target, z_min, opts);
    const int total = grasp_samples * grasp_samples * grasp_samples;
    return ds.stats.first_failure_grasp < 0 ? total : ds.stats.first_failure_grasp;
}

}  // namespace

std::vector<FtRow> bench_ablation_ft(const SceneConfig& scene,
                                     const std::vector<Pose>& demo_targets, double z_min,
                                     int grasp_samples) {
    if (demo_targets.empty()) throw std::runtime_error("bench_ablation_ft: no demo targets");
    std::vector<FtRow> table;
    for (const std::string& mode : {"ZA", "ZAWF", "ZAWFG"}) {
        FtRow row;
        row.mode = mode;
        row.total = grasp_samples * grasp_samples * grasp_samples;
        for (const Pose& demo : demo_targets) {
            const Pose base = z_axis_align(demo);
            int n = 0;
            if (mode == "ZA") {
                n = successes_until_failure(scene, base, z_min, TargetMode::FixedTarget,
                                            grasp_samples);
            } else if (mode == "ZAWF") {
                const Pose refined = single_refined_target(scene, base);
                n = successes_until_failure(scene, refined, z_min, TargetMode::FixedTarget,
                                            grasp_samples);
            } else {
                n = successes_until_failure(scene, base, z_min, TargetMode::RefinePerGrasp,
                                            grasp_samples);
            }
            row.successes.push_back(n);
        }
        const double k = double(row.successes.size());
        for (int n : row.successes) row.mean += double(n);
        row.mean /= k;
        if (k > 1.0) {
            double ss = 0.0;
            for (int n : row.successes) ss += (double(n) - row.mean) * (double(n) - row.mean);
            row.std_error = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
        }
        table.push_back(row);
    }
    return table;
}

InsertionDataset no_rotation_subset(const InsertionDataset& ds) {
    InsertionDataset out = ds;
    out.records.clear();
    for (const InsertionRecord& r : ds.records) {
        if (r.feat_beta == 0.0) out.records.push_back(r);
    }
    return out;
}

std::vector<ModalityArm> bench_ablation_modality(const SceneConfig& scene, const Model& tactile,
                                                 const Model& vision_norot,
                                                 const Model& vision_full, double z_min,
                                                 uint64_t seed, const ExecParams& exec) {
    BenchOptions opts;
    opts.exec = exec;
    opts.target_noise_xy = 0.001;
    opts.seed = seed;
    const Pose target = scene.inserted_part_pose();

    const TactilePolicy tac = make_tactile_policy(tactile);
    const TactilePolicy tac_zero = zero_tactile_policy();
    const VisionPolicy vis_full = make_vision_policy(vision_full);
    const VisionPolicy vis_norot = make_vision_policy(vision_norot);
    const VisionPolicy vis_zero = zero_vision_policy();

    const auto arm_of = [](TactilePolicy t, VisionPolicy v) {
        return [t = std::move(t), v = std::move(v)](const TestGrasp&, const SimState&,
                                                    TactilePolicy& to, VisionPolicy& vo) {
            to = t;
            vo = v;
        };
    };

    std::vector<ModalityArm> arms;
    const std::vector<std::pair<std::string, BenchResult>> runs = {
        {"tactile_only", bench_main(scene, arm_of(tac, vis_zero), target, z_min, opts)},
        {"vision_only", bench_main(scene, arm_of(tac_zero, vis_norot), target, z_min, opts)},
        {"combined", bench_main(scene, arm_of(tac, vis_full), target, z_min, opts)},
    };
    for (const auto& [name, res] : runs) {
        ModalityArm arm;
        arm.name = name;
        arm.rows = res.rows;
        for (const EpisodeRow& r : res.rows) {
            const bool zero_beta = r.grasp.beta == 0.0;
            (zero_beta ? arm.zero_beta_total : arm.rotated_total)++;
            if (r.success) {
                arm.successes++;
                (zero_beta ? arm.zero_beta_successes : arm.rotated_successes)++;
            }
        }
        arms.push_back(std::move(arm));
    }
    return arms;
}

void emit_report(const BenchReport& r, const std::string& dir) {
    std::filesystem::create_directories(dir);

    std::ostringstream sum;
    sum << "seed: " << r.seed << "\n";
    sum << "scene_hash: " << r.scene_hash_hex << "\n";
    sum << "max_held_force: " << fmt_double(r.max_held_force) << "\n";
    sum << "episodes: " << r.episodes.size() << "\n";
    int wins = 0;
    for (const EpisodeRow& e : r.episodes) wins += e.success ? 1 : 0;
    sum << "successes: " << wins << "\n";
    if (!r.tactile.abs_errors.empty()) {
        sum << "tactile_grasps: " << r.tactile.abs_errors.size() << "\n";
        const char* axes[3] = {"x", "z", "beta"};
        for (int k = 0; k < 3; ++k)
            sum << "tactile_mae_" << axes[k] << ": " << fmt_double(r.tactile.mae(k)) << "\n";
        for (int k = 0; k < 3; ++k)
            sum << "tactile_std_" << axes[k] << ": " << fmt_double(r.tactile.stdev(k)) << "\n";
    }
    for (const FtRow& row : r.ablation) {
        sum << "ft_" << row.mode << "_trials: " << row.successes.size() << "\n";
        sum << "ft_" << row.mode << "_total: " << row.total << "\n";
        sum << "ft_" << row.mode << "_mean: " << fmt_double(row.mean) << "\n";
        sum << "ft_" << row.mode << "_se: " << fmt_double(row.std_error) << "\n";
    }
    for (const ModalityArm& arm : r.modality) {
        sum << "modality_" << arm.name << "_successes: " << arm.successes << "\n";
        sum << "modality_" << arm.name << "_total: " << arm.rows.size() << "\n";
        sum << "modality_" << arm.name << "_zero_beta_successes: " << arm.zero_beta_successes
            << "\n";
        sum << "modality_" << arm.name << "_zero_beta_total: " << arm.zero_beta_total << "\n";
        sum << "modality_" << arm.name << "_rotated_successes: " << arm.rotated_successes << "\n";
        sum << "modality_" << arm.name << "_rotated_total: " << arm.rotated_total << "\n";
    }
    write_file(dir + "/summary.txt", sum.str());

    std::ostringstream epi;
    epi << "index,beta,x,z,success,termination,attempts,max_held_force,noise_x,noise_y\n";
    append_episode_rows(epi, r.episodes, "");
    write_file(dir + "/episodes.csv", epi.str());

    std::ostringstream tac;
    tac << "index,beta,x,z,err_x,err_z,err_beta\n";
    for (size_t i = 0; i < r.tactile.abs_errors.size(); ++i) {
        const TestGrasp g = i < r.tactile_grasps.size() ? r.tactile_grasps[i] : TestGrasp{};
        const Eigen::Vector3d& e = r.tactile.abs_errors[i];
        tac << i << "," << fmt_double(g.beta) << "," << fmt_double(g.x) << "," << fmt_double(g.z)
            << "," << fmt_double(e(0)) << "," << fmt_double(e(1)) << "," << fmt_double(e(2))
            << "\n";
    }
    write_file(dir + "/tactile.csv", tac.str());

    std::ostringstream ft;
    ft << "mode,trial,successes,total\n";
    for (const FtRow& row : r.ablation)
        for (size_t t = 0; t < row.successes.size(); ++t)
            ft << row.mode << "," << t << "," << row.successes[t] << "," << row.total << "\n";
    write_file(dir + "/ablation_ft.csv", ft.str());

    std::ostringstream mod;
    mod << "arm,index,beta,x,z,success,termination,attempts,max_held_force,noise_x,noise_y\n";
    for (const ModalityArm& arm : r.modality) append_episode_rows(mod, arm.rows, arm.name);
    write_file(dir + "/modality.csv", mod.str());

    write_file(dir + "/timings.txt", "wall_seconds: " + fmt_double(r.wall_seconds) + "\n");
}

std::map<std::string, std::string> parse_summary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("parse_summary: cannot open " + path);
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const size_t sep = line.find(": ");
        if (sep == std::string::npos) {
            throw std::runtime_error("parse_summary: malformed line in " + path + ": " + line);
        }
        out[line.substr(0, sep)] = line.substr(sep + 2);
    }
    return out;
}

}  // namespace pegsim
