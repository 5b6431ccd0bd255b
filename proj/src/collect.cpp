#include "pegsim/collect.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace pegsim {

namespace {

constexpr uint64_t kStreamAlignDraws = 0xA11D;
constexpr uint64_t kStreamAlignRender = 0xA11E;
constexpr uint64_t kStreamInsertDraws = 0x15D1;
constexpr uint64_t kStreamInsertRender = 0x15D2;

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v;
    if (n == 1) {
        v.push_back(0.5 * (lo + hi));
        return v;
    }
    for (int i = 0; i < n; ++i) v.push_back(lo + i * ((hi - lo) / (n - 1)));
    return v;
}

double max_abs_force(const Wrench& w) {
    return w.f.cwiseAbs().maxCoeff();
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string hash_hex(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

json load_manifest(const std::string& dir, const std::string& expected_kind) {
    json m;
    try {
        m = json::parse(read_text(fs::path(dir) / "manifest.json"));
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt manifest in " + dir + ": " + e.what());
    }
    if (m.value("kind", "") != expected_kind) {
        throw std::runtime_error("manifest kind mismatch in " + dir);
    }
    return m;
}

SceneConfig scene_from_manifest(const json& m, const std::string& dir) {
    const SceneConfig scene = parse_scene(m.at("scene_text").get<std::string>());
    if (hash_hex(scene_hash(scene)) != m.at("scene_hash").get<std::string>()) {
        throw std::runtime_error("scene hash mismatch in " + dir);
    }
    return scene;
}

std::vector<std::string> read_csv_records(const json& m, const std::string& dir,
                                          const std::string& header) {
    const std::string csv = read_text(fs::path(dir) / "records.csv");
    std::vector<std::string> lines;
    std::istringstream ss(csv);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty() || lines.front() != header) {
        throw std::runtime_error("bad records.csv header in " + dir);
    }
    lines.erase(lines.begin());
    if (lines.size() != m.at("count").get<size_t>()) {
        throw std::runtime_error("record count mismatch in " + dir);
    }
    return lines;
}

}  // namespace

AlignmentDataset collect_alignment(const SceneConfig& scene, SimState& state, uint64_t seed) {
    if (!state.gripper_closed || !is_inserted(scene, state)) {
        throw std::runtime_error("collect_alignment: part must start grasped and inserted");
    }
    AlignmentDataset ds;
    ds.scene = scene;
    ds.seed = seed;

    Rng draws(mix_seed(seed, kStreamAlignDraws));
    std::vector<double> xs, zs, bs;
    for (int i = 0; i < 5; ++i) xs.push_back(draws.uniform(-kGraspRangeX, kGraspRangeX));
    for (int i = 0; i < 10; ++i) zs.push_back(draws.uniform(kGraspRangeZLo, kGraspRangeZHi));
    for (int i = 0; i < 20; ++i) bs.push_back(draws.uniform(-kGraspRangeBeta, kGraspRangeBeta));

    size_t rec_idx = 0;
    for (double x : xs) {
        for (double z : zs) {
            for (double b : bs) {
                const Pose part = open_gripper(scene, state);
                state.gripper_pose = compose(part, inverse(make_pose(x, 0.0, z, b, 0.0)));
                const Pose seated = close_gripper(scene, state, part);
                if (max_abs_force(wrench(scene, state)) > kForceLimit) {
                    throw std::runtime_error("collect_alignment: re-grasp settled above the force limit");
                }
                for (int c = 0; c < scene.captures_per_offset; ++c) {
                    AlignmentRecord rec;
                    rec.x = seated.x();
                    rec.z = seated.z();
                    rec.beta = seated.beta();
                    rec.render_seed = mix_seed(mix_seed(seed, kStreamAlignRender), rec_idx);
                    Rng rr(rec.render_seed);
                    rec.tactile = capture_filtered(scene, state.grasp_offset, rr, 5);
                    ds.records.push_back(std::move(rec));
                    ++rec_idx;
                }
            }
        }
    }
    if (!is_inserted(scene, state)) {
        throw std::logic_error("collect_alignment: part left the receptacle");
    }
    return ds;
}

InsertionDataset collect_insertion(const SceneConfig& scene, SimState& state, uint64_t seed,
                                   const Pose& part_target, double z_min,
                                   const InsertionOptions& opts) {
    if (z_min <= 0.0) throw std::runtime_error("collect_insertion: z_min must be positive");
    if (opts.grasp_samples < 1) throw std::runtime_error("collect_insertion: grasp_samples < 1");
    if (!state.gripper_closed || !is_inserted(scene, state)) {
        throw std::runtime_error("collect_insertion: part must start grasped and inserted");
    }

    InsertionDataset ds;
    ds.scene = scene;
    ds.seed = seed;
    ds.z_min = z_min;

    const std::vector<double> gx = linspace(-kGraspRangeX, kGraspRangeX, opts.grasp_samples);
    const std::vector<double> gz = linspace(kGraspRangeZLo, kGraspRangeZHi, opts.grasp_samples);
    const std::vector<double> gb = linspace(-kGraspRangeBeta, kGraspRangeBeta, opts.grasp_samples);
    const std::vector<double> tour_xy = linspace(-kTourRangeXY, kTourRangeXY, 5);
    const std::vector<double> tour_rise = linspace(0.0, kTourRise, 5);

    Pose part_free = open_gripper(scene, state);
    size_t rec_idx = 0;
    int g = 0;
    bool failed = false;

    // Any halted motion marks the grasp as failed; the part is left where
    // the guard stopped it and collection ends (partial data, honest stats).
    auto move = [&](const Pose& target) {
        const MoveResult mr = guarded_move(scene, state, target, kForceLimit, kMoveStep);
        ds.stats.max_accepted_force = std::max(ds.stats.max_accepted_force, mr.peak_force);
        if (mr.halted_by_force) {
            ++ds.stats.guard_trips;
            if (ds.stats.first_failure_grasp < 0) ds.stats.first_failure_grasp = g;
            failed = true;
        }
        return !failed;
    };
    auto record = [&](double ox, double oy, double rise, double beta_s) {
        InsertionRecord r;
        r.label_dx = -ox;
        r.label_dy = -oy;
        r.label_dbeta = -beta_s;
        r.feat_beta = beta_s;
        r.feat_x = ox;
        r.feat_y = oy;
        r.rise = rise;
        r.grasp_index = g;
        r.render_seed = mix_seed(mix_seed(seed, kStreamInsertRender), rec_idx);
        if (opts.render_images) {
            Rng rr(r.render_seed);
            r.camera = render_camera(scene, state.gripper_pose, rr);
            r.has_image = true;
        }
        ds.records.push_back(std::move(r));
        ++rec_idx;
    };

    for (double ox_g : gx) {
        for (double oz_g : gz) {
            for (double ob_g : gb) {
                const Pose o_g = make_pose(ox_g, 0.0, oz_g, ob_g, 0.0);
                Rng tilt_draws(mix_seed(mix_seed(seed, kStreamInsertDraws), uint64_t(g)));

                state.gripper_pose = compose(part_free, inverse(o_g));
                close_gripper(scene, state, part_free);
                if (max_abs_force(wrench(scene, state)) > kForceLimit) {
                    ++ds.stats.guard_trips;
                    if (ds.stats.first_failure_grasp < 0) ds.stats.first_failure_grasp = g;
                    failed = true;
                    break;
                }

                Pose t_g = compose(part_target, inverse(o_g));
                if (opts.mode == TargetMode::RefinePerGrasp) {
                    t_g = refine_target(scene, state, t_g, opts.grid);
                }
                const Pose t_unplug = compose(translate(0.0, 0.0, z_min), t_g);
                ds.unplug_poses.push_back(t_unplug);

                if (!move(t_unplug)) break;

                if (opts.tour) {
                    for (size_t ix = 0; ix < tour_xy.size() && !failed; ++ix) {
                        for (size_t iy = 0; iy < tour_xy.size() && !failed; ++iy) {
                            for (size_t ir = 0; ir < tour_rise.size() && !failed; ++ir) {
                                const double ox = tour_xy[ix];
                                const double oy = tour_xy[iy];
                                const double rise = tour_rise[ir];
                                const double s = rise / kTourRise;
                                const Pose pose0 = compose(translate(ox, oy, rise), t_unplug);
                                if (!move(pose0)) break;
                                record(ox, oy, rise, 0.0);
                                const double draw_neg = tilt_draws.uniform(-kGraspRangeBeta, 0.0);
                                const double draw_pos = tilt_draws.uniform(0.0, kGraspRangeBeta);
                                for (double beta_s : {s * draw_neg, s * draw_pos}) {
                                    if (!move(compose(pose0, rotate_y(beta_s)))) break;
                                    record(ox, oy, rise, beta_s);
                                    if (!move(pose0)) break;
                                }
                            }
                        }
                    }
                    if (failed) break;
                    if (!move(t_unplug)) break;
                }

                if (!move(t_g)) break;
                if (!is_inserted(scene, state)) {
                    ++ds.stats.guard_trips;
                    if (ds.stats.first_failure_grasp < 0) ds.stats.first_failure_grasp = g;
                    failed = true;
                    break;
                }
                part_free = open_gripper(scene, state);
                ++ds.stats.grasps_completed;
                ++g;
            }
            if (failed) break;
        }
        if (failed) break;
    }
    return ds;
}

void save_dataset(const AlignmentDataset& ds, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "img");
    json m;
    m["kind"] = "alignment";
    m["count"] = ds.records.size();
    m["seed"] = ds.seed;
    m["scene_hash"] = hash_hex(scene_hash(ds.scene));
    m["scene_text"] = scene_to_string(ds.scene);
    m["captures_per_offset"] = ds.scene.captures_per_offset;
    m["ranges"] = {{"x", {-kGraspRangeX, kGraspRangeX}},
                   {"z", {kGraspRangeZLo, kGraspRangeZHi}},
                   {"beta", {-kGraspRangeBeta, kGraspRangeBeta}}};

    std::string csv = "x,z,beta,render_seed,image_file\n";
    json files = json::array();
    files.push_back("records.csv");
    for (size_t i = 0; i < ds.records.size(); ++i) {
        const AlignmentRecord& r = ds.records[i];
        char name[32];
        std::snprintf(name, sizeof(name), "img/tac_%05zu.img", i);
        save_image(r.tactile, (fs::path(dir) / name).string());
        csv += format_double(r.x) + "," + format_double(r.z) + "," + format_double(r.beta) +
               "," + std::to_string(r.render_seed) + "," + name + "\n";
        files.push_back(name);
    }
    m["files"] = files;
    write_text(fs::path(dir) / "records.csv", csv);
    write_text(fs::path(dir) / "manifest.json", m.dump(2) + "\n");
}

void save_dataset(const InsertionDataset& ds, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "img");
    json m;
    m["kind"] = "insertion";
    m["count"] = ds.records.size();
    m["seed"] = ds.seed;
    m["z_min"] = ds.z_min;
    m["scene_hash"] = hash_hex(scene_hash(ds.scene));
    m["scene_text"] = scene_to_string(ds.scene);
    m["stats"] = {{"grasps_completed", ds.stats.grasps_completed},
                  {"guard_trips", ds.stats.guard_trips},
                  {"first_failure_grasp", ds.stats.first_failure_grasp},
                  {"max_accepted_force", ds.stats.max_accepted_force}};
    json poses = json::array();
    for (const Pose& p : ds.unplug_poses) {
        json row = json::array();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) row.push_back(p.R(i, j));
        for (int i = 0; i < 3; ++i) row.push_back(p.t(i));
        poses.push_back(row);
    }
    m["unplug_poses"] = poses;

    std::string csv = "label_dx,label_dy,label_dbeta,feat_beta,feat_x,feat_y,rise,grasp_index,render_seed,image_file\n";
    json files = json::array();
    files.push_back("records.csv");
    for (size_t i = 0; i < ds.records.size(); ++i) {
        const InsertionRecord& r = ds.records[i];
        std::string name = "-";
        if (r.has_image) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "img/cam_%06zu.img", i);
            name = buf;
            save_image(r.camera, (fs::path(dir) / name).string());
            files.push_back(name);
        }
        csv += format_double(r.label_dx) + "," + format_double(r.label_dy) + "," +
               format_double(r.label_dbeta) + "," + format_double(r.feat_beta) + "," +
               format_double(r.feat_x) + "," + format_double(r.feat_y) + "," +
               format_double(r.rise) + "," + std::to_string(r.grasp_index) + "," +
               std::to_string(r.render_seed) + "," + name + "\n";
    }
    m["files"] = files;
    write_text(fs::path(dir) / "records.csv", csv);
    write_text(fs::path(dir) / "manifest.json", m.dump(2) + "\n");
}

AlignmentDataset load_alignment_dataset(const std::string& dir) {
    const json m = load_manifest(dir, "alignment");
    AlignmentDataset ds;
    ds.scene = scene_from_manifest(m, dir);
    ds.seed = m.at("seed").get<uint64_t>();
    const std::vector<std::string> rows =
        read_csv_records(m, dir, "x,z,beta,render_seed,image_file");
    for (const std::string& line : rows) {
        const std::vector<std::string> f = split_csv_row(line);
        if (f.size() != 5) throw std::runtime_error("bad records.csv row in " + dir);
        AlignmentRecord r;
        r.x = std::strtod(f[0].c_str(), nullptr);
        r.z = std::strtod(f[1].c_str(), nullptr);
        r.beta = std::strtod(f[2].c_str(), nullptr);
        r.render_seed = std::strtoull(f[3].c_str(), nullptr, 10);
        r.tactile = load_image((fs::path(dir) / f[4]).string());
        ds.records.push_back(std::move(r));
    }
    return ds;
}

InsertionDataset load_insertion_dataset(const std::string& dir) {
    const json m = load_manifest(dir, "insertion");
    InsertionDataset ds;
    ds.scene = scene_from_manifest(m, dir);
    ds.seed = m.at("seed").get<uint64_t>();
    ds.z_min = m.at("z_min").get<double>();
    ds.stats.grasps_completed = m.at("stats").at("grasps_completed").get<int>();
    ds.stats.guard_trips = m.at("stats").at("guard_trips").get<int>();
    ds.stats.first_failure_grasp = m.at("stats").at("first_failure_grasp").get<int>();
    ds.stats.max_accepted_force = m.at("stats").at("max_accepted_force").get<double>();
    for (const json& row : m.at("unplug_poses")) {
        if (row.size() != 12) throw std::runtime_error("bad unplug pose in " + dir);
        Pose p;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) p.R(i, j) = row[size_t(3 * i + j)].get<double>();
        for (int i = 0; i < 3; ++i) p.t(i) = row[size_t(9 + i)].get<double>();
        ds.unplug_poses.push_back(p);
    }
    const std::vector<std::string> rows = read_csv_records(
        m, dir,
        "label_dx,label_dy,label_dbeta,feat_beta,feat_x,feat_y,rise,grasp_index,render_seed,image_file");
    for (const std::string& line : rows) {
        const std::vector<std::string> f = split_csv_row(line);
        if (f.size() != 10) throw std::runtime_error("bad records.csv row in " + dir);
        InsertionRecord r;
        r.label_dx = std::strtod(f[0].c_str(), nullptr);
        r.label_dy = std::strtod(f[1].c_str(), nullptr);
        r.label_dbeta = std::strtod(f[2].c_str(), nullptr);
        r.feat_beta = std::strtod(f[3].c_str(), nullptr);
        r.feat_x = std::strtod(f[4].c_str(), nullptr);
        r.feat_y = std::strtod(f[5].c_str(), nullptr);
        r.rise = std::strtod(f[6].c_str(), nullptr);
        r.grasp_index = int(std::strtol(f[7].c_str(), nullptr, 10));
        r.render_seed = std::strtoull(f[8].c_str(), nullptr, 10);
        if (size_t(r.grasp_index) >= ds.unplug_poses.size()) {
            throw std::runtime_error("record references missing grasp in " + dir);
        }
        if (f[9] != "-") {
            r.camera = load_image((fs::path(dir) / f[9]).string());
            r.has_image = true;
        }
        ds.records.push_back(std::move(r));
    }
    return ds;
}

Image insertion_image(const InsertionDataset& ds, const InsertionRecord& r) {
    if (r.has_image) return r.camera;
    Rng rr(r.render_seed);
    return render_camera(ds.scene, ds.record_pose(r), rr);
}

}  // namespace pegsim
