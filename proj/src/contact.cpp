#include "pegsim/contact.hpp"

#include <cmath>
#include <stdexcept>

namespace pegsim {

namespace {

void append_edge(std::vector<Eigen::Vector3d>& out, const Eigen::Vector3d& a,
                 const Eigen::Vector3d& b) {
    const double len = (b - a).norm();
    const long long n = std::max(1ll, std::llround(len / kBoundarySpacing));
    const Eigen::Vector3d step = (b - a) / double(n);
    for (long long i = 0; i < n; ++i) out.push_back(a + (double(i) + 0.5) * step);
}

std::vector<Eigen::Vector3d> build_samples(const SceneConfig& s) {
    const double hw = 0.5 * s.part_width;
    const double ht = 0.5 * s.part_thickness;
    const double L = s.part_length;
    std::vector<Eigen::Vector3d> out;
    const double ys[2] = {-ht, ht};
    const double zs[2] = {-L, 0.0};
    for (double y : ys)
        for (double z : zs)
            append_edge(out, {-hw, y, z}, {hw, y, z});
    const double xs[2] = {-hw, hw};
    for (double x : xs)
        for (double z : zs)
            append_edge(out, {x, -ht, z}, {x, ht, z});
    for (double x : xs)
        for (double y : ys)
            append_edge(out, {x, y, -L}, {x, y, 0.0});
    return out;
}

struct SampleCache {
    double w = -1, t = -1, l = -1;
    std::vector<Eigen::Vector3d> samples;
};

}  // namespace

const std::vector<Eigen::Vector3d>& boundary_samples(const SceneConfig& s) {
    thread_local SampleCache cache;
    if (cache.w != s.part_width || cache.t != s.part_thickness || cache.l != s.part_length) {
        cache.samples = build_samples(s);
        cache.w = s.part_width;
        cache.t = s.part_thickness;
        cache.l = s.part_length;
    }
    return cache.samples;
}

Wrench wrench(const SceneConfig& scene, const SimState& state) {
    const Pose part = part_pose_in_world(scene, state);
    const auto& samples = boundary_samples(scene);

    const double sx = scene.slot_half_x();
    const double sy = scene.slot_half_y();
    const double d = scene.insertion_depth;
    const double k = scene.contact_stiffness;
    const double mu = scene.friction_mu;
    const double ref_z = scene.part_length - scene.insertion_depth;

    // Scalar math throughout the hot loop: the expression structure below is
    // part of the oracle contract in the header.
    const double r00 = part.R(0, 0), r01 = part.R(0, 1), r02 = part.R(0, 2);
    const double r10 = part.R(1, 0), r11 = part.R(1, 1), r12 = part.R(1, 2);
    const double r20 = part.R(2, 0), r21 = part.R(2, 1), r22 = part.R(2, 2);
    const double tx = part.t.x(), ty = part.t.y(), tz = part.t.z();
    const double gx = state.gripper_pose.t.x();
    const double gy = state.gripper_pose.t.y();
    const double gz = state.gripper_pose.t.z();

    double fx = 0, fy = 0, fz = 0, taux = 0, tauy = 0, tauz = 0;

    for (const Eigen::Vector3d& s : samples) {
        const double px = r00 * s.x() + r01 * s.y() + r02 * s.z() + tx;
        const double py = r10 * s.x() + r11 * s.y() + r12 * s.z() + ty;
        const double pz = r20 * s.x() + r21 * s.y() + r22 * s.z() + tz;
        if (pz >= 0.0) continue;

        const double dA = -pz;
        const double qx = std::max(std::abs(px) - sx, 0.0);
        const double qy = std::max(std::abs(py) - sy, 0.0);
        const double qz = std::max(-d - pz, 0.0);
        const double dB = std::sqrt(qx * qx + qy * qy + qz * qz);
        if (dB == 0.0) continue;  // inside the slot cavity

        double depth, nx, ny, nz;
        if (dA <= dB) {
            depth = dA;
            nx = 0.0;
            ny = 0.0;
            nz = 1.0;
        } else {
            depth = dB;
            nx = (px > 0.0 ? -qx : qx) / dB;
            ny = (py > 0.0 ? -qy : qy) / dB;
            nz = qz / dB;
        }

        double Fx = k * depth * nx;
        double Fy = k * depth * ny;
        double Fz = k * depth * nz;

        const double ux = px - s.x();
        const double uy = py - s.y();
        const double uz = pz - (s.z() + ref_z);
        const double un = ux * nx + uy * ny + uz * nz;
        const double lx = ux - un * nx;
        const double ly = uy - un * ny;
        const double lz = uz - un * nz;
        const double lmag = std::sqrt(lx * lx + ly * ly + lz * lz);
        if (lmag > 1e-12) {
            const double fmag = std::min(k * lmag, mu * k * depth);
            Fx -= fmag * (lx / lmag);
            Fy -= fmag * (ly / lmag);
            Fz -= fmag * (lz / lmag);
        }

        fx += Fx;
        fy += Fy;
        fz += Fz;
        const double ax = px - gx, ay = py - gy, az = pz - gz;
        taux += ay * Fz - az * Fy;
        tauy += az * Fx - ax * Fz;
        tauz += ax * Fy - ay * Fx;
    }

    const auto& Rg = state.gripper_pose.R;
    Wrench w;
    w.f.x() = Rg(0, 0) * fx + Rg(1, 0) * fy + Rg(2, 0) * fz;
    w.f.y() = Rg(0, 1) * fx + Rg(1, 1) * fy + Rg(2, 1) * fz;
    w.f.z() = Rg(0, 2) * fx + Rg(1, 2) * fy + Rg(2, 2) * fz;
    w.tau.x() = Rg(0, 0) * taux + Rg(1, 0) * tauy + Rg(2, 0) * tauz;
    w.tau.y() = Rg(0, 1) * taux + Rg(1, 1) * tauy + Rg(2, 1) * tauz;
    w.tau.z() = Rg(0, 2) * taux + Rg(1, 2) * tauy + Rg(2, 2) * tauz;
    return w;
}

MoveResult guarded_move(const SceneConfig& scene, SimState& state,
                        const Pose& target, double force_limit, double step) {
    if (!(step > 0.0)) throw std::runtime_error("guarded_move: step must be > 0");
    const Pose start = state.gripper_pose;
    const double span = std::max((target.t - start.t).norm(),
                                 rotation_angle_between(start, target) * kRotationArm);
    MoveResult r;
    r.final_pose = start;
    const int n = int(std::ceil(span / step - 1e-12));
    if (n <= 0) return r;

    for (int i = 1; i <= n; ++i) {
        state.gripper_pose = interpolate(start, target, double(i) / double(n));
        const Wrench w = wrench(scene, state);
        const Eigen::Vector3d a = w.f.cwiseAbs();
        r.peak_abs_f_evaluated = r.peak_abs_f_evaluated.cwiseMax(a);
        if (a.maxCoeff() > force_limit) {
            state.gripper_pose =
                i == 1 ? start : interpolate(start, target, double(i - 1) / double(n));
            r.halted_by_force = true;
            r.final_pose = state.gripper_pose;
            return r;
        }
        r.steps_taken = i;
        r.peak_force = std::max(r.peak_force, a.maxCoeff());
        if (scene.slip_enabled) state.grasp_offset = slip_update(scene, state, w);
    }
    r.final_pose = target;
    state.gripper_pose = target;
    return r;
}

Pose slip_update(const SceneConfig& scene, const SimState& state, const Wrench& w) {
    if (!scene.slip_enabled) return state.grasp_offset;
    const Eigen::Vector3d ft(w.f.x(), 0.0, w.f.z());
    const double mag = ft.norm();
    const double hold = scene.slip_mu * scene.grip_force;
    if (mag <= hold) return state.grasp_offset;
    Pose off = state.grasp_offset;
    off.t += (mag - hold) / scene.contact_stiffness * (ft / mag);
    return off;
}

bool is_inserted(const SceneConfig& scene, const SimState& state) {
    const Pose part = part_pose_in_world(scene, state);
    const double hw = 0.5 * scene.part_width;
    const double ht = 0.5 * scene.part_thickness;
    const double L = scene.part_length;
    const double sx = scene.slot_half_x();
    const double sy = scene.slot_half_y();
    const double need_z = -(scene.insertion_depth - 0.0005);

    const double xs[2] = {-hw, hw};
    const double ys[2] = {-ht, ht};
    for (double x : xs)
        for (double y : ys) {
            const Eigen::Vector3d bot = apply(part, {x, y, -L});
            const Eigen::Vector3d top = apply(part, {x, y, 0.0});
            if (bot.z() > need_z) return false;
            if (std::abs(bot.x()) >= sx || std::abs(bot.y()) >= sy) return false;
            if (top.z() > 0.0 && bot.z() < 0.0) {
                const double s = (0.0 - top.z()) / (bot.z() - top.z());
                const Eigen::Vector3d q = top + s * (bot - top);
                if (std::abs(q.x()) >= sx || std::abs(q.y()) >= sy) return false;
            }
        }
    return true;
}

Pose open_gripper(const SceneConfig& scene, SimState& state) {
    const Pose part = part_pose_in_world(scene, state);
    state.gripper_closed = false;
    return part;
}

Pose close_gripper(const SceneConfig&, SimState& state, const Pose& part_world) {
    if (state.gripper_closed)
        throw std::runtime_error("close_gripper: gripper already closed");
    const Pose raw = compose(inverse(state.gripper_pose), part_world);
    state.grasp_offset = make_pose(raw.x(), 0.0, raw.z(), raw.beta(), 0.0);
    state.gripper_closed = true;
    return state.grasp_offset;
}

}  // namespace pegsim
