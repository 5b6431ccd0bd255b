#pragma once

// Brute-force contact wrench oracle shared by the contact and acceptance
// tests: a from-scratch penetration sum written against the documented
// sample/force contract in contact.hpp, using plain scalar math and its own
// edge enumeration. The library implementation must match it bit for bit.

#include <array>
#include <cmath>
#include <vector>

#include "pegsim/contact.hpp"
#include "pegsim/rng.hpp"

namespace testoracle {

struct OracleWrench {
    double f[3];
    double tau[3];
};

inline std::vector<std::array<double, 3>> oracle_sample_set(const pegsim::SceneConfig& sc) {
    const double hw = 0.5 * sc.part_width;
    const double ht = 0.5 * sc.part_thickness;
    const double L = sc.part_length;
    std::vector<std::array<double, 3>> pts;
    auto edge = [&](double ax, double ay, double az, double bx, double by, double bz) {
        const double len = std::sqrt((bx - ax) * (bx - ax) + (by - ay) * (by - ay) +
                                     (bz - az) * (bz - az));
        long n = std::llround(len / pegsim::kBoundarySpacing);
        if (n < 1) n = 1;
        const double sx = (bx - ax) / double(n);
        const double sy = (by - ay) / double(n);
        const double sz = (bz - az) / double(n);
        for (long i = 0; i < n; ++i) {
            const double u = double(i) + 0.5;
            pts.push_back({ax + u * sx, ay + u * sy, az + u * sz});
        }
    };
    // x-edges, y-edges, z-edges in the documented corner order
    edge(-hw, -ht, -L, hw, -ht, -L);
    edge(-hw, -ht, 0, hw, -ht, 0);
    edge(-hw, ht, -L, hw, ht, -L);
    edge(-hw, ht, 0, hw, ht, 0);
    edge(-hw, -ht, -L, -hw, ht, -L);
    edge(-hw, -ht, 0, -hw, ht, 0);
    edge(hw, -ht, -L, hw, ht, -L);
    edge(hw, -ht, 0, hw, ht, 0);
    edge(-hw, -ht, -L, -hw, -ht, 0);
    edge(-hw, ht, -L, -hw, ht, 0);
    edge(hw, -ht, -L, hw, -ht, 0);
    edge(hw, ht, -L, hw, ht, 0);
    return pts;
}

inline OracleWrench wrench_oracle(const pegsim::SceneConfig& sc, const pegsim::SimState& st) {
    const pegsim::Pose part = pegsim::part_pose_in_world(sc, st);
    const double sx = sc.slot_half_x();
    const double sy = sc.slot_half_y();
    const double d = sc.insertion_depth;
    const double k = sc.contact_stiffness;
    const double mu = sc.friction_mu;
    const double refz = sc.part_length - sc.insertion_depth;

    double R[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) R[i][j] = part.R(i, j);
    const double T[3] = {part.t.x(), part.t.y(), part.t.z()};
    const double G[3] = {st.gripper_pose.t.x(), st.gripper_pose.t.y(),
                         st.gripper_pose.t.z()};

    double fw[3] = {0, 0, 0}, tw[3] = {0, 0, 0};
    for (const auto& s : oracle_sample_set(sc)) {
        const double px = R[0][0] * s[0] + R[0][1] * s[1] + R[0][2] * s[2] + T[0];
        const double py = R[1][0] * s[0] + R[1][1] * s[1] + R[1][2] * s[2] + T[1];
        const double pz = R[2][0] * s[0] + R[2][1] * s[1] + R[2][2] * s[2] + T[2];
        if (pz >= 0.0) continue;

        const double dA = -pz;
        double qx = std::fabs(px) - sx;
        if (qx < 0.0) qx = 0.0;
        double qy = std::fabs(py) - sy;
        if (qy < 0.0) qy = 0.0;
        double qz = -d - pz;
        if (qz < 0.0) qz = 0.0;
        const double dB = std::sqrt(qx * qx + qy * qy + qz * qz);
        if (dB == 0.0) continue;

        double depth, n[3];
        if (dA <= dB) {
            depth = dA;
            n[0] = 0.0;
            n[1] = 0.0;
            n[2] = 1.0;
        } else {
            depth = dB;
            n[0] = (px > 0.0 ? -qx : qx) / dB;
            n[1] = (py > 0.0 ? -qy : qy) / dB;
            n[2] = qz / dB;
        }

        double F[3] = {k * depth * n[0], k * depth * n[1], k * depth * n[2]};

        const double u[3] = {px - s[0], py - s[1], pz - (s[2] + refz)};
        const double un = u[0] * n[0] + u[1] * n[1] + u[2] * n[2];
        const double l[3] = {u[0] - un * n[0], u[1] - un * n[1], u[2] - un * n[2]};
        const double lmag = std::sqrt(l[0] * l[0] + l[1] * l[1] + l[2] * l[2]);
        if (lmag > 1e-12) {
            const double fmag = std::min(k * lmag, mu * k * depth);
            F[0] -= fmag * (l[0] / lmag);
            F[1] -= fmag * (l[1] / lmag);
            F[2] -= fmag * (l[2] / lmag);
        }

        fw[0] += F[0];
        fw[1] += F[1];
        fw[2] += F[2];
        const double r[3] = {px - G[0], py - G[1], pz - G[2]};
        tw[0] += r[1] * F[2] - r[2] * F[1];
        tw[1] += r[2] * F[0] - r[0] * F[2];
        tw[2] += r[0] * F[1] - r[1] * F[0];
    }

    OracleWrench out;
    for (int i = 0; i < 3; ++i) {
        out.f[i] = st.gripper_pose.R(0, i) * fw[0] + st.gripper_pose.R(1, i) * fw[1] +
                   st.gripper_pose.R(2, i) * fw[2];
        out.tau[i] = st.gripper_pose.R(0, i) * tw[0] + st.gripper_pose.R(1, i) * tw[1] +
                     st.gripper_pose.R(2, i) * tw[2];
    }
    return out;
}

// Random gripper/grasp states spanning free space, wall contact, and
// taskboard contact; shared draw ranges for the bitwise comparisons.
inline pegsim::SimState random_contact_state(pegsim::Rng& rng) {
    pegsim::SimState st;
    st.gripper_pose = pegsim::make_pose(rng.uniform(-0.002, 0.002), rng.uniform(-0.001, 0.001),
                                        rng.uniform(0.012, 0.026), rng.uniform(-0.2, 0.2),
                                        rng.uniform(-0.05, 0.05));
    st.grasp_offset = pegsim::make_pose(rng.uniform(-0.003, 0.003), 0.0,
                                        rng.uniform(-0.008, -0.002), rng.uniform(-0.2, 0.2), 0.0);
    return st;
}

}  // namespace testoracle
