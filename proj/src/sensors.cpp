#include "pegsim/sensors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace pegsim {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Distance from point p to segment [a, b], all in pixel coordinates.
double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax;
    const double dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = ((px - ax) * dx + (py - ay) * dy) / len2;
        t = std::min(1.0, std::max(0.0, t));
    }
    const double cx = ax + t * dx - px;
    const double cy = ay + t * dy - py;
    return std::sqrt(cx * cx + cy * cy);
}

}  // namespace

Image render_tactile(const SceneConfig& scene, const Pose& grasp_offset, Rng& rng) {
    const int w = scene.tactile_res_w;
    const int h = scene.tactile_res_h;
    const double ew = scene.tactile_extent_w;
    const double eh = scene.tactile_extent_h;
    const double pitch = ew / w;

    const double ox = grasp_offset.x();
    const double oz = grasp_offset.z();
    const double beta = grasp_offset.beta();
    const double cb = std::cos(beta);
    const double sb = std::sin(beta);
    const double hw = 0.5 * scene.part_width;
    const double ht = 0.5 * scene.part_thickness;

    Image img(w, h);
    std::vector<double> alpha(size_t(w) * h);
    double alpha_max = 0.0;
    for (int j = 0; j < h; ++j) {
        // Row 0 is the top of the image, at the +z edge of the gel.
        const double v = eh / 2 - (j + 0.5) * (eh / h);
        for (int i = 0; i < w; ++i) {
            const double u = (i + 0.5) * (ew / w) - ew / 2;
            // Into the rectangle's frame (inverse of the in-plane rotation
            // induced by a rotation of beta about the gripper y-axis).
            const double rx = u - ox;
            const double rz = v - oz;
            const double qx = cb * rx - sb * rz;
            const double qz = sb * rx + cb * rz;
            const double dx = std::fabs(qx) - hw;
            const double dz = std::fabs(qz) - ht;
            const double outside =
                std::sqrt(std::max(dx, 0.0) * std::max(dx, 0.0) + std::max(dz, 0.0) * std::max(dz, 0.0));
            const double sdf = outside + std::min(std::max(dx, dz), 0.0);
            const double a = clamp01(0.5 - sdf / pitch);
            alpha[size_t(j) * w + i] = a;
            alpha_max = std::max(alpha_max, a);
        }
    }
    if (alpha_max == 0.0) {
        throw std::runtime_error("render_tactile: part silhouette entirely off the sensor area");
    }

    const double base = 0.8 * (scene.grip_force / 70.0);
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            const double val = base * alpha[size_t(j) * w + i] + scene.noise_sigma_tactile * rng.normal();
            img.at(i, j) = float(clamp01(val));
        }
    }
    return img;
}

Image capture_filtered(const SceneConfig& scene, const Pose& grasp_offset, Rng& rng, int n) {
    if (n < 1 || n % 2 == 0) {
        throw std::invalid_argument("capture_filtered: n must be odd and >= 1");
    }
    std::vector<Image> frames;
    frames.reserve(n);
    for (int k = 0; k < n; ++k) {
        frames.push_back(render_tactile(scene, grasp_offset, rng));
    }
    Image out(frames[0].w, frames[0].h);
    std::vector<float> vals(n);
    for (size_t p = 0; p < out.px.size(); ++p) {
        for (int k = 0; k < n; ++k) vals[k] = frames[k].px[p];
        std::nth_element(vals.begin(), vals.begin() + n / 2, vals.end());
        out.px[p] = vals[n / 2];
    }
    return out;
}

Image render_camera(const SceneConfig& scene, const Pose& gripper_pose, Rng& rng) {
    if (gripper_pose.z() <= 0.0) {
        throw std::domain_error("render_camera: gripper must be above the taskboard plane");
    }
    const int w = scene.camera_res_w;
    const int h = scene.camera_res_h;
    const double f = scene.camera_focal_px;
    const double cx = (w - 1) / 2.0;
    const double cy = (h - 1) / 2.0;

    const Pose cam = compose(gripper_pose, scene.camera_offset);
    const Pose inv_cam = inverse(cam);

    // Segment endpoints in world coordinates: slot opening plus the part tip
    // rectangle at the nominal grasp (fixed in the gripper frame).
    const double sx = scene.slot_half_x();
    const double sy = scene.slot_half_y();
    const Eigen::Vector3d slot[4] = {
        {-sx, -sy, 0.0}, {sx, -sy, 0.0}, {sx, sy, 0.0}, {-sx, sy, 0.0}};
    const double hw = 0.5 * scene.part_width;
    const double ht = 0.5 * scene.part_thickness;
    const double L = scene.part_length;
    const Eigen::Vector3d tip_local[4] = {
        {-hw, -ht, -L}, {hw, -ht, -L}, {hw, ht, -L}, {-hw, ht, -L}};

    std::vector<std::array<double, 4>> segs;  // x0, y0, x1, y1 in pixels
    auto project = [&](const Eigen::Vector3d& p_world, double& u, double& v) {
        const Eigen::Vector3d pc = apply(inv_cam, p_world);
        const double depth = -pc.z();
        if (depth < 1e-4) return false;
        u = cx + f * pc.x() / depth;
        v = cy - f * pc.y() / depth;
        return true;
    };
    auto add_quad = [&](const Eigen::Vector3d* corners, const Pose* frame) {
        double u[4], v[4];
        for (int k = 0; k < 4; ++k) {
            const Eigen::Vector3d p = frame ? apply(*frame, corners[k]) : corners[k];
            if (!project(p, u[k], v[k])) return;
        }
        for (int k = 0; k < 4; ++k) {
            const int k2 = (k + 1) % 4;
            segs.push_back({u[k], v[k], u[k2], v[k2]});
        }
    };
    add_quad(slot, nullptr);
    add_quad(tip_local, &gripper_pose);

    const double bg = 0.1;
    std::vector<double> line(size_t(w) * h, 0.0);
    for (const auto& s : segs) {
        const int i0 = std::max(0, int(std::floor(std::min(s[0], s[2]) - 2.0)));
        const int i1 = std::min(w - 1, int(std::ceil(std::max(s[0], s[2]) + 2.0)));
        const int j0 = std::max(0, int(std::floor(std::min(s[1], s[3]) - 2.0)));
        const int j1 = std::min(h - 1, int(std::ceil(std::max(s[1], s[3]) + 2.0)));
        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) {
                const double d = segment_distance(i, j, s[0], s[1], s[2], s[3]);
                const double a = clamp01(1.5 - d);
                double& cell = line[size_t(j) * w + i];
                cell = std::max(cell, a);
            }
        }
    }

    Image img(w, h);
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            const double val =
                bg + (1.0 - bg) * line[size_t(j) * w + i] + scene.noise_sigma_camera * rng.normal();
            img.at(i, j) = float(clamp01(val));
        }
    }
    return img;
}

Image jitter(const Image& img, Rng& rng) {
    const double contrast = rng.uniform(0.7, 1.3);
    const double brightness = rng.uniform(0.7, 1.3);
    Image out(img.w, img.h);
    for (size_t p = 0; p < img.px.size(); ++p) {
        const double v = contrast * (double(img.px[p]) - 0.5) + 0.5 + (brightness - 1.0) * 0.5;
        out.px[p] = float(clamp01(v));
    }
    return out;
}

void save_image(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_image: cannot open " + path);
    const uint32_t wh[2] = {uint32_t(img.w), uint32_t(img.h)};
    out.write(reinterpret_cast<const char*>(wh), sizeof(wh));
    out.write(reinterpret_cast<const char*>(img.px.data()),
              std::streamsize(img.px.size() * sizeof(float)));
    if (!out) throw std::runtime_error("save_image: write failed for " + path);
}

Image load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_image: cannot open " + path);
    uint32_t wh[2];
    in.read(reinterpret_cast<char*>(wh), sizeof(wh));
    if (!in || wh[0] == 0 || wh[1] == 0 || wh[0] > 1u << 16 || wh[1] > 1u << 16) {
        throw std::runtime_error("load_image: bad header in " + path);
    }
    Image img{int(wh[0]), int(wh[1])};
    in.read(reinterpret_cast<char*>(img.px.data()), std::streamsize(img.px.size() * sizeof(float)));
    if (!in) throw std::runtime_error("load_image: truncated pixel data in " + path);
    return img;
}

}  // namespace pegsim
