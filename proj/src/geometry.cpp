#include "pegsim/geometry.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace pegsim {

double Pose::beta() const { return std::atan2(-R(2, 0), R(0, 0)); }
double Pose::gamma() const { return std::asin(std::clamp(R(1, 0), -1.0, 1.0)); }
double Pose::alpha() const { return std::atan2(-R(1, 2), R(1, 1)); }

Pose rotate_y(double beta) {
    Pose p;
    const double c = std::cos(beta), s = std::sin(beta);
    p.R << c, 0, s, 0, 1, 0, -s, 0, c;
    return p;
}

Pose rotate_z(double gamma) {
    Pose p;
    const double c = std::cos(gamma), s = std::sin(gamma);
    p.R << c, -s, 0, s, c, 0, 0, 0, 1;
    return p;
}

Pose translate(double x, double y, double z) {
    Pose p;
    p.t = Eigen::Vector3d(x, y, z);
    return p;
}

Pose make_pose(double x, double y, double z, double beta, double gamma) {
    Pose p;
    p.R = rotate_y(beta).R * rotate_z(gamma).R;
    p.t = Eigen::Vector3d(x, y, z);
    return p;
}

Pose compose(const Pose& a, const Pose& b) {
    Pose p;
    p.R = a.R * b.R;
    p.t = a.R * b.t + a.t;
    return p;
}

Pose inverse(const Pose& p) {
    Pose q;
    q.R = p.R.transpose();
    q.t = -(q.R * p.t);
    return q;
}

Eigen::Vector3d apply(const Pose& p, const Eigen::Vector3d& v) {
    return p.R * v + p.t;
}

double rotation_angle_between(const Pose& a, const Pose& b) {
    Eigen::Matrix3d d = a.R.transpose() * b.R;
    return Eigen::AngleAxisd(d).angle();
}

Pose interpolate(const Pose& a, const Pose& b, double s) {
    if (s <= 0.0) return a;
    if (s >= 1.0) return b;
    Eigen::AngleAxisd d(Eigen::Matrix3d(a.R.transpose() * b.R));
    Pose p;
    p.R = a.R * Eigen::AngleAxisd(s * d.angle(), d.axis()).toRotationMatrix();
    p.t = a.t + s * (b.t - a.t);
    return p;
}

std::array<double, 5> pose_fields(const Pose& p) {
    if (std::abs(p.alpha()) > 1e-9)
        throw std::runtime_error("pose_fields: residual x rotation " +
                                 std::to_string(p.alpha()) +
                                 " rad exceeds the 2-angle family tolerance");
    return {p.x(), p.y(), p.z(), p.beta(), p.gamma()};
}

Pose pose_from_fields(const std::array<double, 5>& f) {
    return make_pose(f[0], f[1], f[2], f[3], f[4]);
}

std::string pose_to_string(const Pose& p) {
    auto f = pose_fields(p);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g", f[0], f[1],
                  f[2], f[3], f[4]);
    return buf;
}

Pose pose_from_string(const std::string& s) {
    std::istringstream in(s);
    std::array<double, 5> f{};
    for (double& v : f)
        if (!(in >> v)) throw std::runtime_error("pose_from_string: expected 5 fields in '" + s + "'");
    return pose_from_fields(f);
}

const char* frame_name(FrameTag f) {
    switch (f) {
        case FrameTag::Robot: return "Robot";
        case FrameTag::Human: return "Human";
        case FrameTag::Gripper: return "Gripper";
        case FrameTag::Part: return "Part";
    }
    return "?";
}

FramedPose compose_checked(const FramedPose& a, const FramedPose& b) {
    if (a.inner != b.outer)
        throw std::runtime_error(std::string("compose_checked: frame mismatch, ") +
                                 frame_name(a.inner) + " vs " + frame_name(b.outer));
    return FramedPose{compose(a.pose, b.pose), a.outer, b.inner};
}

}  // namespace pegsim
