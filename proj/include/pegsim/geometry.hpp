#pragma once

#include <Eigen/Core>
#include <array>
#include <string>

namespace pegsim {

// Restricted rigid transform. The pipeline only ever commands translation
// plus rotation about the local y axis (beta) and the local z axis (gamma),
// with the convention R = R_y(beta) * R_z(gamma). Compositions of such
// transforms can leave that two-angle family, so the rotation is stored as a
// full matrix and the angles are recovered by a y-z-x Euler decomposition:
//   R = R_y(beta) * R_z(gamma) * R_x(alpha)
// alpha stays ~0 for every pose this pipeline produces; serialization
// enforces that.
struct Pose {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();

    double x() const { return t.x(); }
    double y() const { return t.y(); }
    double z() const { return t.z(); }
    double beta() const;   // rotation about y
    double gamma() const;  // rotation about z
    double alpha() const;  // residual rotation about x, ~0 by construction
};

Pose make_pose(double x, double y, double z, double beta, double gamma);
Pose translate(double x, double y, double z);
Pose rotate_y(double beta);
Pose rotate_z(double gamma);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);
Eigen::Vector3d apply(const Pose& p, const Eigen::Vector3d& v);

// Rotation angle of a.R^T * b.R, used as the interpolation metric.
double rotation_angle_between(const Pose& a, const Pose& b);

// Interpolates translation linearly and rotation along the fixed relative
// axis; s in [0, 1], exact endpoints.
Pose interpolate(const Pose& a, const Pose& b, double s);

// Serialization contract: 5 decimal fields "x y z beta gamma" (meters,
// radians). Throws if the pose carries a residual x rotation beyond 1e-9.
std::array<double, 5> pose_fields(const Pose& p);
Pose pose_from_fields(const std::array<double, 5>& f);
std::string pose_to_string(const Pose& p);
Pose pose_from_string(const std::string& s);

enum class FrameTag { Robot, Human, Gripper, Part };
const char* frame_name(FrameTag f);

// Pose of `inner` expressed in `outer`. compose_checked refuses to chain
// transforms whose frames do not meet.
struct FramedPose {
    Pose pose;
    FrameTag outer = FrameTag::Robot;
    FrameTag inner = FrameTag::Gripper;
};
FramedPose compose_checked(const FramedPose& a, const FramedPose& b);

}  // namespace pegsim
