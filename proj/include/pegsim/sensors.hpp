#pragma once

#include <string>
#include <vector>

#include "pegsim/rng.hpp"
#include "pegsim/scene.hpp"

namespace pegsim {

// Grayscale raster, intensities in [0, 1], row-major.
struct Image {
    int w = 0;
    int h = 0;
    std::vector<float> px;

    Image() = default;
    Image(int w_, int h_) : w(w_), h(h_), px(size_t(w_) * h_, 0.0f) {}
    float& at(int x, int y) { return px[size_t(y) * w + x]; }
    float at(int x, int y) const { return px[size_t(y) * w + x]; }
    bool operator==(const Image& o) const { return w == o.w && h == o.h && px == o.px; }
};

using TactileImage = Image;
using CameraImage = Image;

// Gel imprint of the grasped part: the part cross-section (width by
// thickness) as a rectangle centered at the offset point (x, z) in the
// sensor plane and rotated by beta, rendered as an anti-aliased silhouette.
// Sensor coordinates are gripper x (image columns, rightward) and gripper z
// (image rows, upward); the gel window is tactile_extent centered on the
// gripper origin. Imprint intensity scales with grip force (0.8 at the
// default 70 N). Per-pixel Gaussian noise, clamped to [0, 1]. Throws if the
// silhouette misses the gel entirely.
Image render_tactile(const SceneConfig& scene, const Pose& grasp_offset, Rng& rng);

// Per-pixel median over n independent renders; n must be odd and >= 1.
Image capture_filtered(const SceneConfig& scene, const Pose& grasp_offset,
                       Rng& rng, int n = 5);

// Wrist camera view: pinhole projection (camera rigidly offset from the
// gripper, looking along -z) of the slot opening's four edges and the part
// tip rectangle, drawn as anti-aliased bright segments on a dark background.
// The tip is drawn at the nominal (centered) grasp, so with the rigid wrist
// mount it projects to fixed pixels and acts as a reticle; the slot edges
// carry the pose information. Lines are drawn whether or not the part is in
// the slot; the synthetic world has no occlusion. Throws if the gripper is
// not above the taskboard plane.
Image render_camera(const SceneConfig& scene, const Pose& gripper_pose, Rng& rng);

// Brightness/contrast augmentation, both factors ~ U[0.7, 1.3]:
//   out = clamp(contrast * (in - 0.5) + 0.5 + (brightness - 1) * 0.5)
Image jitter(const Image& img, Rng& rng);

// Binary image file: u32 LE width, u32 LE height, then w*h f32 LE row-major.
void save_image(const Image& img, const std::string& path);
Image load_image(const std::string& path);

}  // namespace pegsim
