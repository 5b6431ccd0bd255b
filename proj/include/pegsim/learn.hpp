#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pegsim/collect.hpp"

namespace pegsim {

// Fully connected ReLU regressor over a flattened image, with optional
// scalar pose features concatenated after the image trunk (just before the
// linear output layer). An empty hidden list degenerates to a linear model.
struct MlpSpec {
    int image_w = 0;
    int image_h = 0;
    int pose_dim = 0;
    std::vector<int> hidden;
    int out_dim = 0;

    int image_dim() const { return image_w * image_h; }
    int head_dim() const { return (hidden.empty() ? image_dim() : hidden.back()) + pose_dim; }
};

// Layer l maps activations through W[l] (rows = outputs) plus b[l]. All but
// the last layer apply ReLU. Labels are z-scored during training; label_mean
// and label_std restore predictions to label units.
struct Model {
    MlpSpec spec;
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;
    Eigen::VectorXd label_mean;
    Eigen::VectorXd label_std;
};

// He-initialized weights (output layer gets unit-variance scaling), zero
// biases, drawn from the seed in layer order, row-major within each matrix.
Model init_model(const MlpSpec& spec, uint64_t seed);

struct TrainOptions {
    int epochs = 30;
    int batch_size = 64;
    double lr = 1e-3;            // Adam step size
    double lr_decay = 0.99;      // multiplicative decay factor
    int decay_every = 100;       // steps between decays
    double val_fraction = 0.1;   // held-out tail of the shuffled index list
    bool augment = true;         // input augmentation on training batches
    // Per-feature Gaussian sigma added to the pose features of training
    // batches when augment is on (inputs only, labels untouched). Models
    // the calibration error of a measured robot pose; without it the pose
    // features determine the labels exactly and the image pathway would go
    // unused. Empty disables the noise; otherwise size must equal pose_dim.
    std::vector<double> pose_jitter;
    uint64_t seed = 1;           // init, split, shuffles, jitter
};

struct TrainInfo {
    std::vector<double> train_loss;  // per epoch, z-scored MSE over batches
    std::vector<double> val_loss;    // per epoch, z-scored MSE on the held-out split
    int steps = 0;
};

// Sample access for training: images are fetched by index so large sets can
// be rendered on demand instead of held in memory.
struct SampleSource {
    size_t count = 0;
    std::function<Image(size_t)> image_at;
    Eigen::MatrixXd pose_feats;  // pose_dim x count (0 x count when unused)
    Eigen::MatrixXd labels;      // out_dim x count
};

// Minibatch Adam on mean squared error over z-scored labels. The split, the
// per-epoch shuffles, the jitter draws, and the initial weights all derive
// from opts.seed, so a run is a pure function of (source, spec, opts).
Model train_mlp(const MlpSpec& spec, const SampleSource& source, const TrainOptions& opts,
                TrainInfo* info = nullptr);

// The shuffled index split train_mlp uses: val is the tail val_fraction of a
// seeded shuffle of 0..count-1. Exposed so evaluations can score exactly the
// held-out samples.
void split_indices(size_t count, double val_fraction, uint64_t seed,
                   std::vector<size_t>& train, std::vector<size_t>& val);

// Trunk 128-64 regressor from a tactile image to the grasp offset (x, z,
// beta) it was captured at.
Model train_tactile(const AlignmentDataset& ds, const TrainOptions& opts,
                    TrainInfo* info = nullptr);

// Trunk 128-64 regressor from a wrist camera image plus pose features
// (beta, x, y relative to the approach pose) to the correction
// (dx, dy, dbeta) that recenters the gripper. Images are rendered from
// record seeds on demand unless the dataset materialized them. When
// augmentation is on and opts.pose_jitter is empty, per-axis pose noise
// defaults of {0.02 rad, 0.2mm, 3mm} apply: the heavy y sigma makes the
// regressor read y off the camera (the slot's y is the same for every
// grasp), while x stays feature-driven (the right x depends on the grasp,
// which the camera cannot see).
Model train_vision(const InsertionDataset& ds, const TrainOptions& opts,
                   TrainInfo* info = nullptr);

// Prediction in label units. pose must carry spec.pose_dim entries.
Eigen::VectorXd predict(const Model& m, const Image& img, const Eigen::VectorXd& pose);
Eigen::VectorXd predict(const Model& m, const Image& img);

// Mean squared z-scored training loss of the model on explicit samples.
double mse_loss(const Model& m, const SampleSource& source, const std::vector<size_t>& idx);

// Largest relative disagreement between analytic gradients and central
// differences over every parameter of a random small model on a random
// batch. Batches that would park a ReLU pre-activation within the
// difference step of its kink are redrawn, since the loss is not
// differentiable there. A correct backward pass lands near 1e-9; broken
// ones near 1.
double gradient_check(const MlpSpec& spec, uint64_t seed);

// Directory with manifest.json (spec, label stats, structured text) and
// weights.bin, a flat little-endian f32 blob in layer order, W row-major
// then b per layer. Saving quantizes weights to f32; a saved model reloads
// and re-saves bitwise identically.
void save_model(const Model& m, const std::string& dir);
Model load_model(const std::string& dir);

}  // namespace pegsim
