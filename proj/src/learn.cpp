#include "pegsim/learn.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace pegsim {

namespace {

constexpr uint64_t kStreamInit = 0x1B17;
constexpr uint64_t kStreamSplit = 0x51D5;
constexpr uint64_t kStreamShuffle = 0x5F13;
constexpr uint64_t kStreamJitter = 0x71E2;
constexpr uint64_t kStreamGrad = 0x6AAD;

void validate_spec(const MlpSpec& spec) {
    if (spec.image_w <= 0 || spec.image_h <= 0) throw std::runtime_error("mlp: bad image size");
    if (spec.pose_dim < 0) throw std::runtime_error("mlp: bad pose_dim");
    if (spec.out_dim <= 0) throw std::runtime_error("mlp: bad out_dim");
    for (int h : spec.hidden)
        if (h <= 0) throw std::runtime_error("mlp: bad hidden width");
}

// Layer input widths: image trunk, then the pose-augmented head.
std::vector<std::pair<int, int>> layer_dims(const MlpSpec& spec) {
    std::vector<std::pair<int, int>> dims;  // (rows, cols) per layer
    int d = spec.image_dim();
    for (int h : spec.hidden) {
        dims.emplace_back(h, d);
        d = h;
    }
    dims.emplace_back(spec.out_dim, d + spec.pose_dim);
    return dims;
}

void shuffle_indices(std::vector<size_t>& idx, Rng& rng) {
    for (size_t i = idx.size(); i > 1; --i) {
        size_t j = size_t(rng.unit() * double(i));
        if (j >= i) j = i - 1;
        std::swap(idx[i - 1], idx[j]);
    }
}

Eigen::VectorXd flatten(const Image& img, const MlpSpec& spec) {
    if (img.w != spec.image_w || img.h != spec.image_h) {
        throw std::runtime_error("mlp: image size does not match the model");
    }
    return Eigen::Map<const Eigen::VectorXf>(img.px.data(), long(img.px.size())).cast<double>();
}

// Activations kept per layer for the backward pass. The pose block enters
// as extra rows of the final layer's input.
struct BatchWork {
    std::vector<Eigen::MatrixXd> inputs;  // input of each layer
    std::vector<Eigen::MatrixXd> zs;      // pre-activation of each layer
};

Eigen::MatrixXd forward(const Model& m, const Eigen::MatrixXd& images,
                        const Eigen::MatrixXd& pose, BatchWork* work) {
    const size_t layers = m.W.size();
    Eigen::MatrixXd a = images;
    for (size_t l = 0; l < layers; ++l) {
        if (l + 1 == layers && m.spec.pose_dim > 0) {
            Eigen::MatrixXd h(a.rows() + pose.rows(), a.cols());
            h << a, pose;
            a = h;
        }
        Eigen::MatrixXd z = (m.W[l] * a).colwise() + m.b[l];
        if (work) {
            work->inputs.push_back(a);
            work->zs.push_back(z);
        }
        a = (l + 1 == layers) ? z : z.cwiseMax(0.0);
    }
    return a;
}

struct Gradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
};

// Mean squared error over the batch and its gradient in the parameters.
double forward_backward(const Model& m, const Eigen::MatrixXd& images,
                        const Eigen::MatrixXd& pose, const Eigen::MatrixXd& targets,
                        Gradients& g) {
    const size_t layers = m.W.size();
    BatchWork work;
    const Eigen::MatrixXd y = forward(m, images, pose, &work);
    const Eigen::MatrixXd diff = y - targets;
    const double denom = double(diff.size());
    const double loss = diff.squaredNorm() / denom;

    g.dW.assign(layers, Eigen::MatrixXd());
    g.db.assign(layers, Eigen::VectorXd());
    Eigen::MatrixXd dz = diff * (2.0 / denom);
    for (size_t l = layers; l-- > 0;) {
        g.dW[l] = dz * work.inputs[l].transpose();
        g.db[l] = dz.rowwise().sum();
        if (l == 0) break;
        Eigen::MatrixXd da = m.W[l].transpose() * dz;
        if (l == layers - 1 && m.spec.pose_dim > 0) {
            da.conservativeResize(da.rows() - m.spec.pose_dim, Eigen::NoChange);
        }
        dz = da.cwiseProduct((work.zs[l - 1].array() > 0.0).cast<double>().matrix());
    }
    return loss;
}

void fill_batch(const MlpSpec& spec, const SampleSource& source, const std::vector<size_t>& idx,
                size_t begin, size_t end, bool augment, uint64_t seed, int epoch,
                const std::vector<double>& pose_jitter, Eigen::MatrixXd& images,
                Eigen::MatrixXd& pose) {
    const long b = long(end - begin);
    images.resize(spec.image_dim(), b);
    pose.resize(spec.pose_dim, b);
    for (long c = 0; c < b; ++c) {
        const size_t s = idx[begin + size_t(c)];
        Image img = source.image_at(s);
        if (spec.pose_dim > 0) pose.col(c) = source.pose_feats.col(long(s));
        if (augment) {
            Rng jr(mix_seed(mix_seed(mix_seed(seed, kStreamJitter), uint64_t(epoch)), s));
            img = jitter(img, jr);
            for (size_t k = 0; k < pose_jitter.size(); ++k)
                pose(long(k), c) += pose_jitter[k] * jr.normal();
        }
        images.col(c) = flatten(img, spec);
    }
}

double eval_loss(const Model& m, const SampleSource& source, const std::vector<size_t>& idx,
                 const Eigen::MatrixXd& targets_scored) {
    if (idx.empty()) return 0.0;
    double sum = 0.0;
    const size_t chunk = 256;
    Eigen::MatrixXd images, pose;
    for (size_t begin = 0; begin < idx.size(); begin += chunk) {
        const size_t end = std::min(idx.size(), begin + chunk);
        fill_batch(m.spec, source, idx, begin, end, false, 0, 0, {}, images, pose);
        Eigen::MatrixXd t(m.spec.out_dim, long(end - begin));
        for (size_t c = begin; c < end; ++c) t.col(long(c - begin)) = targets_scored.col(long(idx[c]));
        const Eigen::MatrixXd y = forward(m, images, pose, nullptr);
        sum += (y - t).squaredNorm();
    }
    return sum / (double(idx.size()) * double(m.spec.out_dim));
}

SampleSource dataset_source(const AlignmentDataset& ds) {
    SampleSource src;
    src.count = ds.records.size();
    src.image_at = [&ds](size_t i) { return ds.records[i].tactile; };
    src.pose_feats.resize(0, long(src.count));
    src.labels.resize(3, long(src.count));
    for (size_t i = 0; i < src.count; ++i) {
        const AlignmentRecord& r = ds.records[i];
        src.labels.col(long(i)) << r.x, r.z, r.beta;
    }
    return src;
}

SampleSource dataset_source(const InsertionDataset& ds) {
    SampleSource src;
    src.count = ds.records.size();
    src.image_at = [&ds](size_t i) { return insertion_image(ds, ds.records[i]); };
    src.pose_feats.resize(3, long(src.count));
    src.labels.resize(3, long(src.count));
    for (size_t i = 0; i < src.count; ++i) {
        const InsertionRecord& r = ds.records[i];
        src.pose_feats.col(long(i)) << r.feat_beta, r.feat_x, r.feat_y;
        src.labels.col(long(i)) << r.label_dx, r.label_dy, r.label_dbeta;
    }
    return src;
}

MlpSpec trunk_spec(const SceneConfig& scene, bool tactile) {
    MlpSpec spec;
    spec.image_w = tactile ? scene.tactile_res_w : scene.camera_res_w;
    spec.image_h = tactile ? scene.tactile_res_h : scene.camera_res_h;
    spec.pose_dim = tactile ? 0 : 3;
    spec.hidden = {128, 64};
    spec.out_dim = 3;
    return spec;
}

}  // namespace

Model init_model(const MlpSpec& spec, uint64_t seed) {
    validate_spec(spec);
    Model m;
    m.spec = spec;
    Rng rng(seed);
    const auto dims = layer_dims(spec);
    for (size_t l = 0; l < dims.size(); ++l) {
        const auto [rows, cols] = dims[l];
        const bool relu_layer = l + 1 < dims.size();
        const double scale = std::sqrt((relu_layer ? 2.0 : 1.0) / double(cols));
        Eigen::MatrixXd w(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) w(r, c) = rng.normal() * scale;
        m.W.push_back(std::move(w));
        m.b.push_back(Eigen::VectorXd::Zero(rows));
    }
    m.label_mean = Eigen::VectorXd::Zero(spec.out_dim);
    m.label_std = Eigen::VectorXd::Ones(spec.out_dim);
    return m;
}

void split_indices(size_t count, double val_fraction, uint64_t seed,
                   std::vector<size_t>& train, std::vector<size_t>& val) {
    if (val_fraction < 0.0 || val_fraction >= 1.0) {
        throw std::runtime_error("split_indices: val_fraction must be in [0, 1)");
    }
    std::vector<size_t> idx(count);
    for (size_t i = 0; i < count; ++i) idx[i] = i;
    Rng rng(mix_seed(seed, kStreamSplit));
    shuffle_indices(idx, rng);
    const size_t nval = size_t(val_fraction * double(count));
    train.assign(idx.begin(), idx.end() - long(nval));
    val.assign(idx.end() - long(nval), idx.end());
}

Model train_mlp(const MlpSpec& spec, const SampleSource& source, const TrainOptions& opts,
                TrainInfo* info) {
    validate_spec(spec);
    if (source.count == 0) throw std::runtime_error("train_mlp: empty sample source");
    if (source.labels.rows() != spec.out_dim || source.labels.cols() != long(source.count)) {
        throw std::runtime_error("train_mlp: label matrix does not match the spec");
    }
    if (source.pose_feats.rows() != spec.pose_dim ||
        (spec.pose_dim > 0 && source.pose_feats.cols() != long(source.count))) {
        throw std::runtime_error("train_mlp: pose features do not match the spec");
    }
    if (opts.epochs < 0 || opts.batch_size < 1) throw std::runtime_error("train_mlp: bad options");
    if (!opts.pose_jitter.empty() && opts.pose_jitter.size() != size_t(spec.pose_dim)) {
        throw std::runtime_error("train_mlp: pose_jitter size does not match pose_dim");
    }

    std::vector<size_t> train, val;
    split_indices(source.count, opts.val_fraction, opts.seed, train, val);
    if (train.empty()) throw std::runtime_error("train_mlp: empty training split");

    Model m = init_model(spec, mix_seed(opts.seed, kStreamInit));
    m.label_mean.setZero();
    for (size_t i : train) m.label_mean += source.labels.col(long(i));
    m.label_mean /= double(train.size());
    Eigen::VectorXd var = Eigen::VectorXd::Zero(spec.out_dim);
    for (size_t i : train) {
        const Eigen::VectorXd d = source.labels.col(long(i)) - m.label_mean;
        var += d.cwiseProduct(d);
    }
    var /= double(train.size());
    m.label_std = var.cwiseSqrt();
    for (int k = 0; k < spec.out_dim; ++k)
        if (m.label_std(k) < 1e-12) m.label_std(k) = 1.0;

    Eigen::MatrixXd scored = source.labels;
    scored.colwise() -= m.label_mean;
    scored.array().colwise() /= m.label_std.array();

    // Adam state per parameter tensor.
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    for (size_t l = 0; l < m.W.size(); ++l) {
        mW.push_back(Eigen::MatrixXd::Zero(m.W[l].rows(), m.W[l].cols()));
        vW.push_back(Eigen::MatrixXd::Zero(m.W[l].rows(), m.W[l].cols()));
        mb.push_back(Eigen::VectorXd::Zero(m.b[l].size()));
        vb.push_back(Eigen::VectorXd::Zero(m.b[l].size()));
    }
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    int step = 0;

    if (info) *info = TrainInfo{};
    Eigen::MatrixXd images, pose;
    Gradients g;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        Rng er(mix_seed(mix_seed(opts.seed, kStreamShuffle), uint64_t(epoch)));
        shuffle_indices(train, er);
        double loss_sum = 0.0;
        for (size_t begin = 0; begin < train.size(); begin += size_t(opts.batch_size)) {
            const size_t end = std::min(train.size(), begin + size_t(opts.batch_size));
            fill_batch(spec, source, train, begin, end, opts.augment, opts.seed, epoch,
                       opts.pose_jitter, images, pose);
            Eigen::MatrixXd t(spec.out_dim, long(end - begin));
            for (size_t c = begin; c < end; ++c)
                t.col(long(c - begin)) = scored.col(long(train[c]));
            loss_sum += forward_backward(m, images, pose, t, g) * double(end - begin);

            ++step;
            const double lr = opts.lr * std::pow(opts.lr_decay, (step - 1) / opts.decay_every);
            const double c1 = 1.0 - std::pow(beta1, step);
            const double c2 = 1.0 - std::pow(beta2, step);
            for (size_t l = 0; l < m.W.size(); ++l) {
                mW[l] = beta1 * mW[l] + (1.0 - beta1) * g.dW[l];
                vW[l] = beta2 * vW[l] + (1.0 - beta2) * g.dW[l].cwiseProduct(g.dW[l]);
                m.W[l].array() -=
                    lr * (mW[l].array() / c1) / ((vW[l].array() / c2).sqrt() + eps);
                mb[l] = beta1 * mb[l] + (1.0 - beta1) * g.db[l];
                vb[l] = beta2 * vb[l] + (1.0 - beta2) * g.db[l].cwiseProduct(g.db[l]);
                m.b[l].array() -=
                    lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
            }
        }
        if (info) {
            info->train_loss.push_back(loss_sum / double(train.size()));
            info->val_loss.push_back(eval_loss(m, source, val, scored));
            info->steps = step;
        }
    }
    return m;
}

Model train_tactile(const AlignmentDataset& ds, const TrainOptions& opts, TrainInfo* info) {
    const SampleSource src = dataset_source(ds);
    return train_mlp(trunk_spec(ds.scene, true), src, opts, info);
}

Model train_vision(const InsertionDataset& ds, const TrainOptions& opts, TrainInfo* info) {
    const SampleSource src = dataset_source(ds);
    TrainOptions o = opts;
    // The pose features determine the labels exactly on collected data, so
    // without input noise the image pathway would never be consulted. The
    // default sigmas are per-axis. The approach pose's y is grasp-independent,
    // so drowning the y feature (3mm) forces the regressor to read y off the
    // camera, which locates the slot no matter how the part is held. The x
    // feature keeps only a calibration-scale sigma (0.2mm): the correct x
    // depends on the grasp, which the camera cannot see, so a feature-heavy
    // x estimate is the right one.
    if (o.augment && o.pose_jitter.empty()) o.pose_jitter = {0.02, 0.0002, 0.003};
    return train_mlp(trunk_spec(ds.scene, false), src, o, info);
}

Eigen::VectorXd predict(const Model& m, const Image& img, const Eigen::VectorXd& pose) {
    if (pose.size() != m.spec.pose_dim) {
        throw std::runtime_error("predict: pose feature size does not match the model");
    }
    const Eigen::MatrixXd y = forward(m, flatten(img, m.spec), pose, nullptr);
    return (y.col(0).cwiseProduct(m.label_std)) + m.label_mean;
}

Eigen::VectorXd predict(const Model& m, const Image& img) {
    return predict(m, img, Eigen::VectorXd(0));
}

double mse_loss(const Model& m, const SampleSource& source, const std::vector<size_t>& idx) {
    Eigen::MatrixXd scored = source.labels;
    scored.colwise() -= m.label_mean;
    scored.array().colwise() /= m.label_std.array();
    return eval_loss(m, source, idx, scored);
}

double gradient_check(const MlpSpec& spec, uint64_t seed) {
    validate_spec(spec);
    Model m = init_model(spec, seed);
    Rng rng(mix_seed(seed, kStreamGrad));
    const long batch = 3;
    Eigen::MatrixXd images(spec.image_dim(), batch);
    Eigen::MatrixXd pose(spec.pose_dim, batch);
    Eigen::MatrixXd targets(spec.out_dim, batch);
    // The loss is not differentiable where a ReLU pre-activation is zero,
    // and a central difference straddles the kink whenever one lies within
    // roughly the step size of zero. Redraw the batch until every hidden
    // pre-activation clears a margin far above the step, keeping the
    // result a pure function of (spec, seed).
    const double margin = 1e-3;
    for (int attempt = 0; attempt < 64; ++attempt) {
        for (long c = 0; c < batch; ++c) {
            for (long r = 0; r < images.rows(); ++r) images(r, c) = rng.unit();
            for (long r = 0; r < pose.rows(); ++r) pose(r, c) = rng.normal();
            for (long r = 0; r < targets.rows(); ++r) targets(r, c) = rng.normal();
        }
        if (m.W.size() == 1) break;
        BatchWork work;
        forward(m, images, pose, &work);
        double nearest = std::numeric_limits<double>::infinity();
        for (size_t l = 0; l + 1 < work.zs.size(); ++l) {
            nearest = std::min(nearest, work.zs[l].cwiseAbs().minCoeff());
        }
        if (nearest > margin) break;
    }
    Gradients g;
    forward_backward(m, images, pose, targets, g);

    const double h = 1e-5;
    double worst = 0.0;
    auto probe = [&](double& param, double analytic) {
        const double keep = param;
        param = keep + h;
        Gradients scratch;
        const double up = forward_backward(m, images, pose, targets, scratch);
        param = keep - h;
        const double down = forward_backward(m, images, pose, targets, scratch);
        param = keep;
        const double numeric = (up - down) / (2.0 * h);
        const double rel =
            std::fabs(analytic - numeric) / std::max(1e-8, std::fabs(analytic) + std::fabs(numeric));
        worst = std::max(worst, rel);
    };
    for (size_t l = 0; l < m.W.size(); ++l) {
        for (long r = 0; r < m.W[l].rows(); ++r)
            for (long c = 0; c < m.W[l].cols(); ++c) probe(m.W[l](r, c), g.dW[l](r, c));
        for (long r = 0; r < m.b[l].size(); ++r) probe(m.b[l](r), g.db[l](r));
    }
    return worst;
}

void save_model(const Model& m, const std::string& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["kind"] = "mlp-regressor";
    manifest["image_w"] = m.spec.image_w;
    manifest["image_h"] = m.spec.image_h;
    manifest["pose_dim"] = m.spec.pose_dim;
    manifest["hidden"] = m.spec.hidden;
    manifest["out_dim"] = m.spec.out_dim;
    manifest["label_mean"] = std::vector<double>(m.label_mean.data(),
                                                 m.label_mean.data() + m.label_mean.size());
    manifest["label_std"] = std::vector<double>(m.label_std.data(),
                                                m.label_std.data() + m.label_std.size());
    size_t params = 0;
    for (size_t l = 0; l < m.W.size(); ++l) params += size_t(m.W[l].size() + m.b[l].size());
    manifest["param_count"] = params;
    manifest["weights"] = "weights.bin";

    std::ofstream out(fs::path(dir) / "weights.bin", std::ios::binary);
    if (!out) throw std::runtime_error("save_model: cannot open weights.bin");
    auto put = [&out](double v) {
        const float f = float(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof f);
    };
    for (size_t l = 0; l < m.W.size(); ++l) {
        for (long r = 0; r < m.W[l].rows(); ++r)
            for (long c = 0; c < m.W[l].cols(); ++c) put(m.W[l](r, c));
        for (long r = 0; r < m.b[l].size(); ++r) put(m.b[l](r));
    }
    if (!out) throw std::runtime_error("save_model: write failed");
    out.close();

    std::ofstream mo(fs::path(dir) / "manifest.json", std::ios::binary);
    mo << manifest.dump(2) << "\n";
    if (!mo) throw std::runtime_error("save_model: manifest write failed");
}

Model load_model(const std::string& dir) {
    std::ifstream mi(fs::path(dir) / "manifest.json", std::ios::binary);
    if (!mi) throw std::runtime_error("load_model: cannot open manifest in " + dir);
    json manifest;
    try {
        mi >> manifest;
    } catch (const json::exception& e) {
        throw std::runtime_error("load_model: corrupt manifest: " + std::string(e.what()));
    }
    if (manifest.value("kind", "") != "mlp-regressor") {
        throw std::runtime_error("load_model: not a model directory: " + dir);
    }
    MlpSpec spec;
    spec.image_w = manifest.at("image_w").get<int>();
    spec.image_h = manifest.at("image_h").get<int>();
    spec.pose_dim = manifest.at("pose_dim").get<int>();
    spec.hidden = manifest.at("hidden").get<std::vector<int>>();
    spec.out_dim = manifest.at("out_dim").get<int>();
    validate_spec(spec);

    Model m;
    m.spec = spec;
    const auto mean = manifest.at("label_mean").get<std::vector<double>>();
    const auto stdv = manifest.at("label_std").get<std::vector<double>>();
    if (int(mean.size()) != spec.out_dim || int(stdv.size()) != spec.out_dim) {
        throw std::runtime_error("load_model: label stats do not match out_dim");
    }
    m.label_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), long(mean.size()));
    m.label_std = Eigen::Map<const Eigen::VectorXd>(stdv.data(), long(stdv.size()));

    std::ifstream in(fs::path(dir) / manifest.at("weights").get<std::string>(),
                     std::ios::binary);
    if (!in) throw std::runtime_error("load_model: cannot open weights in " + dir);
    auto get = [&in]() {
        float v;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        if (!in) throw std::runtime_error("load_model: weights.bin truncated");
        return double(v);
    };
    size_t params = 0;
    for (const auto& [rows, cols] : layer_dims(spec)) {
        Eigen::MatrixXd w(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) w(r, c) = get();
        Eigen::VectorXd b(rows);
        for (int r = 0; r < rows; ++r) b(r) = get();
        m.W.push_back(std::move(w));
        m.b.push_back(std::move(b));
        params += size_t(rows) * size_t(cols) + size_t(rows);
    }
    if (params != manifest.at("param_count").get<size_t>()) {
        throw std::runtime_error("load_model: param count mismatch");
    }
    char extra;
    if (in.read(&extra, 1)) throw std::runtime_error("load_model: trailing bytes in weights.bin");
    return m;
}

}  // namespace pegsim
