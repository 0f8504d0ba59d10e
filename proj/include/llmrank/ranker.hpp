#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "llmrank/common.hpp"
#include "llmrank/dataset.hpp"

namespace llmrank {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr std::size_t kNumTensors = 12;

inline constexpr std::array<std::string_view, kNumTensors> kTensorNames = {
    "W1_feat", "b1_feat", "W2_feat", "b2_feat", "W1_text", "b1_text",
    "W2_text", "b2_text", "W1_fuse", "b1_fuse", "W2_fuse", "b2_fuse",
};

/// Weights of the two input branches and the fusion head. Biases are stored
/// as single-column matrices so every tensor shares one type. The same struct
/// carries gradients and optimizer moments.
template <typename Scalar>
struct RankerParamsT {
  using Mat = Matrix<Scalar>;

  Mat w1_feat, b1_feat, w2_feat, b2_feat;
  Mat w1_text, b1_text, w2_text, b2_text;
  Mat w1_fuse, b1_fuse, w2_fuse, b2_fuse;

  std::uint32_t feature_schema_version = 1;
  std::uint64_t pool_fingerprint = 0;

  static RankerParamsT zeros(std::size_t feature_dim, std::size_t embedding_dim, std::size_t hidden,
                             std::size_t models) {
    const auto dj = static_cast<Eigen::Index>(feature_dim);
    const auto dt = static_cast<Eigen::Index>(embedding_dim);
    const auto h = static_cast<Eigen::Index>(hidden);
    const auto m = static_cast<Eigen::Index>(models);
    RankerParamsT p;
    p.w1_feat = Mat::Zero(h, dj);
    p.b1_feat = Mat::Zero(h, 1);
    p.w2_feat = Mat::Zero(h, h);
    p.b2_feat = Mat::Zero(h, 1);
    p.w1_text = Mat::Zero(h, dt);
    p.b1_text = Mat::Zero(h, 1);
    p.w2_text = Mat::Zero(h, h);
    p.b2_text = Mat::Zero(h, 1);
    p.w1_fuse = Mat::Zero(h, 2 * h);
    p.b1_fuse = Mat::Zero(h, 1);
    p.w2_fuse = Mat::Zero(m, h);
    p.b2_fuse = Mat::Zero(m, 1);
    return p;
  }

  // Same shapes and metadata, all values zero.
  [[nodiscard]] RankerParamsT zeros_like() const {
    RankerParamsT p = zeros(feature_dim(), embedding_dim(), hidden(), num_models());
    p.feature_schema_version = feature_schema_version;
    p.pool_fingerprint = pool_fingerprint;
    return p;
  }

  [[nodiscard]] std::size_t hidden() const noexcept { return static_cast<std::size_t>(w1_feat.rows()); }
  [[nodiscard]] std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(w1_feat.cols()); }
  [[nodiscard]] std::size_t embedding_dim() const noexcept { return static_cast<std::size_t>(w1_text.cols()); }
  [[nodiscard]] std::size_t num_models() const noexcept { return static_cast<std::size_t>(w2_fuse.rows()); }

  [[nodiscard]] std::array<Mat*, kNumTensors> tensors() {
    return {&w1_feat, &b1_feat, &w2_feat, &b2_feat, &w1_text, &b1_text,
            &w2_text, &b2_text, &w1_fuse, &b1_fuse, &w2_fuse, &b2_fuse};
  }
  [[nodiscard]] std::array<const Mat*, kNumTensors> tensors() const {
    return {&w1_feat, &b1_feat, &w2_feat, &b2_feat, &w1_text, &b1_text,
            &w2_text, &b2_text, &w1_fuse, &b1_fuse, &w2_fuse, &b2_fuse};
  }

  // Expected (rows, cols) of every tensor given the recorded dimensions.
  [[nodiscard]] std::array<std::pair<Eigen::Index, Eigen::Index>, kNumTensors> expected_shapes() const {
    const auto dj = w1_feat.cols(), dt = w1_text.cols(), h = w1_feat.rows(), m = w2_fuse.rows();
    return {{{h, dj}, {h, 1}, {h, h}, {h, 1}, {h, dt}, {h, 1}, {h, h}, {h, 1}, {h, 2 * h}, {h, 1}, {m, h}, {m, 1}}};
  }

  void validate() const {
    const auto shapes = expected_shapes();
    const auto ts = tensors();
    for (std::size_t k = 0; k < kNumTensors; ++k) {
      if (ts[k]->rows() != shapes[k].first || ts[k]->cols() != shapes[k].second)
        fail("tensor ", kTensorNames[k], " has shape ", ts[k]->rows(), "x", ts[k]->cols(), ", expected ",
             shapes[k].first, "x", shapes[k].second);
      if (!ts[k]->allFinite()) fail("tensor ", kTensorNames[k], " contains non-finite values");
    }
    if (num_models() < 2) fail("ranker needs at least 2 output models");
  }

  template <typename Other>
  [[nodiscard]] RankerParamsT<Other> cast() const {
    RankerParamsT<Other> out;
    auto dst = out.tensors();
    const auto src = tensors();
    for (std::size_t k = 0; k < kNumTensors; ++k) *dst[k] = src[k]->template cast<Other>();
    out.feature_schema_version = feature_schema_version;
    out.pool_fingerprint = pool_fingerprint;
    return out;
  }
};

using RankerParams = RankerParamsT<double>;

/// Fan-in scaled uniform initialization, U(-sqrt(6/fan_in), sqrt(6/fan_in)),
/// for weights; biases start at zero. Values are drawn in tensor order,
/// row-major within each tensor.
template <typename Scalar>
RankerParamsT<Scalar> init_params(std::size_t feature_dim, std::size_t embedding_dim, std::size_t hidden,
                                  std::size_t models, std::uint64_t seed) {
  if (feature_dim == 0 || embedding_dim == 0 || hidden == 0) fail("ranker dimensions must be positive");
  if (models < 2) fail("ranker needs at least 2 models");
  auto p = RankerParamsT<Scalar>::zeros(feature_dim, embedding_dim, hidden, models);
  Rng rng(seed);
  auto ts = p.tensors();
  for (std::size_t k = 0; k < kNumTensors; k += 2) {
    auto& w = *ts[k];
    const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Forward pass. Batches are row-major in the statistical sense: one sample
// per row.
// ---------------------------------------------------------------------------

/// Inverted-dropout multipliers for the three dropout sites: each entry is 0
/// or 1/(1-rate). Empty matrices mean "no dropout".
template <typename Scalar>
struct DropoutMasks {
  Matrix<Scalar> feat, text, fuse;  // batch x hidden each

  [[nodiscard]] bool empty() const noexcept { return feat.size() == 0; }
};

template <typename Scalar>
DropoutMasks<Scalar> sample_dropout_masks(std::size_t batch, std::size_t hidden, double rate, Rng& rng) {
  DropoutMasks<Scalar> m;
  if (rate <= 0.0) return m;
  if (rate >= 1.0) fail("dropout rate must be in [0,1), got ", rate);
  const auto keep_scale = static_cast<Scalar>(1.0 / (1.0 - rate));
  const auto b = static_cast<Eigen::Index>(batch), h = static_cast<Eigen::Index>(hidden);
  for (Matrix<Scalar>* mask : {&m.feat, &m.text, &m.fuse}) {
    mask->resize(b, h);
    for (Eigen::Index i = 0; i < b; ++i)
      for (Eigen::Index j = 0; j < h; ++j) (*mask)(i, j) = rng.bernoulli(1.0 - rate) ? keep_scale : Scalar(0);
  }
  return m;
}

/// Intermediate activations kept for the backward pass.
template <typename Scalar>
struct ForwardCache {
  using Mat = Matrix<Scalar>;
  Mat pre_feat, drop_feat;  // pre-activation and post-dropout hidden of the feature branch
  Mat pre_text, drop_text;
  Mat concat;
  Mat pre_fuse, drop_fuse;
  Mat scores;  // batch x models
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> affine(const Matrix<Scalar>& x, const Matrix<Scalar>& w, const Matrix<Scalar>& b) {
  Matrix<Scalar> out = x * w.transpose();
  out.rowwise() += b.col(0).transpose();
  return out;
}

template <typename Scalar>
Matrix<Scalar> relu_dropout(const Matrix<Scalar>& pre, const Matrix<Scalar>& mask) {
  Matrix<Scalar> h = pre.cwiseMax(Scalar(0));
  if (mask.size() != 0) h = h.cwiseProduct(mask);
  return h;
}

}  // namespace detail

template <typename Scalar>
ForwardCache<Scalar> forward_batch(const RankerParamsT<Scalar>& p, const Matrix<Scalar>& features,
                                   const Matrix<Scalar>& embeddings, const DropoutMasks<Scalar>& masks = {}) {
  if (static_cast<std::size_t>(features.cols()) != p.feature_dim())
    fail("feature dim ", features.cols(), " != ranker feature dim ", p.feature_dim());
  if (static_cast<std::size_t>(embeddings.cols()) != p.embedding_dim())
    fail("embedding dim ", embeddings.cols(), " != ranker embedding dim ", p.embedding_dim());
  if (features.rows() != embeddings.rows()) fail("feature and embedding batch sizes differ");
  if (!masks.empty() && (masks.feat.rows() != features.rows() ||
                         static_cast<std::size_t>(masks.feat.cols()) != p.hidden()))
    fail("dropout mask shape does not match the batch");

  using detail::affine;
  using detail::relu_dropout;
  ForwardCache<Scalar> c;
  const auto h = static_cast<Eigen::Index>(p.hidden());
  c.pre_feat = affine(features, p.w1_feat, p.b1_feat);
  c.drop_feat = relu_dropout(c.pre_feat, masks.feat);
  c.pre_text = affine(embeddings, p.w1_text, p.b1_text);
  c.drop_text = relu_dropout(c.pre_text, masks.text);
  c.concat.resize(features.rows(), 2 * h);
  c.concat.leftCols(h) = affine(c.drop_feat, p.w2_feat, p.b2_feat);
  c.concat.rightCols(h) = affine(c.drop_text, p.w2_text, p.b2_text);
  c.pre_fuse = affine(c.concat, p.w1_fuse, p.b1_fuse);
  c.drop_fuse = relu_dropout(c.pre_fuse, masks.fuse);
  c.scores = affine(c.drop_fuse, p.w2_fuse, p.b2_fuse);
  return c;
}

/// Scores one sample. With `train_mode` set, dropout masks at `dropout_rate`
/// are drawn from `rng`; otherwise the pass is deterministic.
template <typename Scalar>
std::vector<Scalar> forward(const RankerParamsT<Scalar>& p, std::span<const double> features,
                            std::span<const float> embedding, bool train_mode = false, double dropout_rate = 0.0,
                            Rng* rng = nullptr) {
  Matrix<Scalar> xf(1, static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) xf(0, static_cast<Eigen::Index>(i)) = static_cast<Scalar>(features[i]);
  Matrix<Scalar> xt(1, static_cast<Eigen::Index>(embedding.size()));
  for (std::size_t i = 0; i < embedding.size(); ++i) xt(0, static_cast<Eigen::Index>(i)) = static_cast<Scalar>(embedding[i]);
  DropoutMasks<Scalar> masks;
  if (train_mode && dropout_rate > 0.0) {
    if (!rng) fail("forward: train_mode with dropout requires a PRNG");
    masks = sample_dropout_masks<Scalar>(1, p.hidden(), dropout_rate, *rng);
  }
  const auto c = forward_batch(p, xf, xt, masks);
  return {c.scores.data(), c.scores.data() + c.scores.size()};
}

// ---------------------------------------------------------------------------
// Losses. `scores` and `targets` are N x m.
// ---------------------------------------------------------------------------

namespace detail {

template <typename Scalar>
void check_loss_shapes(const Matrix<Scalar>& scores, const Matrix<Scalar>& targets) {
  if (scores.rows() == 0 || scores.cols() == 0) fail("loss on an empty batch");
  if (scores.rows() != targets.rows() || scores.cols() != targets.cols())
    fail("score shape ", scores.rows(), "x", scores.cols(), " != target shape ", targets.rows(), "x", targets.cols());
}

// Row-wise log-softmax of x / tau, stabilized by the row max.
template <typename Scalar>
Matrix<Scalar> log_softmax_rows(const Matrix<Scalar>& x, Scalar tau) {
  Matrix<Scalar> z = x / tau;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const Scalar mx = z.row(i).maxCoeff();
    const Scalar lse = mx + std::log((z.row(i).array() - mx).exp().sum());
    z.row(i).array() -= lse;
  }
  return z;
}

}  // namespace detail

template <typename Scalar>
Scalar loss_mse(const Matrix<Scalar>& scores, const Matrix<Scalar>& targets) {
  detail::check_loss_shapes(scores, targets);
  return (scores - targets).squaredNorm() / static_cast<Scalar>(scores.rows() * scores.cols());
}

/// Mean over rows of KL(softmax(targets/tau) || softmax(scores/tau)).
template <typename Scalar>
Scalar loss_listwise(const Matrix<Scalar>& scores, const Matrix<Scalar>& targets, Scalar tau) {
  detail::check_loss_shapes(scores, targets);
  if (!(tau > 0)) fail("listwise temperature must be > 0, got ", tau);
  const auto log_p = detail::log_softmax_rows(targets, tau);
  const auto log_q = detail::log_softmax_rows(scores, tau);
  Scalar total = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      const Scalar p = std::exp(log_p(i, j));
      if (p > 0) total += p * (log_p(i, j) - log_q(i, j));
    }
  return total / static_cast<Scalar>(scores.rows());
}

template <typename Scalar>
Scalar loss_total(const Matrix<Scalar>& scores, const Matrix<Scalar>& targets, Scalar tau) {
  return loss_mse(scores, targets) + loss_listwise(scores, targets, tau);
}

/// d loss_total / d scores.
template <typename Scalar>
Matrix<Scalar> loss_total_grad(const Matrix<Scalar>& scores, const Matrix<Scalar>& targets, Scalar tau) {
  detail::check_loss_shapes(scores, targets);
  const auto n = static_cast<Scalar>(scores.rows());
  const auto nm = static_cast<Scalar>(scores.rows() * scores.cols());
  Matrix<Scalar> g = (scores - targets) * (Scalar(2) / nm);
  const Matrix<Scalar> p = detail::log_softmax_rows(targets, tau).array().exp().matrix();
  const Matrix<Scalar> q = detail::log_softmax_rows(scores, tau).array().exp().matrix();
  g += (q - p) / (tau * n);
  return g;
}

// ---------------------------------------------------------------------------
// Backward pass
// ---------------------------------------------------------------------------

template <typename Scalar>
RankerParamsT<Scalar> backward(const RankerParamsT<Scalar>& p, const Matrix<Scalar>& features,
                               const Matrix<Scalar>& embeddings, const ForwardCache<Scalar>& c,
                               const DropoutMasks<Scalar>& masks, const Matrix<Scalar>& d_scores) {
  using Mat = Matrix<Scalar>;
  const auto h = static_cast<Eigen::Index>(p.hidden());
  RankerParamsT<Scalar> g;
  g.feature_schema_version = p.feature_schema_version;
  g.pool_fingerprint = p.pool_fingerprint;

  // Gradient through ReLU and the (optional) dropout multiplier.
  const auto through = [](const Mat& d_out, const Mat& pre, const Mat& mask) {
    Mat d = d_out;
    if (mask.size() != 0) d = d.cwiseProduct(mask);
    return Mat(d.array() * (pre.array() > Scalar(0)).template cast<Scalar>());
  };

  g.w2_fuse = d_scores.transpose() * c.drop_fuse;
  g.b2_fuse = d_scores.colwise().sum().transpose();
  const Mat d_pre_fuse = through(d_scores * p.w2_fuse, c.pre_fuse, masks.fuse);
  g.w1_fuse = d_pre_fuse.transpose() * c.concat;
  g.b1_fuse = d_pre_fuse.colwise().sum().transpose();
  const Mat d_concat = d_pre_fuse * p.w1_fuse;

  const Mat d_zf = d_concat.leftCols(h);
  g.w2_feat = d_zf.transpose() * c.drop_feat;
  g.b2_feat = d_zf.colwise().sum().transpose();
  const Mat d_pre_feat = through(d_zf * p.w2_feat, c.pre_feat, masks.feat);
  g.w1_feat = d_pre_feat.transpose() * features;
  g.b1_feat = d_pre_feat.colwise().sum().transpose();

  const Mat d_zt = d_concat.rightCols(h);
  g.w2_text = d_zt.transpose() * c.drop_text;
  g.b2_text = d_zt.colwise().sum().transpose();
  const Mat d_pre_text = through(d_zt * p.w2_text, c.pre_text, masks.text);
  g.w1_text = d_pre_text.transpose() * embeddings;
  g.b1_text = d_pre_text.colwise().sum().transpose();
  return g;
}

/// Loss and gradients for one batch in a single call.
template <typename Scalar>
struct LossAndGrad {
  Scalar loss;
  RankerParamsT<Scalar> grad;
};

template <typename Scalar>
LossAndGrad<Scalar> loss_and_grad(const RankerParamsT<Scalar>& p, const Matrix<Scalar>& features,
                                  const Matrix<Scalar>& embeddings, const Matrix<Scalar>& targets, Scalar tau,
                                  const DropoutMasks<Scalar>& masks = {}) {
  const auto c = forward_batch(p, features, embeddings, masks);
  const Scalar loss = loss_total(c.scores, targets, tau);
  return {loss, backward(p, features, embeddings, c, masks, loss_total_grad(c.scores, targets, tau))};
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

template <typename Scalar>
Scalar global_norm(const RankerParamsT<Scalar>& g) {
  Scalar sq = 0;
  for (const auto* t : g.tensors()) sq += t->squaredNorm();
  return std::sqrt(sq);
}

/// Rescales all gradients together when their global L2 norm exceeds max_norm.
template <typename Scalar>
RankerParamsT<Scalar> clip_gradients(RankerParamsT<Scalar> g, Scalar max_norm = Scalar(1)) {
  const Scalar norm = global_norm(g);
  if (norm > max_norm) {
    const Scalar scale = max_norm / norm;
    for (auto* t : g.tensors()) *t *= scale;
  }
  return g;
}

template <typename Scalar>
struct AdamState {
  RankerParamsT<Scalar> first;
  RankerParamsT<Scalar> second;
  std::uint64_t step = 0;

  static AdamState for_params(const RankerParamsT<Scalar>& p) { return {p.zeros_like(), p.zeros_like(), 0}; }
};

struct AdamHyper {
  double lr = 3e-4;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// AdamW: the decay term multiplies the parameters directly and never enters
/// the moment estimates.
template <typename Scalar>
void adamw_step(RankerParamsT<Scalar>& p, const RankerParamsT<Scalar>& g, AdamState<Scalar>& state,
                const AdamHyper& hp = {}) {
  if (state.first.num_models() == 0) state = AdamState<Scalar>::for_params(p);
  ++state.step;
  const double t = static_cast<double>(state.step);
  const auto b1 = static_cast<Scalar>(hp.beta1), b2 = static_cast<Scalar>(hp.beta2);
  const auto bc1 = static_cast<Scalar>(1.0 - std::pow(hp.beta1, t));
  const auto bc2 = static_cast<Scalar>(1.0 - std::pow(hp.beta2, t));
  const auto lr = static_cast<Scalar>(hp.lr), eps = static_cast<Scalar>(hp.eps);
  const auto decay = static_cast<Scalar>(1.0 - hp.lr * hp.weight_decay);

  auto ps = p.tensors();
  const auto gs = g.tensors();
  auto ms = state.first.tensors();
  auto vs = state.second.tensors();
  for (std::size_t k = 0; k < kNumTensors; ++k) {
    auto& m = *ms[k];
    auto& v = *vs[k];
    const auto& gk = *gs[k];
    m = b1 * m + (Scalar(1) - b1) * gk;
    v.array() = b2 * v.array() + (Scalar(1) - b2) * gk.array().square();
    *ps[k] *= decay;
    ps[k]->array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  }
}

// ---------------------------------------------------------------------------
// Targets
// ---------------------------------------------------------------------------

/// Cost-adjusted utilities u_ij = quality_ij - lambda * cost_ij, N x m.
struct UtilityTargets {
  Matrix<double> u;
};

inline Matrix<double> quality_matrix(const Dataset& d) {
  Matrix<double> q(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.pool.size()));
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.pool.size(); ++j)
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d.records[i].quality.at(j);
  return q;
}

inline Matrix<double> cost_matrix(const Dataset& d) {
  Matrix<double> c(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.pool.size()));
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.pool.size(); ++j)
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d.records[i].cost.at(j);
  return c;
}

inline UtilityTargets targets_from(const Matrix<double>& quality, const Matrix<double>& cost, double lambda) {
  if (!(lambda >= 0.0)) fail("lambda must be >= 0, got ", lambda);
  return {quality - lambda * cost};
}

inline UtilityTargets compute_targets(const Dataset& d, double lambda) {
  return targets_from(quality_matrix(d), cost_matrix(d), lambda);
}

}  // namespace llmrank
