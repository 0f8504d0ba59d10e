#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmrank/common.hpp"
#include "llmrank/dataset.hpp"
#include "llmrank/embeddings.hpp"
#include "llmrank/features.hpp"
#include "llmrank/ranker.hpp"

namespace llmrank {

struct TrainConfig {
  double lambda = 0.0;
  double lr = 3e-4;
  double weight_decay = 1e-2;
  int epochs = 100;
  int batch_size = 256;
  int patience = 10;
  double clip_norm = 1.0;
  double dropout = 0.1;
  double tau = 0.5;
  std::uint64_t seed = 0;
  std::size_t hidden = 256;

  void validate() const {
    if (!(lambda >= 0.0)) fail("lambda must be >= 0");
    if (!(tau > 0.0)) fail("tau must be > 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0,1)");
    if (!(lr > 0.0)) fail("learning rate must be > 0");
    if (!(weight_decay >= 0.0)) fail("weight decay must be >= 0");
    if (epochs < 1) fail("epochs must be >= 1");
    if (batch_size < 1) fail("batch size must be >= 1");
    if (patience < 0) fail("patience must be >= 0");
    if (!(clip_norm > 0.0)) fail("clip norm must be > 0");
    if (hidden < 1) fail("hidden width must be >= 1");
  }

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"lambda", lambda},         {"lr", lr},         {"weight_decay", weight_decay},
            {"epochs", epochs},         {"batch_size", batch_size}, {"patience", patience},
            {"clip_norm", clip_norm},   {"dropout", dropout}, {"tau", tau},
            {"seed", seed},             {"hidden", hidden}};
  }
};

/// Everything the network sees for one split, aligned by row.
struct RankingInputs {
  std::vector<std::string> ids;
  std::vector<std::string> benchmarks;
  Matrix<double> features;    // n x d_j
  Matrix<double> embeddings;  // n x d_t
  Matrix<double> quality;     // n x m
  Matrix<double> cost;        // n x m

  [[nodiscard]] std::size_t size() const noexcept { return ids.size(); }
  [[nodiscard]] std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
  [[nodiscard]] std::size_t embedding_dim() const noexcept { return static_cast<std::size_t>(embeddings.cols()); }
  [[nodiscard]] std::size_t num_models() const noexcept { return static_cast<std::size_t>(quality.cols()); }
};

inline RankingInputs make_inputs(const Dataset& d, const FeatureMatrix& fm, const EmbeddingStore& store) {
  if (store.dim() == 0) fail("embedding store is empty");
  std::unordered_map<std::string, std::size_t> feature_row;
  for (std::size_t i = 0; i < fm.rows(); ++i) feature_row.emplace(fm.sample_ids[i], i);

  const auto n = static_cast<Eigen::Index>(d.size());
  RankingInputs in;
  in.features.resize(n, static_cast<Eigen::Index>(fm.dim));
  in.embeddings.resize(n, static_cast<Eigen::Index>(store.dim()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& r = d.records[i];
    const auto it = feature_row.find(r.sample_id);
    if (it == feature_row.end()) fail("no feature row for sample_id '", r.sample_id, "'");
    const auto row = fm.row(it->second);
    for (std::size_t k = 0; k < fm.dim; ++k) in.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    const auto emb = store.at(r.sample_id);
    for (std::size_t k = 0; k < store.dim(); ++k)
      in.embeddings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = emb[k];
    in.ids.push_back(r.sample_id);
    in.benchmarks.push_back(r.benchmark);
  }
  in.quality = quality_matrix(d);
  in.cost = cost_matrix(d);
  return in;
}

/// Scores every row of `in` in inference mode. Returns n x m.
template <typename Scalar = double>
Matrix<double> score_all(const RankerParams& p, const RankingInputs& in) {
  if (in.size() == 0) return Matrix<double>(0, static_cast<Eigen::Index>(p.num_models()));
  if constexpr (std::is_same_v<Scalar, double>) {
    return forward_batch(p, in.features, in.embeddings).scores;
  } else {
    const auto ps = p.template cast<Scalar>();
    return forward_batch(ps, Matrix<Scalar>(in.features.cast<Scalar>()), Matrix<Scalar>(in.embeddings.cast<Scalar>()))
        .scores.template cast<double>();
  }
}

/// Argmax with lowest index on exact ties.
template <typename Range>
std::size_t argmax_lowest(const Range& scores) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < static_cast<std::size_t>(scores.size()); ++j)
    if (scores[j] > scores[best]) best = j;
  return best;
}

// ---------------------------------------------------------------------------
// Early stopping
// ---------------------------------------------------------------------------

/// Tracks the best validation loss. Training stops once more than `patience`
/// consecutive epochs pass without a strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when `loss` is a new best.
  bool update(int epoch, double loss) {
    if (loss < best_loss_) {
      best_loss_ = loss;
      best_epoch_ = epoch;
      since_best_ = 0;
      return true;
    }
    ++since_best_;
    return false;
  }

  [[nodiscard]] bool should_stop() const noexcept { return since_best_ > patience_; }
  [[nodiscard]] int best_epoch() const noexcept { return best_epoch_; }
  [[nodiscard]] double best_loss() const noexcept { return best_loss_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  int since_best_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_quality = 0.0;  // mean realized quality of routed validation prompts
  double val_utility = 0.0;  // val_quality - lambda * mean routed cost
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  int stop_epoch = 0;
  bool stopped_early = false;

  [[nodiscard]] std::string to_csv() const {
    std::string out = "epoch,train_loss,val_loss,val_quality,val_utility\n";
    char buf[160];
    for (const auto& e : epochs) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss, e.val_loss, e.val_quality,
                    e.val_utility);
      out += buf;
    }
    return out;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : epochs)
      rows.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_loss", e.val_loss},
                      {"val_quality", e.val_quality},
                      {"val_utility", e.val_utility}});
    return {{"best_epoch", best_epoch}, {"stop_epoch", stop_epoch}, {"stopped_early", stopped_early}, {"epochs", rows}};
  }

  bool operator==(const TrainingLog& o) const { return to_csv() == o.to_csv() && best_epoch == o.best_epoch && stop_epoch == o.stop_epoch; }
};

struct TrainResult {
  RankerParams params;
  TrainingLog log;
};

class TrainingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> gather_rows(const Matrix<Scalar>& src, std::span<const std::size_t> rows) {
  Matrix<Scalar> out(static_cast<Eigen::Index>(rows.size()), src.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = src.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

struct RoutedValue {
  double quality = 0.0;
  double mean_cost = 0.0;
};

inline RoutedValue routed_value(const Matrix<double>& scores, const RankingInputs& in) {
  RoutedValue v;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < scores.cols(); ++j)
      if (scores(i, j) > scores(i, best)) best = j;
    v.quality += in.quality(i, best);
    v.mean_cost += in.cost(i, best);
  }
  const auto n = static_cast<double>(std::max<Eigen::Index>(scores.rows(), 1));
  v.quality /= n;
  v.mean_cost /= n;
  return v;
}

}  // namespace detail

/// Mini-batch AdamW training with per-epoch shuffling, gradient clipping and
/// early stopping on validation loss_total. `Scalar` selects the arithmetic
/// precision; returned parameters are always double.
template <typename Scalar = double>
TrainResult train(const RankingInputs& train_set, const RankingInputs& val_set, const TrainConfig& cfg,
                  std::uint32_t feature_schema_version = FeatureSchema::kVersion, std::uint64_t pool_fingerprint = 0) {
  cfg.validate();
  if (train_set.size() == 0) fail("training set is empty");
  if (val_set.size() == 0) fail("validation set is empty");
  if (train_set.feature_dim() != val_set.feature_dim() || train_set.embedding_dim() != val_set.embedding_dim() ||
      train_set.num_models() != val_set.num_models())
    fail("train and validation inputs have inconsistent dimensions");

  using Mat = Matrix<Scalar>;
  const Mat x_feat = train_set.features.cast<Scalar>();
  const Mat x_text = train_set.embeddings.cast<Scalar>();
  const Mat u_train = targets_from(train_set.quality, train_set.cost, cfg.lambda).u.cast<Scalar>();
  const Mat v_feat = val_set.features.cast<Scalar>();
  const Mat v_text = val_set.embeddings.cast<Scalar>();
  const Mat u_val = targets_from(val_set.quality, val_set.cost, cfg.lambda).u.cast<Scalar>();
  const auto tau = static_cast<Scalar>(cfg.tau);
  const auto clip = static_cast<Scalar>(cfg.clip_norm);

  auto params = init_params<Scalar>(train_set.feature_dim(), train_set.embedding_dim(), cfg.hidden,
                                    train_set.num_models(), mix64(cfg.seed ^ 0x1));
  params.feature_schema_version = feature_schema_version;
  params.pool_fingerprint = pool_fingerprint;
  auto best = params;
  auto adam = AdamState<Scalar>::for_params(params);
  const AdamHyper hyper{cfg.lr, cfg.weight_decay};
  Rng shuffle_rng(mix64(cfg.seed ^ 0x2));
  Rng dropout_rng(mix64(cfg.seed ^ 0x3));

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  EarlyStopping stopper(cfg.patience);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size), ++batch_index) {
      const auto count = std::min(order.size() - start, static_cast<std::size_t>(cfg.batch_size));
      const std::span<const std::size_t> rows(order.data() + start, count);
      const Mat bf = detail::gather_rows(x_feat, rows);
      const Mat bt = detail::gather_rows(x_text, rows);
      const Mat bu = detail::gather_rows(u_train, rows);
      const auto masks = sample_dropout_masks<Scalar>(count, cfg.hidden, cfg.dropout, dropout_rng);
      auto [loss, grad] = loss_and_grad(params, bf, bt, bu, tau, masks);
      if (!std::isfinite(static_cast<double>(loss)))
        throw TrainingError(detail::concat("non-finite training loss at epoch ", epoch, ", batch ", batch_index));
      grad = clip_gradients(std::move(grad), clip);
      adamw_step(params, grad, adam, hyper);
      epoch_loss += static_cast<double>(loss) * static_cast<double>(count);
    }

    const Mat val_scores = forward_batch(params, v_feat, v_text).scores;
    const auto val_loss = static_cast<double>(loss_total(val_scores, u_val, tau));
    if (!std::isfinite(val_loss)) throw TrainingError(detail::concat("non-finite validation loss at epoch ", epoch));
    const auto routed = detail::routed_value(val_scores.template cast<double>(), val_set);

    result.log.epochs.push_back({epoch, epoch_loss / static_cast<double>(train_set.size()), val_loss, routed.quality,
                                 routed.quality - cfg.lambda * routed.mean_cost});
    result.log.stop_epoch = epoch;
    if (stopper.update(epoch, val_loss)) best = params;
    if (stopper.should_stop()) {
      result.log.stopped_early = true;
      break;
    }
  }
  result.log.best_epoch = stopper.best_epoch();
  if constexpr (std::is_same_v<Scalar, double>) {
    result.params = std::move(best);
  } else {
    result.params = best.template cast<double>();
  }
  return result;
}

}  // namespace llmrank
