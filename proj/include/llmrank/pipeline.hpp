#pragma once

#include <optional>

#include "llmrank/common.hpp"
#include "llmrank/dataset.hpp"
#include "llmrank/embeddings.hpp"
#include "llmrank/features.hpp"
#include "llmrank/proxy.hpp"
#include "llmrank/routing.hpp"
#include "llmrank/training.hpp"

namespace llmrank {

struct PipelineOptions {
  // Hash-embedding width, used when `embeddings` is null.
  std::size_t hash_dim = 256;
  const EmbeddingStore* embeddings = nullptr;
  // The proxy is trained on the train split only, and only when it has at
  // least two benchmark categories.
  bool use_proxy = true;
  std::uint32_t proxy_hash_dim = 1024;
  int proxy_epochs = 5;
  const Lexicons* lexicons = nullptr;
};

/// Feature schema, optional proxy, and aligned network inputs for a split.
struct FeatureContext {
  FeatureSchema schema = default_schema();
  std::optional<ProxyModel> proxy;
  const Lexicons* lexicons = &Lexicons::builtin();

  [[nodiscard]] FeatureVector extract(std::string_view prompt) const {
    return extract_features(prompt, schema, proxy ? &*proxy : nullptr, *lexicons);
  }

  [[nodiscard]] FeaturizeResult featurize(const Dataset& d) const {
    return featurize_dataset(d, schema, proxy ? &*proxy : nullptr, *lexicons);
  }
};

inline FeatureContext build_feature_context(const Dataset& train, const PipelineOptions& opts = {}) {
  FeatureContext ctx;
  if (opts.lexicons) ctx.lexicons = opts.lexicons;
  if (opts.use_proxy && category_counts(train).size() >= 2) {
    ctx.proxy = train_proxy(train, opts.proxy_hash_dim, opts.proxy_epochs);
    ctx.schema = default_schema(ctx.proxy->category_names);
  }
  return ctx;
}

inline RankingInputs build_inputs(const Dataset& d, const FeatureContext& ctx, const PipelineOptions& opts = {}) {
  const auto fm = ctx.featurize(d).matrix;
  if (opts.embeddings) return make_inputs(d, fm, *opts.embeddings);
  return make_inputs(d, fm, build_hash_store(d, opts.hash_dim));
}

struct PreparedSplits {
  FeatureContext context;
  RankingInputs train, val, test;
  std::vector<double> feature_means;  // over the train split
  std::uint64_t pool_fingerprint = 0;
};

inline PreparedSplits prepare_splits(const DatasetSplits& splits, const PipelineOptions& opts = {}) {
  PreparedSplits out;
  out.context = build_feature_context(splits.train, opts);
  out.train = build_inputs(splits.train, out.context, opts);
  out.val = build_inputs(splits.val, out.context, opts);
  out.test = build_inputs(splits.test, out.context, opts);
  out.feature_means = column_means(out.train.features);
  out.pool_fingerprint = splits.train.pool.fingerprint();
  return out;
}

template <typename Scalar = double>
TrainResult train_prepared(const PreparedSplits& data, const TrainConfig& cfg) {
  return train<Scalar>(data.train, data.val, cfg, data.context.schema.version(), data.pool_fingerprint);
}

}  // namespace llmrank
