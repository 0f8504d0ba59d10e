#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmrank/common.hpp"
#include "llmrank/dataset.hpp"
#include "llmrank/features.hpp"
#include "llmrank/ranker.hpp"
#include "llmrank/training.hpp"

namespace llmrank {

struct RouterDecision {
  std::string sample_id;
  std::size_t chosen_index = 0;
  std::vector<double> scores;
  double realized_quality = 0.0;
  double realized_cost = 0.0;
};

/// Scores one prompt in inference mode and picks the highest-scoring model.
inline RouterDecision route(const RankerParams& p, std::span<const double> features, std::span<const float> embedding) {
  if (features.size() != p.feature_dim()) fail("route: feature dim ", features.size(), " != checkpoint ", p.feature_dim());
  if (embedding.size() != p.embedding_dim())
    fail("route: embedding dim ", embedding.size(), " != checkpoint ", p.embedding_dim());
  RouterDecision d;
  d.scores = forward(p, features, embedding);
  d.chosen_index = argmax_lowest(d.scores);
  return d;
}

/// Cheapest among the models with maximal quality; lowest index on residual ties.
inline std::size_t oracle_route(const PromptRecord& r) {
  const double best_q = r.max_quality();
  std::size_t best = r.quality.size();
  for (std::size_t j = 0; j < r.quality.size(); ++j) {
    if (r.quality[j] != best_q) continue;
    if (best == r.quality.size() || r.cost[j] < r.cost[best]) best = j;
  }
  return best;
}

namespace detail {

inline std::vector<RouterDecision> decisions_from(const Dataset& d, const std::vector<std::size_t>& choice) {
  std::vector<RouterDecision> out;
  out.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& r = d.records[i];
    out.push_back({r.sample_id, choice[i], {}, r.quality[choice[i]], r.cost[choice[i]]});
  }
  return out;
}

}  // namespace detail

inline std::vector<RouterDecision> fixed_model_decisions(const Dataset& d, std::size_t model) {
  if (model >= d.pool.size()) fail("model index ", model, " outside pool of ", d.pool.size());
  return detail::decisions_from(d, std::vector<std::size_t>(d.size(), model));
}

inline std::vector<RouterDecision> oracle_decisions(const Dataset& d) {
  std::vector<std::size_t> choice;
  choice.reserve(d.size());
  for (const auto& r : d.records) choice.push_back(oracle_route(r));
  return detail::decisions_from(d, choice);
}

/// Model with the highest mean quality on `d`; lowest index on ties.
inline std::size_t best_single_model(const Dataset& d) {
  std::vector<double> sums(d.pool.size(), 0.0);
  for (const auto& r : d.records)
    for (std::size_t j = 0; j < sums.size(); ++j) sums[j] += r.quality[j];
  return argmax_lowest(sums);
}

/// Model with the lowest total cost on `d`; lowest index on ties.
inline std::size_t cheapest_model(const Dataset& d) {
  std::vector<double> sums(d.pool.size(), 0.0);
  for (const auto& r : d.records)
    for (std::size_t j = 0; j < sums.size(); ++j) sums[j] += r.cost[j];
  return static_cast<std::size_t>(std::min_element(sums.begin(), sums.end()) - sums.begin());
}

inline std::vector<RouterDecision> baseline_best_single(const Dataset& d) {
  return fixed_model_decisions(d, best_single_model(d));
}

inline std::vector<RouterDecision> baseline_cheapest(const Dataset& d) { return fixed_model_decisions(d, cheapest_model(d)); }

inline std::vector<RouterDecision> baseline_random(const Dataset& d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> choice;
  choice.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) choice.push_back(rng.below(d.pool.size()));
  return detail::decisions_from(d, choice);
}

/// Routes every row of `in` with the trained ranker.
inline std::vector<RouterDecision> route_inputs(const RankerParams& p, const RankingInputs& in) {
  const auto scores = score_all(p, in);
  std::vector<RouterDecision> out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    RouterDecision d;
    d.sample_id = in.ids[i];
    const auto row = static_cast<Eigen::Index>(i);
    d.scores.assign(scores.cols(), 0.0);
    for (Eigen::Index j = 0; j < scores.cols(); ++j) d.scores[static_cast<std::size_t>(j)] = scores(row, j);
    d.chosen_index = argmax_lowest(d.scores);
    d.realized_quality = in.quality(row, static_cast<Eigen::Index>(d.chosen_index));
    d.realized_cost = in.cost(row, static_cast<Eigen::Index>(d.chosen_index));
    out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct ComparativeMetrics {
  double efficiency = 0.0;
  double cost_ratio = 0.0;
  double quality_gap = 0.0;
};

inline ComparativeMetrics comparative_metrics(double router_quality, double router_cost, double oracle_quality,
                                              double oracle_cost) {
  ComparativeMetrics m;
  m.efficiency = oracle_quality > 0.0 ? router_quality / oracle_quality : (router_quality == 0.0 ? 1.0 : 0.0);
  m.cost_ratio = oracle_cost > 0.0 ? router_cost / oracle_cost
                                   : (router_cost == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
  m.quality_gap = oracle_quality - router_quality;
  return m;
}

struct EvalReport {
  std::string policy;
  double lambda = 0.0;
  std::size_t count = 0;
  double quality = 0.0;     // Q_R, mean realized quality
  double mean_cost = 0.0;   // C_R, mean realized cost
  double total_cost = 0.0;
  double utility = 0.0;     // U_R = Q_R - lambda * C_R
  double efficiency = 0.0;  // Q_R / Q_oracle
  double cost_ratio = 0.0;  // total cost / oracle total cost
  double quality_gap = 0.0; // Q_oracle - Q_R
  double oracle_quality = 0.0;
  double oracle_total_cost = 0.0;
  std::map<std::string, double> per_benchmark;
  std::map<std::string, std::size_t> per_benchmark_count;
  std::vector<std::pair<std::string, double>> routing_distribution;  // pool order

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json dist = nlohmann::json::object();
    for (const auto& [name, frac] : routing_distribution) dist[name] = frac;
    return {{"policy", policy},
            {"lambda", lambda},
            {"count", count},
            {"quality", quality},
            {"mean_cost", mean_cost},
            {"total_cost", total_cost},
            {"utility", utility},
            {"efficiency", efficiency},
            {"cost_ratio", cost_ratio},
            {"quality_gap", quality_gap},
            {"oracle_quality", oracle_quality},
            {"oracle_total_cost", oracle_total_cost},
            {"per_benchmark", per_benchmark},
            {"per_benchmark_count", per_benchmark_count},
            {"routing_distribution", dist}};
  }
};

/// Aggregates `decisions` over `d`. Realized quality and cost are read from
/// the dataset, so only sample_id and chosen_index of each decision matter.
inline EvalReport evaluate(const std::vector<RouterDecision>& decisions, const Dataset& d, double lambda,
                           std::string policy = "router") {
  if (d.empty()) fail("evaluate: empty dataset");
  if (decisions.size() != d.size())
    fail("evaluate: ", decisions.size(), " decisions for ", d.size(), " records; each record needs exactly one");
  std::unordered_map<std::string, std::size_t> chosen;
  for (const auto& dec : decisions) {
    if (dec.chosen_index >= d.pool.size()) fail("evaluate: model index ", dec.chosen_index, " outside the pool");
    if (!chosen.emplace(dec.sample_id, dec.chosen_index).second) fail("evaluate: duplicate decision for '", dec.sample_id, "'");
  }

  EvalReport rep;
  rep.policy = std::move(policy);
  rep.lambda = lambda;
  rep.count = d.size();
  std::vector<std::size_t> picks(d.pool.size(), 0);
  std::map<std::string, double> bench_sum;
  for (const auto& r : d.records) {
    const auto it = chosen.find(r.sample_id);
    if (it == chosen.end()) fail("evaluate: no decision for '", r.sample_id, "'");
    const auto j = it->second;
    rep.quality += r.quality[j];
    rep.total_cost += r.cost[j];
    bench_sum[r.benchmark] += r.quality[j];
    ++rep.per_benchmark_count[r.benchmark];
    ++picks[j];
    const auto o = oracle_route(r);
    rep.oracle_quality += r.quality[o];
    rep.oracle_total_cost += r.cost[o];
  }
  const auto n = static_cast<double>(d.size());
  rep.quality /= n;
  rep.mean_cost = rep.total_cost / n;
  rep.utility = rep.quality - lambda * rep.mean_cost;
  rep.oracle_quality /= n;
  const auto cm = comparative_metrics(rep.quality, rep.total_cost, rep.oracle_quality, rep.oracle_total_cost);
  rep.efficiency = cm.efficiency;
  rep.cost_ratio = cm.cost_ratio;
  rep.quality_gap = cm.quality_gap;
  for (const auto& [b, s] : bench_sum) rep.per_benchmark[b] = s / static_cast<double>(rep.per_benchmark_count[b]);
  for (std::size_t j = 0; j < d.pool.size(); ++j)
    rep.routing_distribution.emplace_back(d.pool.name(j), static_cast<double>(picks[j]) / n);
  return rep;
}

/// Aligned text table with one row per report: Method, Quality, Cost ($),
/// Efficiency, Cost Ratio, Quality Gap.
inline std::string format_report_table(const std::vector<EvalReport>& reports) {
  std::size_t width = std::string_view("Method").size();
  for (const auto& r : reports) width = std::max(width, r.policy.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %8s  %10s  %10s  %10s  %11s\n", static_cast<int>(width), "Method", "Quality",
                "Cost ($)", "Efficiency", "Cost Ratio", "Quality Gap");
  out += buf;
  for (const auto& r : reports) {
    char gap[32];
    if (r.policy == "oracle") std::snprintf(gap, sizeof gap, "--");
    else std::snprintf(gap, sizeof gap, "%.1f%%", 100.0 * r.quality_gap);
    char ratio[32];
    std::snprintf(ratio, sizeof ratio, "%.2fx", r.cost_ratio);
    char eff[32];
    std::snprintf(eff, sizeof eff, "%.1f%%", 100.0 * r.efficiency);
    std::snprintf(buf, sizeof buf, "%-*s  %8.3f  %10.3f  %10s  %10s  %11s\n", static_cast<int>(width), r.policy.c_str(),
                  r.quality, r.total_cost, eff, ratio, gap);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Attribution
// ---------------------------------------------------------------------------

struct Attribution {
  std::string name;
  double score = 0.0;
};

/// Leave-one-group-out attribution for the routed model. For each feature
/// group, that group's entries are replaced by `feature_means` and the drop in
/// the chosen model's score is recorded. The text branch is reported as a
/// single "text" entry obtained by zeroing the embedding. Sorted descending.
inline std::vector<Attribution> explain_route(const RankerParams& p, std::span<const double> features,
                                              std::span<const float> embedding, const FeatureSchema& schema,
                                              std::span<const double> feature_means) {
  if (schema.version() != p.feature_schema_version)
    fail("explain_route: schema version ", schema.version(), " != checkpoint ", p.feature_schema_version);
  if (schema.dim() != p.feature_dim()) fail("explain_route: schema dim ", schema.dim(), " != checkpoint ", p.feature_dim());
  if (feature_means.size() != schema.dim()) fail("explain_route: feature means have the wrong dimension");

  const auto base = route(p, features, embedding);
  const double chosen = base.scores[base.chosen_index];
  std::vector<Attribution> out;
  std::vector<double> x(features.begin(), features.end());
  for (auto g : kAllFeatureGroups) {
    const auto idx = schema.group_indices(g);
    if (idx.empty()) continue;
    for (auto k : idx) x[k] = feature_means[k];
    const auto s = forward(p, std::span<const double>(x), embedding);
    out.push_back({std::string(group_name(g)), chosen - s[base.chosen_index]});
    for (auto k : idx) x[k] = features[k];
  }
  const std::vector<float> zero(embedding.size(), 0.0f);
  const auto s = forward(p, features, std::span<const float>(zero));
  out.push_back({"text", chosen - s[base.chosen_index]});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  return out;
}

inline std::vector<double> column_means(const Matrix<double>& m) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()), 0.0);
  if (m.rows() == 0) return out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(j)] = m.col(j).mean();
  return out;
}

}  // namespace llmrank
