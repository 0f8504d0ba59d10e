#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmrank/pipeline.hpp"
#include "llmrank/routing.hpp"
#include "llmrank/training.hpp"

namespace llmrank {

inline const std::vector<double>& default_lambdas() {
  static const std::vector<double> l = {0.0, 1e3, 1e5};
  return l;
}

struct FrontierRow {
  std::string policy;  // "router", "oracle", "best_single", "cheapest"
  EvalReport report;
  TrainingLog log;     // empty for non-router rows
};

/// Router rows in lambda order followed by the oracle, best-single and
/// cheapest rows. Baseline rows are evaluated at lambda = 0.
struct FrontierTable {
  std::vector<FrontierRow> rows;

  [[nodiscard]] std::vector<const FrontierRow*> routers() const {
    std::vector<const FrontierRow*> out;
    for (const auto& r : rows)
      if (r.policy == "router") out.push_back(&r);
    return out;
  }

  [[nodiscard]] std::string to_csv() const {
    std::string out = "lambda,quality,mean_cost,total_cost,utility,efficiency,cost_ratio\n";
    char buf[256];
    for (const auto& row : rows) {
      const auto& r = row.report;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.lambda, r.quality, r.mean_cost,
                    r.total_cost, r.utility, r.efficiency, r.cost_ratio);
      out += buf;
    }
    return out;
  }

  [[nodiscard]] std::string to_table() const {
    std::vector<EvalReport> reports;
    for (const auto& row : rows) reports.push_back(row.report);
    return format_report_table(reports);
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) arr.push_back(row.report.to_json());
    return arr;
  }
};

inline std::string lambda_label(double lambda) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "router(lambda=%g)", lambda);
  return buf;
}

/// Trains one router per lambda with otherwise identical config, evaluates
/// each on the test split, and appends oracle and single-model baselines.
template <typename Scalar = double>
FrontierTable sweep_lambda(const PreparedSplits& data, const Dataset& test, const std::vector<double>& lambdas,
                           const TrainConfig& base) {
  if (lambdas.empty()) fail("sweep: empty lambda list");
  if (test.size() != data.test.size()) fail("sweep: test dataset and prepared test inputs differ in size");
  std::vector<TrainResult> trained(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t k) {
    TrainConfig cfg = base;
    cfg.lambda = lambdas[k];
    trained[k] = train_prepared<Scalar>(data, cfg);
  });

  FrontierTable table;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    auto rep = evaluate(route_inputs(trained[k].params, data.test), test, lambdas[k], lambda_label(lambdas[k]));
    table.rows.push_back({"router", std::move(rep), std::move(trained[k].log)});
  }
  table.rows.push_back({"oracle", evaluate(oracle_decisions(test), test, 0.0, "oracle"), {}});
  table.rows.push_back({"best_single", evaluate(baseline_best_single(test), test, 0.0, "best_single"), {}});
  table.rows.push_back({"cheapest", evaluate(baseline_cheapest(test), test, 0.0, "cheapest"), {}});
  return table;
}

}  // namespace llmrank
