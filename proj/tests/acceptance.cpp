// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. The reference-corpus tier runs only when
// LLMRANK_ROUTERBENCH_DATA, LLMRANK_ROUTERBENCH_POOL and
// LLMRANK_ROUTERBENCH_EMBEDDINGS point at an export, and reports SKIP
// otherwise.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "llmrank/llmrank.hpp"

using namespace llmrank;
using Mat = Matrix<double>;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  enum Status { pass, fail, skip } status = fail;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::pass, std::move(d)}; }
Outcome failed(std::string d) { return {Outcome::fail, std::move(d)}; }
Outcome skipped(std::string d) { return {Outcome::skip, std::move(d)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Mat random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& gen, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(gen);
  return m;
}

// ---------------------------------------------------------------------------
// Independent loss reference: direct softmax and explicit loops.
// ---------------------------------------------------------------------------

long double ref_total(const Mat& s, const Mat& u, long double tau) {
  long double mse = 0, kl = 0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    long double zs = 0, zu = 0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      mse += (static_cast<long double>(s(i, j)) - u(i, j)) * (static_cast<long double>(s(i, j)) - u(i, j));
      zs += std::exp(s(i, j) / tau);
      zu += std::exp(u(i, j) / tau);
    }
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      const long double p = std::exp(u(i, j) / tau) / zu, q = std::exp(s(i, j) / tau) / zs;
      if (p > 0) kl += p * std::log(p / q);
    }
  }
  return mse / static_cast<long double>(s.size()) + kl / static_cast<long double>(s.rows());
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  constexpr double eps = 1e-4, tau = 0.5;
  double worst = 0;
  int instances = 0;
  for (std::uint64_t seed = 1; instances < 24; ++seed) {
    std::mt19937_64 gen(seed);
    auto p = RankerParams::zeros(5, 8, 4, 3);
    for (auto* t : p.tensors()) *t = random_matrix(t->rows(), t->cols(), gen, -0.8, 0.8);
    const Mat f = random_matrix(3, 5, gen), e = random_matrix(3, 8, gen), u = random_matrix(3, 3, gen);
    // Skip instances with a pre-activation inside the difference stencil.
    const auto c = forward_batch(p, f, e);
    const auto kink = [](const Mat& m) { return (m.array().abs() < 1e-3).any(); };
    if (kink(c.pre_feat) || kink(c.pre_text) || kink(c.pre_fuse)) continue;
    ++instances;
    const auto g = loss_and_grad<double>(p, f, e, u, tau).grad;
    auto ts = p.tensors();
    const auto gs = g.tensors();
    for (std::size_t k = 0; k < kNumTensors; ++k)
      for (Eigen::Index i = 0; i < ts[k]->size(); ++i) {
        double& w = ts[k]->data()[i];
        const double orig = w;
        w = orig + eps;
        const auto up = ref_total(forward_batch(p, f, e).scores, u, tau);
        w = orig - eps;
        const auto down = ref_total(forward_batch(p, f, e).scores, u, tau);
        w = orig;
        const double num = static_cast<double>((up - down) / (2 * eps)), a = gs[k]->data()[i];
        worst = std::max(worst, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-3}));
      }
  }
  const double secs = seconds_since(t0);
  const auto d = fmt("%d instances, max relative error %.3g, %.2fs", instances, worst, secs);
  return worst < 1e-4 && secs < 10 ? pass(d) : failed(d);
}

Outcome loss_identities() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(77);
  double max_mse_fit = 0, max_shift = 0, max_sum = 0, min_kl = 0;
  for (int k = 0; k < 1000; ++k) {
    const Mat s = random_matrix(4, 5, gen, -3, 3), u = random_matrix(4, 5, gen, -3, 3);
    max_mse_fit = std::max(max_mse_fit, std::abs(loss_mse<double>(u, u)));
    Mat shifted = u;
    for (Eigen::Index i = 0; i < u.rows(); ++i) shifted.row(i).array() += random_matrix(1, 1, gen, -50, 50)(0, 0);
    max_shift = std::max(max_shift, std::abs(loss_listwise<double>(shifted, u, 0.5)));
    max_sum = std::max(max_sum, std::abs(loss_total<double>(s, u, 0.5) -
                                         (loss_mse<double>(s, u) + loss_listwise<double>(s, u, 0.5))));
    min_kl = std::min(min_kl, loss_listwise<double>(s, u, 0.5));
  }
  const double secs = seconds_since(t0);
  const bool ok = max_mse_fit == 0 && max_shift <= 1e-9 && max_sum <= 1e-12 && min_kl >= 0 && secs < 5;
  return {ok ? Outcome::pass : Outcome::fail,
          fmt("mse(u,u) %.1e, shift %.1e, sum %.1e, min KL %.1e, %.2fs", max_mse_fit, max_shift, max_sum, min_kl, secs)};
}

PromptRecord rec(std::string id, std::string bench, std::vector<double> q, std::vector<double> c) {
  PromptRecord r;
  r.sample_id = std::move(id);
  r.prompt = "p";
  r.benchmark = std::move(bench);
  r.quality = std::move(q);
  r.cost = std::move(c);
  return r;
}

double round_to(double v, int digits) {
  const double s = std::pow(10.0, digits);
  return std::round(v * s) / s;
}

Outcome metric_oracle() {
  Dataset d;
  d.pool = ModelPool({"small", "medium", "large"});
  d.records = {rec("p1", "a", {1.0, 1.0, 1.0}, {0.001, 0.004, 0.010}),
               rec("p2", "a", {0.0, 0.5, 1.0}, {0.001, 0.004, 0.010}),
               rec("p3", "b", {0.0, 1.0, 1.0}, {0.002, 0.003, 0.020})};
  std::vector<RouterDecision> dec{{"p1", 2, {}, 0, 0}, {"p2", 1, {}, 0, 0}, {"p3", 0, {}, 0, 0}};
  const double lambda = 100;
  const auto r = evaluate(dec, d, lambda);
  const double q = 1.5 / 3.0, total = 0.010 + 0.004 + 0.002, oq = 1.0, ototal = 0.001 + 0.010 + 0.003;
  const bool table_ok = r.quality == q && r.mean_cost == total / 3 && r.total_cost == total &&
                        r.utility == q - lambda * (total / 3) && r.efficiency == q / oq &&
                        r.cost_ratio == total / ototal && r.quality_gap == oq - q;
  const auto m = comparative_metrics(0.843, 5.784, 0.945, 1.271);
  const bool published_ok = round_to(100 * m.efficiency, 1) == 89.2 && round_to(m.cost_ratio, 2) == 4.55 &&
                            round_to(100 * m.quality_gap, 1) == 10.2;
  return {table_ok && published_ok ? Outcome::pass : Outcome::fail,
          fmt("3x3 table %s; 0.843/0.945 = %.1f%%, 5.784/1.271 = %.2fx, gap %.1f%%", table_ok ? "exact" : "MISMATCH",
              100 * m.efficiency, m.cost_ratio, 100 * m.quality_gap)};
}

Outcome oracle_dominance() {
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto d = make_random_dataset({60, 3, 2, seed});
    SplitSpec spec;
    spec.seed = seed;
    const auto s = stratified_split(d, spec);
    PipelineOptions po;
    po.hash_dim = 32;
    const auto data = prepare_splits(s, po);
    TrainConfig cfg;
    cfg.hidden = 8;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    cfg.seed = seed;
    const auto router = train_prepared<float>(data, cfg);
    const double oq = evaluate(oracle_decisions(s.test), s.test, 0).quality;
    for (const auto& decisions : {route_inputs(router.params, data.test), baseline_best_single(s.test),
                                  baseline_cheapest(s.test), baseline_random(s.test, seed)})
      if (evaluate(decisions, s.test, 0).quality > oq) ++violations;
  }
  return {violations == 0 ? Outcome::pass : Outcome::fail, fmt("100 datasets x 4 policies, %d violations", violations)};
}

struct Corpus {
  Dataset test;
  PreparedSplits data;
};

const Corpus& tiered_corpus() {
  static const Corpus c = [] {
    TieredCorpusOptions o;
    o.prompts = 5000;
    o.models = 5;
    o.seed = 2024;
    const auto splits = stratified_split(make_tiered_corpus(o), SplitSpec{});
    return Corpus{splits.test, prepare_splits(splits)};
  }();
  return c;
}

Outcome learnability() {
  const auto t0 = Clock::now();
  const auto& c = tiered_corpus();
  const auto res = train_prepared<float>(c.data, TrainConfig{});
  const auto rep = evaluate(route_inputs(res.params, c.data.test), c.test, 0.0);
  // Exhaustive per-prompt argmax of quality.
  double oracle = 0;
  for (const auto& r : c.test.records) {
    double best = r.quality[0];
    for (double v : r.quality) best = std::max(best, v);
    oracle += best;
  }
  oracle /= static_cast<double>(c.test.size());
  const double eff = rep.quality / oracle, secs = seconds_since(t0);
  const auto d = fmt("efficiency %.4f after %d epochs (best %d), %.1fs", eff, res.log.stop_epoch, res.log.best_epoch, secs);
  return eff >= 0.95 && res.log.stop_epoch <= 100 && secs < 300 ? pass(d) : failed(d);
}

Outcome lambda_monotonicity() {
  const auto& c = tiered_corpus();
  int reversals = 0;
  std::ostringstream detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    const auto table = sweep_lambda<float>(c.data, c.test, default_lambdas(), cfg);
    const auto routers = table.routers();
    detail << (seed ? "; " : "") << "seed " << seed << ":";
    for (std::size_t k = 0; k < routers.size(); ++k) {
      const auto& r = routers[k]->report;
      detail << fmt(" (%.3f, %.2e)", r.quality, r.mean_cost);
      if (k > 0) {
        const auto& prev = routers[k - 1]->report;
        if (r.mean_cost > prev.mean_cost || r.quality > prev.quality) ++reversals;
      }
    }
  }
  return {reversals == 0 ? Outcome::pass : Outcome::fail,
          fmt("%d reversals over 5 seeds; (quality, mean cost) per lambda ", reversals) + detail.str()};
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(LLMRANK_CLI) + " " + args + " > /dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("llmrank-acceptance-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  const auto p = [&](const std::string& rel) { return (dir / rel).string(); };
  Outcome out;
  if (run_cli("synth --out " + p("syn") + " --prompts 5000 --seed 11") != 0 ||
      run_cli("split --data " + p("syn/dataset.jsonl") + " --seed 7 --out " + p("sp")) != 0) {
    out = failed("could not prepare the corpus");
  } else {
    const std::string base = "train --train " + p("sp/train.jsonl") + " --val " + p("sp/val.jsonl") + " --seed 7 --out ";
    if (run_cli(base + p("a")) != 0 || run_cli(base + p("b")) != 0) {
      out = failed("train exited with an error");
    } else {
      const bool ck = read_file_bytes(p("a/checkpoint.bin")) == read_file_bytes(p("b/checkpoint.bin"));
      const bool log = read_file_bytes(p("a/training_log.csv")) == read_file_bytes(p("b/training_log.csv"));
      out = {ck && log ? Outcome::pass : Outcome::fail,
             fmt("checkpoints %s, training logs %s (%s)", ck ? "identical" : "DIFFER", log ? "identical" : "DIFFER",
                 hex64(hash_file(p("a/checkpoint.bin"))).c_str())};
    }
  }
  std::filesystem::remove_all(dir);
  return out;
}

Outcome reference_corpus() {
  const char* data = std::getenv("LLMRANK_ROUTERBENCH_DATA");
  const char* pool = std::getenv("LLMRANK_ROUTERBENCH_POOL");
  const char* emb = std::getenv("LLMRANK_ROUTERBENCH_EMBEDDINGS");
  if (!data || !pool || !emb) return skipped("set LLMRANK_ROUTERBENCH_DATA, _POOL and _EMBEDDINGS to run");
  const auto d = filter_dataset(ingest_dataset(data, load_pool(pool)).dataset);
  const auto splits = stratified_split(d, SplitSpec{});
  std::vector<std::size_t> hits(d.pool.size(), 0);
  for (const auto& r : splits.train.records) ++hits[oracle_route(r)];
  const auto top = static_cast<std::size_t>(std::max_element(hits.begin(), hits.end()) - hits.begin());
  const double top_share = 100.0 * static_cast<double>(hits[top]) / static_cast<double>(splits.train.size());
  const auto store = load_embeddings(emb);
  PipelineOptions po;
  po.embeddings = &store;
  const auto prepared = prepare_splits(splits, po);
  const auto res = train_prepared<float>(prepared, TrainConfig{});
  const double eff = evaluate(route_inputs(res.params, prepared.test), splits.test, 0).efficiency;
  const bool ok = d.size() == 34623 && d.pool.name(top) == "mistralai/mistral-7b-chat" &&
                  std::abs(top_share - 28.9) <= 0.5 && eff >= 0.85;
  return {ok ? Outcome::pass : Outcome::fail,
          fmt("filtered %zu records; train oracle top %s at %.1f%%; test efficiency %.1f%%", d.size(),
              d.pool.name(top).c_str(), top_share, 100 * eff)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient_oracle", gradient_oracle},
      {"loss_identities", loss_identities},
      {"metric_oracle", metric_oracle},
      {"oracle_dominance", oracle_dominance},
      {"end_to_end_learnability", learnability},
      {"lambda_monotonicity", lambda_monotonicity},
      {"determinism", determinism},
      {"reference_corpus", reference_corpus},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = failed(std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Outcome::pass ? "PASS" : (o.status == Outcome::skip ? "SKIP" : "FAIL");
    failures += o.status == Outcome::fail;
    std::cout << tag << " " << name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
