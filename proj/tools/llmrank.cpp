// llmrank: command-line driver for the routing pipeline.
//
//   llmrank ingest    --data raw.jsonl --pool pool.json --out prepared/
//   llmrank split     --data prepared/dataset.jsonl --seed 7 --out splits/
//   llmrank featurize --data splits/test.jsonl --proxy-train splits/train.jsonl --out feats/
//   llmrank train     --train splits/train.jsonl --val splits/val.jsonl --lambda 0 --out model/
//   llmrank evaluate  --model model/ --data splits/test.jsonl --format table
//   llmrank route     --model model/ --explain < prompts.txt
//   llmrank sweep     --train ... --val ... --test ... --lambdas 0,1e3,1e5 --out sweep/
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11/CLI11.hpp>
#include <nlohmann/json.hpp>

#include "llmrank/llmrank.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace llmrank;

namespace {

enum class Format { json, table, csv };

const std::map<std::string, Format> kFormats = {{"json", Format::json}, {"table", Format::table}, {"csv", Format::csv}};

std::string default_pool_for(const std::string& data_path) {
  return (fs::path(data_path).parent_path() / "pool.json").string();
}

ModelPool resolve_pool(const std::string& pool_path, const std::string& data_path) {
  return load_pool(pool_path.empty() ? default_pool_for(data_path) : pool_path);
}

Dataset read_dataset(const std::string& path, const ModelPool& pool) { return ingest_dataset(path, pool).dataset; }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail_io("cannot create directory ", dir, ": ", ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot write ", path.string());
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open ", path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(path.string(), ": ", e.what());
  }
}

// Echoes the resolved configuration and content hashes of every input file
// into an artifact directory.
void record_run(const fs::path& dir, const CLI::App& sub, const std::vector<std::string>& inputs) {
  write_text(dir / "run_config.toml", "[" + sub.get_name() + "]\n" + sub.config_to_str(true, false));
  json hashes = json::object();
  for (const auto& in : inputs)
    if (!in.empty()) hashes[in] = hex64(hash_file(in));
  write_text(dir / "inputs.json", hashes.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Model directories: checkpoint.bin, schema.json, model.json, pool.json and
// optionally proxy.bin.
// ---------------------------------------------------------------------------

struct ModelDir {
  Checkpoint checkpoint;
  FeatureContext context;
  ModelPool pool;
  std::string provider;  // "hash" or "file"
  std::size_t hash_dim = 0;
};

void save_model_dir(const fs::path& dir, const Checkpoint& ck, const FeatureContext& ctx, const ModelPool& pool,
                    const std::string& provider, std::size_t hash_dim) {
  save_checkpoint(ck, (dir / "checkpoint.bin").string());
  write_text(dir / "schema.json", ctx.schema.to_json().dump(2) + "\n");
  save_pool(pool, (dir / "pool.json").string());
  if (ctx.proxy) save_proxy(*ctx.proxy, (dir / "proxy.bin").string());
  const json meta{{"embedding_provider", provider},
                  {"embedding_dim", ck.params.embedding_dim()},
                  {"hash_dim", hash_dim},
                  {"feature_schema_version", ctx.schema.version()},
                  {"feature_dim", ctx.schema.dim()},
                  {"pool_fingerprint", hex64(pool.fingerprint())},
                  {"lambda", ck.lambda},
                  {"tau", ck.tau},
                  {"dropout", ck.dropout}};
  write_text(dir / "model.json", meta.dump(2) + "\n");
}

ModelDir load_model_dir(const fs::path& dir) {
  ModelDir m;
  m.checkpoint = load_checkpoint((dir / "checkpoint.bin").string());
  m.context.schema = FeatureSchema::from_json(read_json(dir / "schema.json"));
  if (fs::exists(dir / "proxy.bin")) m.context.proxy = load_proxy((dir / "proxy.bin").string());
  m.pool = load_pool((dir / "pool.json").string());
  const auto meta = read_json(dir / "model.json");
  m.provider = meta.value("embedding_provider", "hash");
  m.hash_dim = meta.value("hash_dim", std::size_t{0});
  check_compatible(m.checkpoint, m.pool.fingerprint(), m.context.schema.version(), m.context.schema.dim(),
                   m.checkpoint.params.embedding_dim());
  return m;
}

std::optional<EmbeddingStore> load_optional_embeddings(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_embeddings(path);
}

RankingInputs model_inputs(const ModelDir& m, const Dataset& d, const std::optional<EmbeddingStore>& store) {
  PipelineOptions opts;
  opts.hash_dim = m.hash_dim;
  if (m.provider == "file") {
    if (!store) fail("this model was trained on precomputed embeddings; pass --embeddings");
    opts.embeddings = &*store;
  } else if (store) {
    opts.embeddings = &*store;
  }
  auto in = build_inputs(d, m.context, opts);
  check_compatible(m.checkpoint, d.pool.fingerprint(), m.context.schema.version(), in.feature_dim(), in.embedding_dim());
  return in;
}

json decision_json(const RouterDecision& d, const ModelPool& pool) {
  json j{{"sample_id", d.sample_id}, {"chosen_index", d.chosen_index}, {"model", pool.name(d.chosen_index)}};
  if (!d.scores.empty()) j["scores"] = d.scores;
  return j;
}

std::vector<RouterDecision> read_decisions(const std::string& path, const ModelPool& pool) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open decisions file ", path);
  std::vector<RouterDecision> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      RouterDecision d;
      d.sample_id = j.at("sample_id").get<std::string>();
      if (j.contains("chosen_index")) {
        d.chosen_index = j.at("chosen_index").get<std::size_t>();
      } else {
        const auto name = j.at("model").get<std::string>();
        const auto& names = pool.names();
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) fail("unknown model '", name, "'");
        d.chosen_index = static_cast<std::size_t>(it - names.begin());
      }
      out.push_back(std::move(d));
    } catch (const json::exception& e) {
      fail(path, ":", lineno, ": ", e.what());
    } catch (const ValidationError& e) {
      fail(path, ":", lineno, ": ", e.what());
    }
  }
  return out;
}

void emit_reports(const std::vector<EvalReport>& reports, Format fmt, std::ostream& out) {
  switch (fmt) {
    case Format::table:
      out << format_report_table(reports);
      break;
    case Format::csv: {
      out << "policy,lambda,quality,mean_cost,total_cost,utility,efficiency,cost_ratio,quality_gap\n";
      char buf[320];
      for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.policy.c_str(), r.lambda,
                      r.quality, r.mean_cost, r.total_cost, r.utility, r.efficiency, r.cost_ratio, r.quality_gap);
        out << buf;
      }
      break;
    }
    case Format::json: {
      json arr = json::array();
      for (const auto& r : reports) arr.push_back(r.to_json());
      out << arr.dump(2) << '\n';
      break;
    }
  }
}

// Training flags shared by `train` and `sweep`.
struct TrainFlags {
  TrainConfig cfg;
  std::size_t hash_dim = 256;
  std::string embeddings;
  bool no_proxy = false;
  std::string precision = "float";

  void attach(CLI::App* sub, bool with_lambda) {
    if (with_lambda) sub->add_option("--lambda", cfg.lambda, "Cost trade-off (>= 0, scientific notation accepted)")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "Seed for initialization, shuffling and dropout")->capture_default_str();
    sub->add_option("--epochs", cfg.epochs, "Maximum epochs")->capture_default_str();
    sub->add_option("--batch-size", cfg.batch_size, "Mini-batch size")->capture_default_str();
    sub->add_option("--patience", cfg.patience, "Early-stopping patience in epochs")->capture_default_str();
    sub->add_option("--lr", cfg.lr, "AdamW learning rate")->capture_default_str();
    sub->add_option("--weight-decay", cfg.weight_decay, "AdamW decoupled weight decay")->capture_default_str();
    sub->add_option("--dropout", cfg.dropout, "Dropout rate")->capture_default_str();
    sub->add_option("--tau", cfg.tau, "Listwise softmax temperature")->capture_default_str();
    sub->add_option("--clip-norm", cfg.clip_norm, "Global gradient-norm clip")->capture_default_str();
    sub->add_option("--hidden", cfg.hidden, "Hidden width h")->capture_default_str();
    sub->add_option("--hash-dim", hash_dim, "Width of built-in hash embeddings")->capture_default_str();
    sub->add_option("--embeddings", embeddings, "Precomputed embedding file (LLMREMB1); overrides --hash-dim");
    sub->add_flag("--no-proxy", no_proxy, "Disable the proxy-classifier feature block");
    sub->add_option("--precision", precision, "Training arithmetic")->check(CLI::IsMember({"float", "double"}))->capture_default_str();
  }

  [[nodiscard]] PipelineOptions pipeline(const EmbeddingStore* store) const {
    PipelineOptions o;
    o.hash_dim = hash_dim;
    o.embeddings = store;
    o.use_proxy = !no_proxy;
    return o;
  }
};

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct Args {
  std::string data, pool, out, train, val, test, model, decisions, proxy_train, policy = "model";
  std::string format_name = "table";
  std::vector<double> lambdas = default_lambdas();
  std::optional<double> lambda_override;
  std::size_t min_category = 50;
  std::vector<std::string> keep_languages{"en"};
  bool keep_unsolved = false, no_filter = false, explain = false, lenient = false;
  SplitSpec split;
  TrainFlags tf;
  std::size_t synth_prompts = 5000, synth_models = 5;
};

int cmd_ingest(const Args& a, const CLI::App& app) {
  const auto pool = resolve_pool(a.pool, a.data);
  auto res = ingest_dataset(a.data, pool, IngestOptions{!a.lenient});
  ensure_dir(a.out);
  const fs::path out(a.out);
  if (!res.rejects.empty()) write_rejects(res.rejects, (out / "dataset.jsonl.rejects").string());
  const auto before = res.dataset.size();
  Dataset d = a.no_filter ? std::move(res.dataset)
                          : filter_dataset(res.dataset, FilterOptions{a.min_category, !a.keep_unsolved,
                                                                      {a.keep_languages.begin(), a.keep_languages.end()}});
  write_dataset(d, (out / "dataset.jsonl").string());
  save_pool(pool, (out / "pool.json").string());
  record_run(out, app, {a.data, a.pool});
  std::cout << json{{"ingested", before}, {"rejected", res.rejects.size()}, {"kept", d.size()},
                    {"categories", category_counts(d)}}.dump(2)
            << '\n';
  return 0;
}

int cmd_split(const Args& a, const CLI::App& app) {
  const auto pool = resolve_pool(a.pool, a.data);
  const auto d = read_dataset(a.data, pool);
  const auto s = stratified_split(d, a.split);
  ensure_dir(a.out);
  const fs::path out(a.out);
  write_dataset(s.train, (out / "train.jsonl").string());
  write_dataset(s.val, (out / "val.jsonl").string());
  write_dataset(s.test, (out / "test.jsonl").string());
  save_pool(pool, (out / "pool.json").string());
  record_run(out, app, {a.data, a.pool});
  std::cout << json{{"train", s.train.size()}, {"val", s.val.size()}, {"test", s.test.size()}}.dump() << '\n';
  return 0;
}

int cmd_featurize(const Args& a, const CLI::App& app) {
  const auto pool = resolve_pool(a.pool, a.data);
  const auto d = read_dataset(a.data, pool);
  FeatureContext ctx;
  if (!a.proxy_train.empty() && !a.tf.no_proxy) ctx = build_feature_context(read_dataset(a.proxy_train, pool));
  const auto res = ctx.featurize(d);
  ensure_dir(a.out);
  const fs::path out(a.out);
  write_feature_matrix(res.matrix, (out / "features.bin").string());
  write_text(out / "features.bin.manifest.json", res.manifest.to_json().dump(2) + "\n");
  write_text(out / "schema.json", ctx.schema.to_json().dump(2) + "\n");
  if (ctx.proxy) save_proxy(*ctx.proxy, (out / "proxy.bin").string());
  record_run(out, app, {a.data, a.pool, a.proxy_train});
  std::cout << json{{"rows", res.matrix.rows()}, {"dim", res.matrix.dim}}.dump() << '\n';
  return 0;
}

int cmd_train(const Args& a, const CLI::App& app) {
  const auto pool = resolve_pool(a.pool, a.train);
  DatasetSplits s;
  s.train = read_dataset(a.train, pool);
  s.val = read_dataset(a.val, pool);
  s.test = s.val;  // test inputs are not used by training
  const auto store = load_optional_embeddings(a.tf.embeddings);
  const auto data = prepare_splits(s, a.tf.pipeline(store ? &*store : nullptr));
  const auto res = a.tf.precision == "double" ? train_prepared<double>(data, a.tf.cfg) : train_prepared<float>(data, a.tf.cfg);

  ensure_dir(a.out);
  const fs::path out(a.out);
  Checkpoint ck{res.params, a.tf.cfg.lambda, a.tf.cfg.tau, a.tf.cfg.dropout, data.feature_means};
  save_model_dir(out, ck, data.context, pool, store ? "file" : "hash", store ? 0 : a.tf.hash_dim);
  write_text(out / "training_log.csv", res.log.to_csv());
  write_text(out / "training_log.json", res.log.to_json().dump(2) + "\n");
  record_run(out, app, {a.train, a.val, a.pool, a.tf.embeddings});
  std::cout << json{{"best_epoch", res.log.best_epoch}, {"stop_epoch", res.log.stop_epoch},
                    {"best_val_loss", res.log.epochs.at(static_cast<std::size_t>(res.log.best_epoch - 1)).val_loss}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_evaluate(const Args& a, const CLI::App& app) {
  const auto pool = resolve_pool(a.pool, a.data);
  const auto d = read_dataset(a.data, pool);
  std::vector<EvalReport> reports;
  if (!a.decisions.empty()) {
    reports.push_back(evaluate(read_decisions(a.decisions, pool), d, a.lambda_override.value_or(0.0), "decisions"));
  } else {
    if (a.model.empty()) fail("evaluate needs --model or --decisions");
    const auto m = load_model_dir(a.model);
    const auto store = load_optional_embeddings(a.tf.embeddings);
    const double lambda = a.lambda_override.value_or(m.checkpoint.lambda);
    reports.push_back(evaluate(route_inputs(m.checkpoint.params, model_inputs(m, d, store)), d, lambda,
                               lambda_label(m.checkpoint.lambda)));
  }
  const double lambda = reports.front().lambda;
  reports.push_back(evaluate(oracle_decisions(d), d, lambda, "oracle"));
  reports.push_back(evaluate(baseline_best_single(d), d, lambda, "best_single"));
  reports.push_back(evaluate(baseline_cheapest(d), d, lambda, "cheapest"));

  const auto fmt = kFormats.at(a.format_name);
  if (a.out.empty()) {
    emit_reports(reports, fmt, std::cout);
  } else {
    ensure_dir(a.out);
    const fs::path out(a.out);
    std::ostringstream j, t;
    emit_reports(reports, Format::json, j);
    emit_reports(reports, Format::table, t);
    write_text(out / "report.json", j.str());
    write_text(out / "report.txt", t.str());
    record_run(out, app, {a.data, a.pool, a.decisions, a.tf.embeddings});
    emit_reports(reports, fmt, std::cout);
  }
  return 0;
}

int cmd_route(const Args& a) {
  if (a.policy != "model") {
    if (a.data.empty()) fail("--policy ", a.policy, " needs --data with quality and cost labels");
    const auto pool = resolve_pool(a.pool, a.data);
    const auto d = read_dataset(a.data, pool);
    const auto decisions = a.policy == "oracle"        ? oracle_decisions(d)
                           : a.policy == "best-single" ? baseline_best_single(d)
                                                       : baseline_cheapest(d);
    for (const auto& dec : decisions) std::cout << decision_json(dec, pool).dump() << '\n';
    return 0;
  }
  if (a.model.empty()) fail("route needs --model");
  const auto m = load_model_dir(a.model);
  const auto store = load_optional_embeddings(a.tf.embeddings);
  const auto& params = m.checkpoint.params;

  const auto emit = [&](const std::string& id, const std::string& prompt) {
    const auto fv = m.context.extract(prompt);
    std::vector<float> emb;
    if (store && store->contains(id)) {
      const auto e = store->at(id);
      emb.assign(e.begin(), e.end());
    } else if (m.provider == "hash") {
      emb = hash_embed(prompt, m.hash_dim).values;
    } else {
      fail("no embedding for '", id, "'; this model needs --embeddings covering every routed prompt");
    }
    auto dec = route(params, fv.values, emb);
    dec.sample_id = id;
    auto j = decision_json(dec, m.pool);
    if (a.explain) {
      json attr = json::array();
      for (const auto& at : explain_route(params, fv.values, emb, m.context.schema, m.checkpoint.feature_means))
        attr.push_back({{"name", at.name}, {"score", at.score}});
      j["attribution"] = attr;
    }
    std::cout << j.dump() << '\n';
  };

  if (!a.data.empty()) {
    const auto d = read_dataset(a.data, a.pool.empty() ? m.pool : resolve_pool(a.pool, a.data));
    for (const auto& r : d.records) emit(r.sample_id, r.prompt);
    return 0;
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(std::cin, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::string id = "stdin-" + std::to_string(lineno), prompt = line;
    if (line.front() == '{') {
      try {
        const auto j = json::parse(line);
        prompt = j.at("prompt").get<std::string>();
        id = j.value("sample_id", id);
      } catch (const json::exception& e) {
        fail("stdin line ", lineno, ": ", e.what());
      }
    }
    emit(id, prompt);
  }
  return 0;
}

int cmd_sweep(const Args& a, const CLI::App& app) {
  const auto pool = resolve_pool(a.pool, a.train);
  DatasetSplits s{read_dataset(a.train, pool), read_dataset(a.val, pool), read_dataset(a.test, pool)};
  const auto store = load_optional_embeddings(a.tf.embeddings);
  const auto data = prepare_splits(s, a.tf.pipeline(store ? &*store : nullptr));
  const auto table = a.tf.precision == "double" ? sweep_lambda<double>(data, s.test, a.lambdas, a.tf.cfg)
                                                : sweep_lambda<float>(data, s.test, a.lambdas, a.tf.cfg);
  const auto fmt = kFormats.at(a.format_name);
  const auto render = [&](Format f) {
    return f == Format::csv ? table.to_csv() : f == Format::table ? table.to_table() : table.to_json().dump(2) + "\n";
  };
  if (!a.out.empty()) {
    ensure_dir(a.out);
    const fs::path out(a.out);
    write_text(out / "frontier.csv", table.to_csv());
    write_text(out / "frontier.txt", table.to_table());
    write_text(out / "frontier.json", table.to_json().dump(2) + "\n");
    record_run(out, app, {a.train, a.val, a.test, a.pool, a.tf.embeddings});
  }
  std::cout << render(fmt);
  return 0;
}

int cmd_synth(const Args& a) {
  TieredCorpusOptions o;
  o.prompts = a.synth_prompts;
  o.models = a.synth_models;
  o.seed = a.split.seed;
  const auto d = make_tiered_corpus(o);
  ensure_dir(a.out);
  const fs::path out(a.out);
  write_dataset(d, (out / "dataset.jsonl").string());
  save_pool(d.pool, (out / "pool.json").string());
  std::cout << json{{"prompts", d.size()}, {"models", d.pool.size()}}.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"llmrank: cost-aware prompt-to-model routing"};
  app.set_config("--config", "", "TOML/INI file of flag values; flags given on the command line take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  Args a;

  const auto add_data = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--data", a.data, "Dataset JSON-Lines file");
    if (required) opt->required();
    sub->add_option("--pool", a.pool, "Model pool JSON (default: pool.json next to the data file)");
  };
  const auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", a.format_name, "Output format")->check(CLI::IsMember({"json", "table", "csv"}))->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest", "Validate and filter a raw dataset export");
  add_data(ingest, true);
  ingest->add_option("--out", a.out, "Output directory")->required();
  ingest->add_option("--min-category", a.min_category, "Drop categories with fewer records")->capture_default_str();
  ingest->add_option("--keep-languages", a.keep_languages, "Language allowlist")->delimiter(',');
  ingest->add_flag("--keep-unsolved", a.keep_unsolved, "Keep prompts no model solves");
  ingest->add_flag("--no-filter", a.no_filter, "Skip filtering");
  ingest->add_flag("--lenient", a.lenient, "Skip malformed lines instead of failing");

  auto* split = app.add_subcommand("split", "Stratified train/val/test split");
  add_data(split, true);
  split->add_option("--out", a.out, "Output directory")->required();
  split->add_option("--seed", a.split.seed, "Shuffle seed")->capture_default_str();
  split->add_option("--train-frac", a.split.train_frac)->capture_default_str();
  split->add_option("--val-frac", a.split.val_frac)->capture_default_str();
  split->add_option("--test-frac", a.split.test_frac)->capture_default_str();

  auto* featurize = app.add_subcommand("featurize", "Write the feature matrix of a dataset");
  add_data(featurize, true);
  featurize->add_option("--out", a.out, "Output directory")->required();
  featurize->add_option("--proxy-train", a.proxy_train, "Train split used to fit the proxy classifier");
  featurize->add_flag("--no-proxy", a.tf.no_proxy, "Leave the proxy block at zero");

  auto* train = app.add_subcommand("train", "Train a ranker");
  train->add_option("--train", a.train, "Training split")->required();
  train->add_option("--val", a.val, "Validation split")->required();
  train->add_option("--pool", a.pool, "Model pool JSON");
  train->add_option("--out", a.out, "Model output directory")->required();
  a.tf.attach(train, true);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a model or a decision file against baselines");
  add_data(evaluate_cmd, true);
  evaluate_cmd->add_option("--model", a.model, "Model directory from `train`");
  evaluate_cmd->add_option("--decisions", a.decisions, "Decision JSON-Lines file to evaluate instead of a model");
  evaluate_cmd->add_option("--embeddings", a.tf.embeddings, "Precomputed embedding file");
  evaluate_cmd->add_option("--lambda", a.lambda_override, "Lambda for utility (default: the model's)");
  evaluate_cmd->add_option("--out", a.out, "Also write report.json/report.txt here");
  add_format(evaluate_cmd);

  auto* route_cmd = app.add_subcommand("route", "Route prompts from --data or standard input");
  route_cmd->add_option("--model", a.model, "Model directory from `train`");
  add_data(route_cmd, false);
  route_cmd->add_option("--embeddings", a.tf.embeddings, "Precomputed embedding file");
  route_cmd->add_flag("--explain", a.explain, "Attach feature-group attributions");
  route_cmd->add_option("--policy", a.policy, "Routing policy")
      ->check(CLI::IsMember({"model", "oracle", "best-single", "cheapest"}))
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Train and evaluate one router per lambda");
  sweep->add_option("--train", a.train, "Training split")->required();
  sweep->add_option("--val", a.val, "Validation split")->required();
  sweep->add_option("--test", a.test, "Test split")->required();
  sweep->add_option("--pool", a.pool, "Model pool JSON");
  sweep->add_option("--lambdas", a.lambdas, "Comma-separated lambda list")->delimiter(',')->capture_default_str();
  sweep->add_option("--out", a.out, "Output directory for frontier.csv/.txt/.json");
  a.tf.attach(sweep, false);
  a.format_name = "csv";
  add_format(sweep);

  auto* synth = app.add_subcommand("synth", "Write a synthetic tiered corpus");
  synth->add_option("--out", a.out, "Output directory")->required();
  synth->add_option("--prompts", a.synth_prompts)->capture_default_str();
  synth->add_option("--models", a.synth_models)->capture_default_str();
  synth->add_option("--seed", a.split.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  // `sweep` defaults to CSV, everything else to a table.
  if (!sweep->parsed() && a.format_name == "csv" && evaluate_cmd->count("--format") == 0) a.format_name = "table";

  try {
    if (ingest->parsed()) return cmd_ingest(a, *ingest);
    if (split->parsed()) return cmd_split(a, *split);
    if (featurize->parsed()) return cmd_featurize(a, *featurize);
    if (train->parsed()) return cmd_train(a, *train);
    if (evaluate_cmd->parsed()) return cmd_evaluate(a, *evaluate_cmd);
    if (route_cmd->parsed()) return cmd_route(a);
    if (sweep->parsed()) return cmd_sweep(a, *sweep);
    if (synth->parsed()) return cmd_synth(a);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
