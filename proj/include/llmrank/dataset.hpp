#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmrank/common.hpp"

namespace llmrank {

/// Ordered list of candidate model names. The position of a name is the
/// canonical model index used by every other component.
class ModelPool {
 public:
  ModelPool() = default;
  explicit ModelPool(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() < 2) fail("model pool needs at least 2 models, got ", names_.size());
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
      if (n.empty()) fail("model pool contains an empty name");
      if (!seen.insert(n).second) fail("duplicate model name in pool: ", n);
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] const std::string& name(std::size_t j) const { return names_.at(j); }

  [[nodiscard]] std::uint64_t fingerprint() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& n : names_) {
      h = fnv1a64(n, h);
      h = fnv1a64("\n", h);
    }
    return h;
  }

  bool operator==(const ModelPool&) const = default;

 private:
  std::vector<std::string> names_;
};

struct PromptRecord {
  std::string sample_id;
  std::string prompt;
  std::string benchmark;
  std::vector<double> quality;
  std::vector<double> cost;
  std::string language = "en";

  [[nodiscard]] double max_quality() const { return *std::max_element(quality.begin(), quality.end()); }

  bool operator==(const PromptRecord&) const = default;
};

struct Dataset {
  ModelPool pool;
  std::vector<PromptRecord> records;
  std::string provenance;

  [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
  [[nodiscard]] bool empty() const noexcept { return records.empty(); }

  // Hash of the ordered sample_id list; identifies which split a derived
  // artifact was built from.
  [[nodiscard]] std::uint64_t id_hash() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& r : records) {
      h = fnv1a64(r.sample_id, h);
      h = fnv1a64("\n", h);
    }
    return h;
  }

  bool operator==(const Dataset& o) const { return pool == o.pool && records == o.records; }
};

struct SplitSpec {
  double train_frac = 0.70;
  double val_frac = 0.15;
  double test_frac = 0.15;
  std::uint64_t seed = 0;
  std::string stratify_by = "benchmark";

  void validate() const {
    for (double f : {train_frac, val_frac, test_frac})
      if (!(f > 0.0 && f < 1.0)) fail("split fraction ", f, " not in (0,1)");
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
      fail("split fractions must sum to 1, got ", train_frac + val_frac + test_frac);
    if (stratify_by != "benchmark" && stratify_by != "language")
      fail("unsupported stratification field: ", stratify_by);
  }
};

struct DatasetSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline void validate_record(const PromptRecord& r, std::size_t m) {
  if (r.sample_id.empty()) fail("empty sample_id");
  if (r.quality.size() != m) fail("quality length ", r.quality.size(), " != pool size ", m);
  if (r.cost.size() != m) fail("cost length ", r.cost.size(), " != pool size ", m);
  for (double q : r.quality)
    if (!(q >= 0.0 && q <= 1.0)) fail("quality out of range [0,1]: ", q);
  for (double c : r.cost)
    if (!std::isfinite(c) || c < 0.0) fail("cost must be finite and >= 0: ", c);
}

inline void validate_dataset(const Dataset& d) {
  std::unordered_set<std::string> ids;
  for (const auto& r : d.records) {
    validate_record(r, d.pool.size());
    if (!ids.insert(r.sample_id).second) fail("duplicate sample_id: ", r.sample_id);
  }
}

// ---------------------------------------------------------------------------
// JSON / JSON-Lines interchange
// ---------------------------------------------------------------------------

inline nlohmann::json record_to_json(const PromptRecord& r) {
  return nlohmann::json{{"sample_id", r.sample_id}, {"prompt", r.prompt},   {"benchmark", r.benchmark},
                        {"quality", r.quality},     {"cost", r.cost},       {"language", r.language}};
}

inline PromptRecord record_from_json(const nlohmann::json& j, std::size_t m) {
  if (!j.is_object()) fail("record is not a JSON object");
  const auto str_field = [&](const char* key) -> std::string {
    if (!j.contains(key)) fail("missing field '", key, "'");
    if (!j.at(key).is_string()) fail("field '", key, "' must be a string");
    return j.at(key).get<std::string>();
  };
  const auto vec_field = [&](const char* key) -> std::vector<double> {
    if (!j.contains(key)) fail("missing field '", key, "'");
    const auto& a = j.at(key);
    if (!a.is_array()) fail("field '", key, "' must be an array");
    std::vector<double> out;
    out.reserve(a.size());
    for (const auto& v : a) {
      if (!v.is_number()) fail("field '", key, "' must contain numbers");
      out.push_back(v.get<double>());
    }
    return out;
  };
  PromptRecord r;
  r.sample_id = str_field("sample_id");
  r.prompt = str_field("prompt");
  r.benchmark = str_field("benchmark");
  r.quality = vec_field("quality");
  r.cost = vec_field("cost");
  if (j.contains("language") && !j.at("language").is_null()) r.language = str_field("language");
  validate_record(r, m);
  return r;
}

inline ModelPool load_pool(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open pool file ", path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail("pool file ", path, " is not valid JSON: ", e.what());
  }
  const nlohmann::json& names = j.is_object() && j.contains("models") ? j.at("models") : j;
  if (!names.is_array()) fail("pool file ", path, " must be an array of model names");
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (!n.is_string()) fail("pool file ", path, " contains a non-string entry");
    out.push_back(n.get<std::string>());
  }
  return ModelPool(std::move(out));
}

inline void save_pool(const ModelPool& pool, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_io("cannot write pool file ", path);
  out << nlohmann::json(pool.names()).dump(2) << '\n';
}

struct RejectedLine {
  std::size_t line = 0;
  std::string reason;
};

struct IngestResult {
  Dataset dataset;
  std::vector<RejectedLine> rejects;
};

struct IngestOptions {
  // Strict: the first bad line aborts ingestion. Lenient: bad lines are
  // collected in IngestResult::rejects and skipped.
  bool strict = true;
};

inline IngestResult ingest_dataset(std::istream& in, const ModelPool& pool, IngestOptions opts = {},
                                   const std::string& source = "<stream>") {
  IngestResult res;
  res.dataset.pool = pool;
  res.dataset.provenance = source;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        fail("malformed JSON");
      }
      PromptRecord r = record_from_json(j, pool.size());
      if (!ids.insert(r.sample_id).second) fail("duplicate sample_id '", r.sample_id, "'");
      res.dataset.records.push_back(std::move(r));
    } catch (const ValidationError& e) {
      if (opts.strict) fail(source, ":", lineno, ": ", e.what());
      res.rejects.push_back({lineno, e.what()});
    }
  }
  return res;
}

inline IngestResult ingest_dataset(const std::string& path, const ModelPool& pool, IngestOptions opts = {}) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open dataset file ", path);
  return ingest_dataset(in, pool, opts, path);
}

inline void write_rejects(const std::vector<RejectedLine>& rejects, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_io("cannot write ", path);
  for (const auto& r : rejects) out << "line " << r.line << ": " << r.reason << '\n';
}

inline void write_dataset(const Dataset& d, std::ostream& out) {
  for (const auto& r : d.records) out << record_to_json(r).dump() << '\n';
}

inline void write_dataset(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_io("cannot write dataset file ", path);
  write_dataset(d, out);
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

struct FilterOptions {
  std::size_t min_category_samples = 50;
  bool drop_unsolved = true;
  std::set<std::string> keep_languages = {"en"};
};

/// Applies, in order: language allowlist, unsolved-prompt removal, then
/// removal of benchmark categories with fewer than min_category_samples
/// surviving records. Record order is preserved.
inline Dataset filter_dataset(const Dataset& d, const FilterOptions& opts = {}) {
  std::vector<const PromptRecord*> kept;
  kept.reserve(d.records.size());
  for (const auto& r : d.records) {
    if (!opts.keep_languages.empty() && !opts.keep_languages.contains(r.language)) continue;
    if (opts.drop_unsolved && r.max_quality() <= 0.0) continue;
    kept.push_back(&r);
  }
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto* r : kept) ++counts[r->benchmark];

  Dataset out;
  out.pool = d.pool;
  out.provenance = d.provenance;
  for (const auto* r : kept)
    if (counts[r->benchmark] >= opts.min_category_samples) out.records.push_back(*r);
  if (out.records.empty()) fail("all records filtered");
  return out;
}

inline std::map<std::string, std::size_t> category_counts(const Dataset& d) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : d.records) ++counts[r.benchmark];
  return counts;
}

// ---------------------------------------------------------------------------
// Stratified split
// ---------------------------------------------------------------------------

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// Floor train, floor val, remainder to test; then move single records from
/// the largest split into any empty one.
inline SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
  const auto floor_of = [n](double frac) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * frac + 1e-9));
  };
  SplitSizes s;
  s.train = std::min(n, floor_of(spec.train_frac));
  s.val = std::min(n - s.train, floor_of(spec.val_frac));
  s.test = n - s.train - s.val;
  std::array<std::size_t*, 3> parts{&s.train, &s.val, &s.test};
  for (auto* p : parts) {
    if (*p > 0) continue;
    auto* largest = *std::max_element(parts.begin(), parts.end(), [](auto* a, auto* b) { return *a < *b; });
    if (*largest < 2) break;
    --*largest;
    ++*p;
  }
  return s;
}

inline const std::string& stratum_of(const PromptRecord& r, const std::string& field) {
  return field == "language" ? r.language : r.benchmark;
}

inline DatasetSplits stratified_split(const Dataset& d, const SplitSpec& spec) {
  spec.validate();
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < d.records.size(); ++i) strata[stratum_of(d.records[i], spec.stratify_by)].push_back(i);

  // 0 = train, 1 = val, 2 = test
  std::vector<int> assignment(d.records.size(), -1);
  for (auto& [name, idx] : strata) {
    if (idx.size() < 3) fail("stratum '", name, "' has ", idx.size(), " records; need at least 3 to populate every split");
    // Seed per stratum so results do not depend on which other strata exist.
    Rng rng(mix64(spec.seed ^ fnv1a64(name)));
    rng.shuffle(idx);
    const auto sizes = split_sizes(idx.size(), spec);
    for (std::size_t k = 0; k < idx.size(); ++k)
      assignment[idx[k]] = k < sizes.train ? 0 : (k < sizes.train + sizes.val ? 1 : 2);
  }

  DatasetSplits out;
  for (Dataset* part : {&out.train, &out.val, &out.test}) {
    part->pool = d.pool;
    part->provenance = d.provenance;
  }
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    Dataset* part = assignment[i] == 0 ? &out.train : (assignment[i] == 1 ? &out.val : &out.test);
    part->records.push_back(d.records[i]);
  }
  return out;
}

}  // namespace llmrank
