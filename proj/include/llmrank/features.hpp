#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "llmrank/common.hpp"
#include "llmrank/dataset.hpp"
#include "llmrank/proxy.hpp"

namespace llmrank {

enum class FeatureGroup {
  difficulty,
  task_type,
  knowledge,
  output_format,
  scenario_complexity,
  routing_hints,
  quality_indicators,
  proxy,
};

inline constexpr std::array<FeatureGroup, 8> kAllFeatureGroups = {
    FeatureGroup::difficulty,          FeatureGroup::task_type,     FeatureGroup::knowledge,
    FeatureGroup::output_format,       FeatureGroup::scenario_complexity, FeatureGroup::routing_hints,
    FeatureGroup::quality_indicators,  FeatureGroup::proxy,
};

inline std::string_view group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::difficulty: return "difficulty";
    case FeatureGroup::task_type: return "task_type";
    case FeatureGroup::knowledge: return "knowledge";
    case FeatureGroup::output_format: return "output_format";
    case FeatureGroup::scenario_complexity: return "scenario_complexity";
    case FeatureGroup::routing_hints: return "routing_hints";
    case FeatureGroup::quality_indicators: return "quality_indicators";
    case FeatureGroup::proxy: return "proxy";
  }
  return "unknown";
}

inline FeatureGroup group_from_name(std::string_view name) {
  for (auto g : kAllFeatureGroups)
    if (group_name(g) == name) return g;
  fail("unknown feature group '", name, "'");
}

struct FeatureEntry {
  std::string name;
  FeatureGroup group;
  double lo = 0.0;
  double hi = 1.0;

  bool operator==(const FeatureEntry&) const = default;
};

class FeatureSchema {
 public:
  static constexpr std::uint32_t kVersion = 1;

  FeatureSchema() = default;
  FeatureSchema(std::uint32_t version, std::vector<FeatureEntry> entries)
      : version_(version), entries_(std::move(entries)) {
    std::unordered_set<std::string> seen;
    for (const auto& e : entries_) {
      if (!seen.insert(e.name).second) fail("duplicate feature name '", e.name, "'");
      if (!(e.lo <= e.hi)) fail("feature '", e.name, "' has an empty range");
    }
  }

  [[nodiscard]] std::uint32_t version() const noexcept { return version_; }
  [[nodiscard]] std::size_t dim() const noexcept { return entries_.size(); }
  [[nodiscard]] const std::vector<FeatureEntry>& entries() const noexcept { return entries_; }
  [[nodiscard]] const FeatureEntry& entry(std::size_t i) const { return entries_.at(i); }

  [[nodiscard]] std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].name == name) return i;
    fail("feature '", name, "' not in schema");
  }

  [[nodiscard]] std::vector<std::size_t> group_indices(FeatureGroup g) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].group == g) out.push_back(i);
    return out;
  }

  [[nodiscard]] std::vector<std::string> proxy_categories() const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
      if (e.group == FeatureGroup::proxy) out.push_back(e.name.substr(std::string_view("proxy_").size()));
    return out;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : entries_)
      entries.push_back({{"name", e.name}, {"group", group_name(e.group)}, {"range", {e.lo, e.hi}}});
    return {{"version", version_}, {"dim", dim()}, {"entries", entries}};
  }

  static FeatureSchema from_json(const nlohmann::json& j) {
    try {
      std::vector<FeatureEntry> entries;
      for (const auto& e : j.at("entries")) {
        const auto& range = e.at("range");
        entries.push_back({e.at("name").get<std::string>(), group_from_name(e.at("group").get<std::string>()),
                           range.at(0).get<double>(), range.at(1).get<double>()});
      }
      return FeatureSchema(j.at("version").get<std::uint32_t>(), std::move(entries));
    } catch (const nlohmann::json::exception& e) {
      fail("malformed feature schema: ", e.what());
    }
  }

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::uint32_t version_ = kVersion;
  std::vector<FeatureEntry> entries_;
};

/// Benchmark categories of the reference corpus after filtering.
inline const std::vector<std::string>& default_proxy_categories() {
  static const std::vector<std::string> names = {
      "abstract2title", "arc_challenge", "bias_detection", "consensus", "gsm8k",
      "hellaswag",      "mbpp",          "mmlu",           "mt_bench",  "winogrande",
  };
  return names;
}

/// Feature schema version 1. The proxy block has one entry per category.
inline FeatureSchema default_schema(const std::vector<std::string>& proxy_categories = default_proxy_categories()) {
  using G = FeatureGroup;
  std::vector<FeatureEntry> e = {
      {"char_length", G::difficulty},
      {"sentence_count", G::difficulty},
      {"mean_word_length", G::difficulty},
      {"digit_density", G::difficulty},
      {"nesting_depth", G::difficulty},
      {"multiple_choice", G::task_type},
      {"what_happens_next", G::task_type},
      {"narrative", G::task_type},
      {"math", G::task_type},
      {"code", G::task_type},
      {"proper_noun_density", G::knowledge},
      {"temporal", G::knowledge},
      {"domain_science", G::knowledge},
      {"domain_biology", G::knowledge},
      {"domain_law", G::knowledge},
      {"domain_history", G::knowledge},
      {"domain_medicine", G::knowledge},
      {"single_char_answer", G::output_format},
      {"free_form", G::output_format},
      {"deterministic_output", G::output_format},
      {"option_count", G::scenario_complexity},
      {"ambiguity", G::scenario_complexity},
      {"context_length", G::scenario_complexity},
      {"reasoning_needed", G::routing_hints},
      {"context_needed", G::routing_hints},
      {"knowledge_needed", G::routing_hints},
      {"normalized_length", G::quality_indicators},
      {"is_english", G::quality_indicators},
  };
  for (const auto& c : proxy_categories) e.push_back({"proxy_" + c, G::proxy});
  return FeatureSchema(FeatureSchema::kVersion, std::move(e));
}

// ---------------------------------------------------------------------------
// Lexicons
// ---------------------------------------------------------------------------

inline constexpr std::array<std::string_view, 5> kLexiconDomains = {"science", "biology", "law", "history", "medicine"};

struct Lexicons {
  // Indexed like kLexiconDomains.
  std::array<std::unordered_set<std::string>, 5> words;

  static const Lexicons& builtin();

  static Lexicons load_dir(const std::filesystem::path& dir) {
    Lexicons lex;
    for (std::size_t d = 0; d < kLexiconDomains.size(); ++d) {
      const auto path = dir / (std::string(kLexiconDomains[d]) + ".txt");
      std::ifstream in(path);
      if (!in) fail_io("cannot open lexicon ", path.string());
      std::string line;
      while (std::getline(in, line)) {
        const auto w = to_lower(trim(line));
        if (!w.empty()) lex.words[d].insert(w);
      }
    }
    return lex;
  }

  bool operator==(const Lexicons&) const = default;
};

inline const Lexicons& Lexicons::builtin() {
  static const Lexicons lex = [] {
    Lexicons l;
    l.words[0] = {"atom",        "atoms",     "energy",    "force",       "gravity",   "physics",  "chemistry",
                  "chemical",    "molecule",  "molecules", "electron",    "electrons", "experiment", "hypothesis",
                  "velocity",    "acceleration", "mass",   "temperature", "reaction",  "element",  "elements",
                  "compound",    "magnetic",  "electric",  "planet",      "scientists", "scientist"};
    l.words[1] = {"cell",       "cells",      "organism",  "organisms", "prokaryotic", "eukaryotic", "bacteria",
                  "virus",      "dna",        "rna",       "gene",      "genes",       "protein",    "proteins",
                  "enzyme",     "species",    "evolution", "membrane",  "ribosomes",   "lysosomes",  "chloroplasts",
                  "mitochondria", "photosynthesis", "ecosystem", "tissue"};
    l.words[2] = {"law",          "legal",          "court",    "judge",     "jury",     "statute",
                  "contract",     "plaintiff",      "defendant", "constitution", "constitutional", "attorney",
                  "liability",    "tort",           "lawsuit",  "verdict",   "regulation", "rights"};
    l.words[3] = {"history", "historical", "war",      "empire",   "century",      "ancient",   "revolution", "dynasty",
                  "king",    "queen",      "treaty",   "colonial", "medieval",     "civilization", "president",
                  "independence"};
    l.words[4] = {"patient",  "patients", "disease",   "diagnosis", "symptom",  "symptoms",
                  "treatment", "clinical", "drug",     "dose",      "therapy",  "infection",
                  "surgery",  "physician", "medical",  "medication", "syndrome", "chronic"};
    return l;
  }();
  return lex;
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

struct FeatureVector {
  std::uint32_t schema_version = FeatureSchema::kVersion;
  std::vector<double> values;
};

namespace detail {

inline bool contains(std::string_view haystack, std::string_view needle) {
  return haystack.find(needle) != std::string_view::npos;
}

inline bool contains_any(std::string_view haystack, std::initializer_list<std::string_view> needles) {
  for (auto n : needles)
    if (contains(haystack, n)) return true;
  return false;
}

inline double capped(double v, double cap) { return std::min(v, cap) / cap; }

// Distinct option letters A..H found at line starts as "A)", "A.", "A:" or "(A)".
inline std::set<char> option_letters(std::string_view text) {
  std::set<char> letters;
  for (const auto& raw : split(text, '\n')) {
    const auto line = trim(raw);
    if (line.size() >= 2 && line[0] >= 'A' && line[0] <= 'H' && (line[1] == ')' || line[1] == '.' || line[1] == ':'))
      letters.insert(line[0]);
    else if (line.size() >= 3 && line[0] == '(' && line[1] >= 'A' && line[1] <= 'H' && line[2] == ')')
      letters.insert(line[1]);
  }
  return letters;
}

inline std::size_t count_sentences(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    // One terminator per run, counted only when followed by space or end.
    while (i + 1 < text.size() && (text[i + 1] == '.' || text[i + 1] == '!' || text[i + 1] == '?')) ++i;
    if (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))) ++n;
  }
  if (n == 0 && !trim(text).empty()) n = 1;
  return n;
}

inline std::size_t max_nesting(std::string_view text) {
  std::size_t depth = 0, best = 0;
  for (char c : text) {
    if (c == '(' || c == '[' || c == '{') best = std::max(best, ++depth);
    else if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
  }
  return best;
}

inline std::size_t count_math_operators(std::string_view text) {
  std::size_t n = 0;
  const auto neighbour_digit = [&](std::size_t i, int step) {
    for (auto k = static_cast<std::ptrdiff_t>(i) + step; k >= 0 && k < static_cast<std::ptrdiff_t>(text.size()); k += step) {
      const char c = text[static_cast<std::size_t>(k)];
      if (c == ' ') continue;
      return c >= '0' && c <= '9';
    }
    return false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '+' || c == '*' || c == '=' || c == '^' || c == '%') ++n;
    else if ((c == '-' || c == '/') && neighbour_digit(i, -1) && neighbour_digit(i, +1)) ++n;
  }
  for (std::string_view sym : {"\xC3\x97", "\xC3\xB7"})  // multiplication and division signs
    for (auto pos = text.find(sym); pos != std::string_view::npos; pos = text.find(sym, pos + 1)) ++n;
  return n;
}

// Characters of passage text preceding the final question sentence.
inline std::size_t passage_length(std::string_view text) {
  const auto q = text.rfind('?');
  std::size_t start = 0;
  if (q != std::string_view::npos) {
    const auto boundary = text.find_last_of(".!?\n", q == 0 ? 0 : q - 1);
    start = (boundary == std::string_view::npos || q == 0) ? 0 : boundary + 1;
  } else {
    const auto para = text.rfind("\n\n");
    start = para == std::string_view::npos ? 0 : para;
  }
  return trim(text.substr(0, start)).size();
}

struct Word {
  std::string_view text;
  bool sentence_start;
};

// Case-preserving words with a flag for sentence/line-initial position.
inline std::vector<Word> words_with_position(std::string_view text) {
  std::vector<Word> out;
  bool at_start = true;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      const auto begin = i;
      while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
      out.push_back({text.substr(begin, i - begin), at_start});
      at_start = false;
      continue;
    }
    if (c == '.' || c == '!' || c == '?' || c == '\n' || c == ':' || c == ')' || c == '"') at_start = true;
    ++i;
  }
  return out;
}

inline bool is_english_text(std::string_view text) {
  std::size_t ascii_letters = 0, other = 0;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) ++ascii_letters;
    else if (c >= 0xC0) ++other;  // UTF-8 lead byte of a non-ASCII code point
  }
  if (ascii_letters + other == 0) return true;
  return static_cast<double>(ascii_letters) / static_cast<double>(ascii_letters + other) >= 0.9;
}

}  // namespace detail

/// Maps a prompt onto `schema`. Entries are located by name, so any schema
/// whose names are drawn from the version-1 vocabulary is supported. The proxy
/// block is filled from `proxy` when given and left at zero otherwise.
inline FeatureVector extract_features(std::string_view prompt, const FeatureSchema& schema,
                                      const ProxyModel* proxy = nullptr, const Lexicons& lex = Lexicons::builtin()) {
  using namespace detail;
  if (trim(prompt).empty()) fail("extract_features: empty prompt");

  const std::string lower = to_lower(prompt);
  const auto tokens = tokenize(prompt);
  const double n_tok = static_cast<double>(std::max<std::size_t>(tokens.size(), 1));
  std::unordered_map<std::string_view, std::size_t> tf;
  for (const auto& t : tokens) ++tf[t];
  const auto has_token = [&](std::initializer_list<std::string_view> ws) {
    for (auto w : ws)
      if (tf.contains(w)) return true;
    return false;
  };
  const auto count_tokens = [&](std::initializer_list<std::string_view> ws) {
    std::size_t n = 0;
    for (auto w : ws)
      if (auto it = tf.find(w); it != tf.end()) n += it->second;
    return n;
  };

  std::unordered_map<std::string, double> f;

  // difficulty
  const double norm_len = std::min(static_cast<double>(prompt.size()) / 4000.0, 1.0);
  f["char_length"] = norm_len;
  f["sentence_count"] = capped(static_cast<double>(count_sentences(prompt)), 32.0);
  double word_chars = 0.0;
  for (const auto& t : tokens) word_chars += static_cast<double>(t.size());
  f["mean_word_length"] = tokens.empty() ? 0.0 : capped(word_chars / n_tok, 12.0);
  std::size_t digits = 0;
  for (char c : prompt) digits += (c >= '0' && c <= '9');
  f["digit_density"] = static_cast<double>(digits) / static_cast<double>(prompt.size());
  f["nesting_depth"] = capped(static_cast<double>(max_nesting(prompt)), 8.0);

  // task type
  const auto options = option_letters(prompt);
  const bool multiple_choice = options.size() >= 2 && options.contains('A') && options.contains('B');
  f["multiple_choice"] = multiple_choice;
  f["what_happens_next"] = contains_any(lower, {"what happens next", "most likely"});
  {
    static const std::unordered_set<std::string_view> pronouns = {"he", "she", "they", "i", "we", "his",
                                                                  "her", "him", "them", "their", "my", "our"};
    static const std::unordered_set<std::string_view> past = {"was", "were", "had", "did", "went", "said",
                                                              "came", "saw", "took", "made", "got", "told"};
    std::size_t np = 0, npast = 0;
    for (std::size_t i = 0; i < std::min<std::size_t>(tokens.size(), 40); ++i) {
      const auto& t = tokens[i];
      np += pronouns.contains(t);
      npast += past.contains(t) || (t.size() > 4 && t.ends_with("ed"));
    }
    f["narrative"] = np >= 2 && npast >= 1;
  }
  const bool math = count_math_operators(prompt) >= 2 || contains_any(lower, {"how many", "how much"});
  f["math"] = math;
  f["code"] = contains(lower, "def ") || contains(prompt, "`") || has_token({"return", "function"});

  // knowledge
  {
    const auto words = words_with_position(prompt);
    std::size_t caps = 0;
    for (const auto& w : words)
      if (!w.sentence_start && w.text.size() > 1 && w.text[0] >= 'A' && w.text[0] <= 'Z') ++caps;
    f["proper_noun_density"] = words.empty() ? 0.0 : static_cast<double>(caps) / static_cast<double>(words.size());
  }
  {
    bool year = false;
    for (const auto& t : tokens) {
      if (t.size() != 4 || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
      const int y = std::stoi(t);
      if (y >= 1000 && y <= 2099) year = true;
    }
    f["temporal"] = year || has_token({"before", "after", "when", "during", "century"});
  }
  bool any_domain = false;
  for (std::size_t d = 0; d < kLexiconDomains.size(); ++d) {
    std::size_t hits = 0;
    for (const auto& [t, n] : tf)
      if (lex.words[d].contains(std::string(t))) hits += n;
    any_domain = any_domain || hits > 0;
    f["domain_" + std::string(kLexiconDomains[d])] = capped(static_cast<double>(hits), 3.0);
  }

  // output format
  const auto trimmed_lower = trim(lower);
  f["single_char_answer"] = contains_any(lower, {"single choice", "single letter", "only the letter"}) ||
                            trimmed_lower.ends_with("answer:");
  f["free_form"] = !multiple_choice;
  f["deterministic_output"] =
      contains_any(lower, {"without explanation", "print only", "only output", "answer only", "no explanation"});

  // scenario complexity
  f["option_count"] = capped(static_cast<double>(options.size()), 8.0);
  f["ambiguity"] = static_cast<double>(count_tokens({"might", "could", "probably", "possibly", "perhaps", "maybe",
                                                     "likely", "unlikely", "may", "seem", "seems"})) /
                   n_tok;
  const auto passage = passage_length(prompt);
  f["context_length"] = std::min(static_cast<double>(passage) / 4000.0, 1.0);

  // routing hints
  f["reasoning_needed"] = math || has_token({"therefore", "thus", "hence", "step", "steps"});
  f["context_needed"] = passage >= 200;
  f["knowledge_needed"] = any_domain;

  // quality indicators
  f["normalized_length"] = norm_len;
  f["is_english"] = is_english_text(prompt);

  if (proxy) {
    const auto cats = schema.proxy_categories();
    if (cats != proxy->category_names) fail("proxy categories do not match the feature schema's proxy block");
    const auto probs = proxy->predict(prompt);
    for (std::size_t c = 0; c < cats.size(); ++c) f["proxy_" + cats[c]] = probs[c];
  }

  FeatureVector out;
  out.schema_version = schema.version();
  out.values.resize(schema.dim(), 0.0);
  for (std::size_t i = 0; i < schema.dim(); ++i) {
    const auto& e = schema.entry(i);
    if (auto it = f.find(e.name); it != f.end()) {
      out.values[i] = it->second;
    } else if (e.group != FeatureGroup::proxy) {
      fail("feature '", e.name, "' has no extractor in schema version ", FeatureSchema::kVersion);
    }
    const double v = out.values[i];
    if (!std::isfinite(v) || v < e.lo || v > e.hi) fail("feature '", e.name, "' = ", v, " outside its declared range");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset featurization and the LLMRFEAT matrix file
// ---------------------------------------------------------------------------

struct FeatureManifest {
  std::uint32_t schema_version = FeatureSchema::kVersion;
  std::size_t dim = 0;
  std::size_t rows = 0;
  std::optional<std::uint64_t> proxy_fingerprint;
  std::optional<std::uint64_t> proxy_train_hash;

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j{{"schema_version", schema_version}, {"dim", dim}, {"rows", rows}};
    j["proxy_fingerprint"] = proxy_fingerprint ? nlohmann::json(hex64(*proxy_fingerprint)) : nlohmann::json(nullptr);
    j["proxy_train_split_hash"] = proxy_train_hash ? nlohmann::json(hex64(*proxy_train_hash)) : nlohmann::json(nullptr);
    return j;
  }
};

struct FeatureMatrix {
  std::uint32_t schema_version = FeatureSchema::kVersion;
  std::size_t dim = 0;
  std::vector<std::string> sample_ids;
  std::vector<double> values;  // rows() x dim, row-major

  [[nodiscard]] std::size_t rows() const noexcept { return sample_ids.size(); }
  [[nodiscard]] std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

struct FeaturizeResult {
  FeatureMatrix matrix;
  FeatureManifest manifest;
};

inline FeaturizeResult featurize_dataset(const Dataset& d, const FeatureSchema& schema, const ProxyModel* proxy = nullptr,
                                         const Lexicons& lex = Lexicons::builtin()) {
  FeaturizeResult res;
  auto& m = res.matrix;
  m.schema_version = schema.version();
  m.dim = schema.dim();
  m.sample_ids.reserve(d.size());
  for (const auto& r : d.records) m.sample_ids.push_back(r.sample_id);
  m.values.assign(d.size() * m.dim, 0.0);

  parallel_for(d.size(), [&](std::size_t i) {
    const auto& r = d.records[i];
    try {
      const auto fv = extract_features(r.prompt, schema, proxy, lex);
      std::copy(fv.values.begin(), fv.values.end(), m.values.begin() + static_cast<std::ptrdiff_t>(i * m.dim));
    } catch (const ValidationError& e) {
      fail("sample '", r.sample_id, "': ", e.what());
    }
  });

  res.manifest.schema_version = schema.version();
  res.manifest.dim = m.dim;
  res.manifest.rows = m.rows();
  if (proxy) {
    res.manifest.proxy_fingerprint = proxy->fingerprint();
    res.manifest.proxy_train_hash = proxy->train_split_hash;
  }
  return res;
}

inline void write_feature_matrix(const FeatureMatrix& m, std::ostream& out) {
  BinaryWriter w(out);
  w.bytes("LLMRFEAT");
  w.u32(m.schema_version);
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.dim));
  for (double v : m.values) w.f32(static_cast<float>(v));
  for (const auto& id : m.sample_ids) {
    out << id << '\n';
  }
}

inline void write_feature_matrix(const FeatureMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot write feature file ", path);
  write_feature_matrix(m, out);
}

inline FeatureMatrix read_feature_matrix(const std::string& path) {
  const auto buf = read_file_bytes(path);
  BinaryReader r(buf);
  if (!r.has(8) || r.bytes(8) != "LLMRFEAT") fail("feature file ", path, ": bad magic");
  FeatureMatrix m;
  m.schema_version = r.u32();
  const auto n = r.u32();
  m.dim = r.u32();
  m.values.resize(static_cast<std::size_t>(n) * m.dim);
  if (!r.has(m.values.size() * 4)) fail("feature file ", path, ": truncated payload");
  for (auto& v : m.values) v = r.f32();
  const auto ids = split(r.bytes(r.remaining()), '\n');
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) m.sample_ids.push_back(ids[i]);
  if (m.sample_ids.size() != n || !ids.back().empty())
    fail("feature file ", path, ": expected ", n, " sample ids, found ", m.sample_ids.size());
  return m;
}

}  // namespace llmrank
