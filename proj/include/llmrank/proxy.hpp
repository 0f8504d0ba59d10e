#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "llmrank/common.hpp"
#include "llmrank/dataset.hpp"

namespace llmrank {

using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

/// Hashed bag of lowercased unigrams, L2-normalized. Entries are sorted by
/// bucket so downstream dot products are order-stable.
inline SparseVector hashed_bag_of_words(std::string_view text, std::uint32_t dim) {
  std::map<std::uint32_t, double> buckets;
  for (const auto& tok : tokenize(text)) buckets[static_cast<std::uint32_t>(mix64(fnv1a64(tok)) % dim)] += 1.0;
  double norm = 0.0;
  for (const auto& [_, v] : buckets) norm += v * v;
  norm = std::sqrt(norm);
  SparseVector out;
  out.reserve(buckets.size());
  for (const auto& [k, v] : buckets) out.emplace_back(k, v / norm);
  return out;
}

inline void softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : z) v /= sum;
}

/// Multinomial logistic regression over hashed bag-of-words that predicts the
/// benchmark category of a prompt. Its probability vector is the proxy block
/// of the feature vector.
struct ProxyModel {
  std::uint32_t hash_dim = 0;
  std::vector<std::string> category_names;
  std::vector<double> weights;  // category_names.size() x hash_dim, row-major
  std::vector<double> bias;
  std::uint64_t train_split_hash = 0;

  [[nodiscard]] std::size_t num_categories() const noexcept { return category_names.size(); }

  [[nodiscard]] std::vector<double> logits(const SparseVector& x) const {
    std::vector<double> z(bias);
    for (std::size_t c = 0; c < z.size(); ++c) {
      const double* row = weights.data() + c * hash_dim;
      for (const auto& [k, v] : x) z[c] += row[k] * v;
    }
    return z;
  }

  [[nodiscard]] std::vector<double> predict(std::string_view prompt) const {
    auto z = logits(hashed_bag_of_words(prompt, hash_dim));
    softmax_inplace(z);
    return z;
  }

  [[nodiscard]] std::size_t predict_class(std::string_view prompt) const {
    const auto p = predict(prompt);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }

  [[nodiscard]] std::uint64_t fingerprint() const {
    std::uint64_t h = fnv1a64(std::to_string(hash_dim));
    for (const auto& n : category_names) h = fnv1a64(n + "\n", h);
    for (double w : weights) h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&w), sizeof w), h);
    for (double b : bias) h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&b), sizeof b), h);
    return h;
  }
};

struct ProxyTrainOptions {
  double learning_rate = 0.5;
  double l2 = 1e-5;
  std::uint64_t seed = 0;
};

/// Trains the proxy classifier with per-sample SGD. Categories are the sorted
/// distinct benchmark labels of `train`.
inline ProxyModel train_proxy(const Dataset& train, std::uint32_t hash_dim, int epochs,
                              const ProxyTrainOptions& opts = {}) {
  if (train.empty()) fail("train_proxy: empty training set");
  if (hash_dim < 64) fail("train_proxy: hash_dim must be >= 64, got ", hash_dim);
  if (epochs < 1) fail("train_proxy: epochs must be >= 1");

  const auto counts = category_counts(train);
  if (counts.size() < 2) fail("train_proxy: need at least 2 categories, got ", counts.size());

  ProxyModel model;
  model.hash_dim = hash_dim;
  std::map<std::string, std::size_t> index;
  for (const auto& [name, _] : counts) {
    index[name] = model.category_names.size();
    model.category_names.push_back(name);
  }
  const std::size_t k = model.num_categories();
  model.weights.assign(k * hash_dim, 0.0);
  model.bias.assign(k, 0.0);
  model.train_split_hash = train.id_hash();

  std::vector<SparseVector> xs;
  std::vector<std::size_t> ys;
  xs.reserve(train.size());
  for (const auto& r : train.records) {
    xs.push_back(hashed_bag_of_words(r.prompt, hash_dim));
    ys.push_back(index.at(r.benchmark));
  }

  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(opts.seed);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    const double lr = opts.learning_rate / (1.0 + 0.1 * epoch);
    for (std::size_t i : order) {
      auto p = model.logits(xs[i]);
      softmax_inplace(p);
      p[ys[i]] -= 1.0;
      for (std::size_t c = 0; c < k; ++c) {
        double* row = model.weights.data() + c * hash_dim;
        for (const auto& [b, v] : xs[i]) row[b] -= lr * (p[c] * v + opts.l2 * row[b]);
        model.bias[c] -= lr * p[c];
      }
    }
  }
  return model;
}

inline double proxy_accuracy(const ProxyModel& model, const Dataset& d) {
  if (d.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : d.records) {
    const auto c = model.predict_class(r.prompt);
    if (model.category_names[c] == r.benchmark) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

inline void save_proxy(const ProxyModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot write proxy file ", path);
  BinaryWriter w(out);
  w.bytes("LLMRPRXY");
  w.u32(1);
  w.u32(m.hash_dim);
  w.u32(static_cast<std::uint32_t>(m.category_names.size()));
  for (const auto& n : m.category_names) {
    w.u16(static_cast<std::uint16_t>(n.size()));
    w.bytes(n);
  }
  w.u64(m.train_split_hash);
  for (double v : m.weights) w.f64(v);
  for (double v : m.bias) w.f64(v);
}

inline ProxyModel load_proxy(const std::string& path) {
  const std::string buf = read_file_bytes(path);
  BinaryReader r(buf);
  if (r.bytes(8) != "LLMRPRXY") fail("proxy file ", path, ": bad magic");
  if (const auto v = r.u32(); v != 1) fail("proxy file ", path, ": unsupported version ", v);
  ProxyModel m;
  m.hash_dim = r.u32();
  const auto k = r.u32();
  for (std::uint32_t c = 0; c < k; ++c) m.category_names.emplace_back(r.bytes(r.u16()));
  m.train_split_hash = r.u64();
  m.weights.resize(static_cast<std::size_t>(k) * m.hash_dim);
  for (auto& v : m.weights) v = r.f64();
  m.bias.resize(k);
  for (auto& v : m.bias) v = r.f64();
  return m;
}

}  // namespace llmrank
