#pragma once

#include <cmath>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "llmrank/common.hpp"
#include "llmrank/dataset.hpp"

namespace llmrank {

struct EmbeddingVector {
  std::vector<float> values;
  [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }
};

/// Immutable-after-build map from sample_id to a fixed-width vector. Lookup of
/// an unknown id throws; there is no zero-vector fallback.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::size_t dim, std::string provider_tag) : dim_(dim), provider_tag_(std::move(provider_tag)) {}

  void add(std::string id, std::vector<float> values) {
    if (values.size() != dim_) fail("embedding for '", id, "' has dim ", values.size(), ", store dim is ", dim_);
    for (float v : values)
      if (!std::isfinite(v)) fail("embedding for '", id, "' contains a non-finite value");
    if (index_.contains(id)) fail("duplicate embedding id '", id, "'");
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    data_.insert(data_.end(), values.begin(), values.end());
  }

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
  [[nodiscard]] const std::string& provider_tag() const noexcept { return provider_tag_; }
  [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }
  [[nodiscard]] bool contains(const std::string& id) const { return index_.contains(id); }

  [[nodiscard]] std::span<const float> at(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) fail("no embedding for sample_id '", id, "'");
    return {data_.data() + it->second * dim_, dim_};
  }

  [[nodiscard]] std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

 private:
  std::size_t dim_ = 0;
  std::string provider_tag_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
};

/// Signed feature hashing of word unigrams and bigrams, L2-normalized.
inline EmbeddingVector hash_embed(std::string_view prompt, std::size_t dim) {
  if (dim < 16) fail("hash_embed: dim must be >= 16, got ", dim);
  const auto tokens = tokenize(prompt);
  if (tokens.empty()) fail("hash_embed: prompt has no tokens");
  std::vector<double> acc(dim, 0.0);
  const auto add = [&](std::string_view key) {
    const std::uint64_t h = mix64(fnv1a64(key));
    acc[(h >> 1) % dim] += (h & 1) ? 1.0 : -1.0;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(tokens[i]);
    if (i + 1 < tokens.size()) add(tokens[i] + ' ' + tokens[i + 1]);
  }
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  EmbeddingVector out;
  out.values.resize(dim);
  if (norm == 0.0) {
    // Every bucket cancelled; fall back to the unsigned first-token bucket.
    out.values[(mix64(fnv1a64(tokens.front())) >> 1) % dim] = 1.0f;
    return out;
  }
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < dim; ++i) out.values[i] = static_cast<float>(acc[i] / norm);
  return out;
}

inline std::string hash_provider_tag(std::size_t dim) { return "hash:" + std::to_string(dim); }

inline EmbeddingStore build_hash_store(const Dataset& d, std::size_t dim) {
  std::vector<EmbeddingVector> vecs(d.size());
  parallel_for(d.size(), [&](std::size_t i) {
    try {
      vecs[i] = hash_embed(d.records[i].prompt, dim);
    } catch (const ValidationError& e) {
      fail("sample '", d.records[i].sample_id, "': ", e.what());
    }
  });
  EmbeddingStore store(dim, hash_provider_tag(dim));
  for (std::size_t i = 0; i < d.size(); ++i) store.add(d.records[i].sample_id, std::move(vecs[i].values));
  return store;
}

// File layout: "LLMREMB1", u32 dim, u32 count, then per entry
// u16 id_len, id bytes, dim x f32. All integers little-endian.

inline void save_embeddings(const EmbeddingStore& s, std::ostream& out) {
  BinaryWriter w(out);
  w.bytes("LLMREMB1");
  w.u32(static_cast<std::uint32_t>(s.dim()));
  w.u32(static_cast<std::uint32_t>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& id = s.ids()[i];
    if (id.size() > 0xFFFF) fail("sample_id too long for embedding file: ", id.size(), " bytes");
    w.u16(static_cast<std::uint16_t>(id.size()));
    w.bytes(id);
    for (float v : s.row(i)) w.f32(v);
  }
}

inline void save_embeddings(const EmbeddingStore& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot write embedding file ", path);
  save_embeddings(s, out);
}

inline EmbeddingStore parse_embeddings(std::string_view buf, const std::string& tag = "file") {
  BinaryReader r(buf);
  if (!r.has(16) || r.bytes(8) != "LLMREMB1") fail("embedding file: magic mismatch");
  const auto dim = r.u32();
  const auto count = r.u32();
  if (dim == 0) fail("embedding file: dim is 0");
  EmbeddingStore store(dim, tag);
  for (std::uint32_t k = 0; k < count; ++k) {
    if (!r.has(2)) fail("embedding file: truncated payload at entry ", k);
    const auto len = r.u16();
    if (!r.has(len + static_cast<std::size_t>(dim) * 4)) fail("embedding file: truncated payload at entry ", k);
    std::string id(r.bytes(len));
    std::vector<float> v(dim);
    for (auto& x : v) x = r.f32();
    store.add(std::move(id), std::move(v));
  }
  if (r.remaining() != 0) fail("embedding file: ", r.remaining(), " trailing bytes after ", count, " entries");
  return store;
}

inline EmbeddingStore load_embeddings(const std::string& path) {
  return parse_embeddings(read_file_bytes(path), "file:" + path);
}

}  // namespace llmrank
