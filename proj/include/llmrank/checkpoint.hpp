#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "llmrank/common.hpp"
#include "llmrank/ranker.hpp"

namespace llmrank {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// A trained ranker plus the settings it was trained under. `feature_means`
/// holds the training-set mean of every feature and is the baseline used by
/// route attribution.
struct Checkpoint {
  RankerParams params;
  double lambda = 0.0;
  double tau = 0.5;
  double dropout = 0.1;
  std::vector<double> feature_means;
};

// Layout (little-endian):
//   "LLMRCKPT" u32 version
//   u32 h, u32 d_j, u32 d_t, u32 m, f64 lambda, f64 tau, f64 dropout
//   u32 feature_schema_version, u32 embedding_dim, u64 pool_fingerprint
//   12 x { u32 rows, u32 cols, rows*cols f32 row-major }   (RankerParams order)
//   u32 d_j, d_j x f32 feature means
inline void save_checkpoint(const Checkpoint& ck, std::ostream& out) {
  const auto& p = ck.params;
  p.validate();
  if (!ck.feature_means.empty() && ck.feature_means.size() != p.feature_dim())
    fail("feature_means has ", ck.feature_means.size(), " entries, expected ", p.feature_dim());
  BinaryWriter w(out);
  w.bytes("LLMRCKPT");
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(p.hidden()));
  w.u32(static_cast<std::uint32_t>(p.feature_dim()));
  w.u32(static_cast<std::uint32_t>(p.embedding_dim()));
  w.u32(static_cast<std::uint32_t>(p.num_models()));
  w.f64(ck.lambda);
  w.f64(ck.tau);
  w.f64(ck.dropout);
  w.u32(p.feature_schema_version);
  w.u32(static_cast<std::uint32_t>(p.embedding_dim()));
  w.u64(p.pool_fingerprint);
  for (const auto* t : p.tensors()) {
    w.u32(static_cast<std::uint32_t>(t->rows()));
    w.u32(static_cast<std::uint32_t>(t->cols()));
    for (Eigen::Index r = 0; r < t->rows(); ++r)
      for (Eigen::Index c = 0; c < t->cols(); ++c) w.f32(static_cast<float>((*t)(r, c)));
  }
  w.u32(static_cast<std::uint32_t>(p.feature_dim()));
  for (std::size_t k = 0; k < p.feature_dim(); ++k) w.f32(ck.feature_means.empty() ? 0.0f : static_cast<float>(ck.feature_means[k]));
}

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot write checkpoint ", path);
  save_checkpoint(ck, out);
}

inline std::string checkpoint_bytes(const Checkpoint& ck) {
  std::ostringstream oss;
  save_checkpoint(ck, oss);
  return oss.str();
}

inline Checkpoint parse_checkpoint(std::string_view buf) {
  BinaryReader r(buf);
  if (!r.has(8) || r.bytes(8) != "LLMRCKPT") fail("checkpoint: bad magic");
  if (const auto v = r.u32(); v != kCheckpointVersion) fail("checkpoint: unsupported format version ", v);
  const auto h = r.u32(), dj = r.u32(), dt = r.u32(), m = r.u32();
  Checkpoint ck;
  ck.lambda = r.f64();
  ck.tau = r.f64();
  ck.dropout = r.f64();
  ck.params = RankerParams::zeros(dj, dt, h, m);
  ck.params.feature_schema_version = r.u32();
  if (const auto emb = r.u32(); emb != dt) fail("checkpoint: embedding dim ", emb, " disagrees with d_t ", dt);
  ck.params.pool_fingerprint = r.u64();

  const auto shapes = ck.params.expected_shapes();
  auto ts = ck.params.tensors();
  for (std::size_t k = 0; k < kNumTensors; ++k) {
    const auto rows = r.u32(), cols = r.u32();
    if (rows != shapes[k].first || cols != shapes[k].second)
      fail("checkpoint: tensor ", kTensorNames[k], " has shape ", rows, "x", cols, ", expected ", shapes[k].first, "x",
           shapes[k].second);
    auto& t = *ts[k];
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = r.f32();
  }
  if (const auto n = r.u32(); n != dj) fail("checkpoint: feature mean block has ", n, " entries, expected ", dj);
  ck.feature_means.resize(dj);
  for (auto& v : ck.feature_means) v = r.f32();
  if (r.remaining() != 0) fail("checkpoint: ", r.remaining(), " trailing bytes");
  ck.params.validate();
  return ck;
}

inline Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(read_file_bytes(path)); }

/// Checks that a checkpoint can consume inputs built with this pool, feature
/// schema and embedding width.
inline void check_compatible(const Checkpoint& ck, std::uint64_t pool_fingerprint, std::uint32_t schema_version,
                             std::size_t feature_dim, std::size_t embedding_dim) {
  const auto& p = ck.params;
  if (p.pool_fingerprint != pool_fingerprint)
    fail("model pool fingerprint mismatch: checkpoint ", hex64(p.pool_fingerprint), ", pool ", hex64(pool_fingerprint));
  if (p.feature_schema_version != schema_version)
    fail("feature schema version mismatch: checkpoint ", p.feature_schema_version, ", schema ", schema_version);
  if (p.feature_dim() != feature_dim) fail("feature dim mismatch: checkpoint ", p.feature_dim(), ", inputs ", feature_dim);
  if (p.embedding_dim() != embedding_dim)
    fail("embedding dim mismatch: checkpoint ", p.embedding_dim(), ", inputs ", embedding_dim);
}

}  // namespace llmrank
