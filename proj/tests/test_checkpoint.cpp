#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"

using namespace llmrank;
using testing_support::TempDir;

namespace {

Checkpoint sample_checkpoint() {
  Checkpoint ck;
  ck.params = init_params<double>(5, 8, 4, 3, 17);
  ck.params.b2_fuse(1, 0) = 0.125;
  ck.params.feature_schema_version = 1;
  ck.params.pool_fingerprint = 0x1234abcd5678ef00ULL;
  ck.lambda = 1e3;
  ck.tau = 0.5;
  ck.dropout = 0.1;
  ck.feature_means = {0.1, 0.2, 0.3, 0.4, 0.5};
  return ck;
}

}  // namespace

TEST(Checkpoint, RoundTripRestoresFloat32Values) {
  const auto ck = sample_checkpoint();
  const auto back = parse_checkpoint(checkpoint_bytes(ck));
  EXPECT_EQ(back.lambda, ck.lambda);
  EXPECT_EQ(back.tau, ck.tau);
  EXPECT_EQ(back.dropout, ck.dropout);
  EXPECT_EQ(back.params.pool_fingerprint, ck.params.pool_fingerprint);
  EXPECT_EQ(back.params.feature_schema_version, 1u);
  for (std::size_t k = 0; k < kNumTensors; ++k) {
    const auto& a = *ck.params.tensors()[k];
    const auto& b = *back.params.tensors()[k];
    ASSERT_EQ(a.rows(), b.rows());
    ASSERT_EQ(a.cols(), b.cols());
    EXPECT_EQ(b, a.cast<float>().cast<double>()) << kTensorNames[k];
  }
  ASSERT_EQ(back.feature_means.size(), 5u);
  EXPECT_EQ(back.feature_means[2], static_cast<double>(0.3f));
}

TEST(Checkpoint, ResaveIsByteIdentical) {
  const auto bytes = checkpoint_bytes(sample_checkpoint());
  EXPECT_EQ(checkpoint_bytes(parse_checkpoint(bytes)), bytes);
}

TEST(Checkpoint, FileRoundTrip) {
  TempDir dir("ckpt");
  const auto ck = sample_checkpoint();
  save_checkpoint(ck, dir.file("c.bin"));
  EXPECT_EQ(checkpoint_bytes(load_checkpoint(dir.file("c.bin"))), checkpoint_bytes(ck));
  EXPECT_THROW(load_checkpoint(dir.file("missing.bin")), IoError);
}

TEST(Checkpoint, CorruptionIsDetected) {
  const auto bytes = checkpoint_bytes(sample_checkpoint());
  auto bad_magic = bytes;
  bad_magic[3] = '?';
  EXPECT_THROW(parse_checkpoint(bad_magic), Error);
  EXPECT_THROW(parse_checkpoint(bytes.substr(0, bytes.size() - 2)), Error);
  EXPECT_THROW(parse_checkpoint(bytes + "x"), Error);
  auto bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_THROW(parse_checkpoint(bad_version), Error);
}

TEST(Checkpoint, CompatibilityChecks) {
  const auto ck = sample_checkpoint();
  EXPECT_NO_THROW(check_compatible(ck, ck.params.pool_fingerprint, 1, 5, 8));
  EXPECT_THROW(check_compatible(ck, 0, 1, 5, 8), ValidationError);
  EXPECT_THROW(check_compatible(ck, ck.params.pool_fingerprint, 2, 5, 8), ValidationError);
  EXPECT_THROW(check_compatible(ck, ck.params.pool_fingerprint, 1, 6, 8), ValidationError);
  EXPECT_THROW(check_compatible(ck, ck.params.pool_fingerprint, 1, 5, 384), ValidationError);
}
