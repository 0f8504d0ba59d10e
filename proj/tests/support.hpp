#pragma once

// Reference implementations used as test oracles. They deliberately avoid the
// library's code paths: plain loops, long double accumulation, direct
// softmax instead of log-sum-exp.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "llmrank/llmrank.hpp"

namespace testing_support {

using Vec = std::vector<long double>;
using Grid = std::vector<Vec>;

inline Grid to_grid(const llmrank::Matrix<double>& m) {
  Grid g(static_cast<std::size_t>(m.rows()), Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
  return g;
}

// y = W x + b for one sample, W stored rows x cols.
inline Vec ref_affine(const llmrank::Matrix<double>& w, const llmrank::Matrix<double>& b, const Vec& x) {
  Vec y(static_cast<std::size_t>(w.rows()), 0.0L);
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    long double acc = b(r, 0);
    for (Eigen::Index c = 0; c < w.cols(); ++c) acc += static_cast<long double>(w(r, c)) * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
  return y;
}

inline Vec ref_relu(Vec v) {
  for (auto& x : v) x = x > 0 ? x : 0;
  return v;
}

/// Unbatched forward pass without dropout.
inline Vec ref_forward(const llmrank::RankerParams& p, const Vec& xf, const Vec& xt) {
  const Vec zf = ref_affine(p.w2_feat, p.b2_feat, ref_relu(ref_affine(p.w1_feat, p.b1_feat, xf)));
  const Vec zt = ref_affine(p.w2_text, p.b2_text, ref_relu(ref_affine(p.w1_text, p.b1_text, xt)));
  Vec z = zf;
  z.insert(z.end(), zt.begin(), zt.end());
  return ref_affine(p.w2_fuse, p.b2_fuse, ref_relu(ref_affine(p.w1_fuse, p.b1_fuse, z)));
}

inline Grid ref_forward_batch(const llmrank::RankerParams& p, const llmrank::Matrix<double>& f,
                              const llmrank::Matrix<double>& e) {
  const auto F = to_grid(f), E = to_grid(e);
  Grid out;
  for (std::size_t i = 0; i < F.size(); ++i) out.push_back(ref_forward(p, F[i], E[i]));
  return out;
}

inline long double ref_mse(const Grid& s, const Grid& u) {
  long double acc = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s[i].size(); ++j) {
      acc += (s[i][j] - u[i][j]) * (s[i][j] - u[i][j]);
      ++count;
    }
  return acc / static_cast<long double>(count);
}

inline Vec ref_softmax(const Vec& x, long double tau) {
  Vec e(x.size());
  long double z = 0;
  for (std::size_t j = 0; j < x.size(); ++j) z += e[j] = std::exp(x[j] / tau);
  for (auto& v : e) v /= z;
  return e;
}

inline long double ref_kl(const Vec& p, const Vec& q) {
  long double acc = 0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0) acc += p[j] * std::log(p[j] / q[j]);
  return acc;
}

inline long double ref_listwise(const Grid& s, const Grid& u, long double tau) {
  long double acc = 0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += ref_kl(ref_softmax(u[i], tau), ref_softmax(s[i], tau));
  return acc / static_cast<long double>(s.size());
}

inline long double ref_total_loss(const llmrank::RankerParams& p, const llmrank::Matrix<double>& f,
                                  const llmrank::Matrix<double>& e, const llmrank::Matrix<double>& u, double tau) {
  const auto s = ref_forward_batch(p, f, e);
  const auto U = to_grid(u);
  return ref_mse(s, U) + ref_listwise(s, U, tau);
}

inline llmrank::Matrix<double> random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& gen, double lo = -1,
                                             double hi = 1) {
  std::uniform_real_distribution<double> dist(lo, hi);
  llmrank::Matrix<double> m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(gen);
  return m;
}

/// Random parameters with every tensor, biases included, drawn uniformly.
inline llmrank::RankerParams random_params(std::size_t dj, std::size_t dt, std::size_t h, std::size_t m,
                                           std::mt19937_64& gen) {
  auto p = llmrank::RankerParams::zeros(dj, dt, h, m);
  for (auto* t : p.tensors()) *t = random_matrix(t->rows(), t->cols(), gen, -0.8, 0.8);
  return p;
}

/// Fresh, empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("llmrank-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline llmrank::PromptRecord make_record(std::string id, std::string prompt, std::string bench, std::vector<double> q,
                                         std::vector<double> c) {
  llmrank::PromptRecord r;
  r.sample_id = std::move(id);
  r.prompt = std::move(prompt);
  r.benchmark = std::move(bench);
  r.quality = std::move(q);
  r.cost = std::move(c);
  return r;
}

/// Dataset with `counts[k]` records in category "cat<k>", every record solved.
inline llmrank::Dataset category_dataset(const std::vector<std::size_t>& counts, std::size_t models = 2) {
  llmrank::Dataset d;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < models; ++j) names.push_back("model" + std::to_string(j));
  d.pool = llmrank::ModelPool(names);
  for (std::size_t k = 0; k < counts.size(); ++k)
    for (std::size_t i = 0; i < counts[k]; ++i) {
      std::vector<double> q(models, 0.0), c(models, 0.001);
      q[i % models] = 1.0;
      d.records.push_back(make_record("c" + std::to_string(k) + "-" + std::to_string(i), "prompt " + std::to_string(i),
                                      "cat" + std::to_string(k), q, c));
    }
  return d;
}

}  // namespace testing_support
