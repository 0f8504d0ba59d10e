#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "llmrank/common.hpp"
#include "llmrank/dataset.hpp"

namespace llmrank {

// Generators for self-contained experiments. Prompts are built from a neutral
// filler vocabulary plus tier keywords that fully determine model quality.

namespace detail {

inline const std::vector<std::string>& filler_vocabulary() {
  static const std::vector<std::string> words = [] {
    std::vector<std::string> w;
    const char* syllables[] = {"ka", "lo", "mi", "ne", "ru", "ta", "vo", "zi", "pe", "su", "da", "fi", "go", "hu"};
    for (const char* a : syllables)
      for (const char* b : syllables) w.push_back(std::string(a) + b);
    return w;
  }();
  return words;
}

inline std::string tier_keyword(std::size_t tier, std::size_t variant) {
  static const char* names[] = {"amber", "basalt", "cobalt", "dolomite", "emerald", "feldspar", "garnet", "hematite"};
  return std::string(names[tier % 8]) + std::to_string(tier) + "x" + std::to_string(variant);
}

}  // namespace detail

struct TieredCorpusOptions {
  std::size_t prompts = 5000;
  std::size_t models = 5;
  std::size_t filler_words = 12;
  std::size_t keyword_variants = 3;
  double base_cost = 2e-5;
  double cost_growth = 2.5;
  std::uint64_t seed = 0;
};

inline ModelPool tiered_pool(std::size_t models) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < models; ++j) names.push_back("tier" + std::to_string(j) + "-model");
  return ModelPool(std::move(names));
}

/// Each prompt carries a tier keyword k. Model j solves it (quality 1) iff
/// j >= k, and model cost grows geometrically with j, so the oracle choice is
/// exactly model k.
inline Dataset make_tiered_corpus(const TieredCorpusOptions& opts = {}) {
  if (opts.models < 2) fail("tiered corpus needs at least 2 models");
  Dataset d;
  d.pool = tiered_pool(opts.models);
  d.provenance = "synthetic:tiered";
  Rng rng(opts.seed);
  const auto& vocab = detail::filler_vocabulary();
  std::vector<double> cost(opts.models);
  for (std::size_t j = 0; j < opts.models; ++j) cost[j] = opts.base_cost * std::pow(opts.cost_growth, static_cast<double>(j));
  for (std::size_t i = 0; i < opts.prompts; ++i) {
    const auto tier = static_cast<std::size_t>(rng.below(opts.models));
    std::vector<std::string> words;
    for (std::size_t w = 0; w < opts.filler_words; ++w) words.push_back(vocab[rng.below(vocab.size())]);
    const auto pos = rng.below(words.size() + 1);
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos),
                 detail::tier_keyword(tier, rng.below(opts.keyword_variants)));
    PromptRecord r;
    r.sample_id = "syn-" + std::to_string(i);
    for (std::size_t w = 0; w < words.size(); ++w) r.prompt += (w ? " " : "") + words[w];
    r.prompt += "?";
    r.benchmark = "tier" + std::to_string(tier);
    for (std::size_t j = 0; j < opts.models; ++j) {
      r.quality.push_back(j >= tier ? 1.0 : 0.0);
      r.cost.push_back(cost[j]);
    }
    d.records.push_back(std::move(r));
  }
  return d;
}

struct RandomTableOptions {
  std::size_t prompts = 60;
  std::size_t models = 3;
  std::size_t categories = 2;
  std::uint64_t seed = 0;
};

/// Random quality/cost tables with loosely keyword-correlated prompts.
inline Dataset make_random_dataset(const RandomTableOptions& opts) {
  Dataset d;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < opts.models; ++j) names.push_back("m" + std::to_string(j));
  d.pool = ModelPool(std::move(names));
  d.provenance = "synthetic:random";
  Rng rng(opts.seed);
  const auto& vocab = detail::filler_vocabulary();
  for (std::size_t i = 0; i < opts.prompts; ++i) {
    PromptRecord r;
    r.sample_id = "rnd-" + std::to_string(i);
    const auto cat = i % opts.categories;
    r.benchmark = "cat" + std::to_string(cat);
    r.prompt = detail::tier_keyword(cat, 0);
    for (int w = 0; w < 6; ++w) r.prompt += " " + vocab[rng.below(vocab.size())];
    for (std::size_t j = 0; j < opts.models; ++j) {
      r.quality.push_back(rng.bernoulli(0.2) ? rng.uniform() : (rng.bernoulli(0.5) ? 1.0 : 0.0));
      r.cost.push_back(rng.uniform(1e-5, 1e-3));
    }
    d.records.push_back(std::move(r));
  }
  return d;
}

}  // namespace llmrank
