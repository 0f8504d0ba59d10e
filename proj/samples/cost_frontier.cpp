// Writes prompt embeddings to an LLMREMB1 file, trains one router per cost
// weight using that file, and prints the resulting quality/cost frontier.

#include <filesystem>
#include <iostream>

#include "llmrank/llmrank.hpp"

int main() {
  using namespace llmrank;

  TieredCorpusOptions corpus;
  corpus.prompts = 2000;
  corpus.seed = 3;
  const auto dataset = make_tiered_corpus(corpus);

  // Any encoder works as long as it writes this format; hashing keeps the
  // sample self-contained.
  const auto path = (std::filesystem::temp_directory_path() / "llmrank_sample_embeddings.bin").string();
  save_embeddings(build_hash_store(dataset, 128), path);
  const auto store = load_embeddings(path);
  std::cout << "loaded " << store.size() << " embeddings of dimension " << store.dim() << " from " << path << "\n\n";

  const auto splits = stratified_split(dataset, SplitSpec{});
  PipelineOptions opts;
  opts.embeddings = &store;
  const auto data = prepare_splits(splits, opts);

  TrainConfig cfg;
  cfg.epochs = 30;
  const auto table = sweep_lambda<float>(data, splits.test, {0.0, 1e2, 1e3, 1e4, 1e5}, cfg);
  std::cout << table.to_table();
  std::filesystem::remove(path);
}
