// Trains a router on a synthetic corpus and compares it with the oracle and
// single-model baselines on the held-out split.

#include <iostream>

#include "llmrank/llmrank.hpp"

int main() {
  using namespace llmrank;

  TieredCorpusOptions corpus;
  corpus.prompts = 2000;
  corpus.models = 4;
  corpus.seed = 1;
  const auto splits = stratified_split(make_tiered_corpus(corpus), SplitSpec{});
  const auto data = prepare_splits(splits);

  TrainConfig cfg;
  cfg.epochs = 30;
  const auto trained = train_prepared<float>(data, cfg);
  std::cout << "trained " << trained.log.stop_epoch << " epochs, best validation loss "
            << trained.log.epochs[trained.log.best_epoch - 1].val_loss << "\n\n";

  const auto& test = splits.test;
  std::cout << format_report_table({evaluate(route_inputs(trained.params, data.test), test, 0.0, "router"),
                                    evaluate(oracle_decisions(test), test, 0.0, "oracle"),
                                    evaluate(baseline_best_single(test), test, 0.0, "best_single"),
                                    evaluate(baseline_cheapest(test), test, 0.0, "cheapest")});

  // Route a new prompt and show which inputs drove the decision.
  const std::string prompt = test.records.front().prompt;
  const auto features = data.context.extract(prompt).values;
  const auto emb = hash_embed(prompt, 256);
  const auto decision = route(trained.params, features, emb.values);
  std::cout << "\nprompt: " << prompt << "\nrouted to: " << test.pool.name(decision.chosen_index) << "\n";
  for (const auto& a : explain_route(trained.params, features, emb.values, data.context.schema, data.feature_means))
    std::cout << "  " << a.name << " " << a.score << "\n";
}
