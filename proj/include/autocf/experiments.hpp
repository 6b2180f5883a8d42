#pragma once
#include <string>
#include <vector>

#include "autocf/evaluator.hpp"
#include "autocf/trainer.hpp"

namespace autocf {

struct TrainOutcome {
  ModelState model;
  TrainLogs logs;
  Tensor hhat;             // inference embeddings of the trained model
  MetricsReport test_report;
};

// Train on the split's train graph and evaluate on its test edges.
TrainOutcome train_and_evaluate(const TrainConfig& cfg, const DatasetSplit& split,
                                const EvalOptions& opts);

// Train + evaluate one ablation variant under otherwise identical config/seed.
TrainOutcome run_ablation(const std::string& variant_tag, TrainConfig cfg,
                          const DatasetSplit& split, const EvalOptions& opts);

struct NoiseSweepOutcome {
  MetricsReport report;  // noise_series carries the per-ratio points
  std::vector<TrainLogs> logs;
};

// For each ratio: contaminate the train graph, retrain from scratch with the
// same seed, evaluate on the untouched test set.
NoiseSweepOutcome noise_sweep(const std::vector<double>& ratios, const TrainConfig& cfg,
                              const DatasetSplit& split, const EvalOptions& opts);

}  // namespace autocf
