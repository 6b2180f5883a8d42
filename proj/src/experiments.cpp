#include "autocf/experiments.hpp"

#include "autocf/config.hpp"

namespace autocf {

TrainOutcome train_and_evaluate(const TrainConfig& cfg, const DatasetSplit& split,
                                const EvalOptions& opts) {
  Trainer trainer(cfg, split);
  trainer.run();
  TrainOutcome out;
  out.hhat = trainer.inference();
  out.logs = trainer.logs();
  out.model = std::move(trainer.model());
  if (!split.test.empty()) out.test_report = evaluate_embeddings(out.hhat, split, opts);
  return out;
}

TrainOutcome run_ablation(const std::string& variant_tag, TrainConfig cfg,
                          const DatasetSplit& split, const EvalOptions& opts) {
  cfg.variant = parse_variant(variant_tag);
  return train_and_evaluate(cfg, split, opts);
}

NoiseSweepOutcome noise_sweep(const std::vector<double>& ratios, const TrainConfig& cfg,
                              const DatasetSplit& split, const EvalOptions& opts) {
  NoiseSweepOutcome out;
  out.report.cutoffs = opts.cutoffs;
  out.report.config_fingerprint = opts.fingerprint;
  for (double ratio : ratios) {
    NoiseResult noised = inject_noise(split.train, ratio, cfg.seed);
    DatasetSplit noisy;
    noisy.train = std::move(noised.graph);
    noisy.validation = split.validation;
    noisy.test = split.test;  // test set is kept unchanged
    noisy.seed = split.seed;

    TrainOutcome run = train_and_evaluate(cfg, noisy, opts);
    NoisePoint p;
    p.ratio = ratio;
    p.added_edges = static_cast<long>(noised.added.size());
    p.recall = run.test_report.recall;
    p.ndcg = run.test_report.ndcg;
    out.report.noise_series.push_back(std::move(p));
    out.logs.push_back(std::move(run.logs));
    if (ratio == ratios.front()) {
      out.report.recall = run.test_report.recall;
      out.report.ndcg = run.test_report.ndcg;
      out.report.users_evaluated = run.test_report.users_evaluated;
    }
  }
  return out;
}

}  // namespace autocf
