// Command-line front end tying the pipeline together: dataset preparation,
// training, evaluation, ablations, noise sweeps, sparsity reports, gradient
// checks, and embedding export. One experiment per process.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "autocf/config.hpp"
#include "autocf/experiments.hpp"
#include "autocf/gradcheck.hpp"
#include "autocf/io.hpp"
#include "autocf/trainer.hpp"

namespace fs = std::filesystem;
using namespace autocf;

namespace {

using Clock = std::chrono::steady_clock;

struct RunContext {
  ExperimentConfig cfg;
  Clock::time_point t0 = Clock::now();

  void emit_provenance() const {
    if (cfg.out_dir.empty()) return;
    fs::create_directories(cfg.out_dir);
    write_resolved_config(cfg.out_dir, cfg.resolved());
    write_provenance(cfg.out_dir, cfg.resolved(), cfg.fingerprint(),
                     std::chrono::duration<double>(Clock::now() - t0).count());
  }
};

void require(bool cond, const std::string& message) {
  if (!cond) throw ConfigError(message);
}

EvalOptions eval_options(const ExperimentConfig& cfg) {
  EvalOptions opts;
  opts.cutoffs = cfg.cutoffs;
  opts.fingerprint = cfg.fingerprint();
  opts.threads = cfg.train.threads;
  return opts;
}

// The fixed toy instance for the gradient-check subcommand.
InteractionGraph gradcheck_toy() {
  return InteractionGraph::from_edges(5, 6,
                                      {{0, 0},
                                       {0, 1},
                                       {0, 2},
                                       {1, 1},
                                       {1, 2},
                                       {1, 3},
                                       {2, 0},
                                       {2, 3},
                                       {2, 4},
                                       {3, 2},
                                       {3, 4},
                                       {3, 5},
                                       {4, 0},
                                       {4, 5}});
}

int cmd_prepare(RunContext& ctx) {
  auto& cfg = ctx.cfg;
  require(!cfg.data_path.empty(), "prepare requires data=<tsv path>");
  require(!cfg.out_dir.empty(), "prepare requires out=<dir>");
  LoadResult loaded = load_interactions(cfg.data_path);
  DatasetSplit split = split_dataset(loaded.graph, cfg.train_ratio, cfg.val_ratio,
                                     cfg.test_ratio, cfg.train.seed);
  write_split(cfg.out_dir, split, &loaded.user_labels, &loaded.item_labels, cfg.data_path);
  std::printf("prepared %s: %d users, %d items, %zu/%zu/%zu train/val/test edges\n",
              cfg.out_dir.c_str(), split.train.num_users(), split.train.num_items(),
              split.train.num_edges(), split.validation.size(), split.test.size());
  return 0;
}

// Model-relevant config echo: everything except run-location paths, so the
// same config+seed yields byte-identical checkpoints wherever they land.
std::map<std::string, std::string> checkpoint_echo(const ExperimentConfig& cfg) {
  auto echo = cfg.resolved();
  for (const char* key : {"data", "split_dir", "checkpoint", "out"}) echo.erase(key);
  return echo;
}

template <class Real>
int run_training(RunContext& ctx, const DatasetSplit& split) {
  auto& cfg = ctx.cfg;
  TrainerT<Real> trainer(cfg.train, split);
  const bool ok = trainer.run();

  fs::create_directories(cfg.out_dir);
  write_checkpoint(cfg.out_dir + "/checkpoint.bin",
                   checkpoint_from_model(trainer.model(), checkpoint_echo(cfg)));
  write_loss_log(cfg.out_dir + "/loss_log.jsonl", trainer.logs().steps);
  write_epoch_log(cfg.out_dir + "/epoch_log.jsonl", trainer.logs().epochs);

  // relatedness audit over the final embeddings and last centric selection
  if (cfg.train.variant != Variant::RandomMask) {
    Tensor ego = tensor_cast_from<Real>(trainer.model().ego.value);
    auto scores = relatedness_scores(split.train, ego, cfg.train.mask_hops, cfg.train.readout);
    write_relatedness_audit(cfg.out_dir + "/relatedness_audit.tsv", split.train, scores,
                            trainer.mask_state().plan.centric);
  }

  for (const auto& w : trainer.logs().warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (!ok) {
    std::fprintf(stderr, "training aborted on non-finite loss; last-good checkpoint written\n");
    return 1;
  }
  const auto& epochs = trainer.logs().epochs;
  if (!epochs.empty())
    std::printf("trained %d epochs, final mean loss %.6f, best val Recall@20 %.4f (epoch %d)\n",
                static_cast<int>(epochs.size()), epochs.back().mean_total,
                trainer.logs().best_val_recall20, trainer.logs().best_epoch);
  return 0;
}

int cmd_train(RunContext& ctx) {
  auto& cfg = ctx.cfg;
  require(!cfg.split_dir.empty(), "train requires split_dir=<dir from prepare>");
  require(!cfg.out_dir.empty(), "train requires out=<dir>");
  DatasetSplit split = read_split(cfg.split_dir);
  return cfg.train.f32 ? run_training<float>(ctx, split) : run_training<double>(ctx, split);
}

ModelState model_from_checkpoint(const ExperimentConfig& cfg, const DatasetSplit& split,
                                 const CheckpointData& ckpt) {
  TrainConfig tc = cfg.train;
  // architecture fields come from the checkpoint so evaluation cannot drift
  auto need = [&](const char* key) {
    auto it = ckpt.config.find(key);
    require(it != ckpt.config.end(), std::string("checkpoint missing config key ") + key);
    return it->second;
  };
  tc.dim = std::stoi(need("dim"));
  tc.heads = std::stoi(need("heads"));
  tc.layers = std::stoi(need("layers"));
  tc.variant = parse_variant(need("variant"));
  tc.seed = std::stoull(need("seed"));
  ModelState model = ModelState::init(tc, split.train.num_nodes(), tc.seed);
  load_model_params(model, ckpt);
  return model;
}

int cmd_evaluate(RunContext& ctx, bool with_sparsity) {
  auto& cfg = ctx.cfg;
  require(!cfg.split_dir.empty(), "evaluate requires split_dir=<dir>");
  require(!cfg.checkpoint.empty(), "evaluate requires checkpoint=<file>");
  require(!cfg.out_dir.empty(), "evaluate requires out=<dir>");
  DatasetSplit split = read_split(cfg.split_dir);
  CheckpointData ckpt = read_checkpoint(cfg.checkpoint);
  ModelState model = model_from_checkpoint(cfg, split, ckpt);

  const int layers = std::stoi(ckpt.config.at("layers"));
  const Variant variant = parse_variant(ckpt.config.at("variant"));
  Tensor hhat = inference_embeddings(model, split.train, layers, variant);

  EvalOptions opts = eval_options(cfg);
  if (with_sparsity) opts.sparsity_bounds = cfg.sparsity_bounds;
  MetricsReport rep = evaluate_embeddings(hhat, split, opts);

  fs::create_directories(cfg.out_dir);
  write_metrics_jsonl(cfg.out_dir + "/metrics.jsonl", rep);
  write_metrics_csv(cfg.out_dir + "/metrics.csv", rep);
  for (int c : rep.cutoffs)
    std::printf("Recall@%d %.6f  NDCG@%d %.6f  (%ld users)\n", c, rep.recall.at(c), c,
                rep.ndcg.at(c), rep.users_evaluated);
  return 0;
}

int cmd_ablate(RunContext& ctx) {
  auto& cfg = ctx.cfg;
  require(!cfg.split_dir.empty(), "ablate requires split_dir=<dir>");
  require(!cfg.out_dir.empty(), "ablate requires out=<dir>");
  DatasetSplit split = read_split(cfg.split_dir);

  std::vector<std::string> tags;
  if (cfg.variant_tag == "all")
    tags = {"full", "-GSA", "-M", "-IM", "-L2M"};
  else
    tags = {cfg.variant_tag};

  EvalOptions opts = eval_options(cfg);
  for (const auto& tag : tags) {
    TrainOutcome out = run_ablation(tag, cfg.train, split, opts);
    const std::string sub = cfg.out_dir + "/" + (tag == "full" ? "full" : tag.substr(1));
    fs::create_directories(sub);
    write_metrics_jsonl(sub + "/metrics.jsonl", out.test_report);
    write_metrics_csv(sub + "/metrics.csv", out.test_report);
    write_loss_log(sub + "/loss_log.jsonl", out.logs.steps);
    write_epoch_log(sub + "/epoch_log.jsonl", out.logs.epochs);
    std::printf("%s: Recall@20 %.6f NDCG@20 %.6f\n", tag.c_str(),
                out.test_report.recall.count(20) ? out.test_report.recall.at(20) : 0.0,
                out.test_report.ndcg.count(20) ? out.test_report.ndcg.at(20) : 0.0);
  }
  return 0;
}

int cmd_noise_sweep(RunContext& ctx) {
  auto& cfg = ctx.cfg;
  require(!cfg.split_dir.empty(), "noise-sweep requires split_dir=<dir>");
  require(!cfg.out_dir.empty(), "noise-sweep requires out=<dir>");
  DatasetSplit split = read_split(cfg.split_dir);
  EvalOptions opts = eval_options(cfg);
  NoiseSweepOutcome out = noise_sweep(cfg.noise_ratios, cfg.train, split, opts);

  fs::create_directories(cfg.out_dir);
  write_metrics_jsonl(cfg.out_dir + "/metrics.jsonl", out.report);
  write_metrics_csv(cfg.out_dir + "/metrics.csv", out.report);
  for (const auto& p : out.report.noise_series)
    std::printf("ratio %.2f (+%ld edges): Recall@20 %.6f NDCG@20 %.6f\n", p.ratio, p.added_edges,
                p.recall.count(20) ? p.recall.at(20) : 0.0,
                p.ndcg.count(20) ? p.ndcg.at(20) : 0.0);
  return 0;
}

int cmd_grad_check(RunContext& ctx) {
  auto& cfg = ctx.cfg;
  DatasetSplit split;
  split.train = gradcheck_toy();

  TrainConfig tc = cfg.train;
  tc.dim = 8;
  tc.layers = 2;
  tc.heads = 2;
  tc.centric_nodes = 2;
  tc.mask_hops = 1;
  tc.rho = 0.5;
  tc.batch_size = 8;
  tc.f32 = false;  // the check is defined in 64-bit mode

  Trainer trainer(tc, split);
  std::vector<Edge> batch(split.train.edges().begin(), split.train.edges().begin() + 8);
  trainer.remask_once(batch);

  auto params = trainer.model().parameters();
  std::size_t coords = 0;
  for (auto* p : params) coords += p->value.size();
  const std::size_t samples =
      std::max<std::size_t>(static_cast<std::size_t>(cfg.grad_samples), 200);

  RngStream rng(tc.seed, "grad-check");
  auto loss = [&](bool with_grad) { return trainer.frozen_loss(batch, with_grad); };
  auto rep = finite_diff_check<double>(
      loss, std::span<Parameter* const>(params.data(), params.size()), cfg.grad_eps,
      std::min(samples, coords), rng);

  std::printf("grad-check: %zu coordinates sampled, max rel err %.3e (param %s[%zu], "
              "analytic %.6e vs numeric %.6e)\n",
              rep.samples, rep.max_rel_err, rep.worst_param.c_str(), rep.worst_index,
              rep.worst_analytic, rep.worst_numeric);
  const bool pass = rep.max_rel_err < cfg.grad_tol;
  std::printf("grad-check: %s at tolerance %g\n", pass ? "PASS" : "FAIL", cfg.grad_tol);
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir + "/grad_check.txt");
    out << "max_rel_err=" << format_double(rep.max_rel_err) << "\n"
        << "samples=" << rep.samples << "\ntolerance=" << format_double(cfg.grad_tol) << "\n"
        << "status=" << (pass ? "pass" : "fail") << "\n";
  }
  return pass ? 0 : 1;
}

int cmd_export(RunContext& ctx) {
  auto& cfg = ctx.cfg;
  require(!cfg.split_dir.empty(), "export-embeddings requires split_dir=<dir>");
  require(!cfg.checkpoint.empty(), "export-embeddings requires checkpoint=<file>");
  require(!cfg.out_dir.empty(), "export-embeddings requires out=<dir>");
  DatasetSplit split = read_split(cfg.split_dir);
  CheckpointData ckpt = read_checkpoint(cfg.checkpoint);
  ModelState model = model_from_checkpoint(cfg, split, ckpt);
  Tensor hhat = inference_embeddings(model, split.train, std::stoi(ckpt.config.at("layers")),
                                     parse_variant(ckpt.config.at("variant")));

  auto users = read_label_map(cfg.split_dir + "/user_map.tsv");
  auto items = read_label_map(cfg.split_dir + "/item_map.tsv");
  fs::create_directories(cfg.out_dir);
  std::ofstream out(cfg.out_dir + "/embeddings.tsv");
  for (NodeId v = 0; v < split.train.num_nodes(); ++v) {
    const bool user = split.train.is_user(v);
    const NodeId local = user ? v : split.train.item_of(v);
    std::string label = user ? (static_cast<std::size_t>(local) < users.size()
                                    ? users[static_cast<std::size_t>(local)]
                                    : std::to_string(local))
                             : (static_cast<std::size_t>(local) < items.size()
                                    ? items[static_cast<std::size_t>(local)]
                                    : std::to_string(local));
    out << (user ? "user" : "item") << "\t" << label;
    for (std::size_t j = 0; j < hhat.ncols; ++j)
      out << "\t" << format_double(hhat.at(static_cast<std::size_t>(v), j));
    out << "\n";
  }
  std::printf("exported %d embedding rows\n", split.train.num_nodes());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AutoCF: masked graph autoencoder for collaborative filtering"};
  app.require_subcommand(1);

  RunContext ctx;
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> overrides;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "flat key = value config file");
    // every config key doubles as a flag; flags override file values
    static const char* keys[] = {
        "data",          "split_dir",     "checkpoint",   "out",        "train_ratio",
        "val_ratio",     "test_ratio",    "seed",         "dim",        "layers",
        "heads",         "centric_nodes", "mask_hops",    "rho",        "remask_period",
        "lambda1",       "lambda2",       "lr",           "batch_size", "epochs",
        "patience",      "temperature",   "threads",      "readout",    "precision",
        "variant",       "noise_ratios",  "sparsity_bounds", "cutoffs",
        "grad_eps",      "grad_tol",      "grad_samples"};
    for (const char* key : keys) {
      cmd->add_option_function<std::string>(
          "--" + std::string(key),
          [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); });
    }
  };

  CLI::App* prepare = app.add_subcommand("prepare", "load a TSV and write a train/val/test split");
  CLI::App* train = app.add_subcommand("train", "run the learning loop and write a checkpoint");
  CLI::App* evaluate = app.add_subcommand("evaluate", "score a checkpoint on the test split");
  CLI::App* ablate = app.add_subcommand("ablate", "train and evaluate ablation variants");
  CLI::App* noise = app.add_subcommand("noise-sweep", "retrain under contaminated training data");
  CLI::App* sparsity = app.add_subcommand("sparsity-report", "per-degree-group evaluation");
  CLI::App* gradcheck = app.add_subcommand("grad-check", "finite-difference gradient audit");
  CLI::App* exporte = app.add_subcommand("export-embeddings", "dump final embeddings as TSV");
  for (CLI::App* cmd : {prepare, train, evaluate, ablate, noise, sparsity, gradcheck, exporte})
    add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_file.empty()) ctx.cfg.load_file(config_file);
    for (const auto& [k, v] : overrides) ctx.cfg.apply(k, v);
    ctx.cfg.finalize();

    int rc = 0;
    if (prepare->parsed()) rc = cmd_prepare(ctx);
    else if (train->parsed()) rc = cmd_train(ctx);
    else if (evaluate->parsed()) rc = cmd_evaluate(ctx, false);
    else if (ablate->parsed()) rc = cmd_ablate(ctx);
    else if (noise->parsed()) rc = cmd_noise_sweep(ctx);
    else if (sparsity->parsed()) rc = cmd_evaluate(ctx, true);
    else if (gradcheck->parsed()) rc = cmd_grad_check(ctx);
    else if (exporte->parsed()) rc = cmd_export(ctx);
    ctx.emit_provenance();
    return rc;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 2;
  } catch (const EmptyDatasetError& e) {
    std::fprintf(stderr, "empty dataset: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
