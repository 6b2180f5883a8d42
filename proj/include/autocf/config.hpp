#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "autocf/errors.hpp"
#include "autocf/masking.hpp"

namespace autocf {

enum class Variant { Full, NoGSA, NoMask, NoInfomax, RandomMask };

Variant parse_variant(const std::string& tag);      // "full", "-GSA", "-M", "-IM", "-L2M"
std::string variant_name(Variant v);

struct TrainConfig {
  int dim = 32;
  int layers = 2;        // GCN sweeps, in {1,2,3}
  int heads = 4;
  long centric_nodes = 200;  // S; 0 disables masking
  int mask_hops = 2;     // k, in {1,2,3}
  double rho = 0.2;
  int remask_period = 10;  // steps between subgraph re-sampling (1 = every batch)
  double lambda1 = 0.1;
  double lambda2 = 1e-5;
  double lr = 1e-3;
  long batch_size = 4096;
  int epochs = 50;
  int patience = 10;  // early-stop window in epochs; 0 disables
  std::uint64_t seed = 0;
  Readout readout = Readout::Mean;
  double temperature = 1.0;
  bool f32 = false;
  int threads = 1;
  Variant variant = Variant::Full;

  void validate() const;
};

// Flat key=value experiment configuration with CLI-flag overrides. Unknown
// keys are rejected by name. Precedence: built-in defaults < config file <
// command-line flags.
struct ExperimentConfig {
  TrainConfig train;

  std::string data_path;    // raw interaction TSV (prepare)
  std::string split_dir;    // prepared split directory (train/evaluate/...)
  std::string checkpoint;   // model checkpoint path (evaluate/export)
  std::string out_dir;      // all artifacts land here
  double train_ratio = 0.7;
  double val_ratio = 0.05;
  double test_ratio = 0.25;
  std::vector<double> noise_ratios = {0.0, 0.25, 0.5};
  std::vector<std::int64_t> sparsity_bounds = {0, 5, 10, 15, 20};
  std::vector<int> cutoffs = {20, 40};
  std::string variant_tag = "full";
  double grad_eps = 1e-5;
  double grad_tol = 1e-4;
  long grad_samples = 256;

  void apply(const std::string& key, const std::string& value);  // ConfigError on unknown key
  void load_file(const std::string& path);
  void finalize();  // derive train.variant etc., then validate
  std::map<std::string, std::string> resolved() const;  // echo for provenance
  std::string fingerprint() const;                      // FNV-1a over the echo
};

std::string format_double(double x);  // shortest round-trip text

}  // namespace autocf
