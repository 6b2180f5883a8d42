#pragma once
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "autocf/evaluator.hpp"
#include "autocf/graph.hpp"
#include "autocf/model.hpp"
#include "autocf/trainer.hpp"

namespace autocf {

// ---- checkpoints ------------------------------------------------------------
// Versioned binary dump: text header (magic, version, precision, step,
// config echo) followed by raw little-endian tensor payloads. Byte-identical
// for identical parameter values.
struct CheckpointData {
  bool f32 = false;
  long step = 0;
  std::map<std::string, std::string> config;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

void write_checkpoint(const std::string& path, const CheckpointData& ckpt);
CheckpointData read_checkpoint(const std::string& path);

template <class Real>
CheckpointData checkpoint_from_model(ModelStateT<Real>& model,
                                     const std::map<std::string, std::string>& config) {
  CheckpointData c;
  c.f32 = sizeof(Real) == 4;
  c.step = model.step;
  c.config = config;
  for (auto* p : model.parameters())
    c.tensors.emplace_back(p->name, tensor_cast_from<Real>(p->value));
  return c;
}

template <class Real>
void load_model_params(ModelStateT<Real>& model, const CheckpointData& ckpt) {
  auto params = model.parameters();
  if (params.size() != ckpt.tensors.size())
    throw ConfigError("checkpoint parameter count does not match the model");
  for (std::size_t j = 0; j < params.size(); ++j) {
    const auto& [name, t] = ckpt.tensors[j];
    if (name != params[j]->name || t.nrows != params[j]->value.nrows ||
        t.ncols != params[j]->value.ncols)
      throw ConfigError("checkpoint tensor '" + name + "' does not match parameter '" +
                        params[j]->name + "'");
    params[j]->value = tensor_cast_to<Real>(t);
  }
  model.step = ckpt.step;
}

// ---- split manifests ---------------------------------------------------------
// Directory layout: train.tsv / val.tsv / test.tsv with dense `u<TAB>i` lines,
// split.meta with seed/ratio/count metadata, and the id remap tables
// user_map.tsv / item_map.tsv when the source labels are known.
void write_split(const std::string& dir, const DatasetSplit& split,
                 const std::vector<std::string>* user_labels,
                 const std::vector<std::string>* item_labels,
                 const std::string& source_path);
DatasetSplit read_split(const std::string& dir);
std::vector<std::string> read_label_map(const std::string& path);  // empty if absent

// ---- reports and logs ---------------------------------------------------------
void write_metrics_jsonl(const std::string& path, const MetricsReport& rep);
void write_metrics_csv(const std::string& path, const MetricsReport& rep);
void write_loss_log(const std::string& path, const std::vector<StepRecord>& steps);
void write_epoch_log(const std::string& path, const std::vector<EpochRecord>& epochs);
void write_provenance(const std::string& dir, const std::map<std::string, std::string>& resolved,
                      const std::string& fingerprint, double wall_sec);
void write_resolved_config(const std::string& dir,
                           const std::map<std::string, std::string>& resolved);

// Per-node relatedness audit dump: node id, kind, degree, score, selected flag.
void write_relatedness_audit(const std::string& path, const InteractionGraph& graph,
                             const RelatednessScores& scores,
                             const std::vector<NodeId>& centric);

std::string version_string();

}  // namespace autocf
