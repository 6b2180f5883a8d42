#pragma once
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <vector>

#include "autocf/config.hpp"
#include "autocf/evaluator.hpp"
#include "autocf/losses.hpp"
#include "autocf/model.hpp"

namespace autocf {

struct StepRecord {
  int epoch = 0;
  long step = 0;  // global step counter
  LossBreakdown loss;
};

struct EpochRecord {
  int epoch = 0;
  double mean_total = 0;
  double val_recall20 = 0;
  double val_ndcg20 = 0;
  double wall_sec = 0;
  long remasks = 0;
  long masked_edges = 0;  // size of the last mask plan of the epoch
};

struct TrainLogs {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  bool aborted_nan = false;
  bool early_stopped = false;
  int best_epoch = 0;
  double best_val_recall20 = 0;
  long final_centric_count = 0;  // after any disconnection-guard reductions
  std::vector<std::string> warnings;
};

// Per-remask snapshot of the augmentation state. Everything downstream of the
// mask plan (propagation weights, attention incidence) is rebuilt together so
// no stale coefficient can survive a re-mask.
struct MaskEpochState {
  MaskPlan plan;
  NormalizedAdjacency adj;
  std::optional<AttentionGraph> ag;
};

template <class Real>
class TrainerT {
 public:
  TrainerT(TrainConfig cfg, const DatasetSplit& split)
      : cfg_(cfg),
        split_(split),
        graph_(split.train),
        rng_mask_(cfg.seed, "mask"),
        rng_attention_(cfg.seed, "attention"),
        rng_shuffle_(cfg.seed, "shuffle"),
        rng_l2m_(cfg.seed, "l2m") {
    cfg_.validate();
    if (graph_.num_edges() == 0) throw ConfigError("train graph has no edges");
    if (cfg_.centric_nodes > graph_.num_nodes())
      throw ConfigError("centric_nodes exceeds the node count");
    model_ = ModelStateT<Real>::init(cfg_, graph_.num_nodes(), cfg_.seed);
    all_nodes_.resize(static_cast<std::size_t>(graph_.num_nodes()));
    for (std::size_t v = 0; v < all_nodes_.size(); ++v) all_nodes_[v] = static_cast<NodeId>(v);
    hood_ = NeighborhoodIndex::build(graph_, all_nodes_, cfg_.mask_hops);
    centric_budget_ = cfg_.centric_nodes;
  }

  ModelStateT<Real>& model() { return model_; }
  const TrainLogs& logs() const { return logs_; }
  const MaskEpochState& mask_state() const { return mask_state_; }

  // One full run of the learning loop. Returns false when aborted on NaN; the
  // model then holds the last parameters that produced a finite loss.
  bool run() {
    auto params = model_.parameters();
    std::span<ParameterT<Real>* const> pspan(params.data(), params.size());
    std::vector<Edge> order = graph_.edges();
    last_good_ = snapshot(params);

    int epochs_since_best = 0;
    for (int epoch = 1; epoch <= cfg_.epochs; ++epoch) {
      const auto t0 = std::chrono::steady_clock::now();
      rng_shuffle_.shuffle(order);
      double total_sum = 0;
      long steps_in_epoch = 0;
      long remasks = 0;

      for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(cfg_.batch_size)) {
        const std::size_t end = std::min(order.size(), pos + static_cast<std::size_t>(cfg_.batch_size));
        std::vector<Edge> batch(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                order.begin() + static_cast<std::ptrdiff_t>(end));
        if (model_.step % cfg_.remask_period == 0) {
          remask(batch);
          ++remasks;
        }
        LossBreakdown lb;
        const bool ok = train_step(batch, pspan, lb);
        logs_.steps.push_back({epoch, model_.step, lb});
        if (!ok) {
          restore(params, last_good_);
          logs_.aborted_nan = true;
          logs_.warnings.push_back("NaN loss at step " + std::to_string(model_.step) +
                                   "; restored last finite parameters");
          finish_epoch(epoch, t0, total_sum, steps_in_epoch, remasks);
          return false;
        }
        last_good_ = snapshot(params);
        total_sum += lb.total;
        ++steps_in_epoch;
        ++model_.step;
      }

      EpochRecord er = finish_epoch(epoch, t0, total_sum, steps_in_epoch, remasks);
      if (!split_.validation.empty()) {
        if (er.val_recall20 > logs_.best_val_recall20) {
          logs_.best_val_recall20 = er.val_recall20;
          logs_.best_epoch = epoch;
          epochs_since_best = 0;
        } else {
          ++epochs_since_best;
        }
        if (cfg_.patience > 0 && epochs_since_best >= cfg_.patience) {
          logs_.early_stopped = true;
          break;
        }
      }
    }
    logs_.final_centric_count = centric_budget_;
    return true;
  }

  // Deterministic h-hat over the unmasked training graph.
  TensorT<Real> inference() {
    return inference_embeddings(model_, graph_, cfg_.layers, cfg_.variant);
  }

  // Exposed for the gradient-check harness: rebuild the augmentation state
  // once so a frozen plan can be captured.
  void remask_once(const std::vector<Edge>& batch) { remask(batch); }

  // Joint loss on a frozen plan; with_grad leaves gradients in the parameters.
  double frozen_loss(const std::vector<Edge>& batch, bool with_grad) {
    TapeT<Real> tape(false);
    auto root = build_loss(tape, batch, nullptr);
    if (with_grad) tape.backward(root);
    return tape.scalar(root);
  }

 private:
  using Clock = std::chrono::steady_clock;

  EpochRecord finish_epoch(int epoch, Clock::time_point t0, double total_sum, long steps,
                           long remasks) {
    EpochRecord er;
    er.epoch = epoch;
    er.mean_total = steps > 0 ? total_sum / static_cast<double>(steps) : 0.0;
    er.remasks = remasks;
    er.masked_edges = static_cast<long>(mask_state_.plan.masked_edges.size());
    if (!split_.validation.empty()) {
      Tensor hhat = tensor_cast_from<Real>(inference());
      DatasetSplit val_view;
      val_view.train = split_.train;
      val_view.test = split_.validation;
      EvalOptions opts;
      opts.cutoffs = {20};
      opts.threads = cfg_.threads;
      MetricsReport rep = evaluate_embeddings(hhat, val_view, opts);
      er.val_recall20 = rep.recall.at(20);
      er.val_ndcg20 = rep.ndcg.at(20);
    }
    er.wall_sec = std::chrono::duration<double>(Clock::now() - t0).count();
    logs_.epochs.push_back(er);
    return er;
  }

  // Recompute relatedness on the current ego embeddings, Gumbel-perturb,
  // select centric nodes, and rebuild the mask plan plus everything derived
  // from it. The -L2M variant draws the learned plan first so it can mask the
  // same number of edges uniformly at random.
  void remask(const std::vector<Edge>& batch) {
    MaskPlan plan;
    if (centric_budget_ > 0) {
      RelatednessScores scores =
          relatedness_scores_indexed(hood_, model_.ego.value, cfg_.readout);
      std::vector<NodeId> centric = select_centric_filtered(
          scores, all_nodes_, static_cast<std::size_t>(centric_budget_), rng_mask_);
      plan = mask_edges(graph_, centric, cfg_.mask_hops);
      if (cfg_.variant == Variant::RandomMask) plan = random_mask(plan.masked_edges.size());
    } else {
      plan = mask_edges(graph_, {}, cfg_.mask_hops);
    }

    mask_state_.plan = std::move(plan);
    mask_state_.adj = normalized_weights(mask_state_.plan.surviving);
    if (cfg_.variant != Variant::NoGSA)
      mask_state_.ag = sample_attention_graph(mask_state_.plan, cfg_.rho, rng_attention_);

    // disconnection guard: repeated re-masks that leave every batch node
    // edgeless trigger a warning and a halving of the centric budget
    bool all_disconnected = !batch.empty();
    for (const Edge& e : batch) {
      if (mask_state_.plan.surviving.degree(e.u) > 0 ||
          mask_state_.plan.surviving.degree(graph_.item_node(e.i)) > 0) {
        all_disconnected = false;
        break;
      }
    }
    if (all_disconnected)
      ++disconnect_streak_;
    else
      disconnect_streak_ = 0;
    if (disconnect_streak_ > 5) {
      centric_budget_ = std::max<long>(1, centric_budget_ / 2);
      disconnect_streak_ = 0;
      char buf[128];
      std::snprintf(buf, sizeof(buf),
                    "mask disconnected all batch nodes in >5 consecutive re-masks; "
                    "reducing centric nodes to %ld",
                    centric_budget_);
      logs_.warnings.push_back(buf);
      std::fputs((std::string(buf) + "\n").c_str(), stderr);
    }
  }

  // Random edge masking with the same masked-edge count as the learned plan.
  MaskPlan random_mask(std::size_t count) {
    std::vector<std::size_t> order(graph_.num_edges());
    for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
    rng_l2m_.shuffle(order);
    std::vector<std::uint8_t> masked(graph_.num_edges(), 0);
    for (std::size_t j = 0; j < count; ++j) masked[order[j]] = 1;

    MaskPlan plan;
    std::vector<Edge> survivors;
    survivors.reserve(graph_.num_edges() - count);
    std::vector<std::uint8_t> touched(static_cast<std::size_t>(graph_.num_nodes()), 0);
    for (std::size_t e = 0; e < graph_.num_edges(); ++e) {
      const Edge& ed = graph_.edges()[e];
      if (masked[e]) {
        plan.masked_edges.push_back(ed);
        touched[static_cast<std::size_t>(ed.u)] = 1;
        touched[static_cast<std::size_t>(graph_.item_node(ed.i))] = 1;
      } else {
        survivors.push_back(ed);
      }
    }
    plan.surviving =
        InteractionGraph::from_edges(graph_.num_users(), graph_.num_items(), std::move(survivors));
    for (NodeId v = 0; v < graph_.num_nodes(); ++v)
      if (touched[static_cast<std::size_t>(v)]) plan.subgraph_nodes.push_back(v);
    return plan;
  }

  typename TapeT<Real>::Id build_loss(TapeT<Real>& tape, const std::vector<Edge>& batch,
                                      LossBreakdown* out) {
    const AttentionGraph* ag = mask_state_.ag ? &*mask_state_.ag : nullptr;
    auto tr = model_forward(tape, model_, mask_state_.adj, ag, cfg_.layers, cfg_.variant);

    auto rec = rec_loss(tape, tr.hhat, batch, graph_.num_users());
    auto root = rec;

    auto zero = tape.constant_scalar(Real(0));
    auto recon = zero;
    auto unif = zero;
    auto infom = zero;
    const bool ssl_on = cfg_.lambda1 != 0;
    const bool recon_on = ssl_on && cfg_.variant != Variant::NoMask;
    const bool infom_on =
        ssl_on && cfg_.variant != Variant::NoMask && cfg_.variant != Variant::NoInfomax;
    if (recon_on)
      recon = recon_loss(tape, tr.hhat, mask_state_.plan.masked_edges, graph_.num_users());
    if (ssl_on) {
      std::vector<NodeId> bu, bi;
      bu.reserve(batch.size());
      bi.reserve(batch.size());
      for (const Edge& e : batch) {
        bu.push_back(e.u);
        bi.push_back(graph_.item_node(e.i));
      }
      std::sort(bu.begin(), bu.end());
      bu.erase(std::unique(bu.begin(), bu.end()), bu.end());
      std::sort(bi.begin(), bi.end());
      bi.erase(std::unique(bi.begin(), bi.end()), bi.end());
      unif = uniformity_loss(tape, tr.hhat, bu, bi, graph_.num_users(), graph_.num_items(),
                             cfg_.temperature);
      if (infom_on) {
        std::vector<NodeId> over = bu;
        over.insert(over.end(), bi.begin(), bi.end());
        over.insert(over.end(), mask_state_.plan.centric.begin(),
                    mask_state_.plan.centric.end());
        infom = infomax_term(tape, tr.ego_leaf, InfomaxBatch::slice(hood_, std::move(over)),
                             cfg_.readout);
      }
      auto ssl = tape.add(tape.add(unif, infom), recon);
      root = tape.add(root, tape.scale(ssl, cfg_.lambda1));
    }

    auto wd = zero;
    if (cfg_.lambda2 != 0) {
      wd = squared_norm(tape, tr.ego_leaf);
      for (auto& h : model_.heads) {
        wd = tape.add(wd, squared_norm(tape, tape.leaf(h.wq)));
        wd = tape.add(wd, squared_norm(tape, tape.leaf(h.wk)));
        wd = tape.add(wd, squared_norm(tape, tape.leaf(h.wv)));
      }
      root = tape.add(root, tape.scale(wd, cfg_.lambda2));
    }

    if (out) {
      out->rec = tape.scalar(rec);
      out->recon = tape.scalar(recon);
      out->uniformity = tape.scalar(unif);
      out->infomax = tape.scalar(infom);
      out->weight_decay = tape.scalar(wd);
      out->total = tape.scalar(root);
    }
    return root;
  }

  bool train_step(const std::vector<Edge>& batch, std::span<ParameterT<Real>* const> params,
                  LossBreakdown& lb) {
    TapeT<Real> tape(false);
    typename TapeT<Real>::Id root;
    try {
      root = build_loss(tape, batch, &lb);
    } catch (const NumericError&) {
      lb.total = std::numeric_limits<double>::quiet_NaN();
      return false;
    }
    if (!std::isfinite(lb.total)) return false;
    tape.backward(root);
    try {
      model_.opt.step(params);
    } catch (const NumericError& e) {
      logs_.warnings.push_back(e.what());
      return false;
    }
    return true;
  }

  static std::vector<TensorT<Real>> snapshot(const std::vector<ParameterT<Real>*>& params) {
    std::vector<TensorT<Real>> out;
    out.reserve(params.size());
    for (const auto* p : params) out.push_back(p->value);
    return out;
  }

  static void restore(const std::vector<ParameterT<Real>*>& params,
                      const std::vector<TensorT<Real>>& snap) {
    for (std::size_t j = 0; j < params.size(); ++j) params[j]->value = snap[j];
  }

  TrainConfig cfg_;
  const DatasetSplit& split_;
  const InteractionGraph& graph_;
  RngStream rng_mask_, rng_attention_, rng_shuffle_, rng_l2m_;
  ModelStateT<Real> model_;
  std::vector<NodeId> all_nodes_;
  NeighborhoodIndex hood_;
  MaskEpochState mask_state_;
  TrainLogs logs_;
  std::vector<TensorT<Real>> last_good_;
  long centric_budget_ = 0;
  int disconnect_streak_ = 0;
};

using Trainer = TrainerT<double>;

}  // namespace autocf
