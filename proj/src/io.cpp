#include "autocf/io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "autocf/config.hpp"

#ifndef AUTOCF_VERSION_STRING
#define AUTOCF_VERSION_STRING "0.1.0"
#endif

namespace autocf {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version_string() { return AUTOCF_VERSION_STRING; }

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot write file: " + path);
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw ConfigError("cannot open file: " + path);
  return in;
}

}  // namespace

void write_checkpoint(const std::string& path, const CheckpointData& ckpt) {
  auto out = open_out(path, std::ios::binary);
  out << "ACFCKPT v1\n";
  out << "precision " << (ckpt.f32 ? "f32" : "f64") << "\n";
  out << "step " << ckpt.step << "\n";
  out << "config " << ckpt.config.size() << "\n";
  for (const auto& [k, v] : ckpt.config) out << k << "=" << v << "\n";
  out << "tensors " << ckpt.tensors.size() << "\n";
  for (const auto& [name, t] : ckpt.tensors) {
    out << name << " " << t.nrows << " " << t.ncols << "\n";
    if (ckpt.f32) {
      std::vector<float> buf(t.v.begin(), t.v.end());
      out.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
    } else {
      out.write(reinterpret_cast<const char*>(t.v.data()),
                static_cast<std::streamsize>(t.v.size() * sizeof(double)));
    }
    out << "\n";
  }
}

CheckpointData read_checkpoint(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("checkpoint not found: " + path);
  auto in = open_in(path, std::ios::binary);
  std::string line;
  std::getline(in, line);
  if (line != "ACFCKPT v1") throw ParseError("not a v1 checkpoint: " + path);

  CheckpointData c;
  std::string word;
  in >> word >> line;
  if (word != "precision") throw ParseError("checkpoint: missing precision");
  c.f32 = line == "f32";
  in >> word >> c.step;
  std::size_t nconf = 0;
  in >> word >> nconf;
  std::getline(in, line);  // consume EOL
  for (std::size_t j = 0; j < nconf; ++j) {
    std::getline(in, line);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("checkpoint: bad config line");
    c.config[line.substr(0, eq)] = line.substr(eq + 1);
  }
  std::size_t ntensors = 0;
  in >> word >> ntensors;
  for (std::size_t j = 0; j < ntensors; ++j) {
    std::string name;
    std::size_t r = 0, ccols = 0;
    in >> name >> r >> ccols;
    std::getline(in, line);  // consume EOL
    Tensor t(r, ccols);
    if (c.f32) {
      std::vector<float> buf(r * ccols);
      in.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
      for (std::size_t i = 0; i < buf.size(); ++i) t.v[i] = buf[i];
    } else {
      in.read(reinterpret_cast<char*>(t.v.data()),
              static_cast<std::streamsize>(t.v.size() * sizeof(double)));
    }
    if (!in) throw ParseError("checkpoint: truncated tensor payload");
    in.get();  // trailing EOL
    c.tensors.emplace_back(std::move(name), std::move(t));
  }
  return c;
}

namespace {

void write_edge_file(const std::string& path, const std::vector<Edge>& edges) {
  auto out = open_out(path);
  for (const Edge& e : edges) out << e.u << "\t" << e.i << "\n";
}

std::vector<Edge> read_edge_file(const std::string& path) {
  auto in = open_in(path);
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Edge e;
    if (std::sscanf(line.c_str(), "%d\t%d", &e.u, &e.i) != 2)
      throw ParseError(path + " line " + std::to_string(lineno) + ": expected u<TAB>i");
    edges.push_back(e);
  }
  return edges;
}

}  // namespace

void write_split(const std::string& dir, const DatasetSplit& split,
                 const std::vector<std::string>* user_labels,
                 const std::vector<std::string>* item_labels, const std::string& source_path) {
  fs::create_directories(dir);
  write_edge_file(dir + "/train.tsv", split.train.edges());
  write_edge_file(dir + "/val.tsv", split.validation);
  write_edge_file(dir + "/test.tsv", split.test);

  auto meta = open_out(dir + "/split.meta");
  meta << "num_users=" << split.train.num_users() << "\n";
  meta << "num_items=" << split.train.num_items() << "\n";
  meta << "seed=" << split.seed << "\n";
  meta << "train_ratio=" << format_double(split.ratios[0]) << "\n";
  meta << "val_ratio=" << format_double(split.ratios[1]) << "\n";
  meta << "test_ratio=" << format_double(split.ratios[2]) << "\n";
  meta << "train_edges=" << split.train.num_edges() << "\n";
  meta << "val_edges=" << split.validation.size() << "\n";
  meta << "test_edges=" << split.test.size() << "\n";
  meta << "source=" << source_path << "\n";

  auto write_map = [&](const std::string& path, const std::vector<std::string>& labels) {
    auto out = open_out(path);
    for (std::size_t j = 0; j < labels.size(); ++j) out << j << "\t" << labels[j] << "\n";
  };
  if (user_labels) write_map(dir + "/user_map.tsv", *user_labels);
  if (item_labels) write_map(dir + "/item_map.tsv", *item_labels);
}

DatasetSplit read_split(const std::string& dir) {
  auto meta = open_in(dir + "/split.meta");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* key : {"num_users", "num_items", "seed"})
    if (!kv.count(key)) throw ParseError(dir + "/split.meta: missing key " + std::string(key));

  DatasetSplit split;
  const NodeId nu = static_cast<NodeId>(std::stol(kv["num_users"]));
  const NodeId ni = static_cast<NodeId>(std::stol(kv["num_items"]));
  split.seed = std::stoull(kv["seed"]);
  split.ratios[0] = kv.count("train_ratio") ? std::stod(kv["train_ratio"]) : 0;
  split.ratios[1] = kv.count("val_ratio") ? std::stod(kv["val_ratio"]) : 0;
  split.ratios[2] = kv.count("test_ratio") ? std::stod(kv["test_ratio"]) : 0;
  split.train = InteractionGraph::from_edges(nu, ni, read_edge_file(dir + "/train.tsv"));
  split.validation = read_edge_file(dir + "/val.tsv");
  split.test = read_edge_file(dir + "/test.tsv");
  return split;
}

std::vector<std::string> read_label_map(const std::string& path) {
  std::vector<std::string> labels;
  std::ifstream in(path);
  if (!in) return labels;
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    labels.push_back(line.substr(tab + 1));
  }
  return labels;
}

namespace {

json metric_record(const char* type, const std::map<int, double>& recall,
                   const std::map<int, double>& ndcg, int cutoff) {
  json j;
  j["type"] = type;
  j["cutoff"] = cutoff;
  j["recall"] = recall.at(cutoff);
  j["ndcg"] = ndcg.at(cutoff);
  return j;
}

}  // namespace

void write_metrics_jsonl(const std::string& path, const MetricsReport& rep) {
  auto out = open_out(path);
  json schema;
  schema["type"] = "schema";
  schema["version"] = 1;
  schema["fingerprint"] = rep.config_fingerprint;
  out << schema.dump() << "\n";
  for (int c : rep.cutoffs) {
    json j = metric_record("overall", rep.recall, rep.ndcg, c);
    j["users"] = rep.users_evaluated;
    out << j.dump() << "\n";
  }
  for (const auto& g : rep.sparsity)
    for (int c : rep.cutoffs) {
      json j = metric_record("sparsity", g.recall, g.ndcg, c);
      j["group"] = g.label;
      j["users"] = g.users;
      out << j.dump() << "\n";
    }
  for (const auto& p : rep.noise_series)
    for (int c : rep.cutoffs) {
      json j = metric_record("noise", p.recall, p.ndcg, c);
      j["ratio"] = p.ratio;
      j["added_edges"] = p.added_edges;
      out << j.dump() << "\n";
    }
}

void write_metrics_csv(const std::string& path, const MetricsReport& rep) {
  auto out = open_out(path);
  out << "section,group,ratio,added_edges,cutoff,recall,ndcg,users\n";
  for (int c : rep.cutoffs)
    out << "overall,,,," << c << "," << format_double(rep.recall.at(c)) << ","
        << format_double(rep.ndcg.at(c)) << "," << rep.users_evaluated << "\n";
  for (const auto& g : rep.sparsity)
    for (int c : rep.cutoffs)
      out << "sparsity,\"" << g.label << "\",,," << c << "," << format_double(g.recall.at(c))
          << "," << format_double(g.ndcg.at(c)) << "," << g.users << "\n";
  for (const auto& p : rep.noise_series)
    for (int c : rep.cutoffs)
      out << "noise,," << format_double(p.ratio) << "," << p.added_edges << "," << c << ","
          << format_double(p.recall.at(c)) << "," << format_double(p.ndcg.at(c)) << ",\n";
}

void write_loss_log(const std::string& path, const std::vector<StepRecord>& steps) {
  auto out = open_out(path);
  for (const auto& s : steps) {
    json j;
    j["epoch"] = s.epoch;
    j["step"] = s.step;
    j["rec"] = s.loss.rec;
    j["recon"] = s.loss.recon;
    j["uniformity"] = s.loss.uniformity;
    j["infomax"] = s.loss.infomax;
    j["weight_decay"] = s.loss.weight_decay;
    j["total"] = s.loss.total;
    out << j.dump() << "\n";
  }
}

void write_epoch_log(const std::string& path, const std::vector<EpochRecord>& epochs) {
  auto out = open_out(path);
  for (const auto& e : epochs) {
    json j;
    j["epoch"] = e.epoch;
    j["mean_total"] = e.mean_total;
    j["val_recall20"] = e.val_recall20;
    j["val_ndcg20"] = e.val_ndcg20;
    j["wall_sec"] = e.wall_sec;
    j["remasks"] = e.remasks;
    j["masked_edges"] = e.masked_edges;
    out << j.dump() << "\n";
  }
}

void write_provenance(const std::string& dir, const std::map<std::string, std::string>& resolved,
                      const std::string& fingerprint, double wall_sec) {
  json j;
  j["version"] = version_string();
  j["fingerprint"] = fingerprint;
  j["seed"] = resolved.count("seed") ? resolved.at("seed") : "";
  j["wall_clock_sec"] = wall_sec;
  auto out = open_out(dir + "/provenance.json");
  out << j.dump(2) << "\n";
}

void write_resolved_config(const std::string& dir,
                           const std::map<std::string, std::string>& resolved) {
  auto out = open_out(dir + "/resolved.conf");
  for (const auto& [k, v] : resolved) out << k << " = " << v << "\n";
}

void write_relatedness_audit(const std::string& path, const InteractionGraph& graph,
                             const RelatednessScores& scores,
                             const std::vector<NodeId>& centric) {
  auto out = open_out(path);
  out << "node\tkind\tdegree\tscore\tcentric\n";
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    const bool sel = std::binary_search(centric.begin(), centric.end(), v);
    out << v << "\t" << (graph.is_user(v) ? "user" : "item") << "\t" << graph.degree(v) << "\t"
        << format_double(scores.s[static_cast<std::size_t>(v)]) << "\t" << (sel ? 1 : 0) << "\n";
  }
}

}  // namespace autocf
