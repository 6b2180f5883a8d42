#include "autocf/config.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "autocf/rng.hpp"

namespace autocf {

Variant parse_variant(const std::string& tag) {
  if (tag == "full") return Variant::Full;
  if (tag == "-GSA") return Variant::NoGSA;
  if (tag == "-M") return Variant::NoMask;
  if (tag == "-IM") return Variant::NoInfomax;
  if (tag == "-L2M") return Variant::RandomMask;
  throw ConfigError("unknown variant tag: " + tag);
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoGSA: return "-GSA";
    case Variant::NoMask: return "-M";
    case Variant::NoInfomax: return "-IM";
    case Variant::RandomMask: return "-L2M";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (dim <= 0) throw ConfigError("dim must be positive");
  if (layers < 1 || layers > 3) throw ConfigError("layers must lie in {1,2,3}");
  if (heads <= 0) throw ConfigError("heads must be positive");
  if (dim % heads != 0) throw ConfigError("dim must be divisible by heads");
  if (centric_nodes < 0) throw ConfigError("centric_nodes must be non-negative");
  if (mask_hops < 1 || mask_hops > 3) throw ConfigError("mask_hops must lie in {1,2,3}");
  if (rho <= 0 || rho > 1) throw ConfigError("rho must lie in (0,1]");
  if (remask_period < 1) throw ConfigError("remask_period must be >= 1");
  if (lambda1 != 0 && (lambda1 < 1e-4 || lambda1 > 1e1))
    throw ConfigError("lambda1 must be 0 or lie in [1e-4, 1e1]");
  if (lambda2 != 0 && (lambda2 < 1e-8 || lambda2 > 1e-3))
    throw ConfigError("lambda2 must be 0 or lie in [1e-8, 1e-3]");
  if (lr <= 0) throw ConfigError("lr must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (patience < 0) throw ConfigError("patience must be non-negative");
  if (temperature <= 0) throw ConfigError("temperature must be positive");
  if (threads < 1) throw ConfigError("threads must be positive");
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  // prefer the shortest representation that round-trips
  for (int prec = 1; prec <= 16; ++prec) {
    char s[64];
    std::snprintf(s, sizeof(s), "%.*g", prec, x);
    double back = 0;
    std::sscanf(s, "%lf", &back);
    if (back == x) return s;
  }
  return buf;
}

namespace {

double parse_num(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for key '" + key + "': " + v);
  }
}

long parse_long(const std::string& key, const std::string& v) {
  double x = parse_num(key, v);
  long l = static_cast<long>(x);
  if (static_cast<double>(l) != x) throw ConfigError("key '" + key + "' expects an integer");
  return l;
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& v, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(parse(key, tok));
  }
  if (out.empty()) throw ConfigError("key '" + key + "' expects a comma-separated list");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void ExperimentConfig::apply(const std::string& key, const std::string& value) {
  if (key == "data") data_path = value;
  else if (key == "split_dir") split_dir = value;
  else if (key == "checkpoint") checkpoint = value;
  else if (key == "out") out_dir = value;
  else if (key == "train_ratio") train_ratio = parse_num(key, value);
  else if (key == "val_ratio") val_ratio = parse_num(key, value);
  else if (key == "test_ratio") test_ratio = parse_num(key, value);
  else if (key == "seed") train.seed = static_cast<std::uint64_t>(parse_long(key, value));
  else if (key == "dim") train.dim = static_cast<int>(parse_long(key, value));
  else if (key == "layers") train.layers = static_cast<int>(parse_long(key, value));
  else if (key == "heads") train.heads = static_cast<int>(parse_long(key, value));
  else if (key == "centric_nodes") train.centric_nodes = parse_long(key, value);
  else if (key == "mask_hops") train.mask_hops = static_cast<int>(parse_long(key, value));
  else if (key == "rho") train.rho = parse_num(key, value);
  else if (key == "remask_period") train.remask_period = static_cast<int>(parse_long(key, value));
  else if (key == "lambda1") train.lambda1 = parse_num(key, value);
  else if (key == "lambda2") train.lambda2 = parse_num(key, value);
  else if (key == "lr") train.lr = parse_num(key, value);
  else if (key == "batch_size") train.batch_size = parse_long(key, value);
  else if (key == "epochs") train.epochs = static_cast<int>(parse_long(key, value));
  else if (key == "patience") train.patience = static_cast<int>(parse_long(key, value));
  else if (key == "temperature") train.temperature = parse_num(key, value);
  else if (key == "threads") train.threads = static_cast<int>(parse_long(key, value));
  else if (key == "readout") {
    if (value == "mean") train.readout = Readout::Mean;
    else if (value == "sum") train.readout = Readout::Sum;
    else throw ConfigError("key 'readout' expects mean|sum");
  } else if (key == "precision") {
    if (value == "f64") train.f32 = false;
    else if (value == "f32") train.f32 = true;
    else throw ConfigError("key 'precision' expects f64|f32");
  } else if (key == "variant") {
    parse_variant(value);  // reject unknown tags eagerly
    variant_tag = value;
  } else if (key == "noise_ratios") {
    noise_ratios = parse_list<double>(key, value, parse_num);
  } else if (key == "sparsity_bounds") {
    sparsity_bounds = parse_list<std::int64_t>(
        key, value, [](const std::string& k, const std::string& t) {
          return static_cast<std::int64_t>(parse_long(k, t));
        });
  } else if (key == "cutoffs") {
    cutoffs = parse_list<int>(key, value, [](const std::string& k, const std::string& t) {
      return static_cast<int>(parse_long(k, t));
    });
  } else if (key == "grad_eps") grad_eps = parse_num(key, value);
  else if (key == "grad_tol") grad_tol = parse_num(key, value);
  else if (key == "grad_samples") grad_samples = parse_long(key, value);
  else throw ConfigError("unknown config key: " + key);
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    apply(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

void ExperimentConfig::finalize() {
  train.variant = parse_variant(variant_tag);
  train.validate();
  for (double r : noise_ratios)
    if (r < 0 || r > 1) throw ConfigError("noise_ratios entries must lie in [0,1]");
  for (int c : cutoffs)
    if (c < 1) throw ConfigError("cutoffs must be >= 1");
}

std::map<std::string, std::string> ExperimentConfig::resolved() const {
  std::map<std::string, std::string> m;
  m["data"] = data_path;
  m["split_dir"] = split_dir;
  m["checkpoint"] = checkpoint;
  m["out"] = out_dir;
  m["train_ratio"] = format_double(train_ratio);
  m["val_ratio"] = format_double(val_ratio);
  m["test_ratio"] = format_double(test_ratio);
  m["seed"] = std::to_string(train.seed);
  m["dim"] = std::to_string(train.dim);
  m["layers"] = std::to_string(train.layers);
  m["heads"] = std::to_string(train.heads);
  m["centric_nodes"] = std::to_string(train.centric_nodes);
  m["mask_hops"] = std::to_string(train.mask_hops);
  m["rho"] = format_double(train.rho);
  m["remask_period"] = std::to_string(train.remask_period);
  m["lambda1"] = format_double(train.lambda1);
  m["lambda2"] = format_double(train.lambda2);
  m["lr"] = format_double(train.lr);
  m["batch_size"] = std::to_string(train.batch_size);
  m["epochs"] = std::to_string(train.epochs);
  m["patience"] = std::to_string(train.patience);
  m["temperature"] = format_double(train.temperature);
  m["threads"] = std::to_string(train.threads);
  m["readout"] = train.readout == Readout::Mean ? "mean" : "sum";
  m["precision"] = train.f32 ? "f32" : "f64";
  m["variant"] = variant_tag;
  auto join_d = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t j = 0; j < v.size(); ++j) s += (j ? "," : "") + format_double(v[j]);
    return s;
  };
  m["noise_ratios"] = join_d(noise_ratios);
  std::string sb, cs;
  for (std::size_t j = 0; j < sparsity_bounds.size(); ++j)
    sb += (j ? "," : "") + std::to_string(sparsity_bounds[j]);
  for (std::size_t j = 0; j < cutoffs.size(); ++j)
    cs += (j ? "," : "") + std::to_string(cutoffs[j]);
  m["sparsity_bounds"] = sb;
  m["cutoffs"] = cs;
  m["grad_eps"] = format_double(grad_eps);
  m["grad_tol"] = format_double(grad_tol);
  m["grad_samples"] = std::to_string(grad_samples);
  return m;
}

std::string ExperimentConfig::fingerprint() const {
  std::string blob;
  for (const auto& [k, v] : resolved()) blob += k + "=" + v + "\n";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, RngStream::fnv1a(blob));
  return buf;
}

}  // namespace autocf
