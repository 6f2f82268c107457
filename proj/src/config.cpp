#include "cbs/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cbs {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw std::invalid_argument("invalid parameter '" + key + "': " + why);
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) bad(key, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    bad(key, "cannot parse '" + node.Scalar() + "'");
  }
}

double real(const YAML::Node& node, const std::string& key) {
  const double v = scalar<double>(node, key);
  if (!std::isfinite(v)) bad(key, "must be finite");
  return v;
}

int integer(const YAML::Node& node, const std::string& key) { return scalar<int>(node, key); }

std::vector<double> real_list(const YAML::Node& node, const std::string& key) {
  std::vector<double> out;
  if (node.IsNull()) return out;
  if (node.IsScalar()) return {real(node, key)};
  if (!node.IsSequence()) bad(key, "expected a list of numbers");
  for (const auto& item : node) out.push_back(real(item, key));
  return out;
}

RunMode parse_mode(const std::string& s, const std::string& key) {
  if (s == "kernels") return RunMode::Kernels;
  if (s == "spectra" || s == "ladder-crossed") return RunMode::Spectra;
  if (s == "totals") return RunMode::Totals;
  if (s == "verify" || s == "verify-oracle") return RunMode::Verify;
  if (s == "sweep") return RunMode::Sweep;
  bad(key, "unknown mode '" + s + "'");
}

Normalization parse_norm(const std::string& s, const std::string& key) {
  if (s == "none") return Normalization::None;
  if (s == "unit-peak") return Normalization::UnitPeak;
  bad(key, "expected none or unit-peak, got '" + s + "'");
}

using Setter = std::function<void(RunConfig&, const YAML::Node&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"rabi", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.params.rabi = real(n, k); }},
      {"detuning", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.params.detuning = real(n, k); }},
      {"gamma", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.params.gamma = real(n, k); }},
      {"coupling_mod2", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.params.coupling_mod2 = real(n, k); }},
      {"pair_multiplicity", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.transport.pair_multiplicity = real(n, k); }},
      {"grid_points", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.grid_points = integer(n, k); }},
      {"range_multiplier", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.range_multiplier = real(n, k); }},
      {"abs_tol", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.transport.quad.abs_tol = real(n, k); }},
      {"rel_tol", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.transport.quad.rel_tol = real(n, k); }},
      {"max_panels", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.transport.quad.max_panels = integer(n, k); }},
      {"mode", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.mode = parse_mode(scalar<std::string>(n, k), k); }},
      {"sweep_rabi", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.sweep_rabi = real_list(n, k); }},
      {"sweep_detuning", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.sweep_detuning = real_list(n, k); }},
      {"output_dir", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.output_dir = scalar<std::string>(n, k); }},
      {"prefix", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.prefix = scalar<std::string>(n, k); }},
      {"normalization", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.normalization = parse_norm(scalar<std::string>(n, k), k); }},
      {"probe_offset", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.probe_offset = real(n, k); }},
      {"oracle_g", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.oracle.g_magnitude = real(n, k); }},
      {"oracle_g_ratio", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.oracle.g_ratio = real(n, k); }},
      {"oracle_phases", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.oracle.phases = integer(n, k); }},
      {"oracle_coherent_only", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.oracle.coherent_only = scalar<bool>(n, k); }},
      {"oracle_residual_tolerance", [](RunConfig& c, const YAML::Node& n, const std::string& k) { c.oracle.residual_tolerance = real(n, k); }},
      {"threads", [](RunConfig& c, const YAML::Node& n, const std::string& k) {
         c.transport.threads = integer(n, k);
         c.oracle.threads = c.transport.threads;
       }},
  };
  return table;
}

const Setter& find_setter(const std::string& key) {
  for (const auto& [name, fn] : setters())
    if (name == key) return fn;
  throw std::invalid_argument("unknown configuration key '" + key + "'");
}

bool is_list_key(const std::string& key) { return key == "sweep_rabi" || key == "sweep_detuning"; }

}  // namespace

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Kernels: return "kernels";
    case RunMode::Spectra: return "spectra";
    case RunMode::Totals: return "totals";
    case RunMode::Verify: return "verify";
    case RunMode::Sweep: return "sweep";
  }
  return "?";
}

std::string_view to_string(Normalization n) {
  return n == Normalization::UnitPeak ? "unit-peak" : "none";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, fn] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void RunConfig::validate() const {
  params.validate();
  if (grid_points < 3) bad("grid_points", "must be >= 3");
  if (!(range_multiplier > 0.0)) bad("range_multiplier", "must be > 0");
  transport.validate();
  oracle.validate();
  if (prefix.empty()) bad("prefix", "must not be empty");
  if (!std::isfinite(probe_offset)) bad("probe_offset", "must be finite");
  if (mode == RunMode::Sweep) {
    if (sweep_rabi.empty()) bad("sweep_rabi", "must be non-empty in sweep mode");
    if (sweep_detuning.empty()) bad("sweep_detuning", "must be non-empty in sweep mode");
  }
  for (double r : sweep_rabi)
    if (!(r >= 0.0)) bad("sweep_rabi", "values must be >= 0");
}

RunConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(std::string("malformed configuration: ") + e.what());
  }
  RunConfig cfg;
  if (root.IsNull()) {
    cfg.validate();
    return cfg;
  }
  if (!root.IsMap()) throw std::invalid_argument("configuration must be a flat key: value mapping");
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    find_setter(key)(cfg, kv.second, key);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read configuration file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Setter& set = find_setter(key);
  std::string text = value;
  if (is_list_key(key) && !text.empty() && text.front() != '[') text = "[" + text + "]";
  YAML::Node node;
  try {
    node = YAML::Load(text);
  } catch (const YAML::Exception&) {
    bad(key, "cannot parse '" + value + "'");
  }
  set(cfg, node, key);
}

}  // namespace cbs
