#include "cli/config.hpp"

#include <fstream>
#include <set>

namespace perturb::cli {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object in " + path);
  return j;
}

// Silent typos would invalidate sweeps, so unknown keys are hard errors.
void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
  }
}

void check_version(const json& j) {
  if (!j.contains("version")) throw ConfigError("config: missing 'version'");
  if (!j["version"].is_number_integer() || j["version"].get<int>() != 1)
    throw ConfigError("config: unsupported version (expected 1)");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

CommonConfig parse_common(const json& j) {
  CommonConfig c;
  c.trials = get_or<long>(j, "trials", c.trials);
  c.seed_base = get_or<std::uint64_t>(j, "seed_base", c.seed_base);
  c.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {});
  c.out = get_or<std::string>(j, "out", c.out);
  const std::string fmt = get_or<std::string>(j, "format", "csv");
  if (fmt == "csv")
    c.format = OutputFormat::Csv;
  else if (fmt == "json")
    c.format = OutputFormat::Json;
  else
    throw ConfigError("config: format must be 'csv' or 'json'");
  c.nodes_per_segment = get_or<int>(j, "nodes_per_segment", c.nodes_per_segment);
  c.threads = get_or<int>(j, "threads", c.threads);
  if (c.trials < 1 && c.seeds.empty()) throw ConfigError("config: trials must be >= 1");
  if (c.nodes_per_segment < 8) throw ConfigError("config: nodes_per_segment must be >= 8");
  if (c.threads < 1) throw ConfigError("config: threads must be >= 1");
  return c;
}

const std::set<std::string> kCommonKeys = {"version", "trials",  "seed_base",
                                           "seeds",   "out",     "format",
                                           "nodes_per_segment",  "threads"};

std::set<std::string> with_common(std::set<std::string> extra) {
  extra.insert(kCommonKeys.begin(), kCommonKeys.end());
  return extra;
}

InstanceConfig parse_instance(const json& j) {
  InstanceConfig inst;
  if (!j.contains("instance")) return inst;
  const json& o = j.at("instance");
  check_keys(o, {"n", "spectrum", "matrix_file"}, "instance");
  inst.n = get_or<long>(o, "n", 0);
  inst.spectrum = get_or<std::vector<double>>(o, "spectrum", {});
  inst.matrix_file = get_or<std::string>(o, "matrix_file", "");
  return inst;
}

NoiseConfig parse_noise(const json& j) {
  NoiseConfig nz;
  if (!j.contains("noise")) return nz;
  const json& o = j.at("noise");
  check_keys(o, {"kind", "subgaussian", "scale", "target_norm", "rho", "file"}, "noise");
  nz.kind = get_or<std::string>(o, "kind", nz.kind);
  nz.subgaussian = get_or<std::string>(o, "subgaussian", nz.subgaussian);
  nz.scale = get_or<double>(o, "scale", nz.scale);
  if (o.contains("target_norm")) nz.target_norm = o.at("target_norm").get<double>();
  nz.rho = get_or<double>(o, "rho", nz.rho);
  nz.file = get_or<std::string>(o, "file", "");
  if (nz.kind != "wigner" && nz.kind != "sparsify" && nz.kind != "custom-file")
    throw ConfigError("config: noise.kind must be wigner | sparsify | custom-file");
  if (nz.subgaussian != "gaussian" && nz.subgaussian != "rademacher")
    throw ConfigError("config: noise.subgaussian must be gaussian | rademacher");
  if (nz.kind == "sparsify" && !(nz.rho > 0.0 && nz.rho <= 1.0))
    throw ConfigError("config: noise.rho must be in (0, 1]");
  if (nz.kind == "custom-file" && nz.file.empty())
    throw ConfigError("config: noise.kind custom-file needs noise.file");
  return nz;
}

PowerSettings parse_power(const json& j) {
  PowerSettings p;
  if (!j.contains("power")) return p;
  const json& o = j.at("power");
  check_keys(o, {"max_iterations", "stop_tol", "v0_seed", "early_stop"}, "power");
  p.max_iterations = get_or<int>(o, "max_iterations", p.max_iterations);
  p.stop_tol = get_or<double>(o, "stop_tol", p.stop_tol);
  p.v0_seed = get_or<std::uint64_t>(o, "v0_seed", p.v0_seed);
  p.early_stop = get_or<bool>(o, "early_stop", p.early_stop);
  if (p.max_iterations < 1) throw ConfigError("config: power.max_iterations must be >= 1");
  if (!(p.stop_tol > 0.0)) throw ConfigError("config: power.stop_tol must be > 0");
  return p;
}

void apply_flags(CommonConfig& c, NoiseConfig* noise, InstanceConfig* inst,
                 const FlagOverrides& flags) {
  if (flags.trials) c.trials = *flags.trials;
  if (flags.seed_base) c.seed_base = *flags.seed_base;
  if (flags.out) c.out = *flags.out;
  if (flags.format) {
    if (*flags.format == "csv")
      c.format = OutputFormat::Csv;
    else if (*flags.format == "json")
      c.format = OutputFormat::Json;
    else
      throw ConfigError("--format must be csv or json");
  }
  if (flags.nodes) {
    if (*flags.nodes < 8) throw ConfigError("--nodes must be >= 8");
    c.nodes_per_segment = *flags.nodes;
  }
  if (flags.threads) c.threads = *flags.threads;
  if (flags.matrix && inst) inst->matrix_file = *flags.matrix;
  if (flags.noise && noise) {
    noise->kind = "custom-file";
    noise->file = *flags.noise;
  }
}

json load_or_empty(const std::string& path) {
  if (path.empty()) {
    json j = json::object();
    j["version"] = 1;
    return j;
  }
  json j = load_json(path);
  check_version(j);
  return j;
}

}  // namespace

BoundCompareConfig load_bound_compare(const std::string& config_path, const FlagOverrides& flags) {
  const json j = load_or_empty(config_path);
  check_keys(j, with_common({"instance", "noise", "p", "S"}), "bound-compare config");
  BoundCompareConfig cfg;
  cfg.common = parse_common(j);
  cfg.instance = parse_instance(j);
  cfg.noise = parse_noise(j);
  cfg.p = get_or<int>(j, "p", cfg.p);
  cfg.index_set = get_or<std::vector<int>>(j, "S", {});
  apply_flags(cfg.common, &cfg.noise, &cfg.instance, flags);
  if (cfg.instance.matrix_file.empty() && cfg.instance.spectrum.empty())
    throw ConfigError("bound-compare: provide instance.spectrum (+ instance.n) or a matrix file");
  return cfg;
}

ContourVerifyConfig load_contour_verify(const std::string& config_path,
                                        const FlagOverrides& flags) {
  const json j = load_or_empty(config_path);
  check_keys(j, with_common({"instance", "noise", "p"}), "contour-verify config");
  ContourVerifyConfig cfg;
  cfg.common = parse_common(j);
  cfg.instance = parse_instance(j);
  cfg.noise = parse_noise(j);
  cfg.p = get_or<int>(j, "p", cfg.p);
  apply_flags(cfg.common, &cfg.noise, &cfg.instance, flags);
  if (cfg.instance.matrix_file.empty() && cfg.instance.spectrum.empty())
    throw ConfigError("contour-verify: provide instance.spectrum (+ instance.n) or a matrix file");
  return cfg;
}

SparsifyPowerConfig load_sparsify_power(const std::string& config_path,
                                        const FlagOverrides& flags) {
  const json j = load_or_empty(config_path);
  check_keys(j, with_common({"instance", "rho", "noise", "power"}), "sparsify-power config");
  SparsifyPowerConfig cfg;
  cfg.common = parse_common(j);
  cfg.instance = parse_instance(j);
  cfg.rho = get_or<double>(j, "rho", cfg.rho);
  cfg.noise = parse_noise(j);
  cfg.power = parse_power(j);
  apply_flags(cfg.common, &cfg.noise, &cfg.instance, flags);
  if (!(cfg.rho > 0.0 && cfg.rho <= 1.0)) throw ConfigError("sparsify-power: rho must be in (0, 1]");
  if (cfg.instance.matrix_file.empty() && cfg.instance.spectrum.empty())
    throw ConfigError("sparsify-power: provide instance.spectrum (+ instance.n) or a matrix file");
  return cfg;
}

SingularRectConfig load_singular_rect(const std::string& config_path, const FlagOverrides& flags) {
  const json j = load_or_empty(config_path);
  check_keys(j, with_common({"mode", "instance", "p", "k", "m", "n", "singular_values", "noise"}),
             "singular-rect config");
  SingularRectConfig cfg;
  cfg.common = parse_common(j);
  cfg.mode = get_or<std::string>(j, "mode", cfg.mode);
  cfg.instance = parse_instance(j);
  cfg.p = get_or<int>(j, "p", cfg.p);
  cfg.k = get_or<int>(j, "k", cfg.k);
  cfg.m = get_or<long>(j, "m", cfg.m);
  cfg.n = get_or<long>(j, "n", cfg.n);
  cfg.singular_values = get_or<std::vector<double>>(j, "singular_values", {});
  cfg.noise = parse_noise(j);
  apply_flags(cfg.common, &cfg.noise, &cfg.instance, flags);
  if (cfg.mode != "singular" && cfg.mode != "rectangular")
    throw ConfigError("singular-rect: mode must be singular | rectangular");
  if (cfg.mode == "singular" && cfg.instance.matrix_file.empty() && cfg.instance.spectrum.empty())
    throw ConfigError("singular-rect: singular mode needs instance.spectrum or a matrix file");
  if (cfg.mode == "rectangular" && (cfg.m < 1 || cfg.n < 1 || cfg.singular_values.empty()))
    throw ConfigError("singular-rect: rectangular mode needs m, n, singular_values");
  return cfg;
}

}  // namespace perturb::cli
