// Experiment configuration: versioned JSON schema with unknown keys
// rejected, merged with command-line flag overrides.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace perturb::cli {

// Configuration or I/O problems map to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json };

struct CommonConfig {
  long trials = 1;
  std::uint64_t seed_base = 1;
  std::vector<std::uint64_t> seeds;  // explicit list; wins over trials/seed_base
  std::string out;                   // empty writes to stdout
  OutputFormat format = OutputFormat::Csv;
  int nodes_per_segment = 256;
  int threads = 1;

  std::vector<std::uint64_t> seed_list() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> s;
    s.reserve(static_cast<std::size_t>(trials));
    for (long i = 0; i < trials; ++i) s.push_back(seed_base + static_cast<std::uint64_t>(i));
    return s;
  }
};

struct InstanceConfig {
  long n = 0;
  std::vector<double> spectrum;  // prescribed nonzero eigenvalues, |.|-descending
  std::string matrix_file;       // MatrixMarket path overrides the generator
};

struct NoiseConfig {
  std::string kind = "wigner";  // wigner | sparsify | custom-file
  std::string subgaussian = "gaussian";
  double scale = 1.0;
  std::optional<double> target_norm;  // rescale so ||E|| hits this exactly
  double rho = 1.0;                   // sparsify only
  std::string file;                   // custom-file only
};

struct PowerSettings {
  int max_iterations = 1000;
  double stop_tol = 1e-12;
  std::uint64_t v0_seed = 0;
  bool early_stop = false;  // sweeps fix the iteration count by default
};

struct BoundCompareConfig {
  CommonConfig common;
  InstanceConfig instance;
  NoiseConfig noise;
  int p = 1;
  std::vector<int> index_set;  // optional explicit S; wins over p
};

struct ContourVerifyConfig {
  CommonConfig common;
  InstanceConfig instance;
  NoiseConfig noise;
  int p = 1;
};

struct SparsifyPowerConfig {
  CommonConfig common;
  InstanceConfig instance;
  double rho = 0.5;
  NoiseConfig noise;  // only kind=custom-file is honored here
  PowerSettings power;
};

struct SingularRectConfig {
  CommonConfig common;
  std::string mode = "singular";  // singular | rectangular
  // singular mode
  InstanceConfig instance;
  int p = 2;
  int k = 1;
  // rectangular mode
  long m = 0;
  long n = 0;
  std::vector<double> singular_values;
  NoiseConfig noise;
};

// Flag values collected by the CLI; empty/absent flags leave config untouched.
struct FlagOverrides {
  std::optional<long> trials;
  std::optional<std::uint64_t> seed_base;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> nodes;
  std::optional<int> threads;
  std::optional<std::string> matrix;  // MatrixMarket instance input
  std::optional<std::string> noise;   // MatrixMarket noise input
};

BoundCompareConfig load_bound_compare(const std::string& config_path, const FlagOverrides& flags);
ContourVerifyConfig load_contour_verify(const std::string& config_path, const FlagOverrides& flags);
SparsifyPowerConfig load_sparsify_power(const std::string& config_path, const FlagOverrides& flags);
SingularRectConfig load_singular_rect(const std::string& config_path, const FlagOverrides& flags);

}  // namespace perturb::cli
