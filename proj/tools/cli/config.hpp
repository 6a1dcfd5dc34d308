#pragma once

#include "psichain/complexity.hpp"
#include "psichain/ensembles.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace psichain::cli {

using Json = nlohmann::json;

// Raised for malformed or inconsistent configs; exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnsembleDesc {
  std::string kind = "gaussian";  // gaussian, rademacher, exppower, l1ball, user
  double alpha = 1.0;
  bool normalize = true;
  std::string matrix;  // user: path to a stored matrix

  EnsembleSpec make(std::size_t n) const;
  // Dimension of a user matrix, otherwise 0.
  std::size_t fixed_dim() const;
};

struct ClassDesc {
  std::string kind = "sphere";  // sphere, finite, l1_vertices, weighted_basis, log_weighted_basis, basis_vector
  Matrix vectors;
  std::vector<double> weights;
  std::size_t index = 0;  // basis_vector

  IndexClass make(std::size_t n) const;
};

struct ExperimentConfig {
  std::string kind;
  std::string mode;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  double budget_secs = 600.0;
  std::vector<EnsembleDesc> ensembles;
  std::vector<ClassDesc> classes;
  Json grid = Json::object();
  Json params = Json::object();
  Json expect = Json::object();
  std::string out_dir = "out";
  std::string prefix;
  Json raw;  // the parsed document with overrides applied

  // Grid helpers; `name` must be present unless a fallback is given.
  std::vector<std::size_t> sizes(const std::string& name) const;
  std::vector<std::size_t> sizes(const std::string& name, std::vector<std::size_t> fallback) const;
  std::vector<double> reals(const std::string& name) const;
  std::vector<double> reals(const std::string& name, std::vector<double> fallback) const;
  double param(const std::string& name, double fallback) const;
  std::size_t param_size(const std::string& name, std::size_t fallback) const;
  std::string param_string(const std::string& name, const std::string& fallback) const;
  const EnsembleDesc& ensemble() const;
  const ClassDesc& index_class() const;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"diam",     "decompose", "concentrate",    "gamma2",
                                                 "lowerbound", "apps",    "nets-selftest", "orlicz-selftest"};
  return kinds;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "config");
ExperimentConfig load_config(const std::filesystem::path& path);
// Applies a seed override and refreshes `raw`.
void override_seed(ExperimentConfig& cfg, std::uint64_t seed);

// FNV-1a 64 over the canonical (sorted-key, compact) dump.
std::uint64_t config_hash(const Json& raw);
std::string hex64(std::uint64_t v);

}  // namespace psichain::cli
