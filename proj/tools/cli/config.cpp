#include "cli/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace psichain::cli {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "' " + what);
}

std::uint64_t read_u64(const Json& j, const std::string& field) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    try {
      std::size_t pos = 0;
      const auto v = std::stoull(s, &pos, 0);
      if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  fail(field, "must be a nonnegative integer");
}

std::size_t read_size(const Json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<std::int64_t>() <= 0) fail(field, "must be a positive integer");
  return j.get<std::size_t>();
}

double read_real(const Json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number");
  return j.get<double>();
}

Matrix read_matrix(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "must be a nonempty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) fail(field, "rows must be nonempty arrays");
  Matrix M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) fail(field, "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          read_real(j[i][c], field + "[" + std::to_string(i) + "]");
  }
  return M;
}

EnsembleDesc read_ensemble(const Json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "must be an object");
  EnsembleDesc e;
  if (!j.contains("kind") || !j["kind"].is_string()) fail(field + ".kind", "is missing");
  e.kind = j["kind"].get<std::string>();
  static const std::vector<std::string> kinds = {"gaussian", "rademacher", "exppower", "l1ball", "user"};
  if (std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end())
    fail(field + ".kind", "has unknown value '" + e.kind + "'");
  if (j.contains("alpha")) e.alpha = read_real(j["alpha"], field + ".alpha");
  if (j.contains("normalize")) {
    if (!j["normalize"].is_boolean()) fail(field + ".normalize", "must be a boolean");
    e.normalize = j["normalize"].get<bool>();
  }
  if (e.kind == "exppower" && !j.contains("alpha")) fail(field + ".alpha", "is missing");
  if (e.kind == "user") {
    if (!j.contains("matrix") || !j["matrix"].is_string()) fail(field + ".matrix", "is missing");
    e.matrix = j["matrix"].get<std::string>();
  }
  return e;
}

ClassDesc read_class(const Json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "must be an object");
  ClassDesc c;
  if (!j.contains("kind") || !j["kind"].is_string()) fail(field + ".kind", "is missing");
  c.kind = j["kind"].get<std::string>();
  if (c.kind == "finite") {
    if (!j.contains("vectors")) fail(field + ".vectors", "is missing");
    c.vectors = read_matrix(j["vectors"], field + ".vectors");
  } else if (c.kind == "weighted_basis") {
    if (!j.contains("weights") || !j["weights"].is_array() || j["weights"].empty())
      fail(field + ".weights", "must be a nonempty array");
    for (const auto& w : j["weights"]) c.weights.push_back(read_real(w, field + ".weights"));
  } else if (c.kind == "basis_vector") {
    if (j.contains("index")) {
      if (!j["index"].is_number_integer() || j["index"].get<std::int64_t>() < 0)
        fail(field + ".index", "must be a nonnegative integer");
      c.index = j["index"].get<std::size_t>();
    }
  } else if (c.kind != "sphere" && c.kind != "l1_vertices" && c.kind != "log_weighted_basis") {
    fail(field + ".kind", "has unknown value '" + c.kind + "'");
  }
  return c;
}

void fill(ExperimentConfig& cfg, const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  cfg.raw = doc;
  if (!doc.contains("kind")) fail("kind", "is missing");
  if (!doc["kind"].is_string()) fail("kind", "must be a string");
  cfg.kind = doc["kind"].get<std::string>();
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end())
    fail("kind", "has unknown value '" + cfg.kind + "'");
  if (!doc.contains("mode") || !doc["mode"].is_string()) fail("mode", "is missing");
  cfg.mode = doc["mode"].get<std::string>();
  if (!doc.contains("seed")) fail("seed", "is missing");
  cfg.seed = read_u64(doc["seed"], "seed");
  if (doc.contains("trials")) cfg.trials = read_size(doc["trials"], "trials");
  if (doc.contains("budget_secs")) {
    cfg.budget_secs = read_real(doc["budget_secs"], "budget_secs");
    if (!(cfg.budget_secs > 0.0)) fail("budget_secs", "must be positive");
  }
  if (doc.contains("ensemble")) cfg.ensembles.push_back(read_ensemble(doc["ensemble"], "ensemble"));
  if (doc.contains("ensembles")) {
    if (!doc["ensembles"].is_array() || doc["ensembles"].empty()) fail("ensembles", "must be a nonempty array");
    for (std::size_t i = 0; i < doc["ensembles"].size(); ++i)
      cfg.ensembles.push_back(read_ensemble(doc["ensembles"][i], "ensembles[" + std::to_string(i) + "]"));
  }
  if (doc.contains("class")) cfg.classes.push_back(read_class(doc["class"], "class"));
  if (doc.contains("classes")) {
    if (!doc["classes"].is_array() || doc["classes"].empty()) fail("classes", "must be a nonempty array");
    for (std::size_t i = 0; i < doc["classes"].size(); ++i)
      cfg.classes.push_back(read_class(doc["classes"][i], "classes[" + std::to_string(i) + "]"));
  }
  for (const char* block : {"grid", "params", "expect"}) {
    if (!doc.contains(block)) continue;
    if (!doc[block].is_object()) fail(block, "must be an object");
  }
  if (doc.contains("grid")) {
    cfg.grid = doc["grid"];
    for (const auto& [name, value] : cfg.grid.items()) {
      if (value.is_string()) continue;  // symbolic grids such as "dyadic"
      if (!value.is_array() || value.empty()) fail("grid." + name, "must be a nonempty array");
      for (const auto& v : value)
        if (!v.is_number()) fail("grid." + name, "must contain numbers");
    }
  }
  if (doc.contains("params")) cfg.params = doc["params"];
  if (doc.contains("expect")) cfg.expect = doc["expect"];
  if (doc.contains("output")) {
    const auto& o = doc["output"];
    if (!o.is_object()) fail("output", "must be an object");
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) fail("output.dir", "must be a string");
      cfg.out_dir = o["dir"].get<std::string>();
    }
    if (o.contains("prefix")) {
      if (!o["prefix"].is_string()) fail("output.prefix", "must be a string");
      cfg.prefix = o["prefix"].get<std::string>();
    }
  }
  if (cfg.prefix.empty()) cfg.prefix = cfg.kind + "_" + cfg.mode;
}

}  // namespace

EnsembleSpec EnsembleDesc::make(std::size_t n) const {
  if (kind == "gaussian") return EnsembleSpec::gaussian(n, normalize);
  if (kind == "rademacher") return EnsembleSpec::rademacher(n, normalize);
  if (kind == "exppower") return EnsembleSpec::exp_power(n, alpha, normalize);
  if (kind == "l1ball") return EnsembleSpec::l1_ball(n, normalize);
  const auto stored = load_matrix(matrix);
  if (static_cast<std::size_t>(stored.rows.cols()) != n)
    throw ConfigError("user matrix '" + matrix + "' has dimension " + std::to_string(stored.rows.cols()) +
                      ", grid asks for " + std::to_string(n));
  return EnsembleSpec::user(stored.rows, normalize);
}

std::size_t EnsembleDesc::fixed_dim() const {
  if (kind != "user") return 0;
  return static_cast<std::size_t>(load_matrix(matrix).rows.cols());
}

IndexClass ClassDesc::make(std::size_t n) const {
  if (kind == "sphere") return IndexClass::sphere(n);
  if (kind == "l1_vertices") return IndexClass::l1_vertices(n);
  if (kind == "log_weighted_basis") return IndexClass::log_weighted_basis(n);
  if (kind == "weighted_basis") {
    if (weights.size() != n)
      throw ConfigError("class weights have length " + std::to_string(weights.size()) + ", grid asks for n = " +
                        std::to_string(n));
    return IndexClass::weighted_basis(weights);
  }
  if (kind == "basis_vector") {
    if (index >= n) throw ConfigError("class.index is out of range for n = " + std::to_string(n));
    Matrix e = Matrix::Zero(1, static_cast<Eigen::Index>(n));
    e(0, static_cast<Eigen::Index>(index)) = 1.0;
    return IndexClass::finite(e);
  }
  if (static_cast<std::size_t>(vectors.cols()) != n)
    throw ConfigError("class vectors have dimension " + std::to_string(vectors.cols()) + ", grid asks for n = " +
                      std::to_string(n));
  return IndexClass::finite(vectors);
}

std::vector<std::size_t> ExperimentConfig::sizes(const std::string& name) const {
  if (!grid.contains(name)) fail("grid." + name, "is missing");
  if (!grid[name].is_array()) fail("grid." + name, "must be an array");
  std::vector<std::size_t> out;
  for (const auto& v : grid[name]) out.push_back(read_size(v, "grid." + name));
  return out;
}

std::vector<std::size_t> ExperimentConfig::sizes(const std::string& name, std::vector<std::size_t> fallback) const {
  return grid.contains(name) ? sizes(name) : fallback;
}

std::vector<double> ExperimentConfig::reals(const std::string& name) const {
  if (!grid.contains(name)) fail("grid." + name, "is missing");
  if (!grid[name].is_array()) fail("grid." + name, "must be an array");
  std::vector<double> out;
  for (const auto& v : grid[name]) out.push_back(read_real(v, "grid." + name));
  return out;
}

std::vector<double> ExperimentConfig::reals(const std::string& name, std::vector<double> fallback) const {
  return grid.contains(name) ? reals(name) : fallback;
}

double ExperimentConfig::param(const std::string& name, double fallback) const {
  return params.contains(name) ? read_real(params[name], "params." + name) : fallback;
}

std::size_t ExperimentConfig::param_size(const std::string& name, std::size_t fallback) const {
  return params.contains(name) ? read_size(params[name], "params." + name) : fallback;
}

std::string ExperimentConfig::param_string(const std::string& name, const std::string& fallback) const {
  if (!params.contains(name)) return fallback;
  if (!params[name].is_string()) fail("params." + name, "must be a string");
  return params[name].get<std::string>();
}

const EnsembleDesc& ExperimentConfig::ensemble() const {
  if (ensembles.empty()) fail("ensemble", "is missing");
  return ensembles.front();
}

const ClassDesc& ExperimentConfig::index_class() const {
  if (classes.empty()) fail("class", "is missing");
  return classes.front();
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": parse error");
  }
  ExperimentConfig cfg;
  fill(cfg, doc);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void override_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.raw["seed"] = seed;
}

std::uint64_t config_hash(const Json& raw) {
  const std::string s = raw.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace psichain::cli
