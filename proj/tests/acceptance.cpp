// Acceptance runner: one line per criterion. Each criterion loads its shipped
// config, runs it through the CLI library, and rechecks the emitted rows with
// hardcoded thresholds and a wall-clock limit.

#include "cli/config.hpp"
#include "cli/report.hpp"
#include "cli/runners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace psichain::cli;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string num(double v) { return cell(v); }

const Table& table(const Report& r, const std::string& name) {
  const auto* t = r.find(name);
  if (!t) throw std::runtime_error("report has no table " + name);
  return *t;
}

std::size_t col(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw std::runtime_error("table " + t.name + " has no column " + name);
  return static_cast<std::size_t>(it - t.columns.begin());
}

double real(const std::vector<std::string>& row, const Table& t, const std::string& name) {
  const auto& s = row[col(t, name)];
  if (s == "inf") return std::numeric_limits<double>::infinity();
  return std::stod(s);
}

std::string text(const std::vector<std::string>& row, const Table& t, const std::string& name) {
  return row[col(t, name)];
}

// Ordinary least squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::filesystem::path config_dir() { return PSICHAIN_CONFIG_DIR; }

std::filesystem::path config_path(int id) {
  char prefix[32];
  std::snprintf(prefix, sizeof prefix, "criterion%02d_", id);
  for (const auto& e : std::filesystem::directory_iterator(config_dir()))
    if (e.path().filename().string().starts_with(prefix)) return e.path();
  throw std::runtime_error(std::string("no config for ") + prefix);
}

struct Timed {
  Report report;
  double seconds = 0;
};

Timed run(const ExperimentConfig& cfg, unsigned threads = 0) {
  RunOptions opt;
  opt.threads = threads;
  const auto start = std::chrono::steady_clock::now();
  Timed t{run_experiment(cfg, opt), 0};
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

void check_common(Verdict& v, const Timed& t, double limit) {
  v.require(t.report.status == "complete", "status " + t.report.status);
  v.require(t.seconds < limit, "runtime " + num(t.seconds) + " s < " + num(limit) + " s");
}

Verdict criterion1(const ExperimentConfig& cfg) {
  Verdict v;
  const auto t = run(cfg);
  const auto& tab = table(t.report, "approx");
  std::size_t cells = 0;
  bool all = true;
  double worst = 0;
  for (const auto& row : tab.rows) {
    const double N = real(row, tab, "N"), m = real(row, tab, "m");
    ++cells;
    all = all && real(row, tab, "instances") == 1000 && real(row, tab, "violations") == 0 &&
          real(row, tab, "invariant_failures") == 0 && real(row, tab, "max_error") <= m / N;
    worst = std::max(worst, real(row, tab, "max_error") / (m / N));
  }
  v.require(cells == 6, "6 (N, m) cells");
  v.require(all, "every instance within m/N, worst error/(m/N) " + num(worst));
  check_common(v, t, 30);
  return v;
}

Verdict criterion2(const ExperimentConfig& cfg) {
  Verdict v;
  const auto t = run(cfg);
  const auto& tab = table(t.report, "peeling");
  v.require(tab.rows.size() == 2, "alpha in {1, 2}");
  for (const auto& row : tab.rows) {
    const double n = real(row, tab, "instances");
    const std::string a = text(row, tab, "alpha");
    v.require(n == 1000 && real(row, tab, "cardinality_pass") == n, "alpha " + a + " cardinality on all instances");
    v.require(real(row, tab, "mass_pass") == n && real(row, tab, "max_c3") <= 5.0,
              "alpha " + a + " mass, max c3 " + num(real(row, tab, "max_c3")));
  }
  check_common(v, t, 30);
  return v;
}

Verdict criterion3(const ExperimentConfig& cfg) {
  Verdict v;
  const auto t = run(cfg);
  const auto& tab = table(t.report, "orlicz");
  std::map<std::string, bool> seen;
  double worst = 0;
  for (const auto& row : tab.rows) {
    seen[text(row, tab, "case")] = true;
    worst = std::max(worst, real(row, tab, "error"));
  }
  for (const char* c : {"zero", "constant", "two-point", "gaussian", "laplace"}) v.require(seen.count(c), c);
  v.require(worst <= 1e-10, "max relative error " + num(worst));
  check_common(v, t, 1);
  return v;
}

Verdict criterion4(const ExperimentConfig& cfg) {
  Verdict v;
  const auto t = run(cfg);
  const auto& tab = table(t.report, "diameters");
  double rlo = std::numeric_limits<double>::infinity(), rhi = 0, nlo = rlo, nhi = 0;
  for (const auto& row : tab.rows) {
    const double n = real(row, tab, "n"), N = real(row, tab, "N"), m = real(row, tab, "m");
    const double d = real(row, tab, "median_Dm");
    const double reg = d / (std::sqrt(n) + std::sqrt(m * std::log(std::numbers::e * N / m)));
    const double naive = d / std::sqrt(n * m);
    rlo = std::min(rlo, reg);
    rhi = std::max(rhi, reg);
    nlo = std::min(nlo, naive);
    nhi = std::max(nhi, naive);
    v.pass = v.pass && real(row, tab, "trials") == 20;
  }
  v.require(!tab.rows.empty(), "rows present");
  v.require(rlo >= 0.3 && rhi <= 3.0, "regularized ratio range [" + num(rlo) + ", " + num(rhi) + "] in [0.3, 3]");
  v.require(nhi / nlo > 10.0, "naive ratio spread " + num(nhi / nlo) + " > 10");
  check_common(v, t, 300);
  return v;
}

Verdict criterion5(const ExperimentConfig& cfg) {
  Verdict v;
  const auto t = run(cfg);
  const auto& tab = table(t.report, "concentration");
  std::vector<double> Ns, emp;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& row : tab.rows) {
    const double n = real(row, tab, "n"), N = real(row, tab, "N"), e = real(row, tab, "empirical");
    Ns.push_back(N);
    emp.push_back(e);
    const double r = e / std::max(std::sqrt(n / N), n / N);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  v.require(Ns.size() == 7, "7 cells");
  const double slope = loglog_slope(Ns, emp);
  v.require(std::abs(slope + 0.5) <= 0.1, "slope " + num(slope) + " = -0.5 +- 0.1");
  v.require(lo >= 0.5 && hi <= 4.0, "rate ratio range [" + num(lo) + ", " + num(hi) + "] in [0.5, 4]");
  check_common(v, t, 180);
  return v;
}

Verdict criterion6(const ExperimentConfig& cfg) {
  Verdict v;
  const auto t = run(cfg);
  const auto& tab = table(t.report, "concentration");
  std::vector<double> ns, d2, rpsi2;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& row : tab.rows) {
    const double n = real(row, tab, "n"), N = real(row, tab, "N");
    v.pass = v.pass && N == 64 * n;
    ns.push_back(n);
    d2.push_back(real(row, tab, "d2"));
    rpsi2.push_back(real(row, tab, "empirical") / real(row, tab, "bound_psi2"));
    const double ra = real(row, tab, "empirical") / real(row, tab, "bound_A");
    lo = std::min(lo, ra);
    hi = std::max(hi, ra);
  }
  v.require(ns.size() == 3, "3 cells with N = 64 n");
  const double s2 = loglog_slope(ns, d2);
  v.require(std::abs(s2 - 0.5) <= 0.15, "d_psi2 slope " + num(s2) + " = 0.5 +- 0.15");
  v.require(hi <= 3.0 * lo, "empirical/bound_A range [" + num(lo) + ", " + num(hi) + "] within factor 3");
  const double sr = loglog_slope(ns, rpsi2);
  v.require(std::abs(sr + 0.5) <= 0.2, "empirical/bound_psi2 slope " + num(sr) + " = -0.5 +- 0.2");
  check_common(v, t, 300);
  return v;
}

Verdict criterion7(const ExperimentConfig& cfg) {
  Verdict v;
  const auto t = run(cfg);
  const auto& tab = table(t.report, "decomposition");
  std::size_t total = 0, contained = 0, linf = 0;
  for (const auto& row : tab.rows) {
    ++total;
    contained += text(row, tab, "containment") == "true";
    const bool exact = real(row, tab, "regular_linf_ratio") <= 1.0 && text(row, tab, "linf_holds") == "true";
    linf += exact;
  }
  v.require(total == 200, num(static_cast<double>(total)) + " trials");
  const double freq = total ? static_cast<double>(contained) / static_cast<double>(total) : 0.0;
  v.require(freq >= 0.9, "containment frequency " + num(freq) + " >= 0.9");
  v.require(linf == total, "regular L_inf <= lambda t in " + num(static_cast<double>(linf)) + "/" +
                               num(static_cast<double>(total)));
  check_common(v, t, 120);
  return v;
}

Verdict criterion8(const ExperimentConfig& cfg) {
  Verdict v;
  const auto t = run(cfg);
  const auto& tab = table(t.report, "symmetrization");
  std::map<std::string, int> groups;
  std::size_t valid = 0, bad = 0;
  for (const auto& row : tab.rows) {
    groups[text(row, tab, "ensemble") + "/" + text(row, tab, "class")] += 1;
    if (text(row, tab, "valid") != "true") continue;
    ++valid;
    const double lhs = real(row, tab, "lhs"), rhs = real(row, tab, "rhs"), se = real(row, tab, "standard_error");
    bad += lhs > 4.0 * rhs + 3.0 * se;
  }
  v.require(groups.size() == 6, "3 classes x 2 ensembles");
  v.require(cfg.trials >= 1000, "1000 trials");
  v.require(valid > 0 && bad == 0, num(static_cast<double>(bad)) + " violations over " +
                                       num(static_cast<double>(valid)) + " valid t");
  check_common(v, t, 120);
  return v;
}

Verdict criterion9(const ExperimentConfig& cfg) {
  Verdict v;
  const auto t = run(cfg);
  const auto& tab = table(t.report, "optimality");
  for (const auto& row : tab.rows) {
    const auto arm = text(row, tab, "arm");
    if (arm == "separation") {
      v.require(real(row, tab, "n") == 1048576 && real(row, tab, "N") == 2 && real(row, tab, "trials") == 200 &&
                    real(row, tab, "alpha") == 1,
                "alpha 1, n 2^20, N 2, 200 trials");
      v.require(real(row, tab, "frequency") >= 0.2, "frequency " + num(real(row, tab, "frequency")) + " >= 0.2");
    } else {
      v.require(real(row, tab, "n") == real(row, tab, "N"), "control N = n");
      v.require(real(row, tab, "median_R") < 2.0, "control median R " + num(real(row, tab, "median_R")) + " < 2");
    }
  }
  v.require(tab.rows.size() == 2, "two arms");
  check_common(v, t, 180);
  return v;
}

Verdict criterion10(const ExperimentConfig& cfg) {
  Verdict v;
  const auto t = run(cfg);
  const auto& ops = table(t.report, "opnorm_checks");
  double worst = 0;
  for (const auto& row : ops.rows) {
    const double oracle = real(row, ops, "oracle");
    worst = std::max(worst, std::abs(real(row, ops, "value") - oracle) / std::max(1.0, std::abs(oracle)));
  }
  v.require(!ops.rows.empty() && worst <= 1e-8, "operator norm max deviation " + num(worst));
  const auto& ker = table(t.report, "kernel_checks");
  double kw = 0;
  for (const auto& row : ker.rows) {
    const double exact = real(row, ker, "exact"), oracle = real(row, ker, "oracle");
    kw = std::max(kw, std::abs(exact - oracle) / exact);
  }
  v.require(!ker.rows.empty() && kw <= 0.01, "kernel diameter max relative gap " + num(kw));
  const auto& shr = table(t.report, "shrinking");
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& row : shr.rows) {
    lo = std::min(lo, real(row, shr, "ratio_mean"));
    hi = std::max(hi, real(row, shr, "ratio_mean"));
  }
  v.require(!shr.rows.empty() && lo >= 0.7 && hi <= 1.4, "shrinking ratio range [" + num(lo) + ", " + num(hi) + "]");
  check_common(v, t, 120);
  return v;
}

Verdict criterion11(const ExperimentConfig& cfg) {
  Verdict v;
  const auto t = run(cfg);
  const auto& tab = table(t.report, "unconditional");
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& row : tab.rows) {
    const double r = real(row, tab, "value") / std::sqrt(real(row, tab, "n"));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  v.require(tab.rows.size() == 3, "n in {16, 64, 256}");
  v.require(hi < 2.0 * lo, "ratio range [" + num(lo) + ", " + num(hi) + "] within factor 2");
  check_common(v, t, 60);
  return v;
}

Verdict criterion12(const ExperimentConfig& cfg) {
  Verdict v;
  const auto one = run(cfg, 1);
  const auto eight = run(cfg, 8);
  v.require(one.report.tables.size() == eight.report.tables.size(), "same tables");
  std::size_t rows = 0;
  bool same = true;
  for (std::size_t i = 0; i < std::min(one.report.tables.size(), eight.report.tables.size()); ++i) {
    same = same && to_csv(one.report.tables[i]) == to_csv(eight.report.tables[i]);
    rows += one.report.tables[i].rows.size();
  }
  v.require(rows > 0 && same, "identical rows for 1 and 8 threads (" + num(static_cast<double>(rows)) + " rows)");
  check_common(v, one, 60);
  check_common(v, eight, 60);
  return v;
}

const std::vector<std::pair<std::string, std::function<Verdict(const ExperimentConfig&)>>> kCriteria = {
    {"exact net approximation", criterion1},
    {"exact peeling", criterion2},
    {"orlicz solver exactness", criterion3},
    {"diameter scaling", criterion4},
    {"deviation rate", criterion5},
    {"psi1 vs psi2 separation", criterion6},
    {"decomposition containment", criterion7},
    {"symmetrization", criterion8},
    {"optimality counterexample", criterion9},
    {"applications exactness", criterion10},
    {"unconditional sphere complexity", criterion11},
    {"determinism", criterion12},
};

bool run_one(int id) {
  const auto& [name, fn] = kCriteria.at(static_cast<std::size_t>(id - 1));
  Verdict v;
  try {
    v = fn(load_config(config_path(id)));
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("error: ") + e.what();
  }
  std::printf("criterion %2d %-32s %s  %s\n", id, name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
  std::fflush(stdout);
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) ids.push_back(i);
  bool all = true;
  for (int id : ids) {
    if (id < 1 || id > static_cast<int>(kCriteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    all = run_one(id) && all;
  }
  return all ? 0 : 1;
}
