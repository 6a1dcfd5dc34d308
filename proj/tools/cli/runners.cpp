#include "cli/runners.hpp"

#include "psichain/applications.hpp"
#include "psichain/complexity.hpp"
#include "psichain/concentration.hpp"
#include "psichain/decompose.hpp"
#include "psichain/diameters.hpp"
#include "psichain/nets.hpp"
#include "psichain/orlicz.hpp"
#include "psichain/parallel.hpp"
#include "psichain/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace psichain::cli {

void RunContext::tick(const std::string& where) const {
  if (std::chrono::steady_clock::now() > deadline) throw BudgetExceeded("budget exhausted at " + where);
}

namespace {

using Runner = std::function<void(RunContext&)>;

std::string fmt(double v) { return cell(v); }

bool in_range(const Json& bounds, double v) {
  return v >= bounds.at(0).get<double>() && v <= bounds.at(1).get<double>();
}

std::string range_text(const Json& bounds) {
  return "[" + fmt(bounds.at(0).get<double>()) + ", " + fmt(bounds.at(1).get<double>()) + "]";
}

void check_range(Report& r, const ExperimentConfig& cfg, const std::string& key, const std::string& what, double v) {
  if (!cfg.expect.contains(key)) return;
  const auto& b = cfg.expect[key];
  if (!b.is_array() || b.size() != 2) throw ConfigError("config field 'expect." + key + "' must be [lo, hi]");
  r.check(what + " in " + range_text(b), in_range(b, v), "value " + fmt(v));
}

double expect_value(const ExperimentConfig& cfg, const std::string& key, double fallback) {
  if (!cfg.expect.contains(key)) return fallback;
  if (!cfg.expect[key].is_number()) throw ConfigError("config field 'expect." + key + "' must be a number");
  return cfg.expect[key].get<double>();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<std::size_t> m_grid(const ExperimentConfig& cfg, std::size_t N) {
  if (!cfg.grid.contains("m") || (cfg.grid["m"].is_string() && cfg.grid["m"].get<std::string>() == "dyadic"))
    return dyadic_grid(N);
  if (cfg.grid["m"].is_string()) throw ConfigError("config field 'grid.m' must be an array or \"dyadic\"");
  std::vector<std::size_t> out;
  for (std::size_t m : cfg.sizes("m"))
    if (m <= N) out.push_back(m);
  return out;
}

std::vector<std::size_t> dims(const ExperimentConfig& cfg) {
  const std::size_t fixed = cfg.ensembles.empty() ? 0 : cfg.ensemble().fixed_dim();
  if (fixed) return {fixed};
  return cfg.sizes("n");
}

// ---------------------------------------------------------------- nets

void nets_approx(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("approx", {"N", "m", "instances", "max_error", "bound", "violations",
                                            "invariant_failures"});
  const std::size_t instances = cfg.param_size("instances", 1000);
  for (std::size_t N : cfg.sizes("N")) {
    for (std::size_t m : cfg.sizes("m")) {
      BlockNetParams p;
      p.N = N;
      p.m = m;
      try {
        p.validate();
      } catch (const std::exception& e) {
        throw ConfigError("unsupported combination N = " + std::to_string(N) + ", m = " + std::to_string(m) + ": " +
                          e.what());
      }
      std::vector<double> err(instances);
      std::vector<char> inv(instances);
      parallel_for(instances, [&](std::size_t i) {
        Rng rng(derive_seed(cfg.seed, N, m, i));
        std::vector<std::size_t> idx(N);
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t k = 0; k < m; ++k) std::swap(idx[k], idx[k + rng.below(N - k)]);
        std::vector<double> v(N, 0.0);
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          v[idx[k]] = rng.normal();
          s += v[idx[k]] * v[idx[k]];
        }
        for (double& x : v) x /= std::sqrt(s);
        const auto a = approximate_in_block_net(v, p);
        err[i] = a.error;
        inv[i] = satisfies_invariants(a.point, p);
      });
      const double bound = static_cast<double>(m) / static_cast<double>(N);
      const auto violations = static_cast<std::size_t>(std::count_if(err.begin(), err.end(), [&](double e) { return e > bound; }));
      const auto bad = static_cast<std::size_t>(std::count(inv.begin(), inv.end(), 0));
      const double max_err = *std::max_element(err.begin(), err.end());
      table.add({cell(N), cell(m), cell(instances), fmt(max_err), fmt(bound), cell(violations), cell(bad)});
      ctx.report.check("approx_error <= m/N (N=" + std::to_string(N) + ", m=" + std::to_string(m) + ")",
                       violations == 0 && bad == 0,
                       "max error " + fmt(max_err) + ", bound " + fmt(bound));
      ctx.tick("N=" + std::to_string(N) + " m=" + std::to_string(m));
    }
  }
}

void nets_linearization(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("linearization", {"ensemble", "class", "n", "N", "m", "trial", "D_m", "sup_Bm", "ratio",
                                                   "holds"});
  for (std::size_t n : dims(cfg)) {
    const auto spec = cfg.ensemble().make(n);
    const auto K = cfg.index_class().make(n);
    for (std::size_t N : cfg.sizes("N")) {
      for (std::size_t m : cfg.sizes("m")) {
        BlockNetParams p;
        p.N = N;
        p.m = m;
        bool all = true;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
          const auto X = sample(spec, N, derive_seed(cfg.seed, n, N, m, t));
          const auto r = linearization_check(X, K, p);
          all = all && r.holds;
          table.add({spec.name(), K.name(), cell(n), cell(N), cell(m), cell(t), fmt(r.D_m), fmt(r.sup_Bm), fmt(r.ratio),
                     cell(r.holds)});
        }
        ctx.report.check("D_m <= 2 sup_Bm (n=" + std::to_string(n) + ", N=" + std::to_string(N) + ", m=" +
                             std::to_string(m) + ")",
                         all);
        ctx.tick("linearization cell");
      }
    }
  }
}

// ---------------------------------------------------------------- orlicz

void orlicz_analytic(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("orlicz", {"case", "alpha", "computed", "expected", "error", "pass"});
  const double tol = expect_value(cfg, "tolerance", 1e-10);
  bool all = true;
  auto row = [&](const std::string& name, double alpha, double computed, double expected) {
    const double err = expected == 0.0 ? std::abs(computed) : std::abs(computed - expected) / std::abs(expected);
    const bool ok = err <= tol;
    all = all && ok;
    table.add({name, fmt(alpha), fmt(computed), fmt(expected), fmt(err), cell(ok)});
  };
  for (double alpha : cfg.reals("alpha", {1.0, 2.0})) {
    const OrliczIndex a(alpha);
    row("zero", alpha, empirical_psi_norm(EmpiricalVector(std::vector<double>(5, 0.0)), a), 0.0);
    row("constant", alpha, empirical_psi_norm(EmpiricalVector(std::vector<double>(7, 3.0)), a),
        3.0 / std::pow(std::log(2.0), 1.0 / alpha));
    row("two-point", alpha, empirical_psi_norm(EmpiricalVector(std::vector<double>{2.0, 0.0}), a),
        2.0 / std::pow(std::log(3.0), 1.0 / alpha));
  }
  row("gaussian", 2.0, dist_psi_norm(AnalyticLaw::gaussian(1.5), OrliczIndex(2.0)), 1.5 * std::sqrt(8.0 / 3.0));
  row("laplace", 1.0, dist_psi_norm(AnalyticLaw::laplace(1.0), OrliczIndex(1.0)), 2.0);
  ctx.report.check("analytic psi norms within " + fmt(tol), all);
}

// ---------------------------------------------------------------- diameters

void diam_scaling(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("diameters", {"ensemble", "class", "n", "N", "m", "trials", "median_Dm", "method",
                                               "ratio_regularized", "ratio_naive"});
  std::vector<double> reg, naive;
  for (std::size_t n : dims(cfg)) {
    const auto spec = cfg.ensemble().make(n);
    const auto K = cfg.index_class().make(n);
    for (std::size_t N : cfg.sizes("N")) {
      const auto ms = m_grid(cfg, N);
      std::vector<std::vector<double>> values(cfg.trials, std::vector<double>(ms.size()));
      std::vector<std::vector<DmMethod>> methods(cfg.trials, std::vector<DmMethod>(ms.size()));
      parallel_for(cfg.trials, [&](std::size_t t) {
        const auto X = sample(spec, N, derive_seed(cfg.seed, n, N, t));
        Vector warm;
        for (std::size_t c = 0; c < ms.size(); ++c) {
          DmOptions o;
          o.seed = derive_seed(cfg.seed, n, N, t, ms[c]);
          if (warm.size()) o.warm_start = &warm;
          const auto r = empirical_Dm(X, K, ms[c], o);
          values[t][c] = r.value;
          methods[t][c] = r.method;
          if (r.direction.size()) warm = r.direction;
        }
      });
      for (std::size_t c = 0; c < ms.size(); ++c) {
        std::vector<double> col;
        DmMethod method = DmMethod::ExactTopM;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
          col.push_back(values[t][c]);
          if (methods[t][c] == DmMethod::GreedyLower) method = DmMethod::GreedyLower;
          else if (method != DmMethod::GreedyLower) method = methods[t][c];
        }
        const double med = median_of(col);
        const double m = static_cast<double>(ms[c]);
        const double nd = static_cast<double>(n);
        const double r1 = med / (std::sqrt(nd) + std::sqrt(m * std::log(std::numbers::e * static_cast<double>(N) / m)));
        const double r2 = med / std::sqrt(nd * m);
        reg.push_back(r1);
        naive.push_back(r2);
        table.add({spec.name(), K.name(), cell(n), cell(N), cell(ms[c]), cell(cfg.trials), fmt(med), to_string(method),
                   fmt(r1), fmt(r2)});
      }
      ctx.tick("n=" + std::to_string(n) + " N=" + std::to_string(N));
    }
  }
  if (reg.empty()) return;
  const auto [rlo, rhi] = std::minmax_element(reg.begin(), reg.end());
  const auto [nlo, nhi] = std::minmax_element(naive.begin(), naive.end());
  const double spread = *nhi / *nlo;
  auto& s = ctx.report.table("diameter_summary", {"regularized_min", "regularized_max", "naive_min", "naive_max",
                                                  "naive_spread"});
  s.add({fmt(*rlo), fmt(*rhi), fmt(*nlo), fmt(*nhi), fmt(spread)});
  if (cfg.expect.contains("regularized_band")) {
    const auto& b = cfg.expect["regularized_band"];
    ctx.report.check("regularized ratio within " + range_text(b), in_range(b, *rlo) && in_range(b, *rhi),
                     "range [" + fmt(*rlo) + ", " + fmt(*rhi) + "]");
  }
  if (cfg.expect.contains("naive_spread_min")) {
    const double need = expect_value(cfg, "naive_spread_min", 10.0);
    ctx.report.check("naive ratio exits every factor-" + fmt(need) + " band", spread > need, "spread " + fmt(spread));
  }
}

void diam_profile(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("profile", {"ensemble", "class", "n", "N", "trial", "m", "empirical", "method",
                                             "term_gamma2", "term_tail", "ratio", "m0", "seed"});
  const OrliczIndex a(cfg.param("alpha", 1.0));
  const double u = cfg.param("u", 1.0);
  double worst = 0.0;
  for (std::size_t n : dims(cfg)) {
    const auto spec = cfg.ensemble().make(n);
    const auto K = cfg.index_class().make(n);
    ComplexityOptions co;
    co.seed = derive_seed(cfg.seed, n, 1);
    const auto est = estimate_complexity(spec, K, a, co);
    for (std::size_t N : cfg.sizes("N")) {
      const auto m0 = crossover_m0(est.gamma2_upper, est.d_psi_alpha, a, N);
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto seed = derive_seed(cfg.seed, n, N, t);
        const auto X = sample(spec, N, seed);
        DmOptions o;
        o.seed = derive_seed(cfg.seed, n, N, t, 2);
        const auto prof = diameter_profile(X, K, m_grid(cfg, N), est, a, u, o);
        for (const auto& r : prof.rows) {
          worst = std::max(worst, r.ratio);
          table.add({spec.name(), K.name(), cell(n), cell(N), cell(t), cell(r.m), fmt(r.empirical), to_string(r.method),
                     fmt(r.bound.term_gamma2), fmt(r.bound.term_tail), fmt(r.ratio), cell(m0), cell(seed, true)});
        }
        ctx.tick("profile trial");
      }
    }
  }
  check_range(ctx.report, cfg, "ratio_max", "largest D_m / bound", worst);
}

void diam_lp(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("lp", {"ensemble", "class", "n", "N", "k", "p", "trial", "empirical", "bound",
                                        "large_regime", "m0"});
  const OrliczIndex a(cfg.param("alpha", 1.0));
  for (std::size_t n : dims(cfg)) {
    const auto spec = cfg.ensemble().make(n);
    const auto K = cfg.index_class().make(n);
    ComplexityOptions co;
    co.seed = derive_seed(cfg.seed, n, 1);
    const auto est = estimate_complexity(spec, K, a, co);
    for (std::size_t N : cfg.sizes("N")) {
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto X = sample(spec, N, derive_seed(cfg.seed, n, N, t));
        for (std::size_t k : cfg.sizes("k"))
          for (double p : cfg.reals("p")) {
            if (k > N) continue;
            const auto r = lp_diameter(X, K, k, p, est, a);
            table.add({spec.name(), K.name(), cell(n), cell(N), cell(k), fmt(p), cell(t), fmt(r.empirical), fmt(r.bound),
                       cell(r.large_regime), cell(r.m0)});
          }
        ctx.tick("lp trial");
      }
    }
  }
}

// ---------------------------------------------------------------- decompose

void decompose_peel(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("peeling", {"alpha", "instances", "cardinality_pass", "mass_pass", "max_c3",
                                             "refinement_applicable", "refinement_holds"});
  const std::size_t instances = cfg.param_size("instances", 1000);
  const std::size_t N_min = cfg.param_size("N_min", 8);
  const std::size_t N_max = cfg.param_size("N_max", 128);
  if (N_max < N_min) throw ConfigError("config field 'params.N_max' must be at least params.N_min");
  for (double alpha : cfg.reals("alpha", {1.0, 2.0})) {
    const OrliczIndex a(alpha);
    std::vector<Peeling> out(instances);
    parallel_for(instances, [&](std::size_t i) {
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(alpha * 1000.0), i));
      const std::size_t N = N_min + rng.below(N_max - N_min + 1);
      std::vector<double> v(N);
      const auto shape = rng.below(3);
      for (auto& x : v) {
        if (shape == 0) x = rng.normal();
        else if (shape == 1) x = rng.sign() * rng.exponential();
        else x = rng.sign() / rng.uniform_open();
      }
      const double A = std::exp(4.0 * rng.uniform() - 2.0);
      const double B = std::exp(4.0 * rng.uniform() - 2.0);
      // Rescale into the premise, then draw beta in the refinement regime.
      const auto pc = peeling_premise(EmpiricalVector(v), A, B, a);
      const double s = (0.5 + 0.5 * rng.uniform()) / pc.worst_ratio;
      for (auto& x : v) x *= s;
      const double Nd = static_cast<double>(N);
      const double thr = kPeelC1 * B *
                         std::max(std::pow(std::max(std::log(kPeelC2 * Nd * B * B / (A * A)), 0.0), 1.0 / alpha), 1.0);
      const double beta = thr * (1.0 + 2.0 * rng.uniform());
      out[i] = peel(EmpiricalVector(v), A, B, a, beta);
    });
    std::size_t card = 0, mass = 0, app = 0, ref = 0;
    double c3 = 0.0;
    for (const auto& p : out) {
      card += p.cardinality_holds;
      mass += p.mass_holds;
      app += p.refinement_applicable;
      ref += p.refinement_applicable && p.refinement_holds;
      c3 = std::max(c3, p.c3);
    }
    table.add({fmt(alpha), cell(instances), cell(card), cell(mass), fmt(c3), cell(app), cell(ref)});
    const std::string tag = " (alpha=" + fmt(alpha) + ")";
    ctx.report.check("cardinality bound" + tag, card == instances, cell(card) + "/" + cell(instances));
    ctx.report.check("peaky mass <= " + fmt(kPeelMassConstant) + " A" + tag, mass == instances, "max c3 " + fmt(c3));
    ctx.tick("alpha " + fmt(alpha));
  }
}

void decompose_class_mode(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table(
      "decomposition", {"ensemble", "class", "n", "N", "trial", "t", "lambda", "beta", "gamma2", "d_psi", "support_mult",
                        "peaky_l2_mult", "second_moment_mult", "regular_psi_mult", "regular_linf_ratio", "containment",
                        "linf_holds", "algebra_holds"});
  const OrliczIndex a(cfg.param("alpha", 2.0));
  const double t = cfg.param("t", kCalibratedT);
  std::size_t total = 0, contained = 0, linf = 0, algebra = 0;
  for (std::size_t n : dims(cfg)) {
    const auto spec = cfg.ensemble().make(n);
    const auto K = cfg.index_class().make(n);
    ComplexityOptions co;
    co.seed = derive_seed(cfg.seed, n, 1);
    const auto est = estimate_complexity(spec, K, a, co);
    for (std::size_t N : cfg.sizes("N")) {
      std::vector<ClassDecomposition> out(cfg.trials);
      parallel_for(cfg.trials, [&](std::size_t trial) {
        const auto X = sample(spec, N, derive_seed(cfg.seed, n, N, trial));
        DecomposeOptions o;
        o.seed = derive_seed(cfg.seed, n, N, trial, 1);
        o.fresh_samples = cfg.param_size("fresh_samples", 100000);
        o.keep_vectors = true;
        out[trial] = decompose_class(X, K, est, a, t, o);
        for (auto& p : out[trial].parts) p.values = p.regular = p.peaky = Vector();
      });
      for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        const auto& d = out[trial];
        ++total;
        contained += d.containment;
        linf += d.linf_holds;
        algebra += d.algebra_holds;
        table.add({spec.name(), K.name(), cell(n), cell(N), cell(trial), fmt(t), fmt(d.lambda), fmt(d.beta), fmt(d.gamma2),
                   fmt(d.d_psi), fmt(d.support_mult), fmt(d.peaky_l2_mult), fmt(d.second_moment_mult),
                   fmt(d.regular_psi_mult), fmt(d.regular_linf_ratio), cell(d.containment), cell(d.linf_holds),
                   cell(d.algebra_holds)});
      }
      ctx.tick("n=" + std::to_string(n) + " N=" + std::to_string(N));
    }
  }
  if (total == 0) return;
  const double freq = static_cast<double>(contained) / static_cast<double>(total);
  auto& s = ctx.report.table("decomposition_summary",
                             {"trials", "containment_frequency", "linf_frequency", "algebra_frequency"});
  s.add({cell(total), fmt(freq), fmt(static_cast<double>(linf) / static_cast<double>(total)),
         fmt(static_cast<double>(algebra) / static_cast<double>(total))});
  const double need = expect_value(cfg, "containment_min", 0.9);
  ctx.report.check("containment frequency >= " + fmt(need), freq >= need, "frequency " + fmt(freq));
  ctx.report.check("regular L_inf <= lambda t on every trial", linf == total, cell(linf) + "/" + cell(total));
  ctx.report.check("f = phi + psi and supp(psi) on every trial", algebra == total, cell(algebra) + "/" + cell(total));
}

void decompose_heavy(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("heavy", {"ensemble", "class", "n", "N", "trial", "lambda", "beta", "peaky_support",
                                           "regular_psi", "d_psi", "regular_ratio"});
  const OrliczIndex a(cfg.param("alpha", 1.0));
  const double t = cfg.param("t", 1.0);
  const std::size_t n = dims(cfg).front();
  const std::size_t N = cfg.sizes("N").front();
  const auto spec = cfg.ensemble().make(n);
  const auto K = cfg.index_class().make(n);
  ComplexityOptions co;
  co.seed = derive_seed(cfg.seed, 1);
  const auto est = estimate_complexity(spec, K, a, co);
  std::vector<ClassDecomposition> out(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t trial) {
    const auto X = sample(spec, N, derive_seed(cfg.seed, 0, trial));
    DecomposeOptions o;
    o.seed = derive_seed(cfg.seed, 2, trial);
    o.fresh_samples = cfg.param_size("fresh_samples", 100000);
    o.keep_vectors = false;
    out[trial] = decompose_class(X, K, est, a, t, o);
  });
  std::size_t nonempty = 0;
  double worst = 0.0;
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    const auto& d = out[trial];
    std::size_t support = 0;
    double psi = 0.0;
    for (const auto& p : d.parts) {
      support = std::max(support, p.peaky_support);
      psi = std::max(psi, p.regular_psi);
    }
    nonempty += support > 0;
    const double ratio = psi / d.d_psi;
    worst = std::max(worst, ratio);
    table.add({spec.name(), K.name(), cell(n), cell(N), cell(trial), fmt(d.lambda), fmt(d.beta), cell(support), fmt(psi),
               fmt(d.d_psi), fmt(ratio)});
  }
  const double freq = static_cast<double>(nonempty) / static_cast<double>(cfg.trials);
  const double need = expect_value(cfg, "peaky_nonempty_min", 0.5);
  const double factor = expect_value(cfg, "regular_psi_factor", 3.0);
  ctx.report.check("peaky part nonempty in >= " + fmt(need) + " of trials", freq >= need, "frequency " + fmt(freq));
  ctx.report.check("regular psi norm within factor " + fmt(factor) + " of d_psi", worst <= factor,
                   "largest ratio " + fmt(worst));
}

void decompose_rudelson(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("rudelson", {"ensemble", "class", "n", "N", "R_N", "R_N_stderr", "R_N_over_sqrt_n",
                                              "d_L2", "l1_budget", "l2_budget", "gamma2", "lambda", "rudelson_spike",
                                              "truncation_spike", "tighter"});
  const OrliczIndex a(cfg.param("alpha", 1.0));
  const double t = cfg.param("t", 1.0);
  for (const auto& cd : cfg.classes) {
    for (std::size_t n : dims(cfg)) {
      const auto spec = cfg.ensemble().make(n);
      const auto K = cd.make(n);
      ComplexityOptions co;
      co.seed = derive_seed(cfg.seed, n, 1);
      const auto est = estimate_complexity(spec, K, a, co);
      for (std::size_t N : cfg.sizes("N")) {
        const auto X = sample(spec, N, derive_seed(cfg.seed, n, N));
        const auto r = rudelson_compare(X, K, cfg.trials, derive_seed(cfg.seed, n, N, 1), &est, a, t);
        table.add({spec.name(), K.name(), cell(n), cell(N), fmt(r.R_N), fmt(r.R_N_stderr),
                   fmt(r.R_N / std::sqrt(static_cast<double>(n))), fmt(r.d_L2), fmt(r.l1_budget), fmt(r.l2_budget),
                   fmt(r.gamma2), fmt(r.lambda), fmt(r.rudelson_spike), fmt(r.truncation_spike), r.tighter});
        ctx.tick("rudelson cell");
      }
    }
  }
}

// ---------------------------------------------------------------- concentration

void concentrate_scaling(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table(
      "concentration", {"ensemble", "class", "n", "N", "trials", "empirical", "empirical_stderr", "method", "bound_A",
                        "bound_psi2", "bound_cor", "d1", "d2", "width", "gamma2_proxy", "ratio_A", "ratio_psi2",
                        "ratio_cor", "rate_ref", "ratio_ref", "gamma2_term", "ratio_gamma2_term", "seed"});
  auto& fits = ctx.report.table("fits", {"ensemble", "class", "quantity", "slope", "intercept"});
  const double aspect = cfg.param("N_over_n", 0.0);
  ComplexityOptions co;
  co.width_trials = cfg.param_size("width_trials", 2000);
  co.samples = cfg.param_size("q_samples", 20000);
  co.directions = cfg.param_size("q_directions", 20);
  std::size_t cell_index = 0;
  double ratio_ref_lo = std::numeric_limits<double>::infinity(), ratio_ref_hi = 0.0;
  double g_lo = std::numeric_limits<double>::infinity(), g_hi = 0.0;
  for (const auto& ed : cfg.ensembles) {
    for (const auto& cd : cfg.classes) {
      ScalingResult group;
      for (std::size_t n : dims(cfg)) {
        std::vector<std::size_t> Ns;
        if (aspect > 0.0)
          Ns.push_back(static_cast<std::size_t>(std::llround(aspect * static_cast<double>(n))));
        else
          Ns = cfg.sizes("N");
        for (std::size_t N : Ns) {
          ScalingCell c{ed.make(n), cd.make(n), N};
          auto rec = deviation_cell(c, cfg.trials, derive_seed(cfg.seed, cell_index++), co);
          const double nd = static_cast<double>(n), Nd = static_cast<double>(N);
          const double ref = std::max(std::sqrt(nd / Nd), nd / Nd);
          const double g2 = rec.width * rec.width / Nd;
          ratio_ref_lo = std::min(ratio_ref_lo, rec.empirical / ref);
          ratio_ref_hi = std::max(ratio_ref_hi, rec.empirical / ref);
          g_lo = std::min(g_lo, rec.empirical / g2);
          g_hi = std::max(g_hi, rec.empirical / g2);
          table.add({rec.ensemble, rec.class_name, cell(n), cell(N), cell(rec.trials), fmt(rec.empirical),
                     fmt(rec.empirical_stderr), rec.method, fmt(rec.bound_A), fmt(rec.bound_psi2), fmt(rec.bound_cor),
                     fmt(rec.d1), fmt(rec.d2), fmt(rec.width), fmt(rec.gamma2_proxy), fmt(rec.ratio_A),
                     fmt(rec.ratio_psi2), fmt(rec.ratio_cor), fmt(ref), fmt(rec.empirical / ref), fmt(g2),
                     fmt(rec.empirical / g2), cell(rec.seed, true)});
          group.records.push_back(std::move(rec));
          ctx.tick("n=" + std::to_string(n) + " N=" + std::to_string(N));
        }
      }
      fill_fits(group);
      const std::string en = group.records.empty() ? ed.kind : group.records.front().ensemble;
      const std::string cn = group.records.empty() ? cd.kind : group.records.front().class_name;
      auto emit = [&](const char* name, const std::optional<LogLogFit>& f) {
        if (f) fits.add({en, cn, name, fmt(f->slope), fmt(f->intercept)});
      };
      emit("empirical_vs_N", group.empirical_vs_N);
      emit("empirical_vs_n", group.empirical_vs_n);
      emit("d2_vs_n", group.d2_vs_n);
      emit("ratio_A_vs_n", group.ratio_A_vs_n);
      emit("ratio_psi2_vs_n", group.ratio_psi2_vs_n);
      if (group.empirical_vs_N) check_range(ctx.report, cfg, "slope_vs_N", en + " slope vs N", group.empirical_vs_N->slope);
      if (group.d2_vs_n) check_range(ctx.report, cfg, "d2_slope_vs_n", en + " d_psi2 slope vs n", group.d2_vs_n->slope);
      if (group.ratio_psi2_vs_n)
        check_range(ctx.report, cfg, "ratio_psi2_slope_vs_n", en + " empirical/bound_psi2 slope vs n",
                    group.ratio_psi2_vs_n->slope);
      if (cfg.expect.contains("ratio_A_band") && !group.records.empty()) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& r : group.records) {
          lo = std::min(lo, r.ratio_A);
          hi = std::max(hi, r.ratio_A);
        }
        const double band = expect_value(cfg, "ratio_A_band", 3.0);
        ctx.report.check(en + " empirical/bound_A within a factor-" + fmt(band) + " band", hi <= band * lo,
                         "range [" + fmt(lo) + ", " + fmt(hi) + "]");
      }
    }
  }
  if (cfg.expect.contains("ratio_ref")) {
    const auto& b = cfg.expect["ratio_ref"];
    ctx.report.check("empirical / max(sqrt(n/N), n/N) within " + range_text(b),
                     in_range(b, ratio_ref_lo) && in_range(b, ratio_ref_hi),
                     "range [" + fmt(ratio_ref_lo) + ", " + fmt(ratio_ref_hi) + "]");
  }
  if (cfg.expect.contains("ratio_gamma2_term")) {
    const auto& b = cfg.expect["ratio_gamma2_term"];
    ctx.report.check("empirical / (gamma2^2/N) within " + range_text(b), in_range(b, g_lo) && in_range(b, g_hi),
                     "range [" + fmt(g_lo) + ", " + fmt(g_hi) + "]");
  }
}

void concentrate_symmetrization(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("symmetrization", {"ensemble", "class", "N", "t", "threshold", "valid", "lhs", "rhs",
                                                    "standard_error", "holds"});
  SymmetrizationOptions so;
  const auto mode = cfg.param_string("mode", "linear");
  if (mode == "squared") so.mode = SymmetrizationMode::Squared;
  else if (mode != "linear") throw ConfigError("config field 'params.mode' must be \"linear\" or \"squared\"");
  const auto factors = cfg.reals("t_factors", {1.0, 1.25, 1.5, 2.0, 3.0});
  std::size_t index = 0;
  for (const auto& ed : cfg.ensembles) {
    for (const auto& cd : cfg.classes) {
      for (std::size_t n : dims(cfg)) {
        const auto spec = ed.make(n);
        const auto K = cd.make(n);
        for (std::size_t N : cfg.sizes("N")) {
          // The threshold depends only on the class; probe it with the smallest grid.
          std::vector<double> ts;
          if (cfg.grid.contains("t")) {
            ts = cfg.reals("t");
          } else {
            const auto probe = symmetrization_check(K, spec, N, {0.0}, 1000, derive_seed(cfg.seed, index, 7), so);
            for (double f : factors) ts.push_back(f * std::max(probe.threshold, 1e-300));
          }
          const auto tab = symmetrization_check(K, spec, N, ts, cfg.trials, derive_seed(cfg.seed, index++), so);
          for (const auto& r : tab.rows)
            table.add({spec.name(), K.name(), cell(N), fmt(r.t), fmt(tab.threshold), cell(r.valid), fmt(r.lhs),
                       fmt(r.rhs), fmt(r.standard_error), cell(r.holds)});
          ctx.report.check("symmetrization tail inequality (" + spec.name() + ", " + K.name() + ", N=" +
                               std::to_string(N) + ")",
                           tab.holds);
          ctx.tick("symmetrization cell");
        }
      }
    }
  }
}

// ---------------------------------------------------------------- gamma2

void gamma2_unconditional(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("unconditional", {"n", "value", "ratio", "diameter"});
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t n : cfg.sizes("n")) {
    const auto r = unconditional_psi2_gamma2(n);
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
    table.add({cell(n), fmt(r.value), fmt(r.ratio), fmt(r.diameter)});
  }
  const double limit = expect_value(cfg, "ratio_spread_max", 2.0);
  ctx.report.check("entropy integral / sqrt(n) varies by less than " + fmt(limit), hi < limit * lo,
                   "range [" + fmt(lo) + ", " + fmt(hi) + "]");
}

void gamma2_estimate(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("complexity", {"ensemble", "class", "n", "alpha", "width", "width_stderr",
                                                "gamma2_upper", "Q_alpha", "Q2", "d_psi_alpha", "d_L2", "flagged"});
  const OrliczIndex a(cfg.param("alpha", 1.0));
  std::size_t index = 0;
  for (const auto& ed : cfg.ensembles)
    for (const auto& cd : cfg.classes)
      for (std::size_t n : dims(cfg)) {
        const auto spec = ed.make(n);
        const auto K = cd.make(n);
        ComplexityOptions co;
        co.seed = derive_seed(cfg.seed, index++);
        co.width_trials = cfg.param_size("width_trials", 2000);
        const auto e = estimate_complexity(spec, K, a, co);
        table.add({spec.name(), K.name(), cell(n), fmt(a.alpha()), fmt(e.gamma2_lower_proxy), fmt(e.width_stderr),
                   fmt(e.gamma2_upper), fmt(e.Q_alpha), fmt(e.Q2), fmt(e.d_psi_alpha), fmt(e.d_L2), cell(e.flagged)});
        ctx.tick("complexity cell");
      }
}

// ---------------------------------------------------------------- lower bounds

void lower_optimality(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("optimality", {"arm", "n", "N", "alpha", "trials", "width", "mean_sup", "median_R",
                                                "frequency", "R_target"});
  const std::size_t n = cfg.param_size("n", std::size_t{1} << 20);
  const std::size_t N = cfg.param_size("N", 2);
  const double alpha = cfg.param("alpha", 1.0);
  const double target = cfg.param("R_target", 2.0);
  const std::size_t width_trials = cfg.param_size("width_trials", 200);
  const std::size_t control_n = cfg.param_size("control_n", 256);
  const auto main = optimality_experiment(n, N, alpha, cfg.trials, derive_seed(cfg.seed, 0), target, width_trials);
  table.add({"separation", cell(n), cell(N), fmt(alpha), cell(cfg.trials), fmt(main.width), fmt(main.mean_sup),
             fmt(main.median_R), fmt(main.frequency), fmt(target)});
  ctx.tick("separation arm");
  const auto control =
      optimality_experiment(control_n, control_n, alpha, cfg.trials, derive_seed(cfg.seed, 1), target, width_trials);
  table.add({"control", cell(control_n), cell(control_n), fmt(alpha), cell(cfg.trials), fmt(control.width),
             fmt(control.mean_sup), fmt(control.median_R), fmt(control.frequency), fmt(target)});
  const double need = expect_value(cfg, "frequency_min", 0.2);
  ctx.report.check("frequency of R >= " + fmt(target) + " is at least " + fmt(need), main.frequency >= need,
                   "frequency " + fmt(main.frequency));
  ctx.report.check("control arm median R below " + fmt(target), control.median_R < target,
                   "median " + fmt(control.median_R));
}

void lower_gaussian(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("gaussian_lower", {"class", "n", "N", "m", "lhs", "lhs_stderr", "rhs", "ratio"});
  for (std::size_t n : dims(cfg)) {
    const auto spec = EnsembleSpec::gaussian(n);
    const auto K = cfg.index_class().make(n);
    for (std::size_t N : cfg.sizes("N")) {
      const auto r = gaussian_lower_check(spec, K, N, m_grid(cfg, N), cfg.trials, derive_seed(cfg.seed, n, N));
      for (const auto& row : r.rows)
        table.add({K.name(), cell(n), cell(N), cell(row.m), fmt(row.lhs), fmt(row.lhs_stderr), fmt(row.rhs),
                   fmt(row.ratio)});
      if (cfg.expect.contains("c_min")) {
        const double need = expect_value(cfg, "c_min", 0.0);
        ctx.report.check("lower-bound constant >= " + fmt(need), r.c >= need, "c " + fmt(r.c));
      }
      ctx.tick("gaussian lower cell");
    }
  }
}

void lower_moments(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("moments", {"alpha", "p", "empirical", "formula", "ratio"});
  if (!cfg.params.contains("weights") || !cfg.params["weights"].is_array())
    throw ConfigError("config field 'params.weights' is missing");
  std::vector<double> x;
  for (const auto& w : cfg.params["weights"]) x.push_back(w.get<double>());
  std::vector<int> ps;
  for (std::size_t p : cfg.sizes("p")) ps.push_back(static_cast<int>(p));
  const double alpha = cfg.param("alpha", 1.0);
  const auto rows = moment_equivalence_check(x, alpha, ps, cfg.trials, cfg.seed);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
    table.add({fmt(alpha), cell(r.p), fmt(r.empirical), fmt(r.formula), fmt(r.ratio)});
  }
  if (cfg.expect.contains("ratio_band")) {
    const auto& b = cfg.expect["ratio_band"];
    ctx.report.check("moment ratio within " + range_text(b), in_range(b, lo) && in_range(b, hi),
                     "range [" + fmt(lo) + ", " + fmt(hi) + "]");
  }
}

// ---------------------------------------------------------------- applications

BodySpec read_body(const ExperimentConfig& cfg, std::size_t n) {
  if (!cfg.params.contains("body") || !cfg.params["body"].is_object()) throw ConfigError("config field 'params.body' is missing");
  const auto& b = cfg.params["body"];
  const auto kind = b.value("kind", "");
  BodySpec body;
  if (kind == "l2ball") {
    body = BodySpec::euclidean_ball(n);
  } else if (kind == "l1ball") {
    body = BodySpec::l1_ball(n);
  } else if (kind == "ellipsoid") {
    Vector axes(static_cast<Eigen::Index>(n));
    if (b.contains("axes")) {
      if (!b["axes"].is_array() || b["axes"].size() != n) throw ConfigError("config field 'params.body.axes' needs n entries");
      for (std::size_t j = 0; j < n; ++j) axes[static_cast<Eigen::Index>(j)] = b["axes"][j].get<double>();
    } else {
      const double decay = b.value("axes_decay", 1.0);
      for (std::size_t j = 0; j < n; ++j) axes[static_cast<Eigen::Index>(j)] = std::pow(static_cast<double>(j + 1), -decay);
    }
    if (!(axes.minCoeff() > 0.0)) throw ConfigError("config field 'params.body.axes' must be positive");
    body = BodySpec::ellipsoid(Matrix(axes.array().square().inverse().matrix().asDiagonal()));
  } else if (kind == "points") {
    if (!b.contains("points")) throw ConfigError("config field 'params.body.points' is missing");
    const auto& pts = b["points"];
    Matrix P(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].size() != n) throw ConfigError("config field 'params.body.points' rows need n entries");
      for (std::size_t j = 0; j < n; ++j)
        P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pts[i][j].get<double>();
    }
    body = BodySpec::finite_points(P);
  } else if (kind == "antipodal") {
    // {+x0, -x0} with x0 = e_1.
    Matrix P = Matrix::Zero(2, static_cast<Eigen::Index>(n));
    P(0, 0) = 1.0;
    P(1, 0) = -1.0;
    body = BodySpec::finite_points(P);
  } else {
    throw ConfigError("config field 'params.body.kind' has unknown value '" + kind + "'");
  }
  if (b.contains("scale")) body = body.scaled(b["scale"].get<double>());
  return body;
}

double parse_p(double p) { return p <= 0.0 ? std::numeric_limits<double>::infinity() : p; }

// Largest 2 ||u|| / sqrt(u^T S u) over random kernel directions, refined by
// a shrinking random search.
double kernel_sampling_oracle(const Matrix& basis, const Matrix& S, std::size_t draws, std::uint64_t seed) {
  const auto k = basis.cols();
  if (k == 0) return 0.0;
  Rng rng(seed);
  auto value = [&](const Vector& c) {
    const Vector u = basis * c;
    return 2.0 * u.norm() / std::sqrt(u.dot(S * u));
  };
  Vector best(k);
  double best_v = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    Vector c(k);
    for (Eigen::Index j = 0; j < k; ++j) c[j] = rng.normal();
    const double v = value(c);
    if (v > best_v) {
      best_v = v;
      best = c / c.norm();
    }
  }
  double step = 0.1;
  for (int it = 0; it < 4000 && step > 1e-9; ++it) {
    Vector c = best;
    for (Eigen::Index j = 0; j < k; ++j) c[j] += step * rng.normal();
    c /= c.norm();
    const double v = value(c);
    if (v > best_v) {
      best_v = v;
      best = c;
    } else if (it % 50 == 49) {
      step *= 0.5;
    }
  }
  return best_v;
}

void apps_exactness(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& ops = ctx.report.table("opnorm_checks", {"case", "body", "p", "method", "value", "oracle", "abs_diff", "pass"});
  const std::size_t cases = cfg.param_size("opnorm_cases", 20);
  const double tol = expect_value(cfg, "opnorm_tolerance", 1e-8);
  bool ops_ok = true, homogeneous = true;
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(derive_seed(cfg.seed, 0, c));
    const std::size_t n = 2 + rng.below(7), N = 1 + rng.below(12);
    Matrix G(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < G.rows(); ++i)
      for (Eigen::Index j = 0; j < G.cols(); ++j) G(i, j) = rng.normal();
    Matrix P(5, static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < P.rows(); ++i)
      for (Eigen::Index j = 0; j < P.cols(); ++j) P(i, j) = rng.normal();
    Matrix L(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < L.rows(); ++i)
      for (Eigen::Index j = 0; j < L.cols(); ++j) L(i, j) = rng.normal();
    const Matrix S = L * L.transpose() + Matrix::Identity(L.rows(), L.cols());
    auto add = [&](const std::string& body, double p, const OperatorNorm& r, double oracle) {
      const double diff = std::abs(r.value - oracle);
      const bool ok = diff <= tol * std::max(1.0, std::abs(oracle));
      ops_ok = ops_ok && ok;
      ops.add({cell(c), body, fmt(p), r.method, fmt(r.value), fmt(oracle), fmt(diff), cell(ok)});
    };
    auto pnorm = [](const Vector& v, double p) {
      if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
      double s = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]), p);
      return std::pow(s, 1.0 / p);
    };
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(G.transpose() * G), Eigen::EigenvaluesOnly);
      add("l2ball", 2.0, operator_norm(G, BodySpec::euclidean_ball(n), 2.0), std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0)));
      double rows = 0.0;
      for (Eigen::Index i = 0; i < G.rows(); ++i) rows = std::max(rows, G.row(i).norm());
      add("l2ball", std::numeric_limits<double>::infinity(),
          operator_norm(G, BodySpec::euclidean_ball(n), std::numeric_limits<double>::infinity()), rows);
    }
    {
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(G.transpose() * G), Eigen::MatrixXd(S),
                                                                   Eigen::EigenvaluesOnly);
      add("ellipsoid", 2.0, operator_norm(G, BodySpec::ellipsoid(S), 2.0), std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0)));
    }
    for (double p : {2.0, 3.0, 4.0, std::numeric_limits<double>::infinity()}) {
      double vert = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        for (double s : {1.0, -1.0}) {
          Vector e = Vector::Zero(static_cast<Eigen::Index>(n));
          e[static_cast<Eigen::Index>(j)] = s;
          vert = std::max(vert, pnorm(G * e, p));
        }
      add("l1ball", p, operator_norm(G, BodySpec::l1_ball(n), p), vert);
      double pts = 0.0;
      for (Eigen::Index i = 0; i < P.rows(); ++i) pts = std::max(pts, pnorm(G * P.row(i).transpose(), p));
      add("points", p, operator_norm(G, BodySpec::finite_points(P), p), pts);
      for (const auto& body : {BodySpec::l1_ball(n), BodySpec::finite_points(P), BodySpec::euclidean_ball(n)}) {
        if (body.kind == BodySpec::Kind::EuclideanBall && p != 2.0) continue;
        const double v = operator_norm(G, body, p).value;
        const double w = operator_norm(G, body.scaled(2.5), p).value;
        homogeneous = homogeneous && w == v * 2.5;
      }
    }
    ctx.tick("opnorm case");
  }
  ctx.report.check("exact operator norms match oracles within " + fmt(tol), ops_ok);
  ctx.report.check("operator norm homogeneity", homogeneous);

  auto& ker = ctx.report.table("kernel_checks", {"trial", "n", "N", "exact", "oracle", "rel_diff", "residual", "pass"});
  const std::size_t kn = cfg.param_size("kernel_n", 4);
  const double eps = cfg.param("kernel_eps", 0.5);
  Matrix S = Matrix::Identity(static_cast<Eigen::Index>(kn), static_cast<Eigen::Index>(kn)) / (eps * eps);
  S(0, 0) = 1.0;
  const auto cigar = BodySpec::ellipsoid(S);
  bool ker_ok = true;
  for (std::size_t t = 0; t < cfg.param_size("kernel_trials", 20); ++t) {
    const std::size_t N = 1 + t % (kn - 1);
    const auto X = sample(EnsembleSpec::gaussian(kn), N, derive_seed(cfg.seed, 1, t));
    const auto ks = kernel_diameter(X.rows, cigar);
    const double residual = (X.rows * ks.basis).cwiseAbs().maxCoeff();
    const double oracle = kernel_sampling_oracle(ks.basis, S, 10000, derive_seed(cfg.seed, 2, t));
    const double rel = std::abs(ks.diameter - oracle) / ks.diameter;
    const bool ok = rel <= 0.01 && oracle <= ks.diameter * (1.0 + 1e-9) && residual <= 1e-10;
    ker_ok = ker_ok && ok;
    ker.add({cell(t), cell(kn), cell(N), fmt(ks.diameter), fmt(oracle), fmt(rel), fmt(residual), cell(ok)});
  }
  ctx.report.check("kernel diameter matches sampling oracle within 1%", ker_ok);
  ctx.tick("kernel checks");

  auto& shr = ctx.report.table("shrinking", {"k", "ratio_mean", "ratio_median", "ratio_min", "ratio_max"});
  const std::size_t sn = cfg.param_size("shrink_n", 64);
  std::vector<std::size_t> ks;
  for (std::size_t k = 1; k <= sn; k *= 2) ks.push_back(k);
  Matrix P = Matrix::Zero(2, static_cast<Eigen::Index>(sn));
  Rng rng(derive_seed(cfg.seed, 3));
  for (Eigen::Index j = 0; j < P.cols(); ++j) P(0, j) = rng.normal();
  P.row(1) = -P.row(0);
  const auto res = shrinking_experiment(EnsembleSpec::gaussian(sn), BodySpec::finite_points(P), ks,
                                        cfg.param_size("shrink_trials", 200), derive_seed(cfg.seed, 4));
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : res.rows) {
    lo = std::min(lo, r.ratio_mean);
    hi = std::max(hi, r.ratio_mean);
    shr.add({cell(r.k), fmt(r.ratio_mean), fmt(r.ratio_median), fmt(r.ratio_min), fmt(r.ratio_max)});
  }
  ctx.report.check("shrinking ratio for {+-x0} within [0.7, 1.4]", lo >= 0.7 && hi <= 1.4,
                   "range [" + fmt(lo) + ", " + fmt(hi) + "]");
}

void apps_opnorm(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("opnorm", {"ensemble", "body", "n", "N", "p", "method", "mean", "reference", "ratio"});
  for (std::size_t n : dims(cfg)) {
    const auto spec = cfg.ensemble().make(n);
    const auto body = read_body(cfg, n);
    for (std::size_t N : cfg.sizes("N")) {
      for (double p0 : cfg.reals("p", {2.0})) {
        const double p = parse_p(p0);
        std::vector<double> v(cfg.trials);
        std::vector<std::string> method(cfg.trials);
        parallel_for(cfg.trials, [&](std::size_t t) {
          const auto X = sample(spec, N, derive_seed(cfg.seed, n, N, t));
          const auto r = operator_norm(X.rows, body, p, 2000, derive_seed(cfg.seed, n, N, t, 1));
          v[t] = r.value;
          method[t] = r.method;
        });
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(cfg.trials);
        const double ref = std::sqrt(static_cast<double>(N)) + std::sqrt(static_cast<double>(n));
        table.add({spec.name(), body.name(), cell(n), cell(N), fmt(p), method.front(), fmt(mean), fmt(ref),
                   fmt(mean / ref)});
        if (body.kind == BodySpec::Kind::EuclideanBall && p == 2.0)
          check_range(ctx.report, cfg, "ball_ratio", "mean ||Gamma|| / (sqrt N + sqrt n) (n=" + std::to_string(n) +
                                                         ", N=" + std::to_string(N) + ")",
                      mean / ref);
        ctx.tick("opnorm cell");
      }
    }
  }
}

void apps_shrinking(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("shrinking", {"ensemble", "body", "n", "k", "mean_diameter", "ratio_mean", "ratio_median",
                                               "ratio_min", "ratio_max", "k_prime", "k_prime_sq", "plateau_k"});
  for (const auto& ed : cfg.ensembles) {
    for (std::size_t n : dims(cfg)) {
      const auto spec = ed.make(n);
      const auto body = read_body(cfg, n);
      const auto r = shrinking_experiment(spec, body, cfg.sizes("k"), cfg.trials, cfg.seed);
      for (const auto& row : r.rows)
        table.add({spec.name(), body.name(), cell(n), cell(row.k), fmt(row.mean_diameter), fmt(row.ratio_mean),
                   fmt(row.ratio_median), fmt(row.ratio_min), fmt(row.ratio_max), fmt(r.k_prime), fmt(r.k_prime_sq),
                   cell(r.plateau_k)});
      ctx.tick("shrinking cell");
    }
  }
}

void apps_lowmstar(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("lowmstar", {"ensemble", "body", "n", "N", "mean_diameter", "min_diameter",
                                              "max_diameter", "r_star", "r_star_psi2"});
  for (std::size_t n : dims(cfg)) {
    const auto spec = cfg.ensemble().make(n);
    const auto body = read_body(cfg, n);
    const auto r = low_mstar_experiment(spec, body, cfg.sizes("N"), cfg.trials, cfg.seed,
                                        cfg.param_size("width_draws", 2000));
    for (const auto& row : r.rows) {
      const auto [lo, hi] = std::minmax_element(row.diameters.begin(), row.diameters.end());
      table.add({spec.name(), body.name(), cell(n), cell(row.N), fmt(row.mean_diameter), fmt(*lo), fmt(*hi),
                 fmt(row.r_star), fmt(row.r_star_psi2)});
    }
    ctx.report.check("kernel diameter non-increasing in N (n=" + std::to_string(n) + ")", r.monotone);
    ctx.tick("lowmstar cell");
  }
}

void apps_sphere_process(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto& table = ctx.report.table("sphere_process", {"ensemble", "n", "N", "mean_deviation", "rate_sqrt", "rate_logratio",
                                                    "rate_logn", "ratio_sqrt", "ratio_logratio", "ratio_logn"});
  auto& summary = ctx.report.table("sphere_process_summary", {"ensemble", "n", "band_sqrt", "band_logratio", "band_logn",
                                                              "tracks"});
  for (std::size_t n : dims(cfg)) {
    std::vector<EnsembleSpec> specs;
    for (const auto& ed : cfg.ensembles) specs.push_back(ed.make(n));
    const auto r = sphere_process_experiment(specs, cfg.sizes("N"), cfg.trials, derive_seed(cfg.seed, n));
    for (const auto& row : r.rows)
      table.add({row.ensemble, cell(row.n), cell(row.N), fmt(row.mean_deviation), fmt(row.rate_sqrt), fmt(row.rate_logratio),
                 fmt(row.rate_logn), fmt(row.ratio_sqrt), fmt(row.ratio_logratio), fmt(row.ratio_logn)});
    for (const auto& s : r.summaries) {
      summary.add({s.ensemble, cell(n), fmt(s.band_sqrt), fmt(s.band_logratio), fmt(s.band_logn), s.tracks});
      if (cfg.expect.contains("band_max") && cfg.expect["band_max"].contains(s.ensemble)) {
        const double limit = cfg.expect["band_max"][s.ensemble].get<double>();
        ctx.report.check(s.ensemble + " deviation / sqrt(n/N) band <= " + fmt(limit), s.band_sqrt <= limit,
                         "band " + fmt(s.band_sqrt));
      }
    }
    if (cfg.expect.contains("square_min")) {
      const double need = expect_value(cfg, "square_min", 1.0);
      for (const auto& row : r.rows)
        if (row.N == row.n)
          ctx.report.check(row.ensemble + " deviation at N = n is at least " + fmt(need), row.mean_deviation >= need,
                           "mean " + fmt(row.mean_deviation));
    }
    ctx.tick("sphere process");
  }
}

const std::map<std::pair<std::string, std::string>, Runner>& registry() {
  static const std::map<std::pair<std::string, std::string>, Runner> r = {
      {{"nets-selftest", "approx"}, nets_approx},
      {{"nets-selftest", "linearization"}, nets_linearization},
      {{"orlicz-selftest", "analytic"}, orlicz_analytic},
      {{"diam", "scaling"}, diam_scaling},
      {{"diam", "profile"}, diam_profile},
      {{"diam", "lp"}, diam_lp},
      {{"decompose", "peel"}, decompose_peel},
      {{"decompose", "class"}, decompose_class_mode},
      {{"decompose", "heavy"}, decompose_heavy},
      {{"decompose", "rudelson"}, decompose_rudelson},
      {{"concentrate", "scaling"}, concentrate_scaling},
      {{"concentrate", "symmetrization"}, concentrate_symmetrization},
      {{"gamma2", "unconditional"}, gamma2_unconditional},
      {{"gamma2", "estimate"}, gamma2_estimate},
      {{"lowerbound", "optimality"}, lower_optimality},
      {{"lowerbound", "gaussian"}, lower_gaussian},
      {{"lowerbound", "moments"}, lower_moments},
      {{"apps", "exactness"}, apps_exactness},
      {{"apps", "opnorm"}, apps_opnorm},
      {{"apps", "shrinking"}, apps_shrinking},
      {{"apps", "lowmstar"}, apps_lowmstar},
      {{"apps", "sphere-process"}, apps_sphere_process},
  };
  return r;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> supported_modes() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, _] : registry()) out.push_back(key);
  return out;
}

double estimate_seconds(const ExperimentConfig& cfg) {
  // Per-unit costs measured on one core; deliberately optimistic.
  constexpr double kSampleEntry = 2e-8;
  auto grid_or = [&](const char* name, std::vector<std::size_t> fallback) {
    try {
      return cfg.sizes(name, fallback);
    } catch (const ConfigError&) {
      return fallback;
    }
  };
  const double trials = static_cast<double>(cfg.trials);
  double cost = 0.0;
  if (cfg.kind == "concentrate" && cfg.mode == "scaling") {
    for (std::size_t n : grid_or("n", {1}))
      for (std::size_t N : grid_or("N", {static_cast<std::size_t>(cfg.param("N_over_n", 1.0) * static_cast<double>(n))}))
        cost += trials * static_cast<double>(N * n) * kSampleEntry * static_cast<double>(cfg.ensembles.size());
  } else if (cfg.kind == "decompose" && cfg.mode == "class") {
    for (std::size_t n : grid_or("n", {1}))
      cost += trials * static_cast<double>(cfg.param_size("fresh_samples", 100000) * n) * kSampleEntry *
              static_cast<double>(grid_or("N", {1}).size());
  } else if (cfg.kind == "lowerbound" && cfg.mode == "optimality") {
    const double n = static_cast<double>(cfg.param_size("n", std::size_t{1} << 20));
    cost = trials * n * static_cast<double>(cfg.param_size("N", 2)) * kSampleEntry;
  }
  return cost;
}

int exit_status(const Report& r) { return r.status == "complete" && r.all_pass() ? 0 : 1; }

Report run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  const auto it = registry().find({cfg.kind, cfg.mode});
  if (it == registry().end())
    throw ConfigError("unsupported combination kind '" + cfg.kind + "' with mode '" + cfg.mode + "'");
  if (opt.threads) set_thread_count(opt.threads);
  Report report;
  report.kind = cfg.kind;
  report.mode = cfg.mode;
  report.seed = cfg.seed;
  report.config = cfg.raw;
  report.config_hash = hex64(config_hash(cfg.raw));
  const double budget = opt.budget_secs.value_or(cfg.budget_secs);
  if (!(budget > 0.0)) throw ConfigError("budget must be positive");
  const double estimate = estimate_seconds(cfg);
  if (estimate > budget) {
    report.status = "error";
    report.message = "estimated " + cell(estimate) + " s exceeds the budget of " + cell(budget) + " s";
    return report;
  }
  RunContext ctx{cfg, report,
                 std::chrono::steady_clock::now() +
                     std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(budget))};
  try {
    it->second(ctx);
  } catch (const BudgetExceeded& e) {
    report.status = "partial";
    report.message = e.what();
  }
  return report;
}

}  // namespace psichain::cli
