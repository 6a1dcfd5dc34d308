#include "psichain/concentration.hpp"

#include "psichain/parallel.hpp"
#include "psichain/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace psichain {

Deviation sup_deviation(const Matrix& X, const IndexClass& K, const Matrix* second_moment) {
  const auto n = static_cast<Eigen::Index>(K.n);
  if (X.cols() != n) throw std::invalid_argument("sample and class dimensions differ");
  if (X.rows() == 0) throw std::invalid_argument("empty sample");
  if (second_moment && (second_moment->rows() != n || second_moment->cols() != n))
    throw std::invalid_argument("second moment matrix has the wrong shape");
  const double N = static_cast<double>(X.rows());
  Deviation d;
  if (K.kind == IndexClass::Kind::Sphere) {
    Eigen::MatrixXd S = X.transpose() * X / N;
    if (second_moment)
      S -= *second_moment;
    else
      S -= Eigen::MatrixXd::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    d.value = es.eigenvalues().cwiseAbs().maxCoeff();
    d.method = "spectral";
    return d;
  }
  const Matrix values = K.evaluate(X);
  for (std::size_t k = 0; k < K.size(); ++k) {
    const auto col = values.col(static_cast<Eigen::Index>(k));
    double expected;
    if (second_moment) {
      const Vector x = K.member(k);
      expected = x.dot(*second_moment * x);
    } else {
      expected = K.member(k).squaredNorm();
    }
    d.value = std::max(d.value, std::abs(col.squaredNorm() / N - expected));
  }
  d.method = "exact-list";
  return d;
}

Deviation sup_deviation(const SampleMatrix& X, const IndexClass& K, const Matrix* second_moment) {
  if (!second_moment && !X.spec.isotropic())
    throw std::invalid_argument("non-isotropic ensemble " + X.spec.name() + " needs E f^2 from the caller");
  return sup_deviation(X.rows, K, second_moment);
}

BoundValue bound_theorem_A(double d_psi1, double gamma2, std::size_t N) {
  if (d_psi1 < 0.0 || gamma2 < 0.0 || N == 0) throw std::invalid_argument("bound inputs must be nonnegative, N > 0");
  BoundValue b;
  const double n = static_cast<double>(N);
  b.term1 = d_psi1 * gamma2 / std::sqrt(n);
  b.term2 = gamma2 * gamma2 / n;
  b.value = std::max(b.term1, b.term2);
  return b;
}

BoundValue bound_corollary(double d_psi1, double gamma2, std::size_t N, double t) {
  if (d_psi1 < 0.0 || gamma2 < 0.0 || N == 0 || t < 0.0)
    throw std::invalid_argument("bound inputs must be nonnegative, N > 0");
  BoundValue b;
  const double n = static_cast<double>(N);
  if (gamma2 == 0.0) {
    b.lambda = d_psi1 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return b;
  }
  b.lambda = d_psi1 * std::max(std::log(d_psi1 * std::sqrt(n) / gamma2), 1.0);
  b.term1 = t * t * b.lambda * gamma2 / std::sqrt(n);
  b.term2 = t * t * gamma2 * gamma2 / n;
  b.value = std::max(b.term1, b.term2);
  return b;
}

BoundValue bound_psi2(double d_psi2, double gamma2, std::size_t N) { return bound_theorem_A(d_psi2, gamma2, N); }

namespace {

// Var(<x, X>^2) for unit-variance coordinates.
double squared_variance(const EnsembleSpec& spec, const Vector& x, std::size_t samples, std::uint64_t seed) {
  const double s2 = x.squaredNorm();
  if (spec.kind == EnsembleKind::Gaussian) return 2.0 * s2 * s2;
  if (spec.kind == EnsembleKind::Rademacher) return 2.0 * s2 * s2 - 2.0 * x.array().pow(4).sum();
  if (s2 == 0.0) return 0.0;
  const auto Y = sample(spec, samples, seed);
  const Vector v = Y.rows * x;
  const double m4 = v.array().pow(4).mean();
  return m4 - s2 * s2;
}

}  // namespace

SymmetrizationTable symmetrization_check(const IndexClass& K, const EnsembleSpec& spec, std::size_t N,
                                         const std::vector<double>& t_grid, std::size_t trials, std::uint64_t seed,
                                         const SymmetrizationOptions& opt) {
  if (!K.is_vector_list()) throw std::invalid_argument("symmetrization_check needs a vector-list class");
  if (spec.n != K.n) throw std::invalid_argument("ensemble and class dimensions differ");
  if (!spec.isotropic()) throw std::invalid_argument("symmetrization_check needs an isotropic ensemble");
  if (trials < 1000) throw std::invalid_argument("symmetrization_check needs at least 1000 trials");
  if (t_grid.empty()) throw std::invalid_argument("empty t grid");
  const bool squared = opt.mode == SymmetrizationMode::Squared;
  const auto norms2 = K.member_norms2();
  double var = 0.0;
  for (std::size_t k = 0; k < K.size(); ++k) {
    const double v = squared ? squared_variance(spec, K.member(k), opt.variance_samples, derive_seed(seed, 1, k))
                             : norms2[k];
    var = std::max(var, v);
  }
  SymmetrizationTable table;
  table.alpha = std::sqrt(std::max(var, 0.0));
  table.threshold = std::sqrt(2.0) * table.alpha * std::sqrt(static_cast<double>(N));

  std::vector<double> lhs(trials), rhs(trials);
  parallel_for(trials, [&](std::size_t trial) {
    const auto X = sample(spec, N, derive_seed(seed, 0, trial));
    Matrix values = K.evaluate(X.rows);
    if (squared) values = values.array().square().matrix();
    Rng rng(derive_seed(seed, 2, trial));
    Vector eps(static_cast<Eigen::Index>(N));
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = rng.sign();
    double l = 0.0, r = 0.0;
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
      const double mean = squared ? norms2[static_cast<std::size_t>(k)] : 0.0;
      l = std::max(l, std::abs(values.col(k).sum() - static_cast<double>(N) * mean));
      r = std::max(r, std::abs(values.col(k).dot(eps)));
    }
    lhs[trial] = l;
    rhs[trial] = r;
  });

  const double T = static_cast<double>(trials);
  for (double t : t_grid) {
    SymmetrizationRow row;
    row.t = t;
    row.valid = t >= table.threshold;
    const auto l = std::count_if(lhs.begin(), lhs.end(), [&](double x) { return x > t; });
    const auto r = std::count_if(rhs.begin(), rhs.end(), [&](double x) { return x > t / 4.0; });
    row.lhs = static_cast<double>(l) / T;
    row.rhs = static_cast<double>(r) / T;
    row.standard_error = std::sqrt(row.lhs * (1.0 - row.lhs) / T + 16.0 * row.rhs * (1.0 - row.rhs) / T);
    row.holds = !row.valid || row.lhs <= 4.0 * row.rhs + 3.0 * row.standard_error;
    table.holds = table.holds && row.holds;
    table.rows.push_back(row);
  }
  return table;
}

DeviationRecord deviation_cell(const ScalingCell& cell, std::size_t trials, std::uint64_t seed,
                               const ComplexityOptions& copt) {
  if (trials == 0) throw std::invalid_argument("deviation_cell needs at least one trial");
  DeviationRecord rec;
  rec.ensemble = cell.spec.name();
  rec.class_name = cell.K.name();
  rec.n = cell.spec.n;
  rec.N = cell.N;
  rec.seed = seed;
  rec.trials = trials;
  std::vector<double> dev(trials);
  std::vector<std::string> method(trials);
  parallel_for(trials, [&](std::size_t trial) {
    const auto X = sample(cell.spec, cell.N, derive_seed(seed, 0, trial));
    const auto d = sup_deviation(X, cell.K);
    dev[trial] = d.value;
    method[trial] = d.method;
  });
  const double T = static_cast<double>(trials);
  rec.empirical = std::accumulate(dev.begin(), dev.end(), 0.0) / T;
  double var = 0.0;
  for (double v : dev) var += (v - rec.empirical) * (v - rec.empirical);
  rec.empirical_stderr = trials > 1 ? std::sqrt(var / (T - 1.0) / T) : 0.0;
  rec.method = method.front();

  ComplexityOptions c = copt;
  c.seed = derive_seed(seed, 1);
  const auto est = estimate_complexity(cell.spec, cell.K, OrliczIndex(1.0), c);
  rec.d1 = est.d_psi_alpha;
  rec.d2 = est.Q2 * est.d_L2;
  rec.width = est.gamma2_lower_proxy;
  rec.gamma2_proxy = est.gamma2_upper;
  rec.bound_A = bound_theorem_A(rec.d1, rec.width, cell.N).value;
  rec.bound_psi2 = bound_psi2(rec.d2, rec.gamma2_proxy, cell.N).value;
  rec.bound_cor = bound_corollary(rec.d1, rec.width, cell.N, kLogFormT).value;
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
  rec.ratio_A = ratio(rec.empirical, rec.bound_A);
  rec.ratio_psi2 = ratio(rec.empirical, rec.bound_psi2);
  rec.ratio_cor = ratio(rec.empirical, rec.bound_cor);
  return rec;
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("log-log fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("log-log fit needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("log-log fit needs distinct x values");
  LogLogFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

void fill_fits(ScalingResult& result) {
  const auto& r = result.records;
  if (r.size() < 2) return;
  auto all_positive = [&](auto get) {
    return std::all_of(r.begin(), r.end(), [&](const DeviationRecord& x) { return get(x) > 0.0; });
  };
  auto column = [&](auto get) {
    std::vector<double> v;
    for (const auto& x : r) v.push_back(get(x));
    return v;
  };
  const auto get_n = [](const DeviationRecord& x) { return static_cast<double>(x.n); };
  const auto get_N = [](const DeviationRecord& x) { return static_cast<double>(x.N); };
  const auto get_emp = [](const DeviationRecord& x) { return x.empirical; };
  const bool same_n = std::all_of(r.begin(), r.end(), [&](const auto& x) { return x.n == r.front().n; });
  const bool same_aspect = std::all_of(r.begin(), r.end(), [&](const auto& x) { return x.N * r.front().n == r.front().N * x.n; });
  if (same_n && all_positive(get_emp)) {
    result.empirical_vs_N = fit_loglog(column(get_N), column(get_emp));
  } else if (same_aspect) {
    const auto ns = column(get_n);
    if (all_positive(get_emp)) result.empirical_vs_n = fit_loglog(ns, column(get_emp));
    const auto get_d2 = [](const DeviationRecord& x) { return x.d2; };
    const auto get_rA = [](const DeviationRecord& x) { return x.ratio_A; };
    const auto get_r2 = [](const DeviationRecord& x) { return x.ratio_psi2; };
    if (all_positive(get_d2) && std::all_of(r.begin(), r.end(), [](const auto& x) { return std::isfinite(x.d2); }))
      result.d2_vs_n = fit_loglog(ns, column(get_d2));
    if (all_positive(get_rA)) result.ratio_A_vs_n = fit_loglog(ns, column(get_rA));
    if (all_positive(get_r2)) result.ratio_psi2_vs_n = fit_loglog(ns, column(get_r2));
  }
}

ScalingResult scaling_study(const std::vector<ScalingCell>& cells, std::size_t trials, std::uint64_t seed,
                            const ComplexityOptions& copt,
                            std::optional<std::chrono::steady_clock::time_point> deadline) {
  ScalingResult result;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (deadline && std::chrono::steady_clock::now() > *deadline)
      throw BudgetExceeded("scaling study stopped after " + std::to_string(k) + " of " +
                           std::to_string(cells.size()) + " cells");
    result.records.push_back(deviation_cell(cells[k], trials, derive_seed(seed, k), copt));
  }
  fill_fits(result);
  return result;
}

}  // namespace psichain
