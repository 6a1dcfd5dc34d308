#include "psichain/diameters.hpp"

#include "psichain/parallel.hpp"
#include "psichain/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace psichain {

namespace {

using Eigen::Index;

double log_binomial(std::size_t N, std::size_t m) {
  return std::lgamma(double(N) + 1) - std::lgamma(double(m) + 1) - std::lgamma(double(N - m) + 1);
}

double top_eigenvalue(const Eigen::MatrixXd& S) {
  if (S.rows() == 1) return S(0, 0);
  if (S.rows() == 2) {
    const double a = S(0, 0), d = S(1, 1), b = S(0, 1);
    return 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

// sigma_max of the row-submatrix X_I and its top right singular vector.
std::pair<double, Vector> submatrix_top(const Matrix& X, const std::vector<std::size_t>& I) {
  Matrix XI(static_cast<Index>(I.size()), X.cols());
  for (std::size_t k = 0; k < I.size(); ++k) XI.row(static_cast<Index>(k)) = X.row(static_cast<Index>(I[k]));
  Vector theta;
  double lambda;
  if (XI.rows() <= XI.cols()) {
    const Eigen::MatrixXd S = XI * XI.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    lambda = eig.eigenvalues()(S.rows() - 1);
    theta = XI.transpose() * eig.eigenvectors().col(S.rows() - 1);
  } else {
    const Eigen::MatrixXd S = XI.transpose() * XI;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    lambda = eig.eigenvalues()(S.rows() - 1);
    theta = eig.eigenvectors().col(S.rows() - 1);
  }
  const double nrm = theta.norm();
  if (nrm > 0.0) theta /= nrm;
  else theta = Vector::Unit(X.cols(), 0);
  return {std::sqrt(std::max(lambda, 0.0)), theta};
}

// Indices of the m largest entries of w, ties to the lower index.
std::vector<std::size_t> top_m(const Vector& w, std::size_t m) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(w.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto cmp = [&](std::size_t a, std::size_t b) {
    const double wa = w(static_cast<Index>(a)), wb = w(static_cast<Index>(b));
    return wa > wb || (wa == wb && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m - 1), idx.end(), cmp);
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

DmResult sphere_exact(const Matrix& X, std::size_t m) {
  const auto N = static_cast<std::size_t>(X.rows());
  const std::size_t n = static_cast<std::size_t>(X.cols());
  DmResult best;
  best.method = DmMethod::ExactSvdEnum;
  best.value = -1.0;
  std::vector<std::size_t> c(m);
  std::iota(c.begin(), c.end(), std::size_t{0});
  const bool use_gram = m <= n;
  Eigen::MatrixXd G;
  if (use_gram) G = X * X.transpose();
  Eigen::MatrixXd S(use_gram ? m : n, use_gram ? m : n);
  for (;;) {
    if (use_gram) {
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) S(Index(a), Index(b)) = G(Index(c[a]), Index(c[b]));
    } else {
      S.setZero();
      for (std::size_t k : c) S.noalias() += X.row(Index(k)).transpose() * X.row(Index(k));
    }
    const double v = top_eigenvalue(S);
    if (v > best.value) {
      best.value = v;
      best.support = c;
    }
    std::size_t k = m;
    while (k > 0 && c[k - 1] == N - m + k - 1) --k;
    if (k == 0) break;
    ++c[k - 1];
    for (std::size_t j = k; j < m; ++j) c[j] = c[j - 1] + 1;
  }
  auto [value, theta] = submatrix_top(X, best.support);
  best.value = value;
  best.direction = theta;
  return best;
}

void alternate(const Matrix& X, std::size_t m, Vector theta, DmResult& best) {
  double current = -1.0;
  for (int iter = 0; iter < 100; ++iter) {
    const Vector proj = (X * theta).cwiseAbs2();
    auto I = top_m(proj, m);
    auto [value, next] = submatrix_top(X, I);
    if (value > best.value) {
      best.value = value;
      best.support = I;
      best.direction = next;
    }
    if (value <= current * (1.0 + 1e-13)) break;
    current = value;
    theta = next;
  }
}

DmResult sphere_greedy(const Matrix& X, std::size_t m, const DmOptions& opt) {
  DmResult best;
  best.method = DmMethod::GreedyLower;
  best.value = -1.0;
  if (opt.warm_start && opt.warm_start->size() == X.cols()) alternate(X, m, *opt.warm_start, best);
  {
    const Eigen::MatrixXd S = X.transpose() * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    alternate(X, m, eig.eigenvectors().col(S.rows() - 1), best);
  }
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(r)));
    Vector theta(X.cols());
    for (auto& t : theta) t = rng.normal();
    alternate(X, m, theta / theta.norm(), best);
  }
  return best;
}

}  // namespace

std::string to_string(DmMethod m) {
  switch (m) {
    case DmMethod::ExactTopM: return "exact-topm";
    case DmMethod::ExactSvdEnum: return "exact-svd-enum";
    case DmMethod::GreedyLower: return "greedy-lower";
  }
  return "unknown";
}

DmResult empirical_Dm(const Matrix& X, const IndexClass& K, std::size_t m, const DmOptions& opt) {
  const auto N = static_cast<std::size_t>(X.rows());
  if (m == 0 || m > N) throw std::invalid_argument("D_m needs 1 <= m <= N");
  if (K.kind == IndexClass::Kind::Sphere) {
    if (static_cast<std::size_t>(X.cols()) != K.n) throw std::invalid_argument("sample dimension does not match class");
    if (log_binomial(N, m) <= std::log(std::max(opt.exact_cap, 1.0)) && opt.exact_cap >= 1.0) return sphere_exact(X, m);
    return sphere_greedy(X, m, opt);
  }
  const Matrix F = K.evaluate(X);
  DmResult r;
  r.method = DmMethod::ExactTopM;
  std::vector<double> sq(N);
  for (Index j = 0; j < F.cols(); ++j) {
    for (std::size_t i = 0; i < N; ++i) sq[i] = F(Index(i), j) * F(Index(i), j);
    std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(m - 1), sq.end(), std::greater<>());
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += sq[i];
    r.value = std::max(r.value, s);
  }
  r.value = std::sqrt(r.value);
  return r;
}

DmResult empirical_Dm(const SampleMatrix& X, const IndexClass& K, std::size_t m, const DmOptions& opt) {
  return empirical_Dm(X.rows, K, m, opt);
}

std::vector<std::size_t> dyadic_grid(std::size_t N) {
  std::vector<std::size_t> g;
  for (std::size_t m = 1; m <= N; m *= 2) g.push_back(m);
  if (g.empty() || g.back() != N) g.push_back(N);
  return g;
}

BoundTerms theoretical_Dm_bound(double gamma2, double d_psi, const OrliczIndex& a, std::size_t m, std::size_t N,
                                double u) {
  if (m == 0 || m > N) throw std::invalid_argument("bound needs 1 <= m <= N");
  if (u < 1.0) throw std::invalid_argument("confidence multiplier u must be >= 1");
  BoundTerms t;
  t.term_gamma2 = u * gamma2;
  t.term_tail = u * d_psi * std::sqrt(double(m)) * std::pow(std::log(std::numbers::e * double(N) / double(m)), 1.0 / a.alpha());
  return t;
}

BoundTerms theoretical_Dm_bound(const ComplexityEstimate& est, const OrliczIndex& a, std::size_t m, std::size_t N,
                                double u) {
  return theoretical_Dm_bound(est.gamma2_upper, est.d_psi_alpha, a, m, N, u);
}

DiameterProfile diameter_profile(const SampleMatrix& X, const IndexClass& K, const std::vector<std::size_t>& grid,
                                 const ComplexityEstimate& est, const OrliczIndex& a, double u, const DmOptions& opt) {
  DiameterProfile prof;
  Vector warm;
  for (std::size_t m : grid) {
    DmOptions o = opt;
    o.warm_start = warm.size() > 0 ? &warm : nullptr;
    const auto d = empirical_Dm(X, K, m, o);
    if (d.direction.size() > 0) warm = d.direction;
    DiameterRow row;
    row.m = m;
    row.empirical = d.value;
    row.method = d.method;
    row.bound = theoretical_Dm_bound(est, a, m, X.N(), u);
    row.ratio = row.bound.sum() > 0.0 ? d.value / row.bound.sum() : 0.0;
    prof.rows.push_back(row);
  }
  return prof;
}

std::size_t crossover_m0(double gamma2, double d_psi, const OrliczIndex& a, std::size_t N) {
  for (std::size_t m = 1; m <= N; ++m)
    if (gamma2 <= d_psi * std::sqrt(double(m)) * std::pow(std::log(std::numbers::e * double(N) / double(m)), 1.0 / a.alpha()))
      return m;
  return N + 1;
}

double lp_bound(double gamma2, double d_psi, const OrliczIndex& a, std::size_t k, double p, std::size_t N) {
  const double lg = std::pow(std::log(std::numbers::e * double(N) / double(k)), 1.0 / a.alpha());
  const double kp = std::pow(double(k), 1.0 / p);
  if (p <= 2.0) return gamma2 * std::pow(double(k), 1.0 / p - 0.5) + d_psi * kp * lg;
  if (k < crossover_m0(gamma2, d_psi, a, N)) return 2.0 * gamma2;
  return gamma2 + d_psi * kp * lg;
}

LpResult lp_diameter(const SampleMatrix& X, const IndexClass& K, std::size_t k, double p,
                     const ComplexityEstimate& est, const OrliczIndex& a) {
  if (p != 1.0 && p != 1.5 && p != 2.0 && p != 3.0 && p != 4.0) throw std::invalid_argument("p must be one of 1, 1.5, 2, 3, 4");
  if (!K.is_vector_list()) throw std::invalid_argument("l_p diameter needs a vector-list class");
  const std::size_t N = X.N();
  if (k == 0 || k > N) throw std::invalid_argument("l_p diameter needs 1 <= |I| <= N");
  const Matrix F = K.evaluate(X.rows);
  LpResult r;
  std::vector<double> col(N);
  for (Index j = 0; j < F.cols(); ++j) {
    for (std::size_t i = 0; i < N; ++i) col[i] = std::pow(std::abs(F(Index(i), j)), p);
    std::nth_element(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(k - 1), col.end(), std::greater<>());
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += col[i];
    r.empirical = std::max(r.empirical, std::pow(s, 1.0 / p));
  }
  r.m0 = crossover_m0(est.gamma2_upper, est.d_psi_alpha, a, N);
  r.large_regime = p > 2.0 && k >= r.m0;
  r.bound = lp_bound(est.gamma2_upper, est.d_psi_alpha, a, k, p, N);
  return r;
}

LowerCheck gaussian_lower_check(const EnsembleSpec& spec, const IndexClass& K, std::size_t N,
                                const std::vector<std::size_t>& m_grid, std::size_t trials, std::uint64_t seed) {
  if (spec.kind != EnsembleKind::Gaussian) throw std::invalid_argument("gaussian lower bound needs the gaussian ensemble");
  if (trials == 0 || m_grid.empty()) throw std::invalid_argument("lower check needs trials and an m grid");
  for (std::size_t m : m_grid)
    if (m == 0 || m > N) throw std::invalid_argument("lower check needs 1 <= m <= N");
  std::vector<std::vector<double>> d(trials);
  parallel_for(trials, [&](std::size_t t) {
    const auto X = sample(spec, N, derive_seed(seed, 0, t));
    Vector warm;
    for (std::size_t m : m_grid) {
      DmOptions o;
      o.seed = derive_seed(seed, 2, t, m);
      o.warm_start = warm.size() > 0 ? &warm : nullptr;
      const auto r = empirical_Dm(X, K, m, o);
      if (r.direction.size() > 0) warm = r.direction;
      d[t].push_back(r.value);
    }
  });
  LowerCheck out;
  out.width = gaussian_width(K, 4000, derive_seed(seed, 1)).mean;
  const double dpsi2 = std::sqrt(8.0 / 3.0) * K.sup_l2();
  out.c = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m_grid.size(); ++k) {
    LowerRow row;
    row.m = m_grid[k];
    double s = 0.0, s2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      s += d[t][k];
      s2 += d[t][k] * d[t][k];
    }
    const double T = double(trials);
    row.lhs = s / T;
    row.lhs_stderr = trials > 1 ? std::sqrt(std::max(0.0, s2 / T - row.lhs * row.lhs) / (T - 1)) : 0.0;
    const double mm = double(row.m);
    row.rhs = out.width + dpsi2 * std::sqrt(mm * std::log(std::numbers::e * double(N) / mm));
    row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
    out.c = std::min(out.c, row.ratio);
    out.rows.push_back(row);
  }
  return out;
}

OptimalityResult optimality_experiment(std::size_t n, std::size_t N, double alpha, std::size_t trials,
                                       std::uint64_t seed, double R_target, std::size_t width_trials) {
  if (!(alpha >= 1.0 && alpha < 2.0)) throw std::invalid_argument("optimality experiment needs alpha in [1, 2)");
  if (n == 0 || N == 0 || trials == 0) throw std::invalid_argument("optimality experiment needs n, N, trials >= 1");
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = 1.0 / std::sqrt(std::log(double(j) + 2.0));
  OptimalityResult r;
  r.R_target = R_target;
  r.sup.assign(trials, 0.0);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(seed, 0, t));
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double z = 0.0;
      for (std::size_t i = 0; i < N; ++i) z += exp_power_variate(rng, alpha);
      best = std::max(best, w[j] * std::abs(z));
    }
    r.sup[t] = best;
  });
  r.width = gaussian_width(IndexClass::weighted_basis(w), width_trials, derive_seed(seed, 1)).mean;
  std::size_t hits = 0;
  for (double s : r.sup) {
    r.mean_sup += s;
    const double R = s / (r.width * std::sqrt(double(N)));
    r.R.push_back(R);
    if (R >= R_target) ++hits;
  }
  r.mean_sup /= double(trials);
  r.frequency = double(hits) / double(trials);
  auto sorted = r.R;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t h = trials / 2;
  r.median_R = trials % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  return r;
}

double paley_zygmund(double norm_p, double norm_q, double p, double q, double lambda) {
  if (!(p >= 1.0 && q > p)) throw std::invalid_argument("Paley-Zygmund needs q > p >= 1");
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("Paley-Zygmund needs 0 < lambda < 1");
  if (!(norm_p > 0.0 && norm_q >= norm_p)) throw std::invalid_argument("Paley-Zygmund needs norm_q >= norm_p > 0");
  const double v = std::pow((1.0 - std::pow(lambda, p)) * std::pow(norm_p / norm_q, p), q / (q - p));
  return std::clamp(v, 0.0, 1.0);
}

double moment_formula(const std::vector<double>& x, double alpha, double p) {
  const auto head = static_cast<std::size_t>(std::floor(p));
  double head_norm = 0.0, tail2 = 0.0;
  const double conj = alpha == 1.0 ? std::numeric_limits<double>::infinity() : alpha / (alpha - 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i < head) {
      if (std::isinf(conj)) head_norm = std::max(head_norm, x[i]);
      else head_norm += std::pow(x[i], conj);
    } else {
      tail2 += x[i] * x[i];
    }
  }
  if (!std::isinf(conj)) head_norm = std::pow(head_norm, 1.0 / conj);
  return std::pow(p, 1.0 / alpha) * head_norm + std::sqrt(p) * std::sqrt(tail2);
}

std::vector<MomentRow> moment_equivalence_check(const std::vector<double>& x, double alpha, const std::vector<int>& ps,
                                                std::size_t trials, std::uint64_t seed) {
  if (x.empty()) throw std::invalid_argument("moment check needs weights");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw std::invalid_argument("weights must be nonnegative");
    if (i > 0 && x[i] > x[i - 1]) throw std::invalid_argument("weights must be sorted non-increasing");
  }
  if (!(alpha >= 1.0 && alpha <= 2.0)) throw std::invalid_argument("alpha must lie in [1, 2]");
  for (int p : ps)
    if (p < 2 || p > 16 || p % 2) throw std::invalid_argument("p must be even and at most 16");
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> acc(chunks, std::vector<double>(ps.size(), 0.0));
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::size_t end = std::min(trials, (c + 1) * kChunk);
    for (std::size_t t = c * kChunk; t < end; ++t) {
      double s = 0.0;
      for (double xi : x) s += xi * exp_power_variate(rng, alpha);
      for (std::size_t k = 0; k < ps.size(); ++k) acc[c][k] += std::pow(std::abs(s), ps[k]);
    }
  });
  std::vector<MomentRow> rows;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    double total = 0.0;
    for (const auto& a : acc) total += a[k];
    MomentRow row;
    row.p = ps[k];
    row.empirical = std::pow(total / double(trials), 1.0 / ps[k]);
    row.formula = moment_formula(x, alpha, ps[k]);
    row.ratio = row.empirical / row.formula;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace psichain
