#include "psichain/decompose.hpp"

#include "psichain/parallel.hpp"
#include "psichain/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace psichain {

namespace {

double log_power(double x, double alpha) { return std::pow(std::max(std::log(x), 0.0), 1.0 / alpha); }

double ratio_or_zero(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(den)) return 0.0;
  return num / den;
}

}  // namespace

PremiseCheck peeling_premise(const EmpiricalVector& v, double A, double B, const OrliczIndex& a) {
  const auto r = rearrange(v);
  const double N = static_cast<double>(v.size());
  PremiseCheck c;
  double mass2 = 0.0;
  for (std::size_t k = 1; k <= r.size(); ++k) {
    mass2 += r[k - 1] * r[k - 1];
    const double rhs = A + B * std::sqrt(static_cast<double>(k)) *
                               log_power(std::numbers::e * N / static_cast<double>(k), a.alpha());
    const double ratio = std::sqrt(mass2) / rhs;
    if (ratio > c.worst_ratio) {
      c.worst_ratio = ratio;
      c.worst_k = k;
    }
  }
  c.holds = c.worst_ratio <= 1.0 + 1e-12;
  return c;
}

Peeling peel(const EmpiricalVector& v, double A, double B, const OrliczIndex& a, double beta) {
  if (!(A > 0.0) || !(B > 0.0)) throw std::invalid_argument("peel needs A > 0 and B > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("peel needs beta > 0");
  const auto premise = peeling_premise(v, A, B, a);
  if (!premise.holds)
    throw std::domain_error("peeling premise violated at |I| = " + std::to_string(premise.worst_k));

  const double N = static_cast<double>(v.size());
  const double alpha = a.alpha();
  Peeling p;
  p.A = A;
  p.B = B;
  p.alpha = alpha;
  p.beta = beta;
  double mass2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= beta) {
      p.E.push_back(i);
      mass2 += v[i] * v[i];
    }
  }
  p.peaky_mass = std::sqrt(mass2);
  const double size = static_cast<double>(p.E.size());
  p.cardinality_bound =
      std::max(4.0 * A * A / (beta * beta), std::numbers::e * N * std::exp(-std::pow(beta / (2.0 * B), alpha)));
  p.cardinality_holds = size <= p.cardinality_bound;
  p.c3 = p.peaky_mass / A;
  p.mass_holds = p.c3 <= kPeelMassConstant;
  p.refinement_threshold = kPeelC1 * B * std::max(log_power(kPeelC2 * N * B * B / (A * A), alpha), 1.0);
  p.refinement_applicable = beta >= p.refinement_threshold;
  p.refinement_holds = !p.refinement_applicable || size <= A * A / (beta * beta);
  return p;
}

double truncation_level(double d_psi, double gamma2, std::size_t N, const OrliczIndex& a) {
  if (d_psi == 0.0) return 0.0;
  if (std::isinf(gamma2)) return d_psi;
  if (gamma2 == 0.0) return std::numeric_limits<double>::infinity();
  const double x = d_psi * d_psi * static_cast<double>(N) / (gamma2 * gamma2);
  return d_psi * std::max(log_power(x, a.alpha()), 1.0);
}

namespace {

struct Representatives {
  Matrix directions;  // one unit direction per row (sphere)
  std::vector<std::string> labels;
};

Representatives sphere_representatives(const Matrix& X, const DecomposeOptions& opt) {
  const Eigen::Index n = X.cols();
  const Eigen::Index N = X.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(X.transpose() * X));
  std::vector<Vector> dirs;
  Representatives r;
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    dirs.push_back(es.eigenvectors().col(j));
    r.labels.push_back("eigen" + std::to_string(n - 1 - j));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  const Vector norms = X.rowwise().norm();
  const auto extreme = std::min<std::size_t>(opt.extreme_rows, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(extreme), order.end(),
                    [&](Eigen::Index a, Eigen::Index b) { return norms[a] > norms[b] || (norms[a] == norms[b] && a < b); });
  for (std::size_t k = 0; k < extreme; ++k) {
    const Eigen::Index i = order[k];
    if (norms[i] == 0.0) continue;
    dirs.push_back(X.row(i).transpose() / norms[i]);
    r.labels.push_back("row" + std::to_string(i));
  }
  Rng rng(derive_seed(opt.seed, 2));
  for (std::size_t k = 0; k < opt.random_directions; ++k) {
    Vector g(n);
    for (Eigen::Index j = 0; j < n; ++j) g[j] = rng.normal();
    dirs.push_back(g / g.norm());
    r.labels.push_back("random" + std::to_string(k));
  }
  r.directions.resize(static_cast<Eigen::Index>(dirs.size()), n);
  for (std::size_t k = 0; k < dirs.size(); ++k) r.directions.row(static_cast<Eigen::Index>(k)) = dirs[k].transpose();
  return r;
}

}  // namespace

ClassDecomposition decompose_class(const SampleMatrix& X, const IndexClass& K, const ComplexityEstimate& est,
                                   const OrliczIndex& a, double t, const DecomposeOptions& opt) {
  if (!(t >= 1.0)) throw std::invalid_argument("decompose_class needs t >= 1");
  if (X.n() != K.n) throw std::invalid_argument("sample and class dimensions differ");
  ClassDecomposition out;
  out.t = t;
  out.N = X.N();
  out.gamma2 = est.gamma2_upper;
  out.d_psi = est.d_psi_alpha;
  const bool zero_class = K.sup_l2() == 0.0;
  if (zero_class) {
    out.gamma2 = 0.0;
    out.d_psi = 0.0;
  } else if (!(est.gamma2_upper > 0.0)) {
    throw std::invalid_argument("degenerate estimate: zero gamma2 for a nonzero class");
  }
  out.lambda = zero_class ? 0.0 : truncation_level(out.d_psi, out.gamma2, out.N, a);
  out.beta = out.lambda * t;

  Matrix directions;  // members as rows
  std::vector<std::string> labels;
  if (K.kind == IndexClass::Kind::Sphere) {
    auto reps = sphere_representatives(X.rows, opt);
    directions = std::move(reps.directions);
    labels = std::move(reps.labels);
  } else {
    directions.resize(static_cast<Eigen::Index>(K.size()), static_cast<Eigen::Index>(K.n));
    for (std::size_t k = 0; k < K.size(); ++k) {
      directions.row(static_cast<Eigen::Index>(k)) = K.member(k).transpose();
      labels.push_back("member" + std::to_string(k));
    }
  }

  const Matrix values = X.rows * directions.transpose();  // N x reps
  Vector second_moment = Vector::Zero(directions.rows());
  if (!zero_class && opt.fresh_samples > 0) {
    const auto fresh = sample(X.spec, opt.fresh_samples, derive_seed(opt.seed, 1));
    const Matrix fv = fresh.rows * directions.transpose();
    const double beta = out.beta;
    for (Eigen::Index k = 0; k < fv.cols(); ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < fv.rows(); ++i) {
        const double excess = std::max(std::abs(fv(i, k)) - beta, 0.0);
        s += excess * excess;
      }
      second_moment[k] = s / static_cast<double>(fv.rows());
    }
  }

  const std::size_t reps = static_cast<std::size_t>(directions.rows());
  out.parts.resize(reps);
  parallel_for(reps, [&](std::size_t k) {
    auto& part = out.parts[k];
    part.label = labels[k];
    const Vector v = values.col(static_cast<Eigen::Index>(k));
    Vector phi(v.size());
    Vector psi(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double c = std::clamp(v[i], -out.beta, out.beta);
      phi[i] = c;
      psi[i] = v[i] - c;
      if (std::abs(v[i]) >= out.beta && out.beta > 0.0) ++part.peaky_support;
    }
    part.peaky_l2 = psi.norm();
    part.regular_linf = phi.size() ? phi.cwiseAbs().maxCoeff() : 0.0;
    part.regular_psi = empirical_psi_norm(EmpiricalVector(std::vector<double>(phi.data(), phi.data() + phi.size())), a);
    part.peaky_second_moment = second_moment[static_cast<Eigen::Index>(k)];
    if (opt.keep_vectors) {
      part.values = v;
      part.regular = std::move(phi);
      part.peaky = std::move(psi);
    }
  });

  for (std::size_t k = 0; k < reps; ++k) {
    const auto& part = out.parts[k];
    if (opt.keep_vectors) {
      for (Eigen::Index i = 0; i < part.values.size(); ++i) {
        const double f = part.values[i];
        if (part.regular[i] + part.peaky[i] != f) out.algebra_holds = false;
        if (part.peaky[i] != 0.0 && std::abs(f) < out.beta) out.algebra_holds = false;
        if (std::abs(f) > out.beta && part.peaky[i] == 0.0) out.algebra_holds = false;
      }
    }
    if (part.regular_linf > out.beta) out.linf_holds = false;
    const double support_budget = std::isinf(out.gamma2) ? std::numeric_limits<double>::infinity()
                                                          : out.gamma2 * out.gamma2 / (out.lambda * out.lambda);
    out.support_mult = std::max(out.support_mult, ratio_or_zero(static_cast<double>(part.peaky_support), support_budget));
    out.peaky_l2_mult = std::max(out.peaky_l2_mult, ratio_or_zero(part.peaky_l2, out.gamma2));
    out.second_moment_mult = std::max(
        out.second_moment_mult,
        ratio_or_zero(part.peaky_second_moment, out.gamma2 * out.gamma2 / static_cast<double>(out.N)));
    out.regular_psi_mult = std::max(out.regular_psi_mult, ratio_or_zero(part.regular_psi, out.d_psi));
    out.regular_linf_ratio = std::max(out.regular_linf_ratio, ratio_or_zero(part.regular_linf, out.beta));
  }
  out.containment = out.linf_holds && out.support_mult <= 1.0 && out.peaky_l2_mult <= t && out.regular_psi_mult <= t;
  return out;
}

RudelsonComparison rudelson_compare(const SampleMatrix& X, const IndexClass& K, std::size_t rademacher_trials,
                                    std::uint64_t seed, const ComplexityEstimate* est, const OrliczIndex& a,
                                    double t) {
  if (rademacher_trials == 0) throw std::invalid_argument("rudelson_compare needs at least one trial");
  if (X.n() != K.n) throw std::invalid_argument("sample and class dimensions differ");
  const bool sphere = K.kind == IndexClass::Kind::Sphere;
  const Matrix values = sphere ? Matrix() : Matrix(K.evaluate(X.rows));
  const double sqrtN = std::sqrt(static_cast<double>(X.N()));
  std::vector<double> sup(rademacher_trials);
  parallel_for(rademacher_trials, [&](std::size_t trial) {
    Rng rng(derive_seed(seed, trial));
    Vector eps(static_cast<Eigen::Index>(X.N()));
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = rng.sign();
    if (sphere) {
      sup[trial] = (X.rows.transpose() * eps).norm() / sqrtN;
    } else {
      sup[trial] = values.cols() ? (values.transpose() * eps).cwiseAbs().maxCoeff() / sqrtN : 0.0;
    }
  });
  RudelsonComparison r;
  const double T = static_cast<double>(rademacher_trials);
  const double mean = std::accumulate(sup.begin(), sup.end(), 0.0) / T;
  double var = 0.0;
  for (double s : sup) var += (s - mean) * (s - mean);
  r.R_N = mean;
  r.R_N_stderr = rademacher_trials > 1 ? std::sqrt(var / (T - 1.0) / T) : 0.0;
  r.d_L2 = K.sup_l2();
  r.l1_budget = sqrtN * r.R_N;
  r.l2_budget = sqrtN * r.d_L2;
  r.rudelson_spike = r.l1_budget + r.l2_budget;
  if (!est) {
    r.tighter = "n/a";
    return r;
  }
  if (r.d_L2 == 0.0) {
    r.tighter = "tie";
    return r;
  }
  r.gamma2 = est->gamma2_upper;
  r.lambda = truncation_level(est->d_psi_alpha, r.gamma2, X.N(), a);
  r.truncation_spike = t * (r.gamma2 + r.lambda);
  if (r.truncation_spike < r.rudelson_spike)
    r.tighter = "truncation";
  else if (r.truncation_spike > r.rudelson_spike)
    r.tighter = "rudelson";
  else
    r.tighter = "tie";
  return r;
}

}  // namespace psichain
