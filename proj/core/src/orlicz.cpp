#include "psichain/orlicz.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace psichain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

// log of E exp((|X|/C)^alpha) for a law with one-sided log density
// logp on [0, upper], evaluated with the peak factored out.
double log_orlicz_mean(const std::function<double(double)>& logp, double upper, double C, double alpha) {
  auto h = [&](double t) { return logp(t) + std::pow(t / C, alpha); };
  const double span = std::isfinite(upper) ? upper : 1.0;
  double peak = -kInf;
  for (int k = 0; k <= 512; ++k) {
    const double t = std::isfinite(upper) ? span * k / 512.0 : 40.0 * k / 512.0;
    const double v = h(t);
    if (std::isfinite(v)) peak = std::max(peak, v);
  }
  auto g = [&](double t) {
    const double v = h(t);
    return std::isfinite(v) ? std::exp(v - peak) : 0.0;
  };
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  if (std::isfinite(upper)) {
    // Split so that boundary layers of width ~1/dim are resolved.
    const double cuts[] = {0.0, upper / 64, upper / 8, upper / 2, upper};
    for (int k = 0; k < 4; ++k) total += gauss_kronrod<double, 61>::integrate(g, cuts[k], cuts[k + 1], 15, 1e-13);
  } else {
    total = gauss_kronrod<double, 61>::integrate(g, 0.0, 4.0, 15, 1e-13) +
            gauss_kronrod<double, 61>::integrate(g, 4.0, kInf, 15, 1e-13);
  }
  return peak + std::log(total);
}

// Solve log E exp((|X|/C)^alpha) = log 2 by bisection on log C.
double solve_orlicz(const std::function<double(double)>& logp, double upper, double alpha) {
  auto F = [&](double logC) { return log_orlicz_mean(logp, upper, std::exp(logC), alpha) - std::log(2.0); };
  double lo = 0.0, hi = 0.0;
  while (F(lo) < 0.0) lo -= 1.0;
  while (F(hi) > 0.0) hi += 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

// Norm of Y with density proportional to exp(-|t|^shape).
double exp_power_norm(double shape, double alpha) {
  if (alpha > shape) return kInf;
  if (alpha == shape) return std::pow(1.0 - std::pow(2.0, -alpha), -1.0 / alpha);
  const double lognorm = std::log(shape) - std::log(boost::math::tgamma(1.0 / shape));
  auto logp = [=](double t) { return lognorm - std::pow(t, shape); };
  return solve_orlicz(logp, kInf, alpha);
}

}  // namespace

OrliczIndex::OrliczIndex(double alpha) : alpha_(alpha) {
  if (!(alpha >= 1.0 && alpha <= 2.0)) throw std::invalid_argument("Orlicz index alpha must lie in [1, 2]");
}

double OrliczIndex::conjugate() const { return alpha_ == 1.0 ? kInf : alpha_ / (alpha_ - 1.0); }

EmpiricalVector::EmpiricalVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("empirical vector must be nonempty");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("empirical vector has a non-finite entry");
}

EmpiricalVector::EmpiricalVector(std::span<const double> values)
    : EmpiricalVector(std::vector<double>(values.begin(), values.end())) {}

double empirical_psi_norm(const EmpiricalVector& x, const OrliczIndex& a) {
  const auto v = x.values();
  const double top = max_abs(v);
  if (top == 0.0) return 0.0;
  const double alpha = a.alpha();
  const double N = static_cast<double>(v.size());
  double lo = top / std::pow(std::log(2.0 * N), 1.0 / alpha);
  double hi = top / std::pow(std::log(2.0), 1.0 / alpha);
  auto excess = [&](double C) {
    double s = 0.0;
    for (double t : v) s += std::exp(std::pow(std::abs(t) / C, alpha));
    return s / N - 2.0;
  };
  if (excess(hi) >= 0.0) return hi;
  if (excess(lo) <= 0.0) return lo;
  while (hi - lo > 1e-14 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

AnalyticLaw AnalyticLaw::gaussian(double sigma) { return {Kind::Gaussian, sigma, 2.0, 1}; }
AnalyticLaw AnalyticLaw::laplace(double b) { return {Kind::Laplace, b, 1.0, 1}; }
AnalyticLaw AnalyticLaw::exp_power(double shape, double scale) { return {Kind::ExpPower, scale, shape, 1}; }
AnalyticLaw AnalyticLaw::rademacher(double scale) { return {Kind::Rademacher, scale, 0.0, 1}; }
AnalyticLaw AnalyticLaw::l1_ball_coordinate(std::size_t dim, double scale) {
  if (dim == 0) throw std::invalid_argument("l1 ball dimension must be positive");
  return {Kind::L1BallCoordinate, scale, 0.0, dim};
}

double dist_psi_norm(const AnalyticLaw& law, const OrliczIndex& a) {
  const double alpha = a.alpha();
  if (!(law.scale > 0.0)) throw std::invalid_argument("law scale must be positive");
  switch (law.kind) {
    case AnalyticLaw::Kind::Gaussian:
      if (alpha == 2.0) return law.scale * std::sqrt(8.0 / 3.0);
      return law.scale * std::numbers::sqrt2 * exp_power_norm(2.0, alpha);
    case AnalyticLaw::Kind::Laplace:
      return alpha == 1.0 ? 2.0 * law.scale : kInf;
    case AnalyticLaw::Kind::ExpPower:
      if (!(law.shape >= 1.0 && law.shape <= 2.0)) throw std::invalid_argument("ExpPower shape must lie in [1, 2]");
      return law.scale * exp_power_norm(law.shape, alpha);
    case AnalyticLaw::Kind::Rademacher:
      return law.scale / std::pow(std::log(2.0), 1.0 / alpha);
    case AnalyticLaw::Kind::L1BallCoordinate: {
      // |T| has density n(1-t)^{n-1} on [0, 1].
      const double n = static_cast<double>(law.dim);
      auto logp = [=](double t) { return t >= 1.0 ? -kInf : std::log(n) + (n - 1.0) * std::log1p(-t); };
      if (law.dim == 1) return law.scale * solve_orlicz([](double) { return 0.0; }, 1.0, alpha);
      return law.scale * solve_orlicz(logp, 1.0, alpha);
    }
  }
  return kInf;
}

int max_reliable_moment(std::size_t N) {
  const int p = static_cast<int>(std::floor(std::log(static_cast<double>(N))));
  return p - (p % 2);
}

double dist_psi_norm(const EmpiricalVector& sample, const OrliczIndex& a, int p_max) {
  const auto v = sample.values();
  if (v.size() < 1000) throw std::invalid_argument("moment estimator needs at least 1000 draws");
  if (p_max < 2 || p_max % 2 != 0) throw std::invalid_argument("p_max must be an even integer >= 2");
  if (p_max > max_reliable_moment(v.size())) throw std::invalid_argument("p_max exceeds log N reliability cap");
  const double N = static_cast<double>(v.size());
  double best = 0.0;
  for (int p = 2; p <= p_max; p += 2) {
    double s = 0.0;
    for (double t : v) s += std::pow(t, p);
    best = std::max(best, std::pow(s / N, 1.0 / p) / std::pow(p, 1.0 / a.alpha()));
  }
  return kMomentCalibration * best;
}

EmpiricalVector rearrange(const EmpiricalVector& x) {
  std::vector<double> r(x.size());
  std::transform(x.values().begin(), x.values().end(), r.begin(), [](double t) { return std::abs(t); });
  std::sort(r.begin(), r.end(), std::greater<>());
  return EmpiricalVector(std::move(r));
}

bool dominates(const EmpiricalVector& u, const EmpiricalVector& v, std::span<const std::size_t> I) {
  if (I.size() > v.size()) throw std::out_of_range("index set larger than the dominating vector");
  std::vector<double> pu;
  pu.reserve(I.size());
  for (std::size_t i : I) {
    if (i >= u.size()) throw std::out_of_range("index out of range");
    pu.push_back(std::abs(u[i]));
  }
  std::sort(pu.begin(), pu.end(), std::greater<>());
  const auto vs = rearrange(v);
  for (std::size_t k = 0; k < pu.size(); ++k)
    if (pu[k] > vs[k]) return false;
  return true;
}

double envelope_constant(const EmpiricalVector& x, const OrliczIndex& a) {
  const double norm = empirical_psi_norm(x, a);
  if (norm == 0.0) throw std::invalid_argument("envelope constant undefined for the zero vector");
  const auto r = rearrange(x);
  const double N = static_cast<double>(x.size());
  double c = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double env = norm * std::pow(std::log(std::numbers::e * N / static_cast<double>(i + 1)), 1.0 / a.alpha());
    c = std::max(c, r[i] / env);
  }
  return c;
}

}  // namespace psichain
