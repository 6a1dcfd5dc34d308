#include "psichain/complexity.hpp"

#include "psichain/parallel.hpp"
#include "psichain/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace psichain {

namespace {

std::span<const double> row_span(const Matrix& M, Eigen::Index i) {
  return {M.row(i).data(), static_cast<std::size_t>(M.cols())};
}

}  // namespace

IndexClass IndexClass::finite(Matrix rows) {
  if (rows.rows() == 0 || rows.cols() == 0) throw std::invalid_argument("finite class must be nonempty");
  if (!rows.allFinite()) throw std::invalid_argument("finite class has non-finite entries");
  IndexClass K;
  K.kind = Kind::FiniteVectors;
  K.n = static_cast<std::size_t>(rows.cols());
  K.vectors = std::move(rows);
  return K;
}

IndexClass IndexClass::sphere(std::size_t n) {
  if (n == 0) throw std::invalid_argument("class dimension must be positive");
  IndexClass K;
  K.kind = Kind::Sphere;
  K.n = n;
  return K;
}

IndexClass IndexClass::l1_vertices(std::size_t n) {
  auto K = sphere(n);
  K.kind = Kind::L1Vertices;
  return K;
}

IndexClass IndexClass::weighted_basis(std::vector<double> weights) {
  if (weights.empty()) throw std::invalid_argument("weighted basis needs weights");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("weighted basis weights must be positive");
  IndexClass K;
  K.kind = Kind::WeightedBasis;
  K.n = weights.size();
  K.weights = std::move(weights);
  return K;
}

IndexClass IndexClass::log_weighted_basis(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = 1.0 / std::sqrt(std::log(static_cast<double>(j) + 2.0));
  return weighted_basis(std::move(w));
}

std::string IndexClass::name() const {
  switch (kind) {
    case Kind::FiniteVectors: return "finite";
    case Kind::Sphere: return "sphere";
    case Kind::L1Vertices: return "l1vertices";
    case Kind::WeightedBasis: return "weighted";
  }
  return "unknown";
}

std::size_t IndexClass::size() const {
  switch (kind) {
    case Kind::FiniteVectors: return static_cast<std::size_t>(vectors.rows());
    case Kind::Sphere: return 0;
    case Kind::L1Vertices:
    case Kind::WeightedBasis: return n;
  }
  return 0;
}

Matrix IndexClass::evaluate(const Matrix& X) const {
  if (static_cast<std::size_t>(X.cols()) != n) throw std::invalid_argument("sample dimension does not match class");
  switch (kind) {
    case Kind::FiniteVectors: return X * vectors.transpose();
    case Kind::L1Vertices: return X;
    case Kind::WeightedBasis: {
      Matrix out = X;
      for (std::size_t j = 0; j < n; ++j) out.col(static_cast<Eigen::Index>(j)) *= weights[j];
      return out;
    }
    case Kind::Sphere: break;
  }
  throw std::invalid_argument("sphere class has no finite member list");
}

Vector IndexClass::member(std::size_t k) const {
  if (k >= size()) throw std::out_of_range("class member index out of range");
  if (kind == Kind::FiniteVectors) return vectors.row(static_cast<Eigen::Index>(k)).transpose();
  Vector e = Vector::Zero(static_cast<Eigen::Index>(n));
  e(static_cast<Eigen::Index>(k)) = kind == Kind::WeightedBasis ? weights[k] : 1.0;
  return e;
}

std::vector<double> IndexClass::member_norms2() const {
  switch (kind) {
    case Kind::FiniteVectors: {
      std::vector<double> out(static_cast<std::size_t>(vectors.rows()));
      for (Eigen::Index k = 0; k < vectors.rows(); ++k) out[static_cast<std::size_t>(k)] = vectors.row(k).squaredNorm();
      return out;
    }
    case Kind::L1Vertices: return std::vector<double>(n, 1.0);
    case Kind::WeightedBasis: {
      std::vector<double> out(n);
      for (std::size_t j = 0; j < n; ++j) out[j] = weights[j] * weights[j];
      return out;
    }
    case Kind::Sphere: break;
  }
  throw std::invalid_argument("sphere class has no finite member list");
}

double IndexClass::sup_l2() const {
  if (kind == Kind::Sphere) return 1.0;
  const auto norms = member_norms2();
  return std::sqrt(*std::max_element(norms.begin(), norms.end()));
}

double IndexClass::support(std::span<const double> g, bool symmetric) const {
  if (g.size() != n) throw std::invalid_argument("direction dimension does not match class");
  double best = 0.0;
  switch (kind) {
    case Kind::Sphere: {
      for (double t : g) best += t * t;
      return std::sqrt(best);
    }
    case Kind::L1Vertices:
      for (double t : g) best = std::max(best, std::abs(t));
      return best;
    case Kind::WeightedBasis:
      for (std::size_t j = 0; j < n; ++j) best = std::max(best, weights[j] * std::abs(g[j]));
      return best;
    case Kind::FiniteVectors: {
      const Eigen::Map<const Vector> gv(g.data(), static_cast<Eigen::Index>(n));
      const Vector dots = vectors * gv;
      return symmetric ? dots.cwiseAbs().maxCoeff() : dots.maxCoeff();
    }
  }
  return best;
}

WidthEstimate gaussian_width(const IndexClass& K, std::size_t trials, std::uint64_t seed, bool symmetric) {
  if (trials == 0) throw std::invalid_argument("gaussian width needs at least one trial");
  std::vector<double> values(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<double> g(K.n);
    for (auto& x : g) x = rng.normal();
    values[t] = K.support(g, symmetric);
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  WidthEstimate w;
  w.mean = mean;
  w.standard_error = trials > 1 ? std::sqrt(var / static_cast<double>(trials - 1) / static_cast<double>(trials)) : 0.0;
  return w;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Metric rearranged_weighted_metric(std::vector<double> weights) {
  return [w = std::move(weights)](std::span<const double> a, std::span<const double> b) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = (a[i] - b[i]) * (a[i] - b[i]);
    std::sort(d.begin(), d.end(), std::greater<>());
    double s = 0.0;
    for (std::size_t i = 0; i < d.size() && i < w.size(); ++i) s += d[i] * w[i] * w[i];
    return std::sqrt(s);
  };
}

Traversal farthest_first(const Matrix& points, const Metric& d, std::size_t max_centers) {
  const auto P = static_cast<std::size_t>(points.rows());
  if (P == 0) throw std::invalid_argument("farthest-first traversal needs a nonempty point set");
  if (max_centers == 0 || max_centers > P) max_centers = P;
  Traversal tr;
  std::vector<double> dist(P, std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  while (tr.order.size() < max_centers) {
    tr.order.push_back(next);
    const auto c = row_span(points, static_cast<Eigen::Index>(next));
    double far = -1.0;
    for (std::size_t i = 0; i < P; ++i) {
      dist[i] = std::min(dist[i], d(row_span(points, static_cast<Eigen::Index>(i)), c));
      if (dist[i] > far) {
        far = dist[i];
        next = i;
      }
    }
    tr.radius.push_back(far);
    if (far == 0.0) break;
  }
  return tr;
}

std::size_t covering_number(const Matrix& points, double eps, const Metric& d) {
  if (points.rows() == 0) throw std::invalid_argument("covering number of an empty set");
  if (!(eps > 0.0)) throw std::invalid_argument("covering scale must be positive");
  const auto P = static_cast<std::size_t>(points.rows());
  std::vector<double> dist(P, std::numeric_limits<double>::infinity());
  std::size_t next = 0, count = 0;
  for (;;) {
    ++count;
    const auto c = row_span(points, static_cast<Eigen::Index>(next));
    double far = -1.0;
    for (std::size_t i = 0; i < P; ++i) {
      dist[i] = std::min(dist[i], d(row_span(points, static_cast<Eigen::Index>(i)), c));
      if (dist[i] > far) {
        far = dist[i];
        next = i;
      }
    }
    if (far <= eps) return count;
  }
}

DudleyResult dudley_upper(const std::function<double(double)>& log_covering, double diameter, int levels) {
  DudleyResult r;
  if (!(diameter > 0.0)) return r;
  for (int k = 1; k <= levels; ++k) {
    const double eps = diameter / std::ldexp(1.0, k);
    const double lc = log_covering(eps);
    if (!std::isfinite(lc) || lc < 0.0) throw std::runtime_error("covering estimator failed at some scale");
    r.scales.push_back(eps);
    r.log_covering.push_back(lc);
    r.value += eps * std::sqrt(lc);
  }
  return r;
}

DudleyResult dudley_upper(const Matrix& points, const Metric& d, int levels) {
  const auto tr = farthest_first(points, d);
  double diameter = 0.0;
  const auto P = points.rows();
  for (Eigen::Index i = 0; i < P; ++i)
    for (Eigen::Index j = i + 1; j < P; ++j) diameter = std::max(diameter, d(row_span(points, i), row_span(points, j)));
  auto log_cov = [&](double eps) {
    std::size_t k = 0;
    while (k < tr.radius.size() && tr.radius[k] > eps) ++k;
    return std::log(static_cast<double>(k + 1));
  };
  return dudley_upper(log_cov, diameter, levels);
}

double finite_gamma2(const Matrix& points, const Metric& d) {
  const auto P = static_cast<std::size_t>(points.rows());
  if (P == 0) throw std::invalid_argument("finite_gamma2 needs points");
  if (P > kFiniteGamma2Cap) throw std::invalid_argument("finite_gamma2 is capped at 2048 points");
  std::vector<double> dist(P, std::numeric_limits<double>::infinity());
  std::vector<double> acc(P, 0.0);
  std::size_t next = 0, centers = 0;
  for (int s = 0;; ++s) {
    const std::size_t k = s == 0 ? 1 : static_cast<std::size_t>(std::min<double>(std::ldexp(1.0, 1 << s), double(P)));
    while (centers < k) {
      const auto c = row_span(points, static_cast<Eigen::Index>(next));
      ++centers;
      double far = -1.0;
      std::size_t arg = next;
      for (std::size_t i = 0; i < P; ++i) {
        dist[i] = std::min(dist[i], d(row_span(points, static_cast<Eigen::Index>(i)), c));
        if (dist[i] > far) {
          far = dist[i];
          arg = i;
        }
      }
      next = arg;
    }
    const double w = std::sqrt(std::ldexp(1.0, s));
    for (std::size_t i = 0; i < P; ++i) acc[i] += w * dist[i];
    if (centers >= P) break;
  }
  return *std::max_element(acc.begin(), acc.end());
}

UnconditionalResult unconditional_psi2_gamma2(std::size_t n, std::vector<double> weights) {
  if (n == 0 || n > 1024) throw std::invalid_argument("unconditional sphere estimate needs 1 <= n <= 1024");
  const double dn = static_cast<double>(n);
  if (weights.empty()) {
    weights.resize(n);
    for (std::size_t j = 0; j < n; ++j) weights[j] = std::log(std::numbers::e * dn / static_cast<double>(j + 1));
  }
  if (weights.size() != n) throw std::invalid_argument("weight count must equal n");
  UnconditionalResult r;
  r.diameter = 2.0 * *std::max_element(weights.begin(), weights.end());
  auto log_cov = [&](double eps) {
    if (eps >= r.diameter) return 0.0;
    // Volumetric regime, inherited monotonically above scale 2.
    double best = dn * std::log(3.0 / std::min(eps, 2.0));
    // Block-net regime at scale w_{2^r}.
    for (std::size_t b = 2; b <= n; b *= 2) {
      if (weights[b - 1] <= eps) {
        const double db = static_cast<double>(b);
        best = std::min(best, db * std::log(std::numbers::e * dn / db));
        break;
      }
    }
    return best;
  };
  r.value = dudley_upper(log_cov, r.diameter).value;
  r.ratio = r.value / std::sqrt(dn);
  return r;
}

ComplexityEstimate estimate_complexity(const EnsembleSpec& spec, const IndexClass& K, const OrliczIndex& a,
                                       const ComplexityOptions& opt) {
  if (spec.n != K.n) throw std::invalid_argument("ensemble and class dimensions differ");
  ComplexityEstimate e;
  const auto w = gaussian_width(K, opt.width_trials, derive_seed(opt.seed, 1), true);
  e.gamma2_lower_proxy = w.mean;
  e.width_stderr = w.standard_error;
  e.Q2 = estimate_Q(spec, OrliczIndex(2.0), opt.directions, opt.samples, derive_seed(opt.seed, 2)).value;
  e.Q_alpha = a.alpha() == 2.0 ? e.Q2 : estimate_Q(spec, a, opt.directions, opt.samples, derive_seed(opt.seed, 3)).value;
  e.d_L2 = K.sup_l2();
  e.d_psi_alpha = e.Q_alpha * e.d_L2;
  e.gamma2_upper = e.gamma2_lower_proxy > 0.0 ? e.Q2 * e.gamma2_lower_proxy : 0.0;
  e.metric = MetricTag::Psi2Proxy;
  e.flagged = e.gamma2_upper < e.gamma2_lower_proxy;
  return e;
}

}  // namespace psichain
