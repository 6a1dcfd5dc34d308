#include "psichain/applications.hpp"

#include "psichain/complexity.hpp"
#include "psichain/concentration.hpp"
#include "psichain/parallel.hpp"
#include "psichain/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace psichain {

RandomOperator RandomOperator::from_sample(const SampleMatrix& X, bool scaled) {
  RandomOperator op;
  op.scaled = scaled;
  op.gamma = X.rows;
  if (scaled) op.gamma /= std::sqrt(static_cast<double>(X.n()));
  return op;
}

BodySpec BodySpec::euclidean_ball(std::size_t n) {
  BodySpec b;
  b.kind = Kind::EuclideanBall;
  b.n = n;
  b.validate();
  return b;
}

BodySpec BodySpec::l1_ball(std::size_t n) {
  BodySpec b;
  b.kind = Kind::L1Ball;
  b.n = n;
  b.validate();
  return b;
}

BodySpec BodySpec::ellipsoid(const Matrix& shape) {
  BodySpec b;
  b.kind = Kind::Ellipsoid;
  b.n = static_cast<std::size_t>(shape.rows());
  b.shape = shape;
  b.validate();
  return b;
}

BodySpec BodySpec::finite_points(const Matrix& points) {
  BodySpec b;
  b.kind = Kind::FinitePoints;
  b.n = static_cast<std::size_t>(points.cols());
  b.points = points;
  b.validate();
  return b;
}

BodySpec BodySpec::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw std::invalid_argument("body scale must be positive");
  BodySpec b = *this;
  b.scale *= factor;
  return b;
}

void BodySpec::validate() const {
  if (n == 0) throw std::invalid_argument("body dimension must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("body scale must be positive");
  if (kind == Kind::Ellipsoid) {
    if (shape.rows() != shape.cols() || static_cast<std::size_t>(shape.rows()) != n)
      throw std::invalid_argument("ellipsoid shape must be n x n");
    if (!shape.isApprox(shape.transpose(), 1e-12)) throw std::invalid_argument("ellipsoid shape must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(shape), Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw std::invalid_argument("ellipsoid shape must be positive definite");
  }
  if (kind == Kind::FinitePoints) {
    if (points.rows() == 0) throw std::invalid_argument("point body needs at least one point");
    if (!points.allFinite()) throw std::invalid_argument("point body has non-finite coordinates");
  }
}

std::string BodySpec::name() const {
  switch (kind) {
    case Kind::EuclideanBall: return "l2ball";
    case Kind::L1Ball: return "l1ball";
    case Kind::Ellipsoid: return "ellipsoid";
    case Kind::FinitePoints: return "points" + std::to_string(points.rows());
  }
  return "body";
}

namespace {

Eigen::MatrixXd inverse_sqrt(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(S)};
  return es.operatorInverseSqrt();
}

double max_pairwise(const Matrix& P) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = i + 1; j < P.rows(); ++j) best = std::max(best, (P.row(i) - P.row(j)).norm());
  return best;
}

double sigma_max(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

double p_norm(const Vector& v, double p) {
  if (std::isinf(p)) return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  if (p == 2.0) return v.norm();
  return std::pow(v.cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

// Matrix whose image of B_2 is the image of the (unscaled) ellipsoid or ball.
Eigen::MatrixXd ball_operator(const Matrix& gamma, const BodySpec& K) {
  if (K.kind == BodySpec::Kind::Ellipsoid) return gamma * inverse_sqrt(K.shape);
  return gamma;
}

}  // namespace

double BodySpec::diameter() const {
  switch (kind) {
    case Kind::EuclideanBall:
    case Kind::L1Ball: return 2.0 * scale;
    case Kind::Ellipsoid: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(shape), Eigen::EigenvaluesOnly);
      return 2.0 * scale / std::sqrt(es.eigenvalues().minCoeff());
    }
    case Kind::FinitePoints: return scale * max_pairwise(points);
  }
  return 0.0;
}

OperatorNorm operator_norm(const Matrix& gamma, const BodySpec& K, double p, std::size_t samples,
                           std::uint64_t seed) {
  K.validate();
  if (static_cast<std::size_t>(gamma.cols()) != K.n) throw std::invalid_argument("operator and body dimensions differ");
  if (!(p == 2.0 || p == 3.0 || p == 4.0 || std::isinf(p))) throw std::invalid_argument("p must be 2, 3, 4 or inf");
  OperatorNorm r;
  switch (K.kind) {
    case BodySpec::Kind::L1Ball: {
      for (Eigen::Index j = 0; j < gamma.cols(); ++j) r.value = std::max(r.value, p_norm(gamma.col(j), p));
      r.method = "exact-vertices";
      break;
    }
    case BodySpec::Kind::FinitePoints: {
      for (Eigen::Index k = 0; k < K.points.rows(); ++k)
        r.value = std::max(r.value, p_norm(gamma * K.points.row(k).transpose(), p));
      r.method = "exact-points";
      break;
    }
    case BodySpec::Kind::EuclideanBall:
    case BodySpec::Kind::Ellipsoid: {
      const Eigen::MatrixXd M = ball_operator(gamma, K);
      if (p == 2.0) {
        r.value = sigma_max(M);
        r.method = "exact-spectral";
      } else if (std::isinf(p)) {
        r.value = M.rows() ? M.rowwise().norm().maxCoeff() : 0.0;
        r.method = "exact-rows";
      } else {
        Rng rng(seed);
        Vector u(M.cols());
        for (std::size_t s = 0; s < samples; ++s) {
          for (Eigen::Index j = 0; j < u.size(); ++j) u[j] = rng.normal();
          r.value = std::max(r.value, p_norm(M * (u / u.norm()), p));
        }
        if (M.size()) {
          Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinV);
          r.value = std::max(r.value, p_norm(M * svd.matrixV().col(0), p));
        }
        r.method = "sampled-lower";
      }
      break;
    }
  }
  r.value *= K.scale;
  return r;
}

double image_diameter(const Matrix& A, const BodySpec& K) {
  switch (K.kind) {
    case BodySpec::Kind::FinitePoints: return K.scale * max_pairwise(K.points * A.transpose());
    case BodySpec::Kind::L1Ball:
      return A.cols() ? 2.0 * K.scale * A.colwise().norm().maxCoeff() : 0.0;
    case BodySpec::Kind::EuclideanBall:
    case BodySpec::Kind::Ellipsoid: return 2.0 * K.scale * sigma_max(ball_operator(A, K));
  }
  return 0.0;
}

namespace {

IndexClass body_class(const BodySpec& K) {
  switch (K.kind) {
    case BodySpec::Kind::L1Ball: return IndexClass::l1_vertices(K.n);
    case BodySpec::Kind::FinitePoints: return IndexClass::finite(K.points);
    default: throw std::invalid_argument("shrinking needs a point body or the l1 ball");
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

ShrinkingResult shrinking_experiment(const EnsembleSpec& spec, const BodySpec& K, const std::vector<std::size_t>& k_grid,
                                     std::size_t trials, std::uint64_t seed) {
  K.validate();
  if (spec.n != K.n) throw std::invalid_argument("ensemble and body dimensions differ");
  if (k_grid.empty() || trials == 0) throw std::invalid_argument("shrinking needs a k grid and trials");
  const IndexClass cls = body_class(K);
  for (std::size_t k : k_grid)
    if (k == 0 || k > K.n) throw std::invalid_argument("k = " + std::to_string(k) + " is outside the shrinking regime");
  const double diamK = K.diameter();
  if (!(diamK > 0.0)) throw std::invalid_argument("body has zero diameter");
  const double n = static_cast<double>(K.n);

  ShrinkingResult out;
  for (std::size_t k : k_grid) {
    std::vector<double> diam(trials), ratio(trials);
    parallel_for(trials, [&](std::size_t t) {
      const auto X = sample(spec, k, derive_seed(seed, t, k));
      const Matrix A = X.rows / std::sqrt(n);
      diam[t] = image_diameter(A, K);
      ratio[t] = diam[t] / (std::sqrt(static_cast<double>(k) / n) * diamK);
    });
    ShrinkingRow row;
    row.k = k;
    const double T = static_cast<double>(trials);
    row.mean_diameter = std::accumulate(diam.begin(), diam.end(), 0.0) / T;
    row.ratio_mean = std::accumulate(ratio.begin(), ratio.end(), 0.0) / T;
    row.ratio_median = median(ratio);
    row.ratio_min = *std::min_element(ratio.begin(), ratio.end());
    row.ratio_max = *std::max_element(ratio.begin(), ratio.end());
    out.rows.push_back(row);
  }

  const auto proxy_seed = derive_seed(seed, std::uint64_t{1} << 20);
  const double width = K.scale * gaussian_width(cls, 2000, derive_seed(proxy_seed, 1), true).mean;
  const double q2 = estimate_Q(spec, OrliczIndex(2.0), 20, 20000, derive_seed(proxy_seed, 2)).value;
  const double radius = K.scale * cls.sup_l2();
  out.k_prime = q2 * width / radius;
  out.k_prime_sq = out.k_prime * out.k_prime;
  const double last = out.rows.back().ratio_mean;
  out.plateau_k = out.rows.back().k;
  for (std::size_t i = out.rows.size(); i-- > 0;) {
    const double r = out.rows[i].ratio_mean;
    if (r > 1.5 * last || r < last / 1.5) break;
    out.plateau_k = out.rows[i].k;
  }
  return out;
}

KernelSection kernel_diameter(const Matrix& gamma, const BodySpec& K) {
  K.validate();
  if (K.kind != BodySpec::Kind::Ellipsoid && K.kind != BodySpec::Kind::EuclideanBall)
    throw std::invalid_argument("kernel diameter needs an ellipsoid");
  const auto n = static_cast<Eigen::Index>(K.n);
  if (gamma.cols() != n) throw std::invalid_argument("operator and body dimensions differ");
  KernelSection ks;
  Eigen::Index rank = 0;
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  if (gamma.rows() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(gamma), Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double tol = static_cast<double>(std::max(gamma.rows(), gamma.cols())) *
                       std::numeric_limits<double>::epsilon() * (s.size() ? s(0) : 0.0);
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > tol) ++rank;
    V = svd.matrixV();
  }
  ks.basis = V.rightCols(n - rank);
  if (ks.basis.cols() == 0) return ks;
  const Eigen::MatrixXd S = K.kind == BodySpec::Kind::Ellipsoid ? Eigen::MatrixXd(K.shape) : Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd M = Eigen::MatrixXd(ks.basis).transpose() * S * Eigen::MatrixXd(ks.basis);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  ks.diameter = 2.0 * K.scale / std::sqrt(es.eigenvalues().minCoeff());
  return ks;
}

double ellipsoid_ball_width(const Vector& axes_inv2, double r, const Matrix& g) {
  if (!(r > 0.0)) return 0.0;
  const double inv_r2 = 1.0 / (r * r);
  double total = 0.0;
  for (Eigen::Index k = 0; k < g.rows(); ++k) {
    // sup over the intersection = min over t in [0, 1] of the support of
    // {x^T (t S + (1 - t) I / r^2) x <= 1}; the squared support is convex in t.
    auto h2 = [&](double t) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < g.cols(); ++j) s += g(k, j) * g(k, j) / (t * axes_inv2[j] + (1.0 - t) * inv_r2);
      return s;
    };
    double lo = 0.0, hi = 1.0;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = h2(x1), f2 = h2(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = h2(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = h2(x2);
      }
    }
    const double best = std::min({f1, f2, h2(0.0), h2(1.0)});
    total += std::sqrt(best);
  }
  return g.rows() ? total / static_cast<double>(g.rows()) : 0.0;
}

double r_star(const BodySpec& K, std::size_t N, double q, std::size_t width_draws, std::uint64_t seed) {
  K.validate();
  if (N == 0 || width_draws == 0) throw std::invalid_argument("r_star needs N > 0 and width draws");
  if (std::isinf(q)) return std::numeric_limits<double>::infinity();
  const auto n = static_cast<Eigen::Index>(K.n);
  Vector s = Vector::Ones(n);
  if (K.kind == BodySpec::Kind::Ellipsoid) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(K.shape), Eigen::EigenvaluesOnly);
    s = es.eigenvalues();
  } else if (K.kind != BodySpec::Kind::EuclideanBall) {
    throw std::invalid_argument("r_star needs an ellipsoid");
  }
  s /= K.scale * K.scale;
  Matrix g(static_cast<Eigen::Index>(width_draws), n);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  const double sqrtN = std::sqrt(static_cast<double>(N));
  const double R = 1.0 / std::sqrt(s.minCoeff());
  auto holds = [&](double r) { return q * ellipsoid_ball_width(s, r, g) / sqrtN <= r; };
  if (!holds(R)) return q * ellipsoid_ball_width(s, R, g) / sqrtN;
  double lo = R * 1e-12, hi = R;
  if (holds(lo)) return 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    (holds(mid) ? hi : lo) = mid;
  }
  return hi;
}

LowMStarResult low_mstar_experiment(const EnsembleSpec& spec, const BodySpec& K, const std::vector<std::size_t>& N_grid,
                                    std::size_t trials, std::uint64_t seed, std::size_t width_draws) {
  K.validate();
  if (spec.n != K.n) throw std::invalid_argument("ensemble and body dimensions differ");
  if (N_grid.empty() || trials == 0) throw std::invalid_argument("low M* needs an N grid and trials");
  for (std::size_t N : N_grid)
    if (N == 0 || N >= K.n) throw std::invalid_argument("low M* needs 0 < N < n, got N = " + std::to_string(N));
  std::vector<std::size_t> grid = N_grid;
  std::sort(grid.begin(), grid.end());
  const std::size_t Nmax = grid.back();

  std::vector<std::vector<double>> diam(trials, std::vector<double>(grid.size()));
  parallel_for(trials, [&](std::size_t t) {
    const auto X = sample(spec, Nmax, derive_seed(seed, t));
    for (std::size_t c = 0; c < grid.size(); ++c)
      diam[t][c] = kernel_diameter(X.rows.topRows(static_cast<Eigen::Index>(grid[c])), K).diameter;
  });

  LowMStarResult out;
  const auto proxy_seed = derive_seed(seed, std::uint64_t{1} << 20);
  const double q2 = estimate_Q(spec, OrliczIndex(2.0), 20, 20000, derive_seed(proxy_seed, 2)).value;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    LowMStarRow row;
    row.N = grid[c];
    for (std::size_t t = 0; t < trials; ++t) row.diameters.push_back(diam[t][c]);
    row.mean_diameter = std::accumulate(row.diameters.begin(), row.diameters.end(), 0.0) / static_cast<double>(trials);
    row.r_star = r_star(K, grid[c], 1.0, width_draws, derive_seed(proxy_seed, 1));
    row.r_star_psi2 = r_star(K, grid[c], q2, width_draws, derive_seed(proxy_seed, 1));
    out.rows.push_back(std::move(row));
  }
  for (std::size_t t = 0; t < trials; ++t)
    for (std::size_t c = 1; c < grid.size(); ++c)
      if (diam[t][c] > diam[t][c - 1] * (1.0 + 1e-10)) out.monotone = false;
  return out;
}

SphereProcessResult sphere_process_experiment(const std::vector<EnsembleSpec>& ensembles,
                                              const std::vector<std::size_t>& N_grid, std::size_t trials,
                                              std::uint64_t seed) {
  if (ensembles.empty() || N_grid.empty() || trials == 0)
    throw std::invalid_argument("sphere process needs ensembles, an N grid and trials");
  SphereProcessResult out;
  for (std::size_t e = 0; e < ensembles.size(); ++e) {
    const auto& spec = ensembles[e];
    const IndexClass K = IndexClass::sphere(spec.n);
    const double n = static_cast<double>(spec.n);
    SphereProcessSummary summary;
    summary.ensemble = spec.name();
    std::vector<double> r1, r2, r3;
    for (std::size_t N : N_grid) {
      std::vector<double> dev(trials);
      parallel_for(trials, [&](std::size_t t) {
        dev[t] = sup_deviation(sample(spec, N, derive_seed(seed, e, N, t)), K).value;
      });
      SphereProcessRow row;
      row.ensemble = summary.ensemble;
      row.n = spec.n;
      row.N = N;
      const double Nd = static_cast<double>(N);
      row.mean_deviation = std::accumulate(dev.begin(), dev.end(), 0.0) / static_cast<double>(trials);
      row.rate_sqrt = std::sqrt(n / Nd);
      row.rate_logratio = row.rate_sqrt * std::log(std::numbers::e * Nd / n);
      row.rate_logn = std::sqrt(n * std::log(n) / Nd);
      row.ratio_sqrt = row.mean_deviation / row.rate_sqrt;
      row.ratio_logratio = row.mean_deviation / row.rate_logratio;
      row.ratio_logn = row.rate_logn > 0.0 ? row.mean_deviation / row.rate_logn : 0.0;
      r1.push_back(row.ratio_sqrt);
      r2.push_back(row.ratio_logratio);
      r3.push_back(row.ratio_logn);
      out.rows.push_back(row);
    }
    auto band = [](const std::vector<double>& r) {
      const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
      return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    };
    summary.band_sqrt = band(r1);
    summary.band_logratio = band(r2);
    summary.band_logn = band(r3);
    summary.tracks = "sqrt(n/N)";
    double best = summary.band_sqrt;
    if (summary.band_logratio < best) {
      best = summary.band_logratio;
      summary.tracks = "sqrt(n/N)log(eN/n)";
    }
    if (summary.band_logn < best) summary.tracks = "sqrt(n log n/N)";
    out.summaries.push_back(summary);
  }
  return out;
}

}  // namespace psichain
