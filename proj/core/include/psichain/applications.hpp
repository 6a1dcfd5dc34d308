#pragma once

#include "psichain/ensembles.hpp"
#include "psichain/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace psichain {

// Gamma = sum_i <X_i, .> e_i, optionally divided by sqrt(n).
struct RandomOperator {
  Matrix gamma;
  bool scaled = false;

  static RandomOperator from_sample(const SampleMatrix& X, bool scaled = false);
};

// EuclideanBall: B_2^n. L1Ball: B_1^n. Ellipsoid: {x : x^T S x <= 1}.
// FinitePoints: the rows of `points`. Every body is multiplied by `scale`.
struct BodySpec {
  enum class Kind { EuclideanBall, L1Ball, Ellipsoid, FinitePoints };
  Kind kind = Kind::EuclideanBall;
  std::size_t n = 1;
  Matrix shape;
  Matrix points;
  double scale = 1.0;

  static BodySpec euclidean_ball(std::size_t n);
  static BodySpec l1_ball(std::size_t n);
  static BodySpec ellipsoid(const Matrix& shape);
  static BodySpec finite_points(const Matrix& points);
  BodySpec scaled(double factor) const;

  void validate() const;
  std::string name() const;
  // Euclidean diameter.
  double diameter() const;
};

// p = infinity is encoded as std::numeric_limits<double>::infinity().
struct OperatorNorm {
  double value = 0.0;
  std::string method;  // "exact-spectral", "exact-vertices", "exact-points", "exact-rows", "sampled-lower"
};

// sup_{x in K} ||Gamma x||_p for p in {2, 3, 4, inf}. Combinations without
// an exact method return a lower bound from `samples` boundary points.
OperatorNorm operator_norm(const Matrix& gamma, const BodySpec& K, double p, std::size_t samples = 10000,
                           std::uint64_t seed = 0);

struct ShrinkingRow {
  std::size_t k = 0;
  double mean_diameter = 0.0;  // E diam(AK)
  double ratio_mean = 0.0;     // mean of diam(AK) / (sqrt(k/n) diam K)
  double ratio_median = 0.0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
};

struct ShrinkingResult {
  std::vector<ShrinkingRow> rows;
  double k_prime = 0.0;     // gamma2 proxy / diam(K)
  double k_prime_sq = 0.0;  // (gamma2 proxy / diam(K))^2, where the two terms balance
  std::size_t plateau_k = 0;  // first k whose ratio stays within 1.5x of the final ratio
};

// diam(AK) with A = Gamma / sqrt(n) built from k rows. Trial t draws from
// derive_seed(seed, t); the width proxy uses derive_seed(seed, 1 << 20).
ShrinkingResult shrinking_experiment(const EnsembleSpec& spec, const BodySpec& K, const std::vector<std::size_t>& k_grid,
                                     std::size_t trials, std::uint64_t seed);
double image_diameter(const Matrix& A, const BodySpec& K);

struct KernelSection {
  Matrix basis;  // n x (n - rank), orthonormal columns
  double diameter = 0.0;
};
// diam(K cap ker Gamma) = 2 / sqrt(lambda_min(V^T S V)) for an ellipsoid.
KernelSection kernel_diameter(const Matrix& gamma, const BodySpec& K);

// Monte Carlo width of K cap r B_2 for an ellipsoid, using the common draws g.
double ellipsoid_ball_width(const Vector& axes_inv2, double r, const Matrix& g);

struct LowMStarRow {
  std::size_t N = 0;
  std::vector<double> diameters;  // per trial
  double mean_diameter = 0.0;
  double r_star = 0.0;       // width proxy
  double r_star_psi2 = 0.0;  // Q2 * width proxy
};

struct LowMStarResult {
  std::vector<LowMStarRow> rows;
  bool monotone = true;  // diameters non-increasing in N on every trial
};

// Trial t draws max(N grid) rows from derive_seed(seed, t) and uses the
// leading N rows for each grid value.
LowMStarResult low_mstar_experiment(const EnsembleSpec& spec, const BodySpec& K, const std::vector<std::size_t>& N_grid,
                                    std::size_t trials, std::uint64_t seed, std::size_t width_draws = 2000);
// inf{r > 0 : w(K cap r B_2) * q / sqrt(N) <= r}
double r_star(const BodySpec& K, std::size_t N, double q, std::size_t width_draws, std::uint64_t seed);

struct SphereProcessRow {
  std::string ensemble;
  std::size_t n = 0;
  std::size_t N = 0;
  double mean_deviation = 0.0;
  double rate_sqrt = 0.0;  // sqrt(n/N)
  double rate_logratio = 0.0;  // sqrt(n/N) log(eN/n)
  double rate_logn = 0.0;  // sqrt(n log n / N)
  double ratio_sqrt = 0.0;
  double ratio_logratio = 0.0;
  double ratio_logn = 0.0;
};

struct SphereProcessSummary {
  std::string ensemble;
  double band_sqrt = 0.0;  // max ratio / min ratio across N
  double band_logratio = 0.0;
  double band_logn = 0.0;
  std::string tracks;  // rate with the narrowest band
};

struct SphereProcessResult {
  std::vector<SphereProcessRow> rows;
  std::vector<SphereProcessSummary> summaries;
};

SphereProcessResult sphere_process_experiment(const std::vector<EnsembleSpec>& ensembles,
                                              const std::vector<std::size_t>& N_grid, std::size_t trials,
                                              std::uint64_t seed);

}  // namespace psichain
