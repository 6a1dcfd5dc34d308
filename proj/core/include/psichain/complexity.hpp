#pragma once

#include "psichain/ensembles.hpp"
#include "psichain/orlicz.hpp"
#include "psichain/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace psichain {

// Linear functionals f_x = <x, .> indexed by a set of x in R^n.
struct IndexClass {
  enum class Kind { FiniteVectors, Sphere, L1Vertices, WeightedBasis };
  Kind kind = Kind::Sphere;
  std::size_t n = 1;
  Matrix vectors;               // FiniteVectors: one member per row
  std::vector<double> weights;  // WeightedBasis: member j is weights[j] * e_j

  static IndexClass finite(Matrix rows);
  static IndexClass sphere(std::size_t n);
  static IndexClass l1_vertices(std::size_t n);
  static IndexClass weighted_basis(std::vector<double> weights);
  // weights 1/sqrt(log(j+1)), j = 1..n
  static IndexClass log_weighted_basis(std::size_t n);

  std::string name() const;
  bool is_vector_list() const { return kind != Kind::Sphere; }
  std::size_t size() const;  // number of members; 0 for the sphere
  // N x size() matrix of f(X_i), vector-list classes only.
  Matrix evaluate(const Matrix& X) const;
  // Member k as a dense vector, vector-list classes only.
  Vector member(std::size_t k) const;
  // Squared Euclidean norm of each member.
  std::vector<double> member_norms2() const;
  double sup_l2() const;
  // sup over members of <g, x>; `symmetric` takes the sup over K and -K.
  // The sphere, L1 vertices and weighted basis are already symmetric.
  double support(std::span<const double> g, bool symmetric = false) const;
};

struct WidthEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Monte Carlo E sup_{x in K} <g, x>; trial t uses Rng(derive_seed(seed, t)).
WidthEstimate gaussian_width(const IndexClass& K, std::size_t trials, std::uint64_t seed, bool symmetric = false);

using Metric = std::function<double(std::span<const double>, std::span<const double>)>;
double l2_distance(std::span<const double> a, std::span<const double> b);
// (sum_j ((x-y)^2)^*_j w_j^2)^{1/2} for non-increasing weights w.
Metric rearranged_weighted_metric(std::vector<double> weights);

// Farthest-first traversal from index 0, ties to the lowest index.
// radius[k] = max_i d(x_i, {first k+1 centers}).
struct Traversal {
  std::vector<std::size_t> order;
  std::vector<double> radius;
};
Traversal farthest_first(const Matrix& points, const Metric& d, std::size_t max_centers = 0);

// Greedy cover size at scale eps.
std::size_t covering_number(const Matrix& points, double eps, const Metric& d = l2_distance);

struct DudleyResult {
  double value = 0.0;
  std::vector<double> scales;
  std::vector<double> log_covering;
};
inline constexpr int kDudleyLevels = 12;
// sum_{k=1}^{levels} (D/2^k) sqrt(log N(D/2^k)).
DudleyResult dudley_upper(const std::function<double(double)>& log_covering, double diameter,
                          int levels = kDudleyLevels);
DudleyResult dudley_upper(const Matrix& points, const Metric& d = l2_distance, int levels = kDudleyLevels);

inline constexpr std::size_t kFiniteGamma2Cap = 2048;
// sup_t sum_s 2^{s/2} d(t, T_s) with T_s the first 2^{2^s} traversal centers (T_0 one point).
double finite_gamma2(const Matrix& points, const Metric& d = l2_distance);

struct UnconditionalResult {
  double value = 0.0;
  double ratio = 0.0;  // value / sqrt(n)
  double diameter = 0.0;
};
// Entropy integral for the sphere under the rearranged weighted metric.
// Empty weights mean w_j = log(en/j).
UnconditionalResult unconditional_psi2_gamma2(std::size_t n, std::vector<double> weights = {});

enum class MetricTag { L2, Psi2Proxy };

struct ComplexityEstimate {
  double gamma2_upper = 0.0;        // Q_2 * width (psi_2 metric)
  double gamma2_lower_proxy = 0.0;  // width of K u -K
  double d_psi_alpha = 0.0;
  double d_L2 = 0.0;
  double Q_alpha = 0.0;
  double Q2 = 0.0;
  double width_stderr = 0.0;
  MetricTag metric = MetricTag::Psi2Proxy;
  bool flagged = false;  // upper < lower proxy
};

struct ComplexityOptions {
  std::size_t width_trials = 2000;
  std::size_t directions = 20;
  std::size_t samples = 20000;
  std::uint64_t seed = 0;
};

ComplexityEstimate estimate_complexity(const EnsembleSpec& spec, const IndexClass& K, const OrliczIndex& a,
                                       const ComplexityOptions& opt);

}  // namespace psichain
