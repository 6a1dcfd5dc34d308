#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace psichain {

class OrliczIndex {
 public:
  explicit OrliczIndex(double alpha);
  double alpha() const { return alpha_; }
  // +inf when alpha == 1.
  double conjugate() const;

 private:
  double alpha_;
};

// Values (f(X_1), ..., f(X_N)); finite, nonempty.
class EmpiricalVector {
 public:
  explicit EmpiricalVector(std::vector<double> values);
  EmpiricalVector(std::span<const double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

// Luxemburg norm on {1..N} with uniform weights.
double empirical_psi_norm(const EmpiricalVector& x, const OrliczIndex& a);

// Symmetric laws with a known psi_alpha norm. ExpPower(shape) with scale s is
// s*Y where Y has density proportional to exp(-|t|^shape).
struct AnalyticLaw {
  enum class Kind { Gaussian, Laplace, ExpPower, Rademacher, L1BallCoordinate };
  Kind kind = Kind::Gaussian;
  double scale = 1.0;
  double shape = 2.0;
  std::size_t dim = 1;

  static AnalyticLaw gaussian(double sigma);
  static AnalyticLaw laplace(double b);
  static AnalyticLaw exp_power(double shape, double scale);
  static AnalyticLaw rademacher(double scale);
  // scale * (first coordinate of a uniform point of the l1 ball in R^dim).
  static AnalyticLaw l1_ball_coordinate(std::size_t dim, double scale);
};

// Exact norm; +inf when E exp(|X/C|^alpha) diverges for every C.
double dist_psi_norm(const AnalyticLaw& law, const OrliczIndex& a);

// kappa * max over even p <= p_max of ||x||_p / p^{1/alpha}.
inline constexpr double kMomentCalibration = 2.3094010767585030;  // 4/sqrt(3)
double dist_psi_norm(const EmpiricalVector& sample, const OrliczIndex& a, int p_max);
// Largest admissible even p_max for a sample of size N (p <= log N).
int max_reliable_moment(std::size_t N);

EmpiricalVector rearrange(const EmpiricalVector& x);

// (P_I u)^*_i <= v^*_i for i = 1..|I|.
bool dominates(const EmpiricalVector& u, const EmpiricalVector& v, std::span<const std::size_t> I);

// max_i x^*_i / (||x||_{psi_alpha^N} log^{1/alpha}(eN/i)).
double envelope_constant(const EmpiricalVector& x, const OrliczIndex& a);

}  // namespace psichain
