#pragma once

#include "psichain/complexity.hpp"
#include "psichain/ensembles.hpp"
#include "psichain/orlicz.hpp"
#include "psichain/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace psichain {

enum class DmMethod { ExactTopM, ExactSvdEnum, GreedyLower };
std::string to_string(DmMethod m);

struct DmResult {
  double value = 0.0;
  DmMethod method = DmMethod::ExactTopM;
  std::vector<std::size_t> support;  // maximizing rows (sphere)
  Vector direction;                  // maximizing unit direction (sphere)
};

struct DmOptions {
  double exact_cap = 1e5;  // enumerate supports when C(N, m) <= exact_cap
  int restarts = 8;
  std::uint64_t seed = 0;
  const Vector* warm_start = nullptr;
};

DmResult empirical_Dm(const Matrix& X, const IndexClass& K, std::size_t m, const DmOptions& opt = {});
DmResult empirical_Dm(const SampleMatrix& X, const IndexClass& K, std::size_t m, const DmOptions& opt = {});

// 1, 2, 4, ... up to N, with N appended when it is not a power of two.
std::vector<std::size_t> dyadic_grid(std::size_t N);

struct BoundTerms {
  double term_gamma2 = 0.0;
  double term_tail = 0.0;
  double max() const { return term_gamma2 > term_tail ? term_gamma2 : term_tail; }
  double sum() const { return term_gamma2 + term_tail; }
};
// u * gamma2 and u * d * sqrt(m) * log^{1/alpha}(eN/m).
BoundTerms theoretical_Dm_bound(double gamma2, double d_psi, const OrliczIndex& a, std::size_t m, std::size_t N,
                                double u);
BoundTerms theoretical_Dm_bound(const ComplexityEstimate& est, const OrliczIndex& a, std::size_t m, std::size_t N,
                                double u);

struct DiameterRow {
  std::size_t m = 0;
  double empirical = 0.0;
  DmMethod method = DmMethod::ExactTopM;
  BoundTerms bound;
  double ratio = 0.0;  // empirical / bound.sum()
};
struct DiameterProfile {
  std::vector<DiameterRow> rows;
};
// Warm-starts each m from the previous maximizer so the profile is monotone.
DiameterProfile diameter_profile(const SampleMatrix& X, const IndexClass& K, const std::vector<std::size_t>& grid,
                                 const ComplexityEstimate& est, const OrliczIndex& a, double u,
                                 const DmOptions& opt = {});

struct LpResult {
  double empirical = 0.0;
  double bound = 0.0;
  bool large_regime = false;
  std::size_t m0 = 0;
};
// Smallest m with gamma2 <= d sqrt(m) log^{1/alpha}(eN/m); N+1 when none.
std::size_t crossover_m0(double gamma2, double d_psi, const OrliczIndex& a, std::size_t N);
double lp_bound(double gamma2, double d_psi, const OrliczIndex& a, std::size_t k, double p, std::size_t N);
LpResult lp_diameter(const SampleMatrix& X, const IndexClass& K, std::size_t k, double p,
                     const ComplexityEstimate& est, const OrliczIndex& a);

struct LowerRow {
  std::size_t m = 0;
  double lhs = 0.0;
  double lhs_stderr = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};
struct LowerCheck {
  std::vector<LowerRow> rows;
  double width = 0.0;
  double c = 0.0;  // min ratio over the grid
};
LowerCheck gaussian_lower_check(const EnsembleSpec& spec, const IndexClass& K, std::size_t N,
                                const std::vector<std::size_t>& m_grid, std::size_t trials, std::uint64_t seed);

struct OptimalityResult {
  std::vector<double> sup;  // per trial max_j |sum_i Y_ij| / sqrt(log(j+1))
  std::vector<double> R;    // sup / (width * sqrt(N))
  double width = 0.0;
  double mean_sup = 0.0;
  double median_R = 0.0;
  double frequency = 0.0;  // fraction of trials with R >= R_target
  double R_target = 2.0;
};
OptimalityResult optimality_experiment(std::size_t n, std::size_t N, double alpha, std::size_t trials,
                                       std::uint64_t seed, double R_target = 2.0, std::size_t width_trials = 200);

double paley_zygmund(double norm_p, double norm_q, double p, double q, double lambda);

struct MomentRow {
  int p = 0;
  double empirical = 0.0;
  double formula = 0.0;
  double ratio = 0.0;
};
// sum_i x_i Y_i with Y_i of density proportional to exp(-|t|^alpha).
std::vector<MomentRow> moment_equivalence_check(const std::vector<double>& x, double alpha, const std::vector<int>& ps,
                                                std::size_t trials, std::uint64_t seed);
double moment_formula(const std::vector<double>& x, double alpha, double p);

}  // namespace psichain
