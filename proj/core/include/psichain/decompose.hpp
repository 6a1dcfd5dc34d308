#pragma once

#include "psichain/complexity.hpp"
#include "psichain/ensembles.hpp"
#include "psichain/orlicz.hpp"
#include "psichain/types.hpp"

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace psichain {

// Calibrated constants for the peeling refinement |E_beta| <= A^2/beta^2,
// applied when beta >= c1 B max{log^{1/alpha}(c2 N B^2/A^2), 1}.
inline constexpr double kPeelC1 = 4.0;
inline constexpr double kPeelC2 = std::numbers::e * std::numbers::e;
// Largest accepted peaky mass / A.
inline constexpr double kPeelMassConstant = 5.0;

struct PremiseCheck {
  bool holds = true;
  std::size_t worst_k = 0;   // prefix length with the largest ratio
  double worst_ratio = 0.0;  // |top-k mass| / (A + B sqrt(k) log^{1/alpha}(eN/k))
};

// (sum_{i in I} v_i^2)^{1/2} <= A + B sqrt|I| log^{1/alpha}(eN/|I|) for every I,
// checked on the top-k prefixes of the rearrangement.
PremiseCheck peeling_premise(const EmpiricalVector& v, double A, double B, const OrliczIndex& a);

struct Peeling {
  double A = 0.0;
  double B = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  std::vector<std::size_t> E;  // {i : |v_i| >= beta}, increasing
  double peaky_mass = 0.0;
  double cardinality_bound = 0.0;  // max{4A^2/beta^2, eN exp(-(beta/2B)^alpha)}
  bool cardinality_holds = false;
  double c3 = 0.0;  // peaky_mass / A
  bool mass_holds = false;
  double refinement_threshold = 0.0;
  bool refinement_applicable = false;
  bool refinement_holds = true;  // vacuous when not applicable
};

// Throws std::domain_error when the premise fails.
Peeling peel(const EmpiricalVector& v, double A, double B, const OrliczIndex& a, double beta);

inline constexpr double kCalibratedT = 2.0;

struct FunctionDecomposition {
  std::string label;
  Vector values;   // f(X_i)
  Vector regular;  // sgn(f) min{|f|, beta}
  Vector peaky;    // f - regular
  std::size_t peaky_support = 0;
  double peaky_l2 = 0.0;
  double peaky_second_moment = 0.0;  // E |psi(f)|^2 on fresh draws
  double regular_psi = 0.0;          // ||regular||_{psi_alpha^N}
  double regular_linf = 0.0;
};

struct ClassDecomposition {
  double lambda = 0.0;
  double t = 1.0;
  double beta = 0.0;
  double gamma2 = 0.0;
  double d_psi = 0.0;
  std::size_t N = 0;
  std::vector<FunctionDecomposition> parts;
  // Achieved multipliers; each is a max over representatives.
  double support_mult = 0.0;        // support / (gamma2^2 / lambda^2)
  double peaky_l2_mult = 0.0;       // ||psi||_2 / gamma2
  double second_moment_mult = 0.0;  // E|psi|^2 / (gamma2^2 / N)
  double regular_psi_mult = 0.0;    // ||phi||_{psi_alpha^N} / d
  double regular_linf_ratio = 0.0;  // ||phi||_inf / (lambda t)
  bool linf_holds = true;
  bool algebra_holds = true;
  // support <= gamma2^2/lambda^2, ||psi||_2 <= t gamma2, ||phi||_psi <= t d, ||phi||_inf <= lambda t
  bool containment = true;
};

struct DecomposeOptions {
  std::size_t fresh_samples = 100000;
  std::size_t random_directions = 16;
  std::size_t extreme_rows = 8;
  bool keep_vectors = true;
  std::uint64_t seed = 0;
};

// lambda = d max{log^{1/alpha}(d^2 N / gamma2^2), 1}; d when gamma2 is infinite.
double truncation_level(double d_psi, double gamma2, std::size_t N, const OrliczIndex& a);

// Sphere classes use representative directions: the eigenvectors of X^T X,
// the directions of the largest rows and random unit directions.
ClassDecomposition decompose_class(const SampleMatrix& X, const IndexClass& K, const ComplexityEstimate& est,
                                   const OrliczIndex& a, double t, const DecomposeOptions& opt = {});

struct RudelsonComparison {
  double R_N = 0.0;
  double R_N_stderr = 0.0;
  double d_L2 = 0.0;
  double l1_budget = 0.0;  // sqrt(N) R_N
  double l2_budget = 0.0;  // sqrt(N) d_L2
  double lambda = 0.0;
  double gamma2 = 0.0;
  // Largest single coordinate each containment allows.
  double rudelson_spike = 0.0;  // l1_budget + l2_budget
  double truncation_spike = 0.0;  // t (gamma2 + lambda)
  std::string tighter;  // "truncation", "rudelson", "tie" or "n/a"
};

// R_N = N^{-1/2} E sup_f |sum eps_i f(X_i)|. Without `est` only the
// Rademacher side is filled.
RudelsonComparison rudelson_compare(const SampleMatrix& X, const IndexClass& K, std::size_t rademacher_trials,
                                    std::uint64_t seed, const ComplexityEstimate* est = nullptr,
                                    const OrliczIndex& a = OrliczIndex(1.0), double t = 1.0);

}  // namespace psichain
