#pragma once

#include "psichain/complexity.hpp"
#include "psichain/ensembles.hpp"
#include "psichain/types.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace psichain {

struct Deviation {
  double value = 0.0;
  std::string method;  // "spectral" or "exact-list"
};

// sup_f |N^{-1} sum f^2(X_i) - E f^2| for linear functionals. Requires an
// isotropic ensemble unless `second_moment` (E X X^T) is given.
Deviation sup_deviation(const Matrix& X, const IndexClass& K, const Matrix* second_moment = nullptr);
Deviation sup_deviation(const SampleMatrix& X, const IndexClass& K, const Matrix* second_moment = nullptr);

struct BoundValue {
  double term1 = 0.0;
  double term2 = 0.0;
  double lambda = 0.0;  // log form only
  double value = 0.0;
};

// max{d gamma2 / sqrt(N), gamma2^2 / N}
BoundValue bound_theorem_A(double d_psi1, double gamma2, std::size_t N);
// t^2 max{lambda gamma2 / sqrt(N), gamma2^2 / N}, lambda = d max{log(d sqrt(N) / gamma2), 1}
BoundValue bound_corollary(double d_psi1, double gamma2, std::size_t N, double t);
// max{d_psi2 gamma2 / sqrt(N), gamma2^2 / N}
BoundValue bound_psi2(double d_psi2, double gamma2, std::size_t N);

enum class SymmetrizationMode { Linear, Squared };

struct SymmetrizationRow {
  double t = 0.0;
  bool valid = false;  // t >= sqrt(2) alpha sqrt(N)
  double lhs = 0.0;    // Pr(sup |sum (h(X_i) - E h)| > t)
  double rhs = 0.0;    // Pr(sup |sum eps_i h(X_i)| > t/4)
  double standard_error = 0.0;
  bool holds = true;  // lhs <= 4 rhs + 3 se, or not valid
};

struct SymmetrizationTable {
  double alpha = 0.0;  // sup_h sd(h)
  double threshold = 0.0;
  std::vector<SymmetrizationRow> rows;
  bool holds = true;
};

struct SymmetrizationOptions {
  SymmetrizationMode mode = SymmetrizationMode::Linear;
  std::size_t variance_samples = 100000;  // squared mode, non-gaussian ensembles
};

// h ranges over <x, .> (or <x, .>^2) for the members x of a vector-list class.
SymmetrizationTable symmetrization_check(const IndexClass& K, const EnsembleSpec& spec, std::size_t N,
                                         const std::vector<double>& t_grid, std::size_t trials, std::uint64_t seed,
                                         const SymmetrizationOptions& opt = {});

struct DeviationRecord {
  std::string ensemble;
  std::string class_name;
  std::size_t n = 0;
  std::size_t N = 0;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  double empirical = 0.0;  // mean sup-deviation over trials
  double empirical_stderr = 0.0;
  std::string method;
  double bound_A = 0.0;
  double bound_psi2 = 0.0;
  double bound_cor = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double width = 0.0;         // gamma2 proxy for the psi_1 bounds
  double gamma2_proxy = 0.0;  // Q2 * width, used by bound_psi2
  double ratio_A = 0.0;
  double ratio_psi2 = 0.0;
  double ratio_cor = 0.0;
};

struct ScalingCell {
  EnsembleSpec spec;
  IndexClass K;
  std::size_t N = 0;
};

inline constexpr double kLogFormT = 1.0;

// Trial samples use derive_seed(seed, 0, trial); complexity uses derive_seed(seed, 1).
DeviationRecord deviation_cell(const ScalingCell& cell, std::size_t trials, std::uint64_t seed,
                               const ComplexityOptions& copt = {});

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingResult {
  std::vector<DeviationRecord> records;
  // Filled when every cell shares n (vs N) or shares N/n (vs n).
  std::optional<LogLogFit> empirical_vs_N;
  std::optional<LogLogFit> empirical_vs_n;
  std::optional<LogLogFit> d2_vs_n;
  std::optional<LogLogFit> ratio_A_vs_n;
  std::optional<LogLogFit> ratio_psi2_vs_n;
};

// Cell k uses derive_seed(seed, k). Throws BudgetExceeded past the deadline.
ScalingResult scaling_study(const std::vector<ScalingCell>& cells, std::size_t trials, std::uint64_t seed,
                            const ComplexityOptions& copt = {},
                            std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt);
void fill_fits(ScalingResult& result);

}  // namespace psichain
