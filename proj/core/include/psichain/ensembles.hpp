#pragma once

#include "psichain/orlicz.hpp"
#include "psichain/types.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

namespace psichain {

enum class EnsembleKind { Gaussian, Rademacher, ExpPower, IsotropicL1Ball, UserMatrix };

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::Gaussian;
  std::size_t n = 1;
  double alpha = 1.0;  // ExpPower only
  bool normalize_isotropic = true;
  // UserMatrix only: rows drawn uniformly with a random sign. Whitened at
  // construction when normalize_isotropic is set.
  std::shared_ptr<const Matrix> pool;

  static EnsembleSpec gaussian(std::size_t n, bool normalize = true);
  static EnsembleSpec rademacher(std::size_t n, bool normalize = true);
  static EnsembleSpec exp_power(std::size_t n, double alpha, bool normalize = true);
  static EnsembleSpec l1_ball(std::size_t n, bool normalize = true);
  static EnsembleSpec user(const Matrix& rows, bool normalize = true);

  void validate() const;
  std::string name() const;
  // True when E<theta, X>^2 = |theta|^2 holds exactly.
  bool isotropic() const;
};

struct SampleMatrix {
  EnsembleSpec spec;
  std::uint64_t seed = 0;
  Matrix rows;

  std::size_t N() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t n() const { return static_cast<std::size_t>(rows.cols()); }
  // Row i is generated from Rng(row_seed(seed, i)).
  static std::uint64_t row_seed(std::uint64_t master, std::size_t i);
};

class Rng;
void draw_row(const EnsembleSpec& spec, Rng& rng, double* out);
// Unnormalized draw with density proportional to exp(-|t|^alpha).
double exp_power_variate(Rng& rng, double alpha);

SampleMatrix sample(const EnsembleSpec& spec, std::size_t N, std::uint64_t seed);

// Exact psi_alpha norm of the coordinate marginals (max over coordinates).
double coordinate_psi_norm(const EnsembleSpec& spec, const OrliczIndex& a);

struct QEstimate {
  double value = 0.0;
  double coordinate = 0.0;
  double random_directions = 0.0;
};

// max over coordinate directions (exact marginals) and `directions` random
// unit directions (moment estimator on `samples` fresh draws).
QEstimate estimate_Q(const EnsembleSpec& spec, const OrliczIndex& a, std::size_t directions, std::size_t samples,
                     std::uint64_t seed);

// 32-byte header: magic "PSIMAT01", N, n, seed (u64 LE), then N*n f64 LE row-major.
struct StoredMatrix {
  Matrix rows;
  std::uint64_t seed = 0;
};
void save_matrix(const std::filesystem::path& path, const Matrix& rows, std::uint64_t seed);
StoredMatrix load_matrix(const std::filesystem::path& path);

}  // namespace psichain
