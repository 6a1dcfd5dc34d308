#include "psichain/ensembles.hpp"

#include "psichain/parallel.hpp"
#include "psichain/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace psichain {

namespace {

double exp_power_std(double alpha) {
  using boost::math::tgamma;
  return std::sqrt(tgamma(3.0 / alpha) / tgamma(1.0 / alpha));
}

double l1_ball_scale(std::size_t n) {
  const double m = static_cast<double>(n);
  return std::sqrt((m + 1.0) * (m + 2.0) / 2.0);
}

constexpr std::array<char, 8> kMagic = {'P', 'S', 'I', 'M', 'A', 'T', '0', '1'};

template <class T>
void put_le(std::ostream& os, T value) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw std::runtime_error("matrix file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace

EnsembleSpec EnsembleSpec::gaussian(std::size_t n, bool normalize) {
  EnsembleSpec s;
  s.kind = EnsembleKind::Gaussian;
  s.n = n;
  s.normalize_isotropic = normalize;
  s.validate();
  return s;
}

EnsembleSpec EnsembleSpec::rademacher(std::size_t n, bool normalize) {
  auto s = gaussian(n, normalize);
  s.kind = EnsembleKind::Rademacher;
  return s;
}

EnsembleSpec EnsembleSpec::exp_power(std::size_t n, double alpha, bool normalize) {
  EnsembleSpec s;
  s.kind = EnsembleKind::ExpPower;
  s.n = n;
  s.alpha = alpha;
  s.normalize_isotropic = normalize;
  s.validate();
  return s;
}

EnsembleSpec EnsembleSpec::l1_ball(std::size_t n, bool normalize) {
  auto s = gaussian(n, normalize);
  s.kind = EnsembleKind::IsotropicL1Ball;
  return s;
}

EnsembleSpec EnsembleSpec::user(const Matrix& rows, bool normalize) {
  if (rows.rows() == 0 || rows.cols() == 0) throw std::invalid_argument("user matrix must be nonempty");
  if (!rows.allFinite()) throw std::invalid_argument("user matrix has non-finite entries");
  EnsembleSpec s;
  s.kind = EnsembleKind::UserMatrix;
  s.n = static_cast<std::size_t>(rows.cols());
  s.normalize_isotropic = normalize;
  if (!normalize) {
    s.pool = std::make_shared<const Matrix>(rows);
    return s;
  }
  // Second moment of the sign-symmetrized pool; whiten by its inverse root.
  const Eigen::MatrixXd cov = (rows.transpose() * rows) / static_cast<double>(rows.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const auto& ev = eig.eigenvalues();
  if (ev.minCoeff() <= 1e-12 * std::max(1.0, ev.maxCoeff()))
    throw std::invalid_argument("user matrix second moment is singular; cannot normalize");
  const Eigen::MatrixXd W = eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  s.pool = std::make_shared<const Matrix>(rows * W);
  return s;
}

void EnsembleSpec::validate() const {
  if (n == 0) throw std::invalid_argument("ensemble dimension must be positive");
  if (kind == EnsembleKind::ExpPower && !(alpha >= 1.0 && alpha <= 2.0))
    throw std::invalid_argument("ExpPower alpha must lie in [1, 2]");
  if (kind == EnsembleKind::UserMatrix && (!pool || static_cast<std::size_t>(pool->cols()) != n))
    throw std::invalid_argument("user ensemble needs a pool with n columns");
}

std::string EnsembleSpec::name() const {
  switch (kind) {
    case EnsembleKind::Gaussian: return "gaussian";
    case EnsembleKind::Rademacher: return "rademacher";
    case EnsembleKind::ExpPower: {
      std::ostringstream os;
      os << "exppower(" << alpha << ")";
      return os.str();
    }
    case EnsembleKind::IsotropicL1Ball: return "l1ball";
    case EnsembleKind::UserMatrix: return "user";
  }
  return "unknown";
}

bool EnsembleSpec::isotropic() const {
  if (normalize_isotropic) return true;
  return kind == EnsembleKind::Gaussian || kind == EnsembleKind::Rademacher;
}

std::uint64_t SampleMatrix::row_seed(std::uint64_t master, std::size_t i) { return derive_seed(master, i); }

double exp_power_variate(Rng& rng, double alpha) {
  // |Y|^alpha ~ Gamma(1/alpha).
  if (alpha == 1.0) return rng.sign() * rng.exponential();
  const double shape = 1.0 / alpha;
  const double s = rng.sign();
  return s * std::pow(rng.gamma(shape), shape);
}

void draw_row(const EnsembleSpec& spec, Rng& rng, double* out) {
  const std::size_t n = spec.n;
  switch (spec.kind) {
    case EnsembleKind::Gaussian:
      for (std::size_t j = 0; j < n; ++j) out[j] = rng.normal();
      return;
    case EnsembleKind::Rademacher:
      for (std::size_t j = 0; j < n; ++j) out[j] = rng.sign();
      return;
    case EnsembleKind::ExpPower: {
      const double scale = spec.normalize_isotropic ? 1.0 / exp_power_std(spec.alpha) : 1.0;
      for (std::size_t j = 0; j < n; ++j) out[j] = scale * exp_power_variate(rng, spec.alpha);
      return;
    }
    case EnsembleKind::IsotropicL1Ball: {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += (out[j] = rng.exponential());
      total += rng.exponential();
      const double scale = (spec.normalize_isotropic ? l1_ball_scale(n) : 1.0) / total;
      for (std::size_t j = 0; j < n; ++j) out[j] *= scale * rng.sign();
      return;
    }
    case EnsembleKind::UserMatrix: {
      const auto& pool = *spec.pool;
      const auto r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(pool.rows())));
      const double s = rng.sign();
      for (std::size_t j = 0; j < n; ++j) out[j] = s * pool(r, static_cast<Eigen::Index>(j));
      return;
    }
  }
}

SampleMatrix sample(const EnsembleSpec& spec, std::size_t N, std::uint64_t seed) {
  spec.validate();
  if (N == 0) throw std::invalid_argument("sample size must be positive");
  SampleMatrix X;
  X.spec = spec;
  X.seed = seed;
  X.rows.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(spec.n));
  constexpr std::size_t kChunk = 256;
  parallel_for((N + kChunk - 1) / kChunk, [&](std::size_t c) {
    const std::size_t end = std::min(N, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      Rng rng(SampleMatrix::row_seed(seed, i));
      draw_row(spec, rng, X.rows.row(static_cast<Eigen::Index>(i)).data());
    }
  });
  return X;
}

double coordinate_psi_norm(const EnsembleSpec& spec, const OrliczIndex& a) {
  spec.validate();
  switch (spec.kind) {
    case EnsembleKind::Gaussian: return dist_psi_norm(AnalyticLaw::gaussian(1.0), a);
    case EnsembleKind::Rademacher: return dist_psi_norm(AnalyticLaw::rademacher(1.0), a);
    case EnsembleKind::ExpPower: {
      const double scale = spec.normalize_isotropic ? 1.0 / exp_power_std(spec.alpha) : 1.0;
      return dist_psi_norm(AnalyticLaw::exp_power(spec.alpha, scale), a);
    }
    case EnsembleKind::IsotropicL1Ball: {
      const double scale = spec.normalize_isotropic ? l1_ball_scale(spec.n) : 1.0;
      return dist_psi_norm(AnalyticLaw::l1_ball_coordinate(spec.n, scale), a);
    }
    case EnsembleKind::UserMatrix: {
      // The symmetrized pool is a uniform measure on its rows up to sign.
      const auto& pool = *spec.pool;
      double best = 0.0;
      for (Eigen::Index j = 0; j < pool.cols(); ++j) {
        std::vector<double> col(static_cast<std::size_t>(pool.rows()));
        for (Eigen::Index i = 0; i < pool.rows(); ++i) col[static_cast<std::size_t>(i)] = pool(i, j);
        best = std::max(best, empirical_psi_norm(EmpiricalVector(std::move(col)), a));
      }
      return best;
    }
  }
  return 0.0;
}

QEstimate estimate_Q(const EnsembleSpec& spec, const OrliczIndex& a, std::size_t directions, std::size_t samples,
                     std::uint64_t seed) {
  if (directions == 0) throw std::invalid_argument("estimate_Q needs at least one direction");
  QEstimate q;
  q.coordinate = coordinate_psi_norm(spec, a);
  const int p_max = max_reliable_moment(samples);
  const SampleMatrix X = sample(spec, samples, derive_seed(seed, 1));
  Rng rng(derive_seed(seed, 2));
  std::vector<double> proj(samples);
  for (std::size_t d = 0; d < directions; ++d) {
    Vector theta(static_cast<Eigen::Index>(spec.n));
    for (auto& t : theta) t = rng.normal();
    theta /= theta.norm();
    Eigen::Map<Vector>(proj.data(), static_cast<Eigen::Index>(samples)) = X.rows * theta;
    q.random_directions = std::max(q.random_directions, dist_psi_norm(EmpiricalVector(proj), a, p_max));
  }
  q.value = std::max(q.coordinate, q.random_directions);
  return q;
}

void save_matrix(const std::filesystem::path& path, const Matrix& rows, std::uint64_t seed) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(rows.rows()));
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(rows.cols()));
  put_le<std::uint64_t>(os, seed);
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index j = 0; j < rows.cols(); ++j) put_le<double>(os, rows(i, j));
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

StoredMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw std::runtime_error("bad matrix magic");
  const auto N = get_le<std::uint64_t>(is);
  const auto n = get_le<std::uint64_t>(is);
  StoredMatrix out;
  out.seed = get_le<std::uint64_t>(is);
  out.rows.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.rows.rows(); ++i)
    for (Eigen::Index j = 0; j < out.rows.cols(); ++j) out.rows(i, j) = get_le<double>(is);
  return out;
}

}  // namespace psichain
