#include "psichain/nets.hpp"

#include "psichain/diameters.hpp"
#include "psichain/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace psichain {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double t : x) s += t * t;
  return std::sqrt(s);
}

void lattice_points(std::size_t dim, double h, double radius, std::vector<std::int64_t>& k, std::size_t j,
                    double used2, std::vector<std::vector<double>>& out) {
  if (j == dim) {
    std::vector<double> p(dim);
    for (std::size_t i = 0; i < dim; ++i) p[i] = h * static_cast<double>(k[i]);
    const double r = norm2(p);
    if (r > 1.0)
      for (auto& t : p) t /= r;
    out.push_back(std::move(p));
    return;
  }
  const double rem = radius * radius - used2;
  if (rem < 0.0) return;
  const auto K = static_cast<std::int64_t>(std::floor(std::sqrt(rem) / h));
  for (std::int64_t q = -K; q <= K; ++q) {
    k[j] = q;
    const double c = h * static_cast<double>(q);
    lattice_points(dim, h, radius, k, j + 1, used2 + c * c, out);
  }
}

double box_half_width(std::size_t ell) { return 1.0 / std::sqrt(static_cast<double>(ell)); }

double box_value(std::int64_t k, double h, double a) { return std::clamp(h * static_cast<double>(k), -a, a); }

std::int64_t box_extent(std::size_t ell, double eps) {
  const double a = box_half_width(ell), h = eps / std::sqrt(static_cast<double>(ell));
  return static_cast<std::int64_t>(std::ceil(a / h - 1e-9));
}

double log_ordered_supports(const BlockNetParams& p) {
  double s = std::lgamma(static_cast<double>(p.N) + 1.0) - std::lgamma(static_cast<double>(p.N - p.m) + 1.0);
  for (std::size_t ell : p.block_sizes()) s -= std::lgamma(static_cast<double>(ell) + 1.0);
  return s;
}

}  // namespace

BallCover cover_ball(std::size_t dim, double eps) {
  if (dim == 0 || dim > kMaxCoverDim) throw std::invalid_argument("cover_ball dimension must lie in [1, 24]");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("cover_ball tolerance must lie in (0, 1]");
  BallCover c;
  c.dim = dim;
  c.eps = eps;
  c.spacing = eps / std::sqrt(static_cast<double>(dim));
  const double d = static_cast<double>(dim);
  const double log_volume = (d / 2) * std::log(std::numbers::pi) - std::lgamma(d / 2 + 1) + d * std::log(1 + eps);
  if (log_volume - d * std::log(c.spacing) > std::log(kMaxCoverPoints))
    throw BudgetExceeded("cover_ball cardinality exceeds the desk cap");
  std::vector<std::vector<double>> pts;
  std::vector<std::int64_t> k(dim);
  lattice_points(dim, c.spacing, 1.0 + eps, k, 0, 0.0, pts);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  c.points.resize(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < dim; ++j) c.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pts[i][j];
  return c;
}

std::vector<double> snap_to_ball_cover(std::span<const double> y, double eps, std::vector<std::int64_t>* index) {
  const double h = eps / std::sqrt(static_cast<double>(y.size()));
  std::vector<double> z(y.size());
  if (index) index->resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto k = std::llround(y[i] / h);
    if (index) (*index)[i] = k;
    z[i] = h * static_cast<double>(k);
  }
  const double r = norm2(z);
  if (r > 1.0)
    for (auto& t : z) t /= r;
  return z;
}

std::vector<double> box_cover_values(std::size_t ell, double eps) {
  const double a = box_half_width(ell), h = eps / std::sqrt(static_cast<double>(ell));
  const auto K = box_extent(ell, eps);
  std::vector<double> v;
  for (std::int64_t k = -K; k <= K; ++k) v.push_back(box_value(k, h, a));
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<double> snap_to_box_cover(std::span<const double> y, double eps, std::vector<std::int64_t>* index) {
  const std::size_t ell = y.size();
  const double a = box_half_width(ell), h = eps / std::sqrt(static_cast<double>(ell));
  const auto K = box_extent(ell, eps);
  std::vector<double> z(ell);
  if (index) index->resize(ell);
  for (std::size_t i = 0; i < ell; ++i) {
    const auto k = std::clamp<std::int64_t>(std::llround(y[i] / h), -K, K);
    if (index) (*index)[i] = k;
    z[i] = box_value(k, h, a);
  }
  return z;
}

void BlockNetParams::validate() const {
  if (m < 2 || (m & (m - 1)) != 0) throw std::invalid_argument("block budget m must be a power of two >= 2");
  if (2 * m > N) throw std::invalid_argument("block budget m must satisfy m <= N/2");
}

std::size_t BlockNetParams::levels() const {
  std::size_t r = 0;
  while ((std::size_t{1} << r) < m) ++r;
  return r;
}

std::vector<std::size_t> BlockNetParams::block_sizes() const {
  std::vector<std::size_t> s;
  for (std::size_t r = 0; r < levels(); ++r) s.push_back(r == 0 ? 2 : std::size_t{1} << r);
  return s;
}

bool satisfies_invariants(const BlockVector& z, const BlockNetParams& p) {
  const auto sizes = p.block_sizes();
  if (z.blocks.size() != sizes.size() || static_cast<std::size_t>(z.assembled.size()) != p.N) return false;
  std::vector<char> seen(p.N, 0);
  Vector rebuilt = Vector::Zero(static_cast<Eigen::Index>(p.N));
  std::size_t support = 0;
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    const auto& b = z.blocks[r];
    if (b.indices.size() != sizes[r] || b.values.size() != sizes[r]) return false;
    double sq = 0.0, top = 0.0;
    for (std::size_t k = 0; k < b.indices.size(); ++k) {
      const auto i = b.indices[k];
      if (i >= p.N || seen[i]) return false;
      seen[i] = 1;
      rebuilt(static_cast<Eigen::Index>(i)) = b.values[k];
      sq += b.values[k] * b.values[k];
      top = std::max(top, std::abs(b.values[k]));
      if (b.values[k] != 0.0) ++support;
    }
    if (r == 0 && sq > 1.0 + 1e-12) return false;
    if (r > 0 && top > box_half_width(sizes[r])) return false;
  }
  if (rebuilt != z.assembled) return false;
  if (support > p.m) return false;
  return z.assembled.norm() <= 1.0 + p.norm_slack();
}

Approximation approximate_in_block_net(std::span<const double> v, const BlockNetParams& p) {
  p.validate();
  if (v.size() != p.N) throw std::invalid_argument("vector length must equal N");
  if (norm2(v) > 1.0 + 1e-12) throw std::invalid_argument("vector must lie in the unit ball");
  if (std::count_if(v.begin(), v.end(), [](double t) { return t != 0.0; }) > static_cast<std::ptrdiff_t>(p.m))
    throw std::invalid_argument("vector support exceeds m");
  std::vector<std::size_t> sigma(p.N);
  std::iota(sigma.begin(), sigma.end(), std::size_t{0});
  std::stable_sort(sigma.begin(), sigma.end(), [&](std::size_t a, std::size_t b) { return std::abs(v[a]) > std::abs(v[b]); });
  Approximation out;
  out.point.assembled = Vector::Zero(static_cast<Eigen::Index>(p.N));
  std::size_t start = 0;
  const auto sizes = p.block_sizes();
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    Block b;
    std::vector<double> y;
    for (std::size_t k = 0; k < sizes[r]; ++k) {
      b.indices.push_back(sigma[start + k]);
      y.push_back(v[sigma[start + k]]);
    }
    const double eps = p.eps(sizes[r]);
    b.values = r == 0 ? snap_to_ball_cover(y, eps, &b.member) : snap_to_box_cover(y, eps, &b.member);
    for (std::size_t k = 0; k < sizes[r]; ++k) out.point.assembled(static_cast<Eigen::Index>(b.indices[k])) = b.values[k];
    out.point.blocks.push_back(std::move(b));
    start += sizes[r];
  }
  double err = 0.0;
  for (std::size_t i = 0; i < p.N; ++i) {
    const double d = v[i] - out.point.assembled(static_cast<Eigen::Index>(i));
    err += d * d;
  }
  out.error = std::sqrt(err);
  return out;
}

BlockNet::BlockNet(BlockNetParams p) : p_(p) {
  p_.validate();
  const auto sizes = p_.block_sizes();
  ball_ = cover_ball(2, p_.eps(2)).points;
  boxes_.resize(sizes.size());
  for (std::size_t r = 1; r < sizes.size(); ++r) boxes_[r] = box_cover_values(sizes[r], p_.eps(sizes[r]));
}

double BlockNet::log_cardinality() const {
  const auto sizes = p_.block_sizes();
  double s = log_ordered_supports(p_) + std::log(static_cast<double>(ball_.rows()));
  for (std::size_t r = 1; r < sizes.size(); ++r)
    s += static_cast<double>(sizes[r]) * std::log(static_cast<double>(boxes_[r].size()));
  return s;
}

std::size_t BlockNet::enumerate(const std::function<void(const BlockVector&)>& emit) const {
  if (p_.N > p_.enumerate_max_N || p_.m > p_.enumerate_max_m)
    throw BudgetExceeded("block net too large for full enumeration; use sample()");
  if (log_cardinality() > std::log(p_.enumerate_max_points))
    throw BudgetExceeded("block net cardinality exceeds the enumeration budget");
  const auto sizes = p_.block_sizes();
  const double limit = 1.0 + p_.norm_slack();
  std::size_t emitted = 0;
  BlockVector cur;
  cur.blocks.resize(sizes.size());
  cur.assembled = Vector::Zero(static_cast<Eigen::Index>(p_.N));
  std::vector<char> used(p_.N, 0);

  std::function<void(std::size_t, double)> level = [&](std::size_t r, double sq) {
    if (r == sizes.size()) {
      if (std::sqrt(sq) <= limit) {
        emit(cur);
        ++emitted;
      }
      return;
    }
    std::vector<std::size_t> avail;
    for (std::size_t i = 0; i < p_.N; ++i)
      if (!used[i]) avail.push_back(i);
    const std::size_t ell = sizes[r];
    std::vector<std::size_t> c(ell);
    std::iota(c.begin(), c.end(), std::size_t{0});
    Block& b = cur.blocks[r];
    b.indices.assign(ell, 0);
    b.values.assign(ell, 0.0);
    b.member.assign(ell, 0);
    for (;;) {
      for (std::size_t k = 0; k < ell; ++k) {
        b.indices[k] = avail[c[k]];
        used[b.indices[k]] = 1;
      }
      auto place = [&](double block_sq) {
        for (std::size_t k = 0; k < ell; ++k) cur.assembled(static_cast<Eigen::Index>(b.indices[k])) = b.values[k];
        level(r + 1, sq + block_sq);
      };
      if (r == 0) {
        const double h = p_.eps(2) / std::sqrt(2.0);
        for (Eigen::Index q = 0; q < ball_.rows(); ++q) {
          b.values[0] = ball_(q, 0);
          b.values[1] = ball_(q, 1);
          b.member[0] = std::llround(b.values[0] / h);
          b.member[1] = std::llround(b.values[1] / h);
          place(b.values[0] * b.values[0] + b.values[1] * b.values[1]);
        }
      } else {
        const auto& V = boxes_[r];
        const auto K = static_cast<std::int64_t>(V.size() / 2);
        std::vector<std::size_t> odo(ell, 0);
        for (;;) {
          double bs = 0.0;
          for (std::size_t k = 0; k < ell; ++k) {
            b.values[k] = V[odo[k]];
            b.member[k] = static_cast<std::int64_t>(odo[k]) - K;
            bs += b.values[k] * b.values[k];
          }
          place(bs);
          std::size_t k = 0;
          while (k < ell && ++odo[k] == V.size()) odo[k++] = 0;
          if (k == ell) break;
        }
      }
      for (std::size_t k = 0; k < ell; ++k) {
        used[b.indices[k]] = 0;
        cur.assembled(static_cast<Eigen::Index>(b.indices[k])) = 0.0;
      }
      // Next combination of avail indices.
      std::size_t k = ell;
      while (k > 0 && c[k - 1] == avail.size() - ell + k - 1) --k;
      if (k == 0) break;
      ++c[k - 1];
      for (std::size_t j = k; j < ell; ++j) c[j] = c[j - 1] + 1;
    }
  };
  level(0, 0.0);
  return emitted;
}

BlockVector BlockNet::sample(std::uint64_t seed) const {
  Rng rng(seed);
  const auto sizes = p_.block_sizes();
  const double limit = 1.0 + p_.norm_slack();
  const double h0 = p_.eps(2) / std::sqrt(2.0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<std::size_t> perm(p_.N);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i + 1 < p_.N; ++i) std::swap(perm[i], perm[i + rng.below(p_.N - i)]);
    BlockVector z;
    z.assembled = Vector::Zero(static_cast<Eigen::Index>(p_.N));
    std::size_t start = 0;
    for (std::size_t r = 0; r < sizes.size(); ++r) {
      Block b;
      b.indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(start),
                       perm.begin() + static_cast<std::ptrdiff_t>(start + sizes[r]));
      if (r == 0) {
        const auto q = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(ball_.rows())));
        b.values = {ball_(q, 0), ball_(q, 1)};
        b.member = {std::llround(b.values[0] / h0), std::llround(b.values[1] / h0)};
      } else {
        const auto& V = boxes_[r];
        for (std::size_t k = 0; k < sizes[r]; ++k) {
          const auto q = rng.below(V.size());
          b.values.push_back(V[q]);
          b.member.push_back(static_cast<std::int64_t>(q) - static_cast<std::int64_t>(V.size() / 2));
        }
      }
      for (std::size_t k = 0; k < sizes[r]; ++k) z.assembled(static_cast<Eigen::Index>(b.indices[k])) = b.values[k];
      z.blocks.push_back(std::move(b));
      start += sizes[r];
    }
    if (z.assembled.norm() <= limit) return z;
  }
  throw std::runtime_error("block net sampling failed to find a member");
}

LinearizationResult linearization_check(const SampleMatrix& X, const IndexClass& K, const BlockNetParams& p) {
  if (X.N() != p.N) throw std::invalid_argument("sample size must equal the block-net dimension N");
  BlockNet net(p);
  std::vector<Vector> members;
  net.enumerate([&](const BlockVector& z) { members.push_back(z.assembled); });
  Matrix Z(static_cast<Eigen::Index>(members.size()), static_cast<Eigen::Index>(p.N));
  for (std::size_t i = 0; i < members.size(); ++i) Z.row(static_cast<Eigen::Index>(i)) = members[i].transpose();
  LinearizationResult r;
  if (K.kind == IndexClass::Kind::Sphere) {
    const Matrix P = Z * X.rows;
    r.sup_Bm = P.rowwise().norm().maxCoeff();
  } else {
    const Matrix S = Z * K.evaluate(X.rows);
    r.sup_Bm = std::max(0.0, S.maxCoeff());
  }
  r.D_m = empirical_Dm(X, K, p.m).value;
  r.ratio = r.sup_Bm > 0.0 ? r.D_m / r.sup_Bm : 0.0;
  r.holds = r.D_m <= 2.0 * r.sup_Bm * (1.0 + 1e-12);
  return r;
}

}  // namespace psichain
