#include "psichain/complexity.hpp"
#include "psichain/ensembles.hpp"
#include "psichain/nets.hpp"
#include "psichain/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace psichain;

namespace {

double min_distance(const Matrix& P, const std::vector<double>& y) {
  double best = 1e300;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j) s += (P(i, j) - y[static_cast<std::size_t>(j)]) * (P(i, j) - y[static_cast<std::size_t>(j)]);
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

std::vector<double> ball_point(Rng& rng, std::size_t dim) {
  std::vector<double> y(dim);
  double s = 0.0;
  for (auto& t : y) {
    t = rng.normal();
    s += t * t;
  }
  const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(dim)) / std::sqrt(s);
  for (auto& t : y) t *= r;
  return y;
}

std::vector<double> sparse_unit(Rng& rng, std::size_t N, std::size_t m) {
  std::vector<std::size_t> idx(N);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t k = 0; k < m; ++k) std::swap(idx[k], idx[k + rng.below(N - k)]);
  std::vector<double> v(N, 0.0);
  double s = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    v[idx[k]] = rng.normal();
    s += v[idx[k]] * v[idx[k]];
  }
  for (auto& t : v) t /= std::sqrt(s);
  return v;
}

}  // namespace

TEST_SUITE("nets") {
  TEST_CASE("interval cover") {
    const auto c = cover_ball(1, 1.0);
    CHECK(c.points.rows() == 3);
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
      const std::vector<double> y{2.0 * rng.uniform() - 1.0};
      REQUIRE(min_distance(c.points, y) <= 1.0);
    }
  }

  TEST_CASE("planar cover at eps 0.5") {
    const auto c = cover_ball(2, 0.5);
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) REQUIRE(min_distance(c.points, ball_point(rng, 2)) <= 0.5 + 1e-12);
    for (int i = 0; i < 1000; ++i) {
      const auto y = ball_point(rng, 2);
      const auto s = snap_to_ball_cover(y, 0.5);
      REQUIRE(std::hypot(s[0] - y[0], s[1] - y[1]) <= 0.5 + 1e-12);
    }
  }

  TEST_CASE("cover cardinality against the volumetric bound") {
    const double eps = 0.25, ell = 3.0;
    const auto c = cover_ball(3, eps);
    const double c_lattice = (std::log(static_cast<double>(c.points.rows())) - ell * std::log(2.0 / eps)) / ell;
    MESSAGE("c_lattice = " << c_lattice);
    CHECK(c_lattice <= 2.0);
  }

  TEST_CASE("box cover snaps within eps") {
    Rng rng(3);
    for (std::size_t ell : {2u, 4u, 8u}) {
      const double eps = 0.3, a = 1.0 / std::sqrt(static_cast<double>(ell));
      for (int i = 0; i < 200; ++i) {
        std::vector<double> y(ell);
        for (auto& t : y) t = a * (2.0 * rng.uniform() - 1.0);
        const auto s = snap_to_box_cover(y, eps);
        double d = 0.0;
        for (std::size_t k = 0; k < ell; ++k) {
          d += (s[k] - y[k]) * (s[k] - y[k]);
          REQUIRE(std::abs(s[k]) <= a + 1e-15);
        }
        REQUIRE(std::sqrt(d) <= eps + 1e-12);
      }
    }
  }

  TEST_CASE("enumerated members of B_2 for N = 8") {
    BlockNetParams p;
    p.N = 8;
    p.m = 2;
    BlockNet net(p);
    std::size_t count = 0;
    bool ok = true;
    net.enumerate([&](const BlockVector& z) {
      ++count;
      ok = ok && satisfies_invariants(z, p) && (z.assembled.array() != 0.0).count() <= 2;
    });
    CHECK(count > 0);
    CHECK(ok);
  }

  TEST_CASE("log cardinality scales like m log(eN/m)") {
    std::vector<double> c;
    for (std::size_t N : {8u, 16u, 32u}) {
      BlockNetParams p;
      p.N = N;
      p.m = 4;
      const double v = BlockNet(p).log_cardinality() / (4.0 * std::log(std::exp(1.0) * static_cast<double>(N) / 4.0));
      c.push_back(v);
    }
    MESSAGE("ratios " << c[0] << " " << c[1] << " " << c[2]);
    CHECK(*std::max_element(c.begin(), c.end()) <= 1.5 * *std::min_element(c.begin(), c.end()));
  }

  TEST_CASE("sampled members satisfy invariants") {
    BlockNetParams p;
    p.N = 16;
    p.m = 4;
    BlockNet net(p);
    for (std::uint64_t s = 0; s < 1000; ++s) REQUIRE(satisfies_invariants(net.sample(s), p));
  }

  TEST_CASE("single spike") {
    BlockNetParams p;
    p.N = 8;
    p.m = 2;
    std::vector<double> v(8, 0.0);
    v[0] = 1.0;
    const auto a = approximate_in_block_net(v, p);
    CHECK(a.error <= 2.0 / 8.0);
    CHECK(a.point.blocks[0].indices[0] == 0);
    CHECK(satisfies_invariants(a.point, p));
  }

  TEST_CASE("ties are broken by lowest index") {
    BlockNetParams p;
    p.N = 16;
    p.m = 4;
    std::vector<double> v(16, 0.0);
    v[9] = v[3] = 0.5;
    v[12] = v[5] = -0.5;
    const auto a = approximate_in_block_net(v, p);
    CHECK(a.point.blocks[0].indices == std::vector<std::size_t>{3, 5});
    CHECK(a.error <= 4.0 / 16.0);
  }

  TEST_CASE("approximation error within m/N") {
    Rng rng(4);
    for (std::size_t N : {8u, 16u, 32u})
      for (std::size_t m : {2u, 4u}) {
        BlockNetParams p;
        p.N = N;
        p.m = m;
        for (int i = 0; i < 1000; ++i) {
          const auto a = approximate_in_block_net(sparse_unit(rng, N, m), p);
          REQUIRE(a.error <= static_cast<double>(m) / static_cast<double>(N));
          REQUIRE(satisfies_invariants(a.point, p));
        }
      }
  }

  TEST_CASE("approximation rejects bad input") {
    BlockNetParams p;
    p.N = 8;
    p.m = 2;
    CHECK_THROWS(approximate_in_block_net(std::vector<double>(7, 0.0), p));
    CHECK_THROWS(approximate_in_block_net(std::vector<double>{1, 1, 0, 0, 0, 0, 0, 0}, p));
    CHECK_THROWS(approximate_in_block_net(std::vector<double>{0.5, 0.5, 0.5, 0, 0, 0, 0, 0}, p));
    p.m = 3;
    CHECK_THROWS(p.validate());
  }

  TEST_CASE("linearization for a single vector") {
    BlockNetParams p;
    p.N = 8;
    p.m = 2;
    Matrix x(1, 3);
    x << 0.3, -1.2, 0.7;
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto r = linearization_check(sample(EnsembleSpec::gaussian(3), 8, s), IndexClass::finite(x), p);
      CHECK(r.holds);
      CHECK(r.ratio <= 2.0);
    }
  }

  TEST_CASE("linearization for the zero class") {
    BlockNetParams p;
    p.N = 8;
    p.m = 2;
    const auto r = linearization_check(sample(EnsembleSpec::gaussian(3), 8, 1), IndexClass::finite(Matrix::Zero(1, 3)), p);
    CHECK(r.D_m == 0.0);
    CHECK(r.sup_Bm == 0.0);
    CHECK(r.holds);
  }

  TEST_CASE("linearization for the planar sphere") {
    BlockNetParams p;
    p.N = 6;
    p.m = 2;
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto X = sample(EnsembleSpec::gaussian(2), 6, s);
      // Exact D_2: largest singular value over all 2-row submatrices.
      double exact = 0.0;
      for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = i + 1; j < 6; ++j) {
          Matrix S(2, 2);
          S.row(0) = X.rows.row(i);
          S.row(1) = X.rows.row(j);
          exact = std::max(exact, Eigen::JacobiSVD<Matrix>(S).singularValues()(0));
        }
      const auto r = linearization_check(X, IndexClass::sphere(2), p);
      CHECK(r.D_m == doctest::Approx(exact).epsilon(1e-9));
      CHECK(r.holds);
    }
  }

  TEST_CASE("covering numbers") {
    Matrix one(1, 2);
    one << 0.2, 0.1;
    CHECK(covering_number(one, 0.1) == 1);
    Matrix two(2, 1);
    two << 0.0, 3.0;
    CHECK(covering_number(two, 1.0) == 2);
    Rng rng(8);
    Matrix P(1000, 3);
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      const auto y = ball_point(rng, 3);
      for (Eigen::Index j = 0; j < 3; ++j) P(i, j) = y[static_cast<std::size_t>(j)];
    }
    CHECK(covering_number(P, 0.5) <= static_cast<std::size_t>(cover_ball(3, 0.5).points.rows()));
  }
}
