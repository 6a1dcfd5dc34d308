#include "psichain/complexity.hpp"
#include "psichain/diameters.hpp"
#include "psichain/ensembles.hpp"
#include "psichain/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace psichain;

namespace {

double top_sum(std::vector<double> v, std::size_t k, double p) {
  for (auto& t : v) t = std::pow(std::abs(t), p);
  std::sort(v.rbegin(), v.rend());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += v[i];
  return std::pow(s, 1.0 / p);
}

double exact_sphere_Dm(const Matrix& X, std::size_t m) {
  // Brute force over supports for m = 2.
  double best = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = i + 1; j < X.rows(); ++j) {
      Matrix S(2, X.cols());
      S.row(0) = X.row(i);
      S.row(1) = X.row(j);
      best = std::max(best, Eigen::JacobiSVD<Matrix>(S).singularValues()(0));
    }
  (void)m;
  return best;
}

}  // namespace

TEST_SUITE("diameters") {
  TEST_CASE("m = N on the sphere is the top singular value") {
    const auto X = sample(EnsembleSpec::gaussian(5), 12, 3);
    const double s = Eigen::JacobiSVD<Matrix>(X.rows).singularValues()(0);
    CHECK(empirical_Dm(X, IndexClass::sphere(5), 12).value == doctest::Approx(s).epsilon(1e-9));
  }

  TEST_CASE("single-vector class") {
    Matrix x(1, 4);
    x << 0.5, -1.0, 2.0, 0.0;
    const auto X = sample(EnsembleSpec::gaussian(4), 30, 4);
    const Vector proj = X.rows * x.row(0).transpose();
    const std::vector<double> v(proj.data(), proj.data() + proj.size());
    for (std::size_t m : {1u, 5u, 30u})
      CHECK(empirical_Dm(X, IndexClass::finite(x), m).value == doctest::Approx(top_sum(v, m, 2.0)).epsilon(1e-12));
  }

  TEST_CASE("greedy sphere search against enumeration") {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto X = sample(EnsembleSpec::gaussian(2), 6, s);
      DmOptions o;
      o.exact_cap = 0.0;
      o.seed = s;
      const auto g = empirical_Dm(X, IndexClass::sphere(2), 2, o);
      CHECK(g.method == DmMethod::GreedyLower);
      REQUIRE(g.value >= 0.95 * exact_sphere_Dm(X.rows, 2));
      const auto e = empirical_Dm(X, IndexClass::sphere(2), 2);
      REQUIRE(e.value == doctest::Approx(exact_sphere_Dm(X.rows, 2)).epsilon(1e-9));
    }
  }

  TEST_CASE("dyadic grid") {
    CHECK(dyadic_grid(64) == std::vector<std::size_t>{1, 2, 4, 8, 16, 32, 64});
    CHECK(dyadic_grid(6) == std::vector<std::size_t>{1, 2, 4, 6});
  }

  TEST_CASE("bound terms") {
    const OrliczIndex a(1.0);
    const auto big = theoretical_Dm_bound(1000.0, 1.0, a, 1, 64, 2.0);
    CHECK(big.term_gamma2 == doctest::Approx(2000.0));
    CHECK(big.term_tail < 0.01 * big.term_gamma2);
    const auto full = theoretical_Dm_bound(1.0, 3.0, a, 64, 64, 1.0);
    CHECK(full.term_tail == doctest::Approx(3.0 * 8.0));
    // Independent recomputation on a grid.
    for (double alpha : {1.0, 2.0})
      for (std::size_t m : {1u, 3u, 10u, 50u}) {
        const double N = 50, u = 1.5, g = 2.2, d = 0.7;
        const auto b = theoretical_Dm_bound(g, d, OrliczIndex(alpha), m, 50, u);
        const double tail = u * d * std::sqrt(double(m)) * std::pow(std::log(std::numbers::e * N / double(m)), 1.0 / alpha);
        CHECK(b.term_gamma2 == doctest::Approx(u * g));
        CHECK(b.term_tail == doctest::Approx(tail));
      }
    CHECK_THROWS(theoretical_Dm_bound(1.0, 1.0, a, 0, 8, 1.0));
    CHECK_THROWS(theoretical_Dm_bound(1.0, 1.0, a, 1, 8, 0.5));
  }

  TEST_CASE("l_p diameters") {
    Matrix x(1, 3);
    x << 1.0, -0.5, 0.25;
    const auto K = IndexClass::finite(x);
    const auto X = sample(EnsembleSpec::gaussian(3), 40, 5);
    ComplexityEstimate est;
    est.gamma2_upper = 1.0;
    est.d_psi_alpha = 1.0;
    const OrliczIndex a(1.0);
    for (std::size_t k : {1u, 7u, 40u}) {
      CHECK(lp_diameter(X, K, k, 2.0, est, a).empirical == doctest::Approx(empirical_Dm(X, K, k).value).epsilon(1e-12));
      const Vector proj = X.rows * x.row(0).transpose();
      const std::vector<double> v(proj.data(), proj.data() + proj.size());
      CHECK(lp_diameter(X, K, k, 1.0, est, a).empirical == doctest::Approx(top_sum(v, k, 1.0)).epsilon(1e-12));
    }
  }

  TEST_CASE("l_p bound regimes meet at the crossover") {
    const OrliczIndex a(1.0);
    const std::size_t N = 256;
    const double g = 12.0, d = 1.0;
    const auto m0 = crossover_m0(g, d, a, N);
    REQUIRE(m0 >= 2);
    REQUIRE(m0 <= N);
    for (double p : {3.0, 4.0}) {
      const double below = lp_bound(g, d, a, m0 - 1, p, N), at = lp_bound(g, d, a, m0, p, N);
      CHECK(at <= 2.0 * below);
      CHECK(below <= 2.0 * at);
    }
  }

  TEST_CASE("gaussian lower check with one sample") {
    const auto r = gaussian_lower_check(EnsembleSpec::gaussian(16), IndexClass::sphere(16), 1, {1}, 2000, 6);
    CHECK(r.rows[0].lhs == doctest::Approx(4.0).epsilon(0.05));
    CHECK(r.width == doctest::Approx(4.0).epsilon(0.05));
  }

  TEST_CASE("gaussian lower check for a singleton is stable in N") {
    Matrix x(1, 3);
    x << 0.6, 0.8, 0.0;
    std::vector<double> ratios;
    for (std::size_t N : {16u, 64u, 256u}) {
      const auto r = gaussian_lower_check(EnsembleSpec::gaussian(3), IndexClass::finite(x), N, {4}, 400, N);
      ratios.push_back(r.rows[0].ratio);
    }
    CHECK(*std::max_element(ratios.begin(), ratios.end()) <= 2.0 * *std::min_element(ratios.begin(), ratios.end()));
  }

  TEST_CASE("gaussian lower constant on the sphere") {
    std::vector<std::size_t> ms{1, 2, 4, 8, 16, 32};
    const auto r = gaussian_lower_check(EnsembleSpec::gaussian(8), IndexClass::sphere(8), 64, ms, 20, 7);
    MESSAGE("c = " << r.c);
    CHECK(r.c >= 0.1);
    CHECK(r.c <= 1.0);
  }

  TEST_CASE("optimality experiment with one sample") {
    const auto r = optimality_experiment(4, 1, 1.0, 4000, 8, 2.0, 400);
    // Independent simulation of max_j w_j |L_j| with unit-rate Laplace L_j.
    Rng rng(99);
    double s = 0.0, s2 = 0.0;
    const int T = 4000;
    for (int t = 0; t < T; ++t) {
      double best = 0.0;
      for (int j = 0; j < 4; ++j) best = std::max(best, rng.exponential() / std::sqrt(std::log(j + 2.0)));
      s += best;
      s2 += best * best;
    }
    const double mean = s / T, se = std::sqrt((s2 / T - mean * mean) / T);
    double s_own = 0.0, s2_own = 0.0;
    for (double v : r.sup) {
      s_own += v;
      s2_own += v * v;
    }
    const double own = s_own / T, own_se = std::sqrt((s2_own / T - own * own) / T);
    CHECK(std::abs(own - mean) <= 4.0 * std::hypot(se, own_se));
    CHECK(r.mean_sup == doctest::Approx(own));
  }

  TEST_CASE("optimality control arm stays bounded") {
    const auto r = optimality_experiment(128, 128, 1.0, 100, 9, 2.0, 200);
    CHECK(r.median_R < 2.0);
  }

  TEST_CASE("paley-zygmund") {
    CHECK(paley_zygmund(3.0, 3.0, 1.0, 2.0, 0.5) == doctest::Approx(0.25));
    CHECK(paley_zygmund(3.0, 3.0, 1.0, 2.0, 1.0 - 1e-9) < 1e-8);
    CHECK_THROWS(paley_zygmund(1.0, 2.0, 2.0, 1.0, 0.5));
    // Laplace sums: the Monte Carlo tail dominates the bound.
    Rng rng(10);
    for (int inst = 0; inst < 100; ++inst) {
      const int n = 4 + static_cast<int>(rng.below(12));
      std::vector<double> w(static_cast<std::size_t>(n));
      for (auto& t : w) t = rng.uniform();
      std::vector<double> z(4000);
      for (auto& v : z) {
        v = 0.0;
        for (double wi : w) v += wi * rng.sign() * rng.exponential();
      }
      const double p = 2.0, q = 4.0, lambda = 0.5;
      double mp = 0, mq = 0;
      for (double v : z) {
        mp += std::pow(std::abs(v), p);
        mq += std::pow(std::abs(v), q);
      }
      const double np = std::pow(mp / 4000.0, 1.0 / p), nq = std::pow(mq / 4000.0, 1.0 / q);
      const double tail =
          static_cast<double>(std::count_if(z.begin(), z.end(), [&](double v) { return std::abs(v) >= lambda * np; })) /
          4000.0;
      REQUIRE(tail >= paley_zygmund(np, nq, p, q, lambda));
    }
  }

  TEST_CASE("moments of a single laplace coordinate") {
    const auto rows = moment_equivalence_check({1.0}, 1.0, {2}, 200000, 11);
    CHECK(rows[0].empirical == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
    CHECK(std::isfinite(rows[0].ratio));
  }

  TEST_CASE("moment ratios are stable across p") {
    for (double alpha : {1.0, 2.0}) {
      const auto rows = moment_equivalence_check(std::vector<double>(64, 0.125), alpha, {2, 4, 8}, 100000, 12);
      double lo = 1e300, hi = 0.0;
      for (const auto& r : rows) {
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
      }
      CHECK(hi <= 4.0 * lo);
    }
  }
}
