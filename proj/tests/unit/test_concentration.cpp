#include "psichain/complexity.hpp"
#include "psichain/concentration.hpp"
#include "psichain/ensembles.hpp"
#include "psichain/rng.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <vector>

using namespace psichain;

TEST_SUITE("concentration") {
  TEST_CASE("exactly isotropic sample has zero deviation") {
    const Eigen::Index n = 5;
    const Matrix Q = Eigen::HouseholderQR<Matrix>(sample(EnsembleSpec::gaussian(5), 5, 1).rows).householderQ();
    const Matrix X = std::sqrt(static_cast<double>(n)) * Q;
    CHECK(sup_deviation(X, IndexClass::sphere(5)).value <= 1e-12);
  }

  TEST_CASE("vector-list deviation by hand") {
    Matrix X(4, 2);
    X << 1, 0, 0, 2, 1, 1, -1, 1;
    Matrix F(3, 2);
    F << 1, 0, 0, 1, 0.6, 0.8;
    // f1: (1,0,1,-1) -> mean square 3/4, |3/4 - 1| = 1/4.
    // f2: (0,2,1,1) -> 6/4, deviation 1/2.
    // f3: (0.6,1.6,1.4,0.2) -> (0.36+2.56+1.96+0.04)/4 = 1.23, deviation 0.23.
    const auto d = sup_deviation(X, IndexClass::finite(F));
    CHECK(d.value == doctest::Approx(0.5));
    CHECK(d.method == "exact-list");
  }

  TEST_CASE("gaussian sphere deviation is of order sqrt(n/N)") {
    const auto X = sample(EnsembleSpec::gaussian(8), 2048, 3);
    const double v = sup_deviation(X, IndexClass::sphere(8)).value;
    const double rate = std::sqrt(8.0 / 2048.0);
    CHECK(v >= 0.5 * rate);
    CHECK(v <= 4.0 * rate);
  }

  TEST_CASE("psi1 deviation bound") {
    const auto b = bound_theorem_A(1.0, 10.0, 10000);
    CHECK(b.value == doctest::Approx(0.1));
    CHECK(b.term2 == doctest::Approx(0.01));
    const double d = 1.7;
    const auto c = bound_theorem_A(d, d * std::sqrt(400.0), 400);
    CHECK(c.term1 == doctest::Approx(d * d));
    CHECK(c.term2 == doctest::Approx(d * d));
    for (std::size_t N : {10u, 100u, 1000u})
      for (double g : {0.5, 3.0, 40.0}) {
        const auto r = bound_theorem_A(2.0, g, N);
        const double Nd = static_cast<double>(N);
        CHECK(r.value == doctest::Approx(std::max(2.0 * g / std::sqrt(Nd), g * g / Nd)));
      }
  }

  TEST_CASE("log-form deviation bound") {
    // gamma2 >= d sqrt(N): log floor, lambda = d.
    const auto floor = bound_corollary(1.0, 50.0, 100, 1.0);
    CHECK(floor.lambda == doctest::Approx(1.0));
    CHECK(floor.value == doctest::Approx(bound_theorem_A(1.0, 50.0, 100).value));
    CHECK(bound_corollary(1.0, 50.0, 100, 2.0).value == doctest::Approx(4.0 * floor.value));
    const auto hand = bound_corollary(1.0, 1.0, 100, 1.0);
    CHECK(hand.lambda == doctest::Approx(std::log(10.0)));
    CHECK(hand.term1 == doctest::Approx(std::log(10.0) / 10.0));
    // Ratio to the psi1 bound grows like (1/2) log N once N >> gamma2^2 / d^2.
    std::vector<double> logN, ratio;
    for (std::size_t N : {1000u, 10000u, 100000u, 1000000u}) {
      logN.push_back(std::log(static_cast<double>(N)));
      ratio.push_back(bound_corollary(1.0, 2.0, N, 1.0).value / bound_theorem_A(1.0, 2.0, N).value);
    }
    const double slope = (ratio.back() - ratio.front()) / (logN.back() - logN.front());
    CHECK(slope == doctest::Approx(0.5).epsilon(1e-9));
    const auto zero = bound_corollary(1.0, 0.0, 100, 1.0);
    CHECK(zero.value == 0.0);
  }

  TEST_CASE("symmetrization for the zero class") {
    const auto t = symmetrization_check(IndexClass::finite(Matrix::Zero(1, 3)), EnsembleSpec::gaussian(3), 16, {1.0, 2.0},
                                        1000, 1);
    for (const auto& r : t.rows) {
      CHECK(r.lhs == 0.0);
      CHECK(r.rhs == 0.0);
    }
    CHECK(t.holds);
  }

  TEST_CASE("symmetrization for a gaussian singleton") {
    Matrix x(1, 2);
    x << 0.6, 0.8;
    const auto K = IndexClass::finite(x);
    const double thr = std::sqrt(2.0) * 1.0 * std::sqrt(32.0);
    const auto t = symmetrization_check(K, EnsembleSpec::gaussian(2), 32, {thr, 1.5 * thr, 2.0 * thr}, 1000, 2);
    for (const auto& r : t.rows) CHECK(r.valid);
    CHECK(t.holds);
  }

  TEST_CASE("symmetrization for eight rademacher functionals") {
    Rng rng(3);
    Matrix F(8, 4);
    for (Eigen::Index i = 0; i < 8; ++i)
      for (Eigen::Index j = 0; j < 4; ++j) F(i, j) = rng.normal();
    const auto probe = symmetrization_check(IndexClass::finite(F), EnsembleSpec::rademacher(4), 64, {0.0}, 1000, 4);
    std::vector<double> ts;
    for (double f : {1.0, 1.5, 2.0, 3.0}) ts.push_back(f * probe.threshold);
    const auto t = symmetrization_check(IndexClass::finite(F), EnsembleSpec::rademacher(4), 64, ts, 1000, 5);
    CHECK(t.holds);
    SymmetrizationOptions sq;
    sq.mode = SymmetrizationMode::Squared;
    CHECK(symmetrization_check(IndexClass::finite(F), EnsembleSpec::rademacher(4), 64, ts, 1000, 6, sq).holds);
  }

  TEST_CASE("symmetrization rejects the sphere") {
    CHECK_THROWS(symmetrization_check(IndexClass::sphere(3), EnsembleSpec::gaussian(3), 16, {1.0}, 1000, 1));
  }

  TEST_CASE("log-log fit of a power law") {
    const auto f = fit_loglog({1, 2, 4, 8}, {3, 3 / std::sqrt(2.0), 1.5, 3 / std::sqrt(8.0)});
    CHECK(f.slope == doctest::Approx(-0.5));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)));
  }

  TEST_CASE("deviation cell records") {
    ScalingCell c{EnsembleSpec::gaussian(4), IndexClass::sphere(4), 256};
    ComplexityOptions co;
    co.width_trials = 500;
    co.samples = 5000;
    const auto r = deviation_cell(c, 5, 7, co);
    CHECK(r.n == 4);
    CHECK(r.N == 256);
    CHECK(r.empirical > 0.0);
    CHECK(r.bound_A > 0.0);
    CHECK(r.ratio_A == doctest::Approx(r.empirical / r.bound_A));
    CHECK(r.method == "spectral");
    const auto again = deviation_cell(c, 5, 7, co);
    CHECK(again.empirical == r.empirical);
  }

  TEST_CASE("scaling study honours the deadline") {
    std::vector<ScalingCell> cells{{EnsembleSpec::gaussian(4), IndexClass::sphere(4), 64}};
    CHECK_THROWS_AS(scaling_study(cells, 2, 1, {}, std::chrono::steady_clock::now() - std::chrono::seconds(1)),
                    BudgetExceeded);
  }
}
