#include "psichain/complexity.hpp"
#include "psichain/decompose.hpp"
#include "psichain/ensembles.hpp"
#include "psichain/orlicz.hpp"
#include "psichain/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

using namespace psichain;

namespace {

std::vector<double> spike(double h) {
  std::vector<double> v(8, 0.0);
  v[0] = h;
  return v;
}

}  // namespace

TEST_SUITE("decompose") {
  TEST_CASE("peeling with every entry below beta") {
    const auto p = peel(EmpiricalVector(spike(2.0)), 2.0, 1.0, OrliczIndex(1.0), 3.0);
    CHECK(p.E.empty());
    CHECK(p.peaky_mass == 0.0);
    CHECK(p.cardinality_holds);
    CHECK(p.mass_holds);
  }

  TEST_CASE("peeling a single spike") {
    // Premise at k = 1: 4 <= 2 + log(8e).
    const auto pc = peeling_premise(EmpiricalVector(spike(4.0)), 2.0, 1.0, OrliczIndex(1.0));
    CHECK(pc.holds);
    const auto p = peel(EmpiricalVector(spike(4.0)), 2.0, 1.0, OrliczIndex(1.0), 3.0);
    CHECK(p.E == std::vector<std::size_t>{0});
    const double bound = std::max(16.0 / 9.0, 8.0 * std::numbers::e * std::exp(-1.5));
    CHECK(p.cardinality_bound == doctest::Approx(bound));
    CHECK(p.cardinality_holds);
    CHECK(p.c3 == doctest::Approx(2.0));
  }

  TEST_CASE("premise violation is rejected") {
    CHECK_FALSE(peeling_premise(EmpiricalVector(spike(6.0)), 2.0, 1.0, OrliczIndex(1.0)).holds);
    CHECK_THROWS_AS(peel(EmpiricalVector(spike(6.0)), 2.0, 1.0, OrliczIndex(1.0), 3.0), std::domain_error);
    CHECK_THROWS_AS(peel(EmpiricalVector(spike(1.0)), 0.0, 1.0, OrliczIndex(1.0), 3.0), std::invalid_argument);
  }

  TEST_CASE("random premise-satisfying vectors") {
    Rng rng(21);
    for (double alpha : {1.0, 2.0}) {
      const OrliczIndex a(alpha);
      double worst = 0.0;
      for (int i = 0; i < 1000; ++i) {
        const std::size_t N = 8 + rng.below(121);
        std::vector<double> v(N);
        for (auto& x : v) x = rng.sign() / rng.uniform_open();
        const double A = std::exp(4.0 * rng.uniform() - 2.0), B = std::exp(4.0 * rng.uniform() - 2.0);
        const auto pc = peeling_premise(EmpiricalVector(v), A, B, a);
        for (auto& x : v) x *= 0.99 / pc.worst_ratio;
        const double Nd = static_cast<double>(N);
        const double thr = 4.0 * B * std::max(std::pow(std::max(std::log(std::numbers::e * std::numbers::e * Nd * B * B / (A * A)), 0.0), 1.0 / alpha), 1.0);
        const bool large = i % 2 == 0;
        const double beta = large ? thr * (1.0 + 2.0 * rng.uniform()) : B * (1.0 + 10.0 * rng.uniform());
        const auto p = peel(EmpiricalVector(v), A, B, a, beta);
        // Independent recount of E and of its mass.
        std::size_t count = 0;
        double mass = 0.0;
        for (double x : v)
          if (std::abs(x) >= beta) {
            ++count;
            mass += x * x;
          }
        REQUIRE(p.E.size() == count);
        const double bound = std::max(4.0 * A * A / (beta * beta), std::numbers::e * Nd * std::exp(-std::pow(beta / (2.0 * B), alpha)));
        REQUIRE(static_cast<double>(count) <= bound * (1.0 + 1e-12));
        if (!large) continue;
        REQUIRE(std::sqrt(mass) <= 5.0 * A);
        worst = std::max(worst, std::sqrt(mass) / A);
      }
      MESSAGE("alpha " << alpha << " worst c3 " << worst);
    }
  }

  TEST_CASE("truncation level") {
    const OrliczIndex a(1.0);
    CHECK(truncation_level(0.0, 1.0, 64, a) == 0.0);
    CHECK(truncation_level(2.0, std::numeric_limits<double>::infinity(), 64, a) == 2.0);
    CHECK(std::isinf(truncation_level(2.0, 0.0, 64, a)));
  }

  TEST_CASE("zero class decomposes to zero") {
    const auto X = sample(EnsembleSpec::gaussian(3), 32, 1);
    const auto K = IndexClass::finite(Matrix::Zero(2, 3));
    ComplexityEstimate est;
    DecomposeOptions o;
    o.fresh_samples = 1000;
    const auto d = decompose_class(X, K, est, OrliczIndex(2.0), 2.0, o);
    CHECK(d.support_mult == 0.0);
    CHECK(d.peaky_l2_mult == 0.0);
    CHECK(d.second_moment_mult == 0.0);
    CHECK(d.regular_psi_mult == 0.0);
    for (const auto& p : d.parts) {
      CHECK(p.peaky_support == 0);
      CHECK(p.regular_linf == 0.0);
    }
  }

  TEST_CASE("gaussian sphere decomposition") {
    const OrliczIndex a(2.0);
    ComplexityOptions co;
    co.seed = 2;
    const auto est = estimate_complexity(EnsembleSpec::gaussian(8), IndexClass::sphere(8), a, co);
    DecomposeOptions o;
    o.seed = 3;
    o.fresh_samples = 20000;
    const auto X = sample(EnsembleSpec::gaussian(8), 256, 4);
    const auto d = decompose_class(X, IndexClass::sphere(8), est, a, kCalibratedT, o);
    for (double v : {d.support_mult, d.peaky_l2_mult, d.second_moment_mult, d.regular_psi_mult, d.regular_linf_ratio})
      CHECK(std::isfinite(v));
    CHECK(d.containment);
    CHECK(d.linf_holds);
    CHECK(d.algebra_holds);
    for (const auto& p : d.parts) {
      REQUIRE(p.values.size() == 256);
      CHECK((p.regular + p.peaky - p.values).cwiseAbs().maxCoeff() == 0.0);
      CHECK(p.regular.cwiseAbs().maxCoeff() <= d.beta);
    }
  }

  TEST_CASE("heavy-tailed functional has a peaky part") {
    const OrliczIndex a(1.0);
    const auto spec = EnsembleSpec::exp_power(2, 1.0);
    Matrix e(1, 2);
    e << 1.0, 0.0;
    const auto K = IndexClass::finite(e);
    ComplexityOptions co;
    co.seed = 5;
    const auto est = estimate_complexity(spec, K, a, co);
    int nonempty = 0;
    const int trials = 10;
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      DecomposeOptions o;
      o.seed = static_cast<std::uint64_t>(t);
      o.fresh_samples = 5000;
      const auto d = decompose_class(sample(spec, 4096, 100 + static_cast<std::uint64_t>(t)), K, est, a, 1.0, o);
      nonempty += d.parts[0].peaky_support > 0;
      worst = std::max(worst, d.parts[0].regular_psi / d.d_psi);
    }
    CHECK(nonempty >= trials / 2);
    CHECK(worst <= 3.0);
  }

  TEST_CASE("rudelson comparison on the sphere") {
    const auto r = rudelson_compare(sample(EnsembleSpec::gaussian(16), 64, 6), IndexClass::sphere(16), 500, 7);
    CHECK(r.R_N / 4.0 >= 0.5);
    CHECK(r.R_N / 4.0 <= 2.0);
    CHECK(r.tighter == "n/a");
  }

  TEST_CASE("rudelson comparison for a singleton") {
    Matrix x(1, 3);
    x << 0.0, 3.0, 4.0;
    const auto X = sample(EnsembleSpec::gaussian(3), 50, 8);
    const auto r = rudelson_compare(X, IndexClass::finite(x), 20000, 9);
    // Direct simulation of E |sum eps_i <x, X_i>| / sqrt(N).
    const Vector v = X.rows * x.row(0).transpose();
    Rng rng(31);
    double s = 0.0;
    for (int t = 0; t < 20000; ++t) {
      double z = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) z += rng.sign() * v[i];
      s += std::abs(z);
    }
    const double oracle = s / 20000.0 / std::sqrt(50.0);
    CHECK(r.R_N == doctest::Approx(oracle).epsilon(0.03));
    CHECK(r.d_L2 == doctest::Approx(5.0));
  }

  TEST_CASE("rudelson comparison for the zero class") {
    const auto r = rudelson_compare(sample(EnsembleSpec::gaussian(3), 20, 1), IndexClass::finite(Matrix::Zero(1, 3)), 100, 2);
    CHECK(r.l1_budget == 0.0);
    CHECK(r.l2_budget == 0.0);
    CHECK(r.rudelson_spike == 0.0);
  }
}
