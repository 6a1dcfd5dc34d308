#include "psichain/applications.hpp"
#include "psichain/ensembles.hpp"
#include "psichain/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace psichain;

TEST_SUITE("applications") {
  TEST_CASE("identity embedding on the euclidean ball") {
    const Matrix I = Matrix::Identity(6, 6);
    const auto r = operator_norm(I, BodySpec::euclidean_ball(6), 2.0);
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.method == "exact-spectral");
  }

  TEST_CASE("l1 ball norm is the largest column") {
    Rng rng(1);
    Matrix G(7, 4);
    for (Eigen::Index i = 0; i < 7; ++i)
      for (Eigen::Index j = 0; j < 4; ++j) G(i, j) = rng.normal();
    double best = 0.0;
    for (Eigen::Index j = 0; j < 4; ++j)
      for (double s : {1.0, -1.0}) best = std::max(best, (s * G.col(j)).norm());
    const auto r = operator_norm(G, BodySpec::l1_ball(4), 2.0);
    CHECK(r.value == doctest::Approx(best).epsilon(1e-12));
    CHECK(r.method == "exact-vertices");
  }

  TEST_CASE("gaussian operator norm near sqrt(N) + sqrt(n)") {
    double s = 0.0;
    for (std::uint64_t t = 0; t < 50; ++t) s += operator_norm(sample(EnsembleSpec::gaussian(16), 256, t).rows, BodySpec::euclidean_ball(16), 2.0).value;
    const double ratio = s / 50.0 / (16.0 + 4.0);
    CHECK(ratio >= 0.8);
    CHECK(ratio <= 1.25);
  }

  TEST_CASE("infinity norm over the ball is the largest row") {
    Matrix G(3, 2);
    G << 3, 4, 1, 0, -6, 8;
    CHECK(operator_norm(G, BodySpec::euclidean_ball(2), std::numeric_limits<double>::infinity()).value ==
          doctest::Approx(10.0));
  }

  TEST_CASE("scaling a body scales the norm") {
    Matrix G(3, 2);
    G << 1, 2, 3, 4, 5, 6;
    const double v = operator_norm(G, BodySpec::euclidean_ball(2), 2.0).value;
    CHECK(operator_norm(G, BodySpec::euclidean_ball(2).scaled(3.0), 2.0).value == doctest::Approx(3.0 * v));
  }

  TEST_CASE("two-point body") {
    Matrix P(2, 3);
    P << 1, 2, 2, -1, -2, -2;
    Matrix A(2, 3);
    A << 1, 0, 1, 0, 1, -1;
    CHECK(image_diameter(A, BodySpec::finite_points(P)) == doctest::Approx(2.0 * (A * P.row(0).transpose()).norm()));
  }

  TEST_CASE("shrinking of two antipodal points") {
    Rng rng(2);
    Matrix P(2, 32);
    for (Eigen::Index j = 0; j < 32; ++j) P(0, j) = rng.normal();
    P.row(1) = -P.row(0);
    const auto r = shrinking_experiment(EnsembleSpec::gaussian(32), BodySpec::finite_points(P), {1, 4, 16, 32}, 400, 3);
    for (const auto& row : r.rows) {
      CHECK(row.ratio_mean >= 0.7);
      CHECK(row.ratio_mean <= 1.4);
    }
  }

  TEST_CASE("shrinking plateau of the l1 ball") {
    std::vector<std::size_t> ks{4, 8, 16, 32, 64};
    const auto g = shrinking_experiment(EnsembleSpec::gaussian(64), BodySpec::l1_ball(64), ks, 30, 4);
    const auto r = shrinking_experiment(EnsembleSpec::rademacher(64), BodySpec::l1_ball(64), ks, 30, 5);
    MESSAGE("k' = " << g.k_prime << ", k'^2 = " << g.k_prime_sq << ", plateau " << g.plateau_k);
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (static_cast<double>(ks[i]) < g.k_prime_sq) continue;
      lo = std::min(lo, g.rows[i].ratio_mean);
      hi = std::max(hi, g.rows[i].ratio_mean);
      CHECK(r.rows[i].ratio_mean <= 2.0 * g.rows[i].ratio_mean);
      CHECK(g.rows[i].ratio_mean <= 2.0 * r.rows[i].ratio_mean);
    }
    if (hi > 0.0) CHECK(hi <= 3.0 * lo);
  }

  TEST_CASE("kernel sections of the ball have diameter 2") {
    for (std::size_t N : {1u, 3u, 7u}) {
      const auto X = sample(EnsembleSpec::gaussian(8), N, N);
      const auto k = kernel_diameter(X.rows, BodySpec::euclidean_ball(8));
      CHECK(k.diameter == doctest::Approx(2.0));
      CHECK(k.basis.cols() == static_cast<Eigen::Index>(8 - N));
      CHECK((X.rows * k.basis).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("cigar kernel diameter against random kernel directions") {
    const double eps = 0.5;
    Matrix S = Matrix::Identity(3, 3) / (eps * eps);
    S(0, 0) = 1.0;
    const auto X = sample(EnsembleSpec::gaussian(3), 1, 6);
    const auto k = kernel_diameter(X.rows, BodySpec::ellipsoid(S));
    Rng rng(7);
    double best = 0.0;
    for (int i = 0; i < 10000; ++i) {
      Vector c(k.basis.cols());
      for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = rng.normal();
      const Vector u = k.basis * c;
      best = std::max(best, 2.0 * u.norm() / std::sqrt(u.dot(S * u)));
    }
    CHECK(best <= k.diameter * (1.0 + 1e-12));
    CHECK(best >= 0.99 * k.diameter);
  }

  TEST_CASE("kernel diameter decreases with N") {
    Vector axes(12);
    for (Eigen::Index j = 0; j < 12; ++j) axes[j] = 1.0 / static_cast<double>(j + 1);
    const Matrix S = axes.array().square().inverse().matrix().asDiagonal();
    const auto r = low_mstar_experiment(EnsembleSpec::gaussian(12), BodySpec::ellipsoid(S), {1, 3, 6, 9, 11}, 10, 8, 500);
    CHECK(r.monotone);
    for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].mean_diameter <= r.rows[i - 1].mean_diameter + 1e-12);
  }

  TEST_CASE("ellipsoid width is monotone in the ball radius") {
    Vector a(4);
    a << 1, 4, 9, 16;
    Rng rng(9);
    Matrix g(200, 4);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < 4; ++j) g(i, j) = rng.normal();
    CHECK(ellipsoid_ball_width(a, 0.1, g) <= ellipsoid_ball_width(a, 0.5, g) + 1e-12);
    // Radius large enough that the ball constraint is inactive: width of the ellipsoid.
    double w = 0.0;
    for (Eigen::Index i = 0; i < g.rows(); ++i) w += std::sqrt((g.row(i).array().square() / a.transpose().array()).sum());
    CHECK(ellipsoid_ball_width(a, 10.0, g) == doctest::Approx(w / 200.0).epsilon(1e-6));
  }

  TEST_CASE("sphere process tracks sqrt(n/N) for gaussians") {
    const auto r = sphere_process_experiment({EnsembleSpec::gaussian(8)}, {128, 512, 2048, 8192}, 10, 10);
    REQUIRE(r.summaries.size() == 1);
    CHECK(r.summaries[0].band_sqrt <= 3.0);
  }

  TEST_CASE("no concentration at N = n") {
    const auto r = sphere_process_experiment({EnsembleSpec::gaussian(32), EnsembleSpec::l1_ball(32)}, {32}, 10, 11);
    for (const auto& row : r.rows) CHECK(row.mean_deviation >= 1.0);
  }

  TEST_CASE("invalid bodies") {
    CHECK_THROWS(BodySpec::ellipsoid(Matrix::Zero(2, 2)).validate());
    CHECK_THROWS(operator_norm(Matrix::Identity(2, 2), BodySpec::euclidean_ball(3), 2.0));
  }
}
