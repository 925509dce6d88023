#include <doctest.h>

#include "bridgex/error.hpp"
#include "bridgex/hsic.hpp"
#include "oracles.hpp"

using namespace bridgex;
using namespace bridgex::bridge;

TEST_SUITE("hsic") {
  TEST_CASE("rbf estimator matches the dense oracle") {
    oracle::Gen g(11);
    for (int trial = 0; trial < 20; ++trial) {
      const auto n = static_cast<Eigen::Index>(3 + g.below(30));
      const auto x = g.gaussian(static_cast<Eigen::Index>(1 + g.below(5)), n);
      const auto y = g.gaussian(static_cast<Eigen::Index>(1 + g.below(5)), n);
      const double want = oracle::hsic_dense(oracle::gram_rbf_median(x), oracle::gram_rbf_median(y));
      CHECK(hsic(x, y) == doctest::Approx(want).epsilon(1e-10));
    }
  }

  TEST_CASE("linear estimator matches the dense oracle") {
    oracle::Gen g(12);
    for (int trial = 0; trial < 10; ++trial) {
      const auto x = g.gaussian(3, 17);
      const auto y = g.gaussian(2, 17);
      const double want = oracle::hsic_dense(oracle::gram_linear(x), oracle::gram_linear(y));
      CHECK(hsic(x, y, Kernel::linear) == doctest::Approx(want).epsilon(1e-10));
    }
  }

  TEST_CASE("symmetric and non-negative") {
    oracle::Gen g(13);
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = g.gaussian(2, 12);
      const auto y = g.gaussian(4, 12);
      CHECK(hsic(x, y) == doctest::Approx(hsic(y, x)).epsilon(1e-12));
      CHECK(hsic(x, y) >= -1e-15);
    }
  }

  TEST_CASE("dependent samples score above independent ones") {
    oracle::Gen g(14);
    const auto x = g.gaussian(1, 100);
    const Eigen::MatrixXd y = x.array().square().matrix();
    const auto z = g.gaussian(1, 100);
    CHECK(hsic(x, y) > 5 * hsic(x, z));
  }

  TEST_CASE("bandwidth skips zero distances and falls back to linear") {
    Eigen::MatrixXd x(1, 5);
    x << 1, 1, 1, 1, 3;
    const auto gr = gram_matrix(x, Kernel::rbf_median);
    CHECK(gr.bandwidth == 2.0);
    CHECK_FALSE(gr.linear_fallback);

    const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(2, 4, 0.5);
    const auto fb = hsic_detailed(c, Eigen::MatrixXd::Random(1, 4), Kernel::rbf_median);
    CHECK(fb.linear_fallback);
    CHECK(fb.value == doctest::Approx(0.0).epsilon(1e-15));
  }

  TEST_CASE("centering by formula equals explicit H") {
    oracle::Gen g(15);
    const auto x = g.gaussian(3, 9);
    const auto k = oracle::gram_linear(x);
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(9, 9);
    h.array() -= 1.0 / 9.0;
    CHECK((center_gram(k) - h * k * h).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("shape errors") {
    CHECK_THROWS_AS(hsic(Eigen::MatrixXd::Zero(1, 5), Eigen::MatrixXd::Zero(1, 6)), ShapeError);
    CHECK_THROWS_AS(hsic(Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(1, 2)), ShapeError);
    CHECK_THROWS_AS(hsic(Eigen::MatrixXd::Zero(0, 5), Eigen::MatrixXd::Zero(1, 5)), ShapeError);
    CHECK_THROWS_AS(hsic_from_grams(Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(4, 4)), ShapeError);
  }

  TEST_CASE("kernel names") {
    CHECK(parse_kernel("linear") == Kernel::linear);
    CHECK(to_string(parse_kernel("rbf_median")) == "rbf_median");
    CHECK_THROWS_AS(parse_kernel("poly"), ConfigError);
  }
}
