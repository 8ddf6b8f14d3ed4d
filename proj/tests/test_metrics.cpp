#include <doctest.h>

#include <Eigen/Dense>

#include "volt/metrics.hpp"
#include "volt/rng.hpp"

using namespace volt;

TEST_CASE("fit percent basics") {
  Eigen::VectorXd z(3);
  z << 1.0, 2.0, 4.0;
  CHECK(fit_percent(z, z) == 100.0);

  const Eigen::VectorXd mean_pred = Eigen::VectorXd::Constant(3, z.mean());
  CHECK(fit_percent(z, mean_pred) == doctest::Approx(0.0));

  Eigen::VectorXd z2(2), zhat2(2);
  z2 << 0.0, 2.0;
  zhat2 << 1.0, 1.0;
  CHECK(fit_percent(z2, zhat2) == doctest::Approx(0.0));
}

TEST_CASE("fit percent error paths") {
  Eigen::VectorXd z(3), zhat(2);
  z << 1, 2, 3;
  zhat << 1, 2;
  CHECK_THROWS_AS(fit_percent(z, zhat), std::invalid_argument);
  CHECK_THROWS_AS(fit_percent(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_percent(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(4)),
                  std::invalid_argument);  // constant z
}

TEST_CASE("fit percent is shift invariant") {
  const CounterRng rng(11);
  Eigen::VectorXd z(25), zhat(25);
  for (int i = 0; i < 25; ++i) {
    z[i] = rng.normal(static_cast<std::uint64_t>(i));
    zhat[i] = rng.normal(static_cast<std::uint64_t>(100 + i));
  }
  const double base = fit_percent(z, zhat);
  for (double c : {-5.0, 0.25, 1000.0}) {
    CHECK(fit_percent(z.array() + c, zhat.array() + c) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("rmse") {
  Eigen::VectorXd z(2), zhat(2);
  z << 0.0, 0.0;
  zhat << 1.0, 1.0;
  CHECK(rmse(z, z) == 0.0);
  CHECK(rmse(z, zhat) == doctest::Approx(1.0));

  Eigen::VectorXd z2(2), zhat2(2);
  z2 << 0.0, 2.0;
  zhat2 << 1.0, 1.0;
  CHECK(rmse(z2, zhat2) == doctest::Approx(1.0));

  CHECK_THROWS_AS(rmse(Eigen::VectorXd(), Eigen::VectorXd()), std::invalid_argument);
  CHECK_THROWS_AS(rmse(Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(3)),
                  std::invalid_argument);
}
