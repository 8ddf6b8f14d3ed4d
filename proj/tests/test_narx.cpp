#include <doctest.h>

#include <Eigen/Dense>

#include "volt/metrics.hpp"
#include "volt/narx.hpp"
#include "volt/rng.hpp"

using namespace volt;

TEST_CASE("narx dataset layout") {
  Eigen::VectorXd u(2), z(2);
  u << 1, 2;
  z << 10, 20;
  const Dataset data = build_narx_dataset(u, z, 1);
  REQUIRE(data.rows() == 1);
  REQUIRE(data.dim() == 3);
  CHECK(data.inputs(0, 0) == 2.0);   // u_k
  CHECK(data.inputs(0, 1) == 1.0);   // u_{k-1}
  CHECK(data.inputs(0, 2) == 10.0);  // z_{k-1}
  CHECK(data.outputs[0] == 20.0);
}

TEST_CASE("narx dataset dimensions for m=5") {
  const int n = 40;
  const CounterRng rng(3);
  Eigen::VectorXd u(n), z(n);
  for (int i = 0; i < n; ++i) {
    u[i] = rng.normal(static_cast<std::uint64_t>(i));
    z[i] = rng.normal(static_cast<std::uint64_t>(n + i));
  }
  const Dataset data = build_narx_dataset(u, z, 5);
  CHECK(data.rows() == n - 5);
  CHECK(data.dim() == 11);
}

TEST_CASE("constant signals give identical narx rows") {
  const Dataset data = build_narx_dataset(Eigen::VectorXd::Constant(10, 2.0),
                                          Eigen::VectorXd::Constant(10, -1.0), 3);
  for (Eigen::Index t = 1; t < data.rows(); ++t) {
    CHECK((data.inputs.row(t) - data.inputs.row(0)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("narx dataset error paths") {
  CHECK_THROWS_AS(build_narx_dataset(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(5), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_narx_dataset(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_narx_dataset(Eigen::VectorXd::Zero(9), Eigen::VectorXd::Zero(9), 0),
                  std::invalid_argument);
}

namespace {

// Deterministic stable linear NARX record: z_k = 0.6 z_{k-1} + 0.5 u_{k-1}
void linear_record(int n, std::uint64_t seed, Eigen::VectorXd& u, Eigen::VectorXd& z) {
  const CounterRng rng(seed);
  u.resize(n);
  z.setZero(n);
  for (int i = 0; i < n; ++i) u[i] = rng.normal(static_cast<std::uint64_t>(i));
  for (int k = 1; k < n; ++k) z[k] = 0.6 * z[k - 1] + 0.5 * u[k - 1];
}

}  // namespace

TEST_CASE("free run with a zero model returns seeds then zeros") {
  Eigen::VectorXd u, z;
  linear_record(30, 8, u, z);
  Dataset data = build_narx_dataset(u, z, 2);
  data.outputs.setZero();  // alpha will be zero
  FittedNetwork model = fit(data, PkParams{2}, 1.0);
  model.narx_memory = 2;
  const FreeRunResult run = free_run_simulate(model, u, z.head(2));
  CHECK(!run.diverged);
  CHECK(run.z.head(2).isApprox(z.head(2)));
  CHECK(run.z.tail(run.z.size() - 2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("feeding measured outputs reproduces the one-step predictions") {
  Eigen::VectorXd u, z;
  linear_record(60, 12, u, z);
  const int m = 2;
  Dataset data = build_narx_dataset(u, z, m);
  FittedNetwork model = fit(data, PkParams{2}, 0.1);
  model.narx_memory = m;

  const Eigen::VectorXd onestep = predict(model, data.inputs);
  // hand loop with measured outputs in the lag slots
  Eigen::MatrixXd regressor(1, 2 * m + 1);
  for (Eigen::Index k = m; k < u.size(); ++k) {
    for (int j = 0; j <= m; ++j) regressor(0, j) = u[k - j];
    for (int j = 1; j <= m; ++j) regressor(0, m + j) = z[k - j];
    CHECK(predict(model, regressor)[0] ==
          doctest::Approx(onestep[k - m]).epsilon(1e-12));
  }
}

TEST_CASE("free run equals one-step when the model ignores output lags") {
  Eigen::VectorXd u, z;
  linear_record(50, 21, u, z);
  const int m = 2;
  const Dataset data = build_narx_dataset(u, z, m);

  // MPK with zero increments on the z-lag columns: predictions cannot depend
  // on the fed-back outputs.
  MpkParams params = MpkParams::zeros(2, 2 * m + 1);
  params.raw_offsets = Eigen::VectorXd::Ones(2);
  params.raw_increments.block(1, 0, 1, m + 1) = Eigen::RowVectorXd::Ones(m + 1);
  FittedNetwork model = fit(data, KernelConfig(params), 0.5);
  model.narx_memory = m;

  const Eigen::VectorXd onestep = predict(model, data.inputs);
  const FreeRunResult run = free_run_simulate(model, u, z.head(m));
  CHECK(!run.diverged);
  CHECK(run.z.tail(run.z.size() - m).isApprox(onestep, 1e-12));
}

TEST_CASE("a well-learned stable linear system free-runs accurately") {
  Eigen::VectorXd u, z;
  linear_record(220, 33, u, z);
  const int m = 2;
  const Dataset train = build_narx_dataset(u.head(150), z.head(150), m);
  // r=1 MPK is an inhomogeneous linear kernel; exact model class
  MpkParams params = MpkParams::zeros(1, 2 * m + 1);
  params.raw_offsets = Eigen::VectorXd::Ones(1);
  params.raw_increments.row(0) = Eigen::RowVectorXd::Ones(2 * m + 1);
  FittedNetwork model = fit(train, KernelConfig(params), 1e-3);
  model.narx_memory = m;

  const FreeRunResult run = free_run_simulate(model, u, z.head(m));
  CHECK(!run.diverged);
  const Eigen::VectorXd measured = z.tail(z.size() - m);
  const Eigen::VectorXd simulated = run.z.tail(run.z.size() - m);
  CHECK(fit_percent(measured, simulated) > 99.0);
}

TEST_CASE("free run flags divergence and truncates") {
  Eigen::VectorXd u, z;
  linear_record(40, 44, u, z);
  const int m = 1;
  Dataset data = build_narx_dataset(u, z, m);
  // explosive target: z_k = 4 z_{k-1} (+ u resonance); the fitted model
  // amplifies and overflows pow(, 3) eventually
  for (Eigen::Index t = 0; t < data.rows(); ++t) {
    data.outputs[t] = 4.0 * data.inputs(t, m + 1) + 1.0;
  }
  FittedNetwork model = fit(data, PkParams{3}, 1e-6);
  model.narx_memory = m;
  Eigen::VectorXd long_u = Eigen::VectorXd::Ones(5000);
  const FreeRunResult run = free_run_simulate(model, long_u, Eigen::VectorXd::Ones(1));
  CHECK(run.diverged);
  CHECK(run.truncated_at > 0);
  CHECK(run.z.size() == run.truncated_at);
}

TEST_CASE("free run validates its inputs") {
  Eigen::VectorXd u, z;
  linear_record(30, 55, u, z);
  Dataset data = build_narx_dataset(u, z, 2);
  FittedNetwork model = fit(data, PkParams{2}, 1.0);
  CHECK_THROWS_AS(static_cast<void>(free_run_simulate(model, u, z.head(2))),
                  std::invalid_argument);  // no narx metadata
  model.narx_memory = 2;
  CHECK_THROWS_AS(static_cast<void>(free_run_simulate(model, u, z.head(3))),
                  std::invalid_argument);  // wrong seed count
}
