#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "volt/hyperopt.hpp"
#include "volt/regnet.hpp"
#include "volt/rng.hpp"

using namespace volt;

namespace {

Dataset random_dataset(int rows, int dim, std::uint64_t seed) {
  const CounterRng rng(seed);
  Dataset data;
  data.inputs.resize(rows, dim);
  data.outputs.resize(rows);
  std::uint64_t c = 0;
  for (int t = 0; t < rows; ++t) {
    for (int j = 0; j < dim; ++j) data.inputs(t, j) = rng.normal(c++);
    data.outputs[t] = rng.normal(c++);
  }
  return data;
}

HyperParamVector random_hyper(const KernelConfig& shape, std::uint64_t seed) {
  HyperParamVector v = pack_params(shape, 0.0);
  const CounterRng rng(seed);
  for (Eigen::Index i = 0; i < v.values.size(); ++i) {
    v.values[i] = rng.normal(static_cast<std::uint64_t>(i));
  }
  return v;
}

// Test-only dense Gaussian log-density via hand-rolled LU elimination;
// independent of the Cholesky path under test.
double dense_gaussian_nll(Eigen::MatrixXd cov, Eigen::VectorXd y) {
  const Eigen::Index n = cov.rows();
  double log_det = 0.0;
  Eigen::VectorXd rhs = y;
  for (Eigen::Index k = 0; k < n; ++k) {
    log_det += std::log(cov(k, k));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double factor = cov(i, k) / cov(k, k);
      cov.row(i).tail(n - k) -= factor * cov.row(k).tail(n - k);
      rhs[i] -= factor * rhs[k];
    }
  }
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    rhs[k] = (rhs[k] - cov.row(k).tail(n - k - 1).dot(rhs.tail(n - k - 1))) / cov(k, k);
  }
  return 0.5 * y.dot(rhs) + 0.5 * log_det +
         0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

}  // namespace

TEST_CASE("pack/unpack round trip") {
  const KernelConfig shape = MpkParams::zeros(3, 4);
  const HyperParamVector v = random_hyper(shape, 42);
  const auto [config, raw_noise] = unpack_params(shape, v);
  const HyperParamVector back = pack_params(config, raw_noise);
  CHECK(back.values.isApprox(v.values));

  const KernelConfig pk_shape = PkParams{3};
  const HyperParamVector vp = pack_params(pk_shape, 1.5);
  CHECK(vp.values.size() == 1);
  const auto [pk_cfg, pk_noise] = unpack_params(pk_shape, vp);
  CHECK(pk_noise == 1.5);
  CHECK(std::holds_alternative<PkParams>(pk_cfg));

  HyperParamVector wrong;
  wrong.values = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(unpack_params(pk_shape, wrong), std::invalid_argument);
}

TEST_CASE("nll of a single zero observation with unit noise") {
  Dataset data;
  data.inputs = Eigen::MatrixXd::Zero(1, 2);
  data.outputs = Eigen::VectorXd::Zero(1);
  // zero MPK parameters give K = [0]; raw_noise 1 gives sigma_n = 1
  const KernelConfig shape = MpkParams::zeros(2, 2);
  const HyperParamVector params = pack_params(shape, 1.0);
  CHECK(nll(params, data, shape) == doctest::Approx(0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("zero outputs kill the quadratic term") {
  Dataset data = random_dataset(6, 2, 5);
  const KernelConfig shape = PkParams{2};
  const HyperParamVector params = pack_params(shape, 1.0);
  const double full = nll(params, data, shape);
  data.outputs.setZero();
  const double quad_free = nll(params, data, shape);
  CHECK(quad_free < full);
  // remaining value is exactly 0.5 log det + (T/2) log 2pi, which the dense
  // oracle reproduces
  Eigen::MatrixXd ky = build_gram(data.inputs, shape);
  ky.diagonal().array() += 1.0;
  CHECK(quad_free == doctest::Approx(dense_gaussian_nll(ky, data.outputs)).epsilon(1e-10));
}

TEST_CASE("nll matches the dense Gaussian density oracle") {
  const Dataset data = random_dataset(8, 2, 123);
  const KernelConfig shape = MpkParams::zeros(2, 2);
  const HyperParamVector params = random_hyper(shape, 321);
  const auto [config, raw_noise] = unpack_params(shape, params);
  Eigen::MatrixXd ky = build_gram(data.inputs, config);
  ky.diagonal().array() += std::pow(raw_noise, 4);
  CHECK(nll(params, data, shape) ==
        doctest::Approx(dense_gaussian_nll(ky, data.outputs)).epsilon(1e-10));
}

TEST_CASE("nll gradient matches finite differences") {
  for (std::uint64_t trial = 0; trial < 6; ++trial) {
    const int dim = 2;
    const Dataset data = random_dataset(7, dim, 7000 + trial);
    const KernelConfig shape =
        trial % 2 == 0 ? KernelConfig(MpkParams::zeros(2, dim)) : KernelConfig(PkParams{3});
    HyperParamVector params = random_hyper(shape, 7100 + trial);
    if (trial == 2) params.values[0] = 0.0;  // zero raw parameter case
    const Eigen::VectorXd g = nll_gradient(params, data, shape);
    REQUIRE(g.size() == params.values.size());
    for (Eigen::Index c = 0; c < params.values.size(); ++c) {
      const double h = 1e-5 * std::max(1.0, std::abs(params.values[c]));
      HyperParamVector up = params, down = params;
      up.values[c] += h;
      down.values[c] -= h;
      const double fd = (nll(up, data, shape) - nll(down, data, shape)) / (2 * h);
      const double scale = std::max({1.0, std::abs(fd), std::abs(g[c])});
      CHECK(std::abs(g[c] - fd) / scale < 1e-4);
    }
  }
}

TEST_CASE("nll gradient of a zero raw parameter is zero") {
  const Dataset data = random_dataset(6, 2, 44);
  const KernelConfig shape = MpkParams::zeros(2, 2);
  HyperParamVector params = random_hyper(shape, 45);
  params.values[1] = 0.0;
  params.values[params.values.size() - 1] = 0.0;  // raw noise
  const Eigen::VectorXd g = nll_gradient(params, data, shape);
  CHECK(g[1] == 0.0);
  CHECK(g[g.size() - 1] == 0.0);
}

TEST_CASE("pk gradient reduces to the noise coordinate") {
  const Dataset data = random_dataset(6, 2, 46);
  const KernelConfig shape = PkParams{3};
  const HyperParamVector params = pack_params(shape, 0.9);
  const Eigen::VectorXd g = nll_gradient(params, data, shape);
  REQUIRE(g.size() == 1);
  CHECK(g[0] != 0.0);
}

TEST_CASE("cv folds are valid seeded partitions") {
  const auto folds = make_cv_folds(200, 5, 100, 100, 9);
  REQUIRE(folds.size() == 5);
  for (const Fold& fold : folds) {
    CHECK(fold.train.size() == 100);
    CHECK(fold.validation.size() == 100);
    std::vector<bool> seen(200, false);
    for (int i : fold.train) seen[static_cast<std::size_t>(i)] = true;
    for (int i : fold.validation) {
      CHECK(!seen[static_cast<std::size_t>(i)]);  // disjoint
      seen[static_cast<std::size_t>(i)] = true;
    }
  }
  // deterministic and seed-sensitive
  CHECK(make_cv_folds(200, 5, 100, 100, 9)[0].train == folds[0].train);
  CHECK(make_cv_folds(200, 5, 100, 100, 10)[0].train != folds[0].train);
  CHECK_THROWS_AS(make_cv_folds(10, 2, 8, 8, 1), std::invalid_argument);
}

TEST_CASE("cv loss: zero outputs give zero loss and zero gradient") {
  Dataset data = random_dataset(30, 2, 60);
  data.outputs.setZero();
  const KernelConfig shape = MpkParams::zeros(2, 2);
  const HyperParamVector params = random_hyper(shape, 61);
  const auto folds = make_cv_folds(30, 3, 15, 15, 3);
  CHECK(cv_loss(params, data, shape, folds) == 0.0);
  CHECK(cv_gradient(params, data, shape, folds).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single fold with one validation point is that squared residual") {
  const Dataset data = random_dataset(6, 2, 62);
  const KernelConfig shape = PkParams{2};
  const HyperParamVector params = pack_params(shape, 0.8);
  Fold fold;
  fold.train = {0, 1, 2, 3, 4};
  fold.validation = {5};

  const auto [config, raw_noise] = unpack_params(shape, params);
  Dataset train;
  train.inputs = data.inputs.topRows(5);
  train.outputs = data.outputs.head(5);
  const FittedNetwork model = fit(train, config, raw_noise * raw_noise);
  const double pred = predict(model, data.inputs.bottomRows(1))[0];
  const double expected = (pred - data.outputs[5]) * (pred - data.outputs[5]);
  CHECK(cv_loss(params, data, shape, {fold}) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("cv loss over two folds equals independent recomputation") {
  const Dataset data = random_dataset(20, 2, 63);
  const KernelConfig shape = MpkParams::zeros(2, 2);
  const HyperParamVector params = random_hyper(shape, 64);
  const auto folds = make_cv_folds(20, 2, 12, 8, 77);
  const auto [config, raw_noise] = unpack_params(shape, params);

  double manual = 0.0;
  for (const Fold& fold : folds) {
    Dataset train;
    train.inputs.resize(static_cast<Eigen::Index>(fold.train.size()), 2);
    train.outputs.resize(static_cast<Eigen::Index>(fold.train.size()));
    for (std::size_t i = 0; i < fold.train.size(); ++i) {
      train.inputs.row(static_cast<Eigen::Index>(i)) = data.inputs.row(fold.train[i]);
      train.outputs[static_cast<Eigen::Index>(i)] = data.outputs[fold.train[i]];
    }
    const FittedNetwork model = fit(train, config, std::max(raw_noise * raw_noise, 1e-8));
    double sse = 0.0;
    for (int idx : fold.validation) {
      const double pred = predict(model, data.inputs.row(idx))[0];
      sse += (pred - data.outputs[idx]) * (pred - data.outputs[idx]);
    }
    manual += sse / static_cast<double>(fold.validation.size());
  }
  CHECK(cv_loss(params, data, shape, folds) == doctest::Approx(manual).epsilon(1e-9));
}

TEST_CASE("cv gradient matches finite differences") {
  for (std::uint64_t trial = 0; trial < 4; ++trial) {
    const Dataset data = random_dataset(18, 2, 8000 + trial);
    const KernelConfig shape =
        trial % 2 == 0 ? KernelConfig(MpkParams::zeros(2, 2)) : KernelConfig(PkParams{2});
    const HyperParamVector params = random_hyper(shape, 8100 + trial);
    const auto folds = make_cv_folds(18, 2, 10, 8, 5 + trial);
    const Eigen::VectorXd g = cv_gradient(params, data, shape, folds);
    for (Eigen::Index c = 0; c < params.values.size(); ++c) {
      const double h = 1e-5 * std::max(1.0, std::abs(params.values[c]));
      HyperParamVector up = params, down = params;
      up.values[c] += h;
      down.values[c] -= h;
      const double fd =
          (cv_loss(up, data, shape, folds) - cv_loss(down, data, shape, folds)) / (2 * h);
      const double scale = std::max({1.0, std::abs(fd), std::abs(g[c])});
      CHECK(std::abs(g[c] - fd) / scale < 1e-4);
    }
  }
}

TEST_CASE("single-fold pk cv gradient has only the noise coordinate") {
  const Dataset data = random_dataset(12, 2, 83);
  const KernelConfig shape = PkParams{2};
  const HyperParamVector params = pack_params(shape, 0.7);
  const auto folds = make_cv_folds(12, 1, 8, 4, 2);
  const Eigen::VectorXd g = cv_gradient(params, data, shape, folds);
  REQUIRE(g.size() == 1);
  CHECK(g[0] != 0.0);
}

TEST_CASE("minimize solves a convex quadratic") {
  // f(x) = (x - a)' A (x - a), A SPD
  Eigen::MatrixXd A(2, 2);
  A << 2.0, 0.3, 0.3, 1.0;
  Eigen::VectorXd a(2);
  a << 1.5, -2.0;
  const ObjectiveFn f = [&](const HyperParamVector& p) {
    const Eigen::VectorXd d = p.values - a;
    return d.dot(A * d);
  };
  const GradientFn g = [&](const HyperParamVector& p) {
    return Eigen::VectorXd(2.0 * A * (p.values - a));
  };
  HyperParamVector init;
  init.values = Eigen::VectorXd::Zero(2);
  OptimizerConfig config;
  config.max_iters = 5000;
  config.tol = 1e-14;
  auto [solution, report] = minimize(f, g, init, config);
  CHECK((solution.values - a).norm() < 1e-6);
  CHECK(report.converged);
}

TEST_CASE("minimize returns immediately at a stationary point") {
  const ObjectiveFn f = [](const HyperParamVector& p) { return p.values.squaredNorm(); };
  const GradientFn g = [](const HyperParamVector& p) {
    return Eigen::VectorXd(2.0 * p.values);
  };
  HyperParamVector init;
  init.values = Eigen::VectorXd::Zero(3);
  auto [solution, report] = minimize(f, g, init, OptimizerConfig{});
  CHECK(report.converged);
  CHECK(report.iterations == 0);
  CHECK(solution.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("accepted losses are non-increasing") {
  const Dataset data = random_dataset(12, 2, 90);
  const KernelConfig shape = MpkParams::zeros(2, 2);
  OptimizerConfig config;
  config.max_iters = 60;
  auto [solution, report] =
      optimize(TuningObjective::MarginalLikelihood, default_init(shape, data), data, shape, {},
               config);
  REQUIRE(report.loss_trace.size() > 1);
  for (std::size_t i = 1; i < report.loss_trace.size(); ++i) {
    CHECK(report.loss_trace[i] <= report.loss_trace[i - 1]);
  }
}

TEST_CASE("objective failure aborts with the last accepted iterate") {
  int calls = 0;
  const ObjectiveFn f = [&calls](const HyperParamVector& p) {
    if (++calls > 3) throw std::runtime_error("synthetic failure");
    return p.values.squaredNorm();
  };
  const GradientFn g = [](const HyperParamVector& p) {
    return Eigen::VectorXd(2.0 * p.values);
  };
  HyperParamVector init;
  init.values = Eigen::VectorXd::Ones(2);
  auto [solution, report] = minimize(f, g, init, OptimizerConfig{});
  CHECK(!report.converged);
  CHECK(!report.abort_reason.empty());
  CHECK(solution.values.allFinite());
}

TEST_CASE("fixed noise freezes the coordinate") {
  const Dataset data = random_dataset(10, 2, 95);
  const KernelConfig shape = MpkParams::zeros(2, 2);
  OptimizerConfig config;
  config.max_iters = 40;
  config.fix_noise = true;
  const HyperParamVector init = default_init(shape, data);
  auto [solution, report] =
      optimize(TuningObjective::MarginalLikelihood, init, data, shape, {}, config);
  CHECK(solution.values[solution.values.size() - 1] ==
        init.values[init.values.size() - 1]);
}

TEST_CASE("default init derives the documented values") {
  const Dataset data = random_dataset(20, 3, 96);
  const KernelConfig shape = MpkParams::zeros(2, 3);
  const HyperParamVector init = default_init(shape, data);
  const auto [config, raw_noise] = unpack_params(shape, init);
  const MpkParams& mpk = std::get<MpkParams>(config);
  const double expected = 1.0 / (2.0 * 3.0);
  CHECK(mpk.raw_offsets.array().square().isApproxToConstant(expected, 1e-12));
  CHECK(mpk.raw_increments.array().square().isApproxToConstant(expected, 1e-12));
  const double var_y = (data.outputs.array() - data.outputs.mean()).square().mean();
  CHECK(std::pow(raw_noise, 4) == doctest::Approx(0.1 * var_y).epsilon(1e-12));
}

TEST_CASE("optimizer report JSON includes the trace") {
  OptimizerReport report;
  report.iterations = 3;
  report.final_loss = 1.25;
  report.loss_trace = {2.0, 1.5, 1.25};
  report.converged = true;
  report.final_step_size = 0.01;
  const std::string text = report_to_json_text(report);
  CHECK(text.find("loss_trace") != std::string::npos);
  CHECK(text.find("1.25") != std::string::npos);
}
