#include "volt/hyperopt.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <stdexcept>

#include "volt/regnet.hpp"
#include "volt/rng.hpp"

namespace volt {

HyperParamVector pack_params(const KernelConfig& kernel, double raw_noise) {
  HyperParamVector out;
  if (const MpkParams* mpk = std::get_if<MpkParams>(&kernel)) {
    mpk->validate();
    const int r = mpk->degree;
    const int d = mpk->input_dim;
    out.values.resize(r + r * d + 1);
    out.values.head(r) = mpk->raw_offsets;
    for (int i = 0; i < r; ++i) {
      out.values.segment(r + i * d, d) = mpk->raw_increments.row(i).transpose();
    }
    out.values[r + r * d] = raw_noise;
  } else {
    out.values.resize(1);
    out.values[0] = raw_noise;
  }
  return out;
}

std::pair<KernelConfig, double> unpack_params(const KernelConfig& shape,
                                              const HyperParamVector& params) {
  if (const MpkParams* mpk = std::get_if<MpkParams>(&shape)) {
    const int r = mpk->degree;
    const int d = mpk->input_dim;
    if (params.values.size() != r + r * d + 1) {
      throw std::invalid_argument("unpack_params: vector length does not match MPK shape");
    }
    MpkParams out = *mpk;
    out.raw_offsets = params.values.head(r);
    out.raw_increments.resize(r, d);
    for (int i = 0; i < r; ++i) {
      out.raw_increments.row(i) = params.values.segment(r + i * d, d).transpose();
    }
    return {KernelConfig(out), params.values[r + r * d]};
  }
  if (params.values.size() != 1) {
    throw std::invalid_argument("unpack_params: vector length does not match PK shape");
  }
  return {shape, params.values[0]};
}

HyperParamVector default_init(const KernelConfig& shape, const Dataset& data) {
  const double var_y =
      data.outputs.size() > 0
          ? (data.outputs.array() - data.outputs.mean()).square().mean()
          : 1.0;
  // sigma_n = theta^2 and sigma_n^2 = 0.1 var(y)  =>  theta = (0.1 var y)^(1/4)
  const double raw_noise = std::pow(std::max(0.1 * var_y, 1e-12), 0.25);
  if (const MpkParams* mpk = std::get_if<MpkParams>(&shape)) {
    MpkParams init = *mpk;
    const double derived = 1.0 / (static_cast<double>(mpk->degree) * mpk->input_dim);
    const double raw = std::sqrt(derived);
    init.raw_offsets = Eigen::VectorXd::Constant(mpk->degree, raw);
    init.raw_increments = Eigen::MatrixXd::Constant(mpk->degree, mpk->input_dim, raw);
    return pack_params(KernelConfig(init), raw_noise);
  }
  return pack_params(shape, raw_noise);
}

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)

struct NllEvaluation {
  double value = 0.0;
  Eigen::VectorXd alpha;
  Eigen::MatrixXd ky_inverse;
  bool with_inverse = false;
};

// Shared core: K is the kernel Gram (without the noise diagonal).
NllEvaluation nll_core(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double raw_noise,
                       bool with_inverse) {
  const double sigma2 = std::pow(raw_noise, 4);
  Eigen::MatrixXd ky = K;
  ky.diagonal().array() += sigma2;
  const SpdFactor factor = spd_factorize(ky);
  NllEvaluation eval;
  eval.alpha = factor.llt.solve(y);
  eval.value = 0.5 * y.dot(eval.alpha) + 0.5 * factor.log_det +
               static_cast<double>(y.size()) * kHalfLog2Pi;
  if (with_inverse) {
    eval.ky_inverse = factor.llt.solve(
        Eigen::MatrixXd::Identity(K.rows(), K.cols()));
    eval.with_inverse = true;
  }
  return eval;
}

Eigen::VectorXd nll_gradient_core(const Eigen::MatrixXd& x, const Eigen::MatrixXd& K,
                                  const Eigen::VectorXd& y, const KernelConfig& config,
                                  double raw_noise, bool fix_noise) {
  const NllEvaluation eval = nll_core(K, y, raw_noise, /*with_inverse=*/true);
  const Eigen::MatrixXd w = eval.ky_inverse - eval.alpha * eval.alpha.transpose();
  const int n_kernel = kernel_param_count(config);
  Eigen::VectorXd grad(n_kernel + 1);
  if (n_kernel > 0) {
    grad.head(n_kernel) = 0.5 * weighted_pair_gradient(x, x, w, config);
  }
  // d K_y / d theta_noise = 4 theta^3 I
  grad[n_kernel] =
      fix_noise ? 0.0 : 0.5 * w.trace() * 4.0 * raw_noise * raw_noise * raw_noise;
  return grad;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

Eigen::VectorXd select_entries(const Eigen::VectorXd& v, const std::vector<int>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  return out;
}

struct FoldEvaluation {
  double mse = 0.0;
  Eigen::VectorXd gradient;  // empty unless requested
};

FoldEvaluation cv_fold_eval(const Eigen::MatrixXd& x_tr, const Eigen::VectorXd& y_tr,
                            const Eigen::MatrixXd& x_val, const Eigen::VectorXd& y_val,
                            const KernelConfig& config, double raw_noise, bool with_gradient,
                            bool fix_noise, const Eigen::MatrixXd* k_tr_cached,
                            const Eigen::MatrixXd* k_cross_cached) {
  const double gamma2 = std::pow(raw_noise, 4);
  Eigen::MatrixXd k_tr = k_tr_cached ? *k_tr_cached : build_gram(x_tr, config);
  k_tr.diagonal().array() += gamma2;
  const SpdFactor factor = spd_factorize(k_tr);
  const Eigen::VectorXd alpha = factor.llt.solve(y_tr);
  const Eigen::MatrixXd k_cross =
      k_cross_cached ? *k_cross_cached : build_cross(x_val, x_tr, config);
  const Eigen::VectorXd residual = k_cross * alpha - y_val;
  const double n_val = static_cast<double>(y_val.size());

  FoldEvaluation out;
  out.mse = residual.squaredNorm() / n_val;
  if (!with_gradient) return out;

  const int n_kernel = kernel_param_count(config);
  out.gradient = Eigen::VectorXd::Zero(n_kernel + 1);
  const double scale = 2.0 / n_val;
  const Eigen::VectorXd back = factor.llt.solve(k_cross.transpose() * residual);
  if (n_kernel > 0) {
    // d mse/d theta = (2/n) e' [ (dK_cross) alpha - K_cross K_y^{-1} (dK_y) alpha ]
    const Eigen::MatrixXd w_cross = scale * residual * alpha.transpose();
    const Eigen::MatrixXd w_train = -scale * back * alpha.transpose();
    out.gradient.head(n_kernel) = weighted_pair_gradient(x_val, x_tr, w_cross, config) +
                                  weighted_pair_gradient(x_tr, x_tr, w_train, config);
  }
  if (!fix_noise) {
    const double dnoise = 4.0 * raw_noise * raw_noise * raw_noise;
    out.gradient[n_kernel] = -scale * dnoise * back.dot(alpha);
  }
  return out;
}

}  // namespace

double nll(const HyperParamVector& params, const Dataset& data, const KernelConfig& shape) {
  data.validate();
  const auto [config, raw_noise] = unpack_params(shape, params);
  const Eigen::MatrixXd x = effective_inputs(data);
  return nll_core(build_gram(x, config), data.outputs, raw_noise, false).value;
}

Eigen::VectorXd nll_gradient(const HyperParamVector& params, const Dataset& data,
                             const KernelConfig& shape) {
  data.validate();
  const auto [config, raw_noise] = unpack_params(shape, params);
  const Eigen::MatrixXd x = effective_inputs(data);
  return nll_gradient_core(x, build_gram(x, config), data.outputs, config, raw_noise, false);
}

std::vector<Fold> make_cv_folds(int total, int n_folds, int train_size, int validation_size,
                                std::uint64_t seed) {
  if (train_size < 1 || validation_size < 1 || train_size + validation_size > total) {
    throw std::invalid_argument("make_cv_folds: split sizes exceed sample count");
  }
  std::vector<Fold> folds(static_cast<std::size_t>(n_folds));
  const CounterRng rng(seed);
  std::uint64_t counter = 0;
  for (int f = 0; f < n_folds; ++f) {
    std::vector<int> perm(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) perm[static_cast<std::size_t>(i)] = i;
    // Fisher-Yates driven by the counter stream.
    for (int i = total - 1; i > 0; --i) {
      const auto j = static_cast<int>(rng.bits(counter++) % static_cast<std::uint64_t>(i + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    Fold& fold = folds[static_cast<std::size_t>(f)];
    fold.train.assign(perm.begin(), perm.begin() + train_size);
    fold.validation.assign(perm.begin() + train_size,
                           perm.begin() + train_size + validation_size);
  }
  return folds;
}

double cv_loss(const HyperParamVector& params, const Dataset& data, const KernelConfig& shape,
               const std::vector<Fold>& folds) {
  data.validate();
  if (folds.empty()) throw std::invalid_argument("cv_loss: no folds");
  const auto [config, raw_noise] = unpack_params(shape, params);
  const Eigen::MatrixXd x = effective_inputs(data);
  double total = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    try {
      total += cv_fold_eval(select_rows(x, folds[f].train),
                            select_entries(data.outputs, folds[f].train),
                            select_rows(x, folds[f].validation),
                            select_entries(data.outputs, folds[f].validation), config,
                            raw_noise, false, false, nullptr, nullptr)
                   .mse;
    } catch (const std::exception& e) {
      throw std::runtime_error("cv_loss: fold " + std::to_string(f) + ": " + e.what());
    }
  }
  return total;
}

Eigen::VectorXd cv_gradient(const HyperParamVector& params, const Dataset& data,
                            const KernelConfig& shape, const std::vector<Fold>& folds) {
  data.validate();
  if (folds.empty()) throw std::invalid_argument("cv_gradient: no folds");
  const auto [config, raw_noise] = unpack_params(shape, params);
  const Eigen::MatrixXd x = effective_inputs(data);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(kernel_param_count(config) + 1);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    try {
      total += cv_fold_eval(select_rows(x, folds[f].train),
                            select_entries(data.outputs, folds[f].train),
                            select_rows(x, folds[f].validation),
                            select_entries(data.outputs, folds[f].validation), config,
                            raw_noise, true, false, nullptr, nullptr)
                   .gradient;
    } catch (const std::exception& e) {
      throw std::runtime_error("cv_gradient: fold " + std::to_string(f) + ": " + e.what());
    }
  }
  return total;
}

std::pair<HyperParamVector, OptimizerReport> minimize(const ObjectiveFn& objective,
                                                      const GradientFn& gradient,
                                                      HyperParamVector init,
                                                      const OptimizerConfig& config) {
  OptimizerReport report;
  HyperParamVector x = std::move(init);
  double f_current;
  try {
    f_current = objective(x);
  } catch (const std::exception& e) {
    report.abort_reason = std::string("initial objective evaluation failed: ") + e.what();
    report.final_loss = std::numeric_limits<double>::quiet_NaN();
    return {x, report};
  }
  report.loss_trace.push_back(f_current);
  // initial_step is the length of the first attempted move; dividing by the
  // initial gradient norm once fixes the units so the multiplicative
  // adaptation starts from a sane scale regardless of the objective's range.
  double step = config.initial_step;
  bool step_normalized = false;
  int quiet_steps = 0;  // consecutive accepted steps below tol

  for (int it = 0; it < config.max_iters; ++it) {
    report.iterations = it + 1;
    Eigen::VectorXd g;
    try {
      g = gradient(x);
    } catch (const std::exception& e) {
      report.abort_reason = std::string("gradient evaluation failed: ") + e.what();
      break;
    }
    if (g.norm() == 0.0) {
      report.converged = true;
      report.iterations = it;  // stationary before taking a step
      break;
    }
    if (!step_normalized) {
      step /= std::max(1.0, g.norm());
      step_normalized = true;
    }
    HyperParamVector candidate;
    candidate.values = x.values - step * g;
    double f_candidate;
    try {
      f_candidate = objective(candidate);
    } catch (const std::exception& e) {
      report.abort_reason = std::string("objective evaluation failed: ") + e.what();
      break;
    }
    if (!std::isfinite(f_candidate) || f_candidate > f_current) {
      step *= 0.5;
      if (step < 1e-18) {  // step underflow: no descent direction left
        report.converged = true;
        break;
      }
      continue;
    }
    const double rel_change = (f_current - f_candidate) / std::max(1.0, std::abs(f_current));
    x = std::move(candidate);
    f_current = f_candidate;
    report.loss_trace.push_back(f_current);
    step *= 1.2;
    // The growing step makes a genuinely tiny first accepted move look like
    // convergence; ask for a short streak below tol before stopping.
    quiet_steps = rel_change < config.tol ? quiet_steps + 1 : 0;
    if (quiet_steps >= 3) {
      report.converged = true;
      break;
    }
  }
  report.final_loss = f_current;
  report.final_step_size = step;
  return {x, report};
}

namespace {

// Zeroes the raw_noise coordinate of a gradient when the noise is frozen.
GradientFn with_fixed_noise(GradientFn inner, bool fix_noise) {
  if (!fix_noise) return inner;
  return [inner = std::move(inner)](const HyperParamVector& p) {
    Eigen::VectorXd g = inner(p);
    g[g.size() - 1] = 0.0;
    return g;
  };
}

}  // namespace

std::pair<HyperParamVector, OptimizerReport> optimize(TuningObjective objective,
                                                      const HyperParamVector& init,
                                                      const Dataset& data,
                                                      const KernelConfig& shape,
                                                      const std::vector<Fold>& folds,
                                                      const OptimizerConfig& config) {
  data.validate();
  const Eigen::MatrixXd x = effective_inputs(data);
  const bool kernel_static = std::holds_alternative<PkParams>(shape);

  if (objective == TuningObjective::MarginalLikelihood) {
    // PK Gram does not depend on the tuned vector; build it once.
    std::shared_ptr<Eigen::MatrixXd> cached;
    if (kernel_static) cached = std::make_shared<Eigen::MatrixXd>(build_gram(x, shape));
    ObjectiveFn f = [&, cached](const HyperParamVector& p) {
      const auto [cfg, raw_noise] = unpack_params(shape, p);
      const Eigen::MatrixXd& K = cached ? *cached : build_gram(x, cfg);
      return nll_core(K, data.outputs, raw_noise, false).value;
    };
    GradientFn g = with_fixed_noise(
        [&, cached](const HyperParamVector& p) {
          const auto [cfg, raw_noise] = unpack_params(shape, p);
          const Eigen::MatrixXd& K = cached ? *cached : build_gram(x, cfg);
          return nll_gradient_core(x, K, data.outputs, cfg, raw_noise, config.fix_noise);
        },
        config.fix_noise);
    return minimize(f, g, init, config);
  }

  if (folds.empty()) throw std::invalid_argument("optimize: CV objective requires folds");
  struct FoldData {
    Eigen::MatrixXd x_tr, x_val;
    Eigen::VectorXd y_tr, y_val;
    std::shared_ptr<Eigen::MatrixXd> k_tr, k_cross;  // PK caches
  };
  auto prepared = std::make_shared<std::vector<FoldData>>();
  for (const Fold& fold : folds) {
    FoldData fd;
    fd.x_tr = select_rows(x, fold.train);
    fd.y_tr = select_entries(data.outputs, fold.train);
    fd.x_val = select_rows(x, fold.validation);
    fd.y_val = select_entries(data.outputs, fold.validation);
    if (kernel_static) {
      fd.k_tr = std::make_shared<Eigen::MatrixXd>(build_gram(fd.x_tr, shape));
      fd.k_cross = std::make_shared<Eigen::MatrixXd>(build_cross(fd.x_val, fd.x_tr, shape));
    }
    prepared->push_back(std::move(fd));
  }
  ObjectiveFn f = [&, prepared](const HyperParamVector& p) {
    const auto [cfg, raw_noise] = unpack_params(shape, p);
    double total = 0.0;
    for (const FoldData& fd : *prepared) {
      total += cv_fold_eval(fd.x_tr, fd.y_tr, fd.x_val, fd.y_val, cfg, raw_noise, false,
                            false, fd.k_tr.get(), fd.k_cross.get())
                   .mse;
    }
    return total;
  };
  GradientFn g = with_fixed_noise(
      [&, prepared](const HyperParamVector& p) {
        const auto [cfg, raw_noise] = unpack_params(shape, p);
        Eigen::VectorXd total = Eigen::VectorXd::Zero(kernel_param_count(cfg) + 1);
        for (const FoldData& fd : *prepared) {
          total += cv_fold_eval(fd.x_tr, fd.y_tr, fd.x_val, fd.y_val, cfg, raw_noise, true,
                                config.fix_noise, fd.k_tr.get(), fd.k_cross.get())
                       .gradient;
        }
        return total;
      },
      config.fix_noise);
  return minimize(f, g, init, config);
}

std::string report_to_json_text(const OptimizerReport& report) {
  nlohmann::json doc;
  doc["iterations"] = report.iterations;
  doc["final_loss"] = report.final_loss;
  doc["final_step_size"] = report.final_step_size;
  doc["converged"] = report.converged;
  doc["loss_trace"] = report.loss_trace;
  if (!report.abort_reason.empty()) doc["abort_reason"] = report.abort_reason;
  return doc.dump(2);
}

}  // namespace volt
