#ifndef VOLT_HYPEROPT_HPP
#define VOLT_HYPEROPT_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "volt/dataset.hpp"
#include "volt/kernels.hpp"

namespace volt {

// Flat hyperparameter packing, stable by contract:
//   MPK: [raw_offsets (r), raw_increments row-major (r*d), raw_noise]
//   PK:  [raw_noise]
// raw_noise is the theta with sigma_n = theta^2; the regularizer weight used
// when instantiating a model is gamma = sigma_n, so the diagonal added to the
// Gram is theta^4 in both the likelihood and CV objectives.
struct HyperParamVector {
  Eigen::VectorXd values;
};

HyperParamVector pack_params(const KernelConfig& kernel, double raw_noise);
// `shape` supplies kind/degree/input_dim; values come from the vector.
std::pair<KernelConfig, double> unpack_params(const KernelConfig& shape,
                                              const HyperParamVector& params);

// Derived kernel parameters all equal to 1/(r*d) and sigma_n^2 = 0.1*var(y).
HyperParamVector default_init(const KernelConfig& shape, const Dataset& data);

// Negative log marginal likelihood of the training outputs under the GP
// reading of the regularization network:
//   1/2 y'K_y^{-1} y + 1/2 log det K_y + T/2 log 2pi,  K_y = K + sigma_n^2 I.
double nll(const HyperParamVector& params, const Dataset& data, const KernelConfig& shape);

// Exact gradient: 1/2 tr((K_y^{-1} - alpha alpha') dK_y/dtheta) per raw
// parameter, noise chained through sigma_n = theta^2.
Eigen::VectorXd nll_gradient(const HyperParamVector& params, const Dataset& data,
                             const KernelConfig& shape);

struct Fold {
  std::vector<int> train;
  std::vector<int> validation;
};

// Seeded permutations of [0, total): first `train_size` indices train, next
// `validation_size` validate. One permutation per fold.
std::vector<Fold> make_cv_folds(int total, int n_folds, int train_size, int validation_size,
                                std::uint64_t seed);

// Sum over folds of the validation MSE after fitting on the fold's train
// split with the given hyperparameters.
double cv_loss(const HyperParamVector& params, const Dataset& data, const KernelConfig& shape,
               const std::vector<Fold>& folds);

Eigen::VectorXd cv_gradient(const HyperParamVector& params, const Dataset& data,
                            const KernelConfig& shape, const std::vector<Fold>& folds);

struct OptimizerConfig {
  int max_iters = 5000;
  double tol = 1e-6;
  double initial_step = 1e-2;
  bool fix_noise = false;  // freeze the raw_noise coordinate
};

struct OptimizerReport {
  int iterations = 0;  // total loop iterations, accepted + rejected
  double final_loss = 0.0;
  std::vector<double> loss_trace;  // initial loss then the accepted-step losses
  double final_step_size = 0.0;
  bool converged = false;
  std::string abort_reason;  // nonempty when an objective failure aborted the run
};

using ObjectiveFn = std::function<double(const HyperParamVector&)>;
using GradientFn = std::function<Eigen::VectorXd(const HyperParamVector&)>;

// Gradient descent with multiplicative step adaptation: a candidate step that
// increases the loss is rejected and the step halved; an accepted step
// multiplies it by 1.2. Terminates on relative loss change < tol across an
// accepted step, on a zero gradient, or at max_iters.
std::pair<HyperParamVector, OptimizerReport> minimize(const ObjectiveFn& objective,
                                                      const GradientFn& gradient,
                                                      HyperParamVector init,
                                                      const OptimizerConfig& config);

enum class TuningObjective { MarginalLikelihood, CrossValidation };

// Ties the generic optimizer to nll/cv on a dataset. Static-kernel (PK) Gram
// and cross blocks are precomputed once across iterations.
std::pair<HyperParamVector, OptimizerReport> optimize(TuningObjective objective,
                                                      const HyperParamVector& init,
                                                      const Dataset& data,
                                                      const KernelConfig& shape,
                                                      const std::vector<Fold>& folds,
                                                      const OptimizerConfig& config);

std::string report_to_json_text(const OptimizerReport& report);

}  // namespace volt

#endif  // VOLT_HYPEROPT_HPP
