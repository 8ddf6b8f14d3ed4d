#ifndef VOLT_REGNET_HPP
#define VOLT_REGNET_HPP

#include <Eigen/Cholesky>
#include <string>

#include "volt/dataset.hpp"
#include "volt/kernels.hpp"
#include "volt/penalties.hpp"

namespace volt {

// Representer-theorem model: predictions are K_cross * alpha over the stored
// training inputs.
struct FittedNetwork {
  Eigen::MatrixXd training_inputs;  // normalized when a record is present
  Eigen::VectorXd alpha;
  KernelConfig kernel;
  double gamma = 1.0;  // (K + gamma^2 I) alpha = y
  std::optional<Normalization> normalization;
  std::optional<int> narx_memory;  // set when the model was trained on NARX rows

  // Factorization byproducts kept for reuse.
  double log_det = 0.0;
  double jitter = 0.0;
};

// Cholesky of an SPD matrix with escalating-jitter retry: on failure adds
// delta * mean(diag) for delta = 1e-10, 1e-9, ..., 1e-4, then throws
// IllConditionedError.
struct SpdFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_det = 0.0;
  double jitter = 0.0;
};
SpdFactor spd_factorize(const Eigen::MatrixXd& matrix);

FittedNetwork fit(const Dataset& data, const KernelConfig& kernel, double gamma);

Eigen::VectorXd predict(const FittedNetwork& model, const Eigen::MatrixXd& inputs);

// Weighted ridge on the explicit monomial features:
//   min_c sum_t (y_t - phi(u_t)' c)^2 + gamma^2 sum_q c_q^2 / lambda_q
// with c_q pinned to 0 where lambda_q = 0. Small-instance verification oracle
// for the kernel path; both must honor the dataset's normalization record.
Eigen::VectorXd explicit_ridge_oracle(const Dataset& data, const PenaltyTable& penalties,
                                      double gamma);

// phi(u)' c predictions of the explicit model at new inputs.
Eigen::VectorXd explicit_ridge_predict(const Eigen::VectorXd& weights,
                                       const PenaltyTable& penalties,
                                       const Eigen::MatrixXd& inputs,
                                       const std::optional<Normalization>& normalization);

// JSON round trip for CLI reuse.
std::string network_to_json_text(const FittedNetwork& model);
FittedNetwork network_from_json_text(const std::string& text);
FittedNetwork load_network_json(const std::string& path);

}  // namespace volt

#endif  // VOLT_REGNET_HPP
