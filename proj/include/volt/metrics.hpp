#ifndef VOLT_METRICS_HPP
#define VOLT_METRICS_HPP

#include <Eigen/Core>

namespace volt {

// 100 * (1 - ||z - zhat||_1 / ||z - mean(z)||_1). May be negative. Throws
// std::invalid_argument on length mismatch, length < 2, or constant z.
double fit_percent(const Eigen::VectorXd& z, const Eigen::VectorXd& zhat);

// sqrt(mean((z - zhat)^2)). Throws on empty or mismatched vectors.
double rmse(const Eigen::VectorXd& z, const Eigen::VectorXd& zhat);

}  // namespace volt

#endif  // VOLT_METRICS_HPP
