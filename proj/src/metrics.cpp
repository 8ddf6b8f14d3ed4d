#include "volt/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace volt {

double fit_percent(const Eigen::VectorXd& z, const Eigen::VectorXd& zhat) {
  if (z.size() != zhat.size()) throw std::invalid_argument("fit_percent: length mismatch");
  if (z.size() < 2) throw std::invalid_argument("fit_percent: need at least two samples");
  const double z_bar = z.mean();
  const double denom = (z.array() - z_bar).abs().sum();
  if (denom == 0.0) {
    throw std::invalid_argument("fit_percent: constant reference signal (zero denominator)");
  }
  const double num = (z - zhat).array().abs().sum();
  return 100.0 * (1.0 - num / denom);
}

double rmse(const Eigen::VectorXd& z, const Eigen::VectorXd& zhat) {
  if (z.size() != zhat.size()) throw std::invalid_argument("rmse: length mismatch");
  if (z.size() == 0) throw std::invalid_argument("rmse: empty vectors");
  return std::sqrt((z - zhat).squaredNorm() / static_cast<double>(z.size()));
}

}  // namespace volt
