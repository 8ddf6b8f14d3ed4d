#include "volt/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace volt {

void Dataset::validate() const {
  if (inputs.rows() != outputs.size()) {
    throw std::invalid_argument("Dataset: input row count must equal output length");
  }
  if (normalization) {
    if (normalization->mean.size() != inputs.cols() ||
        normalization->std_dev.size() != inputs.cols()) {
      throw std::invalid_argument("Dataset: normalization record dimension mismatch");
    }
    if ((normalization->std_dev.array() <= 0.0).any()) {
      throw std::invalid_argument("Dataset: normalization stds must be strictly positive");
    }
  }
}

Normalization compute_normalization(const Eigen::MatrixXd& inputs) {
  if (inputs.rows() < 1) throw std::invalid_argument("compute_normalization: empty inputs");
  Normalization norm;
  norm.mean = inputs.colwise().mean();
  Eigen::MatrixXd centered = inputs.rowwise() - norm.mean.transpose();
  norm.std_dev = (centered.array().square().colwise().sum() /
                  static_cast<double>(inputs.rows()))
                     .sqrt()
                     .transpose();
  if ((norm.std_dev.array() <= 0.0).any()) {
    throw std::invalid_argument("compute_normalization: zero-variance input column");
  }
  return norm;
}

Eigen::MatrixXd apply_normalization(const Normalization& norm, const Eigen::MatrixXd& inputs) {
  if (inputs.cols() != norm.mean.size()) {
    throw std::invalid_argument("apply_normalization: dimension mismatch");
  }
  Eigen::MatrixXd out = inputs.rowwise() - norm.mean.transpose();
  out.array().rowwise() /= norm.std_dev.transpose().array();
  return out;
}

Dataset with_normalization(Dataset data) {
  data.normalization = compute_normalization(data.inputs);
  return data;
}

Eigen::MatrixXd effective_inputs(const Dataset& data) {
  if (!data.normalization) return data.inputs;
  return apply_normalization(*data.normalization, data.inputs);
}

}  // namespace volt
