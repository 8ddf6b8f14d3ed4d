#ifndef VOLT_DATASET_HPP
#define VOLT_DATASET_HPP

#include <Eigen/Core>
#include <optional>

namespace volt {

// Per-column z-scoring record, computed on training inputs and replayed on
// anything fed to the fitted model.
struct Normalization {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_dev;
};

struct Dataset {
  Eigen::MatrixXd inputs;   // T x d, rows are regression inputs
  Eigen::VectorXd outputs;  // length T
  std::optional<Normalization> normalization;

  Eigen::Index rows() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }
  void validate() const;
};

// Column means / stds of the given inputs. Throws std::invalid_argument on a
// zero-variance column (the record's stds must be strictly positive).
Normalization compute_normalization(const Eigen::MatrixXd& inputs);

Eigen::MatrixXd apply_normalization(const Normalization& norm, const Eigen::MatrixXd& inputs);

// Attaches a normalization record computed from the dataset's own inputs.
Dataset with_normalization(Dataset data);

// Inputs as seen by kernels: z-scored when the record is present.
Eigen::MatrixXd effective_inputs(const Dataset& data);

}  // namespace volt

#endif  // VOLT_DATASET_HPP
