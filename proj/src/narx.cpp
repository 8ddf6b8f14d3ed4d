#include "volt/narx.hpp"

#include <cmath>
#include <stdexcept>

namespace volt {

Dataset build_narx_dataset(const Eigen::VectorXd& u, const Eigen::VectorXd& z, int memory) {
  if (memory < 1) throw std::invalid_argument("build_narx_dataset: memory must be >= 1");
  if (u.size() != z.size()) throw std::invalid_argument("build_narx_dataset: length mismatch");
  if (u.size() <= memory) {
    throw std::invalid_argument("build_narx_dataset: signals shorter than memory+1");
  }
  const Eigen::Index rows = u.size() - memory;
  Dataset data;
  data.inputs.resize(rows, 2 * memory + 1);
  data.outputs.resize(rows);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const Eigen::Index k = t + memory;
    for (int j = 0; j <= memory; ++j) data.inputs(t, j) = u[k - j];
    for (int j = 1; j <= memory; ++j) data.inputs(t, memory + j) = z[k - j];
    data.outputs[t] = z[k];
  }
  return data;
}

FreeRunResult free_run_simulate(const FittedNetwork& model, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& z_init) {
  if (!model.narx_memory) {
    throw std::invalid_argument("free_run_simulate: model carries no NARX memory metadata");
  }
  const int m = *model.narx_memory;
  if (z_init.size() != m) {
    throw std::invalid_argument("free_run_simulate: z_init must supply exactly m seeds");
  }
  if (u.size() <= m) throw std::invalid_argument("free_run_simulate: input signal too short");
  if (model.training_inputs.cols() != 2 * m + 1) {
    throw std::invalid_argument("free_run_simulate: model input dimension != 2m+1");
  }

  FreeRunResult result;
  result.z.resize(u.size());
  result.z.head(m) = z_init;
  Eigen::MatrixXd regressor(1, 2 * m + 1);
  for (Eigen::Index k = m; k < u.size(); ++k) {
    for (int j = 0; j <= m; ++j) regressor(0, j) = u[k - j];
    for (int j = 1; j <= m; ++j) regressor(0, m + j) = result.z[k - j];
    const double zhat = predict(model, regressor)[0];
    if (!std::isfinite(zhat)) {
      result.diverged = true;
      result.truncated_at = k;
      result.z.conservativeResize(k);
      return result;
    }
    result.z[k] = zhat;
  }
  return result;
}

}  // namespace volt
