#ifndef VOLT_NARX_HPP
#define VOLT_NARX_HPP

#include "volt/dataset.hpp"
#include "volt/regnet.hpp"

namespace volt {

// Regressor row k (k >= m): [u_k ... u_{k-m}, z_{k-1} ... z_{k-m}], target
// z_k. The first m samples are dropped.
Dataset build_narx_dataset(const Eigen::VectorXd& u, const Eigen::VectorXd& z, int memory);

struct FreeRunResult {
  Eigen::VectorXd z;        // predictions; first m entries are the provided seeds
  bool diverged = false;    // non-finite prediction encountered
  Eigen::Index truncated_at = -1;  // index of the first non-finite prediction
};

// Iterates one-step predictions, feeding predicted outputs back into the
// lagged-output slots. z_init supplies the first m measured outputs. On a
// non-finite prediction the run is truncated and flagged instead of aborting.
FreeRunResult free_run_simulate(const FittedNetwork& model, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& z_init);

}  // namespace volt

#endif  // VOLT_NARX_HPP
