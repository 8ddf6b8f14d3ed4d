#ifndef VOLT_EXPERIMENTS_HPP
#define VOLT_EXPERIMENTS_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "volt/hyperopt.hpp"
#include "volt/narx.hpp"

namespace volt {

// One synthetic Monte Carlo scenario on the third-order benchmark system.
struct ExperimentConfig {
  int id = 0;  // 1..4 presets, 0 custom
  double train_mean = 0.0;
  double test_mean = 0.0;
  double train_std = 4.0;
  double test_std = 4.0;
  double noise_std = 4.0;
  int samples = 1000;  // input signal length per record (train and test each)
  int runs = 100;
  std::vector<std::string> kernels = {"pk", "mpk"};
  std::uint64_t base_seed = 1;
  int order = 3;
  int memory = 6;
  OptimizerConfig opt{.max_iters = 250, .tol = 1e-5, .initial_step = 1e-2};
  bool normalize_inputs = true;
  // Scale-only by default: dividing by the training std keeps Gram entries
  // O(1) without disturbing the monomial sparsity pattern the MPK keys on
  // (mean subtraction would mix a monomial into all lower degrees).
  bool center_inputs = false;
  bool parallel_runs = true;
};

// Paper scenarios; budgets stay at the struct defaults.
ExperimentConfig experiment_preset(int id);

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  std::string kernel;
  double train_fit = 0.0;  // vs noiseless z on the training record
  double test_fit = 0.0;   // vs noiseless z on the test record
  double test_rmse = 0.0;
  int opt_iterations = 0;
  double final_loss = 0.0;
  bool converged = false;
  bool failed = false;
  std::string error;
};

struct FiveNumberSummary {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  int count = 0;
};

FiveNumberSummary summarize(std::vector<double> values);

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RunRecord> records;
  std::map<std::string, FiveNumberSummary> test_fit_summary;  // per kernel
};

// Per run: one train and one test record are drawn and shared by every
// kernel; each kernel is tuned by marginal likelihood and scored against the
// noiseless test output. Runs execute in parallel (when enabled) with
// per-run seeds base_seed + run, and records land in run-index order, so
// serial and parallel execution produce identical reports.
ExperimentReport run_synthetic(const ExperimentConfig& config);

void write_report_csv(const ExperimentReport& report, std::ostream& out);
std::string report_summary_json(const ExperimentReport& report);

// Silverbox-style NARX identification pipeline.
struct NarxConfig {
  int memory = 5;
  int train_rows = 200;  // NARX regressor rows used for training
  int cv_folds = 5;
  int cv_train = 100;
  int cv_validation = 100;
};

struct SilverboxConfig {
  std::string train_csv;  // empty => synthetic surrogate records
  std::string test_csv;
  NarxConfig narx;
  std::string tuning = "ml+cv";  // "ml" | "cv" | "ml+cv"
  OptimizerConfig ml_opt{.max_iters = 600, .tol = 1e-7, .initial_step = 1e-2};
  OptimizerConfig cv_opt{.max_iters = 600, .tol = 1e-7, .initial_step = 1e-2};
  std::vector<std::string> kernels = {"pk", "mpk"};
  int order = 3;
  std::uint64_t seed = 1;
  int surrogate_train_samples = 400;
  int surrogate_test_samples = 1200;
};

struct SilverboxKernelResult {
  std::string kernel;
  double prediction_fit = 0.0;
  double simulation_fit = 0.0;  // -inf sentinel when the free run diverges
  double simulation_rmse = 0.0;
  double simulation_rmse_mv = 0.0;
  bool sim_diverged = false;
  int ml_iterations = 0;
  int cv_iterations = 0;
};

struct SilverboxReport {
  SilverboxConfig config;
  bool surrogate = false;
  std::vector<SilverboxKernelResult> results;
};

SilverboxReport run_silverbox(const SilverboxConfig& config);
std::string silverbox_report_json(const SilverboxReport& report);

// Deterministic cubic NARX record used when no measured data is supplied.
struct SurrogateRecord {
  Eigen::VectorXd u;
  Eigen::VectorXd z;
};
SurrogateRecord make_surrogate_record(int samples, std::uint64_t seed);

// Self-contained SVG boxplot of the per-kernel test Fit% distributions.
std::string report_boxplot_svg(const ExperimentReport& report);

}  // namespace volt

#endif  // VOLT_EXPERIMENTS_HPP
