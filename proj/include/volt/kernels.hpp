#ifndef VOLT_KERNELS_HPP
#define VOLT_KERNELS_HPP

#include <Eigen/Core>
#include <string>
#include <variant>

namespace volt {

// Inhomogeneous polynomial kernel (1 + u'v)^r. No tunable shape parameters.
struct PkParams {
  int degree = 1;
};

// Multiplicative polynomial kernel: product of `degree` inhomogeneous linear
// kernels, factor i being offset_i + u' Sigma_i v with diagonal Sigma_i.
// Nonnegativity of the derived parameters is enforced by squaring the raw
// values; the Sigma_i diagonals are built by backward-cumulative sums of the
// squared increments, which makes them non-increasing in i and pins a single
// canonical representative per penalty assignment.
struct MpkParams {
  int degree = 1;                  // r
  int input_dim = 1;               // d
  Eigen::VectorXd raw_offsets;     // length r; offset_i = raw^2
  Eigen::MatrixXd raw_increments;  // r x d; a^{(i)}_j = raw^2

  void validate() const;
  static MpkParams zeros(int degree, int input_dim);
};

// Derived factor parameters. sigma.row(i) is the diagonal of Sigma_{i+1}
// (0-based row index).
struct DerivedSigmas {
  Eigen::VectorXd offsets;  // length r
  Eigen::MatrixXd sigma;    // r x d
};

DerivedSigmas derive_sigmas(const MpkParams& params);

double pk_eval(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const PkParams& params);
double mpk_eval(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const MpkParams& params);
double mpk_eval_derived(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                        const DerivedSigmas& derived);

using KernelConfig = std::variant<PkParams, MpkParams>;

double kernel_eval(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const KernelConfig& kernel);
int kernel_degree(const KernelConfig& kernel);
// Number of raw kernel parameters (0 for PK, r + r*d for MPK).
int kernel_param_count(const KernelConfig& kernel);
std::string kernel_kind_name(const KernelConfig& kernel);

// T x T Gram matrix; upper triangle computed, mirrored, then symmetrized as
// (K+K')/2. Throws IllConditionedError-adjacent std::runtime_error listing
// offending rows when non-finite entries appear. OpenMP over rows; the
// per-entry computation is pure, so the result is schedule-independent.
Eigen::MatrixXd build_gram(const Eigen::MatrixXd& inputs, const KernelConfig& kernel);
Eigen::MatrixXd build_gram_serial(const Eigen::MatrixXd& inputs, const KernelConfig& kernel);

// Rectangular kernel block: entry (i,j) = k(a_i, b_j).
Eigen::MatrixXd build_cross(const Eigen::MatrixXd& inputs_a, const Eigen::MatrixXd& inputs_b,
                            const KernelConfig& kernel);
Eigen::MatrixXd build_cross_serial(const Eigen::MatrixXd& inputs_a,
                                   const Eigen::MatrixXd& inputs_b, const KernelConfig& kernel);

// Exact partials of mpk_eval w.r.t. every raw parameter, packed as
// [d/d raw_offsets (r), d/d raw_increments row-major (r*d)].
Eigen::VectorXd mpk_param_gradient(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                   const MpkParams& params);

// sum_{i,j} weights(i,j) * d k(a_i, b_j) / d theta, packed like
// mpk_param_gradient. The workhorse behind the likelihood and CV gradients.
// For a PK kernel the result is an empty vector. Parallel version accumulates
// per-row partials and reduces them in row order, so its output is bit-equal
// to the serial one for any thread count.
Eigen::VectorXd weighted_pair_gradient(const Eigen::MatrixXd& inputs_a,
                                       const Eigen::MatrixXd& inputs_b,
                                       const Eigen::MatrixXd& weights,
                                       const KernelConfig& kernel);
Eigen::VectorXd weighted_pair_gradient_serial(const Eigen::MatrixXd& inputs_a,
                                              const Eigen::MatrixXd& inputs_b,
                                              const Eigen::MatrixXd& weights,
                                              const KernelConfig& kernel);

// JSON document: {"r": int, "d": int, "raw_offsets": [...], "raw_increments": [[...]]}
MpkParams mpk_from_json_text(const std::string& text);
std::string mpk_to_json_text(const MpkParams& params);

}  // namespace volt

#endif  // VOLT_KERNELS_HPP
