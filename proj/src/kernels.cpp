#include "volt/kernels.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "volt/errors.hpp"

namespace volt {

void MpkParams::validate() const {
  if (degree < 1) throw std::invalid_argument("MpkParams: degree must be >= 1");
  if (input_dim < 1) throw std::invalid_argument("MpkParams: input_dim must be >= 1");
  if (raw_offsets.size() != degree) {
    throw std::invalid_argument("MpkParams: raw_offsets must have length r");
  }
  if (raw_increments.rows() != degree || raw_increments.cols() != input_dim) {
    throw std::invalid_argument("MpkParams: raw_increments must be r x d");
  }
}

MpkParams MpkParams::zeros(int degree, int input_dim) {
  MpkParams p;
  p.degree = degree;
  p.input_dim = input_dim;
  p.raw_offsets = Eigen::VectorXd::Zero(degree);
  p.raw_increments = Eigen::MatrixXd::Zero(degree, input_dim);
  return p;
}

DerivedSigmas derive_sigmas(const MpkParams& params) {
  params.validate();
  DerivedSigmas d;
  d.offsets = params.raw_offsets.array().square();
  d.sigma.resize(params.degree, params.input_dim);
  // Sigma_r = diag(a^{(r)}), Sigma_i = Sigma_{i+1} + diag(a^{(i)}).
  d.sigma.row(params.degree - 1) = params.raw_increments.row(params.degree - 1).array().square();
  for (int i = params.degree - 2; i >= 0; --i) {
    d.sigma.row(i) =
        d.sigma.row(i + 1).array() + params.raw_increments.row(i).array().square();
  }
  return d;
}

double pk_eval(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const PkParams& params) {
  if (u.size() != v.size()) throw std::invalid_argument("pk_eval: dimension mismatch");
  if (params.degree < 1) throw std::invalid_argument("pk_eval: degree must be >= 1");
  return std::pow(1.0 + u.dot(v), params.degree);
}

double mpk_eval_derived(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                        const DerivedSigmas& derived) {
  const Eigen::ArrayXd uv = u.array() * v.array();
  double product = 1.0;
  for (Eigen::Index i = 0; i < derived.offsets.size(); ++i) {
    product *= derived.offsets[i] + (derived.sigma.row(i).transpose().array() * uv).sum();
  }
  return product;
}

double mpk_eval(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const MpkParams& params) {
  if (u.size() != v.size() || u.size() != params.input_dim) {
    throw std::invalid_argument("mpk_eval: dimension mismatch");
  }
  return mpk_eval_derived(u, v, derive_sigmas(params));
}

double kernel_eval(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                   const KernelConfig& kernel) {
  if (const PkParams* pk = std::get_if<PkParams>(&kernel)) return pk_eval(u, v, *pk);
  return mpk_eval(u, v, std::get<MpkParams>(kernel));
}

int kernel_degree(const KernelConfig& kernel) {
  return std::visit([](const auto& p) { return p.degree; }, kernel);
}

int kernel_param_count(const KernelConfig& kernel) {
  if (std::holds_alternative<PkParams>(kernel)) return 0;
  const MpkParams& p = std::get<MpkParams>(kernel);
  return p.degree + p.degree * p.input_dim;
}

std::string kernel_kind_name(const KernelConfig& kernel) {
  return std::holds_alternative<PkParams>(kernel) ? "pk" : "mpk";
}

namespace {

// Row-major evaluation core shared by the gram/cross builders. The MPK path
// pre-derives the sigmas once.
class KernelEvaluator {
 public:
  explicit KernelEvaluator(const KernelConfig& kernel) : kernel_(kernel) {
    if (const MpkParams* mpk = std::get_if<MpkParams>(&kernel_)) {
      derived_ = derive_sigmas(*mpk);
      is_mpk_ = true;
    }
  }

  double operator()(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    if (is_mpk_) return mpk_eval_derived(u, v, derived_);
    return pk_eval(u, v, std::get<PkParams>(kernel_));
  }

 private:
  KernelConfig kernel_;
  DerivedSigmas derived_;
  bool is_mpk_ = false;
};

void check_finite(const Eigen::MatrixXd& K, const char* what) {
  if (K.allFinite()) return;
  std::ostringstream msg;
  msg << what << ": non-finite kernel values at rows";
  int listed = 0;
  for (Eigen::Index i = 0; i < K.rows() && listed < 8; ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      if (!std::isfinite(K(i, j))) {
        msg << " (" << i << "," << j << ")";
        ++listed;
        break;
      }
    }
  }
  throw std::runtime_error(msg.str());
}

template <bool Parallel>
Eigen::MatrixXd gram_impl(const Eigen::MatrixXd& inputs, const KernelConfig& kernel) {
  const Eigen::Index n = inputs.rows();
  if (n < 1) throw std::invalid_argument("build_gram: need at least one input row");
  const KernelEvaluator eval(kernel);
  Eigen::MatrixXd K(n, n);
#pragma omp parallel for schedule(dynamic, 8) if (Parallel)
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd ui = inputs.row(i).transpose();
    for (Eigen::Index j = i; j < n; ++j) {
      K(i, j) = eval(ui, inputs.row(j).transpose());
    }
  }
  // Mirror the upper triangle, then symmetrize. The mirror makes the two
  // triangles bit-equal, so (K+K')/2 is exact and a no-op numerically.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) K(j, i) = K(i, j);
  }
  K = 0.5 * (K + K.transpose()).eval();
  check_finite(K, "build_gram");
  return K;
}

template <bool Parallel>
Eigen::MatrixXd cross_impl(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const KernelConfig& kernel) {
  if (a.cols() != b.cols()) throw std::invalid_argument("build_cross: dimension mismatch");
  const KernelEvaluator eval(kernel);
  Eigen::MatrixXd K(a.rows(), b.rows());
#pragma omp parallel for schedule(dynamic, 8) if (Parallel)
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Eigen::VectorXd ai = a.row(i).transpose();
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      K(i, j) = eval(ai, b.row(j).transpose());
    }
  }
  check_finite(K, "build_cross");
  return K;
}

}  // namespace

Eigen::MatrixXd build_gram(const Eigen::MatrixXd& inputs, const KernelConfig& kernel) {
  return gram_impl<true>(inputs, kernel);
}

Eigen::MatrixXd build_gram_serial(const Eigen::MatrixXd& inputs, const KernelConfig& kernel) {
  return gram_impl<false>(inputs, kernel);
}

Eigen::MatrixXd build_cross(const Eigen::MatrixXd& inputs_a, const Eigen::MatrixXd& inputs_b,
                            const KernelConfig& kernel) {
  return cross_impl<true>(inputs_a, inputs_b, kernel);
}

Eigen::MatrixXd build_cross_serial(const Eigen::MatrixXd& inputs_a,
                                   const Eigen::MatrixXd& inputs_b, const KernelConfig& kernel) {
  return cross_impl<false>(inputs_a, inputs_b, kernel);
}

namespace {

// Partials of the MPK w.r.t. the *derived-parameter carriers* for one input
// pair, before the 2*raw chain factor:
//   factor products  P_i = prod_{l != i} f_l           (offset direction)
//   cumulative sums  S_i = sum_{l <= i} P_l             (increment direction,
//                      since a^{(i)}_j enters Sigma_1..Sigma_i)
// so d k/d raw_off_i = 2 raw_off_i * P_i and
//    d k/d raw_inc_ij = 2 raw_inc_ij * S_i * u_j v_j.
void accumulate_mpk_pair_gradient(const Eigen::ArrayXd& uv, const MpkParams& params,
                                  const DerivedSigmas& derived, double weight,
                                  Eigen::VectorXd& acc) {
  const int r = params.degree;
  const int d = params.input_dim;
  double factors[64];
  double prefix[64];
  double suffix[64];
  for (int i = 0; i < r; ++i) {
    factors[i] = derived.offsets[i] + (derived.sigma.row(i).transpose().array() * uv).sum();
  }
  prefix[0] = 1.0;
  for (int i = 1; i < r; ++i) prefix[i] = prefix[i - 1] * factors[i - 1];
  suffix[r - 1] = 1.0;
  for (int i = r - 2; i >= 0; --i) suffix[i] = suffix[i + 1] * factors[i + 1];

  double cumulative = 0.0;
  for (int i = 0; i < r; ++i) {
    const double without_i = prefix[i] * suffix[i];
    acc[i] += weight * 2.0 * params.raw_offsets[i] * without_i;
    cumulative += without_i;
    for (int j = 0; j < d; ++j) {
      acc[r + i * d + j] +=
          weight * 2.0 * params.raw_increments(i, j) * cumulative * uv[j];
    }
  }
}

template <bool Parallel>
Eigen::VectorXd weighted_pair_gradient_impl(const Eigen::MatrixXd& inputs_a,
                                            const Eigen::MatrixXd& inputs_b,
                                            const Eigen::MatrixXd& weights,
                                            const KernelConfig& kernel) {
  if (std::holds_alternative<PkParams>(kernel)) return Eigen::VectorXd();
  const MpkParams& params = std::get<MpkParams>(kernel);
  params.validate();
  if (params.degree > 64) throw std::invalid_argument("weighted_pair_gradient: degree > 64");
  if (inputs_a.cols() != params.input_dim || inputs_b.cols() != params.input_dim) {
    throw std::invalid_argument("weighted_pair_gradient: dimension mismatch");
  }
  if (weights.rows() != inputs_a.rows() || weights.cols() != inputs_b.rows()) {
    throw std::invalid_argument("weighted_pair_gradient: weight shape mismatch");
  }
  const DerivedSigmas derived = derive_sigmas(params);
  const int n_params = kernel_param_count(kernel);
  const Eigen::Index na = inputs_a.rows();

  // Per-row partial sums reduced in row order: the result does not depend on
  // the OpenMP schedule.
  Eigen::MatrixXd row_acc = Eigen::MatrixXd::Zero(n_params, na);
#pragma omp parallel for schedule(dynamic, 8) if (Parallel)
  for (Eigen::Index i = 0; i < na; ++i) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_params);
    const Eigen::ArrayXd ai = inputs_a.row(i).transpose().array();
    for (Eigen::Index j = 0; j < inputs_b.rows(); ++j) {
      const double w = weights(i, j);
      if (w == 0.0) continue;
      const Eigen::ArrayXd uv = ai * inputs_b.row(j).transpose().array();
      accumulate_mpk_pair_gradient(uv, params, derived, w, acc);
    }
    row_acc.col(i) = acc;
  }
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n_params);
  for (Eigen::Index i = 0; i < na; ++i) total += row_acc.col(i);
  return total;
}

}  // namespace

Eigen::VectorXd mpk_param_gradient(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                   const MpkParams& params) {
  params.validate();
  if (u.size() != params.input_dim || v.size() != params.input_dim) {
    throw std::invalid_argument("mpk_param_gradient: dimension mismatch");
  }
  if (params.degree > 64) throw std::invalid_argument("mpk_param_gradient: degree > 64");
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(kernel_param_count(KernelConfig(params)));
  accumulate_mpk_pair_gradient(u.array() * v.array(), params, derive_sigmas(params), 1.0, grad);
  return grad;
}

Eigen::VectorXd weighted_pair_gradient(const Eigen::MatrixXd& inputs_a,
                                       const Eigen::MatrixXd& inputs_b,
                                       const Eigen::MatrixXd& weights,
                                       const KernelConfig& kernel) {
  return weighted_pair_gradient_impl<true>(inputs_a, inputs_b, weights, kernel);
}

Eigen::VectorXd weighted_pair_gradient_serial(const Eigen::MatrixXd& inputs_a,
                                              const Eigen::MatrixXd& inputs_b,
                                              const Eigen::MatrixXd& weights,
                                              const KernelConfig& kernel) {
  return weighted_pair_gradient_impl<false>(inputs_a, inputs_b, weights, kernel);
}

MpkParams mpk_from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataFormatError(std::string("MPK JSON parse error: ") + e.what());
  }
  MpkParams p;
  try {
    p.degree = doc.at("r").get<int>();
    p.input_dim = doc.at("d").get<int>();
    const auto offsets = doc.at("raw_offsets").get<std::vector<double>>();
    p.raw_offsets = Eigen::Map<const Eigen::VectorXd>(offsets.data(),
                                                      static_cast<Eigen::Index>(offsets.size()));
    const auto rows = doc.at("raw_increments").get<std::vector<std::vector<double>>>();
    p.raw_increments.resize(static_cast<Eigen::Index>(rows.size()), p.input_dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(rows[i].size()) != p.input_dim) {
        throw DataFormatError("MPK JSON: raw_increments row width != d");
      }
      for (int j = 0; j < p.input_dim; ++j) {
        p.raw_increments(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataFormatError(std::string("MPK JSON schema error: ") + e.what());
  }
  p.validate();
  return p;
}

std::string mpk_to_json_text(const MpkParams& params) {
  params.validate();
  nlohmann::json doc;
  doc["r"] = params.degree;
  doc["d"] = params.input_dim;
  doc["raw_offsets"] = std::vector<double>(params.raw_offsets.data(),
                                           params.raw_offsets.data() + params.raw_offsets.size());
  auto rows = nlohmann::json::array();
  for (int i = 0; i < params.degree; ++i) {
    std::vector<double> row(params.input_dim);
    for (int j = 0; j < params.input_dim; ++j) row[static_cast<std::size_t>(j)] = params.raw_increments(i, j);
    rows.push_back(row);
  }
  doc["raw_increments"] = rows;
  return doc.dump(2);
}

}  // namespace volt
