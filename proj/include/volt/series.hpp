#ifndef VOLT_SERIES_HPP
#define VOLT_SERIES_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <unordered_map>

#include "volt/dataset.hpp"
#include "volt/monomials.hpp"

namespace volt {

// Truncated symmetric Volterra map: constant term plus scaled monomial
// weights keyed by exponent vector.
struct VolterraSeries {
  int order = 1;   // r
  int memory = 0;  // m
  double h0 = 0.0;
  std::unordered_map<MonomialIndex, double, MonomialIndexHash> coeffs;

  // Every key must have degree-vector length memory+1 and 1 <= total degree <= order.
  void validate() const;

  // h0 + sum of coeff * monomial over a window [u_k, ..., u_{k-m}].
  double eval_window(const Eigen::VectorXd& window) const;
};

struct SimulationResult {
  Dataset data;               // inputs: windows, outputs: noisy y
  Eigen::VectorXd noiseless;  // z_k aligned with data rows
};

// Slides the series along the signal. Windows with insufficient history
// (the first m samples) are dropped, so row k corresponds to signal index
// k+m. Noise is drawn from the counter-based generator, so results are a
// pure function of (series, signal, noise_std, seed).
SimulationResult simulate_series(const VolterraSeries& series, const Eigen::VectorXd& u_signal,
                                 double noise_std, std::uint64_t seed);

// Extracts the window matrix [u_k ... u_{k-m}] for k = m..T-1.
Eigen::MatrixXd window_matrix(const Eigen::VectorXd& u_signal, int memory);

// The third-order benchmark system used by the synthetic experiments.
// window = [u_k, u_{k-1}, ..., u_{k-6}].
double spl_output(const Eigen::VectorXd& window);

// spl_output applied along a signal; drops the first 6 samples.
Eigen::VectorXd spl_simulate(const Eigen::VectorXd& u_signal);

// The benchmark system as an explicit VolterraSeries (r=3, m=6).
VolterraSeries spl_series();

// JSON document: {"r": int, "m": int, "h0": float,
//                 "terms": [{"degrees": [ints], "coeff": float}]}
VolterraSeries series_from_json_text(const std::string& text);
std::string series_to_json_text(const VolterraSeries& series);
VolterraSeries load_series_json(const std::string& path);

}  // namespace volt

#endif  // VOLT_SERIES_HPP
