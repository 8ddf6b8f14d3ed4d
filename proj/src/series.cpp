#include "volt/series.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "volt/errors.hpp"
#include "volt/rng.hpp"

namespace volt {

void VolterraSeries::validate() const {
  if (order < 1) throw std::invalid_argument("VolterraSeries: order must be >= 1");
  if (memory < 0) throw std::invalid_argument("VolterraSeries: memory must be >= 0");
  for (const auto& [idx, coeff] : coeffs) {
    (void)coeff;
    if (static_cast<int>(idx.degrees.size()) != memory + 1) {
      throw std::invalid_argument("VolterraSeries: term degree-vector length must be m+1");
    }
    const int total = idx.total_degree();
    if (total < 1 || total > order) {
      throw std::invalid_argument("VolterraSeries: term degree must lie in [1, r]");
    }
  }
}

double VolterraSeries::eval_window(const Eigen::VectorXd& window) const {
  if (window.size() != memory + 1) {
    throw std::invalid_argument("VolterraSeries: window length must equal m+1");
  }
  double value = h0;
  for (const auto& [idx, coeff] : coeffs) {
    value += coeff * monomial_value(idx, window);
  }
  return value;
}

Eigen::MatrixXd window_matrix(const Eigen::VectorXd& u_signal, int memory) {
  const Eigen::Index n = u_signal.size();
  if (n < memory + 1) {
    throw std::invalid_argument("window_matrix: signal shorter than memory+1");
  }
  const Eigen::Index rows = n - memory;
  Eigen::MatrixXd windows(rows, memory + 1);
  for (Eigen::Index k = 0; k < rows; ++k) {
    for (int j = 0; j <= memory; ++j) {
      windows(k, j) = u_signal[k + memory - j];  // column j holds u_{k-j}
    }
  }
  return windows;
}

SimulationResult simulate_series(const VolterraSeries& series, const Eigen::VectorXd& u_signal,
                                 double noise_std, std::uint64_t seed) {
  series.validate();
  if (noise_std < 0.0) throw std::invalid_argument("simulate_series: noise_std must be >= 0");
  SimulationResult result;
  result.data.inputs = window_matrix(u_signal, series.memory);
  const Eigen::Index rows = result.data.inputs.rows();
  result.noiseless.resize(rows);
  result.data.outputs.resize(rows);
  const CounterRng rng(seed);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const double z = series.eval_window(result.data.inputs.row(k).transpose());
    result.noiseless[k] = z;
    result.data.outputs[k] =
        noise_std > 0.0 ? z + noise_std * rng.normal(static_cast<std::uint64_t>(k)) : z;
  }
  return result;
}

double spl_output(const Eigen::VectorXd& w) {
  if (w.size() != 7) throw std::invalid_argument("spl_output: window must have length 7");
  // w[j] = u_{k-j}
  return w[0] + 0.6 * w[1] + 0.35 * (w[2] + w[4]) - 0.25 * w[3] * w[3] +
         0.2 * (w[5] + w[6]) + 0.9 * w[3] + 0.25 * w[0] * w[1] + 0.75 * w[2] * w[2] * w[2] -
         w[1] * w[2] + 0.5 * (w[0] * w[0] + w[0] * w[2] + w[1] * w[3]);
}

Eigen::VectorXd spl_simulate(const Eigen::VectorXd& u_signal) {
  const Eigen::MatrixXd windows = window_matrix(u_signal, 6);
  Eigen::VectorXd z(windows.rows());
  for (Eigen::Index k = 0; k < windows.rows(); ++k) {
    z[k] = spl_output(windows.row(k).transpose());
  }
  return z;
}

VolterraSeries spl_series() {
  VolterraSeries s;
  s.order = 3;
  s.memory = 6;
  s.h0 = 0.0;
  auto term = [&s](std::initializer_list<std::pair<int, int>> lag_degrees, double coeff) {
    MonomialIndex idx;
    idx.degrees.assign(7, 0);
    for (auto [lag, degree] : lag_degrees) idx.degrees[static_cast<std::size_t>(lag)] = degree;
    s.coeffs[idx] = coeff;
  };
  term({{0, 1}}, 1.0);
  term({{1, 1}}, 0.6);
  term({{2, 1}}, 0.35);
  term({{4, 1}}, 0.35);
  term({{3, 2}}, -0.25);
  term({{5, 1}}, 0.2);
  term({{6, 1}}, 0.2);
  term({{3, 1}}, 0.9);
  term({{0, 1}, {1, 1}}, 0.25);
  term({{2, 3}}, 0.75);
  term({{1, 1}, {2, 1}}, -1.0);
  term({{0, 2}}, 0.5);
  term({{0, 1}, {2, 1}}, 0.5);
  term({{1, 1}, {3, 1}}, 0.5);
  return s;
}

VolterraSeries series_from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataFormatError(std::string("series JSON parse error: ") + e.what());
  }
  VolterraSeries s;
  try {
    s.order = doc.at("r").get<int>();
    s.memory = doc.at("m").get<int>();
    s.h0 = doc.at("h0").get<double>();
    for (const auto& t : doc.at("terms")) {
      MonomialIndex idx;
      idx.degrees = t.at("degrees").get<std::vector<int>>();
      s.coeffs[idx] = t.at("coeff").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataFormatError(std::string("series JSON schema error: ") + e.what());
  }
  s.validate();
  return s;
}

std::string series_to_json_text(const VolterraSeries& series) {
  nlohmann::json doc;
  doc["r"] = series.order;
  doc["m"] = series.memory;
  doc["h0"] = series.h0;
  doc["terms"] = nlohmann::json::array();
  // Emit terms in canonical enumeration order for byte-stable output.
  for (const MonomialIndex& idx : enumerate_monomials(series.memory, series.order)) {
    auto it = series.coeffs.find(idx);
    if (it == series.coeffs.end()) continue;
    doc["terms"].push_back({{"degrees", idx.degrees}, {"coeff", it->second}});
  }
  return doc.dump(2);
}

VolterraSeries load_series_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open series JSON file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return series_from_json_text(text);
}

}  // namespace volt
