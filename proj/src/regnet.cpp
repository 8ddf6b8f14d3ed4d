#include "volt/regnet.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "volt/errors.hpp"

namespace volt {

SpdFactor spd_factorize(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("spd_factorize: matrix must be square");
  }
  const double diag_scale = matrix.diagonal().mean();
  SpdFactor factor;
  double delta = 0.0;
  while (true) {
    Eigen::MatrixXd shifted = matrix;
    if (delta > 0.0) shifted.diagonal().array() += delta * diag_scale;
    factor.llt.compute(shifted);
    if (factor.llt.info() == Eigen::Success &&
        (factor.llt.matrixLLT().diagonal().array() > 0.0).all()) {
      factor.jitter = delta * diag_scale;
      factor.log_det = 2.0 * factor.llt.matrixLLT().diagonal().array().log().sum();
      return factor;
    }
    if (delta == 0.0) {
      delta = 1e-10;
    } else if (delta < 1e-4) {
      delta *= 10.0;
    } else {
      throw IllConditionedError(
          "spd_factorize: factorization failed after jitter escalation to 1e-4");
    }
  }
}

FittedNetwork fit(const Dataset& data, const KernelConfig& kernel, double gamma) {
  data.validate();
  if (gamma <= 0.0) throw std::invalid_argument("fit: gamma must be > 0");
  if (data.rows() < 1) throw std::invalid_argument("fit: empty dataset");

  FittedNetwork model;
  model.training_inputs = effective_inputs(data);
  model.kernel = kernel;
  model.gamma = gamma;
  model.normalization = data.normalization;

  Eigen::MatrixXd K = build_gram(model.training_inputs, kernel);
  K.diagonal().array() += gamma * gamma;
  const SpdFactor factor = spd_factorize(K);
  model.alpha = factor.llt.solve(data.outputs);
  model.log_det = factor.log_det;
  model.jitter = factor.jitter;
  return model;
}

Eigen::VectorXd predict(const FittedNetwork& model, const Eigen::MatrixXd& inputs) {
  Eigen::MatrixXd x = inputs;
  if (model.normalization) x = apply_normalization(*model.normalization, x);
  if (x.cols() != model.training_inputs.cols()) {
    throw std::invalid_argument("predict: input dimension mismatch");
  }
  return build_cross(x, model.training_inputs, model.kernel) * model.alpha;
}

Eigen::VectorXd explicit_ridge_oracle(const Dataset& data, const PenaltyTable& penalties,
                                      double gamma) {
  data.validate();
  if (static_cast<long long>(penalties.index_order.size()) > kExpansionGuard) {
    throw GuardExceededError("explicit_ridge_oracle: table exceeds expansion guard");
  }
  const Eigen::MatrixXd x = effective_inputs(data);
  if (x.cols() != penalties.input_dim) {
    throw std::invalid_argument("explicit_ridge_oracle: dimension mismatch with table");
  }
  const Eigen::Index n_features = static_cast<Eigen::Index>(penalties.index_order.size());

  std::vector<Eigen::Index> active;
  for (Eigen::Index q = 0; q < n_features; ++q) {
    if (penalties.lambda[q] > 0.0) active.push_back(q);
  }

  // Feature matrix restricted to monomials with lambda > 0; the rest carry an
  // infinite penalty and are pinned at zero.
  Eigen::MatrixXd phi(x.rows(), static_cast<Eigen::Index>(active.size()));
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const Eigen::VectorXd row = x.row(t).transpose();
    for (std::size_t a = 0; a < active.size(); ++a) {
      phi(t, static_cast<Eigen::Index>(a)) =
          monomial_value(penalties.index_order[static_cast<std::size_t>(active[a])], row);
    }
  }

  Eigen::MatrixXd normal = phi.transpose() * phi;
  for (std::size_t a = 0; a < active.size(); ++a) {
    normal(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) +=
        gamma * gamma / penalties.lambda[active[a]];
  }
  const SpdFactor factor = spd_factorize(normal);
  const Eigen::VectorXd c_active = factor.llt.solve(phi.transpose() * data.outputs);

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n_features);
  for (std::size_t a = 0; a < active.size(); ++a) {
    c[active[a]] = c_active[static_cast<Eigen::Index>(a)];
  }
  return c;
}

Eigen::VectorXd explicit_ridge_predict(const Eigen::VectorXd& weights,
                                       const PenaltyTable& penalties,
                                       const Eigen::MatrixXd& inputs,
                                       const std::optional<Normalization>& normalization) {
  Eigen::MatrixXd x = inputs;
  if (normalization) x = apply_normalization(*normalization, x);
  if (weights.size() != static_cast<Eigen::Index>(penalties.index_order.size())) {
    throw std::invalid_argument("explicit_ridge_predict: weight length mismatch");
  }
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const Eigen::VectorXd row = x.row(t).transpose();
    double acc = 0.0;
    for (std::size_t q = 0; q < penalties.index_order.size(); ++q) {
      const double w = weights[static_cast<Eigen::Index>(q)];
      if (w != 0.0) acc += w * monomial_value(penalties.index_order[q], row);
    }
    out[t] = acc;
  }
  return out;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  const auto data = rows.get<std::vector<std::vector<double>>>();
  if (data.empty()) return Eigen::MatrixXd();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()),
                    static_cast<Eigen::Index>(data[0].size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].size() != data[0].size()) {
      throw DataFormatError("network JSON: ragged matrix rows");
    }
    for (std::size_t j = 0; j < data[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
    }
  }
  return m;
}

std::vector<double> vector_to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string network_to_json_text(const FittedNetwork& model) {
  nlohmann::json doc;
  if (const PkParams* pk = std::get_if<PkParams>(&model.kernel)) {
    doc["kernel"] = {{"kind", "pk"}, {"r", pk->degree}};
  } else {
    doc["kernel"] = {{"kind", "mpk"},
                     {"params", nlohmann::json::parse(mpk_to_json_text(
                         std::get<MpkParams>(model.kernel)))}};
  }
  doc["gamma"] = model.gamma;
  doc["alpha"] = vector_to_std(model.alpha);
  doc["training_inputs"] = matrix_to_json(model.training_inputs);
  if (model.normalization) {
    doc["normalization"] = {{"mean", vector_to_std(model.normalization->mean)},
                            {"std", vector_to_std(model.normalization->std_dev)}};
  } else {
    doc["normalization"] = nullptr;
  }
  if (model.narx_memory) {
    doc["narx"] = {{"m", *model.narx_memory}};
  }
  return doc.dump(2);
}

FittedNetwork network_from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataFormatError(std::string("network JSON parse error: ") + e.what());
  }
  FittedNetwork model;
  try {
    const auto& kernel = doc.at("kernel");
    const std::string kind = kernel.at("kind").get<std::string>();
    if (kind == "pk") {
      model.kernel = PkParams{kernel.at("r").get<int>()};
    } else if (kind == "mpk") {
      model.kernel = mpk_from_json_text(kernel.at("params").dump());
    } else {
      throw DataFormatError("network JSON: unknown kernel kind '" + kind + "'");
    }
    model.gamma = doc.at("gamma").get<double>();
    model.alpha = vector_from_std(doc.at("alpha").get<std::vector<double>>());
    model.training_inputs = matrix_from_json(doc.at("training_inputs"));
    if (!doc.at("normalization").is_null()) {
      Normalization norm;
      norm.mean = vector_from_std(doc["normalization"].at("mean").get<std::vector<double>>());
      norm.std_dev = vector_from_std(doc["normalization"].at("std").get<std::vector<double>>());
      model.normalization = norm;
    }
    if (doc.contains("narx")) {
      model.narx_memory = doc["narx"].at("m").get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataFormatError(std::string("network JSON schema error: ") + e.what());
  }
  if (model.alpha.size() != model.training_inputs.rows()) {
    throw DataFormatError("network JSON: alpha length != training input count");
  }
  return model;
}

FittedNetwork load_network_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open model JSON file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return network_from_json_text(text);
}

}  // namespace volt
