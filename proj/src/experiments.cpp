#include "volt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "volt/io.hpp"
#include "volt/metrics.hpp"
#include "volt/rng.hpp"
#include "volt/series.hpp"

namespace volt {

ExperimentConfig experiment_preset(int id) {
  ExperimentConfig config;
  config.id = id;
  switch (id) {
    case 1:
      config.train_mean = 0.0;
      config.test_mean = 0.0;
      config.train_std = 4.0;
      config.test_std = 4.0;
      break;
    case 2:
      config.train_mean = 0.0;
      config.test_mean = 0.0;
      config.train_std = 2.0;
      config.test_std = 2.0;
      break;
    case 3:
      config.train_mean = -12.0;
      config.test_mean = 12.0;
      config.train_std = 4.0;
      config.test_std = 4.0;
      break;
    case 4:
      config.train_mean = -12.0;
      config.test_mean = 12.0;
      config.train_std = 2.0;
      config.test_std = 2.0;
      break;
    default:
      throw std::invalid_argument("experiment_preset: id must be 1..4");
  }
  config.noise_std = 4.0;
  return config;
}

FiveNumberSummary summarize(std::vector<double> values) {
  FiveNumberSummary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto quantile = [&values](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
  };
  s.min = values.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = values.back();
  return s;
}

namespace {

KernelConfig kernel_shape(const std::string& kind, int order, int input_dim) {
  if (kind == "pk") return PkParams{order};
  if (kind == "mpk") return MpkParams::zeros(order, input_dim);
  throw std::invalid_argument("unknown kernel kind: " + kind);
}

double gamma_from_raw_noise(double raw_noise) {
  // gamma = sigma_n = raw^2, floored to keep fit()'s gamma > 0 contract.
  return std::max(raw_noise * raw_noise, 1e-8);
}

Eigen::VectorXd gaussian_signal(const CounterRng& rng, int n, double mean, double std_dev) {
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) u[i] = rng.normal(static_cast<std::uint64_t>(i), mean, std_dev);
  return u;
}

struct RunData {
  Dataset train;                  // windows + noisy outputs, normalization attached
  Eigen::VectorXd z_train;        // noiseless
  Eigen::MatrixXd test_windows;   // raw windows (predict applies normalization)
  Eigen::VectorXd z_test;         // noiseless
};

RunData make_run_data(const ExperimentConfig& config, std::uint64_t run_seed) {
  const CounterRng u_train_rng(splitmix64(run_seed ^ 0x747261696eULL));
  const CounterRng u_test_rng(splitmix64(run_seed ^ 0x74657374ULL));
  const CounterRng noise_rng(splitmix64(run_seed ^ 0x6e6f697365ULL));

  RunData rd;
  const Eigen::VectorXd u_train =
      gaussian_signal(u_train_rng, config.samples, config.train_mean, config.train_std);
  const Eigen::VectorXd u_test =
      gaussian_signal(u_test_rng, config.samples, config.test_mean, config.test_std);

  rd.train.inputs = window_matrix(u_train, config.memory);
  rd.z_train = spl_simulate(u_train);
  rd.train.outputs = rd.z_train;
  for (Eigen::Index k = 0; k < rd.train.outputs.size(); ++k) {
    rd.train.outputs[k] += config.noise_std * noise_rng.normal(static_cast<std::uint64_t>(k));
  }
  if (config.normalize_inputs) {
    rd.train = with_normalization(std::move(rd.train));
    if (!config.center_inputs) rd.train.normalization->mean.setZero();
  }

  rd.test_windows = window_matrix(u_test, config.memory);
  rd.z_test = spl_simulate(u_test);
  return rd;
}

RunRecord evaluate_kernel_on_run(const ExperimentConfig& config, const RunData& rd, int run,
                                 std::uint64_t run_seed, const std::string& kind) {
  RunRecord rec;
  rec.run = run;
  rec.seed = run_seed;
  rec.kernel = kind;
  try {
    const KernelConfig shape =
        kernel_shape(kind, config.order, config.memory + 1);
    const HyperParamVector init = default_init(shape, rd.train);
    auto [tuned, report] = optimize(TuningObjective::MarginalLikelihood, init, rd.train, shape,
                                    {}, config.opt);
    if (!report.abort_reason.empty()) {
      throw std::runtime_error("tuning aborted: " + report.abort_reason);
    }
    const auto [tuned_kernel, raw_noise] = unpack_params(shape, tuned);
    const FittedNetwork model = fit(rd.train, tuned_kernel, gamma_from_raw_noise(raw_noise));
    rec.train_fit = fit_percent(rd.z_train, predict(model, rd.train.inputs));
    const Eigen::VectorXd zhat = predict(model, rd.test_windows);
    rec.test_fit = fit_percent(rd.z_test, zhat);
    rec.test_rmse = rmse(rd.z_test, zhat);
    rec.opt_iterations = report.iterations;
    rec.final_loss = report.final_loss;
    rec.converged = report.converged;
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

ExperimentReport run_synthetic(const ExperimentConfig& config) {
  if (config.runs < 1) throw std::invalid_argument("run_synthetic: runs must be >= 1");
  if (config.train_std <= 0.0 || config.test_std <= 0.0) {
    throw std::invalid_argument("run_synthetic: input stds must be > 0");
  }
  if (config.samples < config.memory + 10) {
    throw std::invalid_argument("run_synthetic: samples too short for the system memory");
  }
  if (config.memory != 6 || config.order != 3) {
    throw std::invalid_argument("run_synthetic: benchmark system is fixed at r=3, m=6");
  }

  ExperimentReport report;
  report.config = config;
  const int n_kernels = static_cast<int>(config.kernels.size());
  report.records.resize(static_cast<std::size_t>(config.runs) * n_kernels);

  // Slot-indexed assembly keeps the report identical under any schedule.
#pragma omp parallel for schedule(dynamic) if (config.parallel_runs)
  for (int run = 0; run < config.runs; ++run) {
    const std::uint64_t run_seed = config.base_seed + static_cast<std::uint64_t>(run);
    RunData rd;
    bool data_ok = true;
    std::string data_error;
    try {
      rd = make_run_data(config, run_seed);
    } catch (const std::exception& e) {
      data_ok = false;
      data_error = e.what();
    }
    for (int k = 0; k < n_kernels; ++k) {
      const std::size_t slot = static_cast<std::size_t>(run) * n_kernels + k;
      if (!data_ok) {
        RunRecord rec;
        rec.run = run;
        rec.seed = run_seed;
        rec.kernel = config.kernels[static_cast<std::size_t>(k)];
        rec.failed = true;
        rec.error = data_error;
        report.records[slot] = rec;
        continue;
      }
      report.records[slot] = evaluate_kernel_on_run(
          config, rd, run, run_seed, config.kernels[static_cast<std::size_t>(k)]);
    }
  }

  for (const std::string& kind : config.kernels) {
    std::vector<double> fits;
    for (const RunRecord& rec : report.records) {
      if (!rec.failed && rec.kernel == kind) fits.push_back(rec.test_fit);
    }
    report.test_fit_summary[kind] = summarize(std::move(fits));
  }
  return report;
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  out << "run,seed,kernel,train_fit,test_fit,test_rmse,iterations,final_loss,converged,failed,"
         "error\n";
  for (const RunRecord& r : report.records) {
    out << r.run << "," << r.seed << "," << r.kernel << "," << format_double(r.train_fit) << ","
        << format_double(r.test_fit) << "," << format_double(r.test_rmse) << ","
        << r.opt_iterations << "," << format_double(r.final_loss) << ","
        << (r.converged ? 1 : 0) << "," << (r.failed ? 1 : 0) << "," << r.error << "\n";
  }
}

namespace {

nlohmann::json optimizer_config_json(const OptimizerConfig& opt) {
  return {{"max_iters", opt.max_iters},
          {"tol", opt.tol},
          {"initial_step", opt.initial_step},
          {"fix_noise", opt.fix_noise}};
}

void optimizer_config_from_json(const nlohmann::json& doc, OptimizerConfig& opt) {
  opt.max_iters = doc.value("max_iters", opt.max_iters);
  opt.tol = doc.value("tol", opt.tol);
  opt.initial_step = doc.value("initial_step", opt.initial_step);
  opt.fix_noise = doc.value("fix_noise", opt.fix_noise);
}

nlohmann::json summary_json(const FiveNumberSummary& s) {
  return {{"min", s.min},   {"q1", s.q1},   {"median", s.median},
          {"q3", s.q3},     {"max", s.max}, {"count", s.count}};
}

nlohmann::json experiment_config_json(const ExperimentConfig& c) {
  return {{"id", c.id},
          {"train_mean", c.train_mean},
          {"test_mean", c.test_mean},
          {"train_std", c.train_std},
          {"test_std", c.test_std},
          {"noise_std", c.noise_std},
          {"samples", c.samples},
          {"runs", c.runs},
          {"kernels", c.kernels},
          {"base_seed", c.base_seed},
          {"order", c.order},
          {"memory", c.memory},
          {"optimizer", optimizer_config_json(c.opt)},
          {"normalize_inputs", c.normalize_inputs},
          {"parallel_runs", c.parallel_runs}};
}

}  // namespace

std::string report_summary_json(const ExperimentReport& report) {
  nlohmann::json doc;
  doc["config"] = experiment_config_json(report.config);
  doc["test_fit_summary"] = nlohmann::json::object();
  for (const auto& [kind, summary] : report.test_fit_summary) {
    doc["test_fit_summary"][kind] = summary_json(summary);
  }
  int failures = 0;
  for (const RunRecord& r : report.records) failures += r.failed ? 1 : 0;
  doc["failed_runs"] = failures;
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Silverbox-style pipeline
// ---------------------------------------------------------------------------

SurrogateRecord make_surrogate_record(int samples, std::uint64_t seed) {
  if (samples < 10) throw std::invalid_argument("make_surrogate_record: too few samples");
  const CounterRng u_rng(splitmix64(seed ^ 0x737572725f75ULL));
  const CounterRng e_rng(splitmix64(seed ^ 0x737572725f65ULL));
  const int warmup = 50;
  const int total = samples + warmup;

  Eigen::VectorXd u(total);
  for (int i = 0; i < total; ++i) u[i] = u_rng.normal(static_cast<std::uint64_t>(i), 0.0, 0.6);

  // Cubic NARX map: linearly stable (|poles| ~ 0.45) with an odd-nonlinearity
  // damping term, like a discretized softening spring.
  Eigen::VectorXd z = Eigen::VectorXd::Zero(total);
  for (int k = 2; k < total; ++k) {
    const double zk = 0.5 * z[k - 1] - 0.2 * z[k - 2] + 0.8 * u[k - 1] + 0.3 * u[k - 2] -
                      0.15 * z[k - 1] * z[k - 1] * z[k - 1];
    z[k] = zk + 0.003 * e_rng.normal(static_cast<std::uint64_t>(k));
  }
  SurrogateRecord record;
  record.u = u.tail(samples);
  record.z = z.tail(samples);
  return record;
}

namespace {

struct TunedModel {
  FittedNetwork model;
  int ml_iterations = 0;
  int cv_iterations = 0;
};

TunedModel tune_and_fit(const Dataset& train, const KernelConfig& shape,
                        const SilverboxConfig& config, const std::vector<Fold>& folds) {
  const bool use_ml = config.tuning == "ml" || config.tuning == "ml+cv";
  const bool use_cv = config.tuning == "cv" || config.tuning == "ml+cv";
  if (!use_ml && !use_cv) {
    throw std::invalid_argument("silverbox tuning must be 'ml', 'cv', or 'ml+cv'");
  }
  TunedModel out;
  HyperParamVector params = default_init(shape, train);
  if (use_ml) {
    auto [tuned, report] =
        optimize(TuningObjective::MarginalLikelihood, params, train, shape, {}, config.ml_opt);
    if (!report.abort_reason.empty()) {
      throw std::runtime_error("ML tuning aborted: " + report.abort_reason);
    }
    params = tuned;
    out.ml_iterations = report.iterations;
  }
  if (use_cv) {
    auto [tuned, report] =
        optimize(TuningObjective::CrossValidation, params, train, shape, folds, config.cv_opt);
    if (!report.abort_reason.empty()) {
      throw std::runtime_error("CV tuning aborted: " + report.abort_reason);
    }
    params = tuned;
    out.cv_iterations = report.iterations;
  }
  const auto [tuned_kernel, raw_noise] = unpack_params(shape, params);
  out.model = fit(train, tuned_kernel, gamma_from_raw_noise(raw_noise));
  return out;
}

}  // namespace

SilverboxReport run_silverbox(const SilverboxConfig& config) {
  SilverboxReport report;
  report.config = config;

  Eigen::VectorXd u_train, z_train, u_test, z_test;
  if (config.train_csv.empty() != config.test_csv.empty()) {
    throw std::invalid_argument("run_silverbox: supply both train and test files, or neither");
  }
  if (config.train_csv.empty()) {
    report.surrogate = true;
    const SurrogateRecord train_rec =
        make_surrogate_record(config.surrogate_train_samples, config.seed);
    const SurrogateRecord test_rec =
        make_surrogate_record(config.surrogate_test_samples, config.seed + 1);
    u_train = train_rec.u;
    z_train = train_rec.z;
    u_test = test_rec.u;
    z_test = test_rec.z;
  } else {
    const SignalRecord train_rec = read_signal_csv(config.train_csv);
    const SignalRecord test_rec = read_signal_csv(config.test_csv);
    u_train = train_rec.u;
    z_train = train_rec.y;
    u_test = test_rec.u;
    z_test = test_rec.y;
  }

  const int m = config.narx.memory;
  const Eigen::Index needed = config.narx.train_rows + m;
  if (u_train.size() < needed) {
    throw std::invalid_argument("run_silverbox: training record shorter than train_rows + m");
  }
  Dataset train =
      build_narx_dataset(u_train.head(needed), z_train.head(needed), m);
  train = with_normalization(std::move(train));

  const std::vector<Fold> folds =
      make_cv_folds(config.narx.train_rows, config.narx.cv_folds, config.narx.cv_train,
                    config.narx.cv_validation, config.seed);

  const Dataset test = build_narx_dataset(u_test, z_test, m);

  for (const std::string& kind : config.kernels) {
    const KernelConfig shape = kernel_shape(kind, config.order, 2 * m + 1);
    const TunedModel tuned = tune_and_fit(train, shape, config, folds);
    FittedNetwork model = tuned.model;
    model.narx_memory = m;

    SilverboxKernelResult result;
    result.kernel = kind;
    result.ml_iterations = tuned.ml_iterations;
    result.cv_iterations = tuned.cv_iterations;
    result.prediction_fit = fit_percent(test.outputs, predict(model, test.inputs));

    const FreeRunResult sim = free_run_simulate(model, u_test, z_test.head(m));
    if (sim.diverged) {
      result.sim_diverged = true;
      result.simulation_fit = -std::numeric_limits<double>::infinity();
      result.simulation_rmse = std::numeric_limits<double>::infinity();
      result.simulation_rmse_mv = std::numeric_limits<double>::infinity();
    } else {
      const Eigen::VectorXd measured = z_test.tail(z_test.size() - m);
      const Eigen::VectorXd simulated = sim.z.tail(sim.z.size() - m);
      result.simulation_fit = fit_percent(measured, simulated);
      result.simulation_rmse = rmse(measured, simulated);
      result.simulation_rmse_mv = result.simulation_rmse * 1000.0;
    }
    report.results.push_back(result);
  }
  return report;
}

std::string silverbox_report_json(const SilverboxReport& report) {
  nlohmann::json doc;
  doc["config"] = {{"train_csv", report.config.train_csv},
                   {"test_csv", report.config.test_csv},
                   {"tuning", report.config.tuning},
                   {"kernels", report.config.kernels},
                   {"order", report.config.order},
                   {"seed", report.config.seed},
                   {"narx",
                    {{"memory", report.config.narx.memory},
                     {"train_rows", report.config.narx.train_rows},
                     {"cv_folds", report.config.narx.cv_folds},
                     {"cv_train", report.config.narx.cv_train},
                     {"cv_validation", report.config.narx.cv_validation}}},
                   {"ml_optimizer", optimizer_config_json(report.config.ml_opt)},
                   {"cv_optimizer", optimizer_config_json(report.config.cv_opt)},
                   {"surrogate_train_samples", report.config.surrogate_train_samples},
                   {"surrogate_test_samples", report.config.surrogate_test_samples}};
  doc["surrogate"] = report.surrogate;
  doc["results"] = nlohmann::json::array();
  for (const SilverboxKernelResult& r : report.results) {
    nlohmann::json entry = {{"kernel", r.kernel},
                            {"prediction_fit", r.prediction_fit},
                            {"sim_diverged", r.sim_diverged},
                            {"ml_iterations", r.ml_iterations},
                            {"cv_iterations", r.cv_iterations}};
    if (r.sim_diverged) {
      entry["simulation_fit"] = nullptr;
      entry["simulation_rmse"] = nullptr;
      entry["simulation_rmse_mv"] = nullptr;
    } else {
      entry["simulation_fit"] = r.simulation_fit;
      entry["simulation_rmse"] = r.simulation_rmse;
      entry["simulation_rmse_mv"] = r.simulation_rmse_mv;
    }
    doc["results"].push_back(entry);
  }
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// SVG boxplot
// ---------------------------------------------------------------------------

std::string report_boxplot_svg(const ExperimentReport& report) {
  const int width = 520, height = 360;
  const double left = 70, right = 30, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  std::vector<std::pair<std::string, FiveNumberSummary>> groups(
      report.test_fit_summary.begin(), report.test_fit_summary.end());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& [kind, s] : groups) {
    if (s.count == 0) continue;
    lo = std::min(lo, s.min);
    hi = std::max(hi, s.max);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-9) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto y_of = [&](double v) { return top + plot_h * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"14\">Experiment " << report.config.id
      << " test Fit% (" << report.config.runs << " runs)</text>\n";

  // y axis with 5 ticks
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    const double y = y_of(v);
    svg << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    svg << buf << "</text>\n";
  }

  const double slot = plot_w / std::max<std::size_t>(groups.size(), 1);
  const double box_w = slot * 0.4;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& [kind, s] = groups[g];
    if (s.count == 0) continue;
    const double cx = left + slot * (static_cast<double>(g) + 0.5);
    const char* color = kind == "mpk" ? "#1f77b4" : "#d62728";
    // whiskers
    svg << "<line x1=\"" << cx << "\" y1=\"" << y_of(s.min) << "\" x2=\"" << cx << "\" y2=\""
        << y_of(s.q1) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << cx << "\" y1=\"" << y_of(s.q3) << "\" x2=\"" << cx << "\" y2=\""
        << y_of(s.max) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << cx - box_w / 4 << "\" y1=\"" << y_of(s.min) << "\" x2=\""
        << cx + box_w / 4 << "\" y2=\"" << y_of(s.min) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << cx - box_w / 4 << "\" y1=\"" << y_of(s.max) << "\" x2=\""
        << cx + box_w / 4 << "\" y2=\"" << y_of(s.max) << "\" stroke=\"black\"/>\n";
    // box + median
    svg << "<rect x=\"" << cx - box_w / 2 << "\" y=\"" << y_of(s.q3) << "\" width=\"" << box_w
        << "\" height=\"" << y_of(s.q1) - y_of(s.q3) << "\" fill=\"" << color
        << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\"/>\n"
        << "<line x1=\"" << cx - box_w / 2 << "\" y1=\"" << y_of(s.median) << "\" x2=\""
        << cx + box_w / 2 << "\" y2=\"" << y_of(s.median) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << cx << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << kind
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace volt
