#include "sma/identification.hpp"

#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

#include "sma/constitutive.hpp"
#include "sma/errors.hpp"
#include "sma/fit_index.hpp"

namespace sma {

namespace {

// Objective value of a parameter set the model cannot simulate.
constexpr double kFailurePenalty = 1e4;

double initial_temperature(const Dataset& d, const MaterialParams& p) {
  if (std::isfinite(d.T_init)) return d.T_init;
  const DriveSample in = d.drive(0.0);
  return steady_state_temperature(in.J, in.T_E, p);
}

// Linear interpolation of uniformly sampled y(t0 + k dt) at t.
double resample(const std::vector<double>& y, double dt, double t) {
  if (y.empty()) return 0.0;
  const double k = t / dt;
  if (k <= 0.0) return y.front();
  const auto i = static_cast<std::size_t>(k);
  if (i + 1 >= y.size()) return y.back();
  const double w = k - static_cast<double>(i);
  return y[i] + w * (y[i + 1] - y[i]);
}

double nrmse_percent(const std::vector<double>& y, const std::vector<double>& y_hat) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double err = 0.0, dev = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    err += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    dev += (y[i] - mean) * (y[i] - mean);
  }
  if (!(dev > 0.0)) throw DegenerateSignal("dataset stress is constant");
  return 100.0 * std::sqrt(err / dev);
}

void check_mask(const std::vector<std::string>& names, const MaterialParams& p) {
  if (names.empty()) throw DomainError("no free parameters");
  for (const std::string& n : names) {
    const auto& fixed = fixed_parameters();
    if (std::find(fixed.begin(), fixed.end(), n) != fixed.end())
      throw DomainError("parameter '" + n + "' is fixed a priori and cannot be identified");
    if (param_value(p, n) == 0.0) throw DomainError("parameter '" + n + "' is zero; log search needs a nonzero start");
  }
}

void check_datasets(std::span<const Dataset> data) {
  if (data.empty()) throw DomainError("identification needs at least one dataset");
  for (const Dataset& d : data) {
    if (d.t.size() < 2 || d.sigma.size() != d.t.size())
      throw DomainError("dataset '" + d.name + "' needs matching t and sigma columns with at least two rows");
    if (!d.R.empty() && d.R.size() != d.t.size())
      throw DomainError("dataset '" + d.name + "' has an R column of the wrong length");
  }
}

struct SimplexProblem {
  std::span<const Dataset> data;
  MaterialParams base;
  std::vector<std::string> names;
  std::vector<double> signs;
  const FitConfig* config;

  MaterialParams params_at(const gsl_vector* u) const {
    MaterialParams p = base;
    for (std::size_t i = 0; i < names.size(); ++i) param_ref(p, names[i]) = signs[i] * std::exp(gsl_vector_get(u, i));
    return p;
  }
};

double simplex_objective(const gsl_vector* u, void* ctx) {
  const auto* prob = static_cast<const SimplexProblem*>(ctx);
  const MaterialParams p = prob->params_at(u);
  try {
    p.validate();
    return stress_objective(prob->data, p, *prob->config);
  } catch (const Error&) {
    return kFailurePenalty;
  }
}

struct FitSummary {
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double R = std::numeric_limits<double>::quiet_NaN();
};

FitSummary summarize(std::span<const Dataset> data, const MaterialParams& p, const FitConfig& config) {
  double ws = 0.0, s = 0.0, wr = 0.0, r = 0.0;
  for (const Dataset& d : data) {
    try {
      const SimulatedOutputs sim = simulate_dataset(d, p, config);
      try {
        s += d.weight * fit_index(d.sigma, sim.sigma);
        ws += d.weight;
      } catch (const DegenerateSignal&) {
      }
      if (!d.R.empty()) {
        r += d.weight * fit_index(d.R, sim.R);
        wr += d.weight;
      }
    } catch (const Error&) {
      ws += d.weight;
    }
  }
  FitSummary out;
  if (ws > 0.0) out.sigma = s / ws;
  if (wr > 0.0) out.R = r / wr;
  return out;
}

StageResult run_simplex(const std::string& stage, std::span<const Dataset> data, const MaterialParams& p0,
                        const std::vector<std::string>& names, const FitConfig& config) {
  check_datasets(data);
  check_mask(names, p0);
  SimplexProblem prob{data, p0, names, {}, &config};
  const std::size_t n = names.size();
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> u(gsl_vector_alloc(n), gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(n), gsl_vector_free);
  StageResult res;
  res.report.stage = stage;
  res.report.names = names;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = param_value(p0, names[i]);
    prob.signs.push_back(v > 0.0 ? 1.0 : -1.0);
    gsl_vector_set(u.get(), i, std::log(std::abs(v)));
    gsl_vector_set(step.get(), i, config.initial_step);
    res.report.before.push_back(v);
  }
  gsl_multimin_function f{simplex_objective, n, &prob};
  const double start = simplex_objective(u.get(), &prob);
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(s.get(), &f, u.get(), step.get());
  res.report.converged = false;
  int iter = 0;
  while (iter < config.max_iterations) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    res.report.trace.push_back(gsl_multimin_fminimizer_minimum(s.get()));
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), config.size_tol) == GSL_SUCCESS) {
      res.report.converged = true;
      break;
    }
  }
  res.report.iterations = iter;
  if (!res.report.converged)
    res.report.warning = stage + ": simplex did not converge in " + std::to_string(iter) +
                         " iterations; returning the best point found";
  // The start point is returned bit for bit unless the search improved on it.
  res.params = gsl_multimin_fminimizer_minimum(s.get()) < start ? prob.params_at(gsl_multimin_fminimizer_x(s.get()))
                                                                : p0;
  for (const std::string& name : names) res.report.after.push_back(param_value(res.params, name));
  const FitSummary fit = summarize(data, res.params, config);
  res.report.fit_sigma = fit.sigma;
  res.report.fit_R = fit.R;
  return res;
}

}  // namespace

const std::vector<std::string>& fixed_parameters() {
  static const std::vector<std::string> names = {"r0", "l0", "rho_V", "nu", "T0", "tau_x", "V_L", "k_B"};
  return names;
}

std::vector<std::string> default_mechanical_mask() {
  return {"E_A",  "E_M",  "eps_T", "lambda_h", "E_AL", "E_AR", "E_AC",     "sigma_AB",
          "E_ML", "E_MR", "E_MC",  "sigma_MB", "E_SL", "E_SR", "E_SC",     "sigma_SB"};
}

std::vector<std::string> thermal_mask() { return {"c_V", "h_M"}; }

SimulatedOutputs simulate_dataset(const Dataset& d, const MaterialParams& p, const FitConfig& config) {
  const double t_end = d.t.back();
  const double T0 = initial_temperature(d, p);
  // simulate on a uniform grid at the dataset's mean spacing, then resample
  const double dt = t_end / static_cast<double>(d.t.size() - 1);
  SimulatedOutputs out;
  std::vector<double> sigma, R, eps, x, T;
  if (config.model == FitModel::Hybrid) {
    HybridOptions o = config.hybrid;
    o.t_end = t_end;
    o.sample_rate = 1.0 / dt;
    const HybridTrajectory tr = integrate_hybrid(initial_hybrid_state(d.eps0, T0, p), d.drive, p, o);
    for (const HybridSample& s : tr.samples) {
      sigma.push_back(s.sigma);
      R.push_back(s.R);
      eps.push_back(s.eps_eff);
      x.push_back(s.x_M);
      T.push_back(s.T);
    }
  } else {
    MasOptions o = config.mas;
    o.t_end = t_end;
    o.sample_rate = 1.0 / dt;
    const MasTrajectory tr = simulate_mas(MasState{d.eps0, 0.0, T0}, d.drive, p, o);
    for (const MasSample& s : tr.samples) {
      sigma.push_back(s.sigma);
      R.push_back(s.R);
      eps.push_back(s.eps);
      x.push_back(s.x_M);
      T.push_back(s.T);
    }
  }
  for (double t : d.t) {
    out.sigma.push_back(resample(sigma, dt, t));
    out.R.push_back(resample(R, dt, t));
    out.eps.push_back(resample(eps, dt, t));
    out.x_M.push_back(resample(x, dt, t));
    out.T.push_back(resample(T, dt, t));
  }
  return out;
}

double stress_objective(std::span<const Dataset> data, const MaterialParams& p, const FitConfig& config) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = config.workers > 0 ? static_cast<std::size_t>(config.workers) : hw;
  auto one = [&](const Dataset& d) {
    const SimulatedOutputs sim = simulate_dataset(d, p, config);
    return nrmse_percent(d.sigma, sim.sigma);
  };
  std::vector<double> values(data.size());
  if (workers <= 1 || data.size() <= 1) {
    for (std::size_t i = 0; i < data.size(); ++i) values[i] = one(data[i]);
  } else {
    for (std::size_t begin = 0; begin < data.size(); begin += workers) {
      const std::size_t end = std::min(data.size(), begin + workers);
      std::vector<std::future<double>> jobs;
      for (std::size_t i = begin; i < end; ++i) jobs.push_back(std::async(std::launch::async, one, std::cref(data[i])));
      for (std::size_t i = begin; i < end; ++i) values[i] = jobs[i - begin].get();
    }
  }
  double total = 0.0, weights = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += data[i].weight * values[i];
    weights += data[i].weight;
  }
  return total / weights;
}

StageResult fit_mechanical(std::span<const Dataset> data, const MaterialParams& p0, const FitConfig& config) {
  std::vector<std::string> names = config.free.empty() ? default_mechanical_mask() : config.free;
  for (const std::string& n : names)
    if (n == "c_V" || n == "h_M")
      throw DomainError("c_V and h_M are tuned on fast-rate data, not in the mechanical stage");
  return run_simplex("mechanical", data, p0, names, config);
}

StageResult fit_thermal_fast(std::span<const Dataset> data, const MaterialParams& p, const FitConfig& config) {
  return run_simplex("thermal", data, p, thermal_mask(), config);
}

ElectricalData electrical_data(const Dataset& d, const MaterialParams& p, const FitConfig& config) {
  if (d.R.empty()) throw DomainError("dataset '" + d.name + "' has no resistance record");
  const SimulatedOutputs sim = simulate_dataset(d, p, config);
  return ElectricalData{sim.eps, sim.x_M, sim.T, d.R};
}

ElectricalFit fit_electrical(std::span<const ElectricalData> data, const MaterialParams& p) {
  std::size_t rows = 0;
  for (const ElectricalData& d : data) {
    if (d.eps.size() != d.R.size() || d.x_M.size() != d.R.size() || d.T.size() != d.R.size())
      throw DomainError("electrical record columns differ in length");
    rows += d.R.size();
  }
  if (rows < 4) throw RankDeficient("electrical fit needs at least four samples");
  Eigen::MatrixXd A(rows, 4);
  Eigen::VectorXd b(rows);
  std::size_t k = 0;
  for (const ElectricalData& d : data) {
    for (std::size_t i = 0; i < d.R.size(); ++i, ++k) {
      const double eps = d.eps[i];
      const double x = clamp_phase(d.x_M[i]);
      const double dT = d.T[i] - p.T0;
      const double K = p.l0 * (1.0 + eps) / (p.cross_section() * (1.0 - p.nu * eps));
      A.row(k) << K * (1.0 - x), K * (1.0 - x) * dT, K * x, K * x * dT;
      b(k) = d.R[i];
    }
  }
  // Column scaling keeps the rank decision independent of units.
  const Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (int j = 0; j < 4; ++j)
    if (!(scale(j) > 0.0)) throw RankDeficient("regressor " + std::to_string(j + 1) + " is never excited");
  const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(As);
  qr.setThreshold(1e-9);
  if (qr.rank() < 4)
    throw RankDeficient("electrical regressors have rank " + std::to_string(qr.rank()) +
                        " < 4; the records do not excite both phases at several temperatures");
  const Eigen::VectorXd theta = qr.solve(b).cwiseQuotient(scale);
  ElectricalFit fit;
  fit.rho_eA0 = theta(0);
  fit.alpha_A = theta(1) / theta(0);
  fit.rho_eM0 = theta(2);
  fit.alpha_M = theta(3) / theta(2);
  fit.rms_residual = std::sqrt((A * theta - b).squaredNorm() / static_cast<double>(rows));
  return fit;
}

void apply(const ElectricalFit& fit, MaterialParams& p) {
  p.rho_eA0 = fit.rho_eA0;
  p.rho_eM0 = fit.rho_eM0;
  p.alpha_A = fit.alpha_A;
  p.alpha_M = fit.alpha_M;
}

IdentificationResult identify(std::span<const Dataset> slow, std::span<const Dataset> fast, const MaterialParams& p0,
                              const FitConfig& config) {
  IdentificationResult res;
  res.params = p0;
  auto stage = [](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      throw Error(name + " stage failed: " + e.what());
    }
  };
  stage("mechanical", [&] {
    StageResult r = fit_mechanical(slow, res.params, config);
    res.params = r.params;
    res.reports.push_back(std::move(r.report));
  });
  stage("thermal", [&] {
    FitConfig c = config;
    c.free.clear();
    StageResult r = fit_thermal_fast(fast, res.params, c);
    res.params = r.params;
    res.reports.push_back(std::move(r.report));
  });
  stage("electrical", [&] {
    std::vector<ElectricalData> records;
    std::vector<Dataset> all(slow.begin(), slow.end());
    all.insert(all.end(), fast.begin(), fast.end());
    for (const Dataset& d : all)
      if (!d.R.empty()) records.push_back(electrical_data(d, res.params, config));
    FitReport rep;
    rep.stage = "electrical";
    rep.names = {"rho_eA0", "rho_eM0", "alpha_A", "alpha_M"};
    for (const std::string& n : rep.names) rep.before.push_back(param_value(res.params, n));
    const ElectricalFit fit = fit_electrical(records, res.params);
    apply(fit, res.params);
    for (const std::string& n : rep.names) rep.after.push_back(param_value(res.params, n));
    rep.iterations = 1;
    rep.trace.push_back(fit.rms_residual);
    const FitSummary s = summarize(all, res.params, config);
    rep.fit_sigma = s.sigma;
    rep.fit_R = s.R;
    res.reports.push_back(std::move(rep));
  });
  return res;
}

Dataset synthesize_dataset(const std::string& name, const DriveInput& drive, double eps0, const MaterialParams& p,
                           double sample_rate, double noise, std::uint64_t seed, FitModel model) {
  Dataset d;
  d.name = name;
  d.drive = drive;
  d.eps0 = eps0;
  const double t_end = drive.duration();
  if (!(t_end > 0.0)) throw DomainError("synthetic data needs a drive with finite duration");
  const auto n = static_cast<std::size_t>(std::floor(t_end * sample_rate + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) d.t.push_back(static_cast<double>(i) / sample_rate);
  FitConfig c;
  c.model = model;
  const SimulatedOutputs sim = simulate_dataset(d, p, c);
  d.sigma = sim.sigma;
  d.R = sim.R;
  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    auto perturb = [&](std::vector<double>& y) {
      double ms = 0.0;
      for (double v : y) ms += v * v;
      std::normal_distribution<double> dist(0.0, noise * std::sqrt(ms / static_cast<double>(y.size())));
      for (double& v : y) v += dist(rng);
    };
    perturb(d.sigma);
    perturb(d.R);
  }
  return d;
}

std::string format_report(const FitReport& r) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "stage = " << r.stage << '\n';
  out << "iterations = " << r.iterations << '\n';
  out << "converged = " << (r.converged ? "true" : "false") << '\n';
  if (!r.warning.empty()) out << "warning = " << r.warning << '\n';
  out << "fit_sigma_percent = " << r.fit_sigma << '\n';
  out << "fit_R_percent = " << r.fit_R << '\n';
  for (std::size_t i = 0; i < r.names.size(); ++i)
    out << r.names[i] << " = " << r.before[i] << " -> " << r.after[i] << '\n';
  return out.str();
}

}  // namespace sma
