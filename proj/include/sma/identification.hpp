#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sma/drive.hpp"
#include "sma/hybrid_solver.hpp"
#include "sma/mas_model.hpp"
#include "sma/params.hpp"

namespace sma {

/// One experiment: the drive that produced it and the measured outputs on a
/// common time grid. An empty R column means no resistance was recorded.
struct Dataset {
  std::string name;
  DriveInput drive;
  double eps0 = 0.0;
  double T_init = std::numeric_limits<double>::quiet_NaN();  // NaN: steady state of the drive at t = 0
  std::vector<double> t;
  std::vector<double> sigma;
  std::vector<double> R;
  double weight = 1.0;
};

enum class FitModel { Hybrid, Mas };

struct FitConfig {
  std::vector<std::string> free;  // empty: the stage default
  int max_iterations = 600;
  double initial_step = 0.1;      // initial simplex size in log-parameter space
  double size_tol = 1e-4;
  FitModel model = FitModel::Hybrid;
  HybridOptions hybrid;
  MasOptions mas;
  int workers = 0;                // concurrent dataset simulations, 0: hardware concurrency
};

struct FitReport {
  std::string stage;
  std::vector<std::string> names;
  std::vector<double> before;
  std::vector<double> after;
  std::vector<double> trace;  // best objective after each simplex iteration
  int iterations = 0;
  bool converged = true;
  std::string warning;
  double fit_sigma = std::numeric_limits<double>::quiet_NaN();  // weighted mean over datasets
  double fit_R = std::numeric_limits<double>::quiet_NaN();
};

struct StageResult {
  MaterialParams params;
  FitReport report;
};

/// Parameters fixed a priori; identification never changes them.
const std::vector<std::string>& fixed_parameters();
/// Mechanical, thermal and outer-loop parameters freed by default on slow
/// tests. The interpolator shape constants stay frozen.
std::vector<std::string> default_mechanical_mask();
std::vector<std::string> thermal_mask();

/// Simulated outputs of a dataset's drive, interpolated onto its time grid.
/// `eps` is the strain entering the resistance law (effective strain for the
/// hybrid model).
struct SimulatedOutputs {
  std::vector<double> sigma, R, eps, x_M, T;
};
SimulatedOutputs simulate_dataset(const Dataset& d, const MaterialParams& p, const FitConfig& config);

/// Weighted mean of 100 |y - y_hat| / |y - mean(y)| over the datasets. Equal
/// to 100 - FIT whenever FIT > 0, and keeps its slope where FIT clips at 0.
double stress_objective(std::span<const Dataset> data, const MaterialParams& p, const FitConfig& config);

/// Nelder-Mead on the slow-rate datasets over `config.free` (default mask),
/// positive and negative parameters alike searched as sign * exp(u).
StageResult fit_mechanical(std::span<const Dataset> data, const MaterialParams& p0, const FitConfig& config);
/// Same search restricted to c_V and h_M on fast-rate datasets.
StageResult fit_thermal_fast(std::span<const Dataset> data, const MaterialParams& p, const FitConfig& config);

/// Known states along a resistance record.
struct ElectricalData {
  std::vector<double> eps, x_M, T, R;
};

struct ElectricalFit {
  double rho_eA0 = 0.0;
  double rho_eM0 = 0.0;
  double alpha_A = 0.0;
  double alpha_M = 0.0;
  double rms_residual = 0.0;  // [Ohm]
};

/// Least squares on R / K = rho_eA0 (1-x) + rho_eA0 alpha_A (1-x)(T-T0)
///                         + rho_eM0 x + rho_eM0 alpha_M x (T-T0),
/// K = l0 (1+eps) / (A (1 - nu eps)). Throws RankDeficient when the records
/// do not excite all four regressors.
ElectricalFit fit_electrical(std::span<const ElectricalData> data, const MaterialParams& p);
ElectricalData electrical_data(const Dataset& d, const MaterialParams& p, const FitConfig& config);
void apply(const ElectricalFit& fit, MaterialParams& p);

struct IdentificationResult {
  MaterialParams params;
  std::vector<FitReport> reports;  // mechanical, thermal, electrical
};

/// Slow-rate simplex, then fast-rate thermal tuning, then electrical least
/// squares on every dataset carrying R. A failing stage raises Error naming it.
IdentificationResult identify(std::span<const Dataset> slow, std::span<const Dataset> fast, const MaterialParams& p0,
                              const FitConfig& config);

/// Model-generated dataset. Gaussian noise of standard deviation
/// `noise * rms(signal)` is added to sigma and R.
Dataset synthesize_dataset(const std::string& name, const DriveInput& drive, double eps0, const MaterialParams& p,
                           double sample_rate, double noise, std::uint64_t seed,
                           FitModel model = FitModel::Hybrid);

std::string format_report(const FitReport& r);

}  // namespace sma
