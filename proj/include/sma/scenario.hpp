#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sma/drive.hpp"
#include "sma/hybrid_solver.hpp"
#include "sma/identification.hpp"
#include "sma/mas_model.hpp"
#include "sma/params.hpp"

namespace sma {

enum class ModelChoice { Hybrid, Mas, Both };

/// One simulation run. Keys of the text format (units in the key names):
///
///   name, model = hybrid | mas | both, params_file,
///   max_strain, strain_rate_per_s, cycles            (triangular profile)
///   strain_waypoints                                 (instead of max_strain/cycles)
///   power_W | power_schedule_t_s + power_schedule_W
///   ambient_K | ambient_schedule_t_s + ambient_schedule_K
///   initial_strain, initial_temperature_K, duration_s
///   rel_tol, abs_tol, sample_rate_Hz, output_dir
struct Scenario {
  std::string name = "scenario";
  ModelChoice model = ModelChoice::Both;
  std::filesystem::path params_file;  // empty: bundled parameters
  MaterialParams params;
  double max_strain = 0.0;
  double strain_rate = 0.0;  // [1/s]
  int cycles = 1;
  std::vector<double> waypoints;  // nonempty: strain path instead of triangles
  Signal J{0.0};
  Signal T_E{298.0};
  double eps0 = 0.0;
  double T_init = std::numeric_limits<double>::quiet_NaN();  // NaN: steady state at t = 0
  double duration = -1.0;  // negative: end of the strain profile
  HybridOptions hybrid;
  MasOptions mas;
  std::filesystem::path output_dir = "out";

  DriveInput drive() const;
  double initial_temperature() const;
  /// Throws DomainError naming the violated constraint.
  void validate() const;
};

/// Relative paths inside the file resolve against `base_dir`.
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>",
                        const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

struct RunResult {
  std::optional<HybridTrajectory> hybrid;
  std::optional<MasTrajectory> mas;
  std::optional<ModelComparison> comparison;  // model = both
};

RunResult run_scenario(const Scenario& s);

/// Files written to `dir`: <name>_hybrid.csv, <name>_transitions.log,
/// <name>_mas.csv, <name>_drive.csv, <name>_summary.txt. Returns the paths.
std::vector<std::filesystem::path> write_run_artifacts(const Scenario& s, const RunResult& r,
                                                       const std::filesystem::path& dir);
std::string run_summary(const Scenario& s, const RunResult& r);

/// Experiment grid; every (strain, power, rate) combination is one cell.
/// Keys: strains, powers_W, rates_per_s, cycles, ambient_K, params_file,
/// rel_tol, abs_tol, sample_rate_Hz, workers.
struct SweepGrid {
  std::vector<double> strains;
  std::vector<double> powers;
  std::vector<double> rates;
  int cycles = 3;
  double ambient = 298.0;
  std::filesystem::path params_file;
  MaterialParams params;
  HybridOptions hybrid;
  MasOptions mas;
  int workers = 1;

  std::size_t cells() const { return strains.size() * powers.size() * rates.size(); }
};

SweepGrid parse_sweep_grid(const std::string& text, const std::string& source = "<string>",
                           const std::filesystem::path& base_dir = ".");
SweepGrid load_sweep_grid(const std::filesystem::path& path);

struct SweepRow {
  double max_strain = 0.0;
  double power = 0.0;
  double rate = 0.0;
  double time_hybrid = 0.0;
  double time_mas = 0.0;
  double fit_sigma = 0.0;
  double fit_R = 0.0;
  bool always_slack = false;
  std::string error;  // nonempty: the cell failed
};

/// Cells in strain-major, then power, then rate order regardless of `workers`.
std::vector<SweepRow> run_sweep(const SweepGrid& grid);
/// Columns max_strain_percent, power_mW, strain_rate_1e-3_per_s, time_hybrid_s,
/// time_mas_s, fit_sigma_percent, fit_R_percent, status. Cells of wires that
/// never tension have empty time and FIT fields.
std::string format_sweep_csv(const std::vector<SweepRow>& rows);

/// Identification run description. Keys:
///   initial_params, output_params, model = hybrid | mas, free, max_iterations,
///   workers, rel_tol, abs_tol,
///   slow_<label> = <drive CSV>, <measurement CSV>[, weight]
///   fast_<label> = ...
/// Measurement CSVs carry columns t and sigma, optionally R.
struct Manifest {
  MaterialParams initial;
  std::filesystem::path output_params = "identified.params";
  std::vector<Dataset> slow;
  std::vector<Dataset> fast;
  FitConfig config;
};

Manifest parse_manifest(const std::string& text, const std::string& source = "<string>",
                        const std::filesystem::path& base_dir = ".");
Manifest load_manifest(const std::filesystem::path& path);

/// Runs the pipeline and writes the fitted parameter file, a report and the
/// objective trace CSV next to it.
IdentificationResult run_identification(const Manifest& m, const std::filesystem::path& output_dir);

}  // namespace sma
