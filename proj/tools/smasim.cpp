// smasim: command-line front end of the SMA wire simulation library.
//
//   smasim run <scenario> [--output-dir D] [--model M] [--rel-tol X] [--abs-tol Y]
//   smasim sweep <grid> [--output F] [--workers N] [--rel-tol X] [--abs-tol Y]
//   smasim identify <manifest> [--output-dir D] [--workers N]
//   smasim validate <file>...
//
// Exit codes: 0 success, 1 parse or validation error, 2 solver failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "sma/errors.hpp"
#include "sma/keyvalue.hpp"
#include "sma/params.hpp"
#include "sma/scenario.hpp"
#include "sma/trajectory_io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kSolverFailure = 2;

struct Overrides {
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;

  template <typename Opts>
  void apply(Opts& o) const {
    if (rel_tol) o.rel_tol = *rel_tol;
    if (abs_tol) o.abs_tol = *abs_tol;
  }
};

int cmd_run(const fs::path& file, const std::optional<fs::path>& out_dir, const std::string& model,
            const Overrides& ov) {
  sma::Scenario s;
  try {
    s = sma::load_scenario(file);
    if (model == "hybrid") s.model = sma::ModelChoice::Hybrid;
    if (model == "mas") s.model = sma::ModelChoice::Mas;
    if (model == "both") s.model = sma::ModelChoice::Both;
    ov.apply(s.hybrid);
    ov.apply(s.mas);
  } catch (const sma::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  sma::RunResult r;
  try {
    r = sma::run_scenario(s);
  } catch (const sma::Error& e) {
    std::cerr << "solver failure in " << s.name << ": " << e.what() << '\n';
    return kSolverFailure;
  }
  const fs::path dir = out_dir ? *out_dir : s.output_dir;
  for (const fs::path& p : sma::write_run_artifacts(s, r, dir)) std::cout << "wrote " << p.string() << '\n';
  std::cout << sma::run_summary(s, r);
  return kOk;
}

int cmd_sweep(const fs::path& file, const std::optional<fs::path>& output, std::optional<int> workers,
              const Overrides& ov) {
  sma::SweepGrid g;
  try {
    g = sma::load_sweep_grid(file);
    if (workers) {
      if (*workers < 1) throw sma::ParseError("--workers", 0, "worker count must be at least 1");
      g.workers = *workers;
    }
    ov.apply(g.hybrid);
    ov.apply(g.mas);
  } catch (const sma::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  const std::vector<sma::SweepRow> rows = sma::run_sweep(g);
  const std::string table = sma::format_sweep_csv(rows);
  if (output) {
    sma::write_text(*output, table);
    std::cout << "wrote " << output->string() << " (" << rows.size() << " rows)\n";
  } else {
    std::cout << table;
  }
  for (const sma::SweepRow& r : rows)
    if (!r.error.empty()) std::cerr << "cell failed: " << r.error << '\n';
  return kOk;
}

int cmd_identify(const fs::path& file, const std::optional<fs::path>& out_dir, std::optional<int> workers) {
  sma::Manifest m;
  try {
    m = sma::load_manifest(file);
    if (workers) m.config.workers = *workers;
  } catch (const sma::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  const fs::path dir = out_dir ? *out_dir : file.parent_path() / "identification";
  try {
    const sma::IdentificationResult res = sma::run_identification(m, dir);
    for (const sma::FitReport& r : res.reports) {
      if (!r.warning.empty()) std::cerr << "warning: " << r.warning << '\n';
      std::cout << sma::format_report(r) << '\n';
    }
  } catch (const sma::Error& e) {
    std::cerr << "identification failed: " << e.what() << '\n';
    return kSolverFailure;
  }
  std::cout << "wrote " << (dir / "fit_report.txt").string() << '\n';
  return kOk;
}

// Kind of file by extension, falling back to its keys.
std::string file_kind(const fs::path& file) {
  const std::string ext = file.extension().string();
  if (ext == ".scenario" || ext == ".grid" || ext == ".params" || ext == ".manifest") return ext.substr(1);
  const sma::KeyValueFile kv = sma::KeyValueFile::load(file);
  if (kv.has("strains")) return "grid";
  if (kv.has("strain_rate_per_s")) return "scenario";
  for (const std::string& k : kv.keys())
    if (k.rfind("slow_", 0) == 0) return "manifest";
  return "params";
}

int cmd_validate(const std::vector<fs::path>& files) {
  int status = kOk;
  for (const fs::path& f : files) {
    try {
      const std::string kind = file_kind(f);
      if (kind == "scenario")
        (void)sma::load_scenario(f);
      else if (kind == "grid")
        (void)sma::load_sweep_grid(f);
      else if (kind == "manifest")
        (void)sma::load_manifest(f);
      else
        (void)sma::load_params(f);
      std::cout << f.string() << ": valid " << kind << '\n';
    } catch (const sma::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      status = kInvalid;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation of SMA wire actuators: hybrid model and thermally activated baseline"};
  app.require_subcommand(1);

  Overrides ov;
  std::optional<fs::path> out_dir;
  std::optional<fs::path> output;
  std::optional<int> workers;
  std::string model;
  fs::path file;
  std::vector<fs::path> files;

  auto* run = app.add_subcommand("run", "simulate one scenario and write trajectories");
  run->add_option("scenario", file, "scenario file")->required();
  run->add_option("--output-dir,-o", out_dir, "directory for the artifacts (default: the scenario's output_dir)");
  run->add_option("--model", model, "override the scenario model")->check(CLI::IsMember({"hybrid", "mas", "both"}));
  run->add_option("--rel-tol", ov.rel_tol, "relative tolerance of both integrators");
  run->add_option("--abs-tol", ov.abs_tol, "absolute tolerance of both integrators");

  auto* sweep = app.add_subcommand("sweep", "compare both models on every cell of an experiment grid");
  sweep->add_option("grid", file, "grid file")->required();
  sweep->add_option("--output,-o", output, "CSV table path (default: standard output)");
  sweep->add_option("--workers,-j", workers, "cells simulated concurrently");
  sweep->add_option("--rel-tol", ov.rel_tol, "relative tolerance of both integrators");
  sweep->add_option("--abs-tol", ov.abs_tol, "absolute tolerance of both integrators");

  auto* ident = app.add_subcommand("identify", "run the three-stage parameter identification");
  ident->add_option("manifest", file, "dataset manifest")->required();
  ident->add_option("--output-dir,-o", out_dir, "directory for the fitted parameters and reports");
  ident->add_option("--workers,-j", workers, "datasets simulated concurrently");

  auto* validate = app.add_subcommand("validate", "check scenario, grid, manifest or parameter files");
  validate->add_option("files", files, "files to check")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  if (*run) return cmd_run(file, out_dir, model, ov);
  if (*sweep) return cmd_sweep(file, output, workers, ov);
  if (*ident) return cmd_identify(file, out_dir, workers);
  return cmd_validate(files);
}
