#include "sma/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include "sma/constitutive.hpp"
#include "sma/errors.hpp"
#include "sma/keyvalue.hpp"
#include "sma/trajectory_io.hpp"

namespace sma {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string prefixed(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out << prefix << line << '\n';
  return out.str();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

MaterialParams params_from(const KeyValueFile& kv, const std::string& key, const std::filesystem::path& base,
                           std::filesystem::path& chosen) {
  chosen = kv.has(key) ? resolve(base, kv.get_string(key)) : bundled_params_path();
  try {
    return load_params(chosen);
  } catch (const ParseError& e) {
    if (!kv.has(key)) throw;
    throw ParseError(kv.source(), kv.line_of(key), std::string("parameter file: ") + e.what());
  } catch (const DomainError& e) {
    throw ParseError(kv.source(), kv.line_of(key), std::string("parameter file: ") + e.what());
  }
}

void solver_options(const KeyValueFile& kv, HybridOptions& h, MasOptions& m) {
  h.rel_tol = m.rel_tol = kv.get_double("rel_tol", h.rel_tol);
  h.abs_tol = m.abs_tol = kv.get_double("abs_tol", h.abs_tol);
  h.sample_rate = m.sample_rate = kv.get_double("sample_rate_Hz", h.sample_rate);
  for (const char* key : {"rel_tol", "abs_tol", "sample_rate_Hz"})
    if (kv.has(key) && !(kv.get_double(key) > 0.0))
      throw ParseError(kv.source(), kv.line_of(key), std::string(key) + " must be positive");
}

// Constant value or a (times, values) schedule under `<stem>_schedule_*`.
Signal signal_from(const KeyValueFile& kv, const std::string& constant_key, const std::string& times_key,
                   const std::string& values_key, double fallback) {
  const bool has_schedule = kv.has(times_key) || kv.has(values_key);
  if (has_schedule && kv.has(constant_key))
    throw ParseError(kv.source(), kv.line_of(constant_key), constant_key + " conflicts with " + times_key);
  if (!has_schedule) return Signal(kv.get_double(constant_key, fallback));
  if (!kv.has(times_key) || !kv.has(values_key))
    throw ParseError(kv.source(), std::max(kv.line_of(times_key), kv.line_of(values_key)),
                     times_key + " and " + values_key + " must be given together");
  try {
    return Signal(kv.get_list(times_key), kv.get_list(values_key));
  } catch (const DomainError& e) {
    throw ParseError(kv.source(), kv.line_of(values_key), e.what());
  }
}

}  // namespace

DriveInput Scenario::drive() const {
  Signal v = waypoints.empty() ? triangular_rate(max_strain, strain_rate, cycles, params.l0)
                               : strain_path_rate(waypoints, strain_rate, params.l0);
  return DriveInput(std::move(v), J, T_E);
}

double Scenario::initial_temperature() const {
  if (std::isfinite(T_init)) return T_init;
  return steady_state_temperature(J(0.0), T_E(0.0), params);
}

void Scenario::validate() const {
  if (waypoints.empty()) {
    if (!(max_strain > 0.0 && max_strain <= 0.06)) throw DomainError("max_strain must lie in (0, 0.06]");
    if (cycles < 1) throw DomainError("cycles must be at least 1");
  } else {
    for (double w : waypoints)
      if (!(w >= 0.0 && w <= 0.06)) throw DomainError("strain waypoints must lie in [0, 0.06]");
  }
  if (!(strain_rate > 0.0)) throw DomainError("strain_rate_per_s must be positive");
  for (double j : J.values())
    if (j < 0.0) throw DomainError("power must be nonnegative");
  for (double te : T_E.values())
    if (!(te > 0.0)) throw DomainError("ambient temperature must be positive");
  if (std::isfinite(T_init) && !(T_init > 0.0)) throw DomainError("initial_temperature_K must be positive");
}

Scenario parse_scenario(const std::string& text, const std::string& source, const std::filesystem::path& base_dir) {
  const KeyValueFile kv = KeyValueFile::parse(text, source);
  kv.reject_unknown({"name", "model", "params_file", "max_strain", "strain_rate_per_s", "cycles", "strain_waypoints",
                     "power_W", "power_schedule_t_s", "power_schedule_W", "ambient_K", "ambient_schedule_t_s",
                     "ambient_schedule_K", "initial_strain", "initial_temperature_K", "duration_s", "rel_tol",
                     "abs_tol", "sample_rate_Hz", "output_dir"});
  Scenario s;
  s.name = kv.get_string("name", std::filesystem::path(source).stem().string());
  const std::string model = kv.get_string("model", "both");
  if (model == "hybrid")
    s.model = ModelChoice::Hybrid;
  else if (model == "mas")
    s.model = ModelChoice::Mas;
  else if (model == "both")
    s.model = ModelChoice::Both;
  else
    throw ParseError(source, kv.line_of("model"), "model must be hybrid, mas or both, not '" + model + "'");
  s.params = params_from(kv, "params_file", base_dir, s.params_file);
  if (kv.has("strain_waypoints")) {
    for (const char* k : {"max_strain", "cycles"})
      if (kv.has(k))
        throw ParseError(source, kv.line_of(k), std::string(k) + " conflicts with strain_waypoints");
    s.waypoints = kv.get_list("strain_waypoints");
  } else {
    s.max_strain = kv.get_double("max_strain");
    s.cycles = kv.get_int("cycles", 1);
  }
  s.strain_rate = kv.get_double("strain_rate_per_s");
  s.J = signal_from(kv, "power_W", "power_schedule_t_s", "power_schedule_W", 0.0);
  s.T_E = signal_from(kv, "ambient_K", "ambient_schedule_t_s", "ambient_schedule_K", 298.0);
  s.eps0 = kv.get_double("initial_strain", 0.0);
  s.T_init = kv.get_double("initial_temperature_K", s.T_init);
  s.duration = kv.get_double("duration_s", -1.0);
  solver_options(kv, s.hybrid, s.mas);
  s.output_dir = resolve(base_dir, kv.get_string("output_dir", "out"));
  try {
    s.validate();
    if (!s.waypoints.empty() && s.waypoints.front() != s.eps0)
      throw DomainError("the first strain waypoint must equal initial_strain");
    (void)s.drive();
  } catch (const DomainError& e) {
    // point at the most specific key the message names
    int line = 0;
    for (const std::string& key : kv.keys())
      if (std::string(e.what()).find(key) != std::string::npos) line = std::max(line, kv.line_of(key));
    throw ParseError(source, line, e.what());
  }
  s.hybrid.t_end = s.mas.t_end = s.duration;
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open scenario file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.string(), path.parent_path());
}

RunResult run_scenario(const Scenario& s) {
  RunResult r;
  const DriveInput drive = s.drive();
  const double T0 = s.initial_temperature();
  switch (s.model) {
    case ModelChoice::Hybrid:
      r.hybrid = integrate_hybrid(initial_hybrid_state(s.eps0, T0, s.params), drive, s.params, s.hybrid);
      break;
    case ModelChoice::Mas:
      r.mas = simulate_mas(MasState{s.eps0, 0.0, T0}, drive, s.params, s.mas);
      break;
    case ModelChoice::Both:
      r.comparison = compare_models(drive, s.eps0, T0, s.params, s.hybrid, s.mas);
      r.hybrid = r.comparison->hybrid;
      r.mas = r.comparison->mas;
      break;
  }
  return r;
}

std::string run_summary(const Scenario& s, const RunResult& r) {
  std::string out = "scenario = " + s.name + "\n";
  if (r.hybrid) out += prefixed(hybrid_summary(*r.hybrid), "hybrid.");
  if (r.mas) out += prefixed(mas_summary(*r.mas), "mas.");
  if (r.comparison) out += prefixed(comparison_summary(*r.comparison), "comparison.");
  return out;
}

std::vector<std::filesystem::path> write_run_artifacts(const Scenario& s, const RunResult& r,
                                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& suffix, auto&& writer) {
    const std::filesystem::path path = dir / (s.name + suffix);
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    writer(out);
    written.push_back(path);
  };
  if (r.hybrid) {
    emit("_hybrid.csv", [&](std::ostream& o) { write_hybrid_csv(o, *r.hybrid); });
    emit("_transitions.log", [&](std::ostream& o) { write_transition_log(o, *r.hybrid); });
  }
  if (r.mas) emit("_mas.csv", [&](std::ostream& o) { write_mas_csv(o, *r.mas); });
  emit("_drive.csv", [&](std::ostream& o) { write_drive_csv(o, s.drive()); });
  emit("_summary.txt", [&](std::ostream& o) { o << run_summary(s, r); });
  return written;
}

SweepGrid parse_sweep_grid(const std::string& text, const std::string& source, const std::filesystem::path& base_dir) {
  const KeyValueFile kv = KeyValueFile::parse(text, source);
  kv.reject_unknown({"strains", "powers_W", "rates_per_s", "cycles", "ambient_K", "params_file", "rel_tol", "abs_tol",
                     "sample_rate_Hz", "workers"});
  SweepGrid g;
  g.strains = kv.get_list("strains");
  g.powers = kv.get_list("powers_W");
  g.rates = kv.get_list("rates_per_s");
  g.cycles = kv.get_int("cycles", 3);
  g.ambient = kv.get_double("ambient_K", 298.0);
  g.workers = kv.get_int("workers", 1);
  g.params = params_from(kv, "params_file", base_dir, g.params_file);
  solver_options(kv, g.hybrid, g.mas);
  for (double e : g.strains)
    if (!(e > 0.0 && e <= 0.06)) throw ParseError(source, kv.line_of("strains"), "strains must lie in (0, 0.06]");
  for (double j : g.powers)
    if (j < 0.0) throw ParseError(source, kv.line_of("powers_W"), "powers must be nonnegative");
  for (double r : g.rates)
    if (!(r > 0.0)) throw ParseError(source, kv.line_of("rates_per_s"), "rates must be positive");
  if (g.cycles < 1) throw ParseError(source, kv.line_of("cycles"), "cycles must be at least 1");
  if (!(g.ambient > 0.0)) throw ParseError(source, kv.line_of("ambient_K"), "ambient_K must be positive");
  if (g.workers < 1) throw ParseError(source, kv.line_of("workers"), "workers must be at least 1");
  return g;
}

SweepGrid load_sweep_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open grid file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_sweep_grid(buffer.str(), path.string(), path.parent_path());
}

std::vector<SweepRow> run_sweep(const SweepGrid& g) {
  std::vector<SweepRow> rows;
  for (double e : g.strains)
    for (double j : g.powers)
      for (double r : g.rates) {
        SweepRow row;
        row.max_strain = e;
        row.power = j;
        row.rate = r;
        rows.push_back(row);
      }
  auto run_cell = [&g](SweepRow& row) {
    try {
      const DriveInput drive(triangular_rate(row.max_strain, row.rate, g.cycles, g.params.l0), Signal(row.power),
                             Signal(g.ambient));
      const double T0 = steady_state_temperature(row.power, g.ambient, g.params);
      const ModelComparison c = compare_models(drive, 0.0, T0, g.params, g.hybrid, g.mas);
      row.time_hybrid = c.hybrid.wall_time;
      row.time_mas = c.mas.wall_time;
      row.fit_sigma = c.fit_sigma;
      row.fit_R = c.fit_R;
      row.always_slack = c.always_slack;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };
  const std::size_t workers = static_cast<std::size_t>(std::max(1, g.workers));
  if (workers == 1) {
    for (SweepRow& row : rows) run_cell(row);
  } else {
    for (std::size_t begin = 0; begin < rows.size(); begin += workers) {
      std::vector<std::future<void>> jobs;
      for (std::size_t i = begin; i < std::min(rows.size(), begin + workers); ++i)
        jobs.push_back(std::async(std::launch::async, run_cell, std::ref(rows[i])));
      for (auto& j : jobs) j.get();
    }
  }
  return rows;
}

std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "max_strain_percent,power_mW,strain_rate_1e-3_per_s,time_hybrid_s,time_mas_s,fit_sigma_percent,"
         "fit_R_percent,status\n";
  for (const SweepRow& r : rows) {
    out << num(100.0 * r.max_strain) << ',' << num(1e3 * r.power) << ',' << num(1e3 * r.rate) << ',';
    if (!r.error.empty()) {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << ",,,,failed: " << msg << '\n';
    } else if (r.always_slack) {
      out << ",,,,always slack\n";
    } else {
      auto fit = [](double v) { return std::isfinite(v) ? num(v) : std::string(); };
      out << num(r.time_hybrid) << ',' << num(r.time_mas) << ',' << fit(r.fit_sigma) << ',' << fit(r.fit_R) << ",ok\n";
    }
  }
  return out.str();
}

Manifest parse_manifest(const std::string& text, const std::string& source, const std::filesystem::path& base_dir) {
  const KeyValueFile kv = KeyValueFile::parse(text, source);
  Manifest m;
  std::filesystem::path chosen;
  m.initial = params_from(kv, "initial_params", base_dir, chosen);
  m.output_params = kv.get_string("output_params", "identified.params");
  const std::string model = kv.get_string("model", "hybrid");
  if (model == "hybrid")
    m.config.model = FitModel::Hybrid;
  else if (model == "mas")
    m.config.model = FitModel::Mas;
  else
    throw ParseError(source, kv.line_of("model"), "model must be hybrid or mas, not '" + model + "'");
  m.config.max_iterations = kv.get_int("max_iterations", m.config.max_iterations);
  m.config.workers = kv.get_int("workers", m.config.workers);
  MasOptions mas;
  solver_options(kv, m.config.hybrid, mas);
  m.config.mas = mas;
  if (kv.has("free")) {
    std::stringstream ss(kv.get_string("free"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      try {
        (void)param_value(m.initial, item);
      } catch (const DomainError& e) {
        throw ParseError(source, kv.line_of("free"), e.what());
      }
      m.config.free.push_back(item);
    }
  }
  const std::vector<std::string> plain = {"initial_params", "output_params", "model", "free", "max_iterations",
                                          "workers", "rel_tol", "abs_tol", "sample_rate_Hz"};
  for (const std::string& key : kv.keys()) {
    if (std::find(plain.begin(), plain.end(), key) != plain.end()) continue;
    const bool slow = key.rfind("slow_", 0) == 0;
    const bool fast = key.rfind("fast_", 0) == 0;
    const int line = kv.line_of(key);
    if (!slow && !fast) throw ParseError(source, line, "unknown key '" + key + "'");
    std::vector<std::string> parts;
    std::stringstream ss(kv.get_string(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t") + 1);
      parts.push_back(item);
    }
    if (parts.size() < 2 || parts.size() > 3)
      throw ParseError(source, line, "dataset entry needs '<drive CSV>, <measurement CSV>[, weight]'");
    Dataset d;
    d.name = key;
    try {
      d.drive = read_drive_csv(resolve(base_dir, parts[0]));
      const CsvTable meas = read_csv(resolve(base_dir, parts[1]));
      d.t = meas.column("t");
      d.sigma = meas.column("sigma");
      if (meas.has("R")) d.R = meas.column("R");
      if (meas.has("eps")) d.eps0 = meas.column("eps").front();
    } catch (const ParseError& e) {
      throw ParseError(source, line, e.what());
    } catch (const DomainError& e) {
      throw ParseError(source, line, e.what());
    }
    if (parts.size() == 3) {
      char* end = nullptr;
      d.weight = std::strtod(parts[2].c_str(), &end);
      if (end != parts[2].c_str() + parts[2].size() || !(d.weight > 0.0))
        throw ParseError(source, line, "dataset weight must be a positive number");
    }
    if (d.t.size() < 2) throw ParseError(source, line, "measurement CSV needs at least two rows");
    (slow ? m.slow : m.fast).push_back(std::move(d));
  }
  if (m.slow.empty()) throw ParseError(source, 0, "manifest lists no slow_ datasets");
  if (m.fast.empty()) throw ParseError(source, 0, "manifest lists no fast_ datasets");
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open manifest");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.string(), path.parent_path());
}

IdentificationResult run_identification(const Manifest& m, const std::filesystem::path& output_dir) {
  IdentificationResult res = identify(m.slow, m.fast, m.initial, m.config);
  std::filesystem::create_directories(output_dir);
  const std::filesystem::path params_path =
      m.output_params.is_absolute() ? m.output_params : output_dir / m.output_params;
  save_params(res.params, params_path);
  std::string report;
  std::string trace = "stage,iteration,objective\n";
  for (const FitReport& r : res.reports) {
    report += format_report(r) + "\n";
    for (std::size_t i = 0; i < r.trace.size(); ++i)
      trace += r.stage + "," + std::to_string(i + 1) + "," + num(r.trace[i]) + "\n";
  }
  write_text(output_dir / "fit_report.txt", report);
  write_text(output_dir / "objective_trace.csv", trace);
  return res;
}

}  // namespace sma
