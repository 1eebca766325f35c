#include "sma/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "sma/errors.hpp"

namespace sma {

namespace {

// %.12g keeps the files byte-identical across runs and short enough to plot.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_hybrid_csv(std::ostream& out, const HybridTrajectory& tr) {
  out << "t,j,eps,T,q,s,n_l,x_M,sigma,f,R,eps_eff\n";
  for (const HybridSample& s : tr.samples) {
    out << num(s.t) << ',' << s.j << ',' << num(s.eps) << ',' << num(s.T) << ',' << static_cast<int>(s.xd.q) << ','
        << s.xd.s << ',' << s.xd.n_l << ',' << num(s.x_M) << ',' << num(s.sigma) << ',' << num(s.f) << ','
        << num(s.R) << ',' << num(s.eps_eff) << '\n';
  }
}

void write_mas_csv(std::ostream& out, const MasTrajectory& tr) {
  out << "t,eps,x_M,T,sigma,f,R\n";
  for (const MasSample& s : tr.samples) {
    out << num(s.t) << ',' << num(s.eps) << ',' << num(s.x_M) << ',' << num(s.T) << ',' << num(s.sigma) << ','
        << num(s.f) << ',' << num(s.R) << '\n';
  }
}

void write_transition_log(std::ostream& out, const HybridTrajectory& tr) {
  for (const TransitionRecord& r : tr.transitions) {
    out << "t=" << num(r.t) << " j=" << r.j << " from=" << describe(r.from) << " to=" << describe(r.to) << " edge=g"
        << r.index << " trigger=\"" << r.trigger << "\" flow_ok=" << (r.flow_ok ? "true" : "false") << '\n';
  }
}

std::string hybrid_summary(const HybridTrajectory& tr) {
  std::ostringstream out;
  out << "model = hybrid\n";
  out << "samples = " << tr.samples.size() << '\n';
  out << "jumps = " << tr.jumps() << '\n';
  out << "slack_segments = " << tr.slack_segments() << '\n';
  out << "max_chain_length = " << tr.max_chain_length << '\n';
  out << "steps = " << tr.steps << '\n';
  out << "rejected_steps = " << tr.rejected_steps << '\n';
  if (!tr.samples.empty()) {
    const HybridSample& last = tr.samples.back();
    out << "final_t = " << num(last.t) << '\n';
    out << "final_eps = " << num(last.eps) << '\n';
    out << "final_T = " << num(last.T) << '\n';
    out << "final_x_M = " << num(last.x_M) << '\n';
    out << "final_mode = " << describe(last.xd) << '\n';
  }
  out << "wall_time_s = " << num(tr.wall_time) << '\n';
  return out.str();
}

std::string mas_summary(const MasTrajectory& tr) {
  std::ostringstream out;
  out << "model = mas\n";
  out << "samples = " << tr.samples.size() << '\n';
  out << "reversals = " << tr.reversals << '\n';
  out << "closures = " << tr.closures << '\n';
  out << "steps = " << tr.steps << '\n';
  out << "rejected_steps = " << tr.rejected_steps << '\n';
  if (!tr.samples.empty()) {
    const MasSample& last = tr.samples.back();
    out << "final_t = " << num(last.t) << '\n';
    out << "final_eps = " << num(last.eps) << '\n';
    out << "final_T = " << num(last.T) << '\n';
    out << "final_x_M = " << num(last.x_M) << '\n';
  }
  out << "wall_time_s = " << num(tr.wall_time) << '\n';
  return out.str();
}

std::string comparison_summary(const ModelComparison& c) {
  std::ostringstream out;
  out << "fit_sigma_percent = " << num(c.fit_sigma) << '\n';
  out << "fit_R_percent = " << num(c.fit_R) << '\n';
  out << "always_slack = " << (c.always_slack ? "true" : "false") << '\n';
  if (!c.hybrid.samples.empty() && !c.mas.samples.empty()) {
    out << "final_delta_eps = " << num(c.hybrid.samples.back().eps - c.mas.samples.back().eps) << '\n';
    out << "final_delta_T = " << num(c.hybrid.samples.back().T - c.mas.samples.back().T) << '\n';
  }
  out << "wall_ratio = " << num(c.wall_ratio) << '\n';
  return out.str();
}

void write_drive_csv(std::ostream& out, const DriveInput& drive) {
  out << "t,v,J,T_E\n";
  std::vector<double> times = drive.breakpoints();
  if (times.empty()) times.push_back(0.0);
  for (double t : times) {
    const DriveSample s = drive(t);
    out << num(t) << ',' << num(s.v) << ',' << num(s.J) << ',' << num(s.T_E) << '\n';
  }
}

DriveInput read_drive_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  for (const char* name : {"t", "v", "J", "T_E"})
    if (!table.has(name)) throw ParseError(path.string(), 1, std::string("drive CSV lacks column '") + name + "'");
  const auto& t = table.column("t");
  try {
    return DriveInput(Signal(t, table.column("v")), Signal(t, table.column("J")), Signal(t, table.column("T_E")));
  } catch (const DomainError& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

bool CsvTable::has(const std::string& name) const {
  for (const std::string& h : header)
    if (h == name) return true;
  return false;
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  throw DomainError("CSV has no column '" + name + "'");
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(trim(line));
    if (table.header.empty()) {
      table.header = cells;
      table.columns.resize(cells.size());
      continue;
    }
    if (cells.size() != table.header.size())
      throw ParseError(source, lineno,
                       "expected " + std::to_string(table.header.size()) + " cells, got " + std::to_string(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (cells[i].empty() || end != cells[i].c_str() + cells[i].size())
        throw ParseError(source, lineno, "'" + cells[i] + "' is not a number");
      table.columns[i].push_back(v);
    }
  }
  if (table.header.empty()) throw ParseError(source, lineno, "empty CSV");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open CSV file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace sma
