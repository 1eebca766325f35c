#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sma/drive.hpp"
#include "sma/hybrid_solver.hpp"
#include "sma/mas_model.hpp"

namespace sma {

/// Columns t,j,eps,T,q,s,n_l,x_M,sigma,f,R,eps_eff; q is 1 (AM), -1 (MA), 0 (M).
void write_hybrid_csv(std::ostream& out, const HybridTrajectory& tr);
/// Columns t,eps,x_M,T,sigma,f,R.
void write_mas_csv(std::ostream& out, const MasTrajectory& tr);

/// One line per jump:
///   t=<s> j=<n> from=<mode>[n=<l>] to=<mode>[n=<l>] edge=g<m> trigger="<predicate>" flow_ok=<bool>
void write_transition_log(std::ostream& out, const HybridTrajectory& tr);

/// `key = value` blocks, readable back with KeyValueFile. Wall times are the
/// only nondeterministic fields.
std::string hybrid_summary(const HybridTrajectory& tr);
std::string mas_summary(const MasTrajectory& tr);
std::string comparison_summary(const ModelComparison& c);

/// Drive breakpoints as columns t,v,J,T_E (piecewise linear between rows).
void write_drive_csv(std::ostream& out, const DriveInput& drive);
DriveInput read_drive_csv(const std::filesystem::path& path);

/// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  bool has(const std::string& name) const;
  const std::vector<double>& column(const std::string& name) const;
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<string>");

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sma
