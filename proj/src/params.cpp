#include "sma/params.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "sma/errors.hpp"
#include "sma/keyvalue.hpp"

namespace sma {

double MaterialParams::omega() const { return std::numbers::pi * r0 * r0 * l0; }
double MaterialParams::lateral_area() const { return 2.0 * std::numbers::pi * r0 * l0; }
double MaterialParams::cross_section() const { return std::numbers::pi * r0 * r0; }

void MaterialParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw DomainError(std::string("parameter ") + name + " must be positive");
  };
  positive(r0, "r0");
  positive(l0, "l0");
  positive(E_A, "E_A");
  positive(E_M, "E_M");
  positive(eps_T, "eps_T");
  positive(rho_V, "rho_V");
  positive(c_V, "c_V");
  positive(lambda_h, "lambda_h");
  positive(tau_x, "tau_x");
  positive(V_L, "V_L");
  positive(k_B, "k_B");
  positive(T0, "T0");
  // log arguments of the outer interpolators over x in [0, 1]
  auto log_ok = [](double lambda, const char* name) {
    if (!(1.0 + std::min(lambda, 0.0) > 0.0))
      throw DomainError(std::string("interpolator coefficient ") + name + " makes a log argument non-positive");
  };
  log_ok(lambda_AL, "lambda_AL");
  log_ok(lambda_AR, "lambda_AR");
  log_ok(lambda_ML, "lambda_ML");
  log_ok(lambda_MR, "lambda_MR");
}

MaterialParams identified_params() { return MaterialParams{}; }

const std::vector<ParamField>& param_fields() {
  using P = MaterialParams;
  static const std::vector<ParamField> fields = {
      {"r0", &P::r0},           {"l0", &P::l0},
      {"E_A", &P::E_A},         {"E_M", &P::E_M},
      {"eps_T", &P::eps_T},     {"rho_V", &P::rho_V},
      {"c_V", &P::c_V},         {"h_M", &P::h_M},
      {"lambda_h", &P::lambda_h}, {"nu", &P::nu},
      {"T0", &P::T0},           {"rho_eA0", &P::rho_eA0},
      {"rho_eM0", &P::rho_eM0}, {"alpha_A", &P::alpha_A},
      {"alpha_M", &P::alpha_M}, {"tau_x", &P::tau_x},
      {"V_L", &P::V_L},         {"k_B", &P::k_B},
      {"E_AL", &P::E_AL},       {"E_AR", &P::E_AR},
      {"E_AC", &P::E_AC},       {"lambda_AL", &P::lambda_AL},
      {"lambda_AR", &P::lambda_AR}, {"sigma_AB", &P::sigma_AB},
      {"E_ML", &P::E_ML},       {"E_MR", &P::E_MR},
      {"E_MC", &P::E_MC},       {"lambda_ML", &P::lambda_ML},
      {"lambda_MR", &P::lambda_MR}, {"sigma_MB", &P::sigma_MB},
      {"E_SL", &P::E_SL},       {"E_SR", &P::E_SR},
      {"E_SC", &P::E_SC},       {"lambda_SL", &P::lambda_SL},
      {"lambda_SR", &P::lambda_SR}, {"x0SL", &P::x0SL},
      {"x0SR", &P::x0SR},       {"sigma_SB", &P::sigma_SB},
  };
  return fields;
}

double& param_ref(MaterialParams& p, std::string_view key) {
  for (const auto& f : param_fields())
    if (f.key == key) return p.*(f.member);
  throw DomainError("unknown parameter '" + std::string(key) + "'");
}

double param_value(const MaterialParams& p, std::string_view key) {
  return param_ref(const_cast<MaterialParams&>(p), key);
}

MaterialParams parse_params(const std::string& text, const std::string& source) {
  const KeyValueFile kv = KeyValueFile::parse(text, source);
  std::vector<std::string> allowed;
  for (const auto& f : param_fields()) allowed.emplace_back(f.key);
  kv.reject_unknown(allowed);
  MaterialParams p = identified_params();
  for (const auto& f : param_fields()) {
    const std::string key(f.key);
    if (kv.has(key)) p.*(f.member) = kv.get_double(key);
  }
  p.validate();
  return p;
}

MaterialParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open parameter file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_params(buffer.str(), path.string());
}

std::string format_params(const MaterialParams& p) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& f : param_fields()) out << f.key << " = " << p.*(f.member) << '\n';
  return out.str();
}

void save_params(const MaterialParams& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write parameter file " + path.string());
  out << format_params(p);
}

std::filesystem::path bundled_params_path() {
  return std::filesystem::path(SMA_DATA_DIR) / "identified.params";
}

}  // namespace sma
