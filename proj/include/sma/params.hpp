#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sma {

/// Constitutive constants of a polycrystalline SMA wire, SI units throughout.
///
/// Outer-loop coefficients are stored exactly as identified; the interpolators
/// in constitutive.hpp consume them without rescaling.
struct MaterialParams {
  // geometry
  double r0 = 37.5e-6;   // wire radius [m]
  double l0 = 100e-3;    // austenitic reference length [m]
  // mechanical
  double E_A = 50e9;     // [Pa]
  double E_M = 31e9;     // [Pa]
  double eps_T = 4.07e-2;
  // thermal
  double rho_V = 6500.0;   // [kg/m^3]
  double c_V = 450.0;      // [J/(kg K)]
  double h_M = 22e3;       // [J/kg]
  double lambda_h = 235.0; // convection [W/(K m^2)]
  double T0 = 393.0;       // [K]
  // electrical
  double nu = 0.3;
  double rho_eA0 = 8.11e-7;   // [Ohm m]
  double rho_eM0 = 10.02e-7;  // [Ohm m]
  double alpha_A = 0.0;       // [1/K]
  double alpha_M = 1.4e-3;    // [1/K]
  // thermally activated kinetics (baseline model only)
  double tau_x = 0.01;   // [s]
  double V_L = 5e-23;    // [m^3]
  double k_B = 1.38e-23; // [J/K]
  // outer loop interpolators
  double E_AL = 2.397e8, E_AR = -8.765e8, E_AC = -1.560e9;
  double lambda_AL = 120.0, lambda_AR = 4.0, sigma_AB = 1.411e9;
  double E_ML = 5.245e8, E_MR = -1.791e8, E_MC = -1.060e9;
  double lambda_ML = 9.5, lambda_MR = 100.0, sigma_MB = 8.263e8;
  double E_SL = 7.709e6, E_SR = -3.904e5, E_SC = 3.997e5;
  double lambda_SL = 80.0, lambda_SR = 20.0;
  double x0SL = -1.000e-3, x0SR = 1.0;
  double sigma_SB = 3.821e5;

  /// Wire volume pi r0^2 l0 [m^3].
  double omega() const;
  /// Lateral heat exchange surface 2 pi r0 l0 [m^2].
  double lateral_area() const;
  double cross_section() const;

  /// Throws DomainError naming the first violated invariant.
  void validate() const;

  bool operator==(const MaterialParams&) const = default;
};

/// The identified parameter set of the 75 um DYNALLOY wire.
MaterialParams identified_params();

/// Named access used by the serializer and by the identification masks.
struct ParamField {
  std::string_view key;
  double MaterialParams::*member;
};
const std::vector<ParamField>& param_fields();
double& param_ref(MaterialParams& p, std::string_view key);
double param_value(const MaterialParams& p, std::string_view key);

/// Flat `key = value` file, one line per parameter. Missing keys keep the
/// identified defaults; unknown keys are rejected.
MaterialParams load_params(const std::filesystem::path& path);
MaterialParams parse_params(const std::string& text, const std::string& source = "<string>");
std::string format_params(const MaterialParams& p);
void save_params(const MaterialParams& p, const std::filesystem::path& path);

/// Path of the bundled identified parameter file.
std::filesystem::path bundled_params_path();

}  // namespace sma
