#include "sma/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sma/errors.hpp"

namespace sma {

namespace {

constexpr double kPhaseTolerance = 1e-9;

double checked_log1p_arg(double arg) {
  if (!(arg > 0.0)) throw DomainError("outer-loop interpolator log argument " + std::to_string(arg) + " <= 0");
  return std::log(arg);
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double clamp_phase(double x_M) {
  if (x_M < -kPhaseTolerance || x_M > 1.0 + kPhaseTolerance || std::isnan(x_M))
    throw DomainError("phase fraction " + std::to_string(x_M) + " outside [0, 1]");
  return std::clamp(x_M, 0.0, 1.0);
}

double compliance(double x_M, const MaterialParams& p) { return x_M / p.E_M + (1.0 - x_M) / p.E_A; }

double stress(double eps, double x_M, const MaterialParams& p) {
  const double x = clamp_phase(x_M);
  return (eps - p.eps_T * x) / compliance(x, p);
}

StressPartials stress_partials(double eps, double x_M, const MaterialParams& p) {
  const double x = clamp_phase(x_M);
  const double c = compliance(x, p);
  const double dc = 1.0 / p.E_M - 1.0 / p.E_A;
  return {1.0 / c, (-p.eps_T * c - (eps - p.eps_T * x) * dc) / (c * c)};
}

ForceLength force_length(double eps, double sigma, const MaterialParams& p) {
  return {p.cross_section() * sigma, p.l0 * (1.0 + eps)};
}

double sigma_A0(double x, const MaterialParams& p) {
  return p.E_AL * checked_log1p_arg(1.0 + p.lambda_AL * x) + p.E_AR * checked_log1p_arg(1.0 + p.lambda_AR * (1.0 - x)) +
         p.E_AC * x + p.sigma_AB;
}

double sigma_M0(double x, const MaterialParams& p) {
  return p.E_ML * checked_log1p_arg(1.0 + p.lambda_ML * x) + p.E_MR * checked_log1p_arg(1.0 + p.lambda_MR * (1.0 - x)) +
         p.E_MC * x + p.sigma_MB;
}

double sigma_S(double x, const MaterialParams& p) {
  return p.E_SL * logistic(p.lambda_SL * (x - p.x0SL)) + p.E_SR * logistic(-p.lambda_SR * (x - p.x0SR)) +
         p.E_SC * x + p.sigma_SB;
}

double sigma_A0_dx(double x, const MaterialParams& p) {
  return p.E_AL * p.lambda_AL / (1.0 + p.lambda_AL * x) - p.E_AR * p.lambda_AR / (1.0 + p.lambda_AR * (1.0 - x)) +
         p.E_AC;
}

double sigma_M0_dx(double x, const MaterialParams& p) {
  return p.E_ML * p.lambda_ML / (1.0 + p.lambda_ML * x) - p.E_MR * p.lambda_MR / (1.0 + p.lambda_MR * (1.0 - x)) +
         p.E_MC;
}

double sigma_S_dx(double x, const MaterialParams& p) {
  const double l = logistic(p.lambda_SL * (x - p.x0SL));
  const double r = logistic(-p.lambda_SR * (x - p.x0SR));
  return p.E_SL * p.lambda_SL * l * (1.0 - l) - p.E_SR * p.lambda_SR * r * (1.0 - r) + p.E_SC;
}

double sigma_A_outer(double x_M, double T, const MaterialParams& p) {
  const double x = clamp_phase(x_M);
  return sigma_A0(x, p) + sigma_S(x, p) * (T - p.T0);
}

double sigma_M_outer(double x_M, double T, const MaterialParams& p) {
  const double x = clamp_phase(x_M);
  return sigma_M0(x, p) + sigma_S(x, p) * (T - p.T0);
}

double resistance(double eps, double x_M, double T, const MaterialParams& p) {
  const double x = clamp_phase(x_M);
  const double lateral = 1.0 - p.nu * eps;
  if (!(lateral > 0.0)) throw DomainError("resistance undefined for 1 - nu eps <= 0");
  const double rho_M = p.rho_eM0 * (1.0 + p.alpha_M * (T - p.T0));
  const double rho_A = p.rho_eA0 * (1.0 + p.alpha_A * (T - p.T0));
  return p.l0 * (1.0 + eps) / (p.cross_section() * lateral) * (rho_M * x + rho_A * (1.0 - x));
}

double heat_flow_rate(double T, double J, double T_E, const MaterialParams& p) {
  return (J - p.lambda_h * p.lateral_area() * (T - T_E)) / (p.omega() * p.rho_V * p.c_V);
}

double steady_state_temperature(double J, double T_E, const MaterialParams& p) {
  return T_E + J / (p.lambda_h * p.lateral_area());
}

}  // namespace sma
