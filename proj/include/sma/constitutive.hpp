#pragma once

#include "sma/params.hpp"

namespace sma {

// Thermo-electro-mechanical constitutive laws of the wire. Everything here is
// a pure function of its arguments.

/// Phase fractions within 1e-9 of [0, 1] are clamped; anything further out
/// raises DomainError.
double clamp_phase(double x_M);

/// Axial stress (eps - eps_T x_M) / (x_M / E_M + (1 - x_M) / E_A). May be negative.
double stress(double eps, double x_M, const MaterialParams& p);

struct StressPartials {
  double d_eps;  // always positive
  double d_xM;
};
StressPartials stress_partials(double eps, double x_M, const MaterialParams& p);

/// Compliance x_M / E_M + (1 - x_M) / E_A.
double compliance(double x_M, const MaterialParams& p);

struct ForceLength {
  double force;   // [N]
  double length;  // [m]
};
ForceLength force_length(double eps, double sigma, const MaterialParams& p);

// Outer hysteresis loop. The *0 variants are the curves at T0; the
// temperature term sigma_S(x_M) (T - T0) is shared by both branches.
double sigma_A0(double x_M, const MaterialParams& p);
double sigma_M0(double x_M, const MaterialParams& p);
double sigma_S(double x_M, const MaterialParams& p);
double sigma_A0_dx(double x_M, const MaterialParams& p);
double sigma_M0_dx(double x_M, const MaterialParams& p);
double sigma_S_dx(double x_M, const MaterialParams& p);

double sigma_A_outer(double x_M, double T, const MaterialParams& p);
double sigma_M_outer(double x_M, double T, const MaterialParams& p);

/// Electrical resistance of the wire [Ohm]. Requires 1 - nu eps > 0.
double resistance(double eps, double x_M, double T, const MaterialParams& p);

/// Loss coefficient Lambda = (J - lambda A_S (T - T_E)) / (Omega rho_V c_V) [K/s].
double heat_flow_rate(double T, double J, double T_E, const MaterialParams& p);

/// Steady-state temperature T_E + J / (lambda A_S) of a non-transforming wire.
double steady_state_temperature(double J, double T_E, const MaterialParams& p);

}  // namespace sma
