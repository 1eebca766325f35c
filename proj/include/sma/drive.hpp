#pragma once

#include <span>
#include <utility>
#include <vector>

namespace sma {

/// Piecewise-linear signal through (time, value) breakpoints with constant
/// extrapolation on both sides.
class Signal {
 public:
  Signal() = default;
  explicit Signal(double constant);
  Signal(std::vector<double> times, std::vector<double> values);

  double operator()(double t) const;
  std::span<const double> times() const { return times_; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

struct DriveSample {
  double v = 0.0;    // deformation rate [m/s]
  double J = 0.0;    // Joule heating [W]
  double T_E = 0.0;  // environment temperature [K]
};

/// Inputs of the wire model: deformation rate, Joule heating, environment
/// temperature. Validated on construction (J >= 0, T_E > 0).
class DriveInput {
 public:
  DriveInput() = default;
  DriveInput(Signal v, Signal J, Signal T_E);

  DriveSample operator()(double t) const { return {v_(t), J_(t), T_E_(t)}; }
  const Signal& v() const { return v_; }
  const Signal& J() const { return J_; }
  const Signal& T_E() const { return T_E_; }

  /// Sorted union of all breakpoint times; integrators stop on each of them.
  std::vector<double> breakpoints() const;
  /// Last breakpoint time, or 0 for constant inputs.
  double duration() const;

 private:
  Signal v_;
  Signal J_;
  Signal T_E_;
};

/// Rate signal realizing a piecewise-linear strain path eps(t) through the
/// given strain waypoints at a constant absolute strain rate. Direction
/// changes are smoothed over `ramp` seconds so the signal stays continuous.
Signal strain_path_rate(std::span<const double> waypoints, double strain_rate, double l0,
                        double ramp = 1e-6);

/// Triangular strain profile 0 -> max_strain -> 0 repeated `cycles` times.
Signal triangular_rate(double max_strain, double strain_rate, int cycles, double l0,
                       double ramp = 1e-6);

/// Strain at time t implied by integrating a rate signal from eps(0) = eps0.
double integrate_strain(const Signal& v, double l0, double t, double eps0 = 0.0);

}  // namespace sma
