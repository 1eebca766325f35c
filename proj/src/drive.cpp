#include "sma/drive.hpp"

#include <algorithm>
#include <cmath>

#include "sma/errors.hpp"

namespace sma {

Signal::Signal(double constant) : times_{0.0}, values_{constant} {}

Signal::Signal(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || times_.size() != values_.size())
    throw DomainError("signal needs matching, nonempty time and value vectors");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw DomainError("signal breakpoint times must be strictly increasing");
}

double Signal::operator()(double t) const {
  if (times_.empty()) return 0.0;
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times_.begin());
  const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
  return values_[i - 1] + w * (values_[i] - values_[i - 1]);
}

DriveInput::DriveInput(Signal v, Signal J, Signal T_E) : v_(std::move(v)), J_(std::move(J)), T_E_(std::move(T_E)) {
  for (double j : J_.values())
    if (j < 0.0) throw DomainError("Joule heating must be nonnegative");
  for (double te : T_E_.values())
    if (!(te > 0.0)) throw DomainError("environment temperature must be positive");
}

std::vector<double> DriveInput::breakpoints() const {
  std::vector<double> out;
  for (const Signal* s : {&v_, &J_, &T_E_}) out.insert(out.end(), s->times().begin(), s->times().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double DriveInput::duration() const {
  const auto bp = breakpoints();
  return bp.empty() ? 0.0 : bp.back();
}

Signal strain_path_rate(std::span<const double> waypoints, double strain_rate, double l0, double ramp) {
  if (waypoints.size() < 2) throw DomainError("strain path needs at least two waypoints");
  if (!(strain_rate > 0.0)) throw DomainError("strain rate must be positive");
  std::vector<double> times;
  std::vector<double> values;
  double t = 0.0;
  double prev_rate = 0.0;
  for (std::size_t k = 1; k < waypoints.size(); ++k) {
    const double delta = waypoints[k] - waypoints[k - 1];
    if (delta == 0.0) throw DomainError("consecutive strain waypoints must differ");
    const double rate = std::copysign(strain_rate * l0, delta);
    const double leg = std::abs(delta) / strain_rate;
    if (leg <= 2.0 * ramp) throw DomainError("strain leg shorter than the rate ramp");
    // linear ramp centered on the vertex keeps the strain waypoint exact
    times.push_back(t - 0.5 * ramp);
    values.push_back(prev_rate);
    times.push_back(t + 0.5 * ramp);
    values.push_back(rate);
    t += leg;
    prev_rate = rate;
  }
  times.push_back(t - 0.5 * ramp);
  values.push_back(prev_rate);
  times.push_back(t + 0.5 * ramp);
  values.push_back(0.0);
  // shift so the first ramp starts at t = 0
  for (double& tt : times) tt += 0.5 * ramp;
  return Signal(std::move(times), std::move(values));
}

Signal triangular_rate(double max_strain, double strain_rate, int cycles, double l0, double ramp) {
  if (!(max_strain > 0.0)) throw DomainError("max strain must be positive");
  if (cycles < 1) throw DomainError("cycle count must be at least one");
  std::vector<double> waypoints{0.0};
  for (int c = 0; c < cycles; ++c) {
    waypoints.push_back(max_strain);
    waypoints.push_back(0.0);
  }
  return strain_path_rate(waypoints, strain_rate, l0, ramp);
}

double integrate_strain(const Signal& v, double l0, double t, double eps0) {
  // exact integral of a piecewise-linear signal
  const auto times = v.times();
  const auto values = v.values();
  double eps = eps0;
  if (times.empty()) return eps;
  double prev_t = std::min(times.front(), t);
  double prev_v = v(prev_t);
  if (t < times.front()) return eps + values.front() * t / l0;
  eps += values.front() * times.front() / l0;
  for (std::size_t i = 1; i < times.size() && prev_t < t; ++i) {
    const double t1 = std::min(times[i], t);
    const double v1 = v(t1);
    eps += 0.5 * (prev_v + v1) * (t1 - prev_t) / l0;
    prev_t = t1;
    prev_v = v1;
  }
  if (t > times.back()) eps += values.back() * (t - times.back()) / l0;
  return eps;
}

}  // namespace sma
