#include "sma/hybrid_solver.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include "sma/errors.hpp"
#include "sma/fit_index.hpp"

namespace sma {

namespace odeint = boost::numeric::odeint;

constexpr double kNoHint = std::numeric_limits<double>::quiet_NaN();

int HybridTrajectory::slack_segments() const {
  int count = 0;
  bool slack = false;
  if (!samples.empty() && samples.front().xd.s == 1) {
    slack = true;
    ++count;
  }
  for (const TransitionRecord& tr : transitions) {
    const bool now = tr.to.s == 1;
    if (now && !slack) ++count;
    slack = now;
  }
  return count;
}

namespace {

using State = std::array<double, 2>;
using Dopri = odeint::runge_kutta_dopri5<State>;
using Controlled = odeint::controlled_runge_kutta<Dopri>;

struct Flow {
  HybridState& st;
  const DriveInput& drive;
  const MaterialParams& p;

  void operator()(const State& y, State& dy, double t) const {
    st.xc = {y[0], y[1]};
    const FlowRates r = flow_map(st, drive(t), p);
    dy[0] = r.eps;
    dy[1] = r.T;
  }
};

class Integrator {
 public:
  Integrator(const HybridState& initial, const DriveInput& drive, const MaterialParams& p, const HybridOptions& o)
      : st_(initial), drive_(drive), p_(p), o_(o), flow_{st_, drive_, p_} {}

  HybridTrajectory run();

 private:
  bool jump_active(double t, const State& y) {
    st_.xc = {y[0], y[1]};
    return !jump_check(st_, drive_(t), p_).empty();
  }
  void apply_chain(double t);
  void emit(double t, const State& y);
  template <class Interp>
  void emit_until(double t_limit, bool inclusive, Interp&& interp);

  HybridState st_;
  const DriveInput& drive_;
  const MaterialParams& p_;
  HybridOptions o_;
  Flow flow_;
  HybridTrajectory out_;
  long n_samples_ = 0;
  long next_sample_ = 0;
  double last_jump_t_ = -1.0;
  int rapid_jumps_ = 0;
};

void Integrator::emit(double t, const State& y) {
  st_.xc = {y[0], y[1]};
  // Samples are evenly spaced: extrapolating the last two phase fractions
  // gives a starting point the Newton recovery accepts after one step.
  const std::size_t n = out_.samples.size();
  if (n >= 2 && out_.samples[n - 2].j == out_.jumps()) {
    const double guess = 2.0 * out_.samples[n - 1].x_M - out_.samples[n - 2].x_M;
    st_.x_hint = guess;
  }
  const HybridOutputs o = hybrid_outputs(st_, p_);
  HybridSample s;
  s.t = t;
  s.j = out_.jumps();
  s.eps = y[0];
  s.T = y[1];
  s.xd = st_.xd;
  s.x_M = o.x_M;
  s.sigma = o.sigma;
  s.f = o.f;
  s.R = o.R;
  s.eps_eff = o.eps_eff;
  out_.samples.push_back(s);
}

template <class Interp>
void Integrator::emit_until(double t_limit, bool inclusive, Interp&& interp) {
  while (next_sample_ < n_samples_) {
    const double ts = next_sample_ / o_.sample_rate;
    if (inclusive ? ts > t_limit + 1e-12 : ts >= t_limit) break;
    emit(ts, interp(ts));
    ++next_sample_;
  }
}

void Integrator::apply_chain(double t) {
  const DriveSample in = drive_(t);
  int chain = 0;
  for (;;) {
    const std::vector<int> active = jump_check(st_, in, p_);
    if (active.empty()) break;
    if (chain == o_.max_chain) {
      std::string list;
      for (int m : active) list += (list.empty() ? "" : ",") + std::to_string(m);
      throw ZenoError("more than " + std::to_string(o_.max_chain) + " chained jumps at t = " + std::to_string(t) +
                      " in " + describe(st_.xd) + ", still active: " + list);
    }
    const int m = select_jump(active);
    HybridState next = jump_map(st_, m, p_);
    TransitionRecord tr;
    tr.t = t;
    tr.from = st_.xd;
    tr.to = next.xd;
    tr.index = m;
    tr.trigger = jump_trigger(m);
    st_ = std::move(next);
    tr.j = out_.jumps() + 1;
    out_.transitions.push_back(tr);
    ++chain;
  }
  if (chain > 0) {
    out_.max_chain_length = std::max(out_.max_chain_length, chain);
    out_.transitions.back().flow_ok = in_flow_set(st_, in, p_).ok;
    if (t - last_jump_t_ < 100.0 * o_.event_tol) {
      if (++rapid_jumps_ > 50)
        throw ZenoError("jumps accumulate near t = " + std::to_string(t) + " in " + describe(st_.xd));
    } else {
      rapid_jumps_ = 0;
    }
    last_jump_t_ = t;
  }
}

HybridTrajectory Integrator::run() {
  if (!(o_.rel_tol > 0.0) || !(o_.abs_tol > 0.0)) throw DomainError("tolerances must be positive");
  if (!(o_.sample_rate > 0.0)) throw DomainError("sample rate must be positive");
  if (!(st_.xc.T > 0.0)) throw DomainError("initial temperature must be positive");
  p_.validate();
  const auto wall_start = std::chrono::steady_clock::now();

  const double t_end = o_.t_end >= 0.0 ? o_.t_end : drive_.duration();
  std::vector<double> stops;
  for (double b : drive_.breakpoints())
    if (b > 0.0 && b < t_end) stops.push_back(b);
  stops.push_back(t_end);
  n_samples_ = static_cast<long>(std::floor(t_end * o_.sample_rate + 1e-9)) + 1;
  out_.samples.reserve(n_samples_);

  Controlled stepper{Controlled::error_checker_type(o_.abs_tol, o_.rel_tol)};
  double t = 0.0;
  State y{st_.xc.eps, st_.xc.T};
  apply_chain(t);
  State dy{};
  flow_(y, dy, t);
  emit_until(t, true, [&](double) { return y; });

  double dt = std::min(1e-3, t_end > 0.0 ? t_end : 1e-3);
  std::size_t stop_index = 0;
  State y_new{}, dy_new{}, y_mid{};
  while (t < t_end) {
    while (stop_index < stops.size() - 1 && stops[stop_index] <= t) ++stop_index;
    const double target = stops[stop_index];
    double step = std::min(dt, target - t);
    const bool hits_target = step >= target - t;
    double t_try = t;
    const auto result = stepper.try_step(flow_, y, dy, t_try, y_new, dy_new, step);
    if (result == odeint::fail) {
      ++out_.rejected_steps;
      dt = step;
      if (dt < 1e-14 * std::max(1.0, t))
        throw SolverFailure("hybrid step size collapsed to " + std::to_string(dt) + " s at t = " + std::to_string(t) +
                            " in " + describe(st_.xd));
      continue;
    }
    if (++out_.steps > o_.max_steps)
      throw SolverFailure("hybrid integration exceeded " + std::to_string(o_.max_steps) + " steps");
    dt = step;
    const double t_old = t;
    const double t_new = hits_target ? target : t_try;
    const State y_old = y, dy_old = dy;
    auto interp = [&](double ts) {
      if (ts >= t_new) return y_new;
      if (ts <= t_old) return y_old;
      State ys{};
      stepper.stepper().calc_state(ts, ys, y_old, dy_old, t_old, y_new, dy_new, t_new);
      return ys;
    };

    // Locate the first sub-interval in which a jump set becomes active.
    double a = t_old, b = t_new;
    bool event = false;
    const int checks = std::max(1, o_.dense_checks);
    for (int k = 1; k <= checks; ++k) {
      const double s = k == checks ? t_new : t_old + (t_new - t_old) * k / checks;
      if (jump_active(s, interp(s))) {
        b = s;
        event = true;
        break;
      }
      a = s;
    }
    if (!event) {
      // full sweep once per step: asserts the recovered phase is unique
      st_.xc = {y_new[0], y_new[1]};
      st_.x_hint = kNoHint;
      solve_phase(st_, p_);
      emit_until(t_new, true, interp);
      t = t_new;
      y = y_new;
      dy = dy_new;
      continue;
    }
    while (b - a > o_.event_tol) {
      const double mid = 0.5 * (a + b);
      if (jump_active(mid, interp(mid)))
        b = mid;
      else
        a = mid;
    }
    y_mid = interp(b);
    emit_until(b, false, interp);
    st_.xc = {y_mid[0], y_mid[1]};
    t = b;
    y = y_mid;
    apply_chain(t);
    flow_(y, dy, t);
    emit_until(t, true, [&](double) { return y; });
  }
  st_.xc = {y[0], y[1]};
  emit_until(t_end, true, [&](double) { return y; });
  out_.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return std::move(out_);
}

}  // namespace

HybridTrajectory integrate_hybrid(const HybridState& initial, const DriveInput& drive, const MaterialParams& p,
                                  const HybridOptions& options) {
  Integrator integrator(initial, drive, p, options);
  return integrator.run();
}

ModelComparison compare_models(const DriveInput& drive, double eps0, double T_init, const MaterialParams& p,
                               const HybridOptions& hybrid_options, const MasOptions& mas_options) {
  ModelComparison c;
  c.hybrid = integrate_hybrid(initial_hybrid_state(eps0, T_init, p), drive, p, hybrid_options);
  c.mas = simulate_mas(MasState{eps0, 0.0, T_init}, drive, p, mas_options);
  const std::size_t n = std::min(c.hybrid.samples.size(), c.mas.samples.size());
  std::vector<double> sh, sm, rh, rm;
  sh.reserve(n);
  sm.reserve(n);
  rh.reserve(n);
  rm.reserve(n);
  c.always_slack = true;
  for (std::size_t i = 0; i < n; ++i) {
    const HybridSample& h = c.hybrid.samples[i];
    sh.push_back(h.sigma);
    rh.push_back(h.R);
    sm.push_back(c.mas.samples[i].sigma);
    rm.push_back(c.mas.samples[i].R);
    if (h.xd.s == 0 && h.sigma > 0.0) c.always_slack = false;
  }
  auto safe_fit = [](const std::vector<double>& ref, const std::vector<double>& sim) {
    try {
      return fit_index(ref, sim);
    } catch (const DegenerateSignal&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  c.fit_sigma = safe_fit(sm, sh);
  c.fit_R = safe_fit(rm, rh);
  c.wall_ratio = c.mas.wall_time > 0.0 ? c.hybrid.wall_time / c.mas.wall_time : 0.0;
  return c;
}

}  // namespace sma
