#include "sma/mas_model.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <string>

#include <exception>
#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include "sma/constitutive.hpp"
#include "sma/errors.hpp"

namespace sma {

double delta_g(double sigma, double x_M, double T, const BranchMemory& mem, Transformation dir) {
  const double eps_T = mem.params().eps_T;
  if (dir == Transformation::AtoM) return eps_T * std::max(0.0, mem.branch_unchecked(BranchKind::A, x_M, T) - sigma);
  return eps_T * std::max(0.0, sigma - mem.branch_unchecked(BranchKind::M, x_M, T));
}

TransitionProbs transition_probs(double sigma, double x_M, double T, const BranchMemory& mem) {
  const MaterialParams& p = mem.params();
  const double scale = p.V_L / (p.k_B * T);
  return {std::exp(-scale * delta_g(sigma, x_M, T, mem, Transformation::MtoA)) / p.tau_x,
          std::exp(-scale * delta_g(sigma, x_M, T, mem, Transformation::AtoM)) / p.tau_x};
}

MasRates mas_rhs(const MasState& s, const DriveSample& in, const MaterialParams& p, const BranchMemory& mem) {
  const double x = std::clamp(s.x_M, 0.0, 1.0);
  const double sigma = stress(s.eps, x, p);
  const TransitionProbs pr = transition_probs(sigma, x, s.T, mem);
  MasRates r;
  r.eps = in.v / p.l0;
  r.x_M = -pr.p_MA * x + pr.p_AM * (1.0 - x);
  r.T = heat_flow_rate(s.T, in.J, in.T_E, p) + p.h_M * r.x_M / p.c_V;
  return r;
}

double reversal_stress_gap(double T, const MaterialParams& p) { return 100.0 * p.k_B * T / (p.V_L * p.eps_T); }

namespace {

struct Context {
  const DriveInput& drive;
  const MaterialParams& p;
  const BranchMemory& mem;
  std::exception_ptr error;
};

int rhs_callback(double t, const double y[], double dy[], void* raw) {
  auto* ctx = static_cast<Context*>(raw);
  // Newton iterates of the implicit method may leave the physical domain;
  // report it so the step is retried with a smaller size.
  if (!std::isfinite(y[0]) || !std::isfinite(y[1]) || !(y[2] > 0.0) || !std::isfinite(y[2])) return GSL_EDOM;
  try {
    const MasRates r = mas_rhs({y[0], y[1], y[2]}, ctx->drive(t), ctx->p, ctx->mem);
    dy[0] = r.eps;
    dy[1] = r.x_M;
    dy[2] = r.T;
    return GSL_SUCCESS;
  } catch (...) {
    ctx->error = std::current_exception();
    return GSL_EBADFUNC;
  }
}

// Central differences; the kinetics are cheap and the max() kinks of the
// barriers rule out an analytic Jacobian anyway.
int jacobian_callback(double t, const double y[], double* dfdy, double dfdt[], void* raw) {
  static constexpr double h[3] = {1e-9, 1e-9, 1e-6};
  double yp[3], ym[3], fp[3], fm[3];
  for (int j = 0; j < 3; ++j) {
    std::copy(y, y + 3, yp);
    std::copy(y, y + 3, ym);
    yp[j] += h[j];
    ym[j] -= h[j];
    if (int st = rhs_callback(t, yp, fp, raw); st != GSL_SUCCESS) return st;
    if (int st = rhs_callback(t, ym, fm, raw); st != GSL_SUCCESS) return st;
    for (int i = 0; i < 3; ++i) dfdy[i * 3 + j] = (fp[i] - fm[i]) / (2.0 * h[j]);
  }
  const double ht = 1e-6;
  if (int st = rhs_callback(t + ht, y, fp, raw); st != GSL_SUCCESS) return st;
  if (int st = rhs_callback(t - ht, y, fm, raw); st != GSL_SUCCESS) return st;
  for (int i = 0; i < 3; ++i) dfdt[i] = (fp[i] - fm[i]) / (2.0 * ht);
  return GSL_SUCCESS;
}

using Vec3 = std::array<double, 3>;

MasSample make_sample(double t, const Vec3& y, const Vec3& dy, const MaterialParams& p, const BranchMemory& mem) {
  MasSample s;
  s.t = t;
  s.eps = y[0];
  s.x_M = std::clamp(y[1], 0.0, 1.0);
  s.T = y[2];
  s.sigma = stress(s.eps, s.x_M, p);
  s.f = force_length(s.eps, s.sigma, p).force;
  s.R = resistance(s.eps, s.x_M, s.T, p);
  s.level = mem.level();
  s.sigma_A = mem.branch_unchecked(BranchKind::A, s.x_M, s.T);
  s.sigma_M = mem.branch_unchecked(BranchKind::M, s.x_M, s.T);
  s.x_M_rate = dy[1];
  return s;
}

// Updates the branch memory after an accepted step. Returns true when the
// level changed.
constexpr double kOvershoot = 1e-3;

bool update_memory(const Vec3& y, const MaterialParams& p, BranchMemory& mem, MasTrajectory& out) {
  const double x = std::clamp(y[1], 0.0, 1.0);
  const double T = y[2];
  const double sigma = stress(y[0], x, p);
  const double gap = reversal_stress_gap(T, p);
  const BranchRecord& top = mem.top();
  const bool loading = top.level % 2 == 1;
  try {
    // Moving back past the reversal point that opened the current branch
    // returns to the parent branch.
    bool undone = false;
    while (mem.level() >= 2) {
      const BranchRecord& r = mem.top();
      const bool up = r.level % 2 == 1;
      if (up ? x < r.x_lo - kOvershoot : x > r.x_hi + kOvershoot) {
        mem.undo_reversal();
        undone = true;
      } else {
        break;
      }
    }
    if (undone) return true;
    if (loading && top.level >= 3 && x >= top.x_hi) {
      mem.pop_closure();
      ++out.closures;
      return true;
    }
    if (!loading && top.level >= 4 && x <= top.x_lo) {
      mem.pop_closure();
      ++out.closures;
      return true;
    }
    if (loading && sigma < mem.branch_unchecked(BranchKind::A, x, T) - gap) {
      mem.reverse(x, BranchKind::M, y[0]);
      ++out.reversals;
      return true;
    }
    if (!loading && sigma > mem.branch_unchecked(BranchKind::M, x, T) + gap) {
      mem.reverse(x, BranchKind::A, y[0]);
      ++out.reversals;
      return true;
    }
  } catch (const DegenerateReversal&) {
    // Elastic unloading of pure austenite or loading of pure martensite on
    // the outer loop: nothing to remember.
  }
  return false;
}

struct DriverDeleter {
  void operator()(gsl_odeiv2_driver* d) const { gsl_odeiv2_driver_free(d); }
};

}  // namespace

MasTrajectory simulate_mas(const MasState& initial, const DriveInput& drive, const MaterialParams& p,
                           const MasOptions& options) {
  if (!(options.rel_tol > 0.0) || !(options.abs_tol > 0.0)) throw DomainError("tolerances must be positive");
  if (!(options.sample_rate > 0.0)) throw DomainError("sample rate must be positive");
  if (!(initial.T > 0.0)) throw DomainError("initial temperature must be positive");
  p.validate();
  gsl_set_error_handler_off();
  const auto wall_start = std::chrono::steady_clock::now();

  const double t_end = options.t_end >= 0.0 ? options.t_end : drive.duration();
  BranchMemory mem(p);
  Context ctx{drive, p, mem, nullptr};
  gsl_odeiv2_system sys{rhs_callback, jacobian_callback, 3, &ctx};
  std::unique_ptr<gsl_odeiv2_driver, DriverDeleter> driver(
      gsl_odeiv2_driver_alloc_y_new(&sys, gsl_odeiv2_step_msbdf, 1e-6, options.abs_tol, options.rel_tol));
  if (!driver) throw SolverFailure("could not allocate the stiff integrator");

  std::vector<double> stops;
  for (double b : drive.breakpoints())
    if (b > 0.0 && b < t_end) stops.push_back(b);
  stops.push_back(t_end);

  MasTrajectory out;
  const long n_samples = static_cast<long>(std::floor(t_end * options.sample_rate + 1e-9)) + 1;
  out.samples.reserve(n_samples);

  auto eval = [&](double t, const Vec3& y) {
    Vec3 dy{};
    const int status = rhs_callback(t, y.data(), dy.data(), &ctx);
    if (ctx.error) std::rethrow_exception(ctx.error);
    if (status != GSL_SUCCESS) throw SolverFailure("baseline state left the physical domain at t = " + std::to_string(t));
    return dy;
  };

  Vec3 y{initial.eps, std::clamp(initial.x_M, 0.0, 1.0), initial.T};
  double t = 0.0;
  long next_sample = 0;
  // Linear interpolation between accepted steps. The endpoint derivatives
  // are dominated by the stiff kinetics and make Hermite cubics overshoot
  // on the long steps taken along the slow manifold.
  auto emit_until = [&](double t0, const Vec3& y0, double t1, const Vec3& y1) {
    while (next_sample < n_samples) {
      const double ts = next_sample / options.sample_rate;
      if (ts > t1 + 1e-12) break;
      Vec3 ys = y1;
      const double h = t1 - t0;
      if (h > 0.0) {
        const double s = std::clamp((ts - t0) / h, 0.0, 1.0);
        for (int i = 0; i < 3; ++i) ys[i] = (1.0 - s) * y0[i] + s * y1[i];
      }
      out.samples.push_back(make_sample(ts, ys, eval(ts, ys), p, mem));
      ++next_sample;
    }
  };
  emit_until(t, y, t, y);

  double h = 1e-6;
  std::size_t stop_index = 0;
  while (t < t_end) {
    while (stop_index < stops.size() - 1 && stops[stop_index] <= t) ++stop_index;
    const double target = stops[stop_index];
    const double t_old = t;
    const Vec3 y_old = y;
    const int status = gsl_odeiv2_evolve_apply(driver->e, driver->c, driver->s, &sys, &t, target, &h, y.data());
    if (ctx.error) std::rethrow_exception(ctx.error);
    if (status == GSL_EDOM) {
      h *= 0.5;
      ++out.rejected_steps;
      if (h < 1e-14 * std::max(1.0, t))
        throw SolverFailure("baseline step size collapsed to " + std::to_string(h) + " s at t = " + std::to_string(t));
      continue;
    }
    if (status != GSL_SUCCESS)
      throw SolverFailure("baseline integrator failed at t = " + std::to_string(t) + " (" + gsl_strerror(status) +
                          ")");
    if (h < 1e-14 * std::max(1.0, t))
      throw SolverFailure("baseline step size collapsed to " + std::to_string(h) + " s at t = " + std::to_string(t));
    if (++out.steps > options.max_steps)
      throw SolverFailure("baseline exceeded " + std::to_string(options.max_steps) + " steps at t = " +
                          std::to_string(t));
    y[1] = std::clamp(y[1], 0.0, 1.0);
    emit_until(t_old, y_old, t, y);
    if (update_memory(y, p, mem, out) || t >= target) {
      // the right-hand side changed discontinuously: restart the multistep history
      out.rejected_steps += static_cast<long>(driver->e->failed_steps);
      gsl_odeiv2_evolve_reset(driver->e);
      gsl_odeiv2_step_reset(driver->s);
    }
  }
  emit_until(t, y, t, y);
  out.rejected_steps += static_cast<long>(driver->e->failed_steps);
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return out;
}

}  // namespace sma
