#include "sma/hybrid_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

#include <boost/math/tools/toms748_solve.hpp>

#include "sma/constitutive.hpp"
#include "sma/errors.hpp"

namespace sma {

namespace {

// Predicate tolerances. Stress in Pa, strain dimensionless, rates per second.
// Phase-rate dead band [1/s]. Temperature errors at the default tolerances
// (~1e-4 K) produce phase rates around 1e-5 /s near thermal equilibrium.
constexpr double kPhiTol = 1e-4;
constexpr double kSigmaTol = 1.0;
constexpr double kSigmaRateTol = 1e-3;
constexpr double kEpsTol = 1e-10;
constexpr double kRateTol = 1e-12;
// must exceed kSigmaTol / E_M so that a slack entry never re-tensions at once
constexpr double kTensionTol = 1e-9;
constexpr double kXTol = 1e-9;
constexpr double kFloorRoom = 1e-6;
constexpr int kSweepCells = 32;
constexpr double kRootTol = 1e-12;
constexpr int kNewtonIterations = 8;
// Newton converges quadratically, so a last step below this leaves an error
// far below the root tolerance.
constexpr double kNewtonTol = 1e-7;
constexpr double kEndpointResidual = 1e-3;  // [Pa]

bool is_slack_mode(Mode m) { return m == Mode::AM1 || m == Mode::MA1; }

BranchKind branch_kind(Mode m) {
  return (m == Mode::MA0 || m == Mode::MA1) ? BranchKind::M : BranchKind::A;
}

struct Bracketing {
  int roots = 0;
  double a = 0.0, b = 0.0;  // first bracket
  double fa = 0.0, fb = 0.0;
  bool exact = false;        // a is an exact zero
  double f_lo = 0.0, f_hi = 0.0;
};

template <class F>
Bracketing sweep(F&& f, double lo, double hi) {
  Bracketing br;
  double x_prev = lo;
  double f_prev = f(lo);
  br.f_lo = f_prev;
  if (f_prev == 0.0) {
    br.roots = 1;
    br.a = br.b = lo;
    br.exact = true;
  }
  for (int i = 1; i <= kSweepCells; ++i) {
    const double x = i == kSweepCells ? hi : lo + (hi - lo) * i / kSweepCells;
    const double fx = f(x);
    bool root = false;
    if (fx == 0.0) {
      root = true;
    } else if (f_prev != 0.0 && (f_prev < 0.0) != (fx < 0.0)) {
      root = true;
    }
    if (root) {
      if (br.roots == 0) {
        br.a = x_prev;
        br.b = x;
        br.fa = f_prev;
        br.fb = fx;
        br.exact = fx == 0.0;
        if (br.exact) br.a = x;
      }
      ++br.roots;
    }
    x_prev = x;
    f_prev = fx;
  }
  br.f_hi = f_prev;
  return br;
}

template <class F>
double refine(F&& f, const Bracketing& br) {
  if (br.exact) return br.a;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      f, br.a, br.b, br.fa, br.fb, [](double a, double b) { return std::abs(b - a) <= kRootTol; }, iters);
  return 0.5 * (r.first + r.second);
}

struct ModeFunction {
  const HybridState& st;
  const MaterialParams& p;
  BranchKind kind;
  bool slack;
  double operator()(double x) const {
    const double b = st.mem.branch_unchecked(kind, x, st.xc.T);
    return slack ? b : b - stress(st.xc.eps, x, p);
  }
  // value and derivative in x, for Newton iterations inside the range
  std::pair<double, double> with_slope(double x) const {
    const BranchValue v = st.mem.evaluate_unchecked(x);
    const double dT = st.xc.T - p.T0;
    double f = (kind == BranchKind::A ? v.A : v.M) + sigma_S(x, p) * dT;
    double df = (kind == BranchKind::A ? v.dA_dx : v.dM_dx) + sigma_S_dx(x, p) * dT;
    if (!slack) {
      f -= stress(st.xc.eps, x, p);
      df -= stress_partials(st.xc.eps, x, p).d_xM;
    }
    return {f, df};
  }
};

// Newton iteration from a previous solution. Gives up (leaving the decision
// to the full sweep) when an iterate leaves the range or does not settle.
std::optional<double> local_root(const ModeFunction& f, double x, double lo, double hi) {
  for (int i = 0; i < kNewtonIterations; ++i) {
    const auto [fx, dfx] = f.with_slope(x);
    if (fx == 0.0) return x;
    if (!(std::abs(dfx) > 0.0)) return std::nullopt;
    const double step = fx / dfx;
    x -= step;
    if (!(x >= lo && x <= hi)) return std::nullopt;
    if (std::abs(step) <= kNewtonTol) return x;
  }
  return std::nullopt;
}

PhaseSolution solve(const HybridState& st, const MaterialParams& p, bool strict) {
  const Mode m = mode_of(st.xd);
  if (m == Mode::M0) return {1.0, Pin::None};
  const BranchRecord& r = st.mem.top();
  ModeFunction f{st, p, branch_kind(m), is_slack_mode(m)};
  if (!strict && std::isfinite(st.x_hint) && st.x_hint >= r.x_lo && st.x_hint <= r.x_hi) {
    if (auto x = local_root(f, st.x_hint, r.x_lo, r.x_hi)) {
      st.x_hint = *x;
      return {*x, Pin::None};
    }
  }
  const Bracketing br = sweep(f, r.x_lo, r.x_hi);
  if (br.roots > 1)
    throw NoRootError(std::string("phase fraction not unique in mode ") + mode_name(m) + ": " +
                      std::to_string(br.roots) + " sign changes on [" + std::to_string(r.x_lo) + ", " +
                      std::to_string(r.x_hi) + "]");
  if (br.roots == 0) {
    if (strict)
      throw NoRootError(std::string("no phase fraction solves mode ") + mode_name(m) + " on [" +
                        std::to_string(r.x_lo) + ", " + std::to_string(r.x_hi) + "]");
    // A root sitting on a range end (right after a reversal) loses its sign
    // change to rounding; treat it as a regular root.
    if (std::abs(br.f_lo) <= kEndpointResidual) return {r.x_lo, Pin::None};
    if (std::abs(br.f_hi) <= kEndpointResidual) return {r.x_hi, Pin::None};
    return br.f_lo > 0.0 ? PhaseSolution{r.x_lo, Pin::Lower} : PhaseSolution{r.x_hi, Pin::Upper};
  }
  const double x = std::clamp(refine(f, br), r.x_lo, r.x_hi);
  st.x_hint = x;
  return {x, Pin::None};
}

bool parity_ok(const DiscreteState& d) {
  if (d.n_l < 1 || (d.s != 0 && d.s != 1)) return false;
  switch (d.q) {
    case BranchType::AM: return d.n_l % 2 == 1;
    case BranchType::MA: return d.n_l % 2 == 0;
    case BranchType::M: return d.n_l == 1 && d.s == 0;
  }
  return false;
}

}  // namespace

Mode mode_of(const DiscreteState& d) {
  switch (d.q) {
    case BranchType::AM: return d.s ? Mode::AM1 : Mode::AM0;
    case BranchType::MA: return d.s ? Mode::MA1 : Mode::MA0;
    case BranchType::M: return Mode::M0;
  }
  throw InconsistentState("invalid branch type");
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::AM0: return "AM0";
    case Mode::MA0: return "MA0";
    case Mode::M0: return "M0";
    case Mode::MA1: return "MA1";
    case Mode::AM1: return "AM1";
  }
  return "?";
}

std::string describe(const DiscreteState& d) {
  return std::string(mode_name(mode_of(d))) + "[n=" + std::to_string(d.n_l) + "]";
}

HybridState initial_hybrid_state(double eps, double T, const MaterialParams& p) {
  HybridState st(p);
  st.xc = {eps, T};
  return st;
}

double strain_threshold(double T, const MaterialParams& p) {
  return sigma_A_outer(1.0, T, p) / p.E_M + p.eps_T;
}

PhaseSolution solve_phase(const HybridState& st, const MaterialParams& p) { return solve(st, p, false); }

double zeta_xM(const HybridState& st, const MaterialParams& p) { return solve(st, p, true).x_M; }

ModeEval evaluate_mode(const HybridState& st, const DriveSample& in, const MaterialParams& p) {
  ModeEval ev;
  ev.mode = mode_of(st.xd);
  ev.phase = solve_phase(st, p);
  const double eps = st.xc.eps;
  const double T = st.xc.T;
  const double x = ev.phase.x_M;
  ev.eps_rate = in.v / p.l0;
  ev.Lambda = heat_flow_rate(T, in.J, in.T_E, p);
  ev.sigma = stress(eps, x, p);
  ev.strain_threshold = strain_threshold(T, p);
  ev.rate_threshold = sigma_S(1.0, p) * ev.Lambda / p.E_M;
  const StressPartials sp = stress_partials(eps, x, p);
  const double latent = p.h_M / p.c_V;

  BranchPartials bp{};
  if (ev.mode == Mode::M0) {
    ev.branch = sigma_A_outer(1.0, T, p);
    bp = {0.0, sigma_S(1.0, p)};
  } else {
    const BranchKind kind = branch_kind(ev.mode);
    ev.branch = st.mem.branch_eval(kind, x, T);
    bp = st.mem.branch_partials(kind, x, T);
    ev.bounds = st.mem.strain_bounds(T);
  }

  if (ev.mode != Mode::M0 && ev.phase.pin == Pin::None) {
    double num = -bp.d_T * ev.Lambda;
    double den = bp.d_xM + bp.d_T * latent;
    if (!is_slack_mode(ev.mode)) {
      num += sp.d_eps * ev.eps_rate;
      den -= sp.d_xM;
    }
    if (std::abs(den) < 1e-12)
      throw SingularDenominator(std::string("phase-rate denominator vanishes in mode ") + mode_name(ev.mode) +
                                " at x_M = " + std::to_string(x));
    ev.phi_xM = num / den;
  }
  ev.T_rate = ev.Lambda + latent * ev.phi_xM;
  ev.sigma_rate = sp.d_eps * ev.eps_rate + sp.d_xM * ev.phi_xM;
  ev.branch_rate = bp.d_xM * ev.phi_xM + bp.d_T * ev.T_rate;
  if (st.xd.s) {
    ev.eps_eff = x * p.eps_T;
    ev.eps_eff_rate = ev.phi_xM * p.eps_T;
  } else {
    ev.eps_eff = eps;
    ev.eps_eff_rate = ev.eps_rate;
  }
  return ev;
}

double phi_xM(const HybridState& st, const DriveSample& in, const MaterialParams& p) {
  return evaluate_mode(st, in, p).phi_xM;
}

FlowRates flow_map(const HybridState& st, const DriveSample& in, const MaterialParams& p) {
  const ModeEval ev = evaluate_mode(st, in, p);
  return {ev.eps_rate, ev.T_rate};
}

EffectiveStrain effective_strain(const HybridState& st, const DriveSample& in, const MaterialParams& p) {
  const ModeEval ev = evaluate_mode(st, in, p);
  return {ev.eps_eff, ev.eps_eff_rate};
}

HybridOutputs hybrid_outputs(const HybridState& st, const MaterialParams& p) {
  HybridOutputs out;
  out.x_M = solve_phase(st, p).x_M;
  out.sigma = st.xd.s ? 0.0 : stress(st.xc.eps, out.x_M, p);
  out.f = force_length(st.xc.eps, out.sigma, p).force;
  out.eps_eff = st.xd.s ? out.x_M * p.eps_T : st.xc.eps;
  out.R = resistance(out.eps_eff, out.x_M, st.xc.T, p);
  return out;
}

namespace {

struct Predicates {
  bool down, up;
  bool q1, q2, q3, q4;
  bool slack_entry, retension;
  bool range_exit;
};

Predicates predicates(const HybridState& st, const ModeEval& ev, const MaterialParams& p) {
  Predicates pr{};
  const double eps = st.xc.eps;
  const double x = ev.phase.x_M;
  const BranchRecord& r = st.mem.top();
  // A pin inside (0, 1) means the state left the branch through a reversal
  // end; a pin at a physical bound carries no direction.
  pr.down = (ev.phase.pin == Pin::Lower && r.x_lo > kXTol) || ev.phi_xM <= -kPhiTol;
  pr.up = (ev.phase.pin == Pin::Upper && r.x_hi < 1.0 - kXTol) || ev.phi_xM >= kPhiTol;
  const bool outer_floor = r.level == 1 && x - r.x_lo <= kFloorRoom;
  pr.q1 = pr.down && eps <= ev.strain_threshold && !outer_floor;
  pr.q2 = eps >= ev.strain_threshold && ev.eps_rate >= ev.rate_threshold;
  pr.q3 = pr.up;
  pr.q4 = eps <= ev.strain_threshold - kEpsTol && ev.eps_rate <= ev.rate_threshold;
  pr.slack_entry = ev.sigma < -kSigmaTol || (ev.sigma <= kSigmaTol && ev.sigma_rate < -kSigmaRateTol);
  const double excess = eps - x * p.eps_T;
  pr.retension = excess >= 0.0 && (excess > kTensionTol || ev.eps_rate - ev.phi_xM * p.eps_T > kRateTol);
  if (r.level >= 3 && ev.mode != Mode::M0) {
    // Only the end of the range in the direction of transformation closes
    // the loop; leaving through the other end is a reversal (q1 / q3).
    if (branch_kind(ev.mode) == BranchKind::A)
      pr.range_exit = (x >= r.x_hi - kXTol && pr.up) ||
                      (ev.eps_eff >= ev.bounds.eA_hi - kEpsTol && ev.eps_eff_rate >= kRateTol && pr.up);
    else
      pr.range_exit = (x <= r.x_lo + kXTol && pr.down) ||
                      (ev.eps_eff <= ev.bounds.eM_lo + kEpsTol && ev.eps_eff_rate <= -kRateTol && pr.down);
  }
  return pr;
}

constexpr std::array<Mode, 17> kSource = {Mode::AM0,  // unused slot 0
                                          Mode::AM0, Mode::AM0, Mode::AM0, Mode::AM0, Mode::MA0, Mode::MA0,
                                          Mode::MA0, Mode::M0,  Mode::M0,  Mode::MA1, Mode::MA1, Mode::MA1,
                                          Mode::AM1, Mode::AM1, Mode::AM1, Mode::AM1};

int priority_class(int m) {
  switch (m) {
    case 3: case 6: case 9: case 11: case 14: return 0;
    case 4: case 7: case 10: case 13: return 2;
    default: return 1;
  }
}

}  // namespace

std::vector<int> jump_check(const HybridState& st, const DriveSample& in, const MaterialParams& p) {
  return jump_check(st, evaluate_mode(st, in, p), in, p);
}

std::vector<int> jump_check(const HybridState& st, const ModeEval& ev, const DriveSample&, const MaterialParams& p) {
  std::vector<int> active;
  if (!parity_ok(st.xd)) return active;
  const Predicates pr = predicates(st, ev, p);
  const int n = st.xd.n_l;
  auto add = [&](int m, bool cond) {
    if (cond) active.push_back(m);
  };
  switch (ev.mode) {
    case Mode::AM0:
      add(1, pr.q1);
      add(2, pr.q2);
      add(3, pr.slack_entry);
      add(4, n >= 3 && pr.range_exit);
      break;
    case Mode::MA0:
      add(5, pr.q3);
      add(6, pr.slack_entry);
      add(7, n >= 4 && pr.range_exit);
      break;
    case Mode::M0:
      add(8, pr.q4 && !pr.slack_entry);
      add(9, pr.slack_entry);
      break;
    case Mode::MA1:
      add(10, n >= 4 && pr.range_exit);
      add(11, pr.retension);
      add(12, pr.q3);
      break;
    case Mode::AM1:
      add(13, n >= 3 && pr.range_exit);
      add(14, pr.retension && !pr.q2);
      add(15, pr.q2 && st.xc.eps - ev.phase.x_M * p.eps_T >= 0.0);
      add(16, pr.q1);
      break;
  }
  return active;
}

int select_jump(const std::vector<int>& active) {
  if (active.empty()) return 0;
  return *std::min_element(active.begin(), active.end(), [](int a, int b) {
    const int ca = priority_class(a), cb = priority_class(b);
    return ca != cb ? ca < cb : a < b;
  });
}

const char* jump_trigger(int m) {
  switch (m) {
    case 1: case 16: return "reversal to unloading";
    case 2: case 15: return "full martensite threshold";
    case 3: case 6: return "loss of tension";
    case 4: case 7: case 10: case 13: return "inner loop closure";
    case 5: case 12: return "reversal to loading";
    case 8: return "martensite unloading";
    case 9: return "martensite loss of tension";
    case 11: case 14: return "tension regained";
  }
  return "unknown";
}

HybridState jump_map(const HybridState& st, int m, const MaterialParams& p) {
  if (m < 1 || m > 16) throw InconsistentState("jump index " + std::to_string(m) + " outside 1..16");
  const Mode from = mode_of(st.xd);
  if (kSource[m] != from)
    throw InconsistentState("jump g" + std::to_string(m) + " does not leave mode " + mode_name(from));
  HybridState out = st;
  out.x_hint = std::numeric_limits<double>::quiet_NaN();
  const double x = solve_phase(st, p).x_M;
  const double eps_eff = st.xd.s ? x * p.eps_T : st.xc.eps;
  DiscreteState& d = out.xd;
  try {
    switch (m) {
      case 1: case 16:
        out.mem.reverse(x, BranchKind::M, eps_eff);
        d.q = BranchType::MA;
        break;
      case 2: case 15:
        out.mem.reset_outer();
        d = {BranchType::M, 0, 1};
        break;
      case 3: case 6:
        d.s = 1;
        break;
      case 11: case 14:
        d.s = 0;
        break;
      case 4: case 7: case 10: case 13:
        out.mem.pop_closure();
        break;
      case 5: case 12:
        out.mem.reverse(x, BranchKind::A, eps_eff);
        d.q = BranchType::AM;
        break;
      case 8: case 9:
        out.mem.enter_saturated_unloading(eps_eff);
        d = {BranchType::MA, m == 9 ? 1 : 0, 2};
        break;
    }
  } catch (const DegenerateReversal& e) {
    throw InconsistentState("jump g" + std::to_string(m) + " from " + describe(st.xd) + ": " + e.what());
  } catch (const MemoryUnderflow& e) {
    throw InconsistentState("jump g" + std::to_string(m) + " from " + describe(st.xd) + ": " + e.what());
  }
  d.n_l = out.mem.level();
  if (!parity_ok(d))
    throw InconsistentState("jump g" + std::to_string(m) + " from " + describe(st.xd) + " produced " + describe(d));
  return out;
}

FlowCheck in_flow_set(const HybridState& st, const DriveSample& in, const MaterialParams& p) {
  if (!parity_ok(st.xd)) return {false, "discrete state " + describe(st.xd) + " violates branch parity"};
  const ModeEval ev = evaluate_mode(st, in, p);
  const double eps = st.xc.eps;
  const double x = ev.phase.x_M;
  switch (ev.mode) {
    case Mode::AM0: case Mode::AM1:
      if (ev.phi_xM < -kPhiTol) return {false, "C_q: phase rate negative on a loading branch"};
      if (eps > ev.strain_threshold + kEpsTol) return {false, "C_q: strain above full-martensite threshold"};
      break;
    case Mode::MA0: case Mode::MA1:
      if (ev.phi_xM > kPhiTol) return {false, "C_q: phase rate positive on an unloading branch"};
      break;
    case Mode::M0:
      if (eps < ev.strain_threshold - kEpsTol) return {false, "C_q: strain below full-martensite threshold"};
      break;
  }
  if (st.xd.s == 0) {
    if (ev.sigma < -kSigmaTol) return {false, "C_s: negative stress while tensioned"};
  } else if (eps > x * p.eps_T + kEpsTol) {
    return {false, "C_s: strain beyond the residual strain while slack"};
  }
  if (st.xd.n_l >= 3) {
    const BranchRecord& r = st.mem.top();
    const bool loading = branch_kind(ev.mode) == BranchKind::A;
    const double h_lo = loading ? ev.bounds.eA_lo : ev.bounds.eM_lo;
    const double h_hi = loading ? ev.bounds.eA_hi : ev.bounds.eM_hi;
    if (x < r.x_lo - kXTol || x > r.x_hi + kXTol) return {false, "C_nl: phase fraction outside branch range"};
    if (ev.eps_eff < h_lo - kEpsTol || ev.eps_eff > h_hi + kEpsTol)
      return {false, "C_nl: effective strain outside branch range"};
  }
  return {};
}

}  // namespace sma
