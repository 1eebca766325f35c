#include "sma/hysteresis_memory.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "sma/constitutive.hpp"
#include "sma/errors.hpp"

namespace sma {

namespace {

constexpr double kRangeTolerance = 1e-9;
constexpr double kReversalRoom = 1e-6;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

const char* to_string(BranchKind kind) { return kind == BranchKind::A ? "A" : "M"; }

BranchMemory::BranchMemory(const MaterialParams& p) : p_(p) { reset_outer(); }

BranchValue BranchMemory::evaluate_level(std::size_t depth, double x) const {
  if (depth == 0) return {sigma_A0(x, p_), sigma_M0(x, p_), sigma_A0_dx(x, p_), sigma_M0_dx(x, p_)};
  BranchValue v = evaluate_level(depth - 1, x);
  const BranchRecord& r = stack_[depth];
  if (r.modified == BranchKind::M) {
    const double span = r.x_rev - r.x_lo;
    const double m = v.M + r.gap * (x - r.x_lo) / span;
    if (m < v.A) {
      v.M = m;
      v.dM_dx += r.gap / span;
    } else {
      v.M = v.A;
      v.dM_dx = v.dA_dx;
    }
  } else {
    const double span = r.x_hi - r.x_rev;
    const double a = v.A - r.gap * (r.x_hi - x) / span;
    if (a > v.M) {
      v.A = a;
      v.dA_dx += r.gap / span;
    } else {
      v.A = v.M;
      v.dA_dx = v.dM_dx;
    }
  }
  return v;
}

BranchValue BranchMemory::evaluate_unchecked(double x_M) const {
  return evaluate_level(stack_.size() - 1, std::clamp(x_M, 0.0, 1.0));
}

double BranchMemory::branch_unchecked(BranchKind kind, double x_M, double T) const {
  const double x = std::clamp(x_M, 0.0, 1.0);
  const BranchValue v = evaluate_level(stack_.size() - 1, x);
  return (kind == BranchKind::A ? v.A : v.M) + sigma_S(x, p_) * (T - p_.T0);
}

double BranchMemory::branch_eval(BranchKind kind, double x_M, double T) const {
  const BranchRecord& r = top();
  if (!(x_M >= r.x_lo - kRangeTolerance && x_M <= r.x_hi + kRangeTolerance))
    throw RangeError("x_M = " + fmt(x_M) + " outside admissible range [" + fmt(r.x_lo) + ", " + fmt(r.x_hi) +
                     "] of level " + std::to_string(r.level));
  return branch_unchecked(kind, std::clamp(x_M, r.x_lo, r.x_hi), T);
}

BranchPartials BranchMemory::branch_partials(BranchKind kind, double x_M, double T) const {
  branch_eval(kind, x_M, T);  // range check
  const double x = std::clamp(x_M, top().x_lo, top().x_hi);
  const BranchValue v = evaluate_level(stack_.size() - 1, x);
  const double slope = kind == BranchKind::A ? v.dA_dx : v.dM_dx;
  return {slope + sigma_S_dx(x, p_) * (T - p_.T0), sigma_S(x, p_)};
}

void BranchMemory::push_unchecked(double x_rev, BranchKind new_branch, double reversal_eps) {
  const BranchRecord& parent = top();
  const BranchValue v = evaluate_level(stack_.size() - 1, x_rev);
  BranchRecord r;
  r.level = parent.level + 1;
  r.modified = new_branch;
  r.x_rev = x_rev;
  r.gap = v.A - v.M;
  r.reversal_eps = reversal_eps;
  if (new_branch == BranchKind::M) {
    r.x_lo = parent.x_lo;
    r.x_hi = x_rev;
  } else {
    r.x_lo = x_rev;
    r.x_hi = parent.x_hi;
  }
  stack_.push_back(r);
}

void BranchMemory::push_reversal(double x_rev, BranchKind new_branch, double reversal_eps) {
  const BranchRecord& r = top();
  if (!(x_rev - r.x_lo > kReversalRoom && r.x_hi - x_rev > kReversalRoom))
    throw DegenerateReversal("reversal at x_M = " + fmt(x_rev) + " leaves no room inside [" + fmt(r.x_lo) + ", " +
                             fmt(r.x_hi) + "]");
  push_unchecked(x_rev, new_branch, reversal_eps);
}

void BranchMemory::pop_closure() {
  if (level() < 3) throw MemoryUnderflow("loop closure needs n_l >= 3, have " + std::to_string(level()));
  stack_.resize(stack_.size() - 2);
}

void BranchMemory::undo_reversal() {
  if (level() < 2) throw MemoryUnderflow("cannot drop the outer loop");
  stack_.pop_back();
}

void BranchMemory::reset_outer() {
  stack_.clear();
  stack_.push_back(BranchRecord{});
}

void BranchMemory::enter_saturated_unloading(double reversal_eps) {
  reset_outer();
  push_unchecked(1.0, BranchKind::M, reversal_eps);
}

void BranchMemory::reverse(double x_M, BranchKind new_branch, double reversal_eps) {
  const BranchRecord& r = top();
  const double x = std::clamp(x_M, r.x_lo, r.x_hi);
  if (new_branch == BranchKind::M) {
    if (x - r.x_lo <= kReversalRoom) {
      // Loading never left the lower end: the previous reversal is undone.
      if (level() > 1)
        undo_reversal();
      else
        throw DegenerateReversal("unloading reversal at the lower end of the outer loop");
    } else if (r.x_hi - x <= kReversalRoom) {
      if (level() >= 3) {
        pop_closure();
        reverse(x, new_branch, reversal_eps);
      } else if (level() == 1) {
        enter_saturated_unloading(reversal_eps);
      } else {
        throw DegenerateReversal("unloading reversal at the upper end of level 2");
      }
    } else {
      push_unchecked(x, new_branch, reversal_eps);
    }
  } else {
    if (r.x_hi - x <= kReversalRoom) {
      if (level() > 1)
        undo_reversal();
      else
        throw DegenerateReversal("loading reversal at the upper end of the outer loop");
    } else if (x - r.x_lo <= kReversalRoom) {
      if (x <= kReversalRoom) {
        reset_outer();
      } else if (level() >= 4) {
        pop_closure();
        reverse(x, new_branch, reversal_eps);
      } else {
        throw DegenerateReversal("loading reversal at the lower end of level " + std::to_string(level()));
      }
    } else {
      push_unchecked(x, new_branch, reversal_eps);
    }
  }
}

StrainBounds BranchMemory::strain_bounds(double T) const {
  const BranchRecord& r = top();
  auto h = [&](BranchKind kind, double x) {
    return compliance(x, p_) * branch_unchecked(kind, x, T) + p_.eps_T * x;
  };
  return {h(BranchKind::A, r.x_lo), h(BranchKind::A, r.x_hi), h(BranchKind::M, r.x_lo), h(BranchKind::M, r.x_hi)};
}

std::string BranchMemory::dump(int samples) const {
  std::ostringstream out;
  out << "levels = " << level() << "\n";
  for (std::size_t d = 0; d < stack_.size(); ++d) {
    const BranchRecord& r = stack_[d];
    out << "[level " << r.level << "]\n"
        << "x_lo = " << fmt(r.x_lo) << "\nx_hi = " << fmt(r.x_hi) << "\nmodified = " << to_string(r.modified)
        << "\nx_rev = " << fmt(r.x_rev) << "\ngap = " << fmt(r.gap) << "\nreversal_eps = " << fmt(r.reversal_eps)
        << "\n# x_M, sigma_A(T0), sigma_M(T0), sigma_S\n";
    for (int i = 0; i < samples; ++i) {
      const double x = r.x_lo + (r.x_hi - r.x_lo) * i / std::max(samples - 1, 1);
      const BranchValue v = evaluate_level(d, x);
      out << fmt(x) << ", " << fmt(v.A) << ", " << fmt(v.M) << ", " << fmt(sigma_S(x, p_)) << "\n";
    }
  }
  return out.str();
}

}  // namespace sma
