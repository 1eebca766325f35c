#pragma once

#include <string>
#include <vector>

#include "sma/params.hpp"

namespace sma {

enum class BranchKind { A, M };

const char* to_string(BranchKind kind);

/// One level of the minor-loop stack. Level 1 is the outer loop. Every inner
/// level replaces exactly one branch of its parent (`modified`) by a blend
/// that passes through the reversal point and rejoins the parent branch at
/// the opposite end of the admissible range:
///
///   new M:  M'(x) = min(M(x) + gap (x - x_lo) / (x_rev - x_lo), A(x))
///   new A:  A'(x) = max(A(x) - gap (x_hi - x) / (x_hi - x_rev), M(x))
///
/// with gap = A(x_rev) - M(x_rev) of the parent. The blend acts on the T0
/// curves; sigma_S(x) (T - T0) is added afterwards at every level.
struct BranchRecord {
  int level = 1;
  double x_lo = 0.0;
  double x_hi = 1.0;
  BranchKind modified = BranchKind::A;
  double x_rev = 0.0;
  double gap = 0.0;
  double reversal_eps = 0.0;
};

struct BranchValue {
  double A = 0.0;     // loading branch at T0
  double M = 0.0;     // unloading branch at T0
  double dA_dx = 0.0;
  double dM_dx = 0.0;
};

struct BranchPartials {
  double d_xM = 0.0;
  double d_T = 0.0;
};

struct StrainBounds {
  double eA_lo, eA_hi;  // h_epsA at x_lo and x_hi
  double eM_lo, eM_hi;  // h_epsM at x_lo and x_hi
};

class BranchMemory {
 public:
  explicit BranchMemory(const MaterialParams& p);

  int level() const { return static_cast<int>(stack_.size()); }
  const BranchRecord& top() const { return stack_.back(); }
  const std::vector<BranchRecord>& records() const { return stack_; }
  const MaterialParams& params() const { return p_; }

  /// Branch stress of the current level. x_M must lie in the admissible
  /// range within 1e-9, otherwise RangeError.
  double branch_eval(BranchKind kind, double x_M, double T) const;
  BranchPartials branch_partials(BranchKind kind, double x_M, double T) const;

  /// T0 curves and slopes of the current level without the range check
  /// (x_M is only clamped to [0, 1]).
  BranchValue evaluate_unchecked(double x_M) const;
  double branch_unchecked(BranchKind kind, double x_M, double T) const;

  /// Opens level n_l + 1 at x_rev. `new_branch` is the branch the state
  /// follows after the reversal: M after a loading reversal, A after an
  /// unloading one. Throws DegenerateReversal when x_rev is within 1e-6 of an
  /// end of the current range.
  void push_reversal(double x_rev, BranchKind new_branch, double reversal_eps = 0.0);

  /// Removes the two innermost levels (loop closure). MemoryUnderflow if n_l < 3.
  void pop_closure();

  /// Drops the innermost level; used when a reversal immediately undoes the
  /// previous one. MemoryUnderflow on level 1.
  void undo_reversal();

  /// Back to the outer loop only.
  void reset_outer();

  /// Outer loop plus a level-2 unloading branch starting at x_M = 1, used
  /// when a fully martensitic wire starts unloading.
  void enter_saturated_unloading(double reversal_eps = 0.0);

  /// Reversal bookkeeping at x_M that also handles reversals at the ends of
  /// the current range (undo, closure, outer-loop reset).
  void reverse(double x_M, BranchKind new_branch, double reversal_eps = 0.0);

  StrainBounds strain_bounds(double T) const;

  /// Text dump of the stack with each level sampled on `samples` points.
  std::string dump(int samples = 201) const;

 private:
  BranchValue evaluate_level(std::size_t depth, double x) const;
  void push_unchecked(double x_rev, BranchKind new_branch, double reversal_eps);

  MaterialParams p_;
  std::vector<BranchRecord> stack_;
};

}  // namespace sma
