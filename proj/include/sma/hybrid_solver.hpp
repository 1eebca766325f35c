#pragma once

#include <string>
#include <vector>

#include "sma/drive.hpp"
#include "sma/hybrid_model.hpp"
#include "sma/mas_model.hpp"
#include "sma/params.hpp"

namespace sma {

struct HybridOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  double sample_rate = 1000.0;  // [Hz]
  double t_end = -1.0;          // negative: drive duration
  double event_tol = 1e-9;      // [s]
  int dense_checks = 8;         // predicate evaluations per accepted step
  int max_chain = 3;            // jumps allowed at one time instant
  long max_steps = 20'000'000;
};

struct HybridSample {
  double t = 0.0;
  long j = 0;
  double eps = 0.0;
  double T = 0.0;
  DiscreteState xd;
  double x_M = 0.0;
  double sigma = 0.0;
  double f = 0.0;
  double R = 0.0;
  double eps_eff = 0.0;
};

struct TransitionRecord {
  double t = 0.0;
  long j = 0;  // jump count after this transition
  DiscreteState from;
  DiscreteState to;
  int index = 0;
  std::string trigger;
  bool flow_ok = true;  // in_flow_set after the chain at this instant completed
};

struct HybridTrajectory {
  std::vector<HybridSample> samples;
  std::vector<TransitionRecord> transitions;
  double wall_time = 0.0;  // [s]
  long steps = 0;
  long rejected_steps = 0;
  int max_chain_length = 0;

  long jumps() const { return static_cast<long>(transitions.size()); }
  /// Number of maximal time intervals spent with s = 1.
  int slack_segments() const;
};

HybridTrajectory integrate_hybrid(const HybridState& initial, const DriveInput& drive, const MaterialParams& p,
                                  const HybridOptions& options = {});

struct ModelComparison {
  HybridTrajectory hybrid;
  MasTrajectory mas;
  double fit_sigma = 0.0;  // hybrid against baseline, NaN when the baseline stress is constant
  double fit_R = 0.0;
  double wall_ratio = 0.0; // hybrid / baseline
  bool always_slack = false;
};

/// Runs both models from eps(0) = eps0 and T(0) = T_init on the same drive and
/// output grid. The hybrid model starts on the outer loop in AM0, the
/// baseline in full austenite.
ModelComparison compare_models(const DriveInput& drive, double eps0, double T_init, const MaterialParams& p,
                               const HybridOptions& hybrid_options, const MasOptions& mas_options);

}  // namespace sma
