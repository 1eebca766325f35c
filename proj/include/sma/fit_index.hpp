#pragma once

#include <span>

namespace sma {

/// Accuracy percentage max(0, 100 (1 - |y - y_hat| / |y - mean(y)|)) with
/// Euclidean norms. `measured` is the reference y. Throws DegenerateSignal for
/// a constant reference and DomainError for mismatched or too short series.
double fit_index(std::span<const double> measured, std::span<const double> simulated);

}  // namespace sma
