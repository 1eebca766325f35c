#include "sma/fit_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sma/errors.hpp"

namespace sma {

double fit_index(std::span<const double> measured, std::span<const double> simulated) {
  if (measured.size() != simulated.size())
    throw DomainError("FIT needs series of equal length (" + std::to_string(measured.size()) + " vs " +
                      std::to_string(simulated.size()) + ")");
  if (measured.size() < 2) throw DomainError("FIT needs at least two samples");
  const double mean = std::accumulate(measured.begin(), measured.end(), 0.0) / measured.size();
  double err = 0.0, dev = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    err += (measured[i] - simulated[i]) * (measured[i] - simulated[i]);
    dev += (measured[i] - mean) * (measured[i] - mean);
  }
  double peak = 0.0;
  for (double y : measured) peak = std::max(peak, std::abs(y));
  const double scale = peak * 1e-13;
  if (dev <= scale * scale * measured.size()) throw DegenerateSignal("FIT reference signal is constant");
  return std::max(0.0, 100.0 * (1.0 - std::sqrt(err / dev)));
}

}  // namespace sma
