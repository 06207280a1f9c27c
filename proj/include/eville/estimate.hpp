#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace eville {

enum class EstimateKind { kCrossingFreq, kStoppedMean };

inline const char* to_string(EstimateKind k) {
  return k == EstimateKind::kCrossingFreq ? "CROSSING-FREQ" : "STOPPED-MEAN";
}

/// Monte Carlo point estimate with its standard error and provenance.
/// CROSSING-FREQ: std_error = sqrt(p(1-p)/n). STOPPED-MEAN: sample sd / sqrt(n).
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  EstimateKind kind = EstimateKind::kCrossingFreq;

  friend bool operator==(const McEstimate&, const McEstimate&) = default;
};

}  // namespace eville
