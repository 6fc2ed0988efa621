#pragma once

#include "lighterx/types.hpp"

#include <cstdint>
#include <vector>

namespace lighterx {

/// Per-epoch distribution of how many steps each parameter moved by more
/// than eps.
struct EpochHeat {
  int epoch = 0;
  std::int64_t steps = 0;
  double untouched_fraction = 0.0;  // never moved during the epoch
  double mean_updates = 0.0;
  std::int64_t p50 = 0;
  std::int64_t p90 = 0;
  std::int64_t max = 0;
};

/// Counts, per scalar parameter, the optimizer steps where |delta w| > eps.
class UpdateTracker {
 public:
  UpdateTracker(Index num_params, double eps);

  Index num_params() const { return static_cast<Index>(counts_.size()); }
  double eps() const { return eps_; }
  std::int64_t total_steps() const { return steps_; }

  void begin_step() { ++steps_; }
  void observe(Index param, double delta) {
    if (delta > eps_ || delta < -eps_) {
      ++counts_[static_cast<std::size_t>(param)];
      ++epoch_counts_[static_cast<std::size_t>(param)];
    }
  }
  /// Closes the current epoch and records its heat summary.
  void end_epoch(int epoch);

  const std::vector<std::uint32_t>& counts() const { return counts_; }
  /// Fraction of parameters updated more than k times.
  double fraction_exceeding(std::int64_t k) const;
  /// fraction_exceeding(k) for k = 0..max_k.
  std::vector<double> curve(std::int64_t max_k) const;
  const std::vector<EpochHeat>& heat() const { return heat_; }

 private:
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> epoch_counts_;
  std::vector<EpochHeat> heat_;
  double eps_ = 0.0;
  std::int64_t steps_ = 0;
  std::int64_t epoch_start_step_ = 0;
};

}  // namespace lighterx
