#include "lighterx/updates.hpp"

#include "lighterx/errors.hpp"

#include <algorithm>

namespace lighterx {

UpdateTracker::UpdateTracker(Index num_params, double eps)
    : counts_(static_cast<std::size_t>(num_params), 0),
      epoch_counts_(static_cast<std::size_t>(num_params), 0),
      eps_(eps) {
  if (num_params < 0) {
    throw ShapeError("parameter count must be nonnegative");
  }
  if (!(eps >= 0.0)) {
    throw NumericError("update threshold eps must be >= 0");
  }
}

void UpdateTracker::end_epoch(int epoch) {
  EpochHeat h;
  h.epoch = epoch;
  h.steps = steps_ - epoch_start_step_;
  epoch_start_step_ = steps_;
  if (!epoch_counts_.empty()) {
    std::vector<std::uint32_t> sorted = epoch_counts_;
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    double sum = 0.0;
    std::size_t zeros = 0;
    for (auto c : sorted) {
      sum += c;
      zeros += (c == 0);
    }
    h.untouched_fraction = static_cast<double>(zeros) / static_cast<double>(n);
    h.mean_updates = sum / static_cast<double>(n);
    h.p50 = sorted[(n - 1) / 2];
    h.p90 = sorted[std::min(n - 1, (n * 9) / 10)];
    h.max = sorted.back();
  }
  heat_.push_back(h);
  std::fill(epoch_counts_.begin(), epoch_counts_.end(), 0u);
}

double UpdateTracker::fraction_exceeding(std::int64_t k) const {
  if (counts_.empty()) {
    return 0.0;
  }
  std::size_t above = 0;
  for (auto c : counts_) {
    above += (static_cast<std::int64_t>(c) > k);
  }
  return static_cast<double>(above) / static_cast<double>(counts_.size());
}

std::vector<double> UpdateTracker::curve(std::int64_t max_k) const {
  // Histogram once, then a suffix sum gives every k in one pass.
  std::vector<std::int64_t> hist(static_cast<std::size_t>(std::max<std::int64_t>(max_k, 0)) + 2, 0);
  for (auto c : counts_) {
    const auto slot = std::min<std::int64_t>(c, max_k + 1);
    ++hist[static_cast<std::size_t>(slot)];
  }
  std::vector<double> out(static_cast<std::size_t>(max_k) + 1, 0.0);
  if (counts_.empty()) {
    return out;
  }
  std::int64_t above = 0;
  for (std::int64_t k = max_k; k >= 0; --k) {
    above += hist[static_cast<std::size_t>(k) + 1];
    out[static_cast<std::size_t>(k)] = static_cast<double>(above) / static_cast<double>(counts_.size());
  }
  return out;
}

}  // namespace lighterx
