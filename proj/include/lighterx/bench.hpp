#pragma once

#include "lighterx/precompute.hpp"
#include "lighterx/synthetic.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lighterx {

enum class BenchModel : std::uint32_t { CoupledLightGcn = 0, LighterGcn = 1, LighterJgcf = 2, LighterGcl = 3 };

std::string_view to_string(BenchModel m);
BenchModel parse_bench_model(std::string_view name);

struct BenchConfig {
  TrainConfig train;
  /// `variant` is overridden by the benchmarked model.
  PrecomputeConfig precompute;
  /// Timed epochs after one untimed warmup epoch. 0 reports parameter
  /// counts only, without building inputs or training.
  int repetitions = 3;
  int threads = 1;
};

struct TimingReport {
  std::string model;
  double precompute_s = 0.0;
  double epoch_s_mean = 0.0;
  double epoch_s_std = 0.0;
  double total_s = 0.0;  // precompute + warmup + timed epochs
  Index params = 0;
  Index h = 0;
  Index nodes = 0;
  std::int64_t interactions = 0;
  int threads = 1;
  int repetitions = 0;
};

/// Wall-clock per-epoch timing. Every model draws the same batch schedule
/// for a given seed, so compared models see identical batches.
TimingReport bench_epoch(BenchModel model, const InteractionMatrix& train, const BenchConfig& cfg);

enum class SweepAxis : std::uint32_t { N = 0, D = 1, H = 2, L = 3 };

std::string_view to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view name);

struct SweepRow {
  SweepAxis axis = SweepAxis::N;
  double value = 0.0;
  TimingReport report;
};

/// Varies one axis over synthetic data built from `base`:
///   n: users = items = value / 2 at the base mean degree,
///   d: embedding width, h: h_user = h_item = value / 2, L: layers.
std::vector<SweepRow> scaling_sweep(SweepAxis axis, std::span<const double> values, BenchModel model,
                                    const SyntheticSpec& base, const BenchConfig& cfg);

void write_sweep_csv_header(std::ostream& out);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

/// Cost of one timer start/stop pair relative to a measured interval of
/// `interval_s` seconds of busy work, as a fraction.
double timer_overhead_fraction(double interval_s, int trials = 20);

}  // namespace lighterx
