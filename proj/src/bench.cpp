#include "lighterx/bench.hpp"

#include "lighterx/coupled.hpp"
#include "lighterx/errors.hpp"
#include "lighterx/parallel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace lighterx {

std::string_view to_string(BenchModel m) {
  switch (m) {
    case BenchModel::CoupledLightGcn:
      return "coupled_lightgcn";
    case BenchModel::LighterGcn:
      return "lighter_gcn";
    case BenchModel::LighterJgcf:
      return "lighter_jgcf";
    case BenchModel::LighterGcl:
      return "lighter_gcl";
  }
  return "unknown";
}

BenchModel parse_bench_model(std::string_view name) {
  if (name == "coupled_lightgcn") return BenchModel::CoupledLightGcn;
  switch (parse_variant(name)) {
    case Variant::LighterGcn:
      return BenchModel::LighterGcn;
    case Variant::LighterJgcf:
      return BenchModel::LighterJgcf;
    case Variant::LighterGcl:
      return BenchModel::LighterGcl;
  }
  throw ShapeError("unknown model: " + std::string(name));
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::N:
      return "n";
    case SweepAxis::D:
      return "d";
    case SweepAxis::H:
      return "h";
    case SweepAxis::L:
      return "L";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "n") return SweepAxis::N;
  if (name == "d") return SweepAxis::D;
  if (name == "h") return SweepAxis::H;
  if (name == "L" || name == "l") return SweepAxis::L;
  throw ShapeError("unknown sweep axis: " + std::string(name));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Variant variant_of(BenchModel m) {
  switch (m) {
    case BenchModel::LighterJgcf:
      return Variant::LighterJgcf;
    case BenchModel::LighterGcl:
      return Variant::LighterGcl;
    default:
      return Variant::LighterGcn;
  }
}

template <typename Trainer>
void time_epochs(Trainer& trainer, int reps, TimingReport& r) {
  const auto start = Clock::now();
  trainer.run_epoch(0);  // warmup, untimed
  std::vector<double> t;
  for (int e = 1; e <= reps; ++e) {
    t.push_back(trainer.run_epoch(e).seconds);
  }
  double mean = 0.0;
  for (double v : t) mean += v;
  mean /= static_cast<double>(t.size());
  double var = 0.0;
  for (double v : t) var += (v - mean) * (v - mean);
  r.epoch_s_mean = mean;
  r.epoch_s_std = t.size() > 1 ? std::sqrt(var / static_cast<double>(t.size() - 1)) : 0.0;
  r.total_s += seconds_since(start);
}

}  // namespace

TimingReport bench_epoch(BenchModel model, const InteractionMatrix& train, const BenchConfig& cfg) {
  if (cfg.repetitions < 0) {
    throw ShapeError("repetitions must be nonnegative");
  }
  set_threads(cfg.threads);
  TimingReport r;
  r.model = std::string(to_string(model));
  r.threads = cfg.threads;
  r.repetitions = cfg.repetitions;
  r.nodes = train.num_nodes();
  r.interactions = train.nnz();

  if (model == BenchModel::CoupledLightGcn) {
    r.params = train.num_nodes() * cfg.train.d;
    if (cfg.repetitions == 0) {
      return r;
    }
    const auto start = Clock::now();
    const SparseMatrix p = normalize_adjacency(build_adjacency(train));
    r.precompute_s = seconds_since(start);
    r.total_s = r.precompute_s;
    CoupledLightGcnTrainer trainer(train, p, cfg.precompute.layers, cfg.train);
    r.params = trainer.parameter_count();
    time_epochs(trainer, cfg.repetitions, r);
    return r;
  }

  PrecomputeConfig pc = cfg.precompute;
  pc.variant = variant_of(model);
  if (cfg.repetitions == 0) {
    const auto dims = feature_dims(train, pc.features);
    r.h = dims.h_user + dims.h_item;
    r.params = xavier_init<float>(r.h, cfg.train.d, cfg.train.mlp, 0).parameter_count();
    return r;
  }
  const auto pre = precompute(train, pc);
  r.precompute_s = pre.seconds();
  r.total_s = r.precompute_s;
  r.h = pre.features.h();
  const TrainInputs inputs = to_train_inputs(pre, pc.variant);
  DecoupledTrainer trainer(pc.variant, train, inputs, cfg.train);
  r.params = trainer.parameter_count();
  time_epochs(trainer, cfg.repetitions, r);
  return r;
}

std::vector<SweepRow> scaling_sweep(SweepAxis axis, std::span<const double> values, BenchModel model,
                                    const SyntheticSpec& base, const BenchConfig& cfg) {
  std::vector<SweepRow> rows;
  for (double v : values) {
    SyntheticSpec spec = base;
    BenchConfig c = cfg;
    const auto iv = static_cast<std::int64_t>(std::llround(v));
    switch (axis) {
      case SweepAxis::N:
        spec.users = static_cast<std::int32_t>(iv / 2);
        spec.items = static_cast<std::int32_t>(iv - iv / 2);
        break;
      case SweepAxis::D:
        c.train.d = iv;
        break;
      case SweepAxis::H:
        c.precompute.features.h_user_override = iv / 2;
        c.precompute.features.h_item_override = iv - iv / 2;
        break;
      case SweepAxis::L:
        c.precompute.layers = static_cast<int>(iv);
        break;
    }
    const auto data = generate_synthetic(spec);
    rows.push_back({axis, v, bench_epoch(model, data, c)});
  }
  return rows;
}

void write_sweep_csv_header(std::ostream& out) {
  out << "axis,value,variant,precompute_s,epoch_s_mean,epoch_s_std,params\n";
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  char buf[256];
  for (const auto& row : rows) {
    const auto& r = row.report;
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%s,%.9g,%.9g,%.9g,%lld\n", std::string(to_string(row.axis)).c_str(),
                  row.value, r.model.c_str(), r.precompute_s, r.epoch_s_mean, r.epoch_s_std,
                  static_cast<long long>(r.params));
    out << buf;
  }
}

double timer_overhead_fraction(double interval_s, int trials) {
  if (!(interval_s > 0.0) || trials < 1) {
    throw ShapeError("interval must be positive and trials >= 1");
  }
  // The harness brackets each epoch with one start/stop pair; time that pair
  // around an empty body.
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto start = Clock::now();
    total += seconds_since(start);
  }
  return (total / trials) / interval_s;
}

}  // namespace lighterx
