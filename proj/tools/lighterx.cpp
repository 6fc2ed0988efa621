#include "lighterx/bench.hpp"
#include "lighterx/coupled.hpp"
#include "lighterx/data.hpp"
#include "lighterx/errors.hpp"
#include "lighterx/eval.hpp"
#include "lighterx/parallel.hpp"
#include "lighterx/precompute.hpp"
#include "lighterx/random.hpp"
#include "lighterx/serialize.hpp"
#include "lighterx/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace lighterx;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

void emit(const json& j) {
  std::cout << j.dump() << '\n';
  std::cout.flush();
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  Fnv1a h;
  h.update(bytes.data(), bytes.size());
  return h.digest();
}

// Numbers and arrays stay typed in the echoed config; everything else is a
// string.
json typed(const std::string& raw) {
  if (raw.empty()) return raw;
  try {
    auto v = json::parse(raw);
    if (v.is_number() || v.is_array()) return v;
  } catch (const json::exception&) {
  }
  return raw;
}

// Every option of a subcommand with its resolved value (flag, config file
// or default).
json resolved_config(const CLI::App& sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
    std::string key = opt->get_name();
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (opt->get_expected_max() == 0) {
      cfg[key] = opt->count() > 0;
      continue;
    }
    std::vector<std::string> res = opt->count() > 0 ? opt->results() : std::vector<std::string>{opt->get_default_str()};
    json values = json::array();
    for (const auto& r : res) values.push_back(typed(r));
    cfg[key] = values.size() == 1 ? values[0] : values;
  }
  return cfg;
}

struct Dataset {
  json manifest;
  IdMap users;
  IdMap items;
  InteractionMatrix train;
  InteractionMatrix valid;
  InteractionMatrix test;
};

Dataset load_dataset(const fs::path& dir) {
  Dataset d;
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) {
    throw DataError("missing " + manifest_path.string() + " (run `lighterx prepare` first)");
  }
  try {
    d.manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  d.users = read_id_list(dir / "users.txt");
  d.items = read_id_list(dir / "items.txt");
  d.train = read_split_tsv(dir / "train.tsv", d.users, d.items);
  d.valid = read_split_tsv(dir / "valid.tsv", d.users, d.items);
  d.test = read_split_tsv(dir / "test.tsv", d.users, d.items);
  if (hex(d.train.content_hash()) != d.manifest.value("train_hash", std::string())) {
    throw DataError(dir.string() + ": train.tsv does not match the manifest's train_hash");
  }
  return d;
}

std::vector<double> parse_fractions(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw ShapeError("--split expects three comma-separated numbers, got '" + s + "'");
    }
  }
  if (out.size() != 3) {
    throw ShapeError("--split expects three comma-separated numbers, got '" + s + "'");
  }
  return out;
}

// ---------------------------------------------------------------- prepare

struct PrepareArgs {
  std::string input;
  std::string out_dir;
  std::string split = "0.8,0.1,0.1";
  std::uint64_t seed = 2020;
  std::int64_t min_degree = 1;
  bool skip_header = false;
};

void cmd_prepare(const PrepareArgs& a, const json& config) {
  LoadOptions lo;
  lo.min_degree = a.min_degree;
  lo.skip_header = a.skip_header;
  const auto data = load_interactions(a.input, lo);
  const auto f = parse_fractions(a.split);
  SplitSpec spec;
  spec.train = f[0];
  spec.valid = f[1];
  spec.test = f[2];
  spec.seed = derive_seed(a.seed, "split");
  const auto split = split_per_user(data, spec);

  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  write_id_list(data.user_ids(), dir / "users.txt");
  write_id_list(data.item_ids(), dir / "items.txt");
  write_interactions_tsv(split.train, dir / "train.tsv");
  write_interactions_tsv(split.valid, dir / "valid.tsv");
  write_interactions_tsv(split.test, dir / "test.tsv");

  const SparseMatrix p = normalize_adjacency(build_adjacency(split.train));
  json m;
  m["source"] = fs::path(a.input).filename().string();
  m["users"] = data.num_users();
  m["items"] = data.num_items();
  m["interactions"] = data.nnz();
  m["sparsity_percent"] = 100.0 * data.sparsity();
  m["split"] = {{"train", split.train.nnz()}, {"valid", split.valid.nnz()}, {"test", split.test.nnz()}};
  m["split_fractions"] = f;
  m["seed"] = a.seed;
  m["min_degree"] = a.min_degree;
  m["train_hash"] = hex(split.train.content_hash());
  m["p_hash"] = hex(p.content_hash());
  {
    std::ofstream out(dir / "manifest.json");
    out << m.dump(2) << '\n';
    if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  }
  json summary{{"event", "prepare"}, {"config", config}, {"manifest", m}};
  summary["manifest_hash"] = hex(file_hash(dir / "manifest.json"));
  emit(summary);
}

// ------------------------------------------------------------- precompute

struct PrecomputeArgs {
  std::string dataset_dir;
  std::string variant = "lighter_gcn";
  double c = 1.0;
  std::string dist = "bernoulli";
  std::string estimator = "mean";
  double quantile = 0.5;
  bool raw = false;
  Index h_user = 0;
  Index h_item = 0;
  int layers = 3;
  double jacobi_a = 1.0;
  double jacobi_b = 1.0;
  int svd_q = 5;
  std::uint64_t seed = 2020;
  std::string out;
};

void cmd_precompute(const PrecomputeArgs& a, const json& config) {
  const auto ds = load_dataset(a.dataset_dir);
  PrecomputeConfig pc;
  pc.variant = parse_variant(a.variant);
  pc.features.c = a.c;
  pc.features.distribution = parse_distribution(a.dist);
  if (a.estimator == "mean") {
    pc.features.estimator = SparsityEstimator::Mean;
  } else if (a.estimator == "quantile") {
    pc.features.estimator = SparsityEstimator::Quantile;
  } else {
    throw ShapeError("--estimator must be mean or quantile");
  }
  pc.features.quantile = a.quantile;
  pc.features.normalize = !a.raw;
  pc.features.h_user_override = a.h_user;
  pc.features.h_item_override = a.h_item;
  pc.features.seed = derive_seed(a.seed, "features");
  pc.layers = a.layers;
  pc.jacobi_a = a.jacobi_a;
  pc.jacobi_b = a.jacobi_b;
  pc.svd_q = a.svd_q;
  pc.svd.seed = derive_seed(a.seed, "svd");
  const auto pre = precompute(ds.train, pc);
  write_cache(a.out, pre, pc, ds.train);
  emit({{"event", "precompute"},
        {"config", config},
        {"variant", std::string(to_string(pc.variant))},
        {"h_user", pre.features.h_user},
        {"h_item", pre.features.h_item},
        {"h", pre.features.h()},
        {"features_s", pre.features_s},
        {"propagation_s", pre.propagation_s},
        {"cache", a.out},
        {"cache_hash", hex(file_hash(a.out))}});
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  std::string cache;
  std::string dataset_dir;
  std::string variant;
  Index d = 64;
  double lr = 1e-3;
  Index batch = 2048;
  int epochs = 100;
  double weight_decay = 0.0;
  double lambda1 = 0.01;
  double temp = 0.8;
  double beta = 0.1;
  int patience = 10;
  int eval_every = 1;
  std::uint64_t seed = 2020;
  std::string ckpt;
  bool resume = false;
};

// Refuses caches built from a different train split or stale features.
void check_cache(const CacheMeta& meta, const Dataset& ds) {
  if (hex(meta.train_hash) != ds.manifest.value("train_hash", std::string())) {
    throw DataError("cache was built from a different train split (train hash mismatch); rerun precompute");
  }
  if (hex(meta.p_hash) != ds.manifest.value("p_hash", std::string())) {
    throw DataError("cache propagation matrix does not match the dataset manifest (P hash mismatch)");
  }
  RandomMatrixSpec spec = meta.features;
  spec.h_user_override = meta.h_user;
  spec.h_item_override = meta.h_item;
  if (matrix_hash(gen_feat(ds.train, spec).data) != meta.x_hash) {
    throw DataError("cache feature matrix does not match its recorded generator (X hash mismatch)");
  }
}

Checkpoint make_checkpoint(const DecoupledTrainer& t, const Dataset& ds, const TrainConfig& cfg, int epochs_done) {
  Checkpoint c;
  c.num_users = ds.train.num_users();
  c.num_items = ds.train.num_items();
  c.params = t.params();
  c.h = c.params.input_dim();
  c.d = c.params.output_dim();
  c.variant = t.variant();
  c.beta = cfg.beta;
  c.epoch = epochs_done;
  c.train_hash = ds.train.content_hash();
  c.embeddings = t.embeddings();
  return c;
}

void cmd_train(const TrainArgs& a, const json& config) {
  const auto ds = load_dataset(a.dataset_dir);
  const auto cache = read_cache(a.cache);
  check_cache(cache.meta, ds);
  if (!a.variant.empty() && parse_variant(a.variant) != cache.meta.variant) {
    throw DataError("--variant " + a.variant + " does not match the cache's " +
                    std::string(to_string(cache.meta.variant)));
  }
  const Variant variant = cache.meta.variant;

  TrainConfig cfg;
  cfg.d = a.d;
  cfg.lr = a.lr;
  cfg.batch_size = a.batch;
  cfg.epochs = a.epochs;
  cfg.weight_decay = a.weight_decay;
  cfg.lambda1 = a.lambda1;
  cfg.temp = a.temp;
  cfg.beta = a.beta;
  cfg.patience = a.patience;
  cfg.eval_every = a.eval_every;
  cfg.seed = a.seed;

  std::optional<ModelParams> initial;
  int first_epoch = 0;
  if (a.resume && !a.ckpt.empty() && fs::exists(a.ckpt)) {
    auto ckpt = read_checkpoint(a.ckpt);
    if (ckpt.variant != variant || ckpt.train_hash != ds.train.content_hash() || ckpt.d != cfg.d) {
      throw DataError(a.ckpt + " belongs to a different variant, dataset or width; refusing to resume");
    }
    first_epoch = ckpt.epoch;
    initial = std::move(ckpt.params);
  }

  DecoupledTrainer trainer(variant, ds.train, cache.inputs, cfg, std::move(initial));
  emit({{"event", "config"},
        {"config", config},
        {"variant", std::string(to_string(variant))},
        {"h", cache.inputs.z.cols()},
        {"params", trainer.parameter_count()},
        {"start_epoch", first_epoch}});
  auto on_epoch = [&](const EpochLog& log) {
    json j{{"event", "epoch"}, {"epoch", log.epoch},   {"loss", log.loss},
           {"bpr", log.bpr},   {"ssl", log.ssl},       {"seconds", log.seconds}};
    if (log.valid_recall) {
      j["valid_recall@" + std::to_string(cfg.eval_k)] = *log.valid_recall;
      j["valid_ndcg@" + std::to_string(cfg.eval_k)] = *log.valid_ndcg;
      j["improved"] = log.improved;
    }
    emit(j);
    if (!a.ckpt.empty()) {
      write_checkpoint(a.ckpt, make_checkpoint(trainer, ds, cfg, log.epoch + 1));
    }
  };
  const auto res = fit(trainer, &ds.valid, cfg, on_epoch, first_epoch);
  const int done = first_epoch + res.epochs_run;
  if (!a.ckpt.empty()) {
    write_checkpoint(a.ckpt, make_checkpoint(trainer, ds, cfg, done));
  }
  json j{{"event", "done"}, {"epochs_run", res.epochs_run}, {"best_epoch", res.best_epoch}};
  if (res.best_epoch >= 0) j["best_valid_recall"] = res.best_valid;
  if (!a.ckpt.empty()) j["ckpt"] = a.ckpt;
  emit(j);
}

// ------------------------------------------------------------------- eval

struct EvalArgs {
  std::string ckpt;
  std::string dataset_dir;
  std::string split = "test";
  std::vector<Index> ks{10, 20};
};

void cmd_eval(const EvalArgs& a, const json& config) {
  const auto ds = load_dataset(a.dataset_dir);
  const auto ckpt = read_checkpoint(a.ckpt);
  if (ckpt.num_users != ds.train.num_users() || ckpt.num_items != ds.train.num_items()) {
    throw DataError("checkpoint has " + std::to_string(ckpt.num_users) + " users / " +
                    std::to_string(ckpt.num_items) + " items; dataset has " +
                    std::to_string(ds.train.num_users()) + " / " + std::to_string(ds.train.num_items()));
  }
  if (ckpt.train_hash != ds.train.content_hash()) {
    throw DataError("checkpoint was trained on a different train split");
  }
  std::vector<const InteractionMatrix*> masks{&ds.train};
  const InteractionMatrix* gt = nullptr;
  if (a.split == "test") {
    masks.push_back(&ds.valid);
    gt = &ds.test;
  } else if (a.split == "valid") {
    gt = &ds.valid;
  } else {
    throw ShapeError("--split must be test or valid");
  }
  const auto metrics = evaluate(ckpt.embeddings, *gt, masks, a.ks);
  emit({{"event", "config"}, {"config", config}});
  write_metrics_jsonl(std::cout, metrics, a.split);
  write_metrics_table(std::cerr, metrics);
}

// -------------------------------------------------------- inspect-updates

struct InspectArgs {
  std::string dataset_dir;
  std::string variant = "coupled_lightgcn";
  double eps = 5e-4;
  int epochs = 100;
  int layers = 3;
  Index d = 64;
  double lr = 1e-3;
  Index batch = 2048;
  std::uint64_t seed = 2020;
  std::string out;
  std::string heat_out;
};

void cmd_inspect_updates(const InspectArgs& a, const json& config) {
  if (a.variant != "coupled_lightgcn") {
    throw ShapeError("inspect-updates tracks the coupled baseline; --variant must be coupled_lightgcn");
  }
  const auto ds = load_dataset(a.dataset_dir);
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.d = a.d;
  cfg.lr = a.lr;
  cfg.batch_size = a.batch;
  cfg.seed = a.seed;
  const auto ins = inspect_coupled_updates(ds.train, a.layers, cfg, a.eps);
  const auto curve = ins.tracker.curve(ins.steps);
  {
    std::ofstream out(a.out);
    if (!out) throw DataError("cannot write " + a.out);
    out << "k,fraction\n";
    char buf[64];
    for (std::size_t k = 0; k < curve.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", k, curve[k]);
      out << buf;
    }
  }
  if (!a.heat_out.empty()) {
    std::ofstream out(a.heat_out);
    if (!out) throw DataError("cannot write " + a.heat_out);
    out << "epoch,steps,untouched_fraction,mean_updates,p50,p90,max\n";
    for (const auto& h : ins.tracker.heat()) {
      out << h.epoch << ',' << h.steps << ',' << h.untouched_fraction << ',' << h.mean_updates << ',' << h.p50 << ','
          << h.p90 << ',' << h.max << '\n';
    }
  }
  emit({{"event", "inspect_updates"},
        {"config", config},
        {"params", ins.tracker.num_params()},
        {"steps", ins.steps},
        {"fraction_exceeding_half", ins.tracker.fraction_exceeding(ins.steps / 2)},
        {"final_loss", ins.history.empty() ? 0.0 : ins.history.back().loss},
        {"out", a.out}});
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
  std::string dataset_dir;
  std::int32_t syn_users = 1000;
  std::int32_t syn_items = 1000;
  double syn_degree = 10.0;
  bool syn_power_law = false;
  std::uint64_t syn_seed = 7;
  std::vector<std::string> models{"coupled_lightgcn", "lighter_gcn"};
  int repetitions = 3;
  Index d = 64;
  Index batch = 2048;
  int layers = 3;
  double c = 1.0;
  std::string sweep;
  std::vector<double> values;
  std::string out;
};

void cmd_bench(const BenchArgs& a, const json& config) {
  BenchConfig cfg;
  cfg.repetitions = a.repetitions;
  cfg.threads = get_threads();
  cfg.train.d = a.d;
  cfg.train.batch_size = a.batch;
  cfg.precompute.layers = a.layers;
  cfg.precompute.features.c = a.c;
  SyntheticSpec syn;
  syn.users = a.syn_users;
  syn.items = a.syn_items;
  syn.avg_degree = a.syn_degree;
  syn.power_law = a.syn_power_law;
  syn.seed = a.syn_seed;
  emit({{"event", "config"}, {"config", config}});

  if (!a.sweep.empty()) {
    if (a.values.empty()) throw ShapeError("--sweep needs --values");
    const auto axis = parse_sweep_axis(a.sweep);
    std::ofstream file;
    if (!a.out.empty()) {
      file.open(a.out);
      if (!file) throw DataError("cannot write " + a.out);
    }
    std::ostream& out = a.out.empty() ? std::cout : file;
    write_sweep_csv_header(out);
    for (const auto& name : a.models) {
      const auto rows = scaling_sweep(axis, a.values, parse_bench_model(name), syn, cfg);
      write_sweep_csv(out, rows);
    }
    return;
  }

  const InteractionMatrix data = a.dataset_dir.empty() ? generate_synthetic(syn) : load_dataset(a.dataset_dir).train;
  for (const auto& name : a.models) {
    const auto r = bench_epoch(parse_bench_model(name), data, cfg);
    emit({{"event", "bench"},
          {"model", r.model},
          {"nodes", r.nodes},
          {"interactions", r.interactions},
          {"h", r.h},
          {"params", r.params},
          {"precompute_s", r.precompute_s},
          {"epoch_s_mean", r.epoch_s_mean},
          {"epoch_s_std", r.epoch_s_std},
          {"total_s", r.total_s},
          {"repetitions", r.repetitions},
          {"threads", r.threads}});
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lighterx: decoupled low-rank graph recommenders"};
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (1 = deterministic mode)")->check(CLI::PositiveNumber);

  PrepareArgs pa;
  auto* prep = app.add_subcommand("prepare", "split raw interactions and write a dataset directory");
  prep->add_option("--input", pa.input, "user<TAB>item[<TAB>...] file")->required();
  prep->add_option("--out-dir", pa.out_dir)->required();
  prep->add_option("--split", pa.split, "train,valid,test fractions");
  prep->add_option("--seed", pa.seed);
  prep->add_option("--min-degree", pa.min_degree, "iteratively drop users/items below this degree");
  prep->add_flag("--skip-header", pa.skip_header);

  PrecomputeArgs pc;
  auto* pre = app.add_subcommand("precompute", "generate features and propagate; writes an LXPC cache");
  pre->add_option("--dataset-dir", pc.dataset_dir)->required();
  pre->add_option("--variant", pc.variant)->check(CLI::IsMember({"lighter_gcn", "lighter_jgcf", "lighter_gcl"}));
  pre->add_option("--c", pc.c, "h = ceil(c r ln(n / r))");
  pre->add_option("--dist", pc.dist)->check(CLI::IsMember({"gaussian", "bernoulli", "uniform", "orthogonal"}));
  pre->add_option("--estimator", pc.estimator, "sparsity level r: mean or quantile of the degrees");
  pre->add_option("--quantile", pc.quantile);
  pre->add_flag("--raw", pc.raw, "unnormalized +-1 / N(0,1) entries");
  pre->add_option("--h-user", pc.h_user, "override the user block width");
  pre->add_option("--h-item", pc.h_item, "override the item block width");
  pre->add_option("--layers", pc.layers);
  pre->add_option("--jacobi-a", pc.jacobi_a);
  pre->add_option("--jacobi-b", pc.jacobi_b);
  pre->add_option("--svd-q", pc.svd_q);
  pre->add_option("--seed", pc.seed);
  pre->add_option("--out", pc.out)->required();

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "train the MLP head on a cache; JSON-line logs, LXEM checkpoint");
  tr->add_option("--cache", ta.cache)->required();
  tr->add_option("--dataset-dir", ta.dataset_dir)->required();
  tr->add_option("--variant", ta.variant, "optional; must match the cache")
      ->check(CLI::IsMember({"lighter_gcn", "lighter_jgcf", "lighter_gcl"}));
  tr->add_option("--d", ta.d);
  tr->add_option("--lr", ta.lr);
  tr->add_option("--batch", ta.batch);
  tr->add_option("--epochs", ta.epochs);
  tr->add_option("--weight-decay", ta.weight_decay);
  tr->add_option("--lambda1", ta.lambda1);
  tr->add_option("--temp", ta.temp);
  tr->add_option("--beta", ta.beta);
  tr->add_option("--patience", ta.patience);
  tr->add_option("--eval-every", ta.eval_every);
  tr->add_option("--seed", ta.seed);
  tr->add_option("--ckpt", ta.ckpt, "checkpoint path, rewritten after every epoch");
  tr->add_flag("--resume", ta.resume, "continue from --ckpt if it exists");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "full-ranking metrics for a checkpoint");
  ev->add_option("--ckpt", ea.ckpt)->required();
  ev->add_option("--dataset-dir", ea.dataset_dir)->required();
  ev->add_option("--split", ea.split);
  ev->add_option("--k", ea.ks)->delimiter(',');

  InspectArgs ia;
  auto* ins = app.add_subcommand("inspect-updates", "per-parameter update counts of the coupled baseline");
  ins->add_option("--dataset-dir", ia.dataset_dir)->required();
  ins->add_option("--variant", ia.variant);
  ins->add_option("--eps", ia.eps, "count steps with |delta w| > eps");
  ins->add_option("--epochs", ia.epochs);
  ins->add_option("--layers", ia.layers);
  ins->add_option("--d", ia.d);
  ins->add_option("--lr", ia.lr);
  ins->add_option("--batch", ia.batch);
  ins->add_option("--seed", ia.seed);
  ins->add_option("--out", ia.out, "fraction-vs-k CSV")->required();
  ins->add_option("--heat-out", ia.heat_out, "per-epoch summary CSV");

  BenchArgs ba;
  auto* be = app.add_subcommand("bench", "per-epoch timing and parameter counts");
  be->add_option("--dataset-dir", ba.dataset_dir, "use this train split instead of synthetic data");
  be->add_option("--syn-users", ba.syn_users);
  be->add_option("--syn-items", ba.syn_items);
  be->add_option("--syn-degree", ba.syn_degree);
  be->add_flag("--syn-power-law", ba.syn_power_law);
  be->add_option("--syn-seed", ba.syn_seed);
  be->add_option("--models", ba.models)->delimiter(',');
  be->add_option("--repetitions", ba.repetitions, "timed epochs after warmup; 0 = parameter counts only");
  be->add_option("--d", ba.d);
  be->add_option("--batch", ba.batch);
  be->add_option("--layers", ba.layers);
  be->add_option("--c", ba.c);
  be->add_option("--sweep", ba.sweep, "n, d, h or L");
  be->add_option("--values", ba.values)->delimiter(',');
  be->add_option("--out", ba.out, "sweep CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    set_threads(threads);
    if (*prep) cmd_prepare(pa, resolved_config(*prep));
    if (*pre) cmd_precompute(pc, resolved_config(*pre));
    if (*tr) cmd_train(ta, resolved_config(*tr));
    if (*ev) cmd_eval(ea, resolved_config(*ev));
    if (*ins) cmd_inspect_updates(ia, resolved_config(*ins));
    if (*be) cmd_bench(ba, resolved_config(*be));
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
