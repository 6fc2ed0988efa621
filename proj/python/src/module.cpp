#include "lighterx/bench.hpp"
#include "lighterx/coupled.hpp"
#include "lighterx/errors.hpp"
#include "lighterx/eval.hpp"
#include "lighterx/losses.hpp"
#include "lighterx/precompute.hpp"
#include "lighterx/synthetic.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace lighterx;

namespace {

InteractionMatrix interactions_from_array(std::int32_t users, std::int32_t items,
                                          const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 2, Eigen::RowMajor>& pairs) {
  std::vector<std::pair<std::int32_t, std::int32_t>> v;
  v.reserve(static_cast<std::size_t>(pairs.rows()));
  for (Index r = 0; r < pairs.rows(); ++r) {
    const auto u = pairs(r, 0), i = pairs(r, 1);
    if (u < 0 || u >= users || i < 0 || i >= items) {
      throw DataError("pair " + std::to_string(r) + " is out of range");
    }
    v.emplace_back(static_cast<std::int32_t>(u), static_cast<std::int32_t>(i));
  }
  return InteractionMatrix::from_pairs(users, items, std::move(v));
}

Eigen::Matrix<std::int64_t, Eigen::Dynamic, 2, Eigen::RowMajor> interactions_to_array(const InteractionMatrix& r) {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 2, Eigen::RowMajor> out(r.nnz(), 2);
  Index k = 0;
  for (std::int32_t u = 0; u < r.num_users(); ++u) {
    for (auto i : r.user_items(u)) {
      out(k, 0) = u;
      out(k, 1) = i;
      ++k;
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_lighterx, m) {
  m.doc() = "Decoupled low-rank graph recommenders (C++ core)";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());

  py::class_<InteractionMatrix>(m, "Interactions")
      .def(py::init(&interactions_from_array), py::arg("num_users"), py::arg("num_items"), py::arg("pairs"))
      .def_property_readonly("num_users", &InteractionMatrix::num_users)
      .def_property_readonly("num_items", &InteractionMatrix::num_items)
      .def_property_readonly("num_nodes", &InteractionMatrix::num_nodes)
      .def_property_readonly("nnz", &InteractionMatrix::nnz)
      .def_property_readonly("sparsity", &InteractionMatrix::sparsity)
      .def("contains", &InteractionMatrix::contains)
      .def("pairs", &interactions_to_array)
      .def("content_hash", &InteractionMatrix::content_hash);

  m.def("load_interactions",
        [](const std::filesystem::path& path, std::int64_t min_degree, bool skip_header) {
          LoadOptions o;
          o.min_degree = min_degree;
          o.skip_header = skip_header;
          return load_interactions(path, o);
        },
        py::arg("path"), py::arg("min_degree") = 1, py::arg("skip_header") = false);

  m.def("split_per_user",
        [](const InteractionMatrix& r, double train, double valid, double test, std::uint64_t seed) {
          SplitSpec s{train, valid, test, seed};
          auto d = split_per_user(r, s);
          return py::make_tuple(std::move(d.train), std::move(d.valid), std::move(d.test));
        },
        py::arg("interactions"), py::arg("train") = 0.8, py::arg("valid") = 0.1, py::arg("test") = 0.1,
        py::arg("seed") = 2020);

  m.def("synthetic",
        [](std::int32_t users, std::int32_t items, double avg_degree, bool power_law, std::int32_t clusters,
           std::uint64_t seed) {
          SyntheticSpec s;
          s.users = users;
          s.items = items;
          s.avg_degree = avg_degree;
          s.power_law = power_law;
          s.clusters = clusters;
          s.seed = seed;
          return generate_synthetic(s);
        },
        py::arg("users"), py::arg("items"), py::arg("avg_degree") = 10.0, py::arg("power_law") = false,
        py::arg("clusters") = 1, py::arg("seed") = 7);

  py::class_<SparseMatrix>(m, "SparseMatrix")
      .def_readonly("rows", &SparseMatrix::rows)
      .def_readonly("cols", &SparseMatrix::cols)
      .def_property_readonly("nnz", &SparseMatrix::nnz)
      .def("to_dense", &SparseMatrix::to_dense)
      .def("__matmul__", [](const SparseMatrix& s, const DenseMatrix& x) { return spmm(s, x); });

  m.def("normalized_adjacency", [](const InteractionMatrix& r) { return normalize_adjacency(build_adjacency(r)); },
        "P = D^-1/2 A D^-1/2 of the bipartite graph (users first)");

  m.def("compute_h", &compute_h, py::arg("n"), py::arg("f"), py::arg("nnz"), py::arg("c") = 1.0);

  m.def("gen_feat",
        [](const InteractionMatrix& r, double c, const std::string& dist, std::uint64_t seed) {
          RandomMatrixSpec s;
          s.c = c;
          s.distribution = parse_distribution(dist);
          s.seed = seed;
          return gen_feat(r, s).data;
        },
        py::arg("interactions"), py::arg("c") = 1.0, py::arg("dist") = "bernoulli", py::arg("seed") = 0);

  m.def("propagate",
        [](const SparseMatrix& p, const DenseMatrix& x, int layers) { return propagate(p, x, layers).z; },
        py::arg("p"), py::arg("x"), py::arg("layers") = 3);
  m.def("jacobi_propagate",
        [](const SparseMatrix& p, const DenseMatrix& x, int layers, double a, double b) {
          return jacobi_propagate(p, x, layers, a, b).z;
        },
        py::arg("p"), py::arg("x"), py::arg("layers") = 3, py::arg("a") = 1.0, py::arg("b") = 1.0);
  m.def("truncated_svd",
        [](const InteractionMatrix& r, int q, std::uint64_t seed) {
          SvdOptions o;
          o.seed = seed;
          auto f = truncated_svd(interaction_csr(r), q, o);
          return py::make_tuple(f.u, f.singular, f.v);
        },
        py::arg("interactions"), py::arg("q") = 5, py::arg("seed") = 0);
  m.def("coupled_lightgcn_forward",
        [](const SparseMatrix& p, const DenseMatrix& e0, int layers) { return coupled_lightgcn_forward(p, e0, layers); },
        py::arg("p"), py::arg("e0"), py::arg("layers") = 3);

  m.def("bpr_loss",
        [](const Vector& u, const Vector& i, const Vector& j) {
          auto r = bpr_loss(u, i, j);
          return py::make_tuple(r.loss, r.grad_user, r.grad_pos, r.grad_neg);
        });
  m.def("infonce_loss",
        [](const DenseMatrix& a, const DenseMatrix& b, double temp) {
          auto r = infonce_loss(a, b, temp);
          return py::make_tuple(r.loss, r.grad_view, r.grad_other);
        },
        py::arg("view"), py::arg("other"), py::arg("temp") = 0.8);

  m.def("train",
        [](const std::string& variant, const InteractionMatrix& train, const InteractionMatrix* valid, Index d,
           double lr, Index batch_size, int epochs, double c, int layers, double lambda1, double temp, double beta,
           double jacobi_a, double jacobi_b, std::uint64_t seed, const std::function<void(py::dict)>& on_epoch) {
          const Variant v = parse_variant(variant);
          PrecomputeConfig pc;
          pc.variant = v;
          pc.features.c = c;
          pc.features.seed = derive_seed(seed, "features");
          pc.svd.seed = derive_seed(seed, "svd");
          pc.layers = layers;
          pc.jacobi_a = jacobi_a;
          pc.jacobi_b = jacobi_b;
          TrainConfig cfg;
          cfg.d = d;
          cfg.lr = lr;
          cfg.batch_size = batch_size;
          cfg.epochs = epochs;
          cfg.lambda1 = lambda1;
          cfg.temp = temp;
          cfg.beta = beta;
          cfg.seed = seed;
          EpochCallback cb;
          if (on_epoch) {
            cb = [&on_epoch](const EpochLog& log) {
              py::dict e;
              e["epoch"] = log.epoch;
              e["loss"] = log.loss;
              e["seconds"] = log.seconds;
              if (log.valid_recall) e["valid_recall"] = *log.valid_recall;
              on_epoch(e);
            };
          }
          const auto pre = precompute(train, pc);
          const auto inputs = to_train_inputs(pre, v);
          auto res = lighterx::train(v, train, valid, inputs, cfg, cb);
          py::dict out;
          out["embeddings"] = DenseMatrixF(res.embeddings.e);
          out["num_users"] = res.embeddings.num_users;
          out["params"] = res.params.parameter_count();
          out["h"] = pre.features.h();
          out["best_epoch"] = res.fit.best_epoch;
          out["epochs_run"] = res.fit.epochs_run;
          py::list losses;
          for (const auto& e : res.fit.history) losses.append(e.loss);
          out["losses"] = losses;
          return out;
        },
        py::arg("variant"), py::arg("train"), py::arg("valid") = nullptr, py::arg("d") = 64, py::arg("lr") = 1e-3,
        py::arg("batch_size") = 2048, py::arg("epochs") = 100, py::arg("c") = 1.0, py::arg("layers") = 3,
        py::arg("lambda1") = 0.01, py::arg("temp") = 0.8, py::arg("beta") = 0.1, py::arg("jacobi_a") = 1.0,
        py::arg("jacobi_b") = 1.0, py::arg("seed") = 2020, py::arg("on_epoch") = nullptr);

  m.def("evaluate",
        [](const DenseMatrixF& embeddings, Index num_users, const InteractionMatrix& ground_truth,
           const std::vector<const InteractionMatrix*>& masks, const std::vector<Index>& ks) {
          EmbeddingTable t;
          t.e = embeddings;
          t.num_users = num_users;
          t.num_items = embeddings.rows() - num_users;
          py::list out;
          for (const auto& s : evaluate(t, ground_truth, masks, ks)) {
            py::dict d;
            d["k"] = s.k;
            d["recall"] = s.recall;
            d["ndcg"] = s.ndcg;
            d["hit"] = s.hit;
            d["mrr"] = s.mrr;
            d["users"] = s.users;
            out.append(d);
          }
          return out;
        },
        py::arg("embeddings"), py::arg("num_users"), py::arg("ground_truth"), py::arg("masks"),
        py::arg("ks") = std::vector<Index>{10, 20});

  m.def("bench_epoch",
        [](const std::string& model, const InteractionMatrix& train, int repetitions, Index d, Index batch_size) {
          BenchConfig cfg;
          cfg.repetitions = repetitions;
          cfg.train.d = d;
          cfg.train.batch_size = batch_size;
          const auto r = bench_epoch(parse_bench_model(model), train, cfg);
          py::dict out;
          out["model"] = r.model;
          out["params"] = r.params;
          out["h"] = r.h;
          out["precompute_s"] = r.precompute_s;
          out["epoch_s_mean"] = r.epoch_s_mean;
          out["epoch_s_std"] = r.epoch_s_std;
          return out;
        },
        py::arg("model"), py::arg("train"), py::arg("repetitions") = 1, py::arg("d") = 64,
        py::arg("batch_size") = 2048);
}
