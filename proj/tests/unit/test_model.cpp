#include "lighterx/coupled.hpp"
#include "lighterx/errors.hpp"
#include "lighterx/losses.hpp"
#include "lighterx/model.hpp"
#include "lighterx/optim.hpp"
#include "lighterx/precompute.hpp"
#include "lighterx/sampler.hpp"
#include "lighterx/synthetic.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <map>

using namespace lighterx;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)}); }

Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index k = 0; k < n; ++k) v(k) = normal(rng);
  return v;
}

// Central differences of f over every entry of v.
template <typename F>
Vector numeric_grad(Vector v, F f, double step = 1e-5) {
  Vector g(v.size());
  for (Index k = 0; k < v.size(); ++k) {
    const double keep = v(k);
    v(k) = keep + step;
    const double up = f(v);
    v(k) = keep - step;
    const double down = f(v);
    v(k) = keep;
    g(k) = (up - down) / (2.0 * step);
  }
  return g;
}

double vec_rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1e-10, std::max(a.norm(), b.norm()));
}

}  // namespace

TEST(Mlp, IdentityWeightPassesInputThrough) {
  BasicModelParams<double> p;
  p.layers.push_back({DenseMatrix::Identity(4, 4), {}});
  const DenseMatrix z = lxtest::random_dense(3, 4, 1);
  EXPECT_EQ(mlp_forward(z, p), z);
}

TEST(Mlp, DotProductExample) {
  BasicModelParams<double> p;
  DenseMatrix w(2, 1);
  w << 1, 3;
  p.layers.push_back({w, {}});
  DenseMatrix z(1, 2);
  z << 1, 2;
  EXPECT_EQ(mlp_forward(z, p)(0, 0), 7.0);
  EXPECT_THROW(mlp_forward(DenseMatrix(1, 3), p), ShapeError);
}

TEST(Mlp, XavierVariance) {
  const Index h = 400, d = 250;  // 10^5 entries
  const auto p = xavier_init<double>(h, d, {}, 42);
  ASSERT_EQ(p.layers.size(), 1u);
  EXPECT_FALSE(p.layers[0].has_bias());
  const auto& w = p.layers[0].weight;
  const double var = w.array().square().mean() - std::pow(w.mean(), 2);
  const double want = 2.0 / (h + d);
  EXPECT_NEAR(var, want, 0.2 * want);
  EXPECT_EQ(p.parameter_count(), h * d);
}

TEST(Mlp, ParameterCountForReportedWidth) {
  EXPECT_EQ(xavier_init<float>(1348, 128, {}, 1).parameter_count(), 172544);
}

TEST(Mlp, DeepBackwardMatchesFiniteDifferences) {
  for (auto act : {Activation::Tanh, Activation::Relu, Activation::None}) {
    MlpConfig cfg;
    cfg.hidden = {5, 4};
    cfg.bias = true;
    cfg.activation = act;
    auto params = xavier_init<double>(6, 3, cfg, 7);
    const DenseMatrix z = lxtest::random_dense(8, 6, 3);
    const DenseMatrix upstream = lxtest::random_dense(8, 3, 4);
    auto loss = [&](const BasicModelParams<double>& p) { return (mlp_forward(z, p).array() * upstream.array()).sum(); };
    MlpTape<double> tape;
    mlp_forward(z, params, tape);
    auto grads = params.zeros_like();
    mlp_backward(tape, params, upstream, grads);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      for (Index k = 0; k < params.layers[l].weight.size(); ++k) {
        auto& wk = params.layers[l].weight.data()[k];
        const double keep = wk;
        wk = keep + 1e-6;
        const double up = loss(params);
        wk = keep - 1e-6;
        const double down = loss(params);
        wk = keep;
        EXPECT_NEAR(grads.layers[l].weight.data()[k], (up - down) / 2e-6, 1e-6) << to_string(act);
      }
      for (Index k = 0; k < params.layers[l].bias.size(); ++k) {
        auto& bk = params.layers[l].bias(k);
        const double keep = bk;
        bk = keep + 1e-6;
        const double up = loss(params);
        bk = keep - 1e-6;
        const double down = loss(params);
        bk = keep;
        EXPECT_NEAR(grads.layers[l].bias(k), (up - down) / 2e-6, 1e-6);
      }
    }
  }
  EXPECT_EQ(parse_activation("relu"), Activation::Relu);
}

TEST(Bpr, EqualScoresGiveLog2) {
  Vector u(2), i(2), j(2);
  u << 1, 2;
  i << 3, 1;
  j << 1, 2;  // u.i = u.j = 5
  EXPECT_NEAR(bpr_loss(u, i, j).loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(bpr_loss(u, i, j).loss, 0.693147, 1e-6);
}

TEST(Bpr, UnitGap) {
  Vector u(1), i(1), j(1);
  u << 1;
  i << 1.5;
  j << 0.5;
  EXPECT_NEAR(bpr_loss(u, i, j).loss, std::log1p(std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(bpr_loss(u, i, j).loss, 0.313262, 1e-6);
  // Stable far into both tails.
  EXPECT_NEAR(softplus(-800.0), 0.0, 1e-300);
  EXPECT_DOUBLE_EQ(softplus(800.0), 800.0);
}

TEST(Bpr, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector u = random_vector(6, rng), i = random_vector(6, rng), j = random_vector(6, rng);
    const auto res = bpr_loss(u, i, j);
    EXPECT_LT(vec_rel_err(res.grad_user, numeric_grad(u, [&](const Vector& x) { return bpr_loss(x, i, j).loss; })),
              1e-6);
    EXPECT_LT(vec_rel_err(res.grad_pos, numeric_grad(i, [&](const Vector& x) { return bpr_loss(u, x, j).loss; })),
              1e-6);
    EXPECT_LT(vec_rel_err(res.grad_neg, numeric_grad(j, [&](const Vector& x) { return bpr_loss(u, i, x).loss; })),
              1e-6);
  }
}

TEST(Bpr, DependsOnlyOnScoreGap) {
  std::mt19937_64 rng(9);
  const Vector u = random_vector(5, rng), i = random_vector(5, rng), j = random_vector(5, rng);
  Vector shift = random_vector(5, rng);
  shift -= shift.dot(u) / u.squaredNorm() * u;  // orthogonal to u
  EXPECT_NEAR(bpr_loss(u, i + shift, j + shift).loss, bpr_loss(u, i, j).loss, 1e-13);
}

TEST(Bpr, BatchMatchesPerRow) {
  const DenseMatrix u = lxtest::random_dense(7, 4, 1), p = lxtest::random_dense(7, 4, 2), n = lxtest::random_dense(7, 4, 3);
  DenseMatrix gu, gp, gn;
  const double loss = bpr_batch(u, p, n, gu, gp, gn);
  double want = 0.0;
  for (Index r = 0; r < 7; ++r) {
    const auto one = bpr_loss(u.row(r).transpose(), p.row(r).transpose(), n.row(r).transpose());
    want += one.loss / 7.0;
    EXPECT_LT((gu.row(r).transpose() - one.grad_user / 7.0).norm(), 1e-15);
    EXPECT_LT((gn.row(r).transpose() - one.grad_neg / 7.0).norm(), 1e-15);
  }
  EXPECT_NEAR(loss, want, 1e-14);
}

TEST(InfoNce, SingleRowIsZero) {
  const DenseMatrix a = lxtest::random_dense(1, 4, 1);
  EXPECT_NEAR(infonce_loss(a, lxtest::random_dense(1, 4, 2), 0.5).loss, 0.0, 1e-15);
}

TEST(InfoNce, OrthonormalIdenticalViews) {
  const DenseMatrix e = DenseMatrix::Identity(2, 2);
  EXPECT_NEAR(infonce_loss(e, e, 1.0).loss, std::log1p(std::exp(-1.0)), 1e-15);
  EXPECT_THROW(infonce_loss(e, e, 0.0), NumericError);
}

TEST(InfoNce, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Index b = 2 + static_cast<Index>(seed % 5), d = 3;
    const DenseMatrix a = lxtest::random_dense(b, d, seed);
    const DenseMatrix o = lxtest::random_dense(b, d, seed + 1000);
    const double temp = 0.3 + 0.1 * static_cast<double>(seed % 6);
    const auto res = infonce_loss(a, o, temp);
    auto flat = [](const DenseMatrix& m) { return Vector(Eigen::Map<const Vector>(m.data(), m.size())); };
    auto unflat = [b, d](const Vector& v) { return DenseMatrix(Eigen::Map<const DenseMatrix>(v.data(), b, d)); };
    const Vector ga = numeric_grad(flat(a), [&](const Vector& v) { return infonce_loss(unflat(v), o, temp).loss; });
    const Vector go = numeric_grad(flat(o), [&](const Vector& v) { return infonce_loss(a, unflat(v), temp).loss; });
    EXPECT_LT(vec_rel_err(flat(res.grad_view), ga), 1e-5);
    EXPECT_LT(vec_rel_err(flat(res.grad_other), go), 1e-5);
  }
}

TEST(Sampler, OnlyOneFreeItem) {
  const auto r = InteractionMatrix::from_pairs(1, 2, {{0, 0}});
  Rng rng(1);
  for (auto item : sample_negatives(r, 0, 100, rng)) EXPECT_EQ(item, 1);
}

TEST(Sampler, AllItemsTakenIsAnError) {
  const auto r = InteractionMatrix::from_pairs(1, 2, {{0, 0}, {0, 1}});
  Rng rng(1);
  EXPECT_THROW(sample_negatives(r, 0, 1, rng), DataError);
}

namespace {

// Chi-square goodness of fit against the uniform law over free items.
double uniformity_p_value(const InteractionMatrix& r, std::int32_t user, int draws, std::uint64_t seed) {
  Rng rng(seed);
  std::map<std::int32_t, int> freq;
  for (auto item : sample_negatives(r, user, draws, rng)) {
    EXPECT_FALSE(r.contains(user, item));
    ++freq[item];
  }
  const int free = r.num_items() - static_cast<int>(r.user_degree(user));
  EXPECT_EQ(static_cast<int>(freq.size()), free);
  const double expected = static_cast<double>(draws) / free;
  double chi2 = 0.0;
  for (const auto& [item, count] : freq) chi2 += (count - expected) * (count - expected) / expected;
  boost::math::chi_squared dist(free - 1);
  return boost::math::cdf(boost::math::complement(dist, chi2));
}

}  // namespace

TEST(Sampler, UniformOverFreeItemsSparseUser) {
  const auto r = InteractionMatrix::from_pairs(1, 20, {{0, 2}, {0, 5}, {0, 11}});
  EXPECT_GT(uniformity_p_value(r, 0, 10000, 3), 0.01);
}

TEST(Sampler, UniformOverFreeItemsDenseUser) {
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  for (int i = 0; i < 30; ++i) {
    if (i % 5 != 0) pairs.emplace_back(0, i);
  }
  const auto r = InteractionMatrix::from_pairs(1, 30, pairs);
  EXPECT_GT(uniformity_p_value(r, 0, 10000, 4), 0.01);
}

TEST(Sampler, EpochTriplesAreDeterministicAndValid) {
  const auto r = lxtest::random_interactions(20, 30, 0.2, 1);
  const auto a = epoch_triples(r, 2, 9, 3);
  const auto b = epoch_triples(r, 2, 9, 3);
  ASSERT_EQ(a.size(), static_cast<std::size_t>(2 * r.nnz()));
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].user, b[k].user);
    EXPECT_EQ(a[k].neg, b[k].neg);
    EXPECT_TRUE(r.contains(a[k].user, a[k].pos));
    EXPECT_FALSE(r.contains(a[k].user, a[k].neg));
  }
  const auto c = epoch_triples(r, 2, 9, 4);
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) differs |= a[k].pos != c[k].pos || a[k].neg != c[k].neg;
  EXPECT_TRUE(differs);
}

TEST(Adam, ZeroGradientKeepsParameters) {
  DenseMatrix w = lxtest::random_dense(3, 4, 1);
  const DenseMatrix before = w;
  AdamState<double> st;
  adam_step(w, DenseMatrix(DenseMatrix::Zero(3, 4)), st, {});
  EXPECT_EQ(w, before);
}

TEST(Adam, FirstStepMovesBySignTimesLr) {
  DenseMatrix w = DenseMatrix::Zero(2, 3);
  DenseMatrix g(2, 3);
  g << 0.5, -2.0, 1e-3, -1e-2, 7.0, -0.1;
  AdamState<double> st;
  AdamConfig cfg;
  cfg.lr = 0.01;
  adam_step(w, g, st, cfg);
  for (Index k = 0; k < g.size(); ++k) {
    const double sign = g.data()[k] > 0 ? 1.0 : -1.0;
    // Bias-corrected: m_hat = g, v_hat = g^2, so delta = -lr g / (|g| + eps).
    EXPECT_NEAR(w.data()[k], -cfg.lr * sign, cfg.lr * 1e-5);
  }
}

TEST(Adam, DeterministicAcrossRuns) {
  auto run = [] {
    auto p = xavier_init<float>(6, 4, {}, 3);
    AdamState<float> st;
    for (int s = 0; s < 20; ++s) {
      auto g = p.zeros_like();
      g.layers[0].weight = lxtest::random_dense(6, 4, static_cast<std::uint64_t>(s)).cast<float>();
      adam_step(p, g, st, {});
    }
    return p.layers[0].weight;
  };
  const DenseMatrixF a = run();
  const DenseMatrixF b = run();
  EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(float) * a.size()), 0);
}

TEST(Adam, WeightDecayModes) {
  DenseMatrix w = DenseMatrix::Constant(1, 1, 2.0);
  AdamState<double> st;
  AdamConfig cfg;
  cfg.weight_decay = 0.5;
  adam_step(w, DenseMatrix(DenseMatrix::Zero(1, 1)), st, cfg);
  EXPECT_NEAR(w(0, 0), 2.0 - cfg.lr, 1e-9);  // L2 term acts as gradient 1.0
  DenseMatrix v = DenseMatrix::Constant(1, 1, 2.0);
  AdamState<double> st2;
  cfg.decoupled = true;
  adam_step(v, DenseMatrix(DenseMatrix::Zero(1, 1)), st2, cfg);
  EXPECT_NEAR(v(0, 0), 2.0 - cfg.lr * 0.5 * 2.0, 1e-12);
}

TEST(Coupled, ZeroLayersIsIdentity) {
  const auto p = normalize_adjacency(build_adjacency(lxtest::random_interactions(5, 5, 0.4, 1)));
  const DenseMatrix e0 = lxtest::random_dense(10, 3, 2);
  EXPECT_EQ(coupled_lightgcn_forward(p, e0, 0), e0);
}

TEST(Coupled, EqualsDecoupledWithIdentityFeatures) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = normalize_adjacency(build_adjacency(lxtest::random_interactions(12, 18, 0.15, seed)));
    const DenseMatrix e0 = lxtest::random_dense(30, 4, seed + 1);
    for (int layers = 0; layers <= 3; ++layers) {
      const DenseMatrix z = propagate(p, DenseMatrix::Identity(30, 30), layers).z;
      BasicModelParams<double> w;
      w.layers.push_back({e0, {}});
      EXPECT_LT(lxtest::max_rel_err(coupled_lightgcn_forward(p, e0, layers), mlp_forward(z, w)), 1e-10);
    }
  }
}

TEST(Coupled, JgcfLowBandAndShapes) {
  const auto p = normalize_adjacency(build_adjacency(lxtest::random_interactions(6, 9, 0.3, 2)));
  const DenseMatrix e0 = lxtest::random_dense(15, 4, 3);
  const DenseMatrix out = coupled_jgcf_forward(p, e0, 1, 0.0, 0.0, 0.1);
  ASSERT_EQ(out.rows(), 15);
  ASSERT_EQ(out.cols(), 8);
  const DenseMatrix low = 0.5 * (e0 + spmm(p, e0));
  EXPECT_LT(lxtest::max_rel_err(out.leftCols(4), low), 1e-15);
  const DenseMatrix mid = (0.1 * e0 - low).array().tanh().matrix();
  EXPECT_LT(lxtest::max_rel_err(out.rightCols(4), mid), 1e-15);
}

TEST(Updates, ZeroEpsCountsEveryStep) {
  UpdateTracker t(4, 0.0);
  for (int s = 0; s < 5; ++s) {
    t.begin_step();
    for (Index k = 0; k < 4; ++k) t.observe(k, 1e-9);
  }
  for (int k = 0; k < 5; ++k) EXPECT_EQ(t.fraction_exceeding(k), 1.0);
  EXPECT_EQ(t.fraction_exceeding(5), 0.0);
  EXPECT_THROW(UpdateTracker(3, -1.0), NumericError);
}

TEST(Updates, CurveIsMonotoneAndMatchesPointQueries) {
  UpdateTracker t(50, 0.1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uni(-0.3, 0.3);
  for (int s = 0; s < 30; ++s) {
    t.begin_step();
    for (Index k = 0; k < 50; ++k) t.observe(k, uni(rng) * (k % 3 == 0 ? 0.1 : 1.0));
    if (s % 10 == 9) t.end_epoch(s / 10);
  }
  const auto curve = t.curve(30);
  for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_LE(curve[k], curve[k - 1]);
  for (int k = 0; k <= 30; ++k) EXPECT_DOUBLE_EQ(curve[static_cast<std::size_t>(k)], t.fraction_exceeding(k));
  ASSERT_EQ(t.heat().size(), 3u);
  EXPECT_EQ(t.heat()[0].steps, 10);
  EXPECT_NEAR(t.heat()[0].untouched_fraction, 17.0 / 50.0, 1e-12);  // the damped third never clears eps
}

TEST(Updates, AdamReportsThroughTracker) {
  DenseMatrix w = DenseMatrix::Zero(1, 3);
  DenseMatrix g(1, 3);
  g << 1.0, 0.0, -1.0;
  AdamState<double> st;
  UpdateTracker t(3, 1e-6);
  adam_step(w, g, st, {}, &t);
  EXPECT_EQ(t.counts(), (std::vector<std::uint32_t>{1, 0, 1}));
}

namespace {

struct VariantFixture {
  InteractionMatrix train;
  DenseMatrix z, x, z_hat;
  std::vector<TrainingTriple> batch;
};

VariantFixture make_fixture(std::uint64_t seed) {
  VariantFixture f;
  f.train = lxtest::random_interactions(9, 12, 0.3, seed);
  const Index n = f.train.num_nodes();
  f.z = lxtest::random_dense(n, 5, seed + 1);
  f.x = lxtest::random_dense(n, 5, seed + 2);
  f.z_hat = lxtest::random_dense(n, 5, seed + 3);
  auto all = epoch_triples(f.train, 1, seed, 0);
  f.batch.assign(all.begin(), all.begin() + std::min<std::size_t>(all.size(), 12));
  return f;
}

}  // namespace

TEST(Trainer, VariantLossGradientsMatchFiniteDifferences) {
  for (auto variant : {Variant::LighterGcn, Variant::LighterJgcf, Variant::LighterGcl}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      auto f = make_fixture(seed);
      TrainConfig cfg;
      cfg.beta = 0.7;
      cfg.lambda1 = 0.5;
      cfg.temp = 0.6;
      MlpConfig mlp;
      if (seed % 2 == 1) {
        mlp.hidden = {4};
        mlp.bias = true;
        mlp.activation = Activation::Tanh;
      }
      auto params = xavier_init<double>(5, 3, mlp, seed);
      BatchInputs<double> in{&f.z, &f.x, &f.z_hat};
      BasicModelParams<double> grads;
      variant_batch_loss(variant, in, f.train.num_users(), params, f.batch, cfg, grads);
      BasicModelParams<double> scratch;
      for (std::size_t l = 0; l < params.layers.size(); ++l) {
        for (Index k = 0; k < params.layers[l].weight.size(); ++k) {
          auto& wk = params.layers[l].weight.data()[k];
          const double keep = wk;
          wk = keep + 1e-5;
          const double up = variant_batch_loss(variant, in, f.train.num_users(), params, f.batch, cfg, scratch);
          wk = keep - 1e-5;
          const double down = variant_batch_loss(variant, in, f.train.num_users(), params, f.batch, cfg, scratch);
          wk = keep;
          const double num = (up - down) / 2e-5;
          EXPECT_LT(std::abs(grads.layers[l].weight.data()[k] - num), 1e-4 * std::max(1.0, std::abs(num)))
              << to_string(variant) << " seed " << seed;
        }
      }
    }
  }
}

TEST(Trainer, MissingPrecomputeIsRejected) {
  const auto r = lxtest::random_interactions(5, 6, 0.4, 1);
  TrainInputs in;
  in.z = DenseMatrixF::Ones(r.num_nodes(), 4);
  EXPECT_THROW(DecoupledTrainer(Variant::LighterJgcf, r, in, {}), DataError);
  EXPECT_THROW(DecoupledTrainer(Variant::LighterGcl, r, in, {}), DataError);
  in.z = DenseMatrixF::Ones(r.num_nodes() + 1, 4);
  EXPECT_THROW(DecoupledTrainer(Variant::LighterGcn, r, in, {}), DataError);
  EXPECT_EQ(parse_variant("lighter_gcl"), Variant::LighterGcl);
}

namespace {

struct SmokeData {
  DatasetSplit split;
  Precomputed pre;
};

SmokeData smoke_data(Variant v) {
  SyntheticSpec s;
  s.users = 50;
  s.items = 80;
  s.avg_degree = 12;
  s.clusters = 4;
  s.seed = 3;
  SmokeData d;
  d.split = split_per_user(generate_synthetic(s), {});
  PrecomputeConfig pc;
  pc.variant = v;
  pc.features.seed = 5;
  pc.svd_q = 4;
  d.pre = precompute(d.split.train, pc);
  return d;
}

}  // namespace

TEST(Trainer, LossDecreasesOnSmallSynthetic) {
  for (auto v : {Variant::LighterGcn, Variant::LighterJgcf, Variant::LighterGcl}) {
    const auto d = smoke_data(v);
    const auto inputs = to_train_inputs(d.pre, v);
    TrainConfig cfg;
    cfg.batch_size = 64;
    cfg.lr = 0.01;
    cfg.epochs = 5;
    cfg.d = 16;
    const auto res = train(v, d.split.train, nullptr, inputs, cfg);
    ASSERT_EQ(res.fit.history.size(), 5u);
    int violations = 0;
    for (std::size_t e = 1; e < 5; ++e) violations += res.fit.history[e].loss > res.fit.history[e - 1].loss;
    EXPECT_LE(violations, 1) << to_string(v);
    EXPECT_LT(res.fit.history.back().loss, res.fit.history.front().loss);
    EXPECT_EQ(res.embeddings.e.rows(), d.split.train.num_nodes());
    EXPECT_EQ(res.embeddings.dim(), v == Variant::LighterJgcf ? 32 : 16);
    EXPECT_EQ(res.params.parameter_count(), d.pre.features.h() * 16);
  }
}

TEST(Trainer, DeterministicLossCurves) {
  const auto d = smoke_data(Variant::LighterGcl);
  const auto inputs = to_train_inputs(d.pre, Variant::LighterGcl);
  TrainConfig cfg;
  cfg.batch_size = 100;
  cfg.epochs = 3;
  cfg.d = 8;
  const auto a = train(Variant::LighterGcl, d.split.train, &d.split.valid, inputs, cfg);
  const auto b = train(Variant::LighterGcl, d.split.train, &d.split.valid, inputs, cfg);
  for (std::size_t e = 0; e < a.fit.history.size(); ++e) {
    EXPECT_EQ(a.fit.history[e].loss, b.fit.history[e].loss);
    EXPECT_EQ(a.fit.history[e].valid_recall, b.fit.history[e].valid_recall);
  }
  EXPECT_EQ(a.params.layers[0].weight, b.params.layers[0].weight);
}

TEST(Trainer, EarlyStoppingRestoresBestEpoch) {
  const auto d = smoke_data(Variant::LighterGcn);
  const auto inputs = to_train_inputs(d.pre, Variant::LighterGcn);
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.lr = 0.05;
  cfg.epochs = 40;
  cfg.patience = 2;
  cfg.d = 8;
  DecoupledTrainer trainer(Variant::LighterGcn, d.split.train, inputs, cfg);
  const auto res = fit(trainer, &d.split.valid, cfg);
  ASSERT_GE(res.best_epoch, 0);
  EXPECT_LE(res.epochs_run, cfg.epochs);
  if (res.epochs_run < cfg.epochs) {
    EXPECT_EQ(res.epochs_run, res.best_epoch + 1 + cfg.patience);
  }
  const InteractionMatrix* masks[] = {&d.split.train};
  const Index ks[] = {10};
  EXPECT_DOUBLE_EQ(evaluate(trainer.embeddings(), d.split.valid, masks, ks)[0].recall, res.best_valid);
}

TEST(CoupledTrainer, LearnsAndReportsFullTable) {
  const auto d = smoke_data(Variant::LighterGcn);
  const auto p = normalize_adjacency(build_adjacency(d.split.train));
  TrainConfig cfg;
  cfg.batch_size = 64;
  cfg.lr = 0.01;
  cfg.d = 16;
  CoupledLightGcnTrainer t(d.split.train, p, 2, cfg);
  EXPECT_EQ(t.parameter_count(), d.split.train.num_nodes() * 16);
  const double first = t.run_epoch(0).loss;
  double last = first;
  for (int e = 1; e < 5; ++e) last = t.run_epoch(e).loss;
  EXPECT_LT(last, first);
}

TEST(CoupledTrainer, GradientMatchesFiniteDifferencesThroughPropagation) {
  // The coupled backward pass is P-symmetric propagation of the batch
  // gradient; check it against a direct double-precision objective.
  const auto r = lxtest::random_interactions(6, 8, 0.3, 4);
  const auto p = normalize_adjacency(build_adjacency(r));
  const DenseMatrix e0 = lxtest::random_dense(14, 3, 1);
  const auto triples = epoch_triples(r, 1, 1, 0);
  auto loss = [&](const DenseMatrix& table) {
    const DenseMatrix e = coupled_lightgcn_forward(p, table, 2);
    double total = 0.0;
    for (const auto& t : triples) {
      const double gap = e.row(t.user).dot(e.row(6 + t.pos)) - e.row(t.user).dot(e.row(6 + t.neg));
      total += softplus(-gap);
    }
    return total / static_cast<double>(triples.size());
  };
  const DenseMatrix e = coupled_lightgcn_forward(p, e0, 2);
  DenseMatrix grad_e = DenseMatrix::Zero(14, 3);
  for (const auto& t : triples) {
    const auto one = bpr_loss(e.row(t.user).transpose(), e.row(6 + t.pos).transpose(), e.row(6 + t.neg).transpose());
    const double s = 1.0 / static_cast<double>(triples.size());
    grad_e.row(t.user) += s * one.grad_user.transpose();
    grad_e.row(6 + t.pos) += s * one.grad_pos.transpose();
    grad_e.row(6 + t.neg) += s * one.grad_neg.transpose();
  }
  const DenseMatrix grad = coupled_lightgcn_forward(p, grad_e, 2);
  DenseMatrix probe = e0;
  for (Index k = 0; k < probe.size(); ++k) {
    const double keep = probe.data()[k];
    probe.data()[k] = keep + 1e-5;
    const double up = loss(probe);
    probe.data()[k] = keep - 1e-5;
    const double down = loss(probe);
    probe.data()[k] = keep;
    EXPECT_LT(rel_err(grad.data()[k], (up - down) / 2e-5), 1e-4);
  }
}
