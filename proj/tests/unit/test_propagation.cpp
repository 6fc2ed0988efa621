#include "lighterx/errors.hpp"
#include "lighterx/propagation.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <boost/math/special_functions/jacobi.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

using namespace lighterx;

namespace {

SparseMatrix graph_p(std::int32_t users, std::int32_t items, double density, std::uint64_t seed) {
  return normalize_adjacency(build_adjacency(lxtest::random_interactions(users, items, density, seed)));
}

// sum_l w_l f_l(P) X through the eigendecomposition of the dense P.
template <typename F>
DenseMatrix spectral_oracle(const SparseMatrix& p, const DenseMatrix& x, int layers, F poly) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.to_dense());
  const auto& lam = eig.eigenvalues();
  Eigen::VectorXd filt = Eigen::VectorXd::Zero(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    for (int l = 0; l <= layers; ++l) {
      filt(k) += poly(l, lam(k)) / (layers + 1);
    }
  }
  const Eigen::MatrixXd& q = eig.eigenvectors();
  return q * filt.asDiagonal() * q.transpose() * x;
}

}  // namespace

TEST(Propagate, ZeroLayersScalesInput) {
  const auto p = graph_p(5, 6, 0.4, 1);
  const DenseMatrix x = lxtest::random_dense(11, 3, 2);
  const auto res = propagate(p, x, 0);
  EXPECT_EQ(res.z, x);  // w_0 = 1
  const double w[] = {0.25};
  EXPECT_EQ(propagate(p, x, 0, w).z, 0.25 * x);
}

TEST(Propagate, IdentityFeaturesOneLayer) {
  const auto p = graph_p(6, 4, 0.5, 3);
  const DenseMatrix i = DenseMatrix::Identity(10, 10);
  const double w[] = {0.5, 0.5};
  const DenseMatrix want = 0.5 * (i + p.to_dense());
  EXPECT_LT(lxtest::max_rel_err(propagate(p, i, 1, w).z, want), 1e-15);
}

TEST(Propagate, MatchesDenseMatrixPowers) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = graph_p(12, 18, 0.15, seed);
    const DenseMatrix x = lxtest::random_dense(30, 4, seed + 10);
    const DenseMatrix pd = p.to_dense();
    DenseMatrix want = x;
    DenseMatrix power = DenseMatrix::Identity(30, 30);
    for (int l = 1; l <= 3; ++l) {
      power = power * pd;
      want += power * x;
    }
    want /= 4.0;
    const auto res = propagate(p, x, 3);
    EXPECT_LT(lxtest::max_rel_err(res.z, want), 1e-10);
    EXPECT_EQ(res.layer_weights, uniform_weights(3));
    // No randomness: bit-identical reruns.
    EXPECT_EQ(propagate(p, x, 3).z, res.z);
  }
}

TEST(Propagate, RejectsBadShapesAndWeights) {
  const auto p = graph_p(3, 3, 0.5, 1);
  EXPECT_THROW(propagate(p, DenseMatrix::Ones(5, 2), 2), ShapeError);
  const double w[] = {0.5, 0.5};
  EXPECT_THROW(propagate(p, DenseMatrix::Ones(6, 2), 2, w), ShapeError);
}

TEST(JacobiTheta, LegendreCoefficients) {
  const auto c = jacobi_theta(2, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(c.theta, 1.5);
  EXPECT_DOUBLE_EQ(c.theta_prime, 0.0);
  EXPECT_DOUBLE_EQ(c.theta_double_prime, 0.5);
  for (int l = 2; l < 8; ++l) {
    EXPECT_EQ(jacobi_theta(l, 1.3, 1.3).theta_prime, 0.0);
  }
  EXPECT_THROW(jacobi_theta(1, 0.0, 0.0), NumericError);
  EXPECT_THROW(jacobi_theta(2, -1.0, 0.0), NumericError);
}

TEST(JacobiTheta, MatchesHighPrecisionEvaluation) {
  using Big = boost::multiprecision::cpp_dec_float_50;
  const Big a("2"), b("1.1");
  for (int l = 2; l <= 6; ++l) {
    const Big lb(l);
    const Big s = 2 * lb + a + b;
    const Big theta = s * (s - 1) / (2 * lb * (lb + a + b));
    const Big theta_p = (s - 1) * (a * a - b * b) / (2 * lb * (lb + a + b) * (s - 2));
    const Big theta_pp = (lb + a - 1) * (lb + b - 1) * s / (lb * (lb + a + b) * (s - 2));
    const auto c = jacobi_theta(l, 2.0, 1.1);
    EXPECT_NEAR(c.theta, theta.convert_to<double>(), 1e-14);
    EXPECT_NEAR(c.theta_prime, theta_p.convert_to<double>(), 1e-14);
    EXPECT_NEAR(c.theta_double_prime, theta_pp.convert_to<double>(), 1e-14);
  }
}

TEST(JacobiPropagate, ScalarGraphGivesLegendreP2) {
  for (double x : {-0.9, -0.3, 0.0, 0.4, 0.8}) {
    const auto p = SparseMatrix::from_triplets(1, 1, {{0, 0, x}});
    const double w[] = {0.0, 0.0, 1.0};
    const auto res = jacobi_propagate(p, DenseMatrix::Constant(1, 1, 2.0), 2, 0.0, 0.0, w);
    EXPECT_NEAR(res.z(0, 0), 2.0 * (1.5 * x * x - 0.5), 1e-15);
  }
}

TEST(JacobiPropagate, ZerothTermIsInputAndFirstIsOneHop) {
  const auto p = graph_p(5, 7, 0.3, 4);
  const DenseMatrix x = lxtest::random_dense(12, 3, 9);
  const double w0[] = {1.0, 0.0, 0.0};
  EXPECT_EQ(jacobi_propagate(p, x, 2, 1.0, 0.6, w0).z, x);
  const double w1[] = {0.0, 1.0};
  EXPECT_LT(lxtest::max_rel_err(jacobi_propagate(p, x, 1, 0.0, 0.0, w1).z, spmm(p, x)), 1e-15);
}

TEST(JacobiPropagate, LegendreOracle) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto p = graph_p(8, 12, 0.2, seed);
    const DenseMatrix x = lxtest::random_dense(20, 3, seed);
    for (int layers = 0; layers <= 5; ++layers) {
      const auto want = spectral_oracle(p, x, layers, [](int l, double lam) {
        return std::legendre(static_cast<unsigned>(l), lam);
      });
      EXPECT_LT(lxtest::max_rel_err(jacobi_propagate(p, x, layers, 0.0, 0.0).z, want), 1e-9) << layers;
    }
  }
}

TEST(JacobiPropagate, GeneralParametersMatchPolynomialOracle) {
  const auto p = graph_p(9, 11, 0.2, 6);
  const DenseMatrix x = lxtest::random_dense(20, 2, 6);
  const auto want = spectral_oracle(p, x, 4, [](int l, double lam) {
    return boost::math::jacobi(static_cast<unsigned>(l), 1.0, 0.6, lam);
  });
  EXPECT_LT(lxtest::max_rel_err(jacobi_propagate(p, x, 4, 1.0, 0.6).z, want), 1e-9);
}

TEST(JacobiPropagate, InvalidParameters) {
  const auto p = graph_p(3, 3, 0.5, 1);
  EXPECT_THROW(jacobi_propagate(p, DenseMatrix::Ones(6, 1), 3, -1.0, 0.0), NumericError);
  EXPECT_THROW(jacobi_propagate(p, DenseMatrix::Ones(6, 1), 3, 1.0, -1.5), NumericError);
}

TEST(Svd, IdentityAndRankOne) {
  const auto i3 = SparseMatrix::identity(3);
  const auto f = truncated_svd(i3, 2);
  EXPECT_NEAR(f.singular(0), 1.0, 1e-12);
  EXPECT_NEAR(f.singular(1), 1.0, 1e-12);

  const auto r1 = SparseMatrix::from_triplets(2, 2, {{0, 0, 2.0}});
  const auto g = truncated_svd(r1, 1);
  EXPECT_NEAR(g.singular(0), 2.0, 1e-12);
  const DenseMatrix recon = g.u * g.singular.asDiagonal() * g.v.transpose();
  EXPECT_LT((recon - r1.to_dense()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(truncated_svd(r1, 3), ShapeError);
}

TEST(Svd, TopValuesMatchDenseOracle) {
  const auto r = lxtest::random_interactions(100, 80, 0.1, 12);
  const auto m = interaction_csr(r);
  Eigen::JacobiSVD<Eigen::MatrixXd> dense(m.to_dense());
  const auto f = truncated_svd(m, 5);
  for (int k = 0; k < 5; ++k) {
    const double want = dense.singularValues()(k);
    EXPECT_LT(std::abs(f.singular(k) - want) / want, 1e-6) << k;
  }
  // Orthonormal factors.
  EXPECT_LT((f.u.transpose() * f.u - DenseMatrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((f.v.transpose() * f.v - DenseMatrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Perturbed, FullRankReproducesP) {
  const auto r = lxtest::random_interactions(25, 20, 0.2, 5);
  const auto p = normalize_adjacency(build_adjacency(r));
  const auto op = perturbed_adjacency(truncated_svd(interaction_csr(r), 20));
  const DenseMatrix x = lxtest::random_dense(45, 3, 1);
  EXPECT_LT(lxtest::max_rel_err(op.apply(x), spmm(p, x)), 1e-6);

  const double w[] = {0.0, 1.0};
  EXPECT_LT(lxtest::max_rel_err(perturbed_propagate(op, p, x, 1, w).z, spmm(p, x)), 1e-6);
}

TEST(Perturbed, SymmetricOperator) {
  const auto r = lxtest::random_interactions(30, 40, 0.1, 8);
  const auto op = perturbed_adjacency(truncated_svd(interaction_csr(r), 5));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DenseMatrix x = lxtest::random_dense(70, 1, seed);
    const DenseMatrix y = lxtest::random_dense(70, 1, seed + 50);
    const double lhs = (op.apply(x).transpose() * y)(0, 0);
    const double rhs = (x.transpose() * op.apply(y))(0, 0);
    EXPECT_NEAR(lhs, rhs, 1e-8 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Perturbed, SharedPassMatchesSeparateRuns) {
  const auto r = lxtest::random_interactions(30, 40, 0.1, 2);
  const auto p = normalize_adjacency(build_adjacency(r));
  const auto op = perturbed_adjacency(truncated_svd(interaction_csr(r), 5));
  const DenseMatrix x = lxtest::random_dense(70, 6, 4);
  const auto both = propagate_with_perturbation(op, p, x, 3);
  EXPECT_LT(lxtest::max_rel_err(both.plain.z, propagate(p, x, 3).z), 1e-14);
  EXPECT_LT(lxtest::max_rel_err(both.perturbed.z, perturbed_propagate(op, p, x, 3).z), 1e-14);
  EXPECT_EQ(both.perturbed.z.rows(), 70);
  EXPECT_EQ(both.perturbed.z.cols(), 6);
  EXPECT_EQ(both.perturbed.svd_rank, 5);
  const double w0[] = {1.0, 0.0};
  EXPECT_EQ(perturbed_propagate(op, p, x, 1, w0).z, x);
}
