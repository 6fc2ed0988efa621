#include "lighterx/errors.hpp"
#include "lighterx/propagation.hpp"
#include "lighterx/random.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <random>

namespace lighterx {

namespace {

DenseMatrix orthonormal_basis(const DenseMatrix& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
  return q;
}

}  // namespace

SvdFactors truncated_svd(const SparseMatrix& r, int q, const SvdOptions& options) {
  const Index min_dim = std::min(r.rows, r.cols);
  if (q <= 0 || q > min_dim) {
    throw ShapeError("requested rank exceeds the smaller matrix dimension");
  }
  if (options.oversample < 0 || options.power_iters < 0 || options.max_power_iters < options.power_iters ||
      !(options.tol >= 0.0)) {
    throw ShapeError("oversample, power_iters and tol must be nonnegative; max_power_iters >= power_iters");
  }
  const Index width = std::min<Index>(q + options.oversample, min_dim);
  const SparseMatrix rt = r.transpose();

  Rng rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix omega(r.cols, width);
  for (Index k = 0; k < omega.size(); ++k) {
    omega.data()[k] = normal(rng);
  }

  DenseMatrix basis = orthonormal_basis(spmm(r, omega));
  auto ritz = [&] {
    // B = Q^T R, computed as (R^T Q)^T.
    const Eigen::MatrixXd small = spmm(rt, basis).transpose();
    return Eigen::JacobiSVD<Eigen::MatrixXd>(small, Eigen::ComputeThinU | Eigen::ComputeThinV);
  };
  Vector prev;
  for (int it = 0; it < options.max_power_iters; ++it) {
    if (it >= options.power_iters) {
      const Vector now = ritz().singularValues().head(q);
      if (prev.size() == q && ((now - prev).cwiseAbs().array() <= options.tol * now.array().abs().max(1e-300)).all()) {
        break;
      }
      prev = now;
    }
    const DenseMatrix back = orthonormal_basis(spmm(rt, basis));
    basis = orthonormal_basis(spmm(r, back));
  }
  const auto svd = ritz();

  SvdFactors f;
  f.singular = svd.singularValues().head(q);
  f.u = basis * svd.matrixU().leftCols(q);
  f.v = svd.matrixV().leftCols(q);
  return f;
}

}  // namespace lighterx
