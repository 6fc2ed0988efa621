#include "lighterx/propagation.hpp"

#include "lighterx/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace lighterx {

std::vector<double> uniform_weights(int layers) {
  if (layers < 0) {
    throw ShapeError("layer count must be nonnegative");
  }
  return std::vector<double>(static_cast<std::size_t>(layers) + 1, 1.0 / (layers + 1));
}

namespace {

std::vector<double> resolve_weights(int layers, std::span<const double> weights) {
  if (layers < 0) {
    throw ShapeError("layer count must be nonnegative");
  }
  if (weights.empty()) {
    return uniform_weights(layers);
  }
  if (weights.size() != static_cast<std::size_t>(layers) + 1) {
    throw ShapeError("expected " + std::to_string(layers + 1) + " layer weights, got " +
                     std::to_string(weights.size()));
  }
  return {weights.begin(), weights.end()};
}

void check_operands(const SparseMatrix& p, const DenseMatrix& x) {
  if (p.rows != p.cols) {
    throw ShapeError("propagation matrix must be square");
  }
  if (p.cols != x.rows()) {
    throw ShapeError("feature rows (" + std::to_string(x.rows()) + ") do not match propagation size (" +
                     std::to_string(p.cols) + ")");
  }
}

}  // namespace

PropagationResult propagate(const SparseMatrix& p, const DenseMatrix& x, int layers,
                            std::span<const double> weights) {
  check_operands(p, x);
  PropagationResult result;
  result.kind = PropagationKind::Plain;
  result.layers = layers;
  result.layer_weights = resolve_weights(layers, weights);

  result.z = result.layer_weights[0] * x;
  DenseMatrix current = x;
  DenseMatrix next;
  for (int l = 1; l <= layers; ++l) {
    spmm(p, current, next);
    result.z += result.layer_weights[l] * next;
    std::swap(current, next);
  }
  return result;
}

JacobiCoefficients jacobi_theta(int l, double a, double b) {
  if (l < 2) {
    throw NumericError("Jacobi recurrence coefficients are defined for l >= 2");
  }
  if (!(a > -1.0 && b > -1.0)) {
    throw NumericError("Jacobi parameters must satisfy a, b > -1");
  }
  const double ld = l;
  const double s = 2.0 * ld + a + b;
  const double denom_l = ld * (ld + a + b);
  if (s - 2.0 == 0.0 || denom_l == 0.0) {
    throw NumericError("degenerate Jacobi parameters");
  }
  JacobiCoefficients c;
  c.theta = s * (s - 1.0) / (2.0 * denom_l);
  // factored so a == b gives exactly 0 under FMA contraction
  c.theta_prime = (s - 1.0) * (a - b) * (a + b) / (2.0 * denom_l * (s - 2.0));
  c.theta_double_prime = (ld + a - 1.0) * (ld + b - 1.0) * s / (denom_l * (s - 2.0));
  return c;
}

PropagationResult jacobi_propagate(const SparseMatrix& p, const DenseMatrix& x, int layers, double a, double b,
                                   std::span<const double> weights) {
  check_operands(p, x);
  if (!(a > -1.0 && b > -1.0)) {
    throw NumericError("Jacobi parameters must satisfy a, b > -1");
  }
  PropagationResult result;
  result.kind = PropagationKind::Jacobi;
  result.layers = layers;
  result.jacobi_a = a;
  result.jacobi_b = b;
  result.layer_weights = resolve_weights(layers, weights);

  result.z = result.layer_weights[0] * x;
  if (layers == 0) {
    return result;
  }
  // prev2 = J_{l-2} X, prev1 = J_{l-1} X.
  DenseMatrix prev2 = x;
  DenseMatrix prev1;
  spmm(p, x, prev1);
  prev1 = (0.5 * (a - b)) * x + (0.5 * (a + b + 2.0)) * prev1;
  result.z += result.layer_weights[1] * prev1;

  DenseMatrix scratch;
  for (int l = 2; l <= layers; ++l) {
    const auto c = jacobi_theta(l, a, b);
    spmm(p, prev1, scratch);
    // scratch becomes J_l X; prev2 is recycled as the next buffer.
    scratch = c.theta * scratch + c.theta_prime * prev1 - c.theta_double_prime * prev2;
    result.z += result.layer_weights[l] * scratch;
    std::swap(prev2, prev1);
    std::swap(prev1, scratch);
  }
  return result;
}

PerturbedOperator::PerturbedOperator(SvdFactors factors) : factors_(std::move(factors)) {
  const auto& u = factors_.u;
  const auto& v = factors_.v;
  const auto& s = factors_.singular;
  if (u.cols() != s.size() || v.cols() != s.size()) {
    throw ShapeError("SVD factors have inconsistent rank");
  }
  const Index nu = u.rows();
  const Index ni = v.rows();
  // |R_hat| row and column sums without materializing R_hat: one row of
  // R_hat at a time, O(|U| |I| q) work and O(|I|) memory.
  const DenseMatrix us = u * s.asDiagonal();
  Vector user_deg = Vector::Zero(nu);
  Vector item_deg = Vector::Zero(ni);
  Eigen::VectorXd row(ni);
  for (Index r = 0; r < nu; ++r) {
    row.noalias() = v * us.row(r).transpose();
    const Eigen::ArrayXd abs_row = row.array().abs();
    user_deg(r) = abs_row.sum();
    item_deg += abs_row.matrix();
  }
  auto inv_sqrt = [](const Vector& d) {
    Vector out(d.size());
    for (Index k = 0; k < d.size(); ++k) {
      out(k) = d(k) > 0.0 ? 1.0 / std::sqrt(d(k)) : 0.0;
    }
    return out;
  };
  user_scale_ = inv_sqrt(user_deg);
  item_scale_ = inv_sqrt(item_deg);
}

DenseMatrix PerturbedOperator::apply(const DenseMatrix& x) const {
  const Index nu = num_users();
  const Index ni = num_items();
  if (x.rows() != nu + ni) {
    throw ShapeError("perturbed operator applied to a matrix with the wrong row count");
  }
  const auto& u = factors_.u;
  const auto& v = factors_.v;
  const auto& s = factors_.singular;

  DenseMatrix out(x.rows(), x.cols());
  // User block: D_u^{-1/2} U S V^T D_i^{-1/2} X_items.
  const DenseMatrix scaled_items = item_scale_.asDiagonal() * x.bottomRows(ni);
  const DenseMatrix core_u = s.asDiagonal() * (v.transpose() * scaled_items);
  out.topRows(nu) = user_scale_.asDiagonal() * (u * core_u);
  // Item block: D_i^{-1/2} V S U^T D_u^{-1/2} X_users.
  const DenseMatrix scaled_users = user_scale_.asDiagonal() * x.topRows(nu);
  const DenseMatrix core_i = s.asDiagonal() * (u.transpose() * scaled_users);
  out.bottomRows(ni) = item_scale_.asDiagonal() * (v * core_i);
  return out;
}

PerturbedOperator perturbed_adjacency(SvdFactors factors) {
  return PerturbedOperator(std::move(factors));
}

PlainAndPerturbed propagate_with_perturbation(const PerturbedOperator& p_hat, const SparseMatrix& p,
                                              const DenseMatrix& x, int layers, std::span<const double> weights) {
  check_operands(p, x);
  if (p_hat.size() != p.rows) {
    throw ShapeError("perturbed operator size does not match the propagation matrix");
  }
  PlainAndPerturbed out;
  const auto w = resolve_weights(layers, weights);
  for (auto* r : {&out.plain, &out.perturbed}) {
    r->layers = layers;
    r->layer_weights = w;
  }
  out.plain.kind = PropagationKind::Plain;
  out.perturbed.kind = PropagationKind::Perturbed;
  out.perturbed.svd_rank = p_hat.rank();

  out.plain.z = w[0] * x;
  out.perturbed.z = w[0] * x;
  // current holds P^{l-1} X at the top of iteration l.
  DenseMatrix current = x;
  DenseMatrix next;
  for (int l = 1; l <= layers; ++l) {
    out.perturbed.z += w[l] * p_hat.apply(current);
    spmm(p, current, next);
    out.plain.z += w[l] * next;
    std::swap(current, next);
  }
  return out;
}

PropagationResult perturbed_propagate(const PerturbedOperator& p_hat, const SparseMatrix& p, const DenseMatrix& x,
                                      int layers, std::span<const double> weights) {
  check_operands(p, x);
  if (p_hat.size() != p.rows) {
    throw ShapeError("perturbed operator size does not match the propagation matrix");
  }
  PropagationResult result;
  result.kind = PropagationKind::Perturbed;
  result.layers = layers;
  result.svd_rank = p_hat.rank();
  result.layer_weights = resolve_weights(layers, weights);
  result.z = result.layer_weights[0] * x;
  DenseMatrix current = x;
  DenseMatrix next;
  for (int l = 1; l <= layers; ++l) {
    result.z += result.layer_weights[l] * p_hat.apply(current);
    if (l < layers) {
      spmm(p, current, next);
      std::swap(current, next);
    }
  }
  return result;
}

}  // namespace lighterx
