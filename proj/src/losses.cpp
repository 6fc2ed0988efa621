#include "lighterx/losses.hpp"

#include "lighterx/errors.hpp"

#include <cmath>

namespace lighterx {

double softplus(double x) {
  if (x > 0.0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

BprResult bpr_loss(const Vector& e_user, const Vector& e_pos, const Vector& e_neg) {
  if (e_user.size() != e_pos.size() || e_user.size() != e_neg.size()) {
    throw ShapeError("bpr_loss: embedding dimensions differ");
  }
  const double gap = e_user.dot(e_pos) - e_user.dot(e_neg);
  BprResult r;
  r.loss = softplus(-gap);
  // d/dgap softplus(-gap) = -sigmoid(-gap)
  const double coeff = -sigmoid(-gap);
  r.grad_user = coeff * (e_pos - e_neg);
  r.grad_pos = coeff * e_user;
  r.grad_neg = -coeff * e_user;
  return r;
}

template <typename T>
double bpr_batch(const RowMatrix<T>& users, const RowMatrix<T>& pos, const RowMatrix<T>& neg,
                 RowMatrix<T>& grad_users, RowMatrix<T>& grad_pos, RowMatrix<T>& grad_neg) {
  if (users.rows() != pos.rows() || users.rows() != neg.rows() || users.cols() != pos.cols() ||
      users.cols() != neg.cols()) {
    throw ShapeError("bpr_batch: mismatched batch shapes");
  }
  const Index b = users.rows();
  grad_users.resize(b, users.cols());
  grad_pos.resize(b, users.cols());
  grad_neg.resize(b, users.cols());
  if (b == 0) {
    return 0.0;
  }
  const auto pos_scores = (users.array() * pos.array()).rowwise().sum().eval();
  const auto neg_scores = (users.array() * neg.array()).rowwise().sum().eval();
  double total = 0.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (Index r = 0; r < b; ++r) {
    const double gap = static_cast<double>(pos_scores(r)) - static_cast<double>(neg_scores(r));
    total += softplus(-gap);
    const T coeff = static_cast<T>(-sigmoid(-gap) * inv_b);
    grad_users.row(r) = coeff * (pos.row(r) - neg.row(r));
    grad_pos.row(r) = coeff * users.row(r);
    grad_neg.row(r) = -coeff * users.row(r);
  }
  return total * inv_b;
}

template <typename T>
double infonce_batch(const RowMatrix<T>& view, const RowMatrix<T>& other, double temp, RowMatrix<T>& grad_view,
                     RowMatrix<T>& grad_other) {
  if (view.rows() != other.rows() || view.cols() != other.cols()) {
    throw ShapeError("infonce: view shapes differ");
  }
  if (!(temp > 0.0)) {
    throw NumericError("infonce: temperature must be positive");
  }
  const Index b = view.rows();
  grad_view = RowMatrix<T>::Zero(b, view.cols());
  grad_other = RowMatrix<T>::Zero(b, view.cols());
  if (b == 0) {
    return 0.0;
  }
  // logits(i, j) = z_i . zhat_j / temp, computed in double for stability.
  const Eigen::MatrixXd logits = (view.template cast<double>() * other.template cast<double>().transpose()) / temp;
  Eigen::MatrixXd prob(b, b);
  double total = 0.0;
  for (Index i = 0; i < b; ++i) {
    const double max_logit = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - max_logit).exp().matrix();
    const double denom = e.sum();
    total += -(logits(i, i) - max_logit - std::log(denom));
    prob.row(i) = e / denom;
  }
  // d/dlogits(i, j) = (prob(i, j) - [i == j]) / b
  Eigen::MatrixXd g = prob;
  g.diagonal().array() -= 1.0;
  g /= static_cast<double>(b) * temp;
  grad_view = (g * other.template cast<double>()).template cast<T>();
  grad_other = (g.transpose() * view.template cast<double>()).template cast<T>();
  return total / static_cast<double>(b);
}

InfoNceResult infonce_loss(const DenseMatrix& view, const DenseMatrix& other, double temp) {
  InfoNceResult r;
  r.loss = infonce_batch(view, other, temp, r.grad_view, r.grad_other);
  return r;
}

template double bpr_batch<float>(const DenseMatrixF&, const DenseMatrixF&, const DenseMatrixF&, DenseMatrixF&,
                                 DenseMatrixF&, DenseMatrixF&);
template double bpr_batch<double>(const DenseMatrix&, const DenseMatrix&, const DenseMatrix&, DenseMatrix&,
                                  DenseMatrix&, DenseMatrix&);
template double infonce_batch<float>(const DenseMatrixF&, const DenseMatrixF&, double, DenseMatrixF&,
                                     DenseMatrixF&);
template double infonce_batch<double>(const DenseMatrix&, const DenseMatrix&, double, DenseMatrix&, DenseMatrix&);

}  // namespace lighterx
