#pragma once

#include "lighterx/types.hpp"

namespace lighterx {

/// ln(1 + e^x) without overflow.
double softplus(double x);

struct BprResult {
  double loss = 0.0;
  Vector grad_user;
  Vector grad_pos;
  Vector grad_neg;
};

/// -ln sigmoid(e_u.e_i - e_u.e_neg) = softplus(-(gap)), with analytic gradients.
BprResult bpr_loss(const Vector& e_user, const Vector& e_pos, const Vector& e_neg);

/// Mean BPR over a batch of aligned rows. Gradients (of the mean) are written
/// into the grad_* outputs, which are resized.
template <typename T>
double bpr_batch(const RowMatrix<T>& users, const RowMatrix<T>& pos, const RowMatrix<T>& neg,
                 RowMatrix<T>& grad_users, RowMatrix<T>& grad_pos, RowMatrix<T>& grad_neg);

struct InfoNceResult {
  double loss = 0.0;
  DenseMatrix grad_view;   // d loss / d E_b
  DenseMatrix grad_other;  // d loss / d E_hat_b
};

/// -(1/b) sum_i ln softmax_j(z_i . zhat_j / temp)[i] with in-batch negatives.
template <typename T>
double infonce_batch(const RowMatrix<T>& view, const RowMatrix<T>& other, double temp, RowMatrix<T>& grad_view,
                     RowMatrix<T>& grad_other);

InfoNceResult infonce_loss(const DenseMatrix& view, const DenseMatrix& other, double temp);

}  // namespace lighterx
