#pragma once

#include "lighterx/sparse.hpp"
#include "lighterx/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lighterx {

enum class PropagationKind : std::uint32_t { Plain = 0, Jacobi = 1, Perturbed = 2 };

struct PropagationResult {
  DenseMatrix z;
  std::vector<double> layer_weights;  // w_0..w_L
  PropagationKind kind = PropagationKind::Plain;
  int layers = 0;
  double jacobi_a = 0.0;
  double jacobi_b = 0.0;
  int svd_rank = 0;
};

/// w_l = 1 / (L + 1).
std::vector<double> uniform_weights(int layers);

/// Z = sum_l w_l P^l X via L successive SpMMs. Empty weights mean uniform.
PropagationResult propagate(const SparseMatrix& p, const DenseMatrix& x, int layers,
                            std::span<const double> weights = {});

struct JacobiCoefficients {
  double theta = 0.0;
  double theta_prime = 0.0;
  double theta_double_prime = 0.0;
};

/// Three-term recurrence coefficients for J_l^{a,b}, l >= 2:
///   J_l = (theta P + theta' I) J_{l-1} - theta'' J_{l-2}.
JacobiCoefficients jacobi_theta(int l, double a, double b);

/// Z = sum_l w_l J_l^{a,b}(P) X. Holds only the two most recent layers.
PropagationResult jacobi_propagate(const SparseMatrix& p, const DenseMatrix& x, int layers, double a, double b,
                                   std::span<const double> weights = {});

struct SvdFactors {
  DenseMatrix u;   // |U| x q, orthonormal columns
  Vector singular; // q, descending
  DenseMatrix v;   // |I| x q, orthonormal columns

  int rank() const { return static_cast<int>(singular.size()); }
};

struct SvdOptions {
  int oversample = 10;
  int power_iters = 4;        // minimum power iterations
  int max_power_iters = 300;  // iterate until the top-q values settle, up to this
  double tol = 1e-12;         // relative change of the top-q values between iterations
  std::uint64_t seed = 0;
};

/// Randomized range-finder SVD of a sparse matrix (Gaussian test matrix,
/// power iterations with re-orthonormalization, small dense SVD). Power
/// iterations continue past the minimum until the leading q singular values
/// stop moving by more than `tol`.
SvdFactors truncated_svd(const SparseMatrix& r, int q, const SvdOptions& options = {});

/// P_hat = D_hat^{-1/2} A_hat D_hat^{-1/2} with A_hat = [[0, R_hat], [R_hat^T, 0]]
/// and R_hat = U diag(s) V^T, applied in factored form. Degrees are the
/// absolute row/column sums of R_hat; zero-degree nodes map to zero rows.
class PerturbedOperator {
 public:
  explicit PerturbedOperator(SvdFactors factors);

  Index num_users() const { return factors_.u.rows(); }
  Index num_items() const { return factors_.v.rows(); }
  Index size() const { return num_users() + num_items(); }
  int rank() const { return factors_.rank(); }
  const SvdFactors& factors() const { return factors_; }

  /// P_hat * X for an n x h matrix, O(q n h).
  DenseMatrix apply(const DenseMatrix& x) const;

 private:
  SvdFactors factors_;
  Vector user_scale_;  // D_hat_u^{-1/2}
  Vector item_scale_;  // D_hat_i^{-1/2}
};

PerturbedOperator perturbed_adjacency(SvdFactors factors);

/// Z_hat = sum_l w_l Z_hat^(l), Z_hat^(0) = X, Z_hat^(l) = P_hat P^(l-1) X.
PropagationResult perturbed_propagate(const PerturbedOperator& p_hat, const SparseMatrix& p, const DenseMatrix& x,
                                      int layers, std::span<const double> weights = {});

struct PlainAndPerturbed {
  PropagationResult plain;
  PropagationResult perturbed;
};

/// Runs propagate and perturbed_propagate together, reusing each P^l X.
PlainAndPerturbed propagate_with_perturbation(const PerturbedOperator& p_hat, const SparseMatrix& p,
                                              const DenseMatrix& x, int layers,
                                              std::span<const double> weights = {});

}  // namespace lighterx
