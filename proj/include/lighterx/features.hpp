#pragma once

#include "lighterx/data.hpp"
#include "lighterx/sparse.hpp"
#include "lighterx/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lighterx {

enum class Distribution : std::uint32_t { Gaussian = 0, Bernoulli = 1, Uniform = 2, Orthogonal = 3 };
enum class SparsityEstimator : std::uint32_t { Mean = 0, Quantile = 1 };

std::string_view to_string(Distribution d);
Distribution parse_distribution(std::string_view name);

struct RandomMatrixSpec {
  Distribution distribution = Distribution::Bernoulli;
  /// Scale constant in h = c * r * ln(n / r); c >= 1.
  double c = 1.0;
  SparsityEstimator estimator = SparsityEstimator::Mean;
  /// Degree quantile used as r when estimator == Quantile, in (0, 1].
  double quantile = 0.5;
  std::uint64_t seed = 0;
  /// Scale entries so E||S p||^2 = ||p||^2. When false, Bernoulli entries are
  /// the raw +-1 of the textbook construction.
  bool normalize = true;
  /// Explicit block widths; 0 means "derive from compute_h".
  Index h_user_override = 0;
  Index h_item_override = 0;

  void validate() const;
};

/// h = ceil(c * r * ln(n / r)) with r = nnz / f. r < 1 is clamped to 1 with a
/// warning; r >= n throws NumericError.
Index compute_h(Index n, Index f, std::int64_t nnz, double c);
/// Same rule with the sparsity level r supplied directly.
Index compute_h_from_sparsity(Index n, double r, double c);

/// rows x cols random matrix laid out as (h, n): Gaussian N(0, 1/rows),
/// Bernoulli +-1/sqrt(rows), Uniform with variance 1/rows, or Orthogonal
/// (orthonormal rows from a QR factorization, scaled by sqrt(cols/rows)).
DenseMatrix gen_random_matrix(Index rows, Index cols, const RandomMatrixSpec& spec);

struct FeatureMatrix {
  DenseMatrix data;  // n x (h_user + h_item)
  Index num_users = 0;
  Index num_items = 0;
  Index h_user = 0;
  Index h_item = 0;
  RandomMatrixSpec spec;

  Index h() const { return h_user + h_item; }
};

struct FeatureDims {
  Index h_user = 0;
  Index h_item = 0;
  double r_user = 0.0;  // sparsity level used for the user block
  double r_item = 0.0;
};

/// Block widths GenFeat would use for this interaction matrix.
FeatureDims feature_dims(const InteractionMatrix& r, const RandomMatrixSpec& spec);

/// X = [[B S1, 0], [0, B^T S2]] with B = D_u^{-1/2} R D_i^{-1/2},
/// S1: |I| x h_user and S2: |U| x h_item.
FeatureMatrix gen_feat(const InteractionMatrix& r, const RandomMatrixSpec& spec);

struct RipReport {
  double pass_fraction = 0.0;
  /// Ratio ||S p||^2 / ||p||^2 farthest from 1 among evaluated rows.
  double worst_ratio = 0.0;
  double mean_ratio = 0.0;
  Index evaluated = 0;
  Index skipped_zero_rows = 0;
};

/// Samples rows p of B (with replacement) and checks
/// (1 - delta)||p||^2 <= ||p S||^2 <= (1 + delta)||p||^2, where S is laid out
/// n x h so that S.rows() == B.cols.
RipReport rip_check(const DenseMatrix& s, const SparseMatrix& b, double delta, Index sample_count,
                    std::uint64_t seed);

}  // namespace lighterx
