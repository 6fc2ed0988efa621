#pragma once

#include "lighterx/data.hpp"
#include "lighterx/errors.hpp"
#include "lighterx/types.hpp"

#include <cstdint>
#include <vector>

namespace lighterx {

struct Triplet {
  std::int64_t row;
  std::int64_t col;
  double value;
};

/// CSR matrix. Invariants: row_ptr has rows+1 nondecreasing entries ending at
/// nnz, column indices are strictly increasing within a row, no stored zeros.
struct SparseMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int32_t> col_idx;
  std::vector<double> values;

  std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }

  /// Duplicate coordinates are summed; entries that end up zero are dropped.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets);
  static SparseMatrix identity(Index n);

  SparseMatrix transpose() const;
  DenseMatrix to_dense() const;
  /// Throws DataError when an invariant is violated.
  void validate() const;
  std::uint64_t content_hash() const;
};

/// R as a |U| x |I| CSR matrix of ones.
SparseMatrix interaction_csr(const InteractionMatrix& r);

/// A = [[0, R], [R^T, 0]]; users take indices [0, |U|), items [|U|, n).
SparseMatrix build_adjacency(const InteractionMatrix& r);

/// P = D^{-1/2} A D^{-1/2} with degree = row sum. Zero-degree rows stay zero.
SparseMatrix normalize_adjacency(const SparseMatrix& a);

/// B = D_u^{-1/2} R D_i^{-1/2}, the off-diagonal block of P.
SparseMatrix normalize_bipartite(const InteractionMatrix& r);

/// out = M * X. Parallel over output rows; each row is accumulated in a fixed
/// order so results do not depend on the thread count.
template <typename T>
void spmm(const SparseMatrix& m, const RowMatrix<T>& x, RowMatrix<T>& out);

template <typename T>
RowMatrix<T> spmm(const SparseMatrix& m, const RowMatrix<T>& x) {
  RowMatrix<T> out;
  spmm(m, x, out);
  return out;
}

}  // namespace lighterx
