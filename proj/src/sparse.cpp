#include "lighterx/sparse.hpp"

#include "lighterx/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lighterx {

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw ShapeError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                       ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
  std::size_t k = 0;
  while (k < triplets.size()) {
    const auto row = triplets[k].row;
    const auto col = triplets[k].col;
    double sum = 0.0;
    while (k < triplets.size() && triplets[k].row == row && triplets[k].col == col) {
      sum += triplets[k].value;
      ++k;
    }
    if (sum != 0.0) {
      m.col_idx.push_back(static_cast<std::int32_t>(col));
      m.values.push_back(sum);
      ++m.row_ptr[row + 1];
    }
  }
  std::partial_sum(m.row_ptr.begin(), m.row_ptr.end(), m.row_ptr.begin());
  return m;
}

SparseMatrix SparseMatrix::identity(Index n) {
  SparseMatrix m;
  m.rows = n;
  m.cols = n;
  m.row_ptr.resize(static_cast<std::size_t>(n) + 1);
  m.col_idx.resize(static_cast<std::size_t>(n));
  m.values.assign(static_cast<std::size_t>(n), 1.0);
  for (Index i = 0; i <= n; ++i) {
    m.row_ptr[i] = i;
  }
  std::iota(m.col_idx.begin(), m.col_idx.end(), 0);
  return m;
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(static_cast<std::size_t>(cols) + 1, 0);
  for (auto c : col_idx) {
    ++t.row_ptr[c + 1];
  }
  std::partial_sum(t.row_ptr.begin(), t.row_ptr.end(), t.row_ptr.begin());
  t.col_idx.resize(col_idx.size());
  t.values.resize(values.size());
  std::vector<std::int64_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  // Walking rows in order leaves the transposed column indices sorted.
  for (Index r = 0; r < rows; ++r) {
    for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      const auto dst = cursor[col_idx[k]]++;
      t.col_idx[dst] = static_cast<std::int32_t>(r);
      t.values[dst] = values[k];
    }
  }
  return t;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d = DenseMatrix::Zero(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      d(r, col_idx[k]) = values[k];
    }
  }
  return d;
}

void SparseMatrix::validate() const {
  if (row_ptr.size() != static_cast<std::size_t>(rows) + 1 || row_ptr.front() != 0 ||
      row_ptr.back() != nnz() || col_idx.size() != values.size()) {
    throw DataError("CSR structure is inconsistent");
  }
  for (Index r = 0; r < rows; ++r) {
    if (row_ptr[r + 1] < row_ptr[r]) {
      throw DataError("CSR row_ptr is not monotone");
    }
    for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      if (col_idx[k] < 0 || col_idx[k] >= cols) {
        throw DataError("CSR column index out of range");
      }
      if (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1]) {
        throw DataError("CSR column indices not strictly increasing");
      }
      if (values[k] == 0.0) {
        throw DataError("CSR stores an explicit zero");
      }
    }
  }
}

std::uint64_t SparseMatrix::content_hash() const {
  Fnv1a h;
  h.update_value(rows);
  h.update_value(cols);
  h.update(row_ptr.data(), row_ptr.size() * sizeof(std::int64_t));
  h.update(col_idx.data(), col_idx.size() * sizeof(std::int32_t));
  h.update(values.data(), values.size() * sizeof(double));
  return h.digest();
}

SparseMatrix interaction_csr(const InteractionMatrix& r) {
  SparseMatrix m;
  m.rows = r.num_users();
  m.cols = r.num_items();
  m.row_ptr = r.row_ptr();
  m.col_idx = r.items();
  m.values.assign(m.col_idx.size(), 1.0);
  return m;
}

SparseMatrix build_adjacency(const InteractionMatrix& r) {
  if (r.nnz() == 0) {
    throw DataError("cannot build adjacency of an empty interaction matrix");
  }
  const Index nu = r.num_users();
  const Index n = r.num_nodes();
  const auto item_deg = r.item_degrees();

  SparseMatrix a;
  a.rows = n;
  a.cols = n;
  a.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::int32_t u = 0; u < r.num_users(); ++u) {
    a.row_ptr[u + 1] = r.user_degree(u);
  }
  for (std::int32_t i = 0; i < r.num_items(); ++i) {
    a.row_ptr[nu + i + 1] = item_deg[i];
  }
  std::partial_sum(a.row_ptr.begin(), a.row_ptr.end(), a.row_ptr.begin());
  a.col_idx.resize(static_cast<std::size_t>(2 * r.nnz()));
  a.values.assign(a.col_idx.size(), 1.0);

  std::vector<std::int64_t> cursor(a.row_ptr.begin(), a.row_ptr.end() - 1);
  for (std::int32_t u = 0; u < r.num_users(); ++u) {
    for (auto i : r.user_items(u)) {
      a.col_idx[cursor[u]++] = static_cast<std::int32_t>(nu + i);
      // Users are visited in ascending order, so item rows stay sorted.
      a.col_idx[cursor[nu + i]++] = u;
    }
  }
  return a;
}

SparseMatrix normalize_adjacency(const SparseMatrix& a) {
  if (a.rows != a.cols) {
    throw ShapeError("normalize_adjacency expects a square matrix");
  }
  std::vector<double> inv_sqrt(static_cast<std::size_t>(a.rows), 0.0);
  for (Index r = 0; r < a.rows; ++r) {
    double deg = 0.0;
    for (auto k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      if (a.values[k] < 0.0) {
        throw ShapeError("normalize_adjacency expects nonnegative weights");
      }
      deg += a.values[k];
    }
    inv_sqrt[r] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  SparseMatrix p = a;
  for (Index r = 0; r < a.rows; ++r) {
    for (auto k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      p.values[k] = a.values[k] * inv_sqrt[r] * inv_sqrt[a.col_idx[k]];
    }
  }
  return p;
}

SparseMatrix normalize_bipartite(const InteractionMatrix& r) {
  SparseMatrix b = interaction_csr(r);
  const auto item_deg = r.item_degrees();
  for (std::int32_t u = 0; u < r.num_users(); ++u) {
    const double du = static_cast<double>(r.user_degree(u));
    for (auto k = b.row_ptr[u]; k < b.row_ptr[u + 1]; ++k) {
      b.values[k] = 1.0 / std::sqrt(du * static_cast<double>(item_deg[b.col_idx[k]]));
    }
  }
  return b;
}

template <typename T>
void spmm(const SparseMatrix& m, const RowMatrix<T>& x, RowMatrix<T>& out) {
  if (m.cols != x.rows()) {
    throw ShapeError("spmm: matrix has " + std::to_string(m.cols) + " columns but X has " +
                     std::to_string(x.rows()) + " rows");
  }
  if (&out == &x) {
    throw ShapeError("spmm: output must not alias the input");
  }
  out.setZero(m.rows, x.cols());
  const Index rows = m.rows;
#pragma omp parallel for schedule(dynamic, 64)
  for (Index r = 0; r < rows; ++r) {
    auto dst = out.row(r);
    for (auto k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
      dst.noalias() += static_cast<T>(m.values[k]) * x.row(m.col_idx[k]);
    }
  }
}

template void spmm<double>(const SparseMatrix&, const DenseMatrix&, DenseMatrix&);
template void spmm<float>(const SparseMatrix&, const DenseMatrixF&, DenseMatrixF&);

}  // namespace lighterx
