#include "lighterx/features.hpp"

#include "lighterx/errors.hpp"
#include "lighterx/random.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lighterx {

std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::Gaussian:
      return "gaussian";
    case Distribution::Bernoulli:
      return "bernoulli";
    case Distribution::Uniform:
      return "uniform";
    case Distribution::Orthogonal:
      return "orthogonal";
  }
  return "unknown";
}

Distribution parse_distribution(std::string_view name) {
  if (name == "gaussian") return Distribution::Gaussian;
  if (name == "bernoulli") return Distribution::Bernoulli;
  if (name == "uniform") return Distribution::Uniform;
  if (name == "orthogonal") return Distribution::Orthogonal;
  throw ShapeError("unknown distribution: " + std::string(name));
}

void RandomMatrixSpec::validate() const {
  if (!(c >= 1.0)) {
    throw NumericError("scale constant c must be >= 1");
  }
  if (estimator == SparsityEstimator::Quantile && !(quantile > 0.0 && quantile <= 1.0)) {
    throw NumericError("degree quantile must lie in (0, 1]");
  }
  if (h_user_override < 0 || h_item_override < 0) {
    throw NumericError("block width overrides must be nonnegative");
  }
}

Index compute_h_from_sparsity(Index n, double r, double c) {
  if (!(c > 0.0)) {
    throw NumericError("scale constant c must be positive");
  }
  if (r < 1.0) {
    std::ostringstream msg;
    msg << "sparsity level r=" << r << " < 1 clamped to 1";
    warn(msg.str());
    r = 1.0;
  }
  if (r >= static_cast<double>(n)) {
    throw NumericError("sparsity exceeds signal dimension");
  }
  return static_cast<Index>(std::ceil(c * r * std::log(static_cast<double>(n) / r)));
}

Index compute_h(Index n, Index f, std::int64_t nnz, double c) {
  if (nnz <= 0 || f <= 0) {
    throw NumericError("compute_h needs nnz > 0 and f > 0");
  }
  return compute_h_from_sparsity(n, static_cast<double>(nnz) / static_cast<double>(f), c);
}

DenseMatrix gen_random_matrix(Index rows, Index cols, const RandomMatrixSpec& spec) {
  if (rows <= 0 || cols <= 0) {
    throw ShapeError("random matrix dimensions must be positive");
  }
  Rng rng(spec.seed);
  DenseMatrix s(rows, cols);
  const double scale = spec.normalize ? 1.0 / std::sqrt(static_cast<double>(rows)) : 1.0;
  switch (spec.distribution) {
    case Distribution::Gaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Index k = 0; k < s.size(); ++k) {
        s.data()[k] = scale * normal(rng);
      }
      break;
    }
    case Distribution::Bernoulli: {
      std::bernoulli_distribution coin(0.5);
      for (Index k = 0; k < s.size(); ++k) {
        s.data()[k] = coin(rng) ? scale : -scale;
      }
      break;
    }
    case Distribution::Uniform: {
      // U(-sqrt(3), sqrt(3)) has unit variance.
      std::uniform_real_distribution<double> uni(-std::sqrt(3.0), std::sqrt(3.0));
      for (Index k = 0; k < s.size(); ++k) {
        s.data()[k] = scale * uni(rng);
      }
      break;
    }
    case Distribution::Orthogonal: {
      if (rows > cols) {
        throw ShapeError("orthogonal projection needs rows <= cols");
      }
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::MatrixXd g(cols, rows);
      for (Index k = 0; k < g.size(); ++k) {
        g.data()[k] = normal(rng);
      }
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
      Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(cols, rows);
      // Orthonormal rows shrink norms by rows/cols in expectation.
      const double orth_scale = spec.normalize ? std::sqrt(static_cast<double>(cols) / static_cast<double>(rows)) : 1.0;
      s = orth_scale * q.transpose();
      break;
    }
  }
  return s;
}

namespace {

double degree_quantile(std::vector<std::int64_t> degrees, double q) {
  std::erase(degrees, 0);
  if (degrees.empty()) {
    return 0.0;
  }
  std::sort(degrees.begin(), degrees.end());
  const auto pos = static_cast<std::size_t>(std::ceil(q * static_cast<double>(degrees.size()))) - 1;
  return static_cast<double>(degrees[std::min(pos, degrees.size() - 1)]);
}

}  // namespace

FeatureDims feature_dims(const InteractionMatrix& r, const RandomMatrixSpec& spec) {
  spec.validate();
  if (r.nnz() == 0) {
    throw DataError("cannot generate features for an empty interaction matrix");
  }
  FeatureDims dims;
  if (spec.estimator == SparsityEstimator::Mean) {
    dims.r_user = static_cast<double>(r.nnz()) / r.num_users();
    dims.r_item = static_cast<double>(r.nnz()) / r.num_items();
  } else {
    std::vector<std::int64_t> udeg(static_cast<std::size_t>(r.num_users()));
    for (std::int32_t u = 0; u < r.num_users(); ++u) {
      udeg[u] = r.user_degree(u);
    }
    dims.r_user = degree_quantile(std::move(udeg), spec.quantile);
    dims.r_item = degree_quantile(r.item_degrees(), spec.quantile);
  }
  // User rows of B live in item space (length |I|) and vice versa.
  dims.h_user = spec.h_user_override > 0 ? spec.h_user_override
                                         : compute_h_from_sparsity(r.num_items(), dims.r_user, spec.c);
  dims.h_item = spec.h_item_override > 0 ? spec.h_item_override
                                         : compute_h_from_sparsity(r.num_users(), dims.r_item, spec.c);
  return dims;
}

FeatureMatrix gen_feat(const InteractionMatrix& r, const RandomMatrixSpec& spec) {
  const FeatureDims dims = feature_dims(r, spec);
  const Index nu = r.num_users();
  const Index ni = r.num_items();
  if (dims.h_user + dims.h_item > r.num_nodes()) {
    throw NumericError("feature width h exceeds the node count");
  }

  const SparseMatrix b = normalize_bipartite(r);
  const SparseMatrix bt = b.transpose();

  RandomMatrixSpec s1_spec = spec;
  s1_spec.seed = derive_seed(spec.seed, "S1");
  RandomMatrixSpec s2_spec = spec;
  s2_spec.seed = derive_seed(spec.seed, "S2");
  const DenseMatrix s1 = gen_random_matrix(dims.h_user, ni, s1_spec).transpose();  // |I| x h_user
  const DenseMatrix s2 = gen_random_matrix(dims.h_item, nu, s2_spec).transpose();  // |U| x h_item

  FeatureMatrix feat;
  feat.num_users = nu;
  feat.num_items = ni;
  feat.h_user = dims.h_user;
  feat.h_item = dims.h_item;
  feat.spec = spec;
  feat.data = DenseMatrix::Zero(r.num_nodes(), dims.h_user + dims.h_item);
  feat.data.topLeftCorner(nu, dims.h_user) = spmm(b, s1);
  feat.data.bottomRightCorner(ni, dims.h_item) = spmm(bt, s2);
  return feat;
}

RipReport rip_check(const DenseMatrix& s, const SparseMatrix& b, double delta, Index sample_count,
                    std::uint64_t seed) {
  if (s.rows() != b.cols) {
    throw ShapeError("rip_check: S must have B.cols rows");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw NumericError("rip_check: delta must lie in (0, 1)");
  }
  RipReport report;
  if (b.rows == 0 || sample_count <= 0) {
    return report;
  }
  Rng rng(seed);
  std::uniform_int_distribution<Index> pick(0, b.rows - 1);
  Index passed = 0;
  double ratio_sum = 0.0;
  double worst_dev = -1.0;
  Eigen::RowVectorXd projected(s.cols());
  for (Index t = 0; t < sample_count; ++t) {
    const Index row = pick(rng);
    double norm2 = 0.0;
    projected.setZero();
    for (auto k = b.row_ptr[row]; k < b.row_ptr[row + 1]; ++k) {
      norm2 += b.values[k] * b.values[k];
      projected.noalias() += b.values[k] * s.row(b.col_idx[k]);
    }
    if (norm2 == 0.0) {
      ++report.skipped_zero_rows;
      continue;
    }
    const double ratio = projected.squaredNorm() / norm2;
    ++report.evaluated;
    ratio_sum += ratio;
    if (ratio >= 1.0 - delta && ratio <= 1.0 + delta) {
      ++passed;
    }
    if (std::abs(ratio - 1.0) > worst_dev) {
      worst_dev = std::abs(ratio - 1.0);
      report.worst_ratio = ratio;
    }
  }
  if (report.evaluated > 0) {
    report.pass_fraction = static_cast<double>(passed) / static_cast<double>(report.evaluated);
    report.mean_ratio = ratio_sum / static_cast<double>(report.evaluated);
  }
  return report;
}

}  // namespace lighterx
