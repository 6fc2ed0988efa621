#include "lighterx/eval.hpp"

#include "lighterx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace lighterx {

namespace {

constexpr Index kUserChunk = 256;

bool in_sorted(std::span<const std::int32_t> v, std::int32_t x) { return std::binary_search(v.begin(), v.end(), x); }

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

template <typename T>
RankingResult full_rank(const RowMatrix<T>& user_emb, const RowMatrix<T>& item_emb,
                        std::span<const InteractionMatrix* const> masks, Index k) {
  if (user_emb.cols() != item_emb.cols()) {
    throw ShapeError("user and item embeddings have different widths");
  }
  const Index nu = user_emb.rows();
  const Index ni = item_emb.rows();
  if (k < 0 || k > ni) {
    throw ShapeError("k must lie in [0, number of items]");
  }
  for (const auto* m : masks) {
    if (m != nullptr && (m->num_users() != nu || m->num_items() != ni)) {
      throw ShapeError("mask shape does not match the embeddings");
    }
  }
  RankingResult out;
  out.k = k;
  out.items.resize(static_cast<std::size_t>(nu));
  out.scores.resize(static_cast<std::size_t>(nu));

  for (Index start = 0; start < nu; start += kUserChunk) {
    const Index rows = std::min(kUserChunk, nu - start);
    const RowMatrix<T> scores = user_emb.middleRows(start, rows) * item_emb.transpose();
#pragma omp parallel for schedule(dynamic, 8)
    for (Index r = 0; r < rows; ++r) {
      const auto user = static_cast<std::int32_t>(start + r);
      std::vector<std::int32_t> candidates;
      candidates.reserve(static_cast<std::size_t>(ni));
      for (std::int32_t item = 0; item < ni; ++item) {
        bool masked = false;
        for (const auto* m : masks) {
          if (m != nullptr && m->contains(user, item)) {
            masked = true;
            break;
          }
        }
        if (!masked) {
          candidates.push_back(item);
        }
      }
      const auto row = scores.row(r);
      auto better = [&row](std::int32_t a, std::int32_t b) {
        if (row(a) != row(b)) return row(a) > row(b);
        return a < b;
      };
      const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
      std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                        better);
      candidates.resize(take);
      auto& sc = out.scores[static_cast<std::size_t>(user)];
      sc.reserve(take);
      for (auto item : candidates) {
        sc.push_back(static_cast<double>(row(item)));
      }
      out.items[static_cast<std::size_t>(user)] = std::move(candidates);
    }
  }
  return out;
}

template RankingResult full_rank<float>(const DenseMatrixF&, const DenseMatrixF&,
                                        std::span<const InteractionMatrix* const>, Index);
template RankingResult full_rank<double>(const DenseMatrix&, const DenseMatrix&,
                                         std::span<const InteractionMatrix* const>, Index);

double recall_at_k(std::span<const std::int32_t> ranked, std::span<const std::int32_t> ground_truth, Index k) {
  if (ground_truth.empty()) {
    return 0.0;
  }
  const auto n = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  std::size_t hits = 0;
  for (std::size_t r = 0; r < n; ++r) {
    hits += in_sorted(ground_truth, ranked[r]);
  }
  return static_cast<double>(hits) / static_cast<double>(ground_truth.size());
}

double hit_at_k(std::span<const std::int32_t> ranked, std::span<const std::int32_t> ground_truth, Index k) {
  return mrr_at_k(ranked, ground_truth, k) > 0.0 ? 1.0 : 0.0;
}

double mrr_at_k(std::span<const std::int32_t> ranked, std::span<const std::int32_t> ground_truth, Index k) {
  const auto n = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < n; ++r) {
    if (in_sorted(ground_truth, ranked[r])) {
      return 1.0 / static_cast<double>(r + 1);
    }
  }
  return 0.0;
}

double ndcg_at_k(std::span<const std::int32_t> ranked, std::span<const std::int32_t> ground_truth, Index k) {
  if (ground_truth.empty()) {
    return 0.0;
  }
  const auto n = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (in_sorted(ground_truth, ranked[r])) {
      dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
  }
  const auto ideal = std::min<std::size_t>(static_cast<std::size_t>(k), ground_truth.size());
  double idcg = 0.0;
  for (std::size_t r = 0; r < ideal; ++r) {
    idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  return dcg / idcg;
}

std::vector<MetricSummary> summarize(const RankingResult& ranking, const InteractionMatrix& ground_truth,
                                     std::span<const Index> ks) {
  if (static_cast<Index>(ranking.items.size()) != ground_truth.num_users()) {
    throw ShapeError("ranking and ground truth cover different user counts");
  }
  std::vector<MetricSummary> out;
  for (auto k : ks) {
    if (k > ranking.k) {
      throw ShapeError("metric cutoff exceeds the ranking depth");
    }
    MetricSummary s;
    s.k = k;
    for (std::int32_t u = 0; u < ground_truth.num_users(); ++u) {
      const auto gt = ground_truth.user_items(u);
      if (gt.empty()) {
        continue;
      }
      const auto& ranked = ranking.items[static_cast<std::size_t>(u)];
      s.recall += recall_at_k(ranked, gt, k);
      s.ndcg += ndcg_at_k(ranked, gt, k);
      s.hit += hit_at_k(ranked, gt, k);
      s.mrr += mrr_at_k(ranked, gt, k);
      ++s.users;
    }
    if (s.users > 0) {
      const double n = static_cast<double>(s.users);
      s.recall /= n;
      s.ndcg /= n;
      s.hit /= n;
      s.mrr /= n;
    }
    out.push_back(s);
  }
  return out;
}

std::vector<MetricSummary> evaluate(const EmbeddingTable& table, const InteractionMatrix& ground_truth,
                                    std::span<const InteractionMatrix* const> masks, std::span<const Index> ks) {
  if (ks.empty()) {
    return {};
  }
  const Index depth = std::min<Index>(*std::max_element(ks.begin(), ks.end()), table.num_items);
  const DenseMatrixF users = table.users();
  const DenseMatrixF items = table.items();
  const auto ranking = full_rank(users, items, masks, depth);
  return summarize(ranking, ground_truth, ks);
}

void write_metrics_jsonl(std::ostream& out, std::span<const MetricSummary> metrics, const std::string& split) {
  for (const auto& m : metrics) {
    const std::pair<const char*, double> rows[] = {
        {"recall", m.recall}, {"ndcg", m.ndcg}, {"hit", m.hit}, {"mrr", m.mrr}};
    for (const auto& [name, value] : rows) {
      out << "{\"split\":\"" << split << "\",\"k\":" << m.k << ",\"metric\":\"" << name
          << "\",\"value\":" << exact(value) << ",\"users\":" << m.users << "}\n";
    }
  }
}

void write_metrics_table(std::ostream& out, std::span<const MetricSummary> metrics) {
  char line[128];
  std::snprintf(line, sizeof(line), "%6s %10s %10s %10s %10s\n", "k", "recall", "ndcg", "hit", "mrr");
  out << line;
  for (const auto& m : metrics) {
    std::snprintf(line, sizeof(line), "%6lld %10.4f %10.4f %10.4f %10.4f\n", static_cast<long long>(m.k), m.recall,
                  m.ndcg, m.hit, m.mrr);
    out << line;
  }
}

}  // namespace lighterx
