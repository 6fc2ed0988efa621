#pragma once

#include "lighterx/data.hpp"
#include "lighterx/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lighterx {

/// Final node embeddings. Rows [0, num_users) are users, the rest items.
struct EmbeddingTable {
  DenseMatrixF e;
  Index num_users = 0;
  Index num_items = 0;

  Index dim() const { return e.cols(); }
  auto users() const { return e.topRows(num_users); }
  auto items() const { return e.bottomRows(num_items); }
};

struct RankingResult {
  Index k = 0;
  std::vector<std::vector<std::int32_t>> items;  // per user, best first
  std::vector<std::vector<double>> scores;
};

/// Scores every item for every user, drops items present in any mask and
/// keeps the top k (ties go to the lower item index). Users with fewer than
/// k unmasked items get a shorter list.
template <typename T>
RankingResult full_rank(const RowMatrix<T>& user_emb, const RowMatrix<T>& item_emb,
                        std::span<const InteractionMatrix* const> masks, Index k);

template <typename T>
RankingResult full_rank(const RowMatrix<T>& user_emb, const RowMatrix<T>& item_emb, const InteractionMatrix& mask,
                        Index k) {
  const InteractionMatrix* m[] = {&mask};
  return full_rank(user_emb, item_emb, std::span<const InteractionMatrix* const>(m), k);
}

// Per-user metrics. `ground_truth` must be sorted ascending; `ranked` is the
// top list (only its first k entries are used).
double recall_at_k(std::span<const std::int32_t> ranked, std::span<const std::int32_t> ground_truth, Index k);
double hit_at_k(std::span<const std::int32_t> ranked, std::span<const std::int32_t> ground_truth, Index k);
double mrr_at_k(std::span<const std::int32_t> ranked, std::span<const std::int32_t> ground_truth, Index k);
double ndcg_at_k(std::span<const std::int32_t> ranked, std::span<const std::int32_t> ground_truth, Index k);

struct MetricSummary {
  Index k = 0;
  double recall = 0.0;
  double ndcg = 0.0;
  double hit = 0.0;
  double mrr = 0.0;
  Index users = 0;  // users with nonempty ground truth
};

/// Averages over users with nonempty ground truth. Ranking is done once at
/// the largest k.
std::vector<MetricSummary> summarize(const RankingResult& ranking, const InteractionMatrix& ground_truth,
                                     std::span<const Index> ks);

std::vector<MetricSummary> evaluate(const EmbeddingTable& table, const InteractionMatrix& ground_truth,
                                    std::span<const InteractionMatrix* const> masks, std::span<const Index> ks);

/// One JSON object per (k, metric) line.
void write_metrics_jsonl(std::ostream& out, std::span<const MetricSummary> metrics, const std::string& split);
void write_metrics_table(std::ostream& out, std::span<const MetricSummary> metrics);

}  // namespace lighterx
