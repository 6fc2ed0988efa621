#pragma once

#include "lighterx/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lighterx {

/// Bijection between external string ids and dense indices [0, size).
class IdMap {
 public:
  std::int32_t get_or_insert(std::string_view external);
  std::optional<std::int32_t> find(std::string_view external) const;
  const std::string& external(std::int32_t dense) const { return externals_.at(dense); }
  std::size_t size() const { return externals_.size(); }
  const std::vector<std::string>& externals() const { return externals_; }

  static IdMap from_externals(std::vector<std::string> externals);

 private:
  std::vector<std::string> externals_;
  std::unordered_map<std::string, std::int32_t> dense_;
};

/// Binary implicit-feedback matrix R (users x items), stored row-major with
/// each user's item list sorted and free of duplicates.
class InteractionMatrix {
 public:
  InteractionMatrix() = default;

  /// Builds from (user, item) pairs; duplicates collapse to a single entry.
  static InteractionMatrix from_pairs(std::int32_t num_users, std::int32_t num_items,
                                      std::vector<std::pair<std::int32_t, std::int32_t>> pairs,
                                      IdMap user_ids = {}, IdMap item_ids = {});

  std::int32_t num_users() const { return num_users_; }
  std::int32_t num_items() const { return num_items_; }
  Index num_nodes() const { return Index{num_users_} + num_items_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(items_.size()); }

  std::span<const std::int32_t> user_items(std::int32_t user) const {
    return {items_.data() + row_ptr_[user], items_.data() + row_ptr_[user + 1]};
  }
  std::int64_t user_degree(std::int32_t user) const { return row_ptr_[user + 1] - row_ptr_[user]; }
  std::vector<std::int64_t> item_degrees() const;
  bool contains(std::int32_t user, std::int32_t item) const;

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::int32_t>& items() const { return items_; }

  const IdMap& user_ids() const { return user_ids_; }
  const IdMap& item_ids() const { return item_ids_; }
  void set_id_maps(IdMap users, IdMap items);

  /// 1 - nnz / (users * items).
  double sparsity() const;
  /// Hash over shape and stored entries; independent of id maps.
  std::uint64_t content_hash() const;

 private:
  std::int32_t num_users_ = 0;
  std::int32_t num_items_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<std::int32_t> items_;
  IdMap user_ids_;
  IdMap item_ids_;
};

struct LoadOptions {
  std::int64_t min_degree = 1;
  /// Skip the first line (e.g. the `userID artistID weight` header of
  /// hetrec-style dumps).
  bool skip_header = false;
};

/// Reads `user<TAB>item[<TAB>rating][<TAB>timestamp]` lines. Ratings are
/// ignored. Blank lines and lines starting with '#' are skipped.
InteractionMatrix load_interactions(const std::filesystem::path& path, const LoadOptions& options = {});

struct SplitSpec {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
  std::uint64_t seed = 2020;

  void validate() const;
};

struct DatasetSplit {
  InteractionMatrix train;
  InteractionMatrix valid;
  InteractionMatrix test;
};

/// Per-user random partition. Fractional counts are floored for valid and
/// test; the remainder goes to train. Users with fewer than 3 interactions
/// keep everything in train.
DatasetSplit split_per_user(const InteractionMatrix& interactions, const SplitSpec& spec);

/// Writes `user<TAB>item` lines using external ids.
void write_interactions_tsv(const InteractionMatrix& interactions, const std::filesystem::path& path);

/// Reads a split file back against fixed id maps; unknown ids are a DataError.
InteractionMatrix read_split_tsv(const std::filesystem::path& path, const IdMap& users, const IdMap& items);

void write_id_list(const IdMap& ids, const std::filesystem::path& path);
IdMap read_id_list(const std::filesystem::path& path);

}  // namespace lighterx
