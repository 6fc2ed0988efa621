#include "lighterx/data.hpp"

#include "lighterx/errors.hpp"
#include "lighterx/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lighterx {

std::int32_t IdMap::get_or_insert(std::string_view external) {
  auto it = dense_.find(std::string(external));
  if (it != dense_.end()) {
    return it->second;
  }
  const auto idx = static_cast<std::int32_t>(externals_.size());
  externals_.emplace_back(external);
  dense_.emplace(externals_.back(), idx);
  return idx;
}

std::optional<std::int32_t> IdMap::find(std::string_view external) const {
  auto it = dense_.find(std::string(external));
  if (it == dense_.end()) {
    return std::nullopt;
  }
  return it->second;
}

IdMap IdMap::from_externals(std::vector<std::string> externals) {
  IdMap map;
  for (auto& e : externals) {
    const auto before = map.size();
    map.get_or_insert(e);
    if (map.size() == before) {
      throw DataError("duplicate id in id list: " + e);
    }
  }
  return map;
}

InteractionMatrix InteractionMatrix::from_pairs(std::int32_t num_users, std::int32_t num_items,
                                                std::vector<std::pair<std::int32_t, std::int32_t>> pairs,
                                                IdMap user_ids, IdMap item_ids) {
  InteractionMatrix m;
  m.num_users_ = num_users;
  m.num_items_ = num_items;
  for (const auto& [u, i] : pairs) {
    if (u < 0 || u >= num_users || i < 0 || i >= num_items) {
      throw DataError("interaction index out of range");
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  m.row_ptr_.assign(static_cast<std::size_t>(num_users) + 1, 0);
  m.items_.reserve(pairs.size());
  for (const auto& [u, i] : pairs) {
    ++m.row_ptr_[u + 1];
    m.items_.push_back(i);
  }
  std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
  m.set_id_maps(std::move(user_ids), std::move(item_ids));
  return m;
}

void InteractionMatrix::set_id_maps(IdMap users, IdMap items) {
  if ((users.size() != 0 && users.size() != static_cast<std::size_t>(num_users_)) ||
      (items.size() != 0 && items.size() != static_cast<std::size_t>(num_items_))) {
    throw DataError("id map size does not match matrix shape");
  }
  user_ids_ = std::move(users);
  item_ids_ = std::move(items);
}

std::vector<std::int64_t> InteractionMatrix::item_degrees() const {
  std::vector<std::int64_t> deg(static_cast<std::size_t>(num_items_), 0);
  for (auto i : items_) {
    ++deg[i];
  }
  return deg;
}

bool InteractionMatrix::contains(std::int32_t user, std::int32_t item) const {
  auto row = user_items(user);
  return std::binary_search(row.begin(), row.end(), item);
}

double InteractionMatrix::sparsity() const {
  const double cells = static_cast<double>(num_users_) * static_cast<double>(num_items_);
  if (cells == 0.0) {
    return 1.0;
  }
  return 1.0 - static_cast<double>(nnz()) / cells;
}

std::uint64_t InteractionMatrix::content_hash() const {
  Fnv1a h;
  h.update_value(num_users_);
  h.update_value(num_items_);
  h.update(row_ptr_.data(), row_ptr_.size() * sizeof(std::int64_t));
  h.update(items_.data(), items_.size() * sizeof(std::int32_t));
  return h.digest();
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (start <= line.size()) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

InteractionMatrix load_interactions(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot read interactions file: " + path.string());
  }

  IdMap raw_users;
  IdMap raw_items;
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && options.skip_header) {
      continue;
    }
    std::string_view view = strip_cr(line);
    if (view.empty() || view.front() == '#') {
      continue;
    }
    auto fields = split_fields(view);
    if (fields.size() < 2 || fields.size() > 4 || fields[0].empty() || fields[1].empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected user<TAB>item[<TAB>rating][<TAB>timestamp]");
    }
    pairs.emplace_back(raw_users.get_or_insert(fields[0]), raw_items.get_or_insert(fields[1]));
  }
  if (in.bad()) {
    throw DataError("error while reading " + path.string());
  }

  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  // Iterative degree filtering until every surviving node meets min_degree.
  std::vector<char> alive(pairs.size(), 1);
  if (options.min_degree > 1) {
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<std::int64_t> udeg(raw_users.size(), 0);
      std::vector<std::int64_t> ideg(raw_items.size(), 0);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (alive[k]) {
          ++udeg[pairs[k].first];
          ++ideg[pairs[k].second];
        }
      }
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (alive[k] && (udeg[pairs[k].first] < options.min_degree ||
                         ideg[pairs[k].second] < options.min_degree)) {
          alive[k] = 0;
          changed = true;
        }
      }
    }
  }

  // Dense remap in first-seen order: raw ids were assigned in file order, so
  // walking them ascending and keeping survivors preserves that order.
  std::vector<char> user_alive(raw_users.size(), 0);
  std::vector<char> item_alive(raw_items.size(), 0);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (alive[k]) {
      user_alive[pairs[k].first] = 1;
      item_alive[pairs[k].second] = 1;
    }
  }
  std::vector<std::int32_t> user_remap(raw_users.size(), -1);
  std::vector<std::int32_t> item_remap(raw_items.size(), -1);
  IdMap users;
  IdMap items;
  for (std::size_t u = 0; u < raw_users.size(); ++u) {
    if (user_alive[u]) {
      user_remap[u] = users.get_or_insert(raw_users.external(static_cast<std::int32_t>(u)));
    }
  }
  for (std::size_t i = 0; i < raw_items.size(); ++i) {
    if (item_alive[i]) {
      item_remap[i] = items.get_or_insert(raw_items.external(static_cast<std::int32_t>(i)));
    }
  }

  std::vector<std::pair<std::int32_t, std::int32_t>> kept;
  kept.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (alive[k]) {
      kept.emplace_back(user_remap[pairs[k].first], item_remap[pairs[k].second]);
    }
  }
  if (kept.empty()) {
    throw DataError("no interactions left in " + path.string() + " after filtering");
  }
  const auto nu = static_cast<std::int32_t>(users.size());
  const auto ni = static_cast<std::int32_t>(items.size());
  return InteractionMatrix::from_pairs(nu, ni, std::move(kept), std::move(users), std::move(items));
}

void SplitSpec::validate() const {
  for (double f : {train, valid, test}) {
    if (!(f > 0.0 && f < 1.0)) {
      throw DataError("split fractions must lie in (0, 1)");
    }
  }
  if (std::abs(train + valid + test - 1.0) > 1e-9) {
    throw DataError("split fractions must sum to 1");
  }
}

DatasetSplit split_per_user(const InteractionMatrix& interactions, const SplitSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed, "split");
  std::vector<std::pair<std::int32_t, std::int32_t>> train;
  std::vector<std::pair<std::int32_t, std::int32_t>> valid;
  std::vector<std::pair<std::int32_t, std::int32_t>> test;
  std::vector<std::int32_t> row;
  for (std::int32_t u = 0; u < interactions.num_users(); ++u) {
    auto items = interactions.user_items(u);
    row.assign(items.begin(), items.end());
    const auto n = static_cast<std::int64_t>(row.size());
    if (n < 3) {
      for (auto i : row) {
        train.emplace_back(u, i);
      }
      continue;
    }
    // Fisher-Yates with our own index draws keeps the split independent of
    // the standard library's shuffle implementation.
    for (std::int64_t k = n - 1; k > 0; --k) {
      std::uniform_int_distribution<std::int64_t> pick(0, k);
      std::swap(row[k], row[pick(rng)]);
    }
    const auto n_valid = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * spec.valid + 1e-9));
    const auto n_test = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * spec.test + 1e-9));
    const auto n_train = n - n_valid - n_test;
    for (std::int64_t k = 0; k < n; ++k) {
      auto& dst = k < n_train ? train : (k < n_train + n_valid ? valid : test);
      dst.emplace_back(u, row[k]);
    }
  }
  const auto nu = interactions.num_users();
  const auto ni = interactions.num_items();
  return DatasetSplit{
      InteractionMatrix::from_pairs(nu, ni, std::move(train), interactions.user_ids(), interactions.item_ids()),
      InteractionMatrix::from_pairs(nu, ni, std::move(valid), interactions.user_ids(), interactions.item_ids()),
      InteractionMatrix::from_pairs(nu, ni, std::move(test), interactions.user_ids(), interactions.item_ids())};
}

void write_interactions_tsv(const InteractionMatrix& interactions, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  const bool named = interactions.user_ids().size() != 0 && interactions.item_ids().size() != 0;
  for (std::int32_t u = 0; u < interactions.num_users(); ++u) {
    for (auto i : interactions.user_items(u)) {
      if (named) {
        out << interactions.user_ids().external(u) << '\t' << interactions.item_ids().external(i) << '\n';
      } else {
        out << u << '\t' << i << '\n';
      }
    }
  }
  if (!out) {
    throw DataError("write failed for " + path.string());
  }
}

InteractionMatrix read_split_tsv(const std::filesystem::path& path, const IdMap& users, const IdMap& items) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot read split file: " + path.string());
  }
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = strip_cr(line);
    if (view.empty()) {
      continue;
    }
    auto fields = split_fields(view);
    if (fields.size() < 2) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed line");
    }
    auto u = users.find(fields[0]);
    auto i = items.find(fields[1]);
    if (!u || !i) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": unknown user or item id");
    }
    pairs.emplace_back(*u, *i);
  }
  return InteractionMatrix::from_pairs(static_cast<std::int32_t>(users.size()),
                                       static_cast<std::int32_t>(items.size()), std::move(pairs), users, items);
}

void write_id_list(const IdMap& ids, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  for (const auto& e : ids.externals()) {
    out << e << '\n';
  }
}

IdMap read_id_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot read id list: " + path.string());
  }
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto view = strip_cr(line);
    if (!view.empty()) {
      ids.emplace_back(view);
    }
  }
  return IdMap::from_externals(std::move(ids));
}

}  // namespace lighterx
