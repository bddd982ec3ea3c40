#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "crx/dataset.hpp"
#include "crx/error.hpp"
#include "crx/levenshtein.hpp"
#include "crx/text.hpp"
#include "crx/union_find.hpp"

namespace crx {

inline constexpr double kLastNameWeight = 2.0;
inline constexpr double kSourceTitleWeight = 1.0;
inline constexpr double kMinThreshold = 0.5;
inline constexpr double kMaxThreshold = 1.0;

// Scores within this distance below the threshold still count as reaching it,
// so that exact ties such as (2 * 1 + 0.25) / 3 == 0.75 are not lost to rounding.
inline constexpr double kScoreTolerance = 1e-9;

// Blocks larger than this trigger a warning; scoring is quadratic per block.
inline constexpr std::size_t kLargeBlock = 10'000;

struct SimilarityConfig {
  double threshold = 0.75;
  bool require_volume = false;
  bool require_page = false;
  bool require_doi = false;

  bool any_requirement() const noexcept { return require_volume || require_page || require_doi; }

  void validate() const {
    if (!(threshold >= kMinThreshold && threshold <= kMaxThreshold))
      throw InvalidArgument("similarity threshold must lie in [0.5, 1.0]");
  }

  friend bool operator==(const SimilarityConfig&, const SimilarityConfig&) = default;
};

// The normalized attributes a reference is compared on.
struct MatchKey {
  std::u32string last_name;
  std::u32string source_title;
  std::optional<std::string> volume;
  std::optional<std::string> page;
  std::optional<std::string> doi;

  static MatchKey of(const ParsedCR& cr) {
    return {text::match_key(cr.last_name), text::match_key(cr.source_title), cr.volume, cr.page,
            cr.doi};
  }
};

inline double pair_score(const MatchKey& a, const MatchKey& b) {
  const double ln = similarity<char32_t>(a.last_name, b.last_name);
  const double st = similarity<char32_t>(a.source_title, b.source_title);
  return (kLastNameWeight * ln + kSourceTitleWeight * st) / (kLastNameWeight + kSourceTitleWeight);
}

// Weighted 2:1 similarity of last names and source titles, case-insensitive.
inline double pair_score(const ParsedCR& a, const ParsedCR& b) {
  return pair_score(MatchKey::of(a), MatchKey::of(b));
}

// Exact equality of the required attributes; absent equals absent only.
inline bool attributes_agree(const MatchKey& a, const MatchKey& b, const SimilarityConfig& cfg) {
  return (!cfg.require_volume || a.volume == b.volume) && (!cfg.require_page || a.page == b.page) &&
         (!cfg.require_doi || a.doi == b.doi);
}

namespace detail {

// Upper bound on similarity from lengths alone: LD >= ||a| - |b||.
inline double similarity_bound(std::size_t la, std::size_t lb) {
  const std::size_t longest = std::max(la, lb);
  if (longest == 0) return 1.0;
  const std::size_t diff = la > lb ? la - lb : lb - la;
  return 1.0 - static_cast<double>(diff) / static_cast<double>(longest);
}

}  // namespace detail

inline bool matches(const MatchKey& a, const MatchKey& b, const SimilarityConfig& cfg) {
  if (!attributes_agree(a, b, cfg)) return false;
  const double floor = cfg.threshold - kScoreTolerance;
  const double bound =
      (kLastNameWeight * detail::similarity_bound(a.last_name.size(), b.last_name.size()) +
       kSourceTitleWeight * detail::similarity_bound(a.source_title.size(), b.source_title.size())) /
      (kLastNameWeight + kSourceTitleWeight);
  if (bound < floor) return false;
  return pair_score(a, b) >= floor;
}

inline bool matches(const ParsedCR& a, const ParsedCR& b, const SimilarityConfig& cfg) {
  return matches(MatchKey::of(a), MatchKey::of(b), cfg);
}

// ---------------------------------------------------------------------------
// Partition

struct UndoEntry {
  std::vector<std::pair<RefId, ClusterId>> previous;  // membership before the action
};

struct Partition {
  std::map<RefId, ClusterId> membership;
  std::vector<UndoEntry> undo_stack;
  std::int64_t next_main = 1;
  std::int64_t next_sub = 1;
  SimilarityConfig config;  // configuration of the last clustering or refinement

  bool can_undo() const noexcept { return !undo_stack.empty(); }

  ClusterId fresh_sub(std::int64_t main) { return {main, next_sub++}; }

  // Adopts the ClusterIDs already stored on a dataset (e.g. after open_csv).
  static Partition from_dataset(const Dataset& ds) {
    Partition p;
    for (const auto& r : ds.references) {
      p.membership.emplace(r.id, r.cluster);
      p.next_main = std::max(p.next_main, r.cluster.main + 1);
      p.next_sub = std::max(p.next_sub, r.cluster.sub + 1);
    }
    return p;
  }
};

// Writes partition membership onto the dataset and recomputes cluster sizes.
inline Dataset apply_partition(Dataset ds, const Partition& p) {
  for (auto& r : ds.references) {
    auto it = p.membership.find(r.id);
    if (it == p.membership.end()) throw UnknownIdError(r.id);
    r.cluster = it->second;
  }
  return recompute_statistics(std::move(ds));
}

// Drops membership (and undo history) for ids no longer in the dataset.
inline Partition restrict_to(Partition p, const Dataset& ds) {
  std::erase_if(p.membership, [&](const auto& kv) { return ds.find(kv.first) == nullptr; });
  for (auto& entry : p.undo_stack)
    std::erase_if(entry.previous, [&](const auto& kv) { return ds.find(kv.first) == nullptr; });
  return p;
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}

// Connected components of the match relation over the given positions.
// Components are ordered by smallest position.
inline std::vector<std::vector<std::size_t>> match_components(std::span<const MatchKey> keys,
                                                              const SimilarityConfig& cfg) {
  UnionFind uf(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    for (std::size_t j = i + 1; j < keys.size(); ++j)
      if (!uf.same(i, j) && matches(keys[i], keys[j], cfg)) uf.unite(i, j);
  return uf.groups();
}

}  // namespace detail

// Automatic clustering. References are blocked by publication year (unknown
// year is its own block); within a block the connected components of the
// match relation become clusters, each with a fresh main and sub id.
inline Partition cluster(const Dataset& ds, const SimilarityConfig& cfg,
                         std::vector<std::string>* warnings = nullptr) {
  cfg.validate();
  Partition p;
  p.config = cfg;

  std::map<YearKey, std::vector<std::size_t>> blocks;
  for (std::size_t i = 0; i < ds.references.size(); ++i)
    blocks[ds.references[i].year()].push_back(i);

  std::vector<const std::vector<std::size_t>*> order;
  for (const auto& [year, members] : blocks) {
    order.push_back(&members);
    if (warnings && members.size() > kLargeBlock)
      warnings->push_back("year " + (year ? std::to_string(*year) : std::string("(none)")) +
                          " has " + std::to_string(members.size()) +
                          " references; consider clustering a narrower selection");
  }

  std::vector<std::vector<std::vector<std::size_t>>> found(order.size());
  detail::parallel_for(order.size(), [&](std::size_t b) {
    const auto& members = *order[b];
    std::vector<MatchKey> keys;
    keys.reserve(members.size());
    for (std::size_t i : members) keys.push_back(MatchKey::of(ds.references[i].parsed));
    for (auto& comp : detail::match_components(keys, cfg)) {
      for (auto& pos : comp) pos = members[pos];
      found[b].push_back(std::move(comp));
    }
  });

  for (const auto& comps : found)
    for (const auto& comp : comps) {
      const ClusterId id{p.next_main++, p.next_sub++};
      for (std::size_t i : comp) p.membership[ds.references[i].id] = id;
    }
  return p;
}

// Recomputes sub-clusters inside every main cluster from the match relation
// plus the enabled exact-attribute requirements. A new group keeps the old
// sub id of its smallest member when no earlier group claimed it; other
// groups get fresh sub ids. Clears the undo history.
inline Partition refine_by_attributes(const Dataset& ds, Partition p, const SimilarityConfig& cfg) {
  cfg.validate();
  std::map<std::int64_t, std::vector<RefId>> mains;
  for (const auto& [id, cid] : p.membership) mains[cid.main].push_back(id);

  for (const auto& [main, ids] : mains) {
    std::vector<MatchKey> keys;
    keys.reserve(ids.size());
    for (RefId id : ids) {
      const CitedReference* r = ds.find(id);
      if (!r) throw UnknownIdError(id);
      keys.push_back(MatchKey::of(r->parsed));
    }
    std::set<std::int64_t> claimed;
    for (const auto& comp : detail::match_components(keys, cfg)) {
      const std::int64_t old_sub = p.membership.at(ids[comp.front()]).sub;
      const ClusterId target =
          claimed.insert(old_sub).second ? ClusterId{main, old_sub} : p.fresh_sub(main);
      claimed.insert(target.sub);
      for (std::size_t pos : comp) p.membership[ids[pos]] = target;
    }
  }
  p.config = cfg;
  p.undo_stack.clear();
  return p;
}

namespace detail {

inline void check_marked(const Partition& p, std::span<const RefId> ids) {
  if (ids.empty()) throw InvalidArgument("no references marked");
  for (RefId id : ids)
    if (!p.membership.contains(id)) throw UnknownIdError(id);
}

inline void record_undo(Partition& p, std::span<const RefId> ids) {
  UndoEntry entry;
  std::set<RefId> seen;
  for (RefId id : ids)
    if (seen.insert(id).second) entry.previous.emplace_back(id, p.membership.at(id));
  p.undo_stack.push_back(std::move(entry));
}

}  // namespace detail

// Gives every marked reference the ClusterID of the first marked one; marked
// references from other main clusters move into that main cluster.
inline Partition manual_same(Partition p, std::span<const RefId> ids) {
  detail::check_marked(p, ids);
  detail::record_undo(p, ids);
  const ClusterId target = p.membership.at(ids.front());
  for (RefId id : ids) p.membership[id] = target;
  return p;
}

// Each marked reference gets its own fresh sub id.
inline Partition manual_different(Partition p, std::span<const RefId> ids) {
  detail::check_marked(p, ids);
  detail::record_undo(p, ids);
  std::set<RefId> done;
  for (RefId id : ids)
    if (done.insert(id).second) p.membership[id] = p.fresh_sub(p.membership.at(id).main);
  return p;
}

// Moves all marked references together into one fresh sub of the first
// marked reference's main cluster.
inline Partition manual_extract(Partition p, std::span<const RefId> ids) {
  detail::check_marked(p, ids);
  detail::record_undo(p, ids);
  const ClusterId target = p.fresh_sub(p.membership.at(ids.front()).main);
  for (RefId id : ids) p.membership[id] = target;
  return p;
}

struct UndoOutcome {
  Partition partition;
  bool applied = false;  // false: nothing to undo
};

// Reverts the most recent manual action. Sub-id counters are not rewound.
inline UndoOutcome undo(Partition p) {
  if (p.undo_stack.empty()) return {std::move(p), false};
  for (const auto& [id, cid] : p.undo_stack.back().previous) p.membership[id] = cid;
  p.undo_stack.pop_back();
  return {std::move(p), true};
}

// Collapses each (main, sub) group into its representative: the member with
// the most occurrences, ties going to the smallest id. Occurrence counts are
// summed.
inline Dataset merge(Dataset ds, const Partition& p) {
  ds = apply_partition(std::move(ds), p);
  std::map<ClusterId, std::size_t> representative;
  std::map<ClusterId, std::int64_t> sums;
  for (std::size_t i = 0; i < ds.references.size(); ++i) {
    const auto& r = ds.references[i];
    sums[r.cluster] += r.n_cr;
    auto [it, fresh] = representative.emplace(r.cluster, i);
    if (!fresh) {
      const auto& best = ds.references[it->second];
      if (r.n_cr > best.n_cr || (r.n_cr == best.n_cr && r.id < best.id)) it->second = i;
    }
  }

  std::vector<CitedReference> merged;
  merged.reserve(representative.size());
  for (const auto& [cid, i] : representative) {
    CitedReference r = std::move(ds.references[i]);
    r.n_cr = sums[cid];
    merged.push_back(std::move(r));
  }
  ds.references = std::move(merged);
  return recompute_statistics(std::move(ds));
}

}  // namespace crx
