#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "crx/csv.hpp"
#include "crx/error.hpp"
#include "crx/reference.hpp"

namespace crx {

using RefId = std::int64_t;

// Reference publication year; nullopt is the "no year" bucket.
using YearKey = std::optional<int>;

// Exact share num/den. A zero denominator reads as 0.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const noexcept {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  }

  // Percentage rounded half-up to two decimals, e.g. 4/67 -> "5.97".
  std::string percent_string() const {
    if (den == 0) return "0.00";
    const std::int64_t hundredths = (num * 20000 + den) / (2 * den);
    std::string frac = std::to_string(hundredths % 100);
    if (frac.size() < 2) frac.insert(0, 1, '0');
    return std::to_string(hundredths / 100) + "." + frac;
  }

  friend bool operator==(const Fraction&, const Fraction&) = default;
};

// Two-part cluster identifier, rendered "main/sub".
struct ClusterId {
  std::int64_t main = 0;
  std::int64_t sub = 0;

  std::string to_string() const { return std::to_string(main) + "/" + std::to_string(sub); }

  friend auto operator<=>(const ClusterId&, const ClusterId&) = default;
};

struct CitedReference {
  RefId id = 0;
  ParsedCR parsed;
  std::int64_t n_cr = 0;
  Fraction pct_in_year;
  Fraction pct_all_years;
  ClusterId cluster;
  std::int64_t cluster_size = 1;

  const YearKey& year() const noexcept { return parsed.year; }

  friend bool operator==(const CitedReference&, const CitedReference&) = default;
};

// The mutable working set. references are kept sorted by id.
struct Dataset {
  std::vector<PublicationRecord> publications;
  std::vector<CitedReference> references;
  std::map<YearKey, std::int64_t> totals;

  std::int64_t total_occurrences() const noexcept {
    std::int64_t sum = 0;
    for (const auto& [year, n] : totals) sum += n;
    return sum;
  }

  const CitedReference* find(RefId id) const noexcept {
    auto it = std::lower_bound(references.begin(), references.end(), id,
                               [](const CitedReference& r, RefId v) { return r.id < v; });
    return it != references.end() && it->id == id ? &*it : nullptr;
  }

  bool empty() const noexcept { return references.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct DatasetInfo {
  std::int64_t n_publications = 0;
  std::int64_t n_references_distinct = 0;
  std::int64_t n_cr_total = 0;
  std::int64_t n_clusters = 0;
  std::optional<int> min_rpy;
  std::optional<int> max_rpy;
};

struct YearRange {
  int from = 0;
  int to = 0;
};

// Restores every derived field: per-year totals, both percentage columns and
// cluster sizes. Also sorts references by id. Idempotent.
inline Dataset recompute_statistics(Dataset ds) {
  std::sort(ds.references.begin(), ds.references.end(),
            [](const CitedReference& a, const CitedReference& b) { return a.id < b.id; });

  ds.totals.clear();
  std::map<ClusterId, std::int64_t> sizes;
  for (const auto& r : ds.references) {
    ds.totals[r.year()] += r.n_cr;
    ++sizes[r.cluster];
  }
  const std::int64_t all = ds.total_occurrences();
  for (auto& r : ds.references) {
    r.pct_in_year = {r.n_cr, ds.totals[r.year()]};
    r.pct_all_years = {r.n_cr, all};
    r.cluster_size = sizes[r.cluster];
  }
  return ds;
}

inline DatasetInfo info(const Dataset& ds) {
  DatasetInfo out;
  out.n_publications = static_cast<std::int64_t>(ds.publications.size());
  out.n_references_distinct = static_cast<std::int64_t>(ds.references.size());
  out.n_cr_total = ds.total_occurrences();
  std::set<ClusterId> clusters;
  for (const auto& r : ds.references) {
    clusters.insert(r.cluster);
    if (!r.year()) continue;
    const int y = *r.year();
    if (!out.min_rpy || y < *out.min_rpy) out.min_rpy = y;
    if (!out.max_rpy || y > *out.max_rpy) out.max_rpy = y;
  }
  out.n_clusters = static_cast<std::int64_t>(clusters.size());
  return out;
}

namespace detail {

template <typename Pred>
Dataset remove_if(Dataset ds, Pred drop) {
  std::erase_if(ds.references, drop);
  return recompute_statistics(std::move(ds));
}

inline void check_range(const YearRange& r) {
  if (r.from > r.to)
    throw InvalidArgument("inverted year range " + std::to_string(r.from) + "-" +
                          std::to_string(r.to));
}

}  // namespace detail

// All ids are validated before anything is removed.
inline Dataset remove_selected(Dataset ds, std::span<const RefId> ids) {
  for (RefId id : ids)
    if (!ds.find(id)) throw UnknownIdError(id);
  const std::unordered_set<RefId> drop(ids.begin(), ids.end());
  return detail::remove_if(std::move(ds),
                           [&](const CitedReference& r) { return drop.contains(r.id); });
}

// References without a year never fall inside a range.
inline Dataset remove_by_year(Dataset ds, std::span<const YearRange> ranges) {
  for (const auto& r : ranges) detail::check_range(r);
  return detail::remove_if(std::move(ds), [&](const CitedReference& ref) {
    if (!ref.year()) return false;
    return std::any_of(ranges.begin(), ranges.end(), [y = *ref.year()](const YearRange& r) {
      return r.from <= y && y <= r.to;
    });
  });
}

// Keeps [from, to] by removing the years on either side of it.
inline Dataset retain_by_year(Dataset ds, int from, int to) {
  detail::check_range({from, to});
  const DatasetInfo span = info(ds);
  if (!span.min_rpy) return recompute_statistics(std::move(ds));
  std::vector<YearRange> outside;
  if (*span.min_rpy <= from - 1) outside.push_back({*span.min_rpy, from - 1});
  if (to + 1 <= *span.max_rpy) outside.push_back({to + 1, *span.max_rpy});
  return remove_by_year(std::move(ds), outside);
}

inline Dataset remove_below_count(Dataset ds, std::int64_t min_n) {
  if (min_n < 1) throw InvalidArgument("minimum count must be at least 1");
  return detail::remove_if(std::move(ds),
                           [min_n](const CitedReference& r) { return r.n_cr < min_n; });
}

// Single pass against the shares as they stand before the removal.
inline Dataset remove_below_pct_in_year(Dataset ds, double min_pct) {
  if (!(min_pct >= 0.0 && min_pct <= 1.0))
    throw InvalidArgument("minimum percent-in-year must lie in [0, 1]");
  ds = recompute_statistics(std::move(ds));
  return detail::remove_if(std::move(ds), [min_pct](const CitedReference& r) {
    return static_cast<long double>(r.pct_in_year.num) <
           static_cast<long double>(min_pct) * static_cast<long double>(r.pct_in_year.den);
  });
}

// ---------------------------------------------------------------------------
// CSV persistence

inline const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> columns = {
      "ID",          "Cited Reference", "Cited Reference Year", "Number of Cited References",
      "Percent in Year", "Percent over all Years", "Author", "Last Name",
      "First Initial", "Source",       "Source Title",         "Title Short",
      "Volume",      "Page",            "DOI",                  "ClusterID",
      "Cluster Size"};
  return columns;
}

inline csv::Row table_row(const CitedReference& r) {
  const auto& p = r.parsed;
  return {std::to_string(r.id),
          p.raw,
          p.year ? std::to_string(*p.year) : std::string(),
          std::to_string(r.n_cr),
          r.pct_in_year.percent_string(),
          r.pct_all_years.percent_string(),
          p.author_full,
          p.last_name,
          p.first_initial,
          p.source,
          p.source_title,
          p.title_short,
          p.volume.value_or(""),
          p.page.value_or(""),
          p.doi.value_or(""),
          r.cluster.to_string(),
          std::to_string(r.cluster_size)};
}

inline std::string save_csv(const Dataset& ds) {
  std::string out;
  csv::append_row(out, table_columns());
  for (const auto& r : ds.references) csv::append_row(out, table_row(r));
  return out;
}

namespace detail {

inline std::int64_t parse_int(std::string_view s, std::string_view column, std::size_t line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw ParseError("column \"" + std::string(column) + "\": not an integer: \"" +
                         std::string(s) + "\"",
                     line);
  return v;
}

inline std::optional<std::string> non_empty(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

}  // namespace detail

// Rebuilds a Dataset from save_csv output. Columns are located by header
// name; derived columns (percentages, cluster size) are recomputed.
// Publications are not part of the table, so the result has none.
inline Dataset open_csv(std::string_view content) {
  if (content.size() >= 3 && content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);
  const std::vector<csv::Row> rows = csv::parse(content);
  const csv::Row header = rows.empty() ? csv::Row{} : rows.front();

  std::unordered_map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < header.size(); ++i) at.emplace(header[i], i);
  std::vector<std::string> missing;
  for (const auto& name : table_columns())
    if (!at.contains(name)) missing.push_back(name);
  if (!missing.empty()) throw SchemaError(std::move(missing));

  Dataset ds;
  std::unordered_set<std::string> seen_raw;
  std::unordered_set<RefId> seen_id;
  for (std::size_t li = 1; li < rows.size(); ++li) {
    const csv::Row& row = rows[li];
    const std::size_t line = li + 1;
    if (row.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(row.size()),
                       line);
    auto col = [&](const char* name) -> const std::string& { return row[at.at(name)]; };

    CitedReference r;
    r.id = detail::parse_int(col("ID"), "ID", line);
    if (r.id <= 0) throw ParseError("ID must be positive", line);
    ParsedCR& p = r.parsed;
    p.raw = col("Cited Reference");
    if (!col("Cited Reference Year").empty())
      p.year = static_cast<int>(
          detail::parse_int(col("Cited Reference Year"), "Cited Reference Year", line));
    r.n_cr = detail::parse_int(col("Number of Cited References"), "Number of Cited References",
                               line);
    if (r.n_cr <= 0) throw ParseError("Number of Cited References must be positive", line);
    p.author_full = col("Author");
    p.last_name = col("Last Name");
    p.first_initial = col("First Initial");
    p.source = col("Source");
    p.source_title = col("Source Title");
    p.title_short = col("Title Short");
    p.volume = detail::non_empty(col("Volume"));
    p.page = detail::non_empty(col("Page"));
    p.doi = detail::non_empty(col("DOI"));

    const std::string& cid = col("ClusterID");
    const auto slash = cid.find('/');
    if (slash == std::string::npos) throw ParseError("ClusterID must read main/sub", line);
    r.cluster.main = detail::parse_int(std::string_view(cid).substr(0, slash), "ClusterID", line);
    r.cluster.sub = detail::parse_int(std::string_view(cid).substr(slash + 1), "ClusterID", line);

    if (!seen_id.insert(r.id).second)
      throw ParseError("duplicate ID " + std::to_string(r.id), line);
    if (!seen_raw.insert(p.raw).second) throw ParseError("duplicate Cited Reference", line);
    ds.references.push_back(std::move(r));
  }
  return recompute_statistics(std::move(ds));
}

}  // namespace crx
