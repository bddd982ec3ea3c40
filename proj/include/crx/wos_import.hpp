#pragma once

#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crx/dataset.hpp"
#include "crx/error.hpp"
#include "crx/reference.hpp"
#include "crx/text.hpp"

namespace crx {

// Import limits. Zero disables the respective limit.
struct ImportConfig {
  std::int64_t max_crs = 100'000;
  int min_cry = 0;
  int max_cry = 0;

  bool year_bounded() const noexcept { return min_cry != 0 || max_cry != 0; }

  // Unknown-year CRs are rejected whenever a bound is active.
  bool accepts(const YearKey& year) const noexcept {
    if (!year_bounded()) return true;
    if (!year) return false;
    if (min_cry != 0 && *year < min_cry) return false;
    if (max_cry != 0 && *year > max_cry) return false;
    return true;
  }
};

namespace detail {

struct TaggedLine {
  std::string_view tag;    // empty for continuation lines
  std::string_view value;  // trimmed
};

// A tag is two uppercase letters/digits (first a letter) at column 0,
// followed by a space or end of line. Continuation lines are indented.
inline std::optional<TaggedLine> classify(std::string_view line) {
  if (line.size() >= 2 && text::is_upper(line[0]) &&
      (text::is_upper(line[1]) || text::is_digit(line[1])) &&
      (line.size() == 2 || line[2] == ' '))
    return TaggedLine{line.substr(0, 2), text::trim(line.substr(2))};
  if (!line.empty() && line[0] == ' ') return TaggedLine{{}, text::trim(line)};
  return std::nullopt;
}

inline std::optional<int> parse_year(std::string_view v) {
  v = text::trim(v);
  if (v.size() != 4 || !text::all_digits(v)) return std::nullopt;
  return std::stoi(std::string(v));
}

inline void append_text(std::optional<std::string>& field, std::string_view v) {
  if (!field) {
    field = std::string(v);
  } else if (!v.empty()) {
    *field += ' ';
    *field += v;
  }
}

}  // namespace detail

// Parses a WoS tagged plain-text export ("Other Reference Software").
// Throws ParseError when no record is present or a record lacks ER.
inline std::vector<PublicationRecord> parse_wos_file(std::string_view content) {
  if (content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);

  std::vector<PublicationRecord> records;
  std::optional<PublicationRecord> current;
  std::size_t record_line = 0;
  std::string_view field;  // tag that continuation lines extend
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto tagged = detail::classify(line);
    if (!tagged) continue;
    if (!tagged->tag.empty()) field = tagged->tag;
    const std::string_view value = tagged->value;

    if (!tagged->tag.empty() && field == "PT") {
      if (current)
        throw ParseError("record starting at line " + std::to_string(record_line) +
                             " has no ER terminator",
                         record_line);
      current.emplace();
      record_line = line_no;
      continue;
    }
    if (field == "EF" && !tagged->tag.empty()) break;
    if (!current) continue;  // header lines (FN, VR) and stray text

    if (field == "ER") {
      records.push_back(std::move(*current));
      current.reset();
    } else if (field == "CR") {
      if (!value.empty()) current->cited_refs.emplace_back(value);
    } else if (field == "AU") {
      if (!value.empty()) current->authors.emplace_back(value);
    } else if (field == "TI") {
      detail::append_text(current->title, value);
    } else if (field == "SO") {
      detail::append_text(current->source, value);
    } else if (field == "PY" && !tagged->tag.empty()) {
      current->publication_year = detail::parse_year(value);
    }
  }

  if (current)
    throw ParseError("record starting at line " + std::to_string(record_line) +
                         " has no ER terminator",
                     record_line);
  if (records.empty()) throw ParseError("no PT record found", line_no);
  return records;
}

// Writes records back in the tagged format parse_wos_file reads.
inline std::string to_tagged_text(const std::vector<PublicationRecord>& records) {
  std::string out = "FN Clarivate Analytics Web of Science\nVR 1.0\n";
  auto multi = [&out](std::string_view tag, const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      out += i == 0 ? std::string(tag) + " " : std::string("   ");
      out += values[i];
      out += '\n';
    }
  };
  for (const auto& r : records) {
    out += "PT J\n";
    multi("AU", r.authors);
    if (r.title) out += "TI " + *r.title + "\n";
    if (r.source) out += "SO " + *r.source + "\n";
    if (r.publication_year) out += "PY " + std::to_string(*r.publication_year) + "\n";
    multi("CR", r.cited_refs);
    out += "ER\n\n";
  }
  out += "EF\n";
  return out;
}

struct FileIssue {
  std::size_t file_index = 0;
  std::string message;
};

struct ImportResult {
  Dataset dataset;
  std::vector<FileIssue> issues;  // files that failed to parse
};

// Builds a Dataset from WoS exports. Files are parsed concurrently and merged
// in input order; ids follow first appearance. Identical raw CR strings are
// aggregated into one reference.
inline ImportResult import_wos(const std::vector<std::string>& files, const ImportConfig& config) {
  if (files.empty()) throw InvalidArgument("import needs at least one file");
  if (config.max_crs < 0) throw InvalidArgument("max CRs must be nonnegative");
  if (config.min_cry < 0 || config.max_cry < 0)
    throw InvalidArgument("year bounds must be nonnegative");
  if (config.min_cry != 0 && config.max_cry != 0 && config.min_cry > config.max_cry)
    throw InvalidArgument("minimum CR year exceeds maximum CR year");

  std::vector<std::future<std::vector<PublicationRecord>>> parsed;
  parsed.reserve(files.size());
  for (const auto& f : files)
    parsed.push_back(std::async(std::launch::async, [&f] { return parse_wos_file(f); }));

  ImportResult result;
  Dataset& ds = result.dataset;
  std::unordered_map<std::string, std::size_t> index;  // raw -> position in references
  std::unordered_map<std::string, ParsedCR> parse_cache;
  std::int64_t accepted = 0;
  bool any_file = false;

  for (std::size_t fi = 0; fi < parsed.size(); ++fi) {
    std::vector<PublicationRecord> records;
    try {
      records = parsed[fi].get();
    } catch (const ParseError& e) {
      result.issues.push_back({fi, e.what()});
      continue;
    }
    any_file = true;
    for (auto& rec : records) {
      std::vector<std::string> kept;
      for (auto& raw : rec.cited_refs) {
        if (config.max_crs != 0 && accepted >= config.max_crs) break;
        auto cached = parse_cache.find(raw);
        if (cached == parse_cache.end())
          cached = parse_cache.emplace(raw, parse_cited_reference(raw)).first;
        if (!config.accepts(cached->second.year)) continue;

        ++accepted;
        auto [it, fresh] = index.emplace(raw, ds.references.size());
        if (fresh) {
          CitedReference ref;
          ref.id = static_cast<RefId>(ds.references.size()) + 1;
          ref.parsed = cached->second;
          ref.cluster = {ref.id, ref.id};
          ds.references.push_back(std::move(ref));
        }
        ++ds.references[it->second].n_cr;
        kept.push_back(std::move(raw));
      }
      rec.cited_refs = std::move(kept);
      ds.publications.push_back(std::move(rec));
    }
  }

  if (!any_file) {
    std::string msg = "no file could be imported";
    for (const auto& issue : result.issues)
      msg += "; file " + std::to_string(issue.file_index + 1) + ": " + issue.message;
    throw ImportError(msg);
  }
  ds = recompute_statistics(std::move(ds));
  return result;
}

}  // namespace crx
