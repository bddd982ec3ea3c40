#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crx/text.hpp"

namespace crx {

// One citing paper from a WoS export.
struct PublicationRecord {
  std::optional<int> publication_year;
  std::vector<std::string> authors;
  std::optional<std::string> title;
  std::optional<std::string> source;
  // Raw CR strings in file order; duplicates are kept.
  std::vector<std::string> cited_refs;

  friend bool operator==(const PublicationRecord&, const PublicationRecord&) = default;
};

// A cited-reference string split into its bibliographic fields.
struct ParsedCR {
  std::string raw;
  std::string author_full;
  std::string last_name;
  std::string first_initial;  // zero or one character
  std::optional<int> year;
  std::string source;        // everything after the year segment
  std::string source_title;
  std::string title_short;
  std::optional<std::string> volume;
  std::optional<std::string> page;
  std::optional<std::string> doi;

  friend bool operator==(const ParsedCR&, const ParsedCR&) = default;
};

namespace detail {

// A token such as "JE", "J.", "a.j." or "d.j.d.s.": letters with optional
// dots/hyphens, at most four letters, and either dotted or free of lowercase
// vowels (so "derek" or "van" are not initials).
inline bool is_initials_token(std::string_view tok) {
  std::size_t letters = 0;
  bool dotted = false;
  bool lowercase_vowel = false;
  for (char c : tok) {
    if (text::is_alpha(c)) {
      ++letters;
      if (std::string_view("aeiou").find(c) != std::string_view::npos) lowercase_vowel = true;
    } else if (c == '.') {
      dotted = true;
    } else if (c != '-') {
      return false;
    }
  }
  return letters >= 1 && letters <= 4 && (dotted || !lowercase_vowel);
}

inline std::string strip_punctuation(std::string_view tok) {
  std::string out;
  for (char c : tok) {
    const bool ascii_punct = static_cast<unsigned char>(c) < 0x80 && !text::is_alpha(c) &&
                             !text::is_digit(c) && c != '-' && c != '\'';
    if (!ascii_punct) out.push_back(c);
  }
  return out;
}

inline bool is_numbered_segment(std::string_view seg, char tag) {
  return seg.size() >= 2 && text::to_lower(seg[0]) == text::to_lower(tag) &&
         text::all_digits(seg.substr(1));
}

}  // namespace detail

// Splits an author segment into last name and first initial. Trailing
// initials tokens are peeled off (the first token always stays); with no
// initials the last name is the first token without punctuation.
inline void split_author(std::string_view author_full, std::string& last_name,
                         std::string& first_initial) {
  last_name.clear();
  first_initial.clear();
  std::vector<std::string_view> tokens = text::split_whitespace(author_full);
  if (tokens.empty()) return;

  std::size_t keep = tokens.size();
  while (keep > 1 && detail::is_initials_token(tokens[keep - 1])) --keep;

  if (keep == tokens.size()) {
    last_name = detail::strip_punctuation(tokens.front());
    return;
  }
  std::vector<std::string_view> name(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(keep));
  last_name = text::join(name, " ");
  for (char c : tokens[keep]) {
    if (text::is_alpha(c)) {
      first_initial.assign(1, c);
      break;
    }
  }
}

// First letters of each word when there is more than one word, else the title.
inline std::string abbreviate_title(std::string_view source_title) {
  const auto words = text::split_whitespace(source_title);
  if (words.size() <= 1) return std::string(text::trim(source_title));
  std::string out;
  for (auto w : words) out.push_back(w.front());
  return out;
}

// Never throws. Segments are separated by ", ": author, year, source title,
// then optional V<digits>, P<digits> and "DOI <id>" segments. A string with
// no four-digit year segment keeps only author_full = raw.
inline ParsedCR parse_cited_reference(std::string_view raw) {
  ParsedCR cr;
  cr.raw = std::string(raw);

  const std::vector<std::string_view> segs = text::split(raw, ", ");
  std::size_t year_at = 0;
  for (std::size_t i = 1; i < segs.size(); ++i) {
    const auto seg = text::trim(segs[i]);
    if (seg.size() == 4 && text::all_digits(seg)) {
      year_at = i;
      break;
    }
  }

  if (year_at == 0) {
    cr.author_full = cr.raw;
    split_author(cr.author_full, cr.last_name, cr.first_initial);
    return cr;
  }

  cr.author_full = std::string(text::trim(segs[0]));
  split_author(cr.author_full, cr.last_name, cr.first_initial);
  cr.year = std::stoi(std::string(text::trim(segs[year_at])));

  if (year_at + 1 < segs.size()) {
    std::vector<std::string_view> rest(segs.begin() + static_cast<std::ptrdiff_t>(year_at) + 1, segs.end());
    cr.source = text::join(rest, ", ");
    cr.source_title = std::string(text::trim(segs[year_at + 1]));
    cr.title_short = abbreviate_title(cr.source_title);
  }

  for (std::size_t i = year_at + 2; i < segs.size(); ++i) {
    const auto seg = text::trim(segs[i]);
    if (!cr.volume && detail::is_numbered_segment(seg, 'V')) {
      cr.volume = std::string(seg.substr(1));
    } else if (!cr.page && detail::is_numbered_segment(seg, 'P')) {
      cr.page = std::string(seg.substr(1));
    } else if (!cr.doi && text::starts_with_ci(seg, "DOI ")) {
      const auto id = text::trim(seg.substr(4));
      if (!id.empty()) cr.doi = std::string(id);
    }
  }
  return cr;
}

}  // namespace crx
