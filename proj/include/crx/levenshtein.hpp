#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "crx/text.hpp"

namespace crx {

// Unit-cost edit distance (insert, delete, substitute) over any pair of
// contiguous sequences with comparable elements. O(|a|*|b|) time, O(min) space.
template <typename CharT>
std::size_t levenshtein_distance(std::basic_string_view<CharT> a,
                                 std::basic_string_view<CharT> b) {
  if (a.size() < b.size()) std::swap(a, b);
  if (b.empty()) return a.size();

  // Common prefix and suffix never contribute to the distance.
  while (!b.empty() && a.front() == b.front()) {
    a.remove_prefix(1);
    b.remove_prefix(1);
  }
  while (!b.empty() && a.back() == b.back()) {
    a.remove_suffix(1);
    b.remove_suffix(1);
  }
  if (b.empty()) return a.size();

  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i + 1;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::size_t up = row[j + 1];
      const std::size_t cost = a[i] == b[j] ? 0 : 1;
      row[j + 1] = std::min({up + 1, row[j] + 1, diagonal + cost});
      diagonal = up;
    }
  }
  return row[b.size()];
}

inline std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
  return levenshtein_distance<char>(a, b);
}

// 1 - LD / max(|a|, |b|); 1 for equal sequences (including two empty ones).
template <typename CharT>
double similarity(std::basic_string_view<CharT> a, std::basic_string_view<CharT> b) {
  if (a == b) return 1.0;
  const auto longest = std::max(a.size(), b.size());
  return 1.0 - static_cast<double>(levenshtein_distance(a, b)) / static_cast<double>(longest);
}

// Code-point similarity of two UTF-8 strings, compared as given.
inline double similarity(std::string_view a, std::string_view b) {
  const std::u32string ua = text::decode_utf8(a);
  const std::u32string ub = text::decode_utf8(b);
  return similarity<char32_t>(ua, ub);
}

}  // namespace crx
