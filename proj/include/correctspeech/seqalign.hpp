#pragma once

// Needleman-Wunsch global alignment with unit costs (match 0, insert /
// replace / delete 1), i.e. a Levenshtein alignment with an explicit edit
// script. Operations describe how to turn `hyp` into `ref`.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace correctspeech {

enum class EditOp { kUnchange, kInsert, kReplace, kDelete };

inline std::string_view to_string(EditOp op) {
  switch (op) {
    case EditOp::kUnchange: return "unchange";
    case EditOp::kInsert: return "insert";
    case EditOp::kReplace: return "replace";
    case EditOp::kDelete: return "delete";
  }
  return "unchange";
}

inline char short_name(EditOp op) {
  switch (op) {
    case EditOp::kUnchange: return 'U';
    case EditOp::kInsert: return 'I';
    case EditOp::kReplace: return 'R';
    case EditOp::kDelete: return 'D';
  }
  return '?';
}

struct AlignedPair {
  std::optional<std::size_t> hyp_index;
  std::optional<std::size_t> ref_index;
  EditOp op = EditOp::kUnchange;

  friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

struct Alignment {
  std::vector<AlignedPair> pairs;
  std::size_t cost = 0;

  std::string ops_string() const {
    std::string s;
    s.reserve(pairs.size());
    for (const auto& p : pairs) s.push_back(short_name(p.op));
    return s;
  }
};

/// Cost-equal paths are resolved walking from the start of both sequences,
/// preferring diagonal (unchange/replace), then delete, then insert.
template <typename T, typename Eq = std::equal_to<>>
Alignment align(std::span<const T> hyp, std::span<const T> ref, Eq eq = {}) {
  const std::size_t n = hyp.size();
  const std::size_t m = ref.size();
  const std::size_t width = m + 1;
  // suffix[i][j] = distance between hyp[i..] and ref[j..].
  std::vector<std::size_t> suffix((n + 1) * width);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return suffix[i * width + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, m) = n - i;
  for (std::size_t j = 0; j <= m; ++j) at(n, j) = m - j;
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      const std::size_t diag = at(i + 1, j + 1) + (eq(hyp[i], ref[j]) ? 0 : 1);
      at(i, j) = std::min({diag, at(i + 1, j) + 1, at(i, j + 1) + 1});
    }
  }

  Alignment out;
  out.cost = at(0, 0);
  out.pairs.reserve(std::max(n, m));
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    if (i < n && j < m) {
      const bool same = eq(hyp[i], ref[j]);
      if (at(i, j) == at(i + 1, j + 1) + (same ? 0 : 1)) {
        out.pairs.push_back({i, j, same ? EditOp::kUnchange : EditOp::kReplace});
        ++i;
        ++j;
        continue;
      }
    }
    if (i < n && at(i, j) == at(i + 1, j) + 1) {
      out.pairs.push_back({i, std::nullopt, EditOp::kDelete});
      ++i;
    } else {
      out.pairs.push_back({std::nullopt, j, EditOp::kInsert});
      ++j;
    }
  }
  return out;
}

template <typename T, typename Eq = std::equal_to<>>
Alignment align(const std::vector<T>& hyp, const std::vector<T>& ref, Eq eq = {}) {
  return align(std::span<const T>(hyp), std::span<const T>(ref), eq);
}

/// Levenshtein distance with a two-row table; agrees with align(a, b).cost.
template <typename T, typename Eq = std::equal_to<>>
std::size_t edit_distance(std::span<const T> a, std::span<const T> b, Eq eq = {}) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j - 1] + (eq(a[i - 1], b[j - 1]) ? 0 : 1), prev[j] + 1,
                         cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

template <typename T, typename Eq = std::equal_to<>>
std::size_t edit_distance(const std::vector<T>& a, const std::vector<T>& b, Eq eq = {}) {
  return edit_distance(std::span<const T>(a), std::span<const T>(b), eq);
}

}  // namespace correctspeech
