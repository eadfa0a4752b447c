#pragma once

// Objective evaluation: phone error rate with and without stress, boundary
// gap statistics over matched phones, and DTW-aligned mel-cepstral
// distortion.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "correctspeech/audio.hpp"
#include "correctspeech/error.hpp"
#include "correctspeech/lexicon.hpp"
#include "correctspeech/seqalign.hpp"
#include "correctspeech/timeline.hpp"

namespace correctspeech {

/// Counts use recognizer conventions: an insertion is an extra hyp phone, a
/// deletion a ref phone the hyp missed.
struct ErrorRate {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t ref_length = 0;
  double rate = 0.0;

  std::size_t errors() const { return substitutions + insertions + deletions; }
};

/// PER when `stressed` is false (stress digits stripped on both sides),
/// s-PER when true. Not clamped: heavy insertion can push it above 1.
inline ErrorRate per(const std::vector<Phone>& ref, const std::vector<Phone>& hyp, bool stressed) {
  if (ref.empty()) throw input_error("EmptyReference", "reference phone sequence is empty");
  const auto r = stressed ? ref : strip_stress(ref);
  const auto h = stressed ? hyp : strip_stress(hyp);
  const auto a = align(h, r);
  ErrorRate e;
  e.ref_length = r.size();
  for (const auto& p : a.pairs) {
    switch (p.op) {
      case EditOp::kReplace: ++e.substitutions; break;
      case EditOp::kDelete: ++e.insertions; break;
      case EditOp::kInsert: ++e.deletions; break;
      case EditOp::kUnchange: break;
    }
  }
  e.rate = static_cast<double>(e.errors()) / static_cast<double>(e.ref_length);
  return e;
}

struct GapStats {
  double avg_start_gap_ms = 0.0;
  double avg_end_gap_ms = 0.0;
  double tolerable_start_ratio = 0.0;
  double tolerable_end_ratio = 0.0;
  double tolerance_ms = 100.0;
  std::size_t matched_count = 0;
};

/// Boundary gaps over label-matched (unchange) pairs of a stress-sensitive
/// alignment. A gap counts as tolerable when it is <= tolerance_ms.
inline GapStats gap_stats(const std::vector<TimedUnit>& hyp, const std::vector<TimedUnit>& ref,
                          double tolerance_ms = 100.0) {
  std::vector<std::string> h;
  std::vector<std::string> r;
  for (const auto& u : hyp) h.push_back(u.label);
  for (const auto& u : ref) r.push_back(u.label);
  const auto a = align(h, r);
  GapStats s;
  s.tolerance_ms = tolerance_ms;
  const auto tol_us = std::llround(tolerance_ms * 1000.0);
  std::int64_t start_sum = 0;
  std::int64_t end_sum = 0;
  std::size_t start_ok = 0;
  std::size_t end_ok = 0;
  for (const auto& p : a.pairs) {
    if (p.op != EditOp::kUnchange) continue;
    const auto& x = hyp[*p.hyp_index];
    const auto& y = ref[*p.ref_index];
    const auto ds = std::llabs(to_micros(x.start) - to_micros(y.start));
    const auto de = std::llabs(to_micros(x.end) - to_micros(y.end));
    start_sum += ds;
    end_sum += de;
    start_ok += ds <= tol_us ? 1 : 0;
    end_ok += de <= tol_us ? 1 : 0;
    ++s.matched_count;
  }
  if (s.matched_count == 0) {
    throw processing_error("NoMatchedPhones", "no label-matched phones between hyp and ref");
  }
  const auto n = static_cast<double>(s.matched_count);
  s.avg_start_gap_ms = static_cast<double>(start_sum) / 1000.0 / n;
  s.avg_end_gap_ms = static_cast<double>(end_sum) / 1000.0 / n;
  s.tolerable_start_ratio = static_cast<double>(start_ok) / n;
  s.tolerable_end_ratio = static_cast<double>(end_ok) / n;
  return s;
}

/// Total cost and length of the cheapest monotone warping path between two
/// frame sequences; among equal-cost paths the shortest wins, which keeps
/// the result symmetric in its arguments.
struct WarpPath {
  double cost = 0.0;
  std::size_t length = 0;
};

inline double cepstral_distance(const MelCepstra& a, std::size_t i, const MelCepstra& b,
                                std::size_t j) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.coeffs; ++k) {
    const double d = a.at(i, k) - b.at(j, k);
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline WarpPath dtw(const MelCepstra& a, const MelCepstra& b) {
  const std::size_t n = a.frames;
  const std::size_t m = b.frames;
  std::vector<WarpPath> prev(m);
  std::vector<WarpPath> cur(m);
  auto better = [](const WarpPath& x, const WarpPath& y) {
    return x.cost < y.cost || (x.cost == y.cost && x.length < y.length);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double local = cepstral_distance(a, i, b, j);
      if (i == 0 && j == 0) {
        cur[j] = {local, 1};
        continue;
      }
      WarpPath best{std::numeric_limits<double>::infinity(), 0};
      if (i > 0 && j > 0 && better(prev[j - 1], best)) best = prev[j - 1];
      if (i > 0 && better(prev[j], best)) best = prev[j];
      if (j > 0 && better(cur[j - 1], best)) best = cur[j - 1];
      cur[j] = {best.cost + local, best.length + 1};
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

/// (10 / ln 10) * sqrt(2) * mean Euclidean cepstral distance along the path.
inline double mcd(const MelCepstra& a, const MelCepstra& b) {
  if (a.frames == 0 || b.frames == 0) {
    throw processing_error("TooShort", "signal shorter than one analysis window");
  }
  if (a.coeffs != b.coeffs) throw input_error("InvalidConfig", "cepstral orders differ");
  const auto path = dtw(a, b);
  return 10.0 / std::numbers::ln10 * std::sqrt(2.0) * path.cost /
         static_cast<double>(path.length);
}

inline double mcd(const Waveform& a, const Waveform& b, const AnalysisConfig& cfg = {}) {
  return mcd(mel_cepstra(a, cfg), mel_cepstra(b, cfg));
}

}  // namespace correctspeech
