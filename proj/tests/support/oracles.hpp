#pragma once

// Reference implementations used as test oracles. They are written
// straightforwardly and share no code with the library beyond its data
// types.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "correctspeech/audio.hpp"
#include "correctspeech/seqalign.hpp"

namespace oracle {

namespace cs = correctspeech;

// Wagner-Fischer over prefixes, full table.
template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  return d[a.size()][b.size()];
}

// Exhaustive search over every edit script; only for short inputs.
template <typename T>
std::size_t levenshtein_exhaustive(const std::vector<T>& a, std::size_t i, const std::vector<T>& b,
                                   std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const std::size_t keep = (a[i] == b[j] ? 0 : 1) + levenshtein_exhaustive(a, i + 1, b, j + 1);
  const std::size_t del = 1 + levenshtein_exhaustive(a, i + 1, b, j);
  const std::size_t ins = 1 + levenshtein_exhaustive(a, i, b, j + 1);
  return std::min({keep, del, ins});
}

// True when `al` is a well-formed script turning hyp into ref whose cost is
// its number of non-unchange steps.
template <typename T>
bool script_is_valid(const cs::Alignment& al, const std::vector<T>& hyp, const std::vector<T>& ref) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t cost = 0;
  for (const auto& p : al.pairs) {
    switch (p.op) {
      case cs::EditOp::kUnchange:
      case cs::EditOp::kReplace:
        if (p.hyp_index != i || p.ref_index != j) return false;
        if ((hyp[i] == ref[j]) != (p.op == cs::EditOp::kUnchange)) return false;
        cost += p.op == cs::EditOp::kReplace ? 1 : 0;
        ++i;
        ++j;
        break;
      case cs::EditOp::kDelete:
        if (p.hyp_index != i || p.ref_index.has_value()) return false;
        ++cost;
        ++i;
        break;
      case cs::EditOp::kInsert:
        if (p.ref_index != j || p.hyp_index.has_value()) return false;
        ++cost;
        ++j;
        break;
    }
  }
  return i == hyp.size() && j == ref.size() && cost == al.cost;
}

// CTC collapse of a per-frame label sequence: (label, first, last) runs of
// non-blank labels.
struct Run {
  std::size_t label;
  std::size_t first;
  std::size_t last;
};

inline std::vector<Run> ctc_collapse(const std::vector<std::size_t>& frames, std::size_t blank) {
  std::vector<Run> runs;
  std::size_t t = 0;
  while (t < frames.size()) {
    std::size_t e = t;
    while (e + 1 < frames.size() && frames[e + 1] == frames[t]) ++e;
    if (frames[t] != blank) runs.push_back({frames[t], t, e});
    t = e + 1;
  }
  return runs;
}

// Mel cepstra by direct DFT and explicit filter and DCT formulas.
inline std::vector<std::vector<double>> mel_cepstra(const cs::Waveform& w, double window_s,
                                                    double hop_s, int bands, int ceps,
                                                    double floor) {
  const int sr = w.sample_rate;
  const auto win = static_cast<std::size_t>(std::llround(window_s * sr));
  const auto hop = static_cast<std::size_t>(std::llround(hop_s * sr));
  std::size_t nfft = 1;
  while (nfft < win) nfft *= 2;
  const std::size_t bins = nfft / 2 + 1;
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  auto tri = [&](int b, double f) {
    const double step = mel(sr / 2.0) / (bands + 1);
    const double lo = hz(step * b);
    const double c = hz(step * (b + 1));
    const double hi = hz(step * (b + 2));
    if (f <= lo || f >= hi) return 0.0;
    return f < c ? (f - lo) / (c - lo) : (hi - f) / (hi - c);
  };

  std::vector<std::vector<double>> out;
  if (w.samples.size() < win) return out;
  for (std::size_t start = 0; start + win <= w.samples.size(); start += hop) {
    std::vector<double> mag(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t n = 0; n < win; ++n) {
        const double hann = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / (win - 1.0)));
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * n % nfft) / nfft;
        acc += w.samples[start + n] * hann * std::complex<double>(std::cos(angle), std::sin(angle));
      }
      mag[k] = std::abs(acc);
    }
    std::vector<double> logmel(bands);
    for (int b = 0; b < bands; ++b) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += tri(b, static_cast<double>(k) * sr / nfft) * mag[k];
      logmel[b] = std::log(std::max(e, floor));
    }
    std::vector<double> c(ceps);
    for (int k = 1; k <= ceps; ++k) {
      double acc = 0.0;
      for (int m = 0; m < bands; ++m) {
        acc += logmel[m] * std::cos(std::numbers::pi * k * (2.0 * m + 1.0) / (2.0 * bands));
      }
      c[k - 1] = std::sqrt(2.0 / bands) * acc;
    }
    out.push_back(std::move(c));
  }
  return out;
}

// DTW over full cost and path-length tables; equal-cost ties prefer the
// shorter path.
inline double mcd(const std::vector<std::vector<double>>& a,
                  const std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(n + 1, std::vector<double>(m + 1, inf));
  std::vector<std::vector<std::size_t>> len(n + 1, std::vector<std::size_t>(m + 1, 0));
  cost[0][0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < a[i - 1].size(); ++k) {
        d += (a[i - 1][k] - b[j - 1][k]) * (a[i - 1][k] - b[j - 1][k]);
      }
      d = std::sqrt(d);
      std::pair<double, std::size_t> best{inf, 0};
      for (auto [pi, pj] : {std::pair{i - 1, j - 1}, std::pair{i - 1, j}, std::pair{i, j - 1}}) {
        const std::pair<double, std::size_t> cand{cost[pi][pj], len[pi][pj]};
        if (cand < best) best = cand;
      }
      cost[i][j] = best.first + d;
      len[i][j] = best.second + 1;
    }
  }
  return 10.0 / std::log(10.0) * std::sqrt(2.0) * cost[n][m] / static_cast<double>(len[n][m]);
}

// Central interval [lo, hi] of Binomial(n, p) holding at least 1 - alpha of
// the mass, with at most alpha/2 in each tail.
inline std::pair<std::size_t, std::size_t> binomial_interval(std::size_t n, double p,
                                                             double alpha) {
  auto log_pmf = [&](std::size_t k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
           k * std::log(p) + (n - k) * std::log1p(-p);
  };
  std::size_t lo = 0;
  double tail = 0.0;
  while (lo < n && tail + std::exp(log_pmf(lo)) <= alpha / 2) tail += std::exp(log_pmf(lo++));
  std::size_t hi = n;
  tail = 0.0;
  while (hi > 0 && tail + std::exp(log_pmf(hi)) <= alpha / 2) tail += std::exp(log_pmf(hi--));
  return {lo, hi};
}

// Upper 1% point of the chi-square distribution with 3 degrees of freedom.
inline constexpr double kChiSquare3dof99 = 11.345;

}  // namespace oracle
