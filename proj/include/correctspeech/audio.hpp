#pragma once

// Waveforms, 16-bit PCM WAV I/O and the mel-cepstral front end shared by the
// splice editor and the MCD metric.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "correctspeech/error.hpp"

namespace correctspeech {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }

  friend bool operator==(const Waveform&, const Waveform&) = default;
};

/// Seconds to sample index, rounding to nearest.
inline std::size_t to_sample(double seconds, int sample_rate) {
  const auto idx = std::llround(seconds * static_cast<double>(sample_rate));
  return idx < 0 ? 0 : static_cast<std::size_t>(idx);
}

// WAV -----------------------------------------------------------------------

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

/// Mono PCM16 only. Samples come back scaled by 1/32768.
inline Waveform read_wav(std::istream& in) {
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  auto corrupt = [](const std::string& why) { return input_error("CorruptHeader", why); };
  if (bytes.size() < 12 || std::string(bytes.begin(), bytes.begin() + 4) != "RIFF" ||
      std::string(bytes.begin() + 8, bytes.begin() + 12) != "WAVE") {
    throw corrupt("not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  Waveform w;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + 4));
    const std::size_t size = detail::le32(&bytes[pos + 4]);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw corrupt("chunk '" + id + "' runs past end of file");
    if (id == "fmt ") {
      if (size < 16) throw corrupt("fmt chunk too short");
      const auto format = detail::le16(&bytes[body]);
      const auto channels = detail::le16(&bytes[body + 2]);
      const auto rate = detail::le32(&bytes[body + 4]);
      const auto bits = detail::le16(&bytes[body + 14]);
      if (format != 1) throw input_error("UnsupportedFormat", "only PCM WAV is supported");
      if (channels != 1) {
        throw input_error("UnsupportedFormat",
                          "expected mono, got " + std::to_string(channels) + " channels");
      }
      if (bits != 16) {
        throw input_error("UnsupportedFormat",
                          "expected 16-bit samples, got " + std::to_string(bits));
      }
      if (rate == 0) throw corrupt("sample rate is zero");
      w.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw corrupt("data chunk before fmt chunk");
      const std::size_t n = size / 2;
      w.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto raw = static_cast<std::int16_t>(detail::le16(&bytes[body + 2 * i]));
        w.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw corrupt(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

inline std::int16_t quantize_sample(double x) {
  const double clamped = std::clamp(x, -1.0, 1.0);
  const auto q = std::llround(clamped * 32768.0);  // half away from zero
  return static_cast<std::int16_t>(std::clamp<long long>(q, -32768, 32767));
}

inline void write_wav(const Waveform& w, std::ostream& out) {
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::string buf;
  buf.reserve(44 + data_bytes);
  buf += "RIFF";
  detail::put32(buf, 36 + data_bytes);
  buf += "WAVEfmt ";
  detail::put32(buf, 16);
  detail::put16(buf, 1);  // PCM
  detail::put16(buf, 1);  // mono
  detail::put32(buf, static_cast<std::uint32_t>(w.sample_rate));
  detail::put32(buf, static_cast<std::uint32_t>(w.sample_rate * 2));
  detail::put16(buf, 2);
  detail::put16(buf, 16);
  buf += "data";
  detail::put32(buf, data_bytes);
  for (double x : w.samples) detail::put16(buf, static_cast<std::uint16_t>(quantize_sample(x)));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw processing_error("IoError", "failed to write WAV data");
}

inline Waveform read_wav_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("IoError", "cannot open '" + path + "'");
  return read_wav(in);
}

/// Samples in [round(start*sr), round(end*sr)).
inline Waveform extract_segment(const Waveform& w, double start, double end) {
  if (start < 0.0 || end < start || to_sample(end, w.sample_rate) > w.size()) {
    throw input_error("SpanOutOfRange", "span [" + std::to_string(start) + ", " +
                                            std::to_string(end) + "] outside the waveform");
  }
  const auto a = to_sample(start, w.sample_rate);
  const auto b = to_sample(end, w.sample_rate);
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(a),
                     w.samples.begin() + static_cast<std::ptrdiff_t>(b));
  return out;
}

// Mel cepstra -----------------------------------------------------------------

struct AnalysisConfig {
  double window = 0.025;  // seconds
  double hop = 0.010;     // seconds
  int mel_bands = 80;
  int cepstral_coeffs = 13;  // c1..cK; c0 is dropped
  double log_floor = 1e-10;
};

inline std::size_t window_samples(const AnalysisConfig& cfg, int sample_rate) {
  return to_sample(cfg.window, sample_rate);
}

inline std::size_t hop_samples(const AnalysisConfig& cfg, int sample_rate) {
  return to_sample(cfg.hop, sample_rate);
}

inline std::size_t fft_size_for(std::size_t window) {
  std::size_t n = 1;
  while (n < window) n <<= 1;
  return n;
}

inline void validate(const AnalysisConfig& cfg, int sample_rate) {
  const auto win = window_samples(cfg, sample_rate);
  const auto hop = hop_samples(cfg, sample_rate);
  auto bad = [](const std::string& what) { return input_error("InvalidConfig", what); };
  if (win == 0 || hop == 0) throw bad("window and hop must be at least one sample");
  if (hop > win) throw bad("hop must not exceed window");
  if (cfg.mel_bands < 1 ||
      static_cast<std::size_t>(cfg.mel_bands) >= fft_size_for(win) / 2) {
    throw bad("mel_bands must be below fft_size/2");
  }
  if (cfg.cepstral_coeffs < 1 || cfg.cepstral_coeffs >= cfg.mel_bands) {
    throw bad("cepstral_coeffs must be in [1, mel_bands)");
  }
  if (!(cfg.log_floor > 0.0)) throw bad("log_floor must be positive");
}

struct MelCepstra {
  std::size_t frames = 0;
  std::size_t coeffs = 0;
  std::vector<double> values;  // frames x coeffs, row-major
  AnalysisConfig config;

  const double* row(std::size_t f) const { return values.data() + f * coeffs; }
  double at(std::size_t f, std::size_t k) const { return values[f * coeffs + k]; }
};

inline std::size_t frame_count(std::size_t samples, std::size_t window, std::size_t hop) {
  return samples < window ? 0 : 1 + (samples - window) / hop;
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w = std::polar(1.0, ang * static_cast<double>(k));
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

/// Triangular filters between 0 Hz and Nyquist, centres equally spaced on
/// the HTK mel scale. Row b holds the weights of band b over bins 0..fft/2.
inline std::vector<std::vector<double>> mel_filterbank(int bands, std::size_t fft_size,
                                                       int sample_rate) {
  const std::size_t bins = fft_size / 2 + 1;
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(bands) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(bands + 1));
  }
  std::vector<std::vector<double>> fb(static_cast<std::size_t>(bands),
                                      std::vector<double>(bins, 0.0));
  for (std::size_t b = 0; b < fb.size(); ++b) {
    const double lo = edges[b];
    const double mid = edges[b + 1];
    const double hi = edges[b + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
      if (f > lo && f < mid) {
        fb[b][k] = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        fb[b][k] = (hi - f) / (hi - mid);
      }
    }
  }
  return fb;
}

/// Hann window -> |STFT| -> mel filterbank -> log -> orthonormal DCT-II,
/// keeping c1..cK.
inline MelCepstra mel_cepstra(const Waveform& w, const AnalysisConfig& cfg = {}) {
  validate(cfg, w.sample_rate);
  const auto win = window_samples(cfg, w.sample_rate);
  const auto hop = hop_samples(cfg, w.sample_rate);
  const auto nfft = fft_size_for(win);
  const auto bands = static_cast<std::size_t>(cfg.mel_bands);
  const auto K = static_cast<std::size_t>(cfg.cepstral_coeffs);

  MelCepstra out;
  out.config = cfg;
  out.coeffs = K;
  out.frames = frame_count(w.size(), win, hop);
  out.values.resize(out.frames * K);
  if (out.frames == 0) return out;

  std::vector<double> hann(win);
  for (std::size_t n = 0; n < win; ++n) {
    hann[n] = win == 1 ? 1.0
                       : 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                              static_cast<double>(win - 1));
  }
  const auto fb = mel_filterbank(cfg.mel_bands, nfft, w.sample_rate);
  std::vector<std::vector<double>> dct(K, std::vector<double>(bands));
  const double scale = std::sqrt(2.0 / static_cast<double>(bands));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < bands; ++m) {
      dct[k][m] = scale * std::cos(std::numbers::pi * static_cast<double>(k + 1) *
                                   (static_cast<double>(m) + 0.5) / static_cast<double>(bands));
    }
  }

  std::vector<std::complex<double>> buf(nfft);
  std::vector<double> mag(nfft / 2 + 1);
  std::vector<double> logmel(bands);
  for (std::size_t f = 0; f < out.frames; ++f) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{});
    for (std::size_t n = 0; n < win; ++n) buf[n] = w.samples[f * hop + n] * hann[n];
    fft(buf);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
    for (std::size_t b = 0; b < bands; ++b) {
      double e = 0.0;
      for (std::size_t k = 0; k < mag.size(); ++k) e += fb[b][k] * mag[k];
      logmel[b] = std::log(std::max(e, cfg.log_floor));
    }
    for (std::size_t k = 0; k < K; ++k) {
      double c = 0.0;
      for (std::size_t m = 0; m < bands; ++m) c += dct[k][m] * logmel[m];
      out.values[f * K + k] = c;
    }
  }
  return out;
}

}  // namespace correctspeech
