#pragma once

// Shared fixtures: the dictionary excerpt, the "we are heavily" scenario and
// a few signal generators.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "correctspeech/audio.hpp"
#include "correctspeech/error.hpp"
#include "correctspeech/lexicon.hpp"
#include "correctspeech/timeline.hpp"

#ifndef CORRECTSPEECH_TEST_DATA
#error "CORRECTSPEECH_TEST_DATA must point at tests/data"
#endif

namespace fixtures {

namespace cs = correctspeech;

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(CORRECTSPEECH_TEST_DATA) / name;
}

inline const cs::PronunciationDict& dictionary() {
  static const cs::PronunciationDict dict = [] {
    std::ifstream in(data_path("cmudict_subset.dict"));
    return cs::load_dictionary(in);
  }();
  return dict;
}

// Kind of the correctspeech::Error thrown by f, or "" when none is thrown.
inline std::string error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const cs::Error& e) {
    return e.kind();
  }
  return "";
}

inline cs::TimedUnit unit(std::string label, double start, double end) {
  return {std::move(label), start, end};
}

inline cs::TimedWord word(std::string label, std::vector<cs::TimedUnit> phones) {
  cs::TimedWord w;
  w.word = {std::move(label), phones.front().start, phones.back().end};
  w.phones = std::move(phones);
  return w;
}

// "we are heavily" as recognized, with "we" uttered W ER0.
inline std::vector<cs::TimedWord> heavily_words() {
  return {
      word("we", {unit("W", 0.10, 0.18), unit("ER0", 0.18, 0.30)}),
      word("are", {unit("AA1", 0.35, 0.47), unit("R", 0.47, 0.55)}),
      word("heavily", {unit("HH", 0.60, 0.66), unit("EH1", 0.66, 0.76), unit("V", 0.76, 0.84),
                       unit("AH0", 0.84, 0.90), unit("L", 0.90, 1.00), unit("IY0", 1.00, 1.10)}),
  };
}

inline constexpr double kHeavilyDuration = 1.2;

inline cs::Transcript heavily_forced() {
  cs::Transcript t;
  t.utterance_id = "heavily";
  t.source = cs::TranscriptSource::kForced;
  t.words = heavily_words();
  t.phones = cs::concat_word_phones(*t.words);
  return t;
}

inline cs::Transcript heavily_ctc() {
  cs::Transcript t;
  t.utterance_id = "heavily";
  t.source = cs::TranscriptSource::kCtc;
  t.phones = cs::concat_word_phones(heavily_words());
  t.frame_rate = 0.04;
  return t;
}

inline std::vector<cs::WordToken> tokens(const std::string& text) {
  return cs::normalize_text(text);
}

inline cs::Waveform sine(double freq, double seconds, double amp = 1.0, int sr = 16000) {
  cs::Waveform w;
  w.sample_rate = sr;
  const auto n = static_cast<std::size_t>(std::llround(seconds * sr));
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / sr);
  }
  return w;
}

// Sum of a few tones plus a little noise, deterministic in `seed`.
inline cs::Waveform tone_mix(std::size_t samples, std::uint64_t seed, int sr = 16000) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(150.0, 3500.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  const double f1 = freq(rng);
  const double f2 = freq(rng);
  cs::Waveform w;
  w.sample_rate = sr;
  w.samples.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / sr;
    w.samples[i] = 0.4 * std::sin(2.0 * std::numbers::pi * f1 * t) +
                   0.3 * std::sin(2.0 * std::numbers::pi * f2 * t) + noise(rng);
  }
  return w;
}

}  // namespace fixtures
