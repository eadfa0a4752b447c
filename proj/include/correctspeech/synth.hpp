#pragma once

// Tone-and-noise "speech" with exact word and phone annotations. Each phone
// has a fixed spectral signature (three partials plus a noise floor derived
// from its label), so two instances of a word sound alike but not
// identical. Good enough to exercise perturbation, splicing and MCD.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "correctspeech/audio.hpp"
#include "correctspeech/lexicon.hpp"
#include "correctspeech/seeding.hpp"
#include "correctspeech/timeline.hpp"

namespace correctspeech {

struct SynthConfig {
  int sample_rate = 16000;
  double utterance_length = 3.0;  // seconds, exact
  double lead_silence = 0.15;
  double min_gap = 0.04;          // between words
  double max_gap = 0.09;
  double min_phone = 0.06;
  double max_phone = 0.11;
  double silence_noise = 0.002;
};

struct SynthUtterance {
  std::string id;
  Waveform audio;
  Transcript transcript;  // source "forced", word and phone tiers
  std::string text;
};

namespace detail {

struct PhoneVoice {
  double freqs[3];
  double amps[3];
  double noise;
};

inline PhoneVoice phone_voice(const Phone& p) {
  const auto h = stable_hash(p.base());
  auto unit = [&](int k) {
    return static_cast<double>((mix_seed(h, static_cast<std::uint64_t>(k)) >> 11) & 0xfffff) /
           static_cast<double>(0xfffff);
  };
  PhoneVoice v{};
  v.freqs[0] = 200.0 + 700.0 * unit(0);
  v.freqs[1] = 900.0 + 1600.0 * unit(1);
  v.freqs[2] = 2500.0 + 1500.0 * unit(2);
  v.amps[0] = 0.30 + 0.15 * unit(3);
  v.amps[1] = 0.15 + 0.10 * unit(4);
  v.amps[2] = 0.05 + 0.05 * unit(5);
  v.noise = p.is_vowel() ? 0.01 : 0.03 + 0.08 * unit(6);
  if (p.stress() == 1) {
    for (auto& a : v.amps) a *= 1.25;
  } else if (p.stress() == 0) {
    for (auto& a : v.amps) a *= 0.85;
  }
  return v;
}

}  // namespace detail

/// Renders `words` (looked up in `dict`) into one utterance of exactly
/// cfg.utterance_length seconds; words that do not fit are dropped.
inline SynthUtterance synthesize_utterance(const std::string& id,
                                           const std::vector<WordToken>& words,
                                           const PronunciationDict& dict, const SynthConfig& cfg,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, stable_hash(id)));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int sr = cfg.sample_rate;
  const auto total = to_sample(cfg.utterance_length, sr);
  // Whole milliseconds keep every boundary on an exact microsecond.
  auto ms_samples = [&](double seconds) {
    return static_cast<std::size_t>(std::llround(seconds * 1000.0)) *
           static_cast<std::size_t>(sr) / 1000;
  };

  SynthUtterance out;
  out.id = id;
  out.audio.sample_rate = sr;
  out.audio.samples.assign(total, 0.0);
  for (auto& s : out.audio.samples) s = cfg.silence_noise * gauss(rng);
  out.transcript.utterance_id = id;
  out.transcript.source = TranscriptSource::kForced;
  out.transcript.words.emplace();

  std::size_t cursor = ms_samples(cfg.lead_silence);
  const std::size_t tail = ms_samples(cfg.lead_silence);
  for (const auto& w : words) {
    const auto& pron = lookup(dict, w);
    std::vector<std::size_t> lengths;
    std::size_t len = 0;
    for (std::size_t k = 0; k < pron.size(); ++k) {
      const double d = cfg.min_phone + (cfg.max_phone - cfg.min_phone) * uni(rng);
      lengths.push_back(ms_samples(d));
      len += lengths.back();
    }
    if (cursor + len + tail > total) break;

    TimedWord tw;
    const double gain = 0.9 + 0.2 * uni(rng);
    std::size_t at = cursor;
    for (std::size_t k = 0; k < pron.size(); ++k) {
      const auto voice = detail::phone_voice(pron[k]);
      const double jitter = 1.0 + 0.02 * (uni(rng) - 0.5);
      const std::size_t n = lengths[k];
      const std::size_t ramp = std::min<std::size_t>(n / 4, static_cast<std::size_t>(sr / 200));
      for (std::size_t i = 0; i < n; ++i) {
        double env = 1.0;
        if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
        if (n - 1 - i < ramp) env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * (n - 1 - i) / ramp));
        const double t = static_cast<double>(i) / sr;
        double x = voice.noise * gauss(rng);
        for (int p = 0; p < 3; ++p) {
          x += voice.amps[p] * std::sin(2.0 * std::numbers::pi * voice.freqs[p] * jitter * t);
        }
        out.audio.samples[at + i] = std::clamp(gain * env * x, -0.99, 0.99);
      }
      tw.phones.push_back({pron[k].str(), from_micros(static_cast<std::int64_t>(at) * 1000000 / sr),
                           from_micros(static_cast<std::int64_t>(at + n) * 1000000 / sr)});
      at += n;
    }
    tw.word = {w.text(), tw.phones.front().start, tw.phones.back().end};
    out.transcript.words->push_back(std::move(tw));
    if (!out.text.empty()) out.text.push_back(' ');
    out.text += w.text();
    const double gap = cfg.min_gap + (cfg.max_gap - cfg.min_gap) * uni(rng);
    cursor = at + ms_samples(gap);
  }
  out.transcript.phones = concat_word_phones(*out.transcript.words);
  return out;
}

/// `count` words drawn uniformly from `vocabulary`.
inline std::vector<WordToken> random_words(const std::vector<WordToken>& vocabulary,
                                           std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, vocabulary.size() - 1);
  std::vector<WordToken> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(vocabulary[pick(rng)]);
  return out;
}

}  // namespace correctspeech
