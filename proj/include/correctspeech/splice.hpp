#pragma once

// Time-domain execution of an EditPlan: retained spans of the original are
// copied verbatim, deleted spans dropped, and replacement / insertion
// material taken from donor segments. Every junction between consecutive
// pieces is blended with a raised-cosine crossfade.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "correctspeech/audio.hpp"
#include "correctspeech/error.hpp"
#include "correctspeech/planner.hpp"
#include "correctspeech/seeding.hpp"
#include "correctspeech/timeline.hpp"

namespace correctspeech {

struct DonorSegment {
  std::string utterance;
  std::string wav_path;  // as written in the manifest
  TimeSpan span;         // in the source utterance
  Waveform audio;
  std::vector<TimedUnit> phones;  // relative to the segment start; may be empty
};

/// Token (word or phone label) -> candidate segments, in insertion order.
class DonorLibrary {
 public:
  void add(const std::string& token, DonorSegment segment) {
    if (segment.audio.empty()) {
      throw input_error("EmptyDonor", "donor segment for '" + token + "' is empty");
    }
    if (sample_rate_ == 0) {
      sample_rate_ = segment.audio.sample_rate;
    } else if (segment.audio.sample_rate != sample_rate_) {
      throw input_error("SampleRateMismatch", "donor segments must share one sample rate");
    }
    entries_[token].push_back(std::move(segment));
  }

  const std::vector<DonorSegment>* find(const std::string& token) const {
    auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
  }

  int sample_rate() const noexcept { return sample_rate_; }
  bool empty() const noexcept { return entries_.empty(); }
  const std::map<std::string, std::vector<DonorSegment>>& entries() const noexcept {
    return entries_;
  }

 private:
  std::map<std::string, std::vector<DonorSegment>> entries_;
  int sample_rate_ = 0;
};

struct SpliceConfig {
  double crossfade = 0.010;  // seconds
  std::uint64_t seed = 0;
};

/// Seeded uniform choice among the token's candidates.
inline const DonorSegment& pick_donor(const DonorLibrary& donors, const std::string& token,
                                      std::uint64_t seed) {
  const auto* candidates = donors.find(token);
  if (candidates == nullptr || candidates->empty()) {
    throw processing_error("MissingDonor", "no donor segment for '" + token + "'");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates->size() - 1);
  return (*candidates)[pick(rng)];
}

// Low-level splicing ------------------------------------------------------------

/// Replace original samples [begin, end) with `inserts` (begin == end for a
/// pure insertion).
struct SpliceEdit {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<const Waveform*> inserts;
};

struct SplicePiece {
  bool from_original = true;
  std::size_t source_begin = 0;  // original sample index, or 0 for inserts
  std::size_t length = 0;
  std::size_t edit = 0;          // for inserts: which edit / which insert
  std::size_t insert = 0;
  std::size_t out_offset = 0;
  bool left_junction = false;
  bool right_junction = false;
};

struct SpliceResult {
  Waveform audio;
  std::vector<SplicePiece> pieces;
  std::size_t crossfade = 0;  // samples

  /// Output time range a piece owns once crossfade zones are split at
  /// their midpoints.
  TimeSpan owned_span(const SplicePiece& p) const {
    const double sr = static_cast<double>(audio.sample_rate);
    const double half = static_cast<double>(crossfade) / 2.0;
    double a = static_cast<double>(p.out_offset);
    double b = a + static_cast<double>(p.length);
    if (p.left_junction) a += half;
    if (p.right_junction) b -= half;
    return {a / sr, b / sr};
  }
};

/// Raised-cosine fade-in weight for position i of an n-sample zone.
inline double fade_in_weight(std::size_t i, std::size_t n) {
  return 0.5 - 0.5 * std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) /
                              static_cast<double>(n));
}

inline SpliceResult splice(const Waveform& orig, const std::vector<SpliceEdit>& edits,
                           std::size_t crossfade) {
  SpliceResult result;
  result.crossfade = crossfade;
  result.audio.sample_rate = orig.sample_rate;

  std::size_t cursor = 0;
  auto& pieces = result.pieces;
  for (std::size_t e = 0; e < edits.size(); ++e) {
    const auto& ed = edits[e];
    if (ed.begin < cursor || ed.end < ed.begin || ed.end > orig.size()) {
      throw input_error("SpanOutOfRange", "edit spans overlap or leave the waveform");
    }
    if (ed.begin > cursor) pieces.push_back({true, cursor, ed.begin - cursor});
    for (std::size_t k = 0; k < ed.inserts.size(); ++k) {
      const Waveform* w = ed.inserts[k];
      if (w->sample_rate != orig.sample_rate) {
        throw processing_error("SampleRateMismatch", "donor sample rate differs from input");
      }
      if (!w->empty()) {
        SplicePiece p;
        p.from_original = false;
        p.length = w->size();
        p.edit = e;
        p.insert = k;
        pieces.push_back(p);
      }
    }
    cursor = ed.end;
  }
  if (orig.size() > cursor) pieces.push_back({true, cursor, orig.size() - cursor});

  std::size_t total = 0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    auto& p = pieces[k];
    p.left_junction = k > 0;
    p.right_junction = k + 1 < pieces.size();
    const std::size_t need = crossfade * ((p.left_junction ? 1 : 0) + (p.right_junction ? 1 : 0));
    if (p.length < need) {
      throw processing_error("CrossfadeTooLong",
                             "crossfade of " + std::to_string(crossfade) +
                                 " samples does not fit a " + std::to_string(p.length) +
                                 "-sample piece");
    }
    p.out_offset = k == 0 ? 0 : pieces[k - 1].out_offset + pieces[k - 1].length - crossfade;
    total = p.out_offset + p.length;
  }

  auto& out = result.audio.samples;
  out.assign(total, 0.0);
  for (const auto& p : pieces) {
    const double* src = p.from_original
                            ? orig.samples.data() + p.source_begin
                            : edits[p.edit].inserts[p.insert]->samples.data();
    for (std::size_t i = 0; i < p.length; ++i) {
      double& dst = out[p.out_offset + i];
      if (p.left_junction && i < crossfade) {
        dst += fade_in_weight(i, crossfade) * src[i];
      } else if (p.right_junction && i >= p.length - crossfade) {
        dst += (1.0 - fade_in_weight(i - (p.length - crossfade), crossfade)) * src[i];
      } else {
        dst = src[i];
      }
    }
  }
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    for (std::size_t i = 0; i < crossfade; ++i) {
      double& s = out[pieces[k].out_offset + i];
      s = std::clamp(s, -1.0, 1.0);
    }
  }
  return result;
}

inline std::size_t crossfade_samples(const SpliceConfig& cfg, int sample_rate) {
  if (cfg.crossfade < 0.0) throw input_error("InvalidConfig", "crossfade must be >= 0");
  return to_sample(cfg.crossfade, sample_rate);
}

/// Executes `plan` on `orig`. Donors for the tokens of region r are chosen
/// with seeds derived from cfg.seed, r and the token position.
inline Waveform apply_plan(const Waveform& orig, const EditPlan& plan, const DonorLibrary& donors,
                           const SpliceConfig& cfg = {}) {
  const int sr = orig.sample_rate;
  std::vector<SpliceEdit> edits;
  edits.reserve(plan.regions.size());
  for (std::size_t r = 0; r < plan.regions.size(); ++r) {
    const auto& region = plan.regions[r];
    SpliceEdit e;
    if (region.orig_span) {
      e.begin = to_sample(region.orig_span->start, sr);
      e.end = to_sample(region.orig_span->end, sr);
    } else {
      e.begin = e.end = to_sample(region.anchor.value_or(0.0), sr);
    }
    if (e.end > orig.size() || e.begin > e.end) {
      throw input_error("SpanOutOfRange", "plan region " + std::to_string(r) +
                                              " lies outside the audio");
    }
    for (std::size_t t = 0; t < region.target_tokens.size(); ++t) {
      const auto& seg = pick_donor(donors, region.target_tokens[t],
                                   mix_seed(mix_seed(cfg.seed, r), t));
      e.inserts.push_back(&seg.audio);
    }
    edits.push_back(std::move(e));
  }
  std::stable_sort(edits.begin(), edits.end(),
                   [](const SpliceEdit& a, const SpliceEdit& b) { return a.begin < b.begin; });
  return splice(orig, edits, crossfade_samples(cfg, sr)).audio;
}

// Donor manifest ----------------------------------------------------------------

/// Manifest: { token: [ {"utterance", "wav", "span": [s, e], "phones"?}, ... ] }.
/// Relative wav paths resolve against `base_dir`. Optional phone units are
/// in source-utterance time.
inline DonorLibrary load_donor_library(const json& doc, const std::filesystem::path& base_dir) {
  using detail::schema;
  if (!doc.is_object()) throw schema("$", "expected object");
  DonorLibrary lib;
  std::map<std::string, Waveform> cache;
  for (const auto& [token, list] : doc.items()) {
    const std::string path = "$." + token;
    if (!list.is_array()) throw schema(path, "expected array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& e = list[i];
      const std::string epath = path + "[" + std::to_string(i) + "]";
      if (!e.is_object()) throw schema(epath, "expected object");
      DonorSegment seg;
      seg.utterance = detail::string_at(e, "utterance", epath);
      seg.wav_path = detail::string_at(e, "wav", epath);
      auto span = e.find("span");
      if (span == e.end()) throw schema(epath + ".span", "missing");
      seg.span = detail::span_from_json(*span, epath + ".span");
      std::filesystem::path wav = seg.wav_path;
      if (wav.is_relative()) wav = base_dir / wav;
      auto it = cache.find(wav.string());
      if (it == cache.end()) it = cache.emplace(wav.string(), read_wav_file(wav.string())).first;
      seg.audio = extract_segment(it->second, seg.span.start, seg.span.end);
      if (const json* ph = detail::optional_field(e, "phones")) {
        for (auto u : detail::units_from_json(*ph, epath + ".phones")) {
          u.start = quantize_time(u.start - seg.span.start);
          u.end = quantize_time(u.end - seg.span.start);
          seg.phones.push_back(std::move(u));
        }
      }
      lib.add(token, std::move(seg));
    }
  }
  return lib;
}

inline json emit_donor_manifest(const DonorLibrary& lib) {
  json doc = json::object();
  for (const auto& [token, segments] : lib.entries()) {
    json arr = json::array();
    for (const auto& s : segments) {
      json e;
      e["utterance"] = s.utterance;
      e["wav"] = s.wav_path;
      e["span"] = json::array({quantize_time(s.span.start), quantize_time(s.span.end)});
      if (!s.phones.empty()) {
        std::vector<TimedUnit> absolute = s.phones;
        for (auto& u : absolute) {
          u.start = quantize_time(u.start + s.span.start);
          u.end = quantize_time(u.end + s.span.start);
        }
        e["phones"] = detail::units_to_json(absolute);
      }
      arr.push_back(std::move(e));
    }
    doc[token] = std::move(arr);
  }
  return doc;
}

/// Library of word segments (and, when `include_phones`, phone segments)
/// cut from a transcribed utterance.
inline void add_transcript_donors(DonorLibrary& lib, const Waveform& audio, const Transcript& t,
                                  const std::string& wav_path, bool include_phones = true) {
  if (!t.words) return;
  for (const auto& w : *t.words) {
    if (w.word.is_silence() || to_micros(w.word.end) <= to_micros(w.word.start)) continue;
    DonorSegment seg;
    seg.utterance = t.utterance_id;
    seg.wav_path = wav_path;
    seg.span = {w.word.start, w.word.end};
    seg.audio = extract_segment(audio, w.word.start, w.word.end);
    if (seg.audio.empty()) continue;
    for (auto u : w.phones) {
      u.start = quantize_time(u.start - w.word.start);
      u.end = quantize_time(u.end - w.word.start);
      seg.phones.push_back(std::move(u));
    }
    std::string key;
    for (char c : w.word.label) key.push_back(detail::ascii_lower(c));
    lib.add(key, std::move(seg));
    if (!include_phones) continue;
    for (const auto& p : w.phones) {
      if (p.is_silence() || to_micros(p.end) <= to_micros(p.start)) continue;
      DonorSegment ps;
      ps.utterance = t.utterance_id;
      ps.wav_path = wav_path;
      ps.span = {p.start, p.end};
      ps.audio = extract_segment(audio, p.start, p.end);
      if (ps.audio.empty()) continue;
      lib.add(p.label, std::move(ps));
    }
  }
}

}  // namespace correctspeech
