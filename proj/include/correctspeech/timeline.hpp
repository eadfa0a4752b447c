#pragma once

// Timed transcripts: the interchange format between recognizers, the edit
// planner, the perturbation tool and the metrics.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "correctspeech/error.hpp"
#include "correctspeech/lexicon.hpp"

namespace correctspeech {

using json = nlohmann::json;

/// Times are kept in seconds but snapped to whole microseconds so that
/// equality is exact after a JSON round trip.
inline std::int64_t to_micros(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * 1e6));
}

inline double from_micros(std::int64_t us) { return static_cast<double>(us) / 1e6; }

inline double quantize_time(double seconds) { return from_micros(to_micros(seconds)); }

struct TimedUnit {
  std::string label;
  double start = 0.0;
  double end = 0.0;

  double duration() const { return end - start; }
  bool is_silence() const { return label == kSilenceLabel; }

  friend bool operator==(const TimedUnit& a, const TimedUnit& b) {
    return a.label == b.label && to_micros(a.start) == to_micros(b.start) &&
           to_micros(a.end) == to_micros(b.end);
  }
};

struct TimedWord {
  TimedUnit word;
  std::vector<TimedUnit> phones;  // empty means "no phone tier for this word"

  friend bool operator==(const TimedWord&, const TimedWord&) = default;
};

enum class TranscriptSource { kForced, kCtc, kOracle };

inline std::string_view to_string(TranscriptSource s) {
  switch (s) {
    case TranscriptSource::kForced: return "forced";
    case TranscriptSource::kCtc: return "ctc";
    case TranscriptSource::kOracle: return "oracle";
  }
  return "forced";
}

inline std::optional<TranscriptSource> parse_source(std::string_view s) {
  if (s == "forced") return TranscriptSource::kForced;
  if (s == "ctc") return TranscriptSource::kCtc;
  if (s == "oracle") return TranscriptSource::kOracle;
  return std::nullopt;
}

struct Transcript {
  std::string utterance_id;
  TranscriptSource source = TranscriptSource::kForced;
  std::optional<std::vector<TimedWord>> words;
  std::optional<std::vector<TimedUnit>> phones;
  std::optional<double> frame_rate;

  bool has_word_tier() const { return words.has_value(); }

  double end_time() const {
    double t = 0.0;
    if (words && !words->empty()) t = std::max(t, words->back().word.end);
    if (phones && !phones->empty()) t = std::max(t, phones->back().end);
    return t;
  }

  friend bool operator==(const Transcript& a, const Transcript& b) {
    auto rate_eq = [](const std::optional<double>& x, const std::optional<double>& y) {
      if (x.has_value() != y.has_value()) return false;
      return !x || to_micros(*x) == to_micros(*y);
    };
    return a.utterance_id == b.utterance_id && a.source == b.source && a.words == b.words &&
           a.phones == b.phones && rate_eq(a.frame_rate, b.frame_rate);
  }
};

namespace detail {

inline Error invariant(const std::string& what) {
  return input_error("InvariantViolation", what);
}

inline void check_sequence(const std::vector<TimedUnit>& units, const std::string& where) {
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& u = units[i];
    if (u.label.empty()) throw invariant(where + "[" + std::to_string(i) + "]: empty label");
    if (to_micros(u.start) < 0) throw invariant(where + "[" + std::to_string(i) + "]: negative start");
    if (to_micros(u.end) < to_micros(u.start)) {
      throw invariant(where + "[" + std::to_string(i) + "]: end < start");
    }
    if (i > 0 && to_micros(units[i - 1].end) > to_micros(u.start)) {
      throw invariant(where + "[" + std::to_string(i) + "]: overlaps previous unit");
    }
  }
}

inline void check_phone_labels(const std::vector<TimedUnit>& units, const std::string& where) {
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (!units[i].is_silence() && !is_phone_label(units[i].label)) {
      throw invariant(where + "[" + std::to_string(i) + "]: '" + units[i].label +
                      "' is not a phone");
    }
  }
}

}  // namespace detail

inline std::vector<TimedUnit> word_units(const std::vector<TimedWord>& words) {
  std::vector<TimedUnit> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(w.word);
  return out;
}

inline std::vector<TimedUnit> concat_word_phones(const std::vector<TimedWord>& words) {
  std::vector<TimedUnit> out;
  for (const auto& w : words) out.insert(out.end(), w.phones.begin(), w.phones.end());
  return out;
}

/// Throws InvariantViolation describing the first broken invariant.
inline void validate(const Transcript& t) {
  if (!t.words && !t.phones) throw detail::invariant("transcript has neither words nor phones");
  if (t.source == TranscriptSource::kCtc && t.words) {
    throw detail::invariant("ctc transcripts carry phones only");
  }
  if (t.frame_rate && !(*t.frame_rate > 0.0)) throw detail::invariant("frame_rate must be > 0");
  if (t.words) {
    detail::check_sequence(word_units(*t.words), "words");
    for (std::size_t i = 0; i < t.words->size(); ++i) {
      const auto& w = (*t.words)[i];
      const std::string where = "words[" + std::to_string(i) + "].phones";
      if (w.phones.empty()) continue;
      detail::check_sequence(w.phones, where);
      detail::check_phone_labels(w.phones, where);
      if (to_micros(w.phones.front().start) != to_micros(w.word.start) ||
          to_micros(w.phones.back().end) != to_micros(w.word.end)) {
        throw detail::invariant(where + ": phones do not span the word");
      }
    }
    detail::check_sequence(concat_word_phones(*t.words), "words[*].phones");
  }
  if (t.phones) {
    detail::check_sequence(*t.phones, "phones");
    detail::check_phone_labels(*t.phones, "phones");
  }
  if (t.words && t.phones && concat_word_phones(*t.words) != *t.phones) {
    throw detail::invariant("word-level phones differ from the phone list");
  }
}

/// Phone tier, taken from the flat list or rebuilt from the word tier.
inline std::vector<TimedUnit> phone_sequence(const Transcript& t) {
  if (t.phones) return *t.phones;
  if (t.words) {
    auto out = concat_word_phones(*t.words);
    if (!out.empty() || t.words->empty()) return out;
  }
  throw input_error("NoPhones", "transcript '" + t.utterance_id + "' has no phone tier");
}

inline std::vector<TimedUnit> without_silence(const std::vector<TimedUnit>& units) {
  std::vector<TimedUnit> out;
  out.reserve(units.size());
  for (const auto& u : units) {
    if (!u.is_silence()) out.push_back(u);
  }
  return out;
}

// JSON ----------------------------------------------------------------------

namespace detail {

inline Error schema(const std::string& path, const std::string& what) {
  return input_error("SchemaError", path + ": " + what);
}

inline double number_at(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw schema(path + "." + key, "expected number");
  return it->get<double>();
}

inline std::string string_at(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) throw schema(path + "." + key, "expected string");
  return it->get<std::string>();
}

inline TimedUnit unit_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw schema(path, "expected object");
  TimedUnit u;
  u.label = string_at(j, "label", path);
  u.start = quantize_time(number_at(j, "start", path));
  u.end = quantize_time(number_at(j, "end", path));
  return u;
}

inline std::vector<TimedUnit> units_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw schema(path, "expected array");
  std::vector<TimedUnit> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(unit_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline json unit_to_json(const TimedUnit& u) {
  return json{{"label", u.label}, {"start", quantize_time(u.start)}, {"end", quantize_time(u.end)}};
}

inline json units_to_json(const std::vector<TimedUnit>& units) {
  json arr = json::array();
  for (const auto& u : units) arr.push_back(unit_to_json(u));
  return arr;
}

// Missing keys and explicit nulls are treated alike.
inline const json* optional_field(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

}  // namespace detail

inline Transcript parse_transcript(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw schema("$", "expected object");
  Transcript t;
  t.utterance_id = string_at(doc, "utterance_id", "$");
  auto source = parse_source(string_at(doc, "source", "$"));
  if (!source) throw schema("$.source", "expected forced|ctc|oracle");
  t.source = *source;
  if (const json* fr = optional_field(doc, "frame_rate")) {
    if (!fr->is_number()) throw schema("$.frame_rate", "expected number or null");
    t.frame_rate = fr->get<double>();
  }
  if (const json* words = optional_field(doc, "words")) {
    if (!words->is_array()) throw schema("$.words", "expected array or null");
    std::vector<TimedWord> parsed;
    for (std::size_t i = 0; i < words->size(); ++i) {
      const std::string path = "$.words[" + std::to_string(i) + "]";
      TimedWord w;
      w.word = unit_from_json((*words)[i], path);
      if (const json* ph = optional_field((*words)[i], "phones")) {
        w.phones = units_from_json(*ph, path + ".phones");
        if (w.phones.empty()) throw invariant(path + ".phones: empty list (use null)");
      }
      parsed.push_back(std::move(w));
    }
    t.words = std::move(parsed);
  }
  if (const json* phones = optional_field(doc, "phones")) {
    t.phones = units_from_json(*phones, "$.phones");
  }
  validate(t);
  return t;
}

inline Transcript parse_transcript(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw input_error("SchemaError", std::string("invalid JSON: ") + e.what());
  }
  return parse_transcript(doc);
}

inline json emit_transcript(const Transcript& t) {
  using namespace detail;
  json doc;
  doc["utterance_id"] = t.utterance_id;
  doc["source"] = std::string(to_string(t.source));
  doc["frame_rate"] = t.frame_rate ? json(quantize_time(*t.frame_rate)) : json(nullptr);
  if (t.words) {
    json arr = json::array();
    for (const auto& w : *t.words) {
      json jw = unit_to_json(w.word);
      jw["phones"] = w.phones.empty() ? json(nullptr) : units_to_json(w.phones);
      arr.push_back(std::move(jw));
    }
    doc["words"] = std::move(arr);
  } else {
    doc["words"] = nullptr;
  }
  doc["phones"] = t.phones ? units_to_json(*t.phones) : json(nullptr);
  return doc;
}

}  // namespace correctspeech
