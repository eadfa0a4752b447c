#pragma once

// Edit planning: align a recognized transcript with the target text and
// project the alignment onto time-stamped edit regions. Three correction
// methods are supported:
//
//   phone-phone  phone-level alignment, phone-level edits
//   word-word    word-level alignment, word-level edits
//   word-phone   phone-level alignment, word-level edits (a target word is
//                kept only if every one of its phones aligned unchanged)

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "correctspeech/error.hpp"
#include "correctspeech/lexicon.hpp"
#include "correctspeech/seqalign.hpp"
#include "correctspeech/timeline.hpp"

namespace correctspeech {

enum class CorrectionMethod { kPhonePhone, kWordWord, kWordPhone };
enum class Granularity { kWord, kPhone };

inline std::string_view to_string(CorrectionMethod m) {
  switch (m) {
    case CorrectionMethod::kPhonePhone: return "phone-phone";
    case CorrectionMethod::kWordWord: return "word-word";
    case CorrectionMethod::kWordPhone: return "word-phone";
  }
  return "word-word";
}

inline std::optional<CorrectionMethod> parse_method(std::string_view s) {
  if (s == "phone-phone") return CorrectionMethod::kPhonePhone;
  if (s == "word-word") return CorrectionMethod::kWordWord;
  if (s == "word-phone") return CorrectionMethod::kWordPhone;
  return std::nullopt;
}

inline std::string_view to_string(Granularity g) {
  return g == Granularity::kWord ? "word" : "phone";
}

inline Granularity granularity_of(CorrectionMethod m) {
  return m == CorrectionMethod::kPhonePhone ? Granularity::kPhone : Granularity::kWord;
}

struct TimeSpan {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }

  friend bool operator==(const TimeSpan& a, const TimeSpan& b) {
    return to_micros(a.start) == to_micros(b.start) && to_micros(a.end) == to_micros(b.end);
  }
};

struct EditRegion {
  EditOp op = EditOp::kReplace;        // never kUnchange
  std::optional<TimeSpan> orig_span;   // replace / delete
  std::optional<double> anchor;        // insert
  std::vector<std::string> target_tokens;

  double position() const { return orig_span ? orig_span->start : anchor.value_or(0.0); }

  friend bool operator==(const EditRegion& a, const EditRegion& b) {
    auto anchor_eq = [](const std::optional<double>& x, const std::optional<double>& y) {
      if (x.has_value() != y.has_value()) return false;
      return !x || to_micros(*x) == to_micros(*y);
    };
    return a.op == b.op && a.orig_span == b.orig_span && anchor_eq(a.anchor, b.anchor) &&
           a.target_tokens == b.target_tokens;
  }
};

struct EditPlan {
  std::string utterance_id;
  CorrectionMethod method = CorrectionMethod::kWordWord;
  Granularity granularity = Granularity::kWord;
  std::vector<EditRegion> regions;
  std::vector<TimeSpan> unchanged_spans;

  double duration() const {
    double d = 0.0;
    for (const auto& s : unchanged_spans) d = std::max(d, s.end);
    for (const auto& r : regions) {
      if (r.orig_span) d = std::max(d, r.orig_span->end);
    }
    return d;
  }

  friend bool operator==(const EditPlan&, const EditPlan&) = default;
};

/// Per-target-word outcome of the word-phone method.
struct WordDecision {
  std::string word;
  EditOp op = EditOp::kUnchange;

  friend bool operator==(const WordDecision&, const WordDecision&) = default;
};

namespace detail {

// One position in the projected alignment: which hyp units (words or
// phones, by index) and which target tokens it covers.
struct PlanStep {
  std::vector<std::size_t> hyp_units;
  std::vector<std::size_t> targets;
  bool changed = false;
};

inline std::vector<std::string> lowercase_labels(const std::vector<TimedUnit>& units) {
  std::vector<std::string> out;
  out.reserve(units.size());
  for (const auto& u : units) {
    std::string s;
    for (char c : u.label) s.push_back(ascii_lower(c));
    out.push_back(std::move(s));
  }
  return out;
}

inline double resolve_duration(std::optional<double> duration, double content_end) {
  if (!duration) return content_end;
  if (to_micros(*duration) < to_micros(content_end)) {
    throw input_error("SpanOutOfRange", "utterance duration " + std::to_string(*duration) +
                                            " s ends before the transcript (" +
                                            std::to_string(content_end) + " s)");
  }
  return *duration;
}

inline std::vector<TimeSpan> complement_spans(const std::vector<EditRegion>& regions,
                                              double duration) {
  std::vector<TimeSpan> out;
  std::int64_t cursor = 0;
  const std::int64_t end_us = to_micros(duration);
  for (const auto& r : regions) {
    if (!r.orig_span) continue;
    const auto s = to_micros(r.orig_span->start);
    if (s > cursor) out.push_back({from_micros(cursor), from_micros(s)});
    cursor = std::max(cursor, to_micros(r.orig_span->end));
  }
  if (end_us > cursor) out.push_back({from_micros(cursor), from_micros(end_us)});
  return out;
}

// Adjacent changed steps merge into one region.
inline EditPlan build_plan(const std::vector<PlanStep>& steps, const std::vector<TimedUnit>& units,
                           const std::vector<std::string>& target_tokens, double duration) {
  EditPlan plan;
  std::size_t k = 0;
  std::optional<std::size_t> last_unit;  // last hyp unit consumed before step k
  while (k < steps.size()) {
    if (!steps[k].changed) {
      if (!steps[k].hyp_units.empty()) last_unit = steps[k].hyp_units.back();
      ++k;
      continue;
    }
    std::vector<std::size_t> hyp;
    std::vector<std::string> tokens;
    while (k < steps.size() && steps[k].changed) {
      hyp.insert(hyp.end(), steps[k].hyp_units.begin(), steps[k].hyp_units.end());
      for (auto t : steps[k].targets) tokens.push_back(target_tokens[t]);
      ++k;
    }
    EditRegion region;
    region.target_tokens = std::move(tokens);
    if (!hyp.empty()) {
      const auto [lo, hi] = std::minmax_element(hyp.begin(), hyp.end());
      region.orig_span = TimeSpan{quantize_time(units[*lo].start), quantize_time(units[*hi].end)};
      region.op = region.target_tokens.empty() ? EditOp::kDelete : EditOp::kReplace;
      last_unit = *hi;
    } else {
      const double before = last_unit ? units[*last_unit].end : 0.0;
      double after = duration;
      for (std::size_t n = k; n < steps.size(); ++n) {
        if (!steps[n].hyp_units.empty()) {
          after = units[steps[n].hyp_units.front()].start;
          break;
        }
      }
      region.op = EditOp::kInsert;
      region.anchor = quantize_time((before + after) / 2.0);
    }
    plan.regions.push_back(std::move(region));
  }
  plan.unchanged_spans = complement_spans(plan.regions, duration);
  return plan;
}

inline std::vector<PlanStep> steps_from_alignment(const Alignment& a) {
  std::vector<PlanStep> steps;
  steps.reserve(a.pairs.size());
  for (const auto& p : a.pairs) {
    PlanStep s;
    if (p.hyp_index) s.hyp_units.push_back(*p.hyp_index);
    if (p.ref_index) s.targets.push_back(*p.ref_index);
    s.changed = p.op != EditOp::kUnchange;
    steps.push_back(std::move(s));
  }
  return steps;
}

inline std::vector<Phone> parse_unit_phones(const std::vector<TimedUnit>& units) {
  std::vector<Phone> out;
  out.reserve(units.size());
  for (const auto& u : units) out.push_back(Phone::from_string(u.label));
  return out;
}

}  // namespace detail

/// Word-level alignment of the hyp word tier against the target words.
inline EditPlan plan_word_word(const Transcript& hyp, const std::vector<WordToken>& target,
                               std::optional<double> duration = std::nullopt) {
  if (hyp.source == TranscriptSource::kCtc) {
    throw input_error("NotApplicable", "word-word correction needs a word tier; ctc "
                                       "transcripts only carry phones");
  }
  if (!hyp.words) {
    throw input_error("NoWordTier", "transcript '" + hyp.utterance_id + "' has no words");
  }
  const double total = detail::resolve_duration(duration, hyp.end_time());
  const auto units = without_silence(word_units(*hyp.words));
  const auto hyp_labels = detail::lowercase_labels(units);
  const auto target_labels = token_texts(target);
  const auto alignment = align(hyp_labels, target_labels);
  auto plan = detail::build_plan(detail::steps_from_alignment(alignment), units, target_labels,
                                 total);
  plan.utterance_id = hyp.utterance_id;
  plan.method = CorrectionMethod::kWordWord;
  plan.granularity = Granularity::kWord;
  return plan;
}

/// Phone-level alignment (stress-sensitive) with phone-level edits.
inline EditPlan plan_phone_phone(const std::vector<TimedUnit>& hyp_phones,
                                 const std::vector<Phone>& target,
                                 std::optional<double> duration = std::nullopt,
                                 std::string utterance_id = {}) {
  const auto units = without_silence(hyp_phones);
  const double content_end = hyp_phones.empty() ? 0.0 : hyp_phones.back().end;
  const double total = detail::resolve_duration(duration, content_end);
  const auto alignment = align(detail::parse_unit_phones(units), target);
  auto plan = detail::build_plan(detail::steps_from_alignment(alignment), units,
                                 phone_labels(target), total);
  plan.utterance_id = std::move(utterance_id);
  plan.method = CorrectionMethod::kPhonePhone;
  plan.granularity = Granularity::kPhone;
  return plan;
}

inline EditPlan plan_phone_phone(const Transcript& hyp, const std::vector<Phone>& target,
                                 std::optional<double> duration = std::nullopt) {
  const double total = detail::resolve_duration(duration, hyp.end_time());
  return plan_phone_phone(phone_sequence(hyp), target, total, hyp.utterance_id);
}

namespace detail {

// Shared analysis behind plan_word_phone and word_phone_decisions.
struct WordPhoneAnalysis {
  std::vector<TimedUnit> units;            // hyp words, or hyp phones without a word tier
  std::vector<PlanStep> steps;             // one per connected component
  std::vector<WordDecision> decisions;     // one per target word
};

inline WordPhoneAnalysis analyze_word_phone(const Transcript& hyp,
                                            const std::vector<WordToken>& target,
                                            const PronunciationDict& dict) {
  WordPhoneAnalysis out;

  // Hyp phones and the hyp unit each phone belongs to.
  std::vector<TimedUnit> hyp_phones;
  std::vector<std::size_t> unit_of_phone;
  if (hyp.words) {
    for (const auto& w : *hyp.words) {
      if (w.word.is_silence()) continue;
      const auto phones = without_silence(w.phones);
      if (phones.empty()) {
        throw input_error("NoPhones", "word '" + w.word.label + "' in '" + hyp.utterance_id +
                                          "' has no phones");
      }
      for (const auto& p : phones) {
        hyp_phones.push_back(p);
        unit_of_phone.push_back(out.units.size());
      }
      out.units.push_back(w.word);
    }
  } else {
    hyp_phones = without_silence(phone_sequence(hyp));
    out.units = hyp_phones;
    for (std::size_t i = 0; i < hyp_phones.size(); ++i) unit_of_phone.push_back(i);
  }

  std::vector<Phone> target_phones;
  std::vector<std::size_t> word_of_phone;
  for (std::size_t w = 0; w < target.size(); ++w) {
    for (const auto& p : lookup(dict, target[w])) {
      target_phones.push_back(p);
      word_of_phone.push_back(w);
    }
  }

  const auto alignment = align(parse_unit_phones(hyp_phones), target_phones);

  // Atoms: the alignment slice of each target word (first to last pair
  // touching it, deletes in between included) and stray deletes between
  // word slices.
  struct Atom {
    std::vector<std::size_t> units;
    std::vector<std::size_t> words;
    bool changed = false;
  };
  std::vector<Atom> atoms;
  std::vector<AlignedPair> pending;  // deletes not yet attributed to a word
  auto add_pair = [&](Atom& atom, const AlignedPair& p) {
    if (p.hyp_index) atom.units.push_back(unit_of_phone[*p.hyp_index]);
    if (p.op != EditOp::kUnchange) atom.changed = true;
  };
  auto flush_orphans = [&] {
    for (const auto& p : pending) {
      Atom a;
      add_pair(a, p);
      atoms.push_back(std::move(a));
    }
    pending.clear();
  };
  for (const auto& p : alignment.pairs) {
    if (!p.ref_index) {
      pending.push_back(p);
      continue;
    }
    const std::size_t w = word_of_phone[*p.ref_index];
    if (!atoms.empty() && atoms.back().words == std::vector<std::size_t>{w}) {
      for (const auto& d : pending) add_pair(atoms.back(), d);
      pending.clear();
    } else {
      flush_orphans();
      atoms.push_back(Atom{{}, {w}, false});
    }
    add_pair(atoms.back(), p);
  }
  flush_orphans();

  out.decisions.reserve(target.size());
  for (const auto& a : atoms) {
    if (a.words.empty()) continue;
    EditOp op = EditOp::kUnchange;
    if (a.changed) op = a.units.empty() ? EditOp::kInsert : EditOp::kReplace;
    out.decisions.push_back({target[a.words.front()].text(), op});
  }

  // Atoms sharing a hyp unit cannot be edited separately at word
  // granularity; fold them, and any insert-only atoms between them, into
  // one component.
  auto merge_into = [](Atom& dst, const Atom& src) {
    dst.units.insert(dst.units.end(), src.units.begin(), src.units.end());
    dst.words.insert(dst.words.end(), src.words.begin(), src.words.end());
    dst.changed = dst.changed || src.changed;
  };
  std::vector<Atom> components;
  std::vector<Atom> waiting;  // insert-only atoms after the last component
  for (const auto& a : atoms) {
    if (a.units.empty()) {
      waiting.push_back(a);
      continue;
    }
    const bool shares =
        !components.empty() && !components.back().units.empty() &&
        *std::min_element(a.units.begin(), a.units.end()) <=
            *std::max_element(components.back().units.begin(), components.back().units.end());
    if (shares) {
      for (const auto& w : waiting) merge_into(components.back(), w);
      merge_into(components.back(), a);
    } else {
      components.insert(components.end(), waiting.begin(), waiting.end());
      components.push_back(a);
    }
    waiting.clear();
  }
  components.insert(components.end(), waiting.begin(), waiting.end());

  out.steps.reserve(components.size());
  for (const auto& c : components) {
    PlanStep s;
    std::set<std::size_t> uniq(c.units.begin(), c.units.end());
    s.hyp_units.assign(uniq.begin(), uniq.end());
    s.targets = c.words;
    s.changed = c.changed;
    out.steps.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

/// Per-word unchange/replace/insert decisions of the word-phone method.
inline std::vector<WordDecision> word_phone_decisions(const Transcript& hyp,
                                                      const std::vector<WordToken>& target,
                                                      const PronunciationDict& dict) {
  return detail::analyze_word_phone(hyp, target, dict).decisions;
}

/// Phone-level alignment, word-level edits. Hyp words come from the word
/// tier when present; otherwise each hyp phone is its own unit and word
/// regions take the union span of the phones aligned to them.
inline EditPlan plan_word_phone(const Transcript& hyp, const std::vector<WordToken>& target,
                                const PronunciationDict& dict,
                                std::optional<double> duration = std::nullopt) {
  const double total = detail::resolve_duration(duration, hyp.end_time());
  auto analysis = detail::analyze_word_phone(hyp, target, dict);
  auto plan = detail::build_plan(analysis.steps, analysis.units, token_texts(target), total);
  plan.utterance_id = hyp.utterance_id;
  plan.method = CorrectionMethod::kWordPhone;
  plan.granularity = Granularity::kWord;
  return plan;
}

inline EditPlan make_plan(CorrectionMethod method, const Transcript& hyp,
                          const std::vector<WordToken>& target, const PronunciationDict* dict,
                          std::optional<double> duration = std::nullopt) {
  auto need_dict = [&]() -> const PronunciationDict& {
    if (dict == nullptr) {
      throw input_error("MissingDictionary",
                        std::string(to_string(method)) + " needs a pronunciation dictionary");
    }
    return *dict;
  };
  switch (method) {
    case CorrectionMethod::kWordWord:
      return plan_word_word(hyp, target, duration);
    case CorrectionMethod::kWordPhone:
      return plan_word_phone(hyp, target, need_dict(), duration);
    case CorrectionMethod::kPhonePhone: {
      std::vector<Phone> phones;
      for (const auto& w : target) {
        const auto& p = lookup(need_dict(), w);
        phones.insert(phones.end(), p.begin(), p.end());
      }
      return plan_phone_phone(hyp, phones, duration);
    }
  }
  throw input_error("UnknownMethod", "unknown correction method");
}

// Validation and JSON ---------------------------------------------------------

/// Regions must be sorted and disjoint, and together with the unchanged
/// spans tile [0, duration] with no gaps.
inline void validate(const EditPlan& plan) {
  auto bad = [](const std::string& what) { return input_error("InvariantViolation", what); };
  std::vector<TimeSpan> tiles = plan.unchanged_spans;
  std::int64_t last_pos = -1;
  for (std::size_t i = 0; i < plan.regions.size(); ++i) {
    const auto& r = plan.regions[i];
    const std::string where = "regions[" + std::to_string(i) + "]";
    switch (r.op) {
      case EditOp::kUnchange:
        throw bad(where + ": unchange is not an edit");
      case EditOp::kInsert:
        if (!r.anchor || r.orig_span) throw bad(where + ": insert needs an anchor and no span");
        if (r.target_tokens.empty()) throw bad(where + ": insert without tokens");
        break;
      case EditOp::kReplace:
        if (!r.orig_span || r.anchor) throw bad(where + ": replace needs a span");
        if (r.target_tokens.empty()) throw bad(where + ": replace without tokens");
        break;
      case EditOp::kDelete:
        if (!r.orig_span || r.anchor) throw bad(where + ": delete needs a span");
        if (!r.target_tokens.empty()) throw bad(where + ": delete carries tokens");
        break;
    }
    if (r.orig_span) {
      if (to_micros(r.orig_span->end) < to_micros(r.orig_span->start)) {
        throw bad(where + ": span end < start");
      }
      tiles.push_back(*r.orig_span);
    }
    const auto pos = to_micros(r.position());
    if (pos < last_pos) throw bad(where + ": regions out of order");
    last_pos = r.orig_span ? to_micros(r.orig_span->end) : pos;
  }
  std::sort(tiles.begin(), tiles.end(), [](const TimeSpan& a, const TimeSpan& b) {
    return to_micros(a.start) < to_micros(b.start);
  });
  std::int64_t cursor = 0;
  for (const auto& t : tiles) {
    if (to_micros(t.start) != cursor) throw bad("spans do not tile the utterance");
    cursor = to_micros(t.end);
  }
  for (const auto& r : plan.regions) {
    if (r.anchor && (to_micros(*r.anchor) < 0 || to_micros(*r.anchor) > cursor)) {
      throw bad("insert anchor outside the utterance");
    }
  }
}

inline json emit_plan(const EditPlan& plan) {
  json doc;
  doc["utterance_id"] = plan.utterance_id;
  doc["method"] = std::string(to_string(plan.method));
  doc["granularity"] = std::string(to_string(plan.granularity));
  json regions = json::array();
  for (const auto& r : plan.regions) {
    json jr;
    jr["op"] = std::string(to_string(r.op));
    jr["orig_span"] = r.orig_span ? json::array({quantize_time(r.orig_span->start),
                                                 quantize_time(r.orig_span->end)})
                                  : json(nullptr);
    jr["anchor"] = r.anchor ? json(quantize_time(*r.anchor)) : json(nullptr);
    jr["target_tokens"] = r.target_tokens;
    regions.push_back(std::move(jr));
  }
  doc["regions"] = std::move(regions);
  json spans = json::array();
  for (const auto& s : plan.unchanged_spans) {
    spans.push_back(json::array({quantize_time(s.start), quantize_time(s.end)}));
  }
  doc["unchanged_spans"] = std::move(spans);
  return doc;
}

namespace detail {

inline TimeSpan span_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw schema(path, "expected [start, end]");
  }
  return {quantize_time(j[0].get<double>()), quantize_time(j[1].get<double>())};
}

}  // namespace detail

inline EditPlan parse_plan(const json& doc) {
  using detail::schema;
  if (!doc.is_object()) throw schema("$", "expected object");
  EditPlan plan;
  plan.utterance_id = detail::string_at(doc, "utterance_id", "$");
  auto method = parse_method(detail::string_at(doc, "method", "$"));
  if (!method) throw schema("$.method", "expected phone-phone|word-word|word-phone");
  plan.method = *method;
  const auto gran = detail::string_at(doc, "granularity", "$");
  if (gran == "word") {
    plan.granularity = Granularity::kWord;
  } else if (gran == "phone") {
    plan.granularity = Granularity::kPhone;
  } else {
    throw schema("$.granularity", "expected word|phone");
  }
  auto regions = doc.find("regions");
  if (regions == doc.end() || !regions->is_array()) throw schema("$.regions", "expected array");
  for (std::size_t i = 0; i < regions->size(); ++i) {
    const auto& jr = (*regions)[i];
    const std::string path = "$.regions[" + std::to_string(i) + "]";
    if (!jr.is_object()) throw schema(path, "expected object");
    EditRegion r;
    const auto op = detail::string_at(jr, "op", path);
    if (op == "insert") {
      r.op = EditOp::kInsert;
    } else if (op == "replace") {
      r.op = EditOp::kReplace;
    } else if (op == "delete") {
      r.op = EditOp::kDelete;
    } else {
      throw schema(path + ".op", "expected insert|replace|delete");
    }
    if (const json* s = detail::optional_field(jr, "orig_span")) {
      r.orig_span = detail::span_from_json(*s, path + ".orig_span");
    }
    if (const json* a = detail::optional_field(jr, "anchor")) {
      if (!a->is_number()) throw schema(path + ".anchor", "expected number or null");
      r.anchor = quantize_time(a->get<double>());
    }
    auto tokens = jr.find("target_tokens");
    if (tokens == jr.end() || !tokens->is_array()) {
      throw schema(path + ".target_tokens", "expected array");
    }
    for (const auto& t : *tokens) {
      if (!t.is_string()) throw schema(path + ".target_tokens", "expected strings");
      r.target_tokens.push_back(t.get<std::string>());
    }
    plan.regions.push_back(std::move(r));
  }
  auto spans = doc.find("unchanged_spans");
  if (spans == doc.end() || !spans->is_array()) {
    throw schema("$.unchanged_spans", "expected array");
  }
  for (std::size_t i = 0; i < spans->size(); ++i) {
    plan.unchanged_spans.push_back(
        detail::span_from_json((*spans)[i], "$.unchanged_spans[" + std::to_string(i) + "]"));
  }
  validate(plan);
  return plan;
}

}  // namespace correctspeech
