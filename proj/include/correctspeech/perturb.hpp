#pragma once

// Synthetic mispronunciation corpus construction: every word independently
// gets one categorical draw over {keep, insert-after, replace, delete}, and
// edits use same-speaker donor words from other utterances. Alongside the
// perturbed audio we keep the exact ground truth: what was done (the
// record) and what the new audio contains (the oracle transcript).

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "correctspeech/audio.hpp"
#include "correctspeech/error.hpp"
#include "correctspeech/seeding.hpp"
#include "correctspeech/splice.hpp"
#include "correctspeech/timeline.hpp"

namespace correctspeech {

struct PerturbConfig {
  double p_insert = 0.05;
  double p_replace = 0.05;
  double p_delete = 0.05;
  std::uint64_t seed = 0;
  SpliceConfig splice;

  void validate() const {
    if (p_insert < 0.0 || p_replace < 0.0 || p_delete < 0.0 ||
        p_insert + p_replace + p_delete > 1.0 + 1e-12) {
      throw input_error("InvalidConfig", "perturbation probabilities must be >= 0 and sum to <= 1");
    }
  }
};

enum class PerturbKind { kInsert, kReplace, kDelete };

inline std::string_view to_string(PerturbKind k) {
  switch (k) {
    case PerturbKind::kInsert: return "insert";
    case PerturbKind::kReplace: return "replace";
    case PerturbKind::kDelete: return "delete";
  }
  return "insert";
}

struct PerturbOp {
  PerturbKind kind = PerturbKind::kInsert;
  std::size_t word_index = 0;       // index into the original word list
  std::string original_word;
  std::string donor_word;           // empty for deletes
  std::string donor_utterance;
  std::optional<TimeSpan> donor_span;
  TimeSpan result_span;             // in the perturbed audio; a point for deletes

  friend bool operator==(const PerturbOp&, const PerturbOp&) = default;
};

struct PerturbationRecord {
  std::string utterance_id;
  std::vector<PerturbOp> ops;

  friend bool operator==(const PerturbationRecord&, const PerturbationRecord&) = default;
};

struct PerturbResult {
  Waveform audio;
  PerturbationRecord record;
  Transcript oracle;
};

/// Seed used for one utterance: independent of processing order.
inline std::uint64_t utterance_seed(std::uint64_t seed, std::string_view utterance_id) {
  return mix_seed(seed, stable_hash(utterance_id));
}

namespace detail {

struct DonorChoice {
  std::string token;
  const DonorSegment* segment = nullptr;
};

// Word donors (phone-label tokens skipped) not taken from `exclude_utt`.
inline std::vector<DonorChoice> word_donor_pool(const DonorLibrary& donors,
                                                const std::string& exclude_utt) {
  std::vector<DonorChoice> pool;
  for (const auto& [token, segments] : donors.entries()) {
    if (is_phone_label(token)) continue;
    for (const auto& s : segments) {
      if (s.utterance != exclude_utt) pool.push_back({token, &s});
    }
  }
  return pool;
}

// Maps times of one splice piece into the output, clamped to the range the
// piece owns after crossfade zones are split at their midpoints.
struct PieceMap {
  double offset = 0.0;  // output time of the piece's first sample minus source time
  TimeSpan owned;

  double operator()(double t) const {
    return quantize_time(std::clamp(t + offset, owned.start, owned.end));
  }
};

inline TimedUnit map_unit(const TimedUnit& u, const PieceMap& m) {
  return {u.label, m(u.start), m(u.end)};
}

}  // namespace detail

inline PerturbResult perturb_utterance(const Waveform& orig, const std::string& utterance_id,
                                       const std::vector<TimedWord>& words,
                                       const DonorLibrary& donors, const PerturbConfig& cfg) {
  cfg.validate();
  std::size_t spoken = 0;
  for (const auto& w : words) spoken += w.word.is_silence() ? 0 : 1;
  if (spoken == 0) {
    throw input_error("EmptyUtterance", "utterance '" + utterance_id + "' has no words");
  }
  const int sr = orig.sample_rate;
  std::mt19937_64 rng(utterance_seed(cfg.seed, utterance_id));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto pool = detail::word_donor_pool(donors, utterance_id);

  auto draw_donor = [&](const std::string& avoid) -> const detail::DonorChoice& {
    std::vector<std::size_t> allowed;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].token != avoid) allowed.push_back(i);
    }
    if (allowed.empty()) {
      throw processing_error("MissingDonor", "no same-speaker donor words available for '" +
                                                 utterance_id + "'");
    }
    std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
    return pool[allowed[pick(rng)]];
  };

  struct Planned {
    PerturbOp op;
    const detail::DonorChoice* donor = nullptr;
    std::size_t edit = 0;
  };
  std::vector<Planned> planned;
  std::vector<SpliceEdit> edits;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i].word;
    if (w.is_silence()) continue;
    const double u = unit(rng);
    std::optional<PerturbKind> kind;
    if (u < cfg.p_insert) {
      kind = PerturbKind::kInsert;
    } else if (u < cfg.p_insert + cfg.p_replace) {
      kind = PerturbKind::kReplace;
    } else if (u < cfg.p_insert + cfg.p_replace + cfg.p_delete) {
      kind = PerturbKind::kDelete;
    }
    if (!kind) continue;
    Planned p;
    p.op.kind = *kind;
    p.op.word_index = i;
    p.op.original_word = w.label;
    SpliceEdit e;
    switch (*kind) {
      case PerturbKind::kInsert:
        p.donor = &draw_donor("");
        e.begin = e.end = to_sample(w.end, sr);
        break;
      case PerturbKind::kReplace:
        p.donor = &draw_donor(w.label);
        e.begin = to_sample(w.start, sr);
        e.end = to_sample(w.end, sr);
        break;
      case PerturbKind::kDelete:
        e.begin = to_sample(w.start, sr);
        e.end = to_sample(w.end, sr);
        break;
    }
    if (p.donor != nullptr) {
      p.op.donor_word = p.donor->token;
      p.op.donor_utterance = p.donor->segment->utterance;
      p.op.donor_span = p.donor->segment->span;
      e.inserts.push_back(&p.donor->segment->audio);
    }
    p.edit = edits.size();
    edits.push_back(std::move(e));
    planned.push_back(std::move(p));
  }

  PerturbResult result;
  const auto spliced = splice(orig, edits, crossfade_samples(cfg.splice, sr));
  result.audio = spliced.audio;
  result.record.utterance_id = utterance_id;

  const double out_duration = spliced.audio.duration();
  auto original_piece_map = [&](double t) {
    const auto s = to_sample(t, sr);
    const SplicePiece* best = nullptr;
    for (const auto& p : spliced.pieces) {
      if (!p.from_original) continue;
      if (s >= p.source_begin && s <= p.source_begin + p.length) {
        best = &p;
        if (s < p.source_begin + p.length) break;
      }
    }
    detail::PieceMap m;
    if (best == nullptr) {
      m.owned = {0.0, out_duration};
      return m;
    }
    m.offset = (static_cast<double>(best->out_offset) - static_cast<double>(best->source_begin)) /
               static_cast<double>(sr);
    m.owned = spliced.owned_span(*best);
    return m;
  };
  auto donor_piece_map = [&](std::size_t edit) {
    detail::PieceMap m;
    for (const auto& p : spliced.pieces) {
      if (!p.from_original && p.edit == edit) {
        m.offset = static_cast<double>(p.out_offset) / static_cast<double>(sr);
        m.owned = spliced.owned_span(p);
      }
    }
    return m;
  };
  // Output time of the junction left behind by an edit with no inserts.
  auto junction_after = [&](std::size_t edit) {
    for (const auto& p : spliced.pieces) {
      if ((p.from_original && p.source_begin >= edits[edit].end && edits[edit].end < orig.size()) ||
          (!p.from_original && p.edit > edit)) {
        return quantize_time(spliced.owned_span(p).start);
      }
    }
    return quantize_time(out_duration);
  };

  auto donor_word = [&](const Planned& p) {
    const auto m = donor_piece_map(p.edit);
    const auto& seg = *p.donor->segment;
    TimedWord w;
    w.word = {p.donor->token, m(0.0), m(seg.span.length())};
    for (const auto& ph : seg.phones) w.phones.push_back(detail::map_unit(ph, m));
    return w;
  };
  auto kept_word = [&](const TimedWord& src) {
    const double mid = 0.5 * (src.word.start + src.word.end);
    const auto m = original_piece_map(mid);
    TimedWord w;
    w.word = detail::map_unit(src.word, m);
    for (const auto& ph : src.phones) w.phones.push_back(detail::map_unit(ph, m));
    return w;
  };

  std::vector<TimedWord> out_words;
  std::size_t next = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const Planned* p = next < planned.size() && planned[next].op.word_index == i ? &planned[next]
                                                                                  : nullptr;
    if (p == nullptr) {
      out_words.push_back(kept_word(words[i]));
      continue;
    }
    PerturbOp op = p->op;
    switch (op.kind) {
      case PerturbKind::kInsert: {
        out_words.push_back(kept_word(words[i]));
        auto dw = donor_word(*p);
        op.result_span = {dw.word.start, dw.word.end};
        out_words.push_back(std::move(dw));
        break;
      }
      case PerturbKind::kReplace: {
        auto dw = donor_word(*p);
        op.result_span = {dw.word.start, dw.word.end};
        out_words.push_back(std::move(dw));
        break;
      }
      case PerturbKind::kDelete: {
        const double t = junction_after(p->edit);
        op.result_span = {t, t};
        break;
      }
    }
    result.record.ops.push_back(std::move(op));
    ++next;
  }

  Transcript& oracle = result.oracle;
  oracle.utterance_id = utterance_id;
  oracle.source = TranscriptSource::kOracle;
  const bool all_phones = std::all_of(out_words.begin(), out_words.end(),
                                      [](const TimedWord& w) { return !w.phones.empty(); });
  if (all_phones && !out_words.empty()) oracle.phones = concat_word_phones(out_words);
  if (!all_phones) {
    for (auto& w : out_words) w.phones.clear();
  }
  oracle.words = std::move(out_words);
  validate(oracle);
  return result;
}

// Record JSON -------------------------------------------------------------------

inline json emit_record(const PerturbationRecord& r) {
  json ops = json::array();
  for (const auto& op : r.ops) {
    json j;
    j["kind"] = std::string(to_string(op.kind));
    j["word_index"] = op.word_index;
    j["original_word"] = op.original_word;
    j["donor_word"] = op.donor_word.empty() ? json(nullptr) : json(op.donor_word);
    j["donor_utterance"] = op.donor_utterance.empty() ? json(nullptr) : json(op.donor_utterance);
    j["donor_span"] = op.donor_span ? json::array({quantize_time(op.donor_span->start),
                                                   quantize_time(op.donor_span->end)})
                                    : json(nullptr);
    j["result_span"] = json::array({quantize_time(op.result_span.start),
                                    quantize_time(op.result_span.end)});
    ops.push_back(std::move(j));
  }
  return json{{"utterance_id", r.utterance_id}, {"ops", std::move(ops)}};
}

inline PerturbationRecord parse_record(const json& doc) {
  using detail::schema;
  if (!doc.is_object()) throw schema("$", "expected object");
  PerturbationRecord r;
  r.utterance_id = detail::string_at(doc, "utterance_id", "$");
  auto ops = doc.find("ops");
  if (ops == doc.end() || !ops->is_array()) throw schema("$.ops", "expected array");
  for (std::size_t i = 0; i < ops->size(); ++i) {
    const auto& j = (*ops)[i];
    const std::string path = "$.ops[" + std::to_string(i) + "]";
    PerturbOp op;
    const auto kind = detail::string_at(j, "kind", path);
    if (kind == "insert") {
      op.kind = PerturbKind::kInsert;
    } else if (kind == "replace") {
      op.kind = PerturbKind::kReplace;
    } else if (kind == "delete") {
      op.kind = PerturbKind::kDelete;
    } else {
      throw schema(path + ".kind", "expected insert|replace|delete");
    }
    auto idx = j.find("word_index");
    if (idx == j.end() || !idx->is_number_unsigned()) {
      throw schema(path + ".word_index", "expected index");
    }
    op.word_index = idx->get<std::size_t>();
    op.original_word = detail::string_at(j, "original_word", path);
    if (const json* d = detail::optional_field(j, "donor_word")) op.donor_word = d->get<std::string>();
    if (const json* d = detail::optional_field(j, "donor_utterance")) {
      op.donor_utterance = d->get<std::string>();
    }
    if (const json* d = detail::optional_field(j, "donor_span")) {
      op.donor_span = detail::span_from_json(*d, path + ".donor_span");
    }
    auto rs = j.find("result_span");
    if (rs == j.end()) throw schema(path + ".result_span", "missing");
    op.result_span = detail::span_from_json(*rs, path + ".result_span");
    r.ops.push_back(std::move(op));
  }
  return r;
}

}  // namespace correctspeech
