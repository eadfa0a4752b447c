#pragma once

// The stages behind each CLI subcommand. Every stage reads and writes
// files so it can be run and tested on its own; the CLI front end only
// parses flags and maps errors to exit codes.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "correctspeech/audio.hpp"
#include "correctspeech/ctcdecode.hpp"
#include "correctspeech/error.hpp"
#include "correctspeech/io.hpp"
#include "correctspeech/lexicon.hpp"
#include "correctspeech/metrics.hpp"
#include "correctspeech/perturb.hpp"
#include "correctspeech/planner.hpp"
#include "correctspeech/splice.hpp"
#include "correctspeech/timeline.hpp"

namespace correctspeech {

namespace fs = std::filesystem;

// Shared loaders ------------------------------------------------------------------

inline PronunciationDict load_dictionary_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("IoError", "cannot open '" + path.string() + "'");
  return load_dictionary(in);
}

inline Transcript load_transcript_file(const fs::path& path) {
  return parse_transcript(read_json_file(path));
}

inline LogitMatrix load_logits_files(const fs::path& logits, const fs::path& vocab) {
  std::ifstream data(logits, std::ios::binary);
  if (!data) throw input_error("IoError", "cannot open '" + logits.string() + "'");
  std::ifstream voc(vocab);
  if (!voc) throw input_error("IoError", "cannot open '" + vocab.string() + "'");
  return parse_logits(data, voc);
}

inline DonorLibrary load_donor_file(const fs::path& path) {
  return load_donor_library(read_json_file(path), path.parent_path());
}

/// Target text from an inline string or a file.
inline std::vector<WordToken> load_target_text(const std::optional<std::string>& text,
                                               const std::optional<fs::path>& file) {
  if (text) return normalize_text(*text);
  if (file) return normalize_text(read_text_file(*file));
  throw input_error("MissingInput", "target text is required (--text or --text-file)");
}

inline void check_vocabulary(const std::vector<WordToken>& words, const PronunciationDict& dict) {
  for (const auto& w : words) (void)lookup(dict, w);
}

inline json error_rate_json(const ErrorRate& e) {
  return {{"substitutions", e.substitutions}, {"insertions", e.insertions},
          {"deletions", e.deletions}, {"ref_length", e.ref_length}, {"rate", e.rate}};
}

inline json gap_stats_json(const GapStats& g) {
  return {{"avg_start_gap_ms", g.avg_start_gap_ms},
          {"avg_end_gap_ms", g.avg_end_gap_ms},
          {"tolerable_start_ratio", g.tolerable_start_ratio},
          {"tolerable_end_ratio", g.tolerable_end_ratio},
          {"tolerance_ms", g.tolerance_ms},
          {"matched_count", g.matched_count}};
}

// decode ---------------------------------------------------------------------------

struct DecodeOptions {
  fs::path logits;
  fs::path vocab;
  fs::path out;
  std::string utterance_id;
};

inline Transcript run_decode(const DecodeOptions& opt) {
  const auto matrix = load_logits_files(opt.logits, opt.vocab);
  auto id = opt.utterance_id.empty() ? opt.logits.stem().string() : opt.utterance_id;
  auto t = to_transcript(greedy_decode(matrix), matrix.frame_rate(), std::move(id));
  write_json_file(opt.out, emit_transcript(t));
  return t;
}

// plan -------------------------------------------------------------------------------

struct PlanOptions {
  fs::path transcript;
  std::optional<std::string> text;
  std::optional<fs::path> text_file;
  std::optional<fs::path> dict;
  CorrectionMethod method = CorrectionMethod::kWordPhone;
  fs::path out;
  std::optional<double> duration;
  std::optional<fs::path> audio;  // duration source when --duration is absent
};

inline EditPlan run_plan(const PlanOptions& opt) {
  const auto hyp = load_transcript_file(opt.transcript);
  const auto target = load_target_text(opt.text, opt.text_file);
  std::optional<PronunciationDict> dict;
  if (opt.dict) dict = load_dictionary_file(*opt.dict);
  std::optional<double> duration = opt.duration;
  if (!duration && opt.audio) duration = read_wav_file(opt.audio->string()).duration();
  const auto plan = make_plan(opt.method, hyp, target, dict ? &*dict : nullptr, duration);
  write_json_file(opt.out, emit_plan(plan));
  return plan;
}

// edit -------------------------------------------------------------------------------

struct EditOptions {
  fs::path audio;
  fs::path plan;
  std::optional<fs::path> donors;
  fs::path out;
  SpliceConfig splice;
};

inline Waveform run_edit(const EditOptions& opt) {
  const auto orig = read_wav_file(opt.audio.string());
  const auto plan = parse_plan(read_json_file(opt.plan));
  DonorLibrary donors;
  if (opt.donors) donors = load_donor_file(*opt.donors);
  auto out = apply_plan(orig, plan, donors, opt.splice);
  write_wav_file(opt.out, out);
  return out;
}

// perturb -----------------------------------------------------------------------------

struct PerturbOptions {
  fs::path manifest;
  fs::path out_dir;
  PerturbConfig config;
};

struct CorpusUtterance {
  std::string id;
  std::string speaker;
  fs::path wav;
  fs::path transcript;
  std::string text;
};

/// {"utterances": [{"id", "speaker"?, "wav", "transcript", "text"?}, ...]};
/// relative paths resolve against the manifest's directory.
inline std::vector<CorpusUtterance> load_corpus_manifest(const fs::path& path) {
  const auto doc = read_json_file(path);
  using detail::schema;
  auto list = doc.find("utterances");
  if (!doc.is_object() || list == doc.end() || !list->is_array()) {
    throw schema("$.utterances", "expected array");
  }
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path q = p;
    return q.is_relative() ? base / q : q;
  };
  std::vector<CorpusUtterance> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const auto& e = (*list)[i];
    const std::string where = "$.utterances[" + std::to_string(i) + "]";
    CorpusUtterance u;
    u.id = detail::string_at(e, "id", where);
    u.speaker = e.value("speaker", std::string("default"));
    u.wav = resolve(detail::string_at(e, "wav", where));
    u.transcript = resolve(detail::string_at(e, "transcript", where));
    u.text = e.value("text", std::string());
    out.push_back(std::move(u));
  }
  return out;
}

inline std::string words_text(const Transcript& t) {
  std::string s;
  if (!t.words) return s;
  for (const auto& w : *t.words) {
    if (w.word.is_silence()) continue;
    if (!s.empty()) s.push_back(' ');
    s += w.word.label;
  }
  return s;
}

/// Perturbs every utterance of a corpus. Output layout under out_dir:
///   wav/<id>.wav  oracle/<id>.json  records/<id>.json  donors/<speaker>.json
///   manifest.json
inline json run_perturb(const PerturbOptions& opt) {
  opt.config.validate();
  const auto corpus = load_corpus_manifest(opt.manifest);

  struct Loaded {
    Waveform audio;
    Transcript transcript;
  };
  std::vector<Loaded> loaded;
  std::map<std::string, DonorLibrary> libraries;
  for (const auto& u : corpus) {
    Loaded l{read_wav_file(u.wav.string()), load_transcript_file(u.transcript)};
    if (!l.transcript.words) {
      throw input_error("NoWordTier", "transcript for '" + u.id + "' has no words");
    }
    l.transcript.utterance_id = u.id;
    add_transcript_donors(libraries[u.speaker], l.audio, l.transcript,
                          fs::absolute(u.wav).string());
    loaded.push_back(std::move(l));
  }

  json entries = json::array();
  for (const auto& [speaker, lib] : libraries) {
    write_json_file(opt.out_dir / "donors" / (speaker + ".json"), emit_donor_manifest(lib));
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& u = corpus[i];
    const auto& l = loaded[i];
    const auto result = perturb_utterance(l.audio, u.id, *l.transcript.words,
                                          libraries.at(u.speaker), opt.config);
    const fs::path wav = fs::path("wav") / (u.id + ".wav");
    const fs::path oracle = fs::path("oracle") / (u.id + ".json");
    const fs::path record = fs::path("records") / (u.id + ".json");
    write_wav_file(opt.out_dir / wav, result.audio);
    write_json_file(opt.out_dir / oracle, emit_transcript(result.oracle));
    write_json_file(opt.out_dir / record, emit_record(result.record));
    entries.push_back({{"id", u.id},
                       {"speaker", u.speaker},
                       {"original_wav", fs::absolute(u.wav).string()},
                       {"perturbed_wav", wav.string()},
                       {"oracle_transcript", oracle.string()},
                       {"record", record.string()},
                       {"donors", (fs::path("donors") / (u.speaker + ".json")).string()},
                       {"text", u.text.empty() ? words_text(l.transcript) : u.text},
                       {"perturbed_words", result.record.ops.size()}});
  }
  json manifest{{"utterances", entries}};
  write_json_file(opt.out_dir / "manifest.json", manifest);
  return manifest;
}

// eval --------------------------------------------------------------------------------

enum class EvalKind { kPer, kGaps, kMcd };

struct EvalPair {
  std::string id;
  fs::path ref;
  fs::path hyp;
};

struct EvalOptions {
  EvalKind kind = EvalKind::kPer;
  std::vector<EvalPair> pairs;
  fs::path out;
  double tolerance_ms = 100.0;
  AnalysisConfig analysis;
};

/// [{"id", "ref", "hyp"}, ...] with paths relative to the list file.
inline std::vector<EvalPair> load_eval_pairs(const fs::path& path) {
  const auto doc = read_json_file(path);
  if (!doc.is_array()) throw detail::schema("$", "expected array of pairs");
  std::vector<EvalPair> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "$[" + std::to_string(i) + "]";
    EvalPair p;
    p.id = detail::string_at(doc[i], "id", where);
    p.ref = detail::string_at(doc[i], "ref", where);
    p.hyp = detail::string_at(doc[i], "hyp", where);
    if (p.ref.is_relative()) p.ref = path.parent_path() / p.ref;
    if (p.hyp.is_relative()) p.hyp = path.parent_path() / p.hyp;
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<Phone> transcript_phones(const Transcript& t) {
  std::vector<Phone> out;
  for (const auto& u : without_silence(phone_sequence(t))) out.push_back(Phone::from_string(u.label));
  return out;
}

/// Per-utterance metrics plus their mean over utterances.
inline json run_eval(const EvalOptions& opt) {
  if (opt.pairs.empty()) throw input_error("MissingInput", "nothing to evaluate");
  json utterances = json::array();
  std::map<std::string, double> sums;
  for (const auto& p : opt.pairs) {
    json u{{"id", p.id}};
    switch (opt.kind) {
      case EvalKind::kPer: {
        const auto ref = transcript_phones(load_transcript_file(p.ref));
        const auto hyp = transcript_phones(load_transcript_file(p.hyp));
        const auto plain = per(ref, hyp, false);
        const auto stressed = per(ref, hyp, true);
        u["per"] = error_rate_json(plain);
        u["s_per"] = error_rate_json(stressed);
        sums["per"] += plain.rate;
        sums["s_per"] += stressed.rate;
        break;
      }
      case EvalKind::kGaps: {
        const auto ref = without_silence(phone_sequence(load_transcript_file(p.ref)));
        const auto hyp = without_silence(phone_sequence(load_transcript_file(p.hyp)));
        const auto g = gap_stats(hyp, ref, opt.tolerance_ms);
        u["gaps"] = gap_stats_json(g);
        sums["avg_start_gap_ms"] += g.avg_start_gap_ms;
        sums["avg_end_gap_ms"] += g.avg_end_gap_ms;
        sums["tolerable_start_ratio"] += g.tolerable_start_ratio;
        sums["tolerable_end_ratio"] += g.tolerable_end_ratio;
        break;
      }
      case EvalKind::kMcd: {
        const double d = mcd(read_wav_file(p.ref.string()), read_wav_file(p.hyp.string()),
                             opt.analysis);
        u["mcd"] = d;
        sums["mcd"] += d;
        break;
      }
    }
    utterances.push_back(std::move(u));
  }
  json aggregate = json::object();
  for (const auto& [k, v] : sums) aggregate[k] = v / static_cast<double>(opt.pairs.size());
  aggregate["utterances"] = opt.pairs.size();
  const char* kind = opt.kind == EvalKind::kPer ? "per" : opt.kind == EvalKind::kGaps ? "gaps" : "mcd";
  json report{{"kind", kind}, {"utterances", utterances}, {"aggregate", aggregate}};
  write_json_file(opt.out, report);
  return report;
}

// pipeline -----------------------------------------------------------------------------

struct PipelineOptions {
  fs::path audio;
  std::optional<fs::path> transcript;  // forced or oracle source
  std::optional<fs::path> logits;      // ctc source (with vocab)
  std::optional<fs::path> vocab;
  std::optional<std::string> text;
  std::optional<fs::path> text_file;
  std::optional<fs::path> dict;
  std::optional<fs::path> donors;
  CorrectionMethod method = CorrectionMethod::kWordPhone;
  fs::path out_wav;
  fs::path out_plan;
  fs::path out_report;
  std::optional<fs::path> out_transcript;
  std::optional<fs::path> reference;  // clean audio for MCD in the report
  bool skip_oov = false;
  SpliceConfig splice;
  AnalysisConfig analysis;
};

/// recognize (or load) -> plan -> edit -> report.
inline json run_pipeline(const PipelineOptions& opt) {
  const auto audio = read_wav_file(opt.audio.string());

  Transcript hyp;
  if (opt.transcript) {
    hyp = load_transcript_file(*opt.transcript);
  } else if (opt.logits && opt.vocab) {
    const auto matrix = load_logits_files(*opt.logits, *opt.vocab);
    hyp = to_transcript(greedy_decode(matrix), matrix.frame_rate(), opt.audio.stem().string());
  } else {
    throw input_error("MissingInput", "need --transcript or --logits with --vocab");
  }
  if (opt.out_transcript) write_json_file(*opt.out_transcript, emit_transcript(hyp));

  const auto target = load_target_text(opt.text, opt.text_file);
  std::optional<PronunciationDict> dict;
  if (opt.dict) dict = load_dictionary_file(*opt.dict);

  json report{{"utterance_id", hyp.utterance_id},
              {"method", std::string(to_string(opt.method))},
              {"source", std::string(to_string(hyp.source))}};
  if (dict) {
    try {
      check_vocabulary(target, *dict);
    } catch (const Error& e) {
      if (!opt.skip_oov) throw;
      report["status"] = "skipped";
      report["reason"] = e.what();
      write_json_file(opt.out_report, report);
      return report;
    }
  }

  const auto plan = make_plan(opt.method, hyp, target, dict ? &*dict : nullptr, audio.duration());
  write_json_file(opt.out_plan, emit_plan(plan));

  DonorLibrary donors;
  if (opt.donors) donors = load_donor_file(*opt.donors);
  const auto corrected = apply_plan(audio, plan, donors, opt.splice);
  write_wav_file(opt.out_wav, corrected);

  report["status"] = "ok";
  report["regions"] = plan.regions.size();
  report["input_duration"] = audio.duration();
  report["output_duration"] = corrected.duration();
  if (opt.reference) {
    const auto ref = read_wav_file(opt.reference->string());
    report["mcd_input_vs_reference"] = mcd(audio, ref, opt.analysis);
    report["mcd_output_vs_reference"] = mcd(corrected, ref, opt.analysis);
  }
  write_json_file(opt.out_report, report);
  return report;
}

}  // namespace correctspeech
