// correctspeech: command-line front end for the recognize / align / plan /
// edit pipeline and its evaluation tooling.
//
// Exit codes: 0 success, 2 input or validation error, 3 processing error.
// Errors are reported as one JSON object per line on stderr.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "correctspeech/commands.hpp"

namespace cs = correctspeech;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitProcessing = 3;

void report_error(const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

const std::map<std::string, cs::CorrectionMethod> kMethods = {
    {"word-word", cs::CorrectionMethod::kWordWord},
    {"word-phone", cs::CorrectionMethod::kWordPhone},
    {"phone-phone", cs::CorrectionMethod::kPhonePhone}};

void add_analysis_flags(CLI::App* cmd, cs::AnalysisConfig& cfg) {
  cmd->add_option("--window", cfg.window, "Analysis window in seconds")->capture_default_str();
  cmd->add_option("--hop", cfg.hop, "Analysis hop in seconds")->capture_default_str();
  cmd->add_option("--mel-bands", cfg.mel_bands, "Mel filterbank size")->capture_default_str();
  cmd->add_option("--ceps", cfg.cepstral_coeffs, "Cepstral coefficients c1..cK")
      ->capture_default_str();
}

void add_splice_flags(CLI::App* cmd, cs::SpliceConfig& cfg) {
  cmd->add_option("--crossfade", cfg.crossfade, "Crossfade length in seconds")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Seed for donor selection")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech correction pipeline: decode, plan, edit, perturb, eval"};
  app.require_subcommand(1);

  // decode
  cs::DecodeOptions decode;
  auto* decode_cmd = app.add_subcommand("decode", "Greedy CTC decoding of a logit file");
  decode_cmd->add_option("--logits", decode.logits, "CTCLOGITS v1 file")->required();
  decode_cmd->add_option("--vocab", decode.vocab, "Phone vocabulary, one label per line")
      ->required();
  decode_cmd->add_option("--out", decode.out, "Output transcript JSON")->required();
  decode_cmd->add_option("--utterance-id", decode.utterance_id, "Defaults to the logit file stem");

  // plan
  cs::PlanOptions plan;
  std::string plan_method = "word-phone";
  std::optional<double> plan_duration;
  std::optional<std::string> plan_dict, plan_text_file, plan_audio, plan_text;
  auto* plan_cmd = app.add_subcommand("plan", "Align a transcript with target text");
  plan_cmd->add_option("--transcript", plan.transcript, "Recognized transcript JSON")->required();
  plan_cmd->add_option("--text", plan_text, "Target text");
  plan_cmd->add_option("--text-file", plan_text_file, "File holding the target text");
  plan_cmd->add_option("--dict", plan_dict, "Pronunciation dictionary");
  plan_cmd->add_option("--method", plan_method, "word-word | word-phone | phone-phone")
      ->check(CLI::IsMember({"word-word", "word-phone", "phone-phone"}))
      ->capture_default_str();
  plan_cmd->add_option("--duration", plan_duration, "Utterance duration in seconds");
  plan_cmd->add_option("--audio", plan_audio, "Take the utterance duration from this WAV");
  plan_cmd->add_option("--out", plan.out, "Output plan JSON")->required();

  // edit
  cs::EditOptions edit;
  std::optional<std::string> edit_donors;
  auto* edit_cmd = app.add_subcommand("edit", "Apply an edit plan to audio");
  edit_cmd->add_option("--audio", edit.audio, "Input WAV (PCM16 mono)")->required();
  edit_cmd->add_option("--plan", edit.plan, "Edit plan JSON")->required();
  edit_cmd->add_option("--donors", edit_donors, "Donor manifest JSON");
  edit_cmd->add_option("--out", edit.out, "Output WAV")->required();
  add_splice_flags(edit_cmd, edit.splice);

  // perturb
  cs::PerturbOptions perturb;
  auto* perturb_cmd = app.add_subcommand("perturb", "Build a perturbed corpus");
  perturb_cmd->add_option("--manifest", perturb.manifest, "Corpus manifest JSON")->required();
  perturb_cmd->add_option("--out-dir", perturb.out_dir, "Output directory")->required();
  perturb_cmd->add_option("--p-insert", perturb.config.p_insert)->capture_default_str();
  perturb_cmd->add_option("--p-replace", perturb.config.p_replace)->capture_default_str();
  perturb_cmd->add_option("--p-delete", perturb.config.p_delete)->capture_default_str();
  perturb_cmd->add_option("--seed", perturb.config.seed)->capture_default_str();
  perturb_cmd->add_option("--crossfade", perturb.config.splice.crossfade)->capture_default_str();

  // eval
  cs::EvalOptions eval;
  std::string eval_kind;
  std::optional<std::string> eval_ref, eval_hyp, eval_pairs;
  std::string eval_id = "utt";
  auto* eval_cmd = app.add_subcommand("eval", "Objective metrics");
  eval_cmd->add_option("kind", eval_kind, "per | gaps | mcd")
      ->required()
      ->check(CLI::IsMember({"per", "gaps", "mcd"}));
  eval_cmd->add_option("--ref", eval_ref, "Reference transcript JSON or WAV");
  eval_cmd->add_option("--hyp", eval_hyp, "Hypothesis transcript JSON or WAV");
  eval_cmd->add_option("--id", eval_id, "Utterance id for a single pair")->capture_default_str();
  eval_cmd->add_option("--pairs", eval_pairs, "JSON list of {id, ref, hyp}");
  eval_cmd->add_option("--tolerance-ms", eval.tolerance_ms)->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Output report JSON")->required();
  add_analysis_flags(eval_cmd, eval.analysis);

  // pipeline
  cs::PipelineOptions pipe;
  std::string pipe_method = "word-phone";
  std::optional<std::string> pipe_transcript, pipe_logits, pipe_vocab, pipe_text, pipe_text_file,
      pipe_dict, pipe_donors, pipe_out_transcript, pipe_reference;
  auto* pipe_cmd = app.add_subcommand("pipeline", "Recognize, plan and edit in one go");
  pipe_cmd->add_option("--audio", pipe.audio, "Input WAV")->required();
  pipe_cmd->add_option("--transcript", pipe_transcript, "Forced-alignment or oracle transcript");
  pipe_cmd->add_option("--logits", pipe_logits, "CTC logit file (with --vocab)");
  pipe_cmd->add_option("--vocab", pipe_vocab, "CTC phone vocabulary");
  pipe_cmd->add_option("--text", pipe_text, "Target text");
  pipe_cmd->add_option("--text-file", pipe_text_file, "File holding the target text");
  pipe_cmd->add_option("--dict", pipe_dict, "Pronunciation dictionary");
  pipe_cmd->add_option("--donors", pipe_donors, "Donor manifest JSON");
  pipe_cmd->add_option("--method", pipe_method, "word-word | word-phone | phone-phone")
      ->check(CLI::IsMember({"word-word", "word-phone", "phone-phone"}))
      ->capture_default_str();
  pipe_cmd->add_option("--out-wav", pipe.out_wav)->required();
  pipe_cmd->add_option("--out-plan", pipe.out_plan)->required();
  pipe_cmd->add_option("--out-report", pipe.out_report)->required();
  pipe_cmd->add_option("--out-transcript", pipe_out_transcript, "Also write the S2T transcript");
  pipe_cmd->add_option("--reference", pipe_reference, "Clean WAV; adds MCD to the report");
  pipe_cmd->add_flag("--skip-oov", pipe.skip_oov, "Skip instead of failing on OOV target words");
  add_splice_flags(pipe_cmd, pipe.splice);
  add_analysis_flags(pipe_cmd, pipe.analysis);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return kExitInput;
  }

  auto opt_path = [](const std::optional<std::string>& s) -> std::optional<cs::fs::path> {
    if (!s) return std::nullopt;
    return cs::fs::path(*s);
  };

  try {
    if (*decode_cmd) {
      cs::run_decode(decode);
    } else if (*plan_cmd) {
      plan.method = kMethods.at(plan_method);
      plan.text = plan_text;
      plan.text_file = opt_path(plan_text_file);
      plan.dict = opt_path(plan_dict);
      plan.duration = plan_duration;
      plan.audio = opt_path(plan_audio);
      cs::run_plan(plan);
    } else if (*edit_cmd) {
      edit.donors = opt_path(edit_donors);
      cs::run_edit(edit);
    } else if (*perturb_cmd) {
      cs::run_perturb(perturb);
    } else if (*eval_cmd) {
      eval.kind = eval_kind == "per" ? cs::EvalKind::kPer
                  : eval_kind == "gaps" ? cs::EvalKind::kGaps
                                        : cs::EvalKind::kMcd;
      if (eval_pairs) {
        eval.pairs = cs::load_eval_pairs(*eval_pairs);
      } else if (eval_ref && eval_hyp) {
        eval.pairs.push_back({eval_id, *eval_ref, *eval_hyp});
      } else {
        throw cs::input_error("MissingInput", "need --ref and --hyp, or --pairs");
      }
      cs::run_eval(eval);
    } else if (*pipe_cmd) {
      pipe.method = kMethods.at(pipe_method);
      pipe.transcript = opt_path(pipe_transcript);
      pipe.logits = opt_path(pipe_logits);
      pipe.vocab = opt_path(pipe_vocab);
      pipe.text = pipe_text;
      pipe.text_file = opt_path(pipe_text_file);
      pipe.dict = opt_path(pipe_dict);
      pipe.donors = opt_path(pipe_donors);
      pipe.out_transcript = opt_path(pipe_out_transcript);
      pipe.reference = opt_path(pipe_reference);
      cs::run_pipeline(pipe);
    }
  } catch (const cs::Error& e) {
    report_error(e.kind(), e.what());
    return e.category() == cs::ErrorCategory::kInput ? kExitInput : kExitProcessing;
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
    return kExitProcessing;
  }
  return 0;
}
