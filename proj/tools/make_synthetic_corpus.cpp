// make_synthetic_corpus: writes a small annotated tone-and-noise corpus in
// the layout `correctspeech perturb` expects, plus a donor manifest for
// `correctspeech pipeline`.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "correctspeech/commands.hpp"
#include "correctspeech/synth.hpp"

namespace cs = correctspeech;

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic annotated speech corpus"};
  std::string dict_path;
  std::string out_dir;
  std::size_t utterances = 10;
  std::uint64_t seed = 0;
  std::string speaker = "synth";
  std::vector<std::string> vocab_words;
  cs::SynthConfig cfg;
  app.add_option("--dict", dict_path, "Pronunciation dictionary")->required();
  app.add_option("--out-dir", out_dir, "Output directory")->required();
  app.add_option("--utterances", utterances)->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--speaker", speaker)->capture_default_str();
  app.add_option("--length", cfg.utterance_length, "Seconds per utterance")->capture_default_str();
  app.add_option("--words", vocab_words, "Vocabulary (default: every dictionary word)");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto dict = cs::load_dictionary_file(dict_path);
    std::vector<cs::WordToken> vocab;
    if (vocab_words.empty()) {
      for (const auto& [word, variants] : dict.entries()) vocab.emplace_back(word);
    } else {
      for (const auto& w : vocab_words) vocab.emplace_back(w);
    }
    const cs::fs::path root(out_dir);
    nlohmann::json entries = nlohmann::json::array();
    cs::DonorLibrary donors;
    for (std::size_t i = 0; i < utterances; ++i) {
      const std::string id = speaker + "_" + std::to_string(i);
      const auto words = cs::random_words(vocab, 64, cs::mix_seed(seed, i));
      const auto utt = cs::synthesize_utterance(id, words, dict, cfg, seed);
      const auto wav = cs::fs::path("wav") / (id + ".wav");
      const auto transcript = cs::fs::path("transcripts") / (id + ".json");
      cs::write_wav_file(root / wav, utt.audio);
      cs::write_json_file(root / transcript, cs::emit_transcript(utt.transcript));
      cs::add_transcript_donors(donors, utt.audio, utt.transcript, wav.string());
      entries.push_back({{"id", id},
                         {"speaker", speaker},
                         {"wav", wav.string()},
                         {"transcript", transcript.string()},
                         {"text", utt.text}});
    }
    cs::write_json_file(root / "manifest.json", {{"utterances", entries}});
    cs::write_json_file(root / "donors.json", cs::emit_donor_manifest(donors));
  } catch (const cs::Error& e) {
    std::cerr << nlohmann::json{{"error", e.kind()}, {"message", e.what()}}.dump() << std::endl;
    return e.category() == cs::ErrorCategory::kInput ? 2 : 3;
  }
  return 0;
}
