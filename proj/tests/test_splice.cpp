#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "correctspeech/io.hpp"
#include "correctspeech/splice.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "splice_oracle.hpp"

namespace cs = correctspeech;
using fixtures::error_kind;

namespace {

cs::DonorSegment segment(const std::string& utt, std::size_t samples, std::uint64_t seed) {
  cs::DonorSegment s;
  s.utterance = utt;
  s.wav_path = utt + ".wav";
  s.audio = fixtures::tone_mix(samples, seed);
  s.span = {0.0, s.audio.duration()};
  return s;
}

cs::EditPlan plan_with(std::vector<cs::EditRegion> regions, double duration) {
  cs::EditPlan p;
  p.regions = std::move(regions);
  p.unchanged_spans = cs::detail::complement_spans(p.regions, duration);
  return p;
}

}  // namespace

TEST(Splice, EmptyPlanIsIdentity) {
  const auto w = fixtures::tone_mix(16000, 1);
  cs::DonorLibrary none;
  EXPECT_EQ(cs::apply_plan(w, plan_with({}, w.duration()), none), w);
  const auto r = cs::splice(w, {}, 160);
  EXPECT_EQ(r.audio, w);
  ASSERT_EQ(r.pieces.size(), 1u);
}

TEST(Splice, DeleteWithoutCrossfade) {
  const auto w = fixtures::tone_mix(16000, 2);
  cs::DonorLibrary none;
  cs::SpliceConfig cfg;
  cfg.crossfade = 0.0;
  const auto out = cs::apply_plan(
      w, plan_with({{cs::EditOp::kDelete, cs::TimeSpan{0.25, 0.5}, std::nullopt, {}}}, 1.0), none,
      cfg);
  ASSERT_EQ(out.size(), 16000u - 4000u);
  for (std::size_t i = 0; i < 4000; ++i) EXPECT_EQ(out.samples[i], w.samples[i]);
  for (std::size_t i = 4000; i < out.size(); ++i) EXPECT_EQ(out.samples[i], w.samples[i + 4000]);
}

TEST(Splice, ReplaceDurationArithmetic) {
  const auto w = fixtures::tone_mix(16000, 3);
  cs::DonorLibrary lib;
  lib.add("happy", segment("other", 5000, 4));
  cs::SpliceConfig cfg;  // 10 ms
  const auto out = cs::apply_plan(
      w, plan_with({{cs::EditOp::kReplace, cs::TimeSpan{0.25, 0.5}, std::nullopt, {"happy"}}}, 1.0),
      lib, cfg);
  EXPECT_EQ(out.size(), 16000u - 4000u + 5000u - 2u * 160u);
}

TEST(Splice, CrossfadeIsRaisedCosineBlend) {
  cs::Waveform a;
  a.samples.assign(1000, 0.8);
  cs::Waveform ins;
  ins.samples.assign(500, -0.4);
  const auto r = cs::splice(a, {{600, 600, {&ins}}}, 100);
  ASSERT_EQ(r.audio.size(), 1500u - 200u);
  for (std::size_t i = 0; i < 100; ++i) {
    const double wgt = 0.5 - 0.5 * std::cos(std::numbers::pi * (i + 0.5) / 100.0);
    EXPECT_NEAR(r.audio.samples[500 + i], (1.0 - wgt) * 0.8 + wgt * -0.4, 1e-15);
  }
  // Fade weights are symmetric and sum to one across a junction.
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_NEAR(cs::fade_in_weight(i, 100) + cs::fade_in_weight(99 - i, 100), 1.0, 1e-15);
  }
  EXPECT_EQ(r.owned_span(r.pieces[0]), (cs::TimeSpan{0.0, 550.0 / 16000}));
  EXPECT_EQ(r.owned_span(r.pieces[1]), (cs::TimeSpan{550.0 / 16000, 950.0 / 16000}));
}

TEST(Splice, CrossfadeTooLong) {
  const auto w = fixtures::tone_mix(1000, 5);
  cs::Waveform ins = fixtures::tone_mix(150, 6);
  EXPECT_EQ(error_kind([&] { cs::splice(w, {{500, 500, {&ins}}}, 100); }), "CrossfadeTooLong");
  EXPECT_EQ(error_kind([&] { cs::splice(w, {{50, 60, {}}}, 100); }), "CrossfadeTooLong");
  EXPECT_NO_THROW(cs::splice(w, {{500, 500, {&ins}}}, 75));
}

TEST(Splice, OverlappingEditsRejected) {
  const auto w = fixtures::tone_mix(1000, 7);
  EXPECT_EQ(error_kind([&] { cs::splice(w, {{100, 300, {}}, {200, 400, {}}}, 0); }),
            "SpanOutOfRange");
  EXPECT_EQ(error_kind([&] { cs::splice(w, {{900, 1100, {}}}, 0); }), "SpanOutOfRange");
}

TEST(Splice, MissingDonorIsProcessingError) {
  const auto w = fixtures::tone_mix(16000, 8);
  cs::DonorLibrary lib;
  try {
    cs::apply_plan(w, plan_with({{cs::EditOp::kInsert, std::nullopt, 0.5, {"ghost"}}}, 1.0), lib);
    FAIL();
  } catch (const cs::Error& e) {
    EXPECT_EQ(e.kind(), "MissingDonor");
    EXPECT_EQ(e.category(), cs::ErrorCategory::kProcessing);
  }
}

TEST(Splice, RandomPlansFidelityAndLength) {
  std::mt19937_64 rng(9);
  const std::vector<std::string> tokens = {"a", "b", "c"};
  for (int iter = 0; iter < 100; ++iter) {
    const auto w = fixtures::tone_mix(32000, iter);
    cs::DonorLibrary lib;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      lib.add(tokens[k], segment("d", 400 + 700 * k + iter, 100 + k + iter));
    }
    const auto regions = oracle::random_regions(rng, 40, tokens);
    const auto plan = plan_with(regions, w.duration());
    ASSERT_NO_THROW(cs::validate(plan));
    cs::SpliceConfig cfg;
    cfg.seed = iter;
    const auto out = cs::apply_plan(w, plan, lib, cfg);
    EXPECT_EQ(oracle::check_splice(w, regions, lib, cfg, out), "") << iter;
    for (double s : out.samples) ASSERT_LE(std::abs(s), 1.0);
  }
}

TEST(Splice, LeftToRightEqualsRightToLeftApplication) {
  // Applying the edits one at a time from the right end reproduces the
  // single pass.
  const auto w = fixtures::tone_mix(16000, 12);
  const auto d1 = fixtures::tone_mix(900, 13);
  const auto d2 = fixtures::tone_mix(1300, 14);
  const std::vector<cs::SpliceEdit> edits = {{2000, 3000, {&d1}}, {8000, 8000, {&d2}},
                                             {12000, 14000, {}}};
  const auto once = cs::splice(w, edits, 0).audio;
  auto step = w;
  for (std::size_t k = edits.size(); k-- > 0;) step = cs::splice(step, {edits[k]}, 0).audio;
  EXPECT_EQ(once, step);
}

TEST(PickDonor, SingleCandidateAndDeterminism) {
  cs::DonorLibrary lib;
  lib.add("x", segment("u1", 100, 1));
  EXPECT_EQ(&cs::pick_donor(lib, "x", 12345), &lib.find("x")->front());
  lib.add("y", segment("u1", 100, 2));
  lib.add("y", segment("u2", 100, 3));
  lib.add("y", segment("u3", 100, 4));
  for (std::uint64_t s = 0; s < 20; ++s) {
    EXPECT_EQ(&cs::pick_donor(lib, "y", s), &cs::pick_donor(lib, "y", s));
  }
  EXPECT_EQ(error_kind([&] { cs::pick_donor(lib, "z", 0); }), "MissingDonor");
}

TEST(PickDonor, UniformOverSeeds) {
  cs::DonorLibrary lib;
  for (int k = 0; k < 4; ++k) lib.add("w", segment("u" + std::to_string(k), 100, k));
  std::vector<int> counts(4, 0);
  const auto* base = &lib.find("w")->front();
  for (std::uint64_t s = 0; s < 1000; ++s) ++counts[&cs::pick_donor(lib, "w", s) - base];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 250.0) * (c - 250.0) / 250.0;
  EXPECT_LT(chi2, oracle::kChiSquare3dof99) << counts[0] << " " << counts[1] << " " << counts[2]
                                            << " " << counts[3];
}

TEST(DonorLibrary, Invariants) {
  cs::DonorLibrary lib;
  cs::DonorSegment empty;
  EXPECT_EQ(error_kind([&] { lib.add("x", empty); }), "EmptyDonor");
  lib.add("x", segment("u", 10, 1));
  auto other = segment("u", 10, 2);
  other.audio.sample_rate = 8000;
  EXPECT_EQ(error_kind([&] { lib.add("x", other); }), "SampleRateMismatch");
}

TEST(DonorLibrary, ManifestRoundTripAndTranscriptDonors) {
  const auto dir = std::filesystem::temp_directory_path() / "correctspeech_splice_test";
  std::filesystem::remove_all(dir);
  const auto t = fixtures::heavily_forced();
  const auto audio = fixtures::tone_mix(19200, 15);
  cs::write_wav_file(dir / "heavily.wav", audio);
  const auto stored = cs::read_wav_file((dir / "heavily.wav").string());

  cs::DonorLibrary lib;
  cs::add_transcript_donors(lib, stored, t, "heavily.wav");
  ASSERT_NE(lib.find("heavily"), nullptr);
  ASSERT_NE(lib.find("ER0"), nullptr);
  const auto& heavily = lib.find("heavily")->front();
  EXPECT_EQ(heavily.span, (cs::TimeSpan{0.60, 1.10}));
  EXPECT_EQ(heavily.audio.size(), 8000u);
  ASSERT_EQ(heavily.phones.size(), 6u);
  EXPECT_EQ(heavily.phones.front(), (cs::TimedUnit{"HH", 0.0, 0.06}));

  const auto doc = cs::emit_donor_manifest(lib);
  const auto back = cs::load_donor_library(nlohmann::json::parse(doc.dump()), dir);
  ASSERT_EQ(back.entries().size(), lib.entries().size());
  for (const auto& [token, segs] : lib.entries()) {
    const auto* other = back.find(token);
    ASSERT_NE(other, nullptr) << token;
    ASSERT_EQ(other->size(), segs.size());
    for (std::size_t k = 0; k < segs.size(); ++k) {
      EXPECT_EQ((*other)[k].audio, segs[k].audio) << token;
      EXPECT_EQ((*other)[k].span, segs[k].span);
      EXPECT_EQ((*other)[k].phones, segs[k].phones);
      EXPECT_EQ((*other)[k].utterance, "heavily");
    }
  }
  std::filesystem::remove_all(dir);
}
