#pragma once

// Greedy CTC decoding with frame-counted phone timestamps, plus the binary
// logit file format consumed by the `decode` command.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "correctspeech/error.hpp"
#include "correctspeech/lexicon.hpp"
#include "correctspeech/timeline.hpp"

namespace correctspeech {

inline constexpr double kDefaultCtcFrameRate = 0.040;

/// T x (V + 1) per-frame scores; the blank class is the last column.
class LogitMatrix {
 public:
  LogitMatrix() = default;

  LogitMatrix(std::vector<std::string> vocab, std::size_t frames,
              double frame_rate = kDefaultCtcFrameRate)
      : vocab_(std::move(vocab)),
        frames_(frames),
        frame_rate_(frame_rate),
        scores_(frames * (vocab_.size() + 1), 0.0f) {
    if (vocab_.empty()) throw input_error("BadHeader", "vocabulary must not be empty");
    if (!(frame_rate_ > 0.0)) throw input_error("BadHeader", "frame_rate must be > 0");
    std::set<std::string> seen;
    for (const auto& label : vocab_) {
      if (!is_phone_label(label)) throw input_error("UnknownPhone", "unknown phone '" + label + "'");
      if (!seen.insert(label).second) {
        throw input_error("BadHeader", "duplicate vocabulary label '" + label + "'");
      }
    }
  }

  std::size_t frames() const noexcept { return frames_; }
  std::size_t vocab_size() const noexcept { return vocab_.size(); }
  std::size_t num_classes() const noexcept { return vocab_.size() + 1; }
  std::size_t blank() const noexcept { return vocab_.size(); }
  double frame_rate() const noexcept { return frame_rate_; }
  const std::vector<std::string>& vocab() const noexcept { return vocab_; }

  std::span<float> row(std::size_t t) {
    return std::span<float>(scores_).subspan(t * num_classes(), num_classes());
  }
  std::span<const float> row(std::size_t t) const {
    return std::span<const float>(scores_).subspan(t * num_classes(), num_classes());
  }
  const std::vector<float>& scores() const noexcept { return scores_; }
  std::vector<float>& scores() noexcept { return scores_; }

 private:
  std::vector<std::string> vocab_;
  std::size_t frames_ = 0;
  double frame_rate_ = kDefaultCtcFrameRate;
  std::vector<float> scores_;
};

struct DecodedPhone {
  TimedUnit phone;
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;

  friend bool operator==(const DecodedPhone&, const DecodedPhone&) = default;
};

/// Highest-scoring class; ties go to the lowest index, so a phone beats
/// the blank on an exact tie.
inline std::size_t frame_argmax(std::span<const float> row) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (row[k] > row[best]) best = k;
  }
  return best;
}

inline std::vector<DecodedPhone> greedy_decode(const LogitMatrix& m) {
  std::vector<DecodedPhone> out;
  const std::size_t blank = m.blank();
  std::size_t prev = blank;
  for (std::size_t t = 0; t < m.frames(); ++t) {
    const std::size_t k = frame_argmax(m.row(t));
    if (k != blank) {
      if (k == prev) {
        out.back().last_frame = t;
      } else {
        DecodedPhone d;
        d.phone.label = m.vocab()[k];
        d.first_frame = t;
        d.last_frame = t;
        out.push_back(std::move(d));
      }
    }
    prev = k;
  }
  for (auto& d : out) {
    d.phone.start = quantize_time(static_cast<double>(d.first_frame) * m.frame_rate());
    d.phone.end = quantize_time(static_cast<double>(d.last_frame + 1) * m.frame_rate());
  }
  return out;
}

inline Transcript to_transcript(const std::vector<DecodedPhone>& decoded, double frame_rate,
                                std::string utterance_id = {}) {
  Transcript t;
  t.utterance_id = std::move(utterance_id);
  t.source = TranscriptSource::kCtc;
  t.frame_rate = frame_rate;
  std::vector<TimedUnit> phones;
  phones.reserve(decoded.size());
  for (const auto& d : decoded) phones.push_back(d.phone);
  t.phones = std::move(phones);
  return t;
}

// Logit file I/O --------------------------------------------------------------

namespace detail {

inline std::uint32_t load_le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void store_le32(std::uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v & 0xff);
  p[1] = static_cast<unsigned char>((v >> 8) & 0xff);
  p[2] = static_cast<unsigned char>((v >> 16) & 0xff);
  p[3] = static_cast<unsigned char>((v >> 24) & 0xff);
}

}  // namespace detail

inline std::vector<std::string> read_vocab(std::istream& in) {
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    vocab.push_back(line);
  }
  return vocab;
}

/// Parses "CTCLOGITS v1 frames=T vocab=V frame_rate_us=R\n" followed by
/// T*(V+1) little-endian float32 scores.
inline LogitMatrix parse_logits(std::istream& data, std::istream& vocab_stream) {
  std::string header;
  if (!std::getline(data, header)) throw input_error("BadHeader", "missing header line");
  static const std::regex kHeader(
      R"(CTCLOGITS v1 frames=(\d+) vocab=(\d+) frame_rate_us=(\d+))");
  std::smatch m;
  if (!std::regex_match(header, m, kHeader)) {
    throw input_error("BadHeader", "unrecognized header '" + header + "'");
  }
  const std::size_t frames = std::stoull(m[1].str());
  const std::size_t vocab_size = std::stoull(m[2].str());
  const auto rate_us = std::stoll(m[3].str());
  if (vocab_size == 0) throw input_error("BadHeader", "vocab must be >= 1");
  if (rate_us <= 0) throw input_error("BadHeader", "frame_rate_us must be > 0");

  auto vocab = read_vocab(vocab_stream);
  if (vocab.size() != vocab_size) {
    throw input_error("BadHeader", "header says vocab=" + std::to_string(vocab_size) +
                                       " but vocab file has " + std::to_string(vocab.size()) +
                                       " labels");
  }
  LogitMatrix matrix(std::move(vocab), frames, from_micros(rate_us));

  const std::size_t expected = frames * (vocab_size + 1) * 4;
  std::vector<unsigned char> payload(
      (std::istreambuf_iterator<char>(data)), std::istreambuf_iterator<char>());
  if (payload.size() != expected) {
    throw input_error("SizeMismatch", "expected " + std::to_string(expected) +
                                          " payload bytes, got " + std::to_string(payload.size()));
  }
  auto& scores = matrix.scores();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = std::bit_cast<float>(detail::load_le32(payload.data() + 4 * i));
  }
  return matrix;
}

inline void write_logits(const LogitMatrix& m, std::ostream& data) {
  data << "CTCLOGITS v1 frames=" << m.frames() << " vocab=" << m.vocab_size()
       << " frame_rate_us=" << to_micros(m.frame_rate()) << '\n';
  std::vector<unsigned char> payload(m.scores().size() * 4);
  for (std::size_t i = 0; i < m.scores().size(); ++i) {
    detail::store_le32(std::bit_cast<std::uint32_t>(m.scores()[i]), payload.data() + 4 * i);
  }
  data.write(reinterpret_cast<const char*>(payload.data()),
             static_cast<std::streamsize>(payload.size()));
}

inline void write_vocab(const LogitMatrix& m, std::ostream& out) {
  for (const auto& label : m.vocab()) out << label << '\n';
}

}  // namespace correctspeech
