#pragma once

// Phone inventory, pronunciation dictionary and target-text tokenization.

#include <algorithm>
#include <array>
#include <cctype>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "correctspeech/error.hpp"

namespace correctspeech {

namespace detail {

inline constexpr std::array<std::string_view, 15> kVowels = {
    "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER",
    "EY", "IH", "IY", "OW", "OY", "UH", "UW"};

inline constexpr std::array<std::string_view, 24> kConsonants = {
    "B", "CH", "D",  "DH", "F", "G", "HH", "JH", "K", "L", "M",  "N",
    "NG", "P", "R", "S", "SH", "T", "TH", "V", "W", "Y", "Z",  "ZH"};

inline char ascii_lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

inline char ascii_upper(char c) {
  return static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
}

inline bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

}  // namespace detail

/// Reserved label for pauses emitted by aligners. Never a Phone.
inline constexpr std::string_view kSilenceLabel = "sil";

inline bool is_vowel_base(std::string_view base) {
  return std::find(detail::kVowels.begin(), detail::kVowels.end(), base) !=
         detail::kVowels.end();
}

inline bool is_phone_base(std::string_view base) {
  return is_vowel_base(base) ||
         std::find(detail::kConsonants.begin(), detail::kConsonants.end(),
                   base) != detail::kConsonants.end();
}

/// One ARPAbet phone. Vowels may carry a stress digit 0/1/2.
class Phone {
 public:
  Phone() = default;

  /// Parses "AH0", "W", ... Returns nullopt for anything outside the
  /// 39-symbol inventory or a stress digit on a consonant.
  static std::optional<Phone> parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    std::optional<int> stress;
    std::string_view base = text;
    const char last = text.back();
    if (last >= '0' && last <= '9') {
      if (last > '2') return std::nullopt;
      stress = last - '0';
      base = text.substr(0, text.size() - 1);
    }
    if (!is_phone_base(base)) return std::nullopt;
    if (stress && !is_vowel_base(base)) return std::nullopt;
    Phone p;
    p.base_ = std::string(base);
    p.stress_ = stress;
    return p;
  }

  static Phone from_string(std::string_view text) {
    auto p = parse(text);
    if (!p) throw input_error("UnknownPhone", "unknown phone '" + std::string(text) + "'");
    return *p;
  }

  const std::string& base() const noexcept { return base_; }
  std::optional<int> stress() const noexcept { return stress_; }
  bool is_vowel() const { return is_vowel_base(base_); }

  std::string str() const {
    return stress_ ? base_ + static_cast<char>('0' + *stress_) : base_;
  }

  friend bool operator==(const Phone&, const Phone&) = default;
  friend auto operator<=>(const Phone&, const Phone&) = default;

 private:
  std::string base_;
  std::optional<int> stress_;
};

inline std::ostream& operator<<(std::ostream& os, const Phone& p) {
  return os << p.str();
}

inline bool is_phone_label(std::string_view text) {
  return Phone::parse(text).has_value();
}

inline Phone strip_stress(const Phone& p) {
  return Phone::from_string(p.base());
}

inline std::vector<Phone> strip_stress(const std::vector<Phone>& phones) {
  std::vector<Phone> out;
  out.reserve(phones.size());
  for (const auto& p : phones) out.push_back(strip_stress(p));
  return out;
}

inline std::vector<Phone> parse_phones(const std::vector<std::string>& labels) {
  std::vector<Phone> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(Phone::from_string(l));
  return out;
}

inline std::vector<std::string> phone_labels(const std::vector<Phone>& phones) {
  std::vector<std::string> out;
  out.reserve(phones.size());
  for (const auto& p : phones) out.push_back(p.str());
  return out;
}

/// A normalized word of target text: lowercase, no surrounding
/// punctuation or whitespace.
class WordToken {
 public:
  WordToken() = default;
  explicit WordToken(std::string text) : text_(std::move(text)) {}

  const std::string& text() const noexcept { return text_; }

  friend bool operator==(const WordToken&, const WordToken&) = default;
  friend auto operator<=>(const WordToken&, const WordToken&) = default;

 private:
  std::string text_;
};

/// Lowercases, splits on whitespace and trims leading/trailing ASCII
/// punctuation from each token. Inner apostrophes ("don't") survive.
inline std::vector<WordToken> normalize_text(std::string_view raw) {
  std::vector<WordToken> tokens;
  std::string current;
  auto flush = [&] {
    std::size_t b = 0;
    std::size_t e = current.size();
    while (b < e && detail::is_ascii_punct(current[b])) ++b;
    while (e > b && detail::is_ascii_punct(current[e - 1])) --e;
    if (e > b) tokens.emplace_back(current.substr(b, e - b));
    current.clear();
  };
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      current.push_back(detail::ascii_lower(c));
    }
  }
  flush();
  return tokens;
}

inline std::vector<std::string> token_texts(const std::vector<WordToken>& words) {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(w.text());
  return out;
}

/// Word -> pronunciation variants, in file order. Immutable once loaded.
class PronunciationDict {
 public:
  using Variants = std::vector<std::vector<Phone>>;

  /// Appends a variant. Words are stored lowercase.
  void add(std::string_view word, std::vector<Phone> phones) {
    if (phones.empty()) {
      throw input_error("EmptyPronunciation",
                        "empty pronunciation for '" + std::string(word) + "'");
    }
    std::string key;
    key.reserve(word.size());
    for (char c : word) key.push_back(detail::ascii_lower(c));
    entries_[key].push_back(std::move(phones));
  }

  const Variants* find(std::string_view word) const {
    auto it = entries_.find(std::string(word));
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool contains(std::string_view word) const { return find(word) != nullptr; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::map<std::string, Variants>& entries() const noexcept { return entries_; }

  friend bool operator==(const PronunciationDict&, const PronunciationDict&) = default;

 private:
  std::map<std::string, Variants> entries_;
};

/// Reads the CMUdict-style format: "WORD  PH1 PH2", "WORD(2)  ...",
/// ";;;" comments. Variant suffixes are grouped under the base word in the
/// order they appear.
inline PronunciationDict load_dictionary(std::istream& in) {
  PronunciationDict dict;
  std::string line;
  std::size_t line_no = 0;
  auto malformed = [&](const std::string& why) {
    return input_error("MalformedLine", "dictionary line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(";;;", 0) == 0) continue;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;  // blank line
    if (word.size() > 3 && word.back() == ')') {
      auto open = word.rfind('(');
      if (open != std::string::npos && open > 0) {
        auto digits = word.substr(open + 1, word.size() - open - 2);
        if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) {
              return std::isdigit(static_cast<unsigned char>(c));
            })) {
          word.resize(open);
        }
      }
    }
    std::vector<Phone> phones;
    std::string sym;
    while (fields >> sym) {
      auto p = Phone::parse(sym);
      if (!p) throw malformed("unknown phone '" + sym + "'");
      phones.push_back(*p);
    }
    if (phones.empty()) throw malformed("no phones for '" + word + "'");
    dict.add(word, std::move(phones));
  }
  return dict;
}

inline void save_dictionary(const PronunciationDict& dict, std::ostream& out) {
  for (const auto& [word, variants] : dict.entries()) {
    std::string upper;
    for (char c : word) upper.push_back(detail::ascii_upper(c));
    for (std::size_t v = 0; v < variants.size(); ++v) {
      out << upper;
      if (v > 0) out << '(' << (v + 1) << ')';
      out << ' ';
      for (const auto& p : variants[v]) out << ' ' << p.str();
      out << '\n';
    }
  }
}

/// First listed pronunciation. Throws MissingPronunciation for OOV words.
inline const std::vector<Phone>& lookup(const PronunciationDict& dict, const WordToken& word) {
  const auto* variants = dict.find(word.text());
  if (variants == nullptr) {
    throw input_error("MissingPronunciation", "no pronunciation for '" + word.text() + "'");
  }
  return variants->front();
}

}  // namespace correctspeech
