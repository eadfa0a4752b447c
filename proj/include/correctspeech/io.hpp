#pragma once

// File helpers. All outputs go through a temp file + rename so a crashed
// run never leaves a half-written artifact behind.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "correctspeech/audio.hpp"
#include "correctspeech/error.hpp"

namespace correctspeech {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("IoError", "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw input_error("SchemaError", path.string() + ": invalid JSON: " + e.what());
  }
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw processing_error("IoError", "cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw processing_error("IoError", "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw processing_error("IoError", "cannot rename onto '" + path.string() + "'");
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_file_atomic(path, doc.dump(2) + "\n");
}

inline void write_wav_file(const std::filesystem::path& path, const Waveform& w) {
  std::ostringstream ss(std::ios::binary);
  write_wav(w, ss);
  write_file_atomic(path, ss.str());
}

}  // namespace correctspeech
