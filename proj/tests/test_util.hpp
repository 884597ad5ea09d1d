#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "depfuse/depfuse.hpp"

namespace testutil {

inline std::string data_path(const std::string& name) {
  return std::string(DEPFUSE_SOURCE_DIR) + "/data/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("depfuse_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline depfuse::Post post(std::string id, std::string text, depfuse::ClassLabel label) {
  return depfuse::Post{std::move(id), std::move(text), label, std::nullopt};
}

inline const depfuse::ProfanityModel& shipped_profanity() {
  static const auto model = depfuse::ProfanityModel::load(data_path("profanity.weights"));
  return model;
}

inline const depfuse::MoralLexicon& toy_lexicon() {
  static const auto lex = depfuse::MoralLexicon::load_tsv(data_path("lexicon_toy.tsv"));
  return lex;
}

}  // namespace testutil
