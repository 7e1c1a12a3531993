#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lsars/corpus.hpp"

namespace lsars::testing {

inline RawCheckin raw(std::string user, std::string item, double lat, double lon,
                      std::vector<std::string> content = {},
                      std::vector<std::string> review = {}) {
  RawCheckin r;
  r.user = std::move(user);
  r.item = std::move(item);
  r.location = {lat, lon};
  r.content_words = std::move(content);
  r.review_words = std::move(review);
  return r;
}

inline CheckinCorpus make_corpus(const std::vector<RawCheckin>& records) {
  return corpus_from_raw(records);
}

// Unique scratch directory, removed on scope exit.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("lsars-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace lsars::testing
