#pragma once

#include <string>
#include <vector>

namespace lsars {

// Seed lists used to anchor the latent sentiment labels: records whose
// review words hit one polarity more than the other start with that
// sentiment. File format: one token per line under "[positive]" /
// "[negative]" section headers; '#' starts a comment.
struct SentimentLexicon {
  std::vector<std::string> positive;
  std::vector<std::string> negative;

  static SentimentLexicon builtin();
  static SentimentLexicon from_file(const std::string& path);
};

}  // namespace lsars
