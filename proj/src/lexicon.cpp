#include "lsars/lexicon.hpp"

#include <fstream>

#include "lsars/errors.hpp"

namespace lsars {

SentimentLexicon SentimentLexicon::builtin() {
  return {
      {"good", "great", "excellent", "amazing", "awesome", "wonderful",
       "fantastic", "delicious", "friendly", "perfect", "love", "best",
       "tasty", "cozy", "clean"},
      {"bad", "terrible", "awful", "horrible", "worst", "poor",
       "disappointing", "dirty", "rude", "slow", "bland", "overpriced",
       "hate", "noisy", "stale"},
  };
}

SentimentLexicon SentimentLexicon::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lexicon file: " + path);

  SentimentLexicon lexicon;
  std::vector<std::string>* section = nullptr;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(begin, end - begin + 1);
    if (token == "[positive]") {
      section = &lexicon.positive;
    } else if (token == "[negative]") {
      section = &lexicon.negative;
    } else if (token.front() == '[') {
      throw ParseError("lexicon line " + std::to_string(line_number) +
                       ": unknown section " + token);
    } else if (section == nullptr) {
      throw ParseError("lexicon line " + std::to_string(line_number) +
                       ": token before any [positive]/[negative] section");
    } else {
      section->push_back(token);
    }
  }
  return lexicon;
}

}  // namespace lsars
