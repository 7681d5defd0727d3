#pragma once

#include <sstream>
#include <string>
#include <vector>

namespace asrlab {

// Ordered word tokens; tokens are non-empty and carry no whitespace.
struct Transcript {
  std::vector<std::string> words;

  bool operator==(const Transcript&) const = default;

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out += ' ';
      out += words[i];
    }
    return out;
  }

  static Transcript parse(const std::string& text) {
    Transcript t;
    std::istringstream in(text);
    std::string w;
    while (in >> w) t.words.push_back(w);
    return t;
  }
};

// One decoded word with its audio span and a score in [0,1].
struct WordHypothesis {
  std::string word;
  double start = 0.0;     // seconds
  double duration = 0.0;  // seconds
  double confidence = 1.0;
};

}  // namespace asrlab
