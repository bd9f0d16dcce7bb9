#include <algorithm>
#include <cctype>
#include <sstream>

#include "dualview/errors.hpp"
#include "dualview/pairing.hpp"

namespace dualview::pairing {

std::vector<std::string> split_whitespace(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream is(text);
  std::string w;
  while (is >> w) words.push_back(w);
  return words;
}

std::string strip_punctuation(const std::string& word) {
  std::size_t lo = 0, hi = word.size();
  while (lo < hi && !std::isalnum(static_cast<unsigned char>(word[lo]))) ++lo;
  while (hi > lo && !std::isalnum(static_cast<unsigned char>(word[hi - 1]))) --hi;
  std::string out = word.substr(lo, hi - lo);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_stop_word(const std::string& w) {
  static const std::set<std::string> kStop = {
      "the", "a",    "an",  "and", "or",   "we",  "to",  "of", "it", "is", "in",  "on",
      "at",  "this", "that", "now", "then", "here", "us", "you", "can", "as", "be", "with"};
  return kStop.count(w) > 0;
}

void FilterConfig::validate() const {
  std::string bad;
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0))
    bad += " confidence_threshold=" + std::to_string(confidence_threshold) + ";";
  if (min_words < 1) bad += " min_words=" + std::to_string(min_words) + ";";
  if (!bad.empty()) throw ConfigError("invalid filter config:" + bad);
}

std::vector<corpus::TranscriptSentence> segment_sentences(
    const std::vector<corpus::TranscriptSentence>& stream, const FilterConfig& cfg) {
  std::vector<corpus::TranscriptSentence> out;
  for (const auto& sentence : stream) {
    const auto words = split_whitespace(sentence.text);
    const bool has_confidences = sentence.source == 'A';
    if (has_confidences && !sentence.word_confidences.empty() &&
        sentence.word_confidences.size() != words.size()) {
      throw ContractError("segment_sentences: " + std::to_string(words.size()) +
                          " words but " + std::to_string(sentence.word_confidences.size()) +
                          " confidences");
    }

    // a stop symbol anywhere in a word closes the sub-sentence after it
    auto closes = [&](const std::string& w) {
      return std::any_of(w.begin(), w.end(), [&](char c) { return cfg.stop_symbols.count(c) > 0; });
    };
    const bool any_split = std::any_of(words.begin(), words.end(), closes);
    if (!any_split || words.empty()) {
      out.push_back(sentence);
      continue;
    }

    const double duration = sentence.end_s - sentence.start_s;
    const auto total = static_cast<double>(words.size());
    std::size_t begin = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (!closes(words[i]) && i + 1 != words.size()) continue;
      const std::size_t end = i + 1;
      corpus::TranscriptSentence piece;
      piece.video_id = sentence.video_id;
      piece.source = sentence.source;
      // split timestamps interpolate linearly by word count
      piece.start_s = sentence.start_s + duration * static_cast<double>(begin) / total;
      piece.end_s = sentence.start_s + duration * static_cast<double>(end) / total;
      std::string text;
      for (std::size_t k = begin; k < end; ++k) {
        if (k > begin) text += ' ';
        text += words[k];
      }
      piece.text = std::move(text);
      if (has_confidences && !sentence.word_confidences.empty()) {
        piece.word_confidences.assign(sentence.word_confidences.begin() + static_cast<long>(begin),
                                      sentence.word_confidences.begin() + static_cast<long>(end));
      }
      out.push_back(std::move(piece));
      begin = end;
    }
  }
  return out;
}

}  // namespace dualview::pairing
