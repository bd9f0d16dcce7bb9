#pragma once

// From two transcript streams to training-ready clip-text pairs:
// segment at stop symbols -> per-view filtering -> overlap search ->
// random clip growth around a center timestamp.

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "dualview/rng.hpp"
#include "dualview/world.hpp"

namespace dualview::pairing {

struct FilterConfig {
  std::set<char> stop_symbols = {'.', ',', ';', '?', '!'};
  double confidence_threshold = 0.4;
  std::set<std::string> keyword_list;
  int min_words = 3;

  void validate() const;
};

struct ClipLengthConfig {
  bool fixed = false;    // ablation mode: constant clip length
  double fixed_s = 4.0;
  double min_s = 2.0;
  double max_s = 10.0;
};

struct ClipTextPair {
  std::string video_id;
  double clip_start_s = 0;
  double clip_end_s = 0;
  double center_s = 0;
  corpus::TranscriptSentence a_sentence;
  std::vector<corpus::TranscriptSentence> w_sentences;

  // throws ContractError when a type invariant is broken
  void validate(double video_duration_s, double max_clip_s) const;
  bool operator==(const ClipTextPair&) const = default;
};

struct PairStats {
  long a_in = 0, a_segments = 0, a_kept = 0;
  long w_in = 0, w_segments = 0, w_kept = 0;
  long a_no_overlap = 0;
  long pairs = 0;
};

std::vector<corpus::TranscriptSentence> segment_sentences(
    const std::vector<corpus::TranscriptSentence>& stream, const FilterConfig& cfg);

std::vector<corpus::TranscriptSentence> filter_a(
    const std::vector<corpus::TranscriptSentence>& sentences, const FilterConfig& cfg);

std::vector<corpus::TranscriptSentence> filter_w(
    const std::vector<corpus::TranscriptSentence>& sentences, const FilterConfig& cfg);

// all W sentences whose intersection with a has strictly positive length
std::vector<corpus::TranscriptSentence> find_overlaps(
    const corpus::TranscriptSentence& a,
    const std::vector<corpus::TranscriptSentence>& w_pool);

ClipTextPair sample_clip(const corpus::TranscriptSentence& a,
                         const std::vector<corpus::TranscriptSentence>& w_overlaps, Rng& rng,
                         const ClipLengthConfig& len, double video_duration_s);

std::vector<ClipTextPair> build_pairs(const corpus::World& world, const FilterConfig& cfg,
                                      std::uint64_t seed, const ClipLengthConfig& len,
                                      int pairs_per_a = 1, PairStats* stats = nullptr);

void write_pairs(const std::filesystem::path& file, const std::vector<ClipTextPair>& pairs);
std::vector<ClipTextPair> read_pairs(const std::filesystem::path& file);

// shared text helpers
std::vector<std::string> split_whitespace(const std::string& text);
std::string strip_punctuation(const std::string& word);
bool is_stop_word(const std::string& stripped_lowercase_word);

}  // namespace dualview::pairing
