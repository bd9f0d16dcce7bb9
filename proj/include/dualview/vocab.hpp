#pragma once

// Subword vocabulary: reserved markers, a full byte table as fallback, and
// frequency-ranked whole words. Tokenization is greedy longest-match inside
// each whitespace word, so misspelled or unseen words degrade to byte pieces
// instead of an unknown token.

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace dualview::enc {

struct SubwordVocab {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kReserved = 4;
  static constexpr int kByteTable = 256;

  std::vector<std::string> tokens;               // id -> piece
  std::unordered_map<std::string, int> lookup;   // piece -> id (words win over bytes)
  std::size_t max_piece_len = 1;

  int size() const { return static_cast<int>(tokens.size()); }
  int word_count() const { return size() - kReserved - kByteTable; }
};

SubwordVocab build_vocab(const std::vector<std::string>& texts, int target_size);

// exactly n ids: greedy longest-match, then pad or truncate
std::vector<int> tokenize(const std::string& text, const SubwordVocab& vocab, int n);

// no padding/markers; building block for the decoder
std::vector<int> tokenize_unpadded(const std::string& text, const SubwordVocab& vocab);

std::string detokenize(const std::vector<int>& ids, const SubwordVocab& vocab);

void save_vocab(const std::filesystem::path& file, const SubwordVocab& vocab);
SubwordVocab load_vocab(const std::filesystem::path& file);

}  // namespace dualview::enc
