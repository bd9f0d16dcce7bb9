#include "dualview/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "dualview/errors.hpp"
#include "json.hpp"

namespace dualview::enc {

namespace {

SubwordVocab assemble(const std::vector<std::string>& words) {
  SubwordVocab v;
  v.tokens = {"<pad>", "<unk>", "<bos>", "<eos>"};
  for (int b = 0; b < SubwordVocab::kByteTable; ++b) {
    v.tokens.push_back(std::string(1, static_cast<char>(b)));
  }
  for (const auto& w : words) v.tokens.push_back(w);
  for (int id = 0; id < v.size(); ++id) {
    v.lookup[v.tokens[static_cast<std::size_t>(id)]] = id;  // later entries win
    v.max_piece_len = std::max(v.max_piece_len, v.tokens[static_cast<std::size_t>(id)].size());
  }
  return v;
}

}  // namespace

SubwordVocab build_vocab(const std::vector<std::string>& texts, int target_size) {
  if (texts.empty()) throw ConfigError("build_vocab: empty corpus");
  const int reserved = SubwordVocab::kReserved + SubwordVocab::kByteTable;
  if (target_size < reserved) {
    throw ConfigError("build_vocab: target_size " + std::to_string(target_size) +
                      " below byte fallback space " + std::to_string(reserved));
  }
  std::map<std::string, long> freq;  // ordered map keeps ties deterministic
  for (const auto& text : texts) {
    std::istringstream is(text);
    std::string w;
    while (is >> w) freq[w]++;
  }
  std::vector<std::pair<std::string, long>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  const auto budget = static_cast<std::size_t>(target_size - reserved);
  for (const auto& [word, count] : ranked) {
    if (words.size() >= budget) break;
    words.push_back(word);
  }
  return assemble(words);
}

std::vector<int> tokenize_unpadded(const std::string& text, const SubwordVocab& vocab) {
  std::vector<int> ids;
  std::istringstream is(text);
  std::string word;
  while (is >> word) {
    std::size_t pos = 0;
    while (pos < word.size()) {
      const std::size_t longest = std::min(vocab.max_piece_len, word.size() - pos);
      int id = SubwordVocab::kUnk;
      for (std::size_t len = longest; len >= 1; --len) {
        auto it = vocab.lookup.find(word.substr(pos, len));
        if (it != vocab.lookup.end()) {
          id = it->second;
          pos += len;
          break;
        }
      }
      if (id == SubwordVocab::kUnk) ++pos;  // unreachable with a byte table
      ids.push_back(id);
    }
  }
  return ids;
}

std::vector<int> tokenize(const std::string& text, const SubwordVocab& vocab, int n) {
  auto ids = tokenize_unpadded(text, vocab);
  ids.resize(static_cast<std::size_t>(n), SubwordVocab::kPad);
  return ids;
}

std::string detokenize(const std::vector<int>& ids, const SubwordVocab& vocab) {
  std::string out;
  for (int id : ids) {
    if (id == SubwordVocab::kPad || id == SubwordVocab::kBos || id == SubwordVocab::kEos) continue;
    if (id < 0 || id >= vocab.size()) {
      throw ContractError("detokenize: id " + std::to_string(id) + " out of range");
    }
    if (!out.empty()) out += ' ';
    out += vocab.tokens[static_cast<std::size_t>(id)];
  }
  return out;
}

void save_vocab(const std::filesystem::path& file, const SubwordVocab& vocab) {
  nlohmann::json j;
  j["words"] = std::vector<std::string>(
      vocab.tokens.begin() + SubwordVocab::kReserved + SubwordVocab::kByteTable,
      vocab.tokens.end());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IntegrityError("cannot open for writing: " + file.string());
  out << j.dump(2) << '\n';
}

SubwordVocab load_vocab(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + file.string());
  nlohmann::json j;
  try {
    in >> j;
    return assemble(j.at("words").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

}  // namespace dualview::enc
