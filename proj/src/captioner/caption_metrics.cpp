#include "dualview/caption_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "dualview/errors.hpp"

namespace dualview::caption {

namespace {

std::vector<std::string> tokens_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string w;
  while (is >> w) {
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.push_back(w);
  }
  return out;
}

std::map<std::string, long> ngram_counts(const std::vector<std::string>& words, int n) {
  std::map<std::string, long> counts;
  if (static_cast<int>(words.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= words.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += words[i + static_cast<std::size_t>(k)];
    }
    counts[key]++;
  }
  return counts;
}

bool ends_with(const std::string& w, const char* suffix) {
  const std::size_t n = std::char_traits<char>::length(suffix);
  return w.size() >= n && w.compare(w.size() - n, n, suffix) == 0;
}

}  // namespace

double bleu_n(const std::string& candidate, const std::vector<std::string>& references, int n) {
  if (n < 1 || n > 4) throw ContractError("bleu_n: order must be in 1..4");
  if (references.empty()) throw ContractError("bleu_n: no references");
  const auto cand = tokens_of(candidate);
  if (cand.empty()) return 0.0;

  double log_sum = 0.0;
  for (int order = 1; order <= n; ++order) {
    const auto counts = ngram_counts(cand, order);
    long total = 0, clipped = 0;
    for (const auto& [gram, count] : counts) total += count;
    if (total == 0) return 0.0;
    for (const auto& [gram, count] : counts) {
      long best_ref = 0;
      for (const auto& ref : references) {
        const auto ref_counts = ngram_counts(tokens_of(ref), order);
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) best_ref = std::max(best_ref, it->second);
      }
      clipped += std::min(count, best_ref);
    }
    if (clipped == 0) return 0.0;
    log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
  }

  // brevity penalty against the closest reference length (ties take the shorter)
  const auto c = static_cast<long>(cand.size());
  long r = static_cast<long>(tokens_of(references.front()).size());
  for (const auto& ref : references) {
    const auto len = static_cast<long>(tokens_of(ref).size());
    if (std::abs(len - c) < std::abs(r - c) || (std::abs(len - c) == std::abs(r - c) && len < r)) {
      r = len;
    }
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / c);
  return bp * std::exp(log_sum / n);
}

double rouge_l(const std::string& candidate, const std::string& reference) {
  const auto cand = tokens_of(candidate);
  const auto ref = tokens_of(reference);
  if (cand.empty() || ref.empty()) return 0.0;
  // longest common subsequence
  std::vector<std::vector<long>> dp(cand.size() + 1, std::vector<long>(ref.size() + 1, 0));
  for (std::size_t i = 1; i <= cand.size(); ++i) {
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      dp[i][j] = cand[i - 1] == ref[j - 1] ? dp[i - 1][j - 1] + 1
                                           : std::max(dp[i - 1][j], dp[i][j - 1]);
    }
  }
  const double lcs = static_cast<double>(dp[cand.size()][ref.size()]);
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(cand.size());
  const double r = lcs / static_cast<double>(ref.size());
  const double beta2 = 1.2 * 1.2;
  return (1.0 + beta2) * p * r / (r + beta2 * p);
}

std::string stem_word(const std::string& word) {
  std::string w = word;
  std::transform(w.begin(), w.end(), w.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ies")) {
    w.resize(w.size() - 2);  // -> "i"
  } else if (!ends_with(w, "ss") && ends_with(w, "s") && w.size() > 3) {
    w.resize(w.size() - 1);
  }
  bool stripped = false;
  if (ends_with(w, "ing") && w.size() >= 6) {
    w.resize(w.size() - 3);
    stripped = true;
  } else if (ends_with(w, "ed") && w.size() >= 5) {
    w.resize(w.size() - 2);
    stripped = true;
  }
  if (stripped && w.size() >= 2 && w[w.size() - 1] == w[w.size() - 2]) {
    const char last = w.back();
    if (last != 'l' && last != 's' && last != 'z') w.pop_back();
  }
  return w;
}

double meteor_basic(const std::string& candidate, const std::string& reference) {
  const auto cand = tokens_of(candidate);
  const auto ref = tokens_of(reference);
  if (cand.empty() || ref.empty()) return 0.0;

  // stage one: exact matches in order; stage two: stemmed matches on the rest
  std::vector<int> cand_to_ref(cand.size(), -1);
  std::vector<bool> ref_used(ref.size(), false);
  for (std::size_t i = 0; i < cand.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!ref_used[j] && cand[i] == ref[j]) {
        cand_to_ref[i] = static_cast<int>(j);
        ref_used[j] = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (cand_to_ref[i] != -1) continue;
    const auto stem = stem_word(cand[i]);
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!ref_used[j] && stem == stem_word(ref[j])) {
        cand_to_ref[i] = static_cast<int>(j);
        ref_used[j] = true;
        break;
      }
    }
  }

  long m = 0;
  for (int j : cand_to_ref) m += j != -1;
  if (m == 0) return 0.0;
  const double p = static_cast<double>(m) / static_cast<double>(cand.size());
  const double r = static_cast<double>(m) / static_cast<double>(ref.size());
  const double f_mean = 10.0 * p * r / (r + 9.0 * p);

  // chunks: maximal runs aligned contiguously on both sides
  long chunks = 0;
  int prev_ref = -2;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (cand_to_ref[i] == -1) {
      prev_ref = -2;
      continue;
    }
    if (cand_to_ref[i] != prev_ref + 1) ++chunks;
    prev_ref = cand_to_ref[i];
  }
  const double frag = static_cast<double>(chunks) / static_cast<double>(m);
  return f_mean * (1.0 - 0.5 * frag * frag * frag);
}

}  // namespace dualview::caption
