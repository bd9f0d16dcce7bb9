#pragma once

// Caption scoring: clipped n-gram BLEU with brevity penalty, LCS-based
// ROUGE-L, and a METEOR variant with exact plus suffix-stripped matching
// (no synonymy tables).

#include <string>
#include <vector>

namespace dualview::caption {

double bleu_n(const std::string& candidate, const std::vector<std::string>& references, int n);

double rouge_l(const std::string& candidate, const std::string& reference);

double meteor_basic(const std::string& candidate, const std::string& reference);

// basic suffix-stripping stemmer used by meteor_basic; exposed for tests
std::string stem_word(const std::string& word);

}  // namespace dualview::caption
