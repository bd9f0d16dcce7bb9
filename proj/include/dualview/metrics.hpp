#pragma once

// Ranking and classification metrics for the frozen-encoder evaluations.

#include <map>
#include <string>
#include <vector>

namespace dualview::zeroshot {

struct RankedResult {
  std::string query_id;
  // gallery ids with scores, scores non-increasing; a permutation of the gallery
  std::vector<std::pair<std::string, double>> ranking;
};

// 1-based rank of the ground-truth gallery item; throws when gt is missing
long rank_of(const RankedResult& result, const std::map<std::string, std::string>& gt);

double recall_at_k(const std::vector<RankedResult>& results,
                   const std::map<std::string, std::string>& gt, int k);

// even count takes the lower of the two central values
long median_rank(const std::vector<RankedResult>& results,
                 const std::map<std::string, std::string>& gt);

// interpolation-free area under the precision-recall curve;
// ties broken by ascending index
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

struct F1Result {
  std::vector<double> per_class;
  double mean = 0;
};

F1Result f1_per_class(const std::vector<int>& predictions, const std::vector<int>& labels,
                      int n_classes);

struct TripletComponents {
  int instrument = -1;
  int verb = -1;
  int target = -1;
};

struct TripletAp {
  double i = 0, v = 0, t = 0, iv = 0, it = 0, ivt = 0;
};

// component scores pool the max over triplet classes sharing the component
TripletAp triplet_component_ap(const std::vector<std::vector<double>>& triplet_scores,
                               const std::vector<int>& true_class,
                               const std::vector<TripletComponents>& components);

}  // namespace dualview::zeroshot
