#include "dualview/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "dualview/errors.hpp"

namespace dualview::zeroshot {

long rank_of(const RankedResult& result, const std::map<std::string, std::string>& gt) {
  auto it = gt.find(result.query_id);
  if (it == gt.end()) {
    throw ContractError("no ground truth for query '" + result.query_id + "'");
  }
  for (std::size_t i = 0; i < result.ranking.size(); ++i) {
    if (result.ranking[i].first == it->second) return static_cast<long>(i) + 1;
  }
  throw ContractError("ground truth '" + it->second + "' absent from ranking of query '" +
                      result.query_id + "'");
}

double recall_at_k(const std::vector<RankedResult>& results,
                   const std::map<std::string, std::string>& gt, int k) {
  if (results.empty()) throw ContractError("recall_at_k: no queries");
  long hits = 0;
  for (const auto& r : results) {
    if (rank_of(r, gt) <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

long median_rank(const std::vector<RankedResult>& results,
                 const std::map<std::string, std::string>& gt) {
  if (results.empty()) throw ContractError("median_rank: no queries");
  std::vector<long> ranks;
  ranks.reserve(results.size());
  for (const auto& r : results) ranks.push_back(rank_of(r, gt));
  std::sort(ranks.begin(), ranks.end());
  return ranks[(ranks.size() - 1) / 2];
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw ContractError("average_precision: scores and labels differ in length");
  }
  const long positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0) throw ContractError("average_precision: undefined without positives");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];  // stable keeps ascending-index tie-break
  });
  double ap = 0.0;
  long seen_pos = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] == 1) {
      ++seen_pos;
      ap += static_cast<double>(seen_pos) / static_cast<double>(k + 1);
    }
  }
  return ap / static_cast<double>(positives);
}

F1Result f1_per_class(const std::vector<int>& predictions, const std::vector<int>& labels,
                      int n_classes) {
  if (predictions.size() != labels.size()) {
    throw ContractError("f1_per_class: predictions and labels differ in length");
  }
  F1Result result;
  result.per_class.assign(static_cast<std::size_t>(n_classes), 0.0);
  for (int c = 0; c < n_classes; ++c) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool pred = predictions[i] == c, truth = labels[i] == c;
      tp += pred && truth;
      fp += pred && !truth;
      fn += !pred && truth;
    }
    const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    result.per_class[static_cast<std::size_t>(c)] = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  result.mean = std::accumulate(result.per_class.begin(), result.per_class.end(), 0.0) /
                std::max<std::size_t>(result.per_class.size(), 1);
  return result;
}

namespace {

// mean AP over component values with at least one positive sample
double pooled_ap(const std::vector<std::vector<double>>& triplet_scores,
                 const std::vector<int>& true_class,
                 const std::vector<long long>& value_of_class) {
  std::set<long long> values(value_of_class.begin(), value_of_class.end());
  double sum = 0.0;
  int counted = 0;
  for (long long value : values) {
    std::vector<double> scores(triplet_scores.size());
    std::vector<int> labels(triplet_scores.size());
    bool any_pos = false;
    for (std::size_t s = 0; s < triplet_scores.size(); ++s) {
      double best = 0.0;
      bool first = true;
      for (std::size_t c = 0; c < value_of_class.size(); ++c) {
        if (value_of_class[c] != value) continue;
        const double sc = triplet_scores[s][c];
        best = first ? sc : std::max(best, sc);
        first = false;
      }
      scores[s] = best;
      labels[s] = value_of_class[static_cast<std::size_t>(true_class[s])] == value ? 1 : 0;
      any_pos = any_pos || labels[s] == 1;
    }
    if (!any_pos) continue;
    sum += average_precision(scores, labels);
    ++counted;
  }
  return counted > 0 ? sum / counted : 0.0;
}

}  // namespace

TripletAp triplet_component_ap(const std::vector<std::vector<double>>& triplet_scores,
                               const std::vector<int>& true_class,
                               const std::vector<TripletComponents>& components) {
  const std::size_t n_classes = components.size();
  if (triplet_scores.empty()) throw ContractError("triplet_component_ap: no samples");
  for (const auto& row : triplet_scores) {
    if (row.size() != n_classes) {
      throw ContractError("triplet_component_ap: score row does not cover every class");
    }
  }
  for (int c : true_class) {
    if (c < 0 || static_cast<std::size_t>(c) >= n_classes) {
      throw ContractError("triplet_component_ap: class " + std::to_string(c) + " unmapped");
    }
  }
  for (const auto& comp : components) {
    if (comp.instrument < 0 || comp.verb < 0 || comp.target < 0) {
      throw ContractError("triplet_component_ap: class missing component ids");
    }
  }

  auto key = [](long long a, long long b) { return a * 100000 + b; };
  std::vector<long long> inst(n_classes), verb(n_classes), targ(n_classes);
  std::vector<long long> iv(n_classes), it_(n_classes), ivt(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    inst[c] = components[c].instrument;
    verb[c] = components[c].verb;
    targ[c] = components[c].target;
    iv[c] = key(components[c].instrument, components[c].verb);
    it_[c] = key(components[c].instrument, components[c].target);
    ivt[c] = static_cast<long long>(c);  // raw triplet classes
  }
  TripletAp out;
  out.i = pooled_ap(triplet_scores, true_class, inst);
  out.v = pooled_ap(triplet_scores, true_class, verb);
  out.t = pooled_ap(triplet_scores, true_class, targ);
  out.iv = pooled_ap(triplet_scores, true_class, iv);
  out.it = pooled_ap(triplet_scores, true_class, it_);
  out.ivt = pooled_ap(triplet_scores, true_class, ivt);
  return out;
}

}  // namespace dualview::zeroshot
