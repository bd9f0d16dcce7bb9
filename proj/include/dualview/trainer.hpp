#pragma once

// Contrastive training loop: shuffled minibatches of clip-text pairs,
// frame sampling, dual-branch encoding, combined loss, Adam.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dualview/encoder.hpp"
#include "dualview/pairing.hpp"
#include "dualview/world.hpp"

namespace dualview::objective {

enum class Views { a_only, w_only, both };

Views views_from_string(const std::string& s);
std::string views_to_string(Views v);

struct TrainConfig {
  enc::HyperConfig hyper;
  Views views = Views::both;
  long long steps = 300;
  double lr = 1e-3;
  std::uint64_t seed = 1;
};

struct TrainReportRow {
  long long step;
  double total, infonce, milnce, grad_norm;
};

struct TrainReport {
  std::vector<TrainReportRow> rows;
  double wall_time_s = 0;
};

// read-only view of frame features, shared across parallel runs
class FeatureStore {
 public:
  explicit FeatureStore(const corpus::World& world);
  const corpus::VideoRecord& video(const std::string& video_id) const;

 private:
  std::map<std::string, const corpus::VideoRecord*> videos_;
};

enc::EncoderParams train(const FeatureStore& features,
                         const std::vector<pairing::ClipTextPair>& pairs,
                         const enc::SubwordVocab& vocab, int feature_dim,
                         const TrainConfig& cfg, TrainReport* report = nullptr);

void write_train_report(const std::filesystem::path& file, const TrainReport& report);

}  // namespace dualview::objective
