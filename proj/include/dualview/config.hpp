#pragma once

// One structured config file drives every command; flags override fields.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dualview/caption.hpp"
#include "dualview/encoder.hpp"
#include "dualview/pairing.hpp"
#include "dualview/trainer.hpp"
#include "dualview/world.hpp"
#include "json.hpp"

namespace dualview {

struct EvalConfig {
  std::vector<int> k_list = {1, 5, 10};
  double window_s = 4.0;
  double stride_s = 2.0;
  double iou_threshold = 0.5;
  int max_queries = 200;
};

struct AblateConfig {
  std::vector<std::string> views = {"a", "w", "both"};
  std::vector<std::string> clip_lengths = {"random", "2", "4", "10"};
  std::vector<int> frames = {1, 2, 4};
};

struct RunConfig {
  std::filesystem::path out_dir = "out";
  std::filesystem::path corpus_dir;  // resolved under out_dir when relative
  std::uint64_t seed = 7;

  corpus::WorldConfig world;
  int eval_videos = 8;  // held-out split size
  pairing::FilterConfig filter;
  enc::HyperConfig hyper;
  objective::Views views = objective::Views::both;
  pairing::ClipLengthConfig clip_length;
  int pairs_per_a = 1;
  long long train_steps = 300;
  double lr = 1e-3;
  int vocab_size = 320;
  EvalConfig eval;
  caption::DecoderConfig captioner;
  AblateConfig ablate;

  void validate() const;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& file);
};

}  // namespace dualview
