#pragma once

// Frozen-encoder evaluation primitives: cosine gallery ranking, sliding
// window grounding, prompt classification, and per-frame activation maps.

#include <filesystem>
#include <string>
#include <vector>

#include "dualview/encoder.hpp"
#include "dualview/metrics.hpp"
#include "dualview/world.hpp"

namespace dualview::zeroshot {

struct RetrievalIndex {
  std::vector<std::string> ids;
  std::vector<double> latents;  // row-major [n x d], rows unit norm
  int dim = 0;

  static RetrievalIndex build(std::vector<std::string> ids,
                              const std::vector<std::vector<double>>& raw_latents);
  std::size_t size() const { return ids.size(); }
};

// descending score, ties by ascending gallery id
RankedResult rank_gallery(const std::vector<double>& query_latent, const RetrievalIndex& index,
                          const std::string& query_id = "");

struct GroundedSegment {
  double start_s = 0;
  double end_s = 0;
  double score = 0;
};

double interval_iou(double a_start, double a_end, double b_start, double b_end);

// segments of window_s every stride_s, ranked by cosine to the query
std::vector<GroundedSegment> ground_query(const corpus::VideoRecord& video,
                                          const std::vector<double>& query_latent,
                                          double window_s, double stride_s,
                                          const enc::EncoderParams& params);

// cosine between one latent and each row of a class-prompt latent matrix
std::vector<double> classify(const std::vector<double>& latent,
                             const std::vector<std::vector<double>>& prompt_latents);

// one cosine per frame of the video against the query latent
std::vector<double> activation_map(const corpus::VideoRecord& video,
                                   const std::vector<double>& query_latent,
                                   const enc::EncoderParams& params);

void write_activation_csv(const std::filesystem::path& file, const corpus::VideoRecord& video,
                          const std::vector<double>& series);

struct PromptClass {
  int id = 0;
  std::string name;
  std::string prompt;
  TripletComponents components;  // triplet task only
};

struct PromptClassSet {
  std::string task;  // tool | phase | triplet
  std::vector<PromptClass> classes;
};

void save_prompts(const std::filesystem::path& file, const PromptClassSet& set);
PromptClassSet load_prompts(const std::filesystem::path& file);

// batch helpers used by the pipeline: encode with a throwaway tape
std::vector<std::vector<double>> encode_texts_frozen(const std::vector<std::string>& texts,
                                                     const enc::EncoderParams& params,
                                                     const enc::SubwordVocab& vocab);
std::vector<double> encode_clip_frozen(const corpus::VideoRecord& video, double start_s,
                                       double end_s, const enc::EncoderParams& params);

}  // namespace dualview::zeroshot
