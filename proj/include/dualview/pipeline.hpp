#pragma once

// In-memory pipeline stages shared by the CLI, the python bindings, and the
// acceptance suite, plus the command wrappers that add file I/O.

#include <filesystem>
#include <functional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dualview/caption.hpp"
#include "dualview/config.hpp"
#include "dualview/retrieval.hpp"
#include "dualview/trainer.hpp"

namespace dualview::pipeline {

using MetricRows = std::vector<std::pair<std::string, double>>;

void write_metrics_csv(const std::filesystem::path& file, const MetricRows& rows);

// held-out world: separate id space and seed stream, uncorrected noise knobs
// except W keyword corruption, which is zero (mirrors expert-cleaned queries)
corpus::WorldConfig val_world_config(const RunConfig& cfg);

corpus::World make_train_world(const RunConfig& cfg);
corpus::World make_val_world(const RunConfig& cfg);

enc::SubwordVocab make_vocab(const corpus::World& train, const RunConfig& cfg);

std::vector<pairing::ClipTextPair> make_pairs(const corpus::World& world, const RunConfig& cfg,
                                              const pairing::ClipLengthConfig& len,
                                              std::uint64_t seed,
                                              pairing::PairStats* stats = nullptr);

struct TrainedModel {
  enc::EncoderParams params;
  enc::SubwordVocab vocab;
  objective::TrainReport report;
};

TrainedModel train_model(const corpus::World& train, const RunConfig& cfg,
                         objective::Views views, const pairing::ClipLengthConfig& len,
                         int frames_per_clip, std::uint64_t seed);

// an untrained model with the same architecture (the random baseline)
TrainedModel random_model(const corpus::World& train, const RunConfig& cfg, std::uint64_t seed);

// sentence-aligned held-out queries: kept W sentences with their intervals
struct EvalQuery {
  std::string video_id;
  double start_s = 0, end_s = 0;
  std::string text;
  int class_id = -1;  // majority frame class of the interval
};

std::vector<EvalQuery> eval_queries(const corpus::World& val, const RunConfig& cfg);

struct RetrievalEval {
  MetricRows metrics;
  double recall10 = 0;
};

RetrievalEval eval_retrieval_core(const corpus::World& val, const enc::EncoderParams& params,
                                  const enc::SubwordVocab& vocab, const RunConfig& cfg);

MetricRows eval_grounding_core(const corpus::World& val, const enc::EncoderParams& params,
                               const enc::SubwordVocab& vocab, const RunConfig& cfg,
                               const std::filesystem::path& actmap_dir = {});

struct ZeroshotEval {
  MetricRows metrics;
  std::vector<std::tuple<int, std::string, double, double>> per_class;  // id, name, ap, f1
  double mean_ap = 0;
};

ZeroshotEval eval_zeroshot_core(const corpus::World& val, const enc::EncoderParams& params,
                                const enc::SubwordVocab& vocab,
                                const zeroshot::PromptClassSet& prompts, const RunConfig& cfg);

struct CaptionEval {
  MetricRows metrics;  // bleu_1..4, meteor, rouge_l
  std::vector<std::pair<corpus::CaptionRow, std::string>> predictions;
  double bleu1 = 0;
};

CaptionEval eval_caption_core(const corpus::World& val, const enc::EncoderParams& params,
                              const enc::SubwordVocab& vocab,
                              const caption::DecoderParams& decoder, const RunConfig& cfg);

caption::DecoderParams train_captioner_core(const corpus::World& train,
                                            const enc::EncoderParams& params,
                                            const enc::SubwordVocab& vocab, const RunConfig& cfg,
                                            std::uint64_t seed);

zeroshot::PromptClassSet synthetic_prompts(const corpus::WorldConfig& world,
                                           const std::string& task);

// ---- command wrappers (file I/O, --force guards) ----

void cmd_gen_data(const RunConfig& cfg, bool force);
pairing::PairStats cmd_build_pairs(const RunConfig& cfg, bool force);
void cmd_train(const RunConfig& cfg, bool force);
void cmd_eval_retrieval(const RunConfig& cfg, const std::filesystem::path& ckpt, bool force);
void cmd_eval_grounding(const RunConfig& cfg, const std::filesystem::path& ckpt, bool force);
void cmd_eval_zeroshot(const RunConfig& cfg, const std::filesystem::path& ckpt,
                       const std::filesystem::path& prompts_file, bool force);
void cmd_train_captioner(const RunConfig& cfg, const std::filesystem::path& ckpt, bool force);
void cmd_eval_caption(const RunConfig& cfg, const std::filesystem::path& ckpt, bool force);
void cmd_ablate(const RunConfig& cfg, bool force);

// bounded worker pool; results must be joined in fixed order by the caller
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace dualview::pipeline
