#include "dualview/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "dualview/caption_metrics.hpp"
#include "dualview/checkpoint.hpp"
#include "dualview/corpus_io.hpp"
#include "dualview/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dualview::pipeline {

namespace {

constexpr std::uint64_t kSeedValWorld = 0x7a11;
constexpr std::uint64_t kSeedPairs = 0x9a125;
constexpr std::uint64_t kSeedTrain = 0x77ab;
constexpr std::uint64_t kSeedCaption = 0xcab;
constexpr std::uint64_t kSeedRandomBaseline = 0xba5e;

void ensure_writable(const fs::path& file, bool force) {
  if (!force && fs::exists(file)) {
    throw ConfigError("output exists: " + file.string() + " (pass --force to overwrite)");
  }
}

void require_file(const fs::path& file, const char* hint) {
  if (!fs::exists(file)) {
    throw ConfigError("missing input: " + file.string() + " (run `" + hint + "` first)");
  }
}

int majority_class(const corpus::VideoRecord& video, double start_s, double end_s) {
  double best_overlap = -1.0;
  int best = -1;
  for (const auto& ev : video.event_timeline) {
    const double inter = std::min(ev.end_s, end_s) - std::max(ev.start_s, start_s);
    if (inter > best_overlap) {
      best_overlap = inter;
      best = ev.class_id;
    }
  }
  return best;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

}  // namespace

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers =
      std::max(1, std::min<int>(static_cast<int>(std::thread::hardware_concurrency()), n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        if (failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void write_metrics_csv(const fs::path& file, const MetricRows& rows) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IntegrityError("cannot open for writing: " + file.string());
  out << "metric,value\n";
  for (const auto& [name, value] : rows) out << name << ',' << fmt(value) << '\n';
}

corpus::WorldConfig val_world_config(const RunConfig& cfg) {
  corpus::WorldConfig val = cfg.world;
  val.seed = Rng::mix(cfg.seed, kSeedValWorld);
  val.class_seed = cfg.world.seed;  // same class semantics as the train split
  val.n_videos = cfg.eval_videos;
  val.w_keyword_corruption = 0.0;
  val.narration_offset_s = 0.0;  // expert-aligned queries
  val.video_id_prefix = "val_v";
  return val;
}

corpus::World make_train_world(const RunConfig& cfg) {
  corpus::WorldConfig train = cfg.world;
  train.video_id_prefix = "train_v";
  return corpus::generate_world(train);
}

corpus::World make_val_world(const RunConfig& cfg) {
  return corpus::generate_world(val_world_config(cfg));
}

enc::SubwordVocab make_vocab(const corpus::World& train, const RunConfig& cfg) {
  std::vector<std::string> texts;
  texts.reserve(train.transcripts.size() + train.captions.size());
  for (const auto& s : train.transcripts) texts.push_back(s.text);
  for (const auto& c : train.captions) texts.push_back(c.text);
  return enc::build_vocab(texts, cfg.vocab_size);
}

std::vector<pairing::ClipTextPair> make_pairs(const corpus::World& world, const RunConfig& cfg,
                                              const pairing::ClipLengthConfig& len,
                                              std::uint64_t seed, pairing::PairStats* stats) {
  return pairing::build_pairs(world, cfg.filter, seed, len, cfg.pairs_per_a, stats);
}

TrainedModel train_model(const corpus::World& train, const RunConfig& cfg,
                         objective::Views views, const pairing::ClipLengthConfig& len,
                         int frames_per_clip, std::uint64_t seed) {
  TrainedModel model;
  model.vocab = make_vocab(train, cfg);
  auto pairs = make_pairs(train, cfg, len, Rng::mix(seed, kSeedPairs));
  objective::TrainConfig tc;
  tc.hyper = cfg.hyper;
  tc.hyper.frames_per_clip = frames_per_clip;
  tc.views = views;
  tc.steps = cfg.train_steps;
  tc.lr = cfg.lr;
  tc.seed = Rng::mix(seed, kSeedTrain);
  objective::FeatureStore store(train);
  model.params =
      objective::train(store, pairs, model.vocab, cfg.world.feature_dim, tc, &model.report);
  return model;
}

TrainedModel random_model(const corpus::World& train, const RunConfig& cfg, std::uint64_t seed) {
  TrainedModel model;
  model.vocab = make_vocab(train, cfg);
  Rng rng(Rng::mix(seed, kSeedRandomBaseline));
  model.params =
      enc::EncoderParams::init(cfg.hyper, cfg.world.feature_dim, model.vocab.size(), rng);
  model.params.set_requires_grad(false);
  return model;
}

std::vector<EvalQuery> eval_queries(const corpus::World& val, const RunConfig& cfg) {
  std::map<std::string, const corpus::VideoRecord*> videos;
  for (const auto& v : val.videos) videos[v.video_id] = &v;

  std::map<std::string, std::vector<corpus::TranscriptSentence>> w_by_video;
  for (const auto& s : val.transcripts) {
    if (s.source == 'W') w_by_video[s.video_id].push_back(s);
  }
  std::vector<EvalQuery> queries;
  for (const auto& [video_id, stream] : w_by_video) {
    const auto* video = videos.at(video_id);
    auto kept = pairing::filter_w(pairing::segment_sentences(stream, cfg.filter), cfg.filter);
    for (const auto& s : kept) {
      if (static_cast<int>(queries.size()) >= cfg.eval.max_queries) return queries;
      EvalQuery q;
      q.video_id = video_id;
      q.start_s = s.start_s;
      q.end_s = s.end_s;
      q.text = s.text;
      q.class_id = majority_class(*video, s.start_s, s.end_s);
      queries.push_back(std::move(q));
    }
  }
  return queries;
}

RetrievalEval eval_retrieval_core(const corpus::World& val, const enc::EncoderParams& params,
                                  const enc::SubwordVocab& vocab, const RunConfig& cfg) {
  const auto queries = eval_queries(val, cfg);
  if (queries.empty()) throw ContractError("eval-retrieval: no held-out queries");
  std::map<std::string, const corpus::VideoRecord*> videos;
  for (const auto& v : val.videos) videos[v.video_id] = &v;

  std::vector<std::string> gallery_ids;
  std::vector<std::vector<double>> gallery_latents;
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    char id[32];
    std::snprintf(id, sizeof id, "g%04zu", i);
    gallery_ids.emplace_back(id);
    gallery_latents.push_back(
        zeroshot::encode_clip_frozen(*videos.at(q.video_id), q.start_s, q.end_s, params));
    texts.push_back(q.text);
  }
  const auto index = zeroshot::RetrievalIndex::build(gallery_ids, gallery_latents);
  const auto query_latents = zeroshot::encode_texts_frozen(texts, params, vocab);

  std::vector<zeroshot::RankedResult> results;
  std::map<std::string, std::string> gt;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    char qid[32];
    std::snprintf(qid, sizeof qid, "q%04zu", i);
    results.push_back(zeroshot::rank_gallery(query_latents[i], index, qid));
    gt[qid] = gallery_ids[i];
  }

  RetrievalEval eval;
  for (int k : cfg.eval.k_list) {
    eval.metrics.emplace_back("recall@" + std::to_string(k),
                              zeroshot::recall_at_k(results, gt, k));
  }
  eval.metrics.emplace_back("median_rank",
                            static_cast<double>(zeroshot::median_rank(results, gt)));
  eval.recall10 = zeroshot::recall_at_k(results, gt, 10);
  return eval;
}

MetricRows eval_grounding_core(const corpus::World& val, const enc::EncoderParams& params,
                               const enc::SubwordVocab& vocab, const RunConfig& cfg,
                               const fs::path& actmap_dir) {
  const auto queries = eval_queries(val, cfg);
  if (queries.empty()) throw ContractError("eval-grounding: no held-out queries");
  std::map<std::string, const corpus::VideoRecord*> videos;
  for (const auto& v : val.videos) videos[v.video_id] = &v;

  std::vector<std::string> texts;
  for (const auto& q : queries) texts.push_back(q.text);
  const auto latents = zeroshot::encode_texts_frozen(texts, params, vocab);

  std::vector<long> hits(cfg.eval.k_list.size(), 0);
  std::set<std::string> actmap_done;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto& q = queries[qi];
    const auto& video = *videos.at(q.video_id);
    const auto segments =
        zeroshot::ground_query(video, latents[qi], cfg.eval.window_s, cfg.eval.stride_s, params);
    for (std::size_t ki = 0; ki < cfg.eval.k_list.size(); ++ki) {
      const auto k = static_cast<std::size_t>(cfg.eval.k_list[ki]);
      for (std::size_t s = 0; s < std::min(k, segments.size()); ++s) {
        if (zeroshot::interval_iou(segments[s].start_s, segments[s].end_s, q.start_s, q.end_s) >=
            cfg.eval.iou_threshold) {
          hits[ki]++;
          break;
        }
      }
    }
    if (!actmap_dir.empty() && !actmap_done.count(q.video_id)) {
      actmap_done.insert(q.video_id);
      const auto series = zeroshot::activation_map(video, latents[qi], params);
      zeroshot::write_activation_csv(actmap_dir / ("actmap_" + q.video_id + ".csv"), video,
                                     series);
    }
  }
  MetricRows rows;
  for (std::size_t ki = 0; ki < cfg.eval.k_list.size(); ++ki) {
    rows.emplace_back("recall@" + std::to_string(cfg.eval.k_list[ki]),
                      static_cast<double>(hits[ki]) / static_cast<double>(queries.size()));
  }
  return rows;
}

zeroshot::PromptClassSet synthetic_prompts(const corpus::WorldConfig& world,
                                           const std::string& task) {
  zeroshot::PromptClassSet set;
  set.task = task;
  for (int c = 0; c < world.n_event_classes; ++c) {
    const auto p = corpus::class_phrases(world, c);
    zeroshot::PromptClass cls;
    cls.id = c;
    cls.name = p.keyword;
    if (task == "phase") {
      cls.prompt = "in the " + p.keyword + " phase we " + p.action + " the " + p.object;
    } else {
      // tool and triplet share the contextual template
      cls.prompt = "i use " + p.keyword + " to " + p.action + " the " + p.object;
    }
    if (task == "triplet") {
      cls.components.instrument = c;
      cls.components.verb = c % 4;
      cls.components.target = c % 8;
    }
    set.classes.push_back(std::move(cls));
  }
  return set;
}

ZeroshotEval eval_zeroshot_core(const corpus::World& val, const enc::EncoderParams& params,
                                const enc::SubwordVocab& vocab,
                                const zeroshot::PromptClassSet& prompts, const RunConfig& cfg) {
  const auto queries = eval_queries(val, cfg);
  if (queries.empty()) throw ContractError("eval-zeroshot: no held-out clips");
  std::map<std::string, const corpus::VideoRecord*> videos;
  for (const auto& v : val.videos) videos[v.video_id] = &v;

  std::vector<std::string> prompt_texts;
  for (const auto& c : prompts.classes) prompt_texts.push_back(c.prompt);
  const auto prompt_latents = zeroshot::encode_texts_frozen(prompt_texts, params, vocab);

  const auto n_classes = static_cast<int>(prompts.classes.size());
  std::vector<std::vector<double>> scores;
  std::vector<int> labels, predictions;
  for (const auto& q : queries) {
    const auto latent =
        zeroshot::encode_clip_frozen(*videos.at(q.video_id), q.start_s, q.end_s, params);
    auto s = zeroshot::classify(latent, prompt_latents);
    int argmax = 0;
    for (int c = 1; c < n_classes; ++c) {
      if (s[static_cast<std::size_t>(c)] > s[static_cast<std::size_t>(argmax)]) argmax = c;
    }
    predictions.push_back(prompts.classes[static_cast<std::size_t>(argmax)].id);
    scores.push_back(std::move(s));
    labels.push_back(q.class_id);
  }

  ZeroshotEval eval;
  const auto f1 = zeroshot::f1_per_class(predictions, labels, n_classes);
  double ap_sum = 0.0;
  int ap_classes = 0;
  for (int c = 0; c < n_classes; ++c) {
    const int class_id = prompts.classes[static_cast<std::size_t>(c)].id;
    std::vector<double> class_scores;
    std::vector<int> class_labels;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      class_scores.push_back(scores[i][static_cast<std::size_t>(c)]);
      class_labels.push_back(labels[i] == class_id ? 1 : 0);
    }
    double ap = 0.0;
    if (std::count(class_labels.begin(), class_labels.end(), 1) > 0) {
      ap = zeroshot::average_precision(class_scores, class_labels);
      ap_sum += ap;
      ++ap_classes;
    }
    eval.per_class.emplace_back(class_id, prompts.classes[static_cast<std::size_t>(c)].name, ap,
                                f1.per_class[static_cast<std::size_t>(c)]);
  }
  eval.mean_ap = ap_classes > 0 ? ap_sum / ap_classes : 0.0;
  eval.metrics.emplace_back("mean_ap", eval.mean_ap);
  eval.metrics.emplace_back("mean_f1", f1.mean);

  if (prompts.task == "triplet") {
    std::vector<zeroshot::TripletComponents> comps;
    for (const auto& c : prompts.classes) comps.push_back(c.components);
    const auto t = zeroshot::triplet_component_ap(scores, labels, comps);
    eval.metrics.emplace_back("ap_i", t.i);
    eval.metrics.emplace_back("ap_v", t.v);
    eval.metrics.emplace_back("ap_t", t.t);
    eval.metrics.emplace_back("ap_iv", t.iv);
    eval.metrics.emplace_back("ap_it", t.it);
    eval.metrics.emplace_back("ap_ivt", t.ivt);
  }
  return eval;
}

caption::DecoderParams train_captioner_core(const corpus::World& train,
                                            const enc::EncoderParams& params,
                                            const enc::SubwordVocab& vocab, const RunConfig& cfg,
                                            std::uint64_t seed) {
  std::vector<std::string> sentences;
  for (const auto& c : train.captions) sentences.push_back(c.text);
  auto dc = cfg.captioner;
  dc.seed = Rng::mix(seed, kSeedCaption);
  return caption::train_text_only(sentences, params, vocab, dc);
}

CaptionEval eval_caption_core(const corpus::World& val, const enc::EncoderParams& params,
                              const enc::SubwordVocab& vocab,
                              const caption::DecoderParams& decoder, const RunConfig& cfg) {
  if (val.captions.empty()) throw ContractError("eval-caption: no reference captions");
  std::map<std::string, const corpus::VideoRecord*> videos;
  for (const auto& v : val.videos) videos[v.video_id] = &v;

  CaptionEval eval;
  double bleu[4] = {0, 0, 0, 0};
  double meteor = 0, rouge = 0;
  for (const auto& row : val.captions) {
    const auto latent =
        zeroshot::encode_clip_frozen(*videos.at(row.video_id), row.start_s, row.end_s, params);
    auto candidate = caption::generate(latent, decoder, vocab, cfg.captioner.max_len);
    for (int n = 1; n <= 4; ++n) {
      bleu[n - 1] += caption::bleu_n(candidate, {row.text}, n);
    }
    meteor += caption::meteor_basic(candidate, row.text);
    rouge += caption::rouge_l(candidate, row.text);
    eval.predictions.emplace_back(row, std::move(candidate));
  }
  const auto n = static_cast<double>(val.captions.size());
  eval.metrics = {{"bleu_1", bleu[0] / n}, {"bleu_2", bleu[1] / n}, {"bleu_3", bleu[2] / n},
                  {"bleu_4", bleu[3] / n}, {"meteor", meteor / n},  {"rouge_l", rouge / n}};
  eval.bleu1 = bleu[0] / n;
  return eval;
}

// ---- command wrappers ----

void cmd_gen_data(const RunConfig& cfg, bool force) {
  ensure_writable(cfg.corpus_dir / "train.transcripts.jsonl", force);
  const auto train = make_train_world(cfg);
  const auto val = make_val_world(cfg);
  corpus::write_corpus(cfg.corpus_dir, "train", train);
  corpus::write_corpus(cfg.corpus_dir, "val", val);
  corpus::write_captions(cfg.corpus_dir / "captions_gt.jsonl", val.captions);
  zeroshot::save_prompts(cfg.corpus_dir / "prompts_tool.json",
                         synthetic_prompts(cfg.world, "tool"));
  zeroshot::save_prompts(cfg.corpus_dir / "prompts_phase.json",
                         synthetic_prompts(cfg.world, "phase"));
  zeroshot::save_prompts(cfg.corpus_dir / "prompts_triplet.json",
                         synthetic_prompts(cfg.world, "triplet"));
}

pairing::PairStats cmd_build_pairs(const RunConfig& cfg, bool force) {
  require_file(cfg.corpus_dir / "train.transcripts.jsonl", "gen-data");
  const auto out_file = cfg.out_dir / "pairs.jsonl";
  ensure_writable(out_file, force);
  const auto world = corpus::read_corpus(cfg.corpus_dir, "train");
  pairing::PairStats stats;
  const auto pairs = make_pairs(world, cfg, cfg.clip_length, Rng::mix(cfg.seed, kSeedPairs), &stats);
  fs::create_directories(cfg.out_dir);
  pairing::write_pairs(out_file, pairs);
  json js{{"a_in", stats.a_in},           {"a_segments", stats.a_segments},
          {"a_kept", stats.a_kept},       {"w_in", stats.w_in},
          {"w_segments", stats.w_segments}, {"w_kept", stats.w_kept},
          {"a_no_overlap", stats.a_no_overlap}, {"pairs", stats.pairs}};
  std::ofstream out(cfg.out_dir / "pair_stats.json", std::ios::binary);
  out << js.dump(2) << '\n';
  return stats;
}

void cmd_train(const RunConfig& cfg, bool force) {
  require_file(cfg.out_dir / "pairs.jsonl", "build-pairs");
  const auto ckpt_dir = cfg.out_dir / "ckpt";
  ensure_writable(ckpt_dir / "weights.f32", force);
  const auto world = corpus::read_corpus(cfg.corpus_dir, "train");
  const auto pairs = pairing::read_pairs(cfg.out_dir / "pairs.jsonl");
  const auto vocab = make_vocab(world, cfg);
  objective::TrainConfig tc;
  tc.hyper = cfg.hyper;
  tc.views = cfg.views;
  tc.steps = cfg.train_steps;
  tc.lr = cfg.lr;
  tc.seed = Rng::mix(cfg.seed, kSeedTrain);
  objective::FeatureStore store(world);
  objective::TrainReport report;
  const auto params = objective::train(store, pairs, vocab, cfg.world.feature_dim, tc, &report);
  enc::save_checkpoint(ckpt_dir, params, vocab);
  objective::write_train_report(cfg.out_dir / "train_report.csv", report);
}

void cmd_eval_retrieval(const RunConfig& cfg, const fs::path& ckpt, bool force) {
  require_file(ckpt / "weights.f32", "train");
  const auto out_file = cfg.out_dir / "retrieval" / "metrics.csv";
  ensure_writable(out_file, force);
  auto [params, vocab] = enc::load_checkpoint(ckpt);
  const auto val = corpus::read_corpus(cfg.corpus_dir, "val");
  const auto eval = eval_retrieval_core(val, params, vocab, cfg);
  fs::create_directories(out_file.parent_path());
  write_metrics_csv(out_file, eval.metrics);
}

void cmd_eval_grounding(const RunConfig& cfg, const fs::path& ckpt, bool force) {
  require_file(ckpt / "weights.f32", "train");
  const auto out_dir = cfg.out_dir / "grounding";
  ensure_writable(out_dir / "metrics.csv", force);
  auto [params, vocab] = enc::load_checkpoint(ckpt);
  const auto val = corpus::read_corpus(cfg.corpus_dir, "val");
  fs::create_directories(out_dir);
  const auto rows = eval_grounding_core(val, params, vocab, cfg, out_dir);
  write_metrics_csv(out_dir / "metrics.csv", rows);
}

void cmd_eval_zeroshot(const RunConfig& cfg, const fs::path& ckpt, const fs::path& prompts_file,
                       bool force) {
  require_file(ckpt / "weights.f32", "train");
  require_file(prompts_file, "gen-data");
  const auto out_dir = cfg.out_dir / "zeroshot";
  ensure_writable(out_dir / "metrics.csv", force);
  auto [params, vocab] = enc::load_checkpoint(ckpt);
  const auto prompts = zeroshot::load_prompts(prompts_file);
  const auto val = corpus::read_corpus(cfg.corpus_dir, "val");
  const auto eval = eval_zeroshot_core(val, params, vocab, prompts, cfg);
  fs::create_directories(out_dir);
  write_metrics_csv(out_dir / "metrics.csv", eval.metrics);
  std::ofstream per(out_dir / "per_class.csv", std::ios::binary);
  per << "class_id,name,ap,f1\n";
  for (const auto& [id, name, ap, f1] : eval.per_class) {
    per << id << ',' << name << ',' << fmt(ap) << ',' << fmt(f1) << '\n';
  }
}

void cmd_train_captioner(const RunConfig& cfg, const fs::path& ckpt, bool force) {
  require_file(ckpt / "weights.f32", "train");
  ensure_writable(ckpt / "decoder.f32", force);
  auto [params, vocab] = enc::load_checkpoint(ckpt);
  const auto world = corpus::read_corpus(cfg.corpus_dir, "train");
  const auto decoder = train_captioner_core(world, params, vocab, cfg, cfg.seed);
  caption::save_decoder(ckpt, decoder);
}

void cmd_eval_caption(const RunConfig& cfg, const fs::path& ckpt, bool force) {
  require_file(ckpt / "decoder.f32", "train-captioner");
  require_file(cfg.corpus_dir / "captions_gt.jsonl", "gen-data");
  const auto out_dir = cfg.out_dir / "caption";
  ensure_writable(out_dir / "caption_metrics.csv", force);
  auto [params, vocab] = enc::load_checkpoint(ckpt);
  const auto decoder = caption::load_decoder(ckpt);
  auto val = corpus::read_corpus(cfg.corpus_dir, "val");
  val.captions = corpus::read_captions(cfg.corpus_dir / "captions_gt.jsonl");
  const auto eval = eval_caption_core(val, params, vocab, decoder, cfg);
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "captions_pred.jsonl", std::ios::binary);
    for (const auto& pred : eval.predictions) {
      const auto& row = pred.first;
      json clip{{"video_id", row.video_id}, {"start_s", row.start_s}, {"end_s", row.end_s}};
      out << json{{"clip_ref", clip}, {"candidate", pred.second}}.dump() << '\n';
    }
  }
  std::ofstream out(out_dir / "caption_metrics.csv", std::ios::binary);
  out << "bleu_1,bleu_2,bleu_3,bleu_4,meteor,rouge_l\n";
  for (std::size_t i = 0; i < eval.metrics.size(); ++i) {
    out << (i ? "," : "") << fmt(eval.metrics[i].second);
  }
  out << '\n';
}

void cmd_ablate(const RunConfig& cfg, bool force) {
  require_file(cfg.corpus_dir / "train.transcripts.jsonl", "gen-data");
  const auto out_file = cfg.out_dir / "ablation.csv";
  ensure_writable(out_file, force);
  const auto train = corpus::read_corpus(cfg.corpus_dir, "train");
  const auto val = corpus::read_corpus(cfg.corpus_dir, "val");

  struct Cell {
    objective::Views views;
    std::string length;
    int frames;
    double recall10 = 0, mean_ap = 0;
  };
  std::vector<Cell> cells;
  for (const auto& v : cfg.ablate.views) {
    for (const auto& l : cfg.ablate.clip_lengths) {
      for (int f : cfg.ablate.frames) {
        cells.push_back({objective::views_from_string(v), l, f, 0, 0});
      }
    }
  }
  const auto prompts = synthetic_prompts(cfg.world, "tool");
  parallel_for(static_cast<int>(cells.size()), [&](int i) {
    auto& cell = cells[static_cast<std::size_t>(i)];
    pairing::ClipLengthConfig len = cfg.clip_length;
    if (cell.length != "random") {
      len.fixed = true;
      len.fixed_s = std::stod(cell.length);
    } else {
      len.fixed = false;
    }
    const auto model = train_model(train, cfg, cell.views, len, cell.frames,
                                   Rng::mix(cfg.seed, 0xab1a00 + static_cast<std::uint64_t>(i)));
    cell.recall10 = eval_retrieval_core(val, model.params, model.vocab, cfg).recall10;
    cell.mean_ap = eval_zeroshot_core(val, model.params, model.vocab, prompts, cfg).mean_ap;
  });

  fs::create_directories(cfg.out_dir);
  std::ofstream out(out_file, std::ios::binary);
  out << "views,clip_length,frames,recall@10,mean_ap\n";
  for (const auto& cell : cells) {
    out << objective::views_to_string(cell.views) << ',' << cell.length << ',' << cell.frames
        << ',' << fmt(cell.recall10) << ',' << fmt(cell.mean_ap) << '\n';
  }
}

}  // namespace dualview::pipeline
