#include "dualview/config.hpp"

#include <fstream>

#include "dualview/errors.hpp"

using nlohmann::json;

namespace dualview {

namespace {

template <class T>
void maybe(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  world.validate();
  filter.validate();
  hyper.validate();
  std::string bad;
  if (eval_videos < 1) bad += " eval_videos;";
  if (pairs_per_a < 1) bad += " pairs_per_a;";
  if (train_steps < 1) bad += " train_steps;";
  if (!(lr >= 0.0)) bad += " lr;";
  if (vocab_size < 260) bad += " vocab_size;";
  if (!(clip_length.min_s > 0 && clip_length.max_s >= clip_length.min_s)) bad += " clip_length;";
  if (!(eval.window_s > 0 && eval.stride_s > 0)) bad += " eval window/stride;";
  if (!(eval.iou_threshold > 0 && eval.iou_threshold <= 1)) bad += " eval.iou_threshold;";
  if (eval.k_list.empty()) bad += " eval.k_list;";
  if (!bad.empty()) throw ConfigError("invalid run config:" + bad);
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg;
  try {
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      if (p.contains("out_dir")) cfg.out_dir = p.at("out_dir").get<std::string>();
      if (p.contains("corpus_dir")) cfg.corpus_dir = p.at("corpus_dir").get<std::string>();
    }
    maybe(j, "seed", cfg.seed);

    if (j.contains("world")) {
      const auto& w = j.at("world");
      maybe(w, "n_videos", cfg.world.n_videos);
      maybe(w, "duration_s", cfg.world.duration_s);
      maybe(w, "fps", cfg.world.fps);
      maybe(w, "feature_dim", cfg.world.feature_dim);
      maybe(w, "n_event_classes", cfg.world.n_event_classes);
      maybe(w, "keyword_vocab", cfg.world.keyword_vocab);
      maybe(w, "a_fragmentation", cfg.world.a_fragmentation);
      maybe(w, "w_keyword_corruption", cfg.world.w_keyword_corruption);
      maybe(w, "a_confidence_noise", cfg.world.a_confidence_noise);
      maybe(w, "narration_offset_s", cfg.world.narration_offset_s);
    }
    maybe(j, "eval_videos", cfg.eval_videos);

    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      if (f.contains("stop_symbols")) {
        cfg.filter.stop_symbols.clear();
        for (const auto& s : f.at("stop_symbols")) {
          const auto str = s.get<std::string>();
          if (str.size() != 1) throw ConfigError("stop_symbols entries must be single characters");
          cfg.filter.stop_symbols.insert(str[0]);
        }
      }
      maybe(f, "confidence_threshold", cfg.filter.confidence_threshold);
      maybe(f, "min_words", cfg.filter.min_words);
      if (f.contains("keyword_list")) {
        const auto list = f.at("keyword_list").get<std::vector<std::string>>();
        cfg.filter.keyword_list = {list.begin(), list.end()};
      }
    }
    if (cfg.filter.keyword_list.empty()) {
      cfg.filter.keyword_list = {cfg.world.keyword_vocab.begin(), cfg.world.keyword_vocab.end()};
    }

    if (j.contains("hyper")) {
      const auto& h = j.at("hyper");
      maybe(h, "token_len", cfg.hyper.token_len);
      maybe(h, "frames_per_clip", cfg.hyper.frames_per_clip);
      maybe(h, "latent_dim", cfg.hyper.latent_dim);
      maybe(h, "temperature", cfg.hyper.temperature);
      maybe(h, "loss_weight", cfg.hyper.loss_weight);
      maybe(h, "w_per_pair", cfg.hyper.w_per_pair);
      maybe(h, "batch_size", cfg.hyper.batch_size);
      maybe(h, "embed_dim", cfg.hyper.embed_dim);
      maybe(h, "hidden_dim", cfg.hyper.hidden_dim);
      maybe(h, "masked_mean", cfg.hyper.masked_mean);
    }

    if (j.contains("views")) cfg.views = objective::views_from_string(j.at("views").get<std::string>());

    if (j.contains("clip_length")) {
      const auto& c = j.at("clip_length");
      std::string mode = "random";
      maybe(c, "mode", mode);
      if (mode == "fixed") {
        cfg.clip_length.fixed = true;
      } else if (mode != "random") {
        throw ConfigError("clip_length.mode must be random|fixed");
      }
      maybe(c, "fixed_s", cfg.clip_length.fixed_s);
      maybe(c, "min_s", cfg.clip_length.min_s);
      maybe(c, "max_s", cfg.clip_length.max_s);
    }
    maybe(j, "pairs_per_a", cfg.pairs_per_a);
    maybe(j, "train_steps", cfg.train_steps);
    maybe(j, "lr", cfg.lr);
    maybe(j, "vocab_size", cfg.vocab_size);

    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      maybe(e, "k_list", cfg.eval.k_list);
      maybe(e, "window_s", cfg.eval.window_s);
      maybe(e, "stride_s", cfg.eval.stride_s);
      maybe(e, "iou_threshold", cfg.eval.iou_threshold);
      maybe(e, "max_queries", cfg.eval.max_queries);
    }

    if (j.contains("captioner")) {
      const auto& c = j.at("captioner");
      maybe(c, "hidden_dim", cfg.captioner.hidden_dim);
      maybe(c, "embed_dim", cfg.captioner.embed_dim);
      maybe(c, "lr", cfg.captioner.lr);
      maybe(c, "epochs", cfg.captioner.epochs);
      maybe(c, "noise_std", cfg.captioner.noise_std);
      maybe(c, "max_len", cfg.captioner.max_len);
    }

    if (j.contains("ablate")) {
      const auto& a = j.at("ablate");
      maybe(a, "views", cfg.ablate.views);
      maybe(a, "clip_lengths", cfg.ablate.clip_lengths);
      maybe(a, "frames", cfg.ablate.frames);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (cfg.corpus_dir.empty()) cfg.corpus_dir = "corpus";
  if (cfg.corpus_dir.is_relative()) cfg.corpus_dir = cfg.out_dir / cfg.corpus_dir;
  cfg.world.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace dualview
