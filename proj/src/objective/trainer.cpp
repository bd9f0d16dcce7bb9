#include "dualview/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dualview/adam.hpp"
#include "dualview/errors.hpp"
#include "dualview/losses.hpp"
#include "dualview/rng.hpp"

namespace dualview::objective {

using grad::Tape;
using grad::Var;

Views views_from_string(const std::string& s) {
  if (s == "a") return Views::a_only;
  if (s == "w") return Views::w_only;
  if (s == "both") return Views::both;
  throw ConfigError("views must be one of a|w|both, got '" + s + "'");
}

std::string views_to_string(Views v) {
  switch (v) {
    case Views::a_only: return "a";
    case Views::w_only: return "w";
    default: return "both";
  }
}

FeatureStore::FeatureStore(const corpus::World& world) {
  for (const auto& v : world.videos) videos_[v.video_id] = &v;
}

const corpus::VideoRecord& FeatureStore::video(const std::string& video_id) const {
  auto it = videos_.find(video_id);
  if (it == videos_.end()) {
    throw ContractError("feature store: unknown video '" + video_id + "'");
  }
  return *it->second;
}

namespace {

// gathers the sampled frame rows of a batch into one [B*T x feat] tensor
Var batch_frames(const FeatureStore& features, const std::vector<pairing::ClipTextPair>& pairs,
                 const std::vector<std::size_t>& batch, int t, int feature_dim) {
  std::vector<double> rows;
  rows.reserve(batch.size() * static_cast<std::size_t>(t) * feature_dim);
  for (auto pi : batch) {
    const auto& pair = pairs[pi];
    const auto& video = features.video(pair.video_id);
    const auto idx =
        enc::sample_frames(pair.clip_start_s, pair.clip_end_s, video.fps, video.n_frames(), t);
    for (int frame : idx) {
      const float* src = video.frame_features.data() +
                         static_cast<std::size_t>(frame) * video.feature_dim;
      for (int j = 0; j < feature_dim; ++j) rows.push_back(static_cast<double>(src[j]));
    }
  }
  return grad::make_tensor({static_cast<int>(batch.size()) * t, feature_dim}, std::move(rows));
}

}  // namespace

enc::EncoderParams train(const FeatureStore& features,
                         const std::vector<pairing::ClipTextPair>& pairs,
                         const enc::SubwordVocab& vocab, int feature_dim,
                         const TrainConfig& cfg, TrainReport* report) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.hyper.validate();
  if (pairs.empty()) throw ContractError("train: empty pair dataset");
  const int b = cfg.hyper.batch_size;
  if (static_cast<std::size_t>(b) > pairs.size()) {
    throw ContractError("train: batch size " + std::to_string(b) + " exceeds dataset size " +
                        std::to_string(pairs.size()));
  }
  const int n = cfg.hyper.token_len;
  const int m = cfg.hyper.w_per_pair;
  const int t_frames = cfg.hyper.frames_per_clip;

  Rng init_rng(Rng::mix(cfg.seed, 0x1217));
  auto params = enc::EncoderParams::init(cfg.hyper, feature_dim, vocab.size(), init_rng);
  auto param_list = params.all();
  grad::AdamState adam;
  adam.lr = cfg.lr;
  grad::adam_init(adam, param_list);

  // tokenized once up front; W candidates cycle when a pair has fewer than M
  std::vector<std::vector<int>> a_tokens(pairs.size()), w_tokens(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    a_tokens[i] = enc::tokenize(pairs[i].a_sentence.text, vocab, n);
    const auto& ws = pairs[i].w_sentences;
    for (int k = 0; k < m; ++k) {
      const auto ids = enc::tokenize(ws[static_cast<std::size_t>(k) % ws.size()].text, vocab, n);
      w_tokens[i].insert(w_tokens[i].end(), ids.begin(), ids.end());
    }
  }

  Rng order_rng(Rng::mix(cfg.seed, 0x0bde));
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);

  TrainReport local;
  Tape tape;
  long long step = 0;
  while (step < cfg.steps) {
    order_rng.shuffle(order);
    for (std::size_t at = 0; at + static_cast<std::size_t>(b) <= order.size() && step < cfg.steps;
         at += static_cast<std::size_t>(b), ++step) {
      const std::vector<std::size_t> batch(order.begin() + static_cast<long>(at),
                                           order.begin() + static_cast<long>(at) + b);
      try {
        auto chi = enc::encode_clip(tape, batch_frames(features, pairs, batch, t_frames, feature_dim),
                                    t_frames, params);

        Var info, mil, total;
        if (cfg.views != Views::w_only) {
          std::vector<int> ids;
          ids.reserve(static_cast<std::size_t>(b) * n);
          for (auto pi : batch) ids.insert(ids.end(), a_tokens[pi].begin(), a_tokens[pi].end());
          auto beta = enc::encode_text(tape, ids, b, params);
          info = info_nce(tape, chi, beta, cfg.hyper.temperature);
        }
        if (cfg.views != Views::a_only) {
          std::vector<int> ids;
          ids.reserve(static_cast<std::size_t>(b) * m * n);
          for (auto pi : batch) ids.insert(ids.end(), w_tokens[pi].begin(), w_tokens[pi].end());
          auto gamma = enc::encode_text(tape, ids, b * m, params);
          mil = mil_nce(tape, chi, gamma, m, cfg.hyper.temperature);
        }
        switch (cfg.views) {
          case Views::a_only: total = info; break;
          case Views::w_only: total = mil; break;
          case Views::both:
            total = grad::add(tape, grad::scale(tape, info, cfg.hyper.loss_weight),
                              grad::scale(tape, mil, 1.0 - cfg.hyper.loss_weight));
            break;
        }
        if (!std::isfinite(total->value[0])) {
          throw TrainingDivergedError(step, "train: non-finite loss at step " +
                                                std::to_string(step));
        }
        tape.backward(total);
        double grad_sq = 0.0;
        for (const auto& p : param_list)
          for (double g : p->grad) grad_sq += g * g;
        grad::adam_step(param_list, adam);
        local.rows.push_back({step, total->value[0], info ? info->value[0] : 0.0,
                              mil ? mil->value[0] : 0.0, std::sqrt(grad_sq)});
      } catch (const NumericError& e) {
        throw TrainingDivergedError(step, "train: " + std::string(e.what()) + " at step " +
                                              std::to_string(step));
      }
    }
  }
  local.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (report) *report = std::move(local);
  return params;
}

void write_train_report(const std::filesystem::path& file, const TrainReport& report) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IntegrityError("cannot open for writing: " + file.string());
  out << "step,total,infonce,milnce,grad_norm\n";
  char buf[192];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%lld,%.9f,%.9f,%.9f,%.9f\n", r.step, r.total, r.infonce,
                  r.milnce, r.grad_norm);
    out << buf;
  }
}

}  // namespace dualview::objective
