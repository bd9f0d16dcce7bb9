#include "dualview/encoder.hpp"

#include <cmath>

#include "dualview/errors.hpp"

namespace dualview::enc {

using grad::Tape;
using grad::Var;

void HyperConfig::validate() const {
  std::string bad;
  auto pos = [&](int v, const char* name) {
    if (v < 1) bad += std::string(" ") + name + "=" + std::to_string(v) + ";";
  };
  pos(token_len, "token_len");
  pos(frames_per_clip, "frames_per_clip");
  pos(latent_dim, "latent_dim");
  pos(w_per_pair, "w_per_pair");
  pos(batch_size, "batch_size");
  pos(embed_dim, "embed_dim");
  pos(hidden_dim, "hidden_dim");
  if (!(temperature > 0.0)) bad += " temperature=" + std::to_string(temperature) + ";";
  if (!(loss_weight >= 0.0 && loss_weight <= 1.0))
    bad += " loss_weight=" + std::to_string(loss_weight) + ";";
  if (!bad.empty()) throw ConfigError("invalid hyper config:" + bad);
}

namespace {

Var init_matrix(Rng& rng, int rows, int cols, double std_dev, const std::string& name) {
  std::vector<double> v(static_cast<std::size_t>(rows) * cols);
  for (auto& x : v) x = rng.gauss(0.0, std_dev);
  return grad::make_tensor({rows, cols}, std::move(v), true, name);
}

Var init_bias(int n, const std::string& name) {
  return grad::make_tensor({n}, std::vector<double>(static_cast<std::size_t>(n), 0.0), true,
                           name);
}

}  // namespace

EncoderParams EncoderParams::init(const HyperConfig& hyper, int feature_dim, int vocab_size,
                                  Rng& rng) {
  hyper.validate();
  if (feature_dim < 1) throw ConfigError("encoder init: feature_dim < 1");
  if (vocab_size < 1) throw ConfigError("encoder init: vocab_size < 1");
  EncoderParams p;
  p.hyper = hyper;
  p.feature_dim = feature_dim;
  p.vocab_size = vocab_size;
  const int e = hyper.embed_dim, h = hyper.hidden_dim, d = hyper.latent_dim;
  p.tok_embed = init_matrix(rng, vocab_size, e, 0.1, "tok_embed");
  p.text_w1 = init_matrix(rng, e, h, 1.0 / std::sqrt(e), "text_w1");
  p.text_b1 = init_bias(h, "text_b1");
  p.text_w2 = init_matrix(rng, h, h, 1.0 / std::sqrt(h), "text_w2");
  p.text_b2 = init_bias(h, "text_b2");
  p.text_proj_w = init_matrix(rng, h, d, 1.0 / std::sqrt(h), "text_proj_w");
  p.text_proj_b = init_bias(d, "text_proj_b");
  p.frame_w1 = init_matrix(rng, feature_dim, h, 1.0 / std::sqrt(feature_dim), "frame_w1");
  p.frame_b1 = init_bias(h, "frame_b1");
  p.frame_w2 = init_matrix(rng, h, h, 1.0 / std::sqrt(h), "frame_w2");
  p.frame_b2 = init_bias(h, "frame_b2");
  p.frame_proj_w = init_matrix(rng, h, d, 1.0 / std::sqrt(h), "frame_proj_w");
  p.frame_proj_b = init_bias(d, "frame_proj_b");
  return p;
}

std::vector<Var> EncoderParams::all() const {
  return {tok_embed, text_w1,  text_b1,  text_w2,  text_b2,  text_proj_w, text_proj_b,
          frame_w1,  frame_b1, frame_w2, frame_b2, frame_proj_w, frame_proj_b};
}

std::vector<std::pair<std::string, Var>> EncoderParams::named() const {
  return {{"tok_embed", tok_embed},       {"text_w1", text_w1},
          {"text_b1", text_b1},           {"text_w2", text_w2},
          {"text_b2", text_b2},           {"text_proj_w", text_proj_w},
          {"text_proj_b", text_proj_b},   {"frame_w1", frame_w1},
          {"frame_b1", frame_b1},         {"frame_w2", frame_w2},
          {"frame_b2", frame_b2},         {"frame_proj_w", frame_proj_w},
          {"frame_proj_b", frame_proj_b}};
}

void EncoderParams::set_requires_grad(bool on) {
  for (auto& v : all()) v->requires_grad = on;
}

std::vector<int> sample_frames(double clip_start_s, double clip_end_s, double fps,
                               int total_frames, int t) {
  if (t < 1) throw ContractError("sample_frames: t < 1");
  int lo = static_cast<int>(std::floor(clip_start_s * fps + 1e-9));
  int hi = static_cast<int>(std::ceil(clip_end_s * fps - 1e-9)) - 1;
  lo = std::max(lo, 0);
  hi = std::min(hi, total_frames - 1);
  if (hi < lo) {
    throw ContractError("sample_frames: clip [" + std::to_string(clip_start_s) + ", " +
                        std::to_string(clip_end_s) + ") holds no frame");
  }
  std::vector<int> idx(static_cast<std::size_t>(t));
  if (t == 1) {
    idx[0] = lo + (hi - lo) / 2;
  } else {
    for (int i = 0; i < t; ++i) {
      idx[static_cast<std::size_t>(i)] =
          lo + static_cast<int>(std::llround(static_cast<double>(i) * (hi - lo) / (t - 1)));
    }
  }
  return idx;
}

namespace {

Var trunk(Tape& tape, const Var& x, const Var& w1, const Var& b1, const Var& w2,
          const Var& b2) {
  auto h1 = grad::ramp(tape, grad::add_rowvec(tape, grad::matmul(tape, x, w1), b1));
  return grad::ramp(tape, grad::add_rowvec(tape, grad::matmul(tape, h1, w2), b2));
}

}  // namespace

Var encode_clip(Tape& tape, const Var& frame_rows, int frames_per_clip,
                const EncoderParams& params) {
  if (frame_rows->shape.size() != 2 || frame_rows->shape[1] != params.feature_dim) {
    throw ShapeError("encode_clip: frame rows " + grad::shape_str(frame_rows->shape) +
                     " do not match feature_dim " + std::to_string(params.feature_dim));
  }
  auto features = trunk(tape, frame_rows, params.frame_w1, params.frame_b1, params.frame_w2,
                        params.frame_b2);
  auto projected = grad::add_rowvec(
      tape, grad::matmul(tape, features, params.frame_proj_w), params.frame_proj_b);
  return grad::mean_groups(tape, projected, frames_per_clip);
}

Var encode_text(Tape& tape, const std::vector<int>& token_ids, int batch,
                const EncoderParams& params) {
  const int n = params.hyper.token_len;
  if (batch < 1 || static_cast<int>(token_ids.size()) != batch * n) {
    throw ShapeError("encode_text: expected " + std::to_string(batch) + "*" +
                     std::to_string(n) + " ids, got " + std::to_string(token_ids.size()));
  }
  auto embedded = grad::rows_from_table(tape, params.tok_embed, token_ids);
  auto features =
      trunk(tape, embedded, params.text_w1, params.text_b1, params.text_w2, params.text_b2);
  Var pooled;
  if (params.hyper.masked_mean) {
    std::vector<double> weights(token_ids.size());
    for (std::size_t i = 0; i < token_ids.size(); ++i) {
      weights[i] = token_ids[i] == SubwordVocab::kPad ? 0.0 : 1.0;
    }
    pooled = grad::mean_groups_weighted(tape, features, n, weights);
  } else {
    pooled = grad::mean_groups(tape, features, n);  // pad positions included
  }
  return grad::add_rowvec(tape, grad::matmul(tape, pooled, params.text_proj_w),
                          params.text_proj_b);
}

}  // namespace dualview::enc
