#pragma once

// Dual-branch encoders into a shared latent space. The clip branch runs a
// two-layer perceptron plus projection per frame and averages the projected
// frame latents; the text branch runs the perceptron per token, averages the
// token features, then projects.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dualview/autodiff.hpp"
#include "dualview/rng.hpp"
#include "dualview/vocab.hpp"

namespace dualview::enc {

struct HyperConfig {
  int token_len = 77;         // N
  int frames_per_clip = 4;    // T
  int latent_dim = 768;       // d, shared by both branches
  double temperature = 0.3;   // tau
  double loss_weight = 0.5;   // epsilon in the combined loss
  int w_per_pair = 2;         // M
  int batch_size = 80;        // B
  int embed_dim = 32;         // token embedding width
  int hidden_dim = 64;        // trunk width
  bool masked_mean = false;   // exclude pad positions from the text mean

  void validate() const;
};

struct EncoderParams {
  grad::Var tok_embed;  // [V x e]
  grad::Var text_w1, text_b1, text_w2, text_b2, text_proj_w, text_proj_b;
  grad::Var frame_w1, frame_b1, frame_w2, frame_b2, frame_proj_w, frame_proj_b;
  int feature_dim = 0;
  int vocab_size = 0;
  HyperConfig hyper;

  static EncoderParams init(const HyperConfig& hyper, int feature_dim, int vocab_size,
                            Rng& rng);

  std::vector<grad::Var> all() const;
  std::vector<std::pair<std::string, grad::Var>> named() const;
  void set_requires_grad(bool on);
};

// evenly spaced frame indices over the frames intersecting the clip;
// repeats appear when the clip holds fewer than t frames
std::vector<int> sample_frames(double clip_start_s, double clip_end_s, double fps,
                               int total_frames, int t);

// frame_rows: [batch*frames_per_clip x feature_dim]
grad::Var encode_clip(grad::Tape& tape, const grad::Var& frame_rows, int frames_per_clip,
                      const EncoderParams& params);

// token_ids: batch*token_len ids, row-major
grad::Var encode_text(grad::Tape& tape, const std::vector<int>& token_ids, int batch,
                      const EncoderParams& params);

}  // namespace dualview::enc
