#pragma once

// Text-only-trained caption decoder: a single gated recurrent cell
// conditioned on a frozen text latent (training) or clip latent (inference).
// Latents are unit-normalized before conditioning; training adds isotropic
// noise to bridge the modality gap.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dualview/autodiff.hpp"
#include "dualview/encoder.hpp"
#include "dualview/rng.hpp"
#include "dualview/vocab.hpp"

namespace dualview::caption {

struct DecoderConfig {
  int hidden_dim = 64;
  int embed_dim = 32;
  double lr = 3e-3;
  int epochs = 200;
  double noise_std = 0.01;
  int max_len = 16;  // token cap including markers
  std::uint64_t seed = 1;
};

struct DecoderParams {
  grad::Var init_w, init_b;            // latent -> initial hidden
  grad::Var embed;                     // [V x e]
  grad::Var wz, bz, wr, br, wh, bh;    // update, reset, candidate gates on [x, h]
  grad::Var out_w, out_b;              // hidden -> vocab logits
  int vocab_size = 0;
  int latent_dim = 0;
  int hidden_dim = 0;
  int embed_dim = 0;

  static DecoderParams init(int latent_dim, int vocab_size, const DecoderConfig& cfg, Rng& rng);
  std::vector<grad::Var> all() const;
  std::vector<std::pair<std::string, grad::Var>> named() const;
};

struct DecoderTrainStats {
  std::vector<double> epoch_loss;
  double wall_time_s = 0;
};

DecoderParams train_text_only(const std::vector<std::string>& sentences,
                              const enc::EncoderParams& frozen_encoder,
                              const enc::SubwordVocab& vocab, const DecoderConfig& cfg,
                              DecoderTrainStats* stats = nullptr);

// greedy decode from the begin marker until the end marker or max_len
std::string generate(const std::vector<double>& latent, const DecoderParams& decoder,
                     const enc::SubwordVocab& vocab, int max_len);

void save_decoder(const std::filesystem::path& dir, const DecoderParams& params);
DecoderParams load_decoder(const std::filesystem::path& dir);

}  // namespace dualview::caption
