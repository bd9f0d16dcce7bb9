#include "dualview/caption.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "dualview/adam.hpp"
#include "dualview/checkpoint.hpp"
#include "dualview/errors.hpp"
#include "dualview/retrieval.hpp"

namespace dualview::caption {

using grad::Tape;
using grad::Var;

namespace {

Var init_matrix(Rng& rng, int rows, int cols, double std_dev, const std::string& name) {
  std::vector<double> v(static_cast<std::size_t>(rows) * cols);
  for (auto& x : v) x = rng.gauss(0.0, std_dev);
  return grad::make_tensor({rows, cols}, std::move(v), true, name);
}

Var init_bias(int n, const std::string& name) {
  return grad::make_tensor({n}, std::vector<double>(static_cast<std::size_t>(n), 0.0), true, name);
}

std::vector<double> unit(std::vector<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm <= 1e-12) throw DegenerateVectorError("caption latent has zero norm");
  for (double& x : v) x /= norm;
  return v;
}

// one gated recurrent step; x and h are [1 x e] / [1 x H]
Var gru_step(Tape& t, const Var& x, const Var& h, const DecoderParams& p, const Var& ones) {
  auto xh = grad::concat_cols(t, x, h);
  auto z = grad::sigmoid(t, grad::add_rowvec(t, grad::matmul(t, xh, p.wz), p.bz));
  auto r = grad::sigmoid(t, grad::add_rowvec(t, grad::matmul(t, xh, p.wr), p.br));
  auto xrh = grad::concat_cols(t, x, grad::mul(t, r, h));
  auto cand = grad::tanh_op(t, grad::add_rowvec(t, grad::matmul(t, xrh, p.wh), p.bh));
  return grad::add(t, grad::mul(t, grad::sub(t, ones, z), h), grad::mul(t, z, cand));
}

}  // namespace

DecoderParams DecoderParams::init(int latent_dim, int vocab_size, const DecoderConfig& cfg,
                                  Rng& rng) {
  DecoderParams p;
  p.vocab_size = vocab_size;
  p.latent_dim = latent_dim;
  p.hidden_dim = cfg.hidden_dim;
  p.embed_dim = cfg.embed_dim;
  const int h = cfg.hidden_dim, e = cfg.embed_dim;
  p.init_w = init_matrix(rng, latent_dim, h, 1.0 / std::sqrt(latent_dim), "init_w");
  p.init_b = init_bias(h, "init_b");
  p.embed = init_matrix(rng, vocab_size, e, 0.1, "embed");
  p.wz = init_matrix(rng, e + h, h, 1.0 / std::sqrt(e + h), "wz");
  p.bz = init_bias(h, "bz");
  p.wr = init_matrix(rng, e + h, h, 1.0 / std::sqrt(e + h), "wr");
  p.br = init_bias(h, "br");
  p.wh = init_matrix(rng, e + h, h, 1.0 / std::sqrt(e + h), "wh");
  p.bh = init_bias(h, "bh");
  p.out_w = init_matrix(rng, h, vocab_size, 1.0 / std::sqrt(h), "out_w");
  p.out_b = init_bias(vocab_size, "out_b");
  return p;
}

std::vector<Var> DecoderParams::all() const {
  return {init_w, init_b, embed, wz, bz, wr, br, wh, bh, out_w, out_b};
}

std::vector<std::pair<std::string, Var>> DecoderParams::named() const {
  return {{"init_w", init_w}, {"init_b", init_b}, {"embed", embed}, {"wz", wz},
          {"bz", bz},         {"wr", wr},         {"br", br},       {"wh", wh},
          {"bh", bh},         {"out_w", out_w},   {"out_b", out_b}};
}

DecoderParams train_text_only(const std::vector<std::string>& sentences,
                              const enc::EncoderParams& frozen_encoder,
                              const enc::SubwordVocab& vocab, const DecoderConfig& cfg,
                              DecoderTrainStats* stats) {
  if (sentences.empty()) throw ContractError("train_text_only: empty sentence corpus");
  const auto t0 = std::chrono::steady_clock::now();

  Rng rng(Rng::mix(cfg.seed, 0xdec0de));
  auto decoder = DecoderParams::init(frozen_encoder.hyper.latent_dim, vocab.size(), cfg, rng);
  auto params = decoder.all();
  grad::AdamState adam;
  adam.lr = cfg.lr;
  grad::adam_init(adam, params);

  // frozen text latents, computed once; no frame features are ever read here
  auto latents = zeroshot::encode_texts_frozen(sentences, frozen_encoder, vocab);
  for (auto& l : latents) l = unit(std::move(l));

  std::vector<std::vector<int>> token_rows(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto ids = enc::tokenize_unpadded(sentences[i], vocab);
    if (static_cast<int>(ids.size()) > cfg.max_len - 2) {
      ids.resize(static_cast<std::size_t>(cfg.max_len - 2));
    }
    token_rows[i].push_back(enc::SubwordVocab::kBos);
    token_rows[i].insert(token_rows[i].end(), ids.begin(), ids.end());
    token_rows[i].push_back(enc::SubwordVocab::kEos);
  }

  DecoderTrainStats local;
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  Tape tape;
  auto ones = grad::make_tensor({1, cfg.hidden_dim},
                                std::vector<double>(static_cast<std::size_t>(cfg.hidden_dim), 1.0));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (auto si : order) {
      std::vector<double> latent = latents[si];
      for (auto& x : latent) x += rng.gauss(0.0, cfg.noise_std);
      auto cond = grad::make_tensor({1, decoder.latent_dim}, std::move(latent));
      auto h = grad::tanh_op(
          tape, grad::add_rowvec(tape, grad::matmul(tape, cond, decoder.init_w), decoder.init_b));

      const auto& ids = token_rows[si];
      Var total;
      for (std::size_t t = 0; t + 1 < ids.size(); ++t) {
        auto x = grad::rows_from_table(tape, decoder.embed, {ids[t]});
        h = gru_step(tape, x, h, decoder, ones);
        auto logits = grad::add_rowvec(tape, grad::matmul(tape, h, decoder.out_w), decoder.out_b);
        auto ce = grad::sub(tape, grad::logsumexp_rows(tape, logits),
                            grad::take_per_row(tape, logits, {ids[t + 1]}));
        total = total ? grad::add(tape, total, ce) : ce;
      }
      auto loss = grad::scale(tape, grad::mean_all(tape, total),
                              1.0 / static_cast<double>(ids.size() - 1));
      epoch_loss += loss->value[0];
      tape.backward(loss);
      grad::adam_step(params, adam);
    }
    local.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  local.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (stats) *stats = std::move(local);
  return decoder;
}

std::string generate(const std::vector<double>& latent, const DecoderParams& decoder,
                     const enc::SubwordVocab& vocab, int max_len) {
  Tape tape;
  auto ones = grad::make_tensor(
      {1, decoder.hidden_dim}, std::vector<double>(static_cast<std::size_t>(decoder.hidden_dim), 1.0));
  auto cond = grad::make_tensor({1, decoder.latent_dim}, unit(latent));
  auto h = grad::tanh_op(
      tape, grad::add_rowvec(tape, grad::matmul(tape, cond, decoder.init_w), decoder.init_b));
  std::vector<int> out;
  int token = enc::SubwordVocab::kBos;
  for (int step = 0; step < max_len; ++step) {
    auto x = grad::rows_from_table(tape, decoder.embed, {token});
    h = gru_step(tape, x, h, decoder, ones);
    auto logits = grad::add_rowvec(tape, grad::matmul(tape, h, decoder.out_w), decoder.out_b);
    int best = 0;
    for (int v = 1; v < decoder.vocab_size; ++v) {
      if (logits->value[static_cast<std::size_t>(v)] > logits->value[static_cast<std::size_t>(best)]) {
        best = v;  // strict comparison keeps ties on the lower id
      }
    }
    if (best == enc::SubwordVocab::kEos) break;
    out.push_back(best);
    token = best;
  }
  tape.clear();
  return enc::detokenize(out, vocab);
}

void save_decoder(const std::filesystem::path& dir, const DecoderParams& params) {
  std::filesystem::create_directories(dir);
  nlohmann::json extra{{"vocab_size", params.vocab_size},
                       {"latent_dim", params.latent_dim},
                       {"hidden_dim", params.hidden_dim},
                       {"embed_dim", params.embed_dim}};
  enc::save_tensors(dir / "decoder.f32", dir / "decoder.json", params.named(), extra);
}

DecoderParams load_decoder(const std::filesystem::path& dir) {
  auto [tensors, extra] = enc::load_tensors(dir / "decoder.f32", dir / "decoder.json");
  DecoderParams p;
  try {
    p.vocab_size = extra.at("vocab_size").get<int>();
    p.latent_dim = extra.at("latent_dim").get<int>();
    p.hidden_dim = extra.at("hidden_dim").get<int>();
    p.embed_dim = extra.at("embed_dim").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(dir.string() + "/decoder.json: " + e.what());
  }
  auto take = [&](const char* name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw IntegrityError(dir.string() + ": decoder is missing tensor " + std::string(name));
    }
    return it->second;
  };
  p.init_w = take("init_w");
  p.init_b = take("init_b");
  p.embed = take("embed");
  p.wz = take("wz");
  p.bz = take("bz");
  p.wr = take("wr");
  p.br = take("br");
  p.wh = take("wh");
  p.bh = take("bh");
  p.out_w = take("out_w");
  p.out_b = take("out_b");
  return p;
}

}  // namespace dualview::caption
