#include <cmath>

#include "doctest.h"
#include "dualview/encoder.hpp"
#include "dualview/errors.hpp"
#include "dualview/gradcheck.hpp"
#include "dualview/losses.hpp"
#include "dualview/pairing.hpp"
#include "dualview/pipeline.hpp"
#include "dualview/rng.hpp"
#include "dualview/trainer.hpp"

using namespace dualview;
using namespace dualview::objective;
using grad::Tape;

namespace {

grad::Var random_latents(Rng& rng, int rows, int d) {
  std::vector<double> v(static_cast<std::size_t>(rows) * d);
  for (auto& x : v) x = rng.gauss(0, 1);
  return grad::make_tensor({rows, d}, std::move(v));
}

// random rotation via Gram-Schmidt on a gaussian matrix
std::vector<double> random_rotation(Rng& rng, int d) {
  std::vector<std::vector<double>> q;
  for (int i = 0; i < d; ++i) {
    std::vector<double> v(static_cast<std::size_t>(d));
    for (auto& x : v) x = rng.gauss(0, 1);
    for (const auto& u : q) {
      double dot = 0;
      for (int j = 0; j < d; ++j) dot += v[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)];
      for (int j = 0; j < d; ++j) v[static_cast<std::size_t>(j)] -= dot * u[static_cast<std::size_t>(j)];
    }
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    q.push_back(std::move(v));
  }
  std::vector<double> flat;
  for (const auto& row : q) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

}  // namespace

TEST_CASE("hand-evaluated two-by-two InfoNCE") {
  Tape t;
  auto sims = grad::make_tensor({2, 2}, {1, 0, 0, 1});
  const double loss = info_nce_from_sims(t, sims, 1.0)->value[0];
  CHECK(loss == doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-9));
  t.clear();
}

TEST_CASE("losses are non-negative") {
  Rng rng(61);
  Tape t;
  for (int rep = 0; rep < 100; ++rep) {
    const int b = rng.uniform_int(1, 5), m = rng.uniform_int(1, 3), d = rng.uniform_int(2, 8);
    const double tau = 0.1 + rng.uniform();
    CHECK(info_nce(t, random_latents(rng, b, d), random_latents(rng, b, d), tau)->value[0] >=
          -1e-12);
    CHECK(mil_nce(t, random_latents(rng, b, d), random_latents(rng, b * m, d), m, tau)->value[0] >=
          -1e-12);
    t.clear();
  }
}

TEST_CASE("losses are invariant to a common orthogonal rotation") {
  Rng rng(62);
  Tape t;
  for (int rep = 0; rep < 20; ++rep) {
    const int b = 3, m = 2, d = 6;
    auto chi = random_latents(rng, b, d);
    auto beta = random_latents(rng, b, d);
    auto gamma = random_latents(rng, b * m, d);
    auto rot = grad::make_tensor({d, d}, random_rotation(rng, d));
    const double before =
        combined_loss(t, chi, beta, gamma, m, 0.3, 0.5)->value[0];
    const double after = combined_loss(t, grad::matmul(t, chi, rot), grad::matmul(t, beta, rot),
                                       grad::matmul(t, gamma, rot), m, 0.3, 0.5)
                             ->value[0];
    CHECK(std::abs(before - after) < 1e-9);
    t.clear();
  }
}

TEST_CASE("losses are invariant to a constant similarity shift") {
  Rng rng(63);
  Tape t;
  for (int rep = 0; rep < 20; ++rep) {
    const int b = 4, m = 2;
    std::vector<double> sims(static_cast<std::size_t>(b) * b);
    for (auto& x : sims) x = rng.uniform(-1, 1);
    auto shifted = sims;
    const double c = rng.uniform(-3, 3);
    for (auto& x : shifted) x += c;
    CHECK(std::abs(info_nce_from_sims(t, grad::make_tensor({b, b}, sims), 0.3)->value[0] -
                   info_nce_from_sims(t, grad::make_tensor({b, b}, shifted), 0.3)->value[0]) <
          1e-9);

    std::vector<double> msims(static_cast<std::size_t>(b) * b * m);
    for (auto& x : msims) x = rng.uniform(-1, 1);
    auto mshifted = msims;
    for (auto& x : mshifted) x += c;
    CHECK(std::abs(mil_nce_from_sims(t, grad::make_tensor({b, b * m}, msims), m, 0.3)->value[0] -
                   mil_nce_from_sims(t, grad::make_tensor({b, b * m}, mshifted), m, 0.3)
                       ->value[0]) < 1e-9);
    t.clear();
  }
}

TEST_CASE("loss contract violations throw") {
  Rng rng(64);
  Tape t;
  auto chi = random_latents(rng, 2, 4);
  CHECK_THROWS_AS(info_nce(t, chi, chi, 0.0), ContractError);
  CHECK_THROWS_AS(mil_nce(t, chi, random_latents(rng, 4, 4), 0, 0.3), ContractError);
  CHECK_THROWS_AS(combined_loss(t, chi, chi, random_latents(rng, 4, 4), 2, 0.3, 1.5),
                  ContractError);
  auto degenerate = grad::make_tensor({2, 4}, {0, 0, 0, 0, 1, 1, 1, 1});
  CHECK_THROWS_AS(info_nce(t, degenerate, chi, 0.3), DegenerateVectorError);
  t.clear();
}

TEST_CASE("sharp temperatures still pass the gradient check at a looser tolerance") {
  const auto report = check_gradients(5, 20240501, 1e-5, 0.05);
  CHECK(report.max_rel_err < 1e-3);
}

namespace {

RunConfig tiny_run_config() {
  RunConfig cfg;
  cfg.seed = 5;
  cfg.world.seed = 5;
  cfg.world.n_videos = 2;
  cfg.world.duration_s = 40.0;
  cfg.world.fps = 8.0;
  cfg.world.feature_dim = 8;
  cfg.world.n_event_classes = 4;
  cfg.world.keyword_vocab = {"clamp", "stapler", "forceps", "trocar"};
  cfg.world.narration_offset_s = 1.0;
  cfg.eval_videos = 2;
  cfg.filter.keyword_list = {"clamp", "stapler", "forceps", "trocar"};
  cfg.hyper.token_len = 10;
  cfg.hyper.frames_per_clip = 2;
  cfg.hyper.latent_dim = 12;
  cfg.hyper.embed_dim = 8;
  cfg.hyper.hidden_dim = 10;
  cfg.hyper.batch_size = 4;
  cfg.train_steps = 30;
  cfg.lr = 1e-3;
  cfg.vocab_size = 280;
  cfg.validate();
  return cfg;
}

}  // namespace

TEST_CASE("training with zero learning rate leaves parameters unchanged") {
  auto cfg = tiny_run_config();
  cfg.lr = 0.0;
  const auto world = pipeline::make_train_world(cfg);
  const auto model = pipeline::train_model(world, cfg, Views::both, cfg.clip_length,
                                           cfg.hyper.frames_per_clip, cfg.seed);
  Rng rng(Rng::mix(Rng::mix(cfg.seed, 0x77ab), 0x1217));
  auto fresh = enc::EncoderParams::init(model.params.hyper, cfg.world.feature_dim,
                                        model.vocab.size(), rng);
  const auto trained = model.params.named();
  const auto init = fresh.named();
  for (std::size_t i = 0; i < trained.size(); ++i) {
    CHECK(trained[i].second->value == init[i].second->value);
  }
}

TEST_CASE("training is deterministic and its loss decreases") {
  const auto cfg = tiny_run_config();
  const auto world = pipeline::make_train_world(cfg);
  const auto m1 = pipeline::train_model(world, cfg, Views::both, cfg.clip_length, 2, cfg.seed);
  const auto m2 = pipeline::train_model(world, cfg, Views::both, cfg.clip_length, 2, cfg.seed);
  const auto p1 = m1.params.named();
  const auto p2 = m2.params.named();
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i].second->value == p2[i].second->value);

  REQUIRE(m1.report.rows.size() == 30);
  double early = 0, late = 0;
  for (int i = 0; i < 5; ++i) {
    early += m1.report.rows[static_cast<std::size_t>(i)].total;
    late += m1.report.rows[m1.report.rows.size() - 1 - static_cast<std::size_t>(i)].total;
  }
  CHECK(late < early);
  for (const auto& row : m1.report.rows) {
    CHECK(std::isfinite(row.total));
    CHECK(row.total >= 0.0);
  }
}

TEST_CASE("single-view switches drop the other loss term") {
  const auto cfg = tiny_run_config();
  const auto world = pipeline::make_train_world(cfg);
  const auto a_model = pipeline::train_model(world, cfg, Views::a_only, cfg.clip_length, 2, 3);
  for (const auto& row : a_model.report.rows) CHECK(row.milnce == 0.0);
  const auto w_model = pipeline::train_model(world, cfg, Views::w_only, cfg.clip_length, 2, 3);
  for (const auto& row : w_model.report.rows) CHECK(row.infonce == 0.0);
}

TEST_CASE("an absurd learning rate diverges with a step index") {
  auto cfg = tiny_run_config();
  cfg.lr = 1e160;  // overflow the trunk activations
  cfg.train_steps = 60;
  const auto world = pipeline::make_train_world(cfg);
  try {
    pipeline::train_model(world, cfg, Views::both, cfg.clip_length, 2, cfg.seed);
    FAIL("expected TrainingDivergedError");
  } catch (const TrainingDivergedError& e) {
    CHECK(e.step >= 0);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("batch size larger than the dataset is rejected") {
  auto cfg = tiny_run_config();
  cfg.hyper.batch_size = 4096;
  const auto world = pipeline::make_train_world(cfg);
  CHECK_THROWS_AS(
      pipeline::train_model(world, cfg, Views::both, cfg.clip_length, 2, cfg.seed),
      ContractError);
}
