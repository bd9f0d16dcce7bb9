#include "dualview/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dualview/encoder.hpp"
#include "dualview/losses.hpp"
#include "dualview/rng.hpp"

namespace dualview::objective {

using grad::Tape;
using grad::Var;

namespace {

struct TinySetup {
  enc::EncoderParams params;
  std::vector<int> a_ids, w_ids;
  Var frames;
  int b, m, t;
  double tau, epsilon;
};

TinySetup make_setup(std::uint64_t seed, int index, double tau_override) {
  Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(index)));
  TinySetup s;
  s.b = 2 + index % 3;                    // B <= 4
  s.m = 1 + index % 3;                    // M <= 3
  const int d = 4 + index % 5;            // d <= 8
  const double taus[] = {0.3, 0.5, 1.0};
  const double epsilons[] = {0.5, 1.0, 0.0, 0.3};
  s.tau = tau_override > 0.0 ? tau_override : taus[index % 3];
  s.epsilon = epsilons[index % 4];
  s.t = 2;
  const int feature_dim = 5, vocab_size = 12, n = 4;

  enc::HyperConfig hyper;
  hyper.token_len = n;
  hyper.frames_per_clip = s.t;
  hyper.latent_dim = d;
  hyper.temperature = s.tau;
  hyper.loss_weight = s.epsilon;
  hyper.w_per_pair = s.m;
  hyper.batch_size = s.b;
  hyper.embed_dim = 5;
  hyper.hidden_dim = 6;
  s.params = enc::EncoderParams::init(hyper, feature_dim, vocab_size, rng);
  // random biases keep ramp preactivations off the exact kink, where the
  // derivative is only a subgradient
  for (const auto& bias : {s.params.text_b1, s.params.text_b2, s.params.text_proj_b,
                           s.params.frame_b1, s.params.frame_b2, s.params.frame_proj_b}) {
    for (auto& x : bias->value) x = rng.gauss(0.0, 0.05);
  }

  for (int i = 0; i < s.b * n; ++i) s.a_ids.push_back(rng.uniform_int(0, vocab_size - 1));
  for (int i = 0; i < s.b * s.m * n; ++i) s.w_ids.push_back(rng.uniform_int(0, vocab_size - 1));
  std::vector<double> rows(static_cast<std::size_t>(s.b * s.t) * feature_dim);
  for (auto& x : rows) x = rng.gauss(0.0, 1.0);
  s.frames = grad::make_tensor({s.b * s.t, feature_dim}, std::move(rows));
  return s;
}

double forward_loss(const TinySetup& s) {
  Tape tape;
  auto chi = enc::encode_clip(tape, s.frames, s.t, s.params);
  auto beta = enc::encode_text(tape, s.a_ids, s.b, s.params);
  auto gamma = enc::encode_text(tape, s.w_ids, s.b * s.m, s.params);
  auto loss = combined_loss(tape, chi, beta, gamma, s.m, s.tau, s.epsilon);
  const double value = loss->value[0];
  tape.clear();
  return value;
}

}  // namespace

GradCheckResult check_gradients(int n_configs, std::uint64_t seed, double fd_epsilon,
                                double tau_override) {
  GradCheckResult result;
  for (int cfg = 0; cfg < n_configs; ++cfg) {
    auto setup = make_setup(seed, cfg, tau_override);

    Tape tape;
    auto chi = enc::encode_clip(tape, setup.frames, setup.t, setup.params);
    auto beta = enc::encode_text(tape, setup.a_ids, setup.b, setup.params);
    auto gamma = enc::encode_text(tape, setup.w_ids, setup.b * setup.m, setup.params);
    auto loss =
        combined_loss(tape, chi, beta, gamma, setup.m, setup.tau, setup.epsilon);
    tape.backward(loss);

    const double f0 = forward_loss(setup);
    double worst = 0.0;
    for (auto& param : setup.params.all()) {
      for (std::size_t i = 0; i < param->numel(); ++i) {
        const double keep = param->value[i];
        param->value[i] = keep + fd_epsilon;
        const double hi = forward_loss(setup);
        param->value[i] = keep - fd_epsilon;
        const double lo = forward_loss(setup);
        param->value[i] = keep;
        const double fd = (hi - lo) / (2.0 * fd_epsilon);
        // a ramp kink inside the probed interval makes the one-sided slopes
        // disagree; the derivative is not defined there, so skip the entry
        const double fwd_slope = (hi - f0) / fd_epsilon;
        const double bwd_slope = (f0 - lo) / fd_epsilon;
        if (std::abs(fwd_slope - bwd_slope) > 1e-2 * std::max(1.0, std::abs(fd))) continue;
        const double ad = param->grad[i];
        const double rel = std::abs(ad - fd) / std::max({std::abs(ad), std::abs(fd), 1e-7});
        worst = std::max(worst, rel);
        result.entries_checked++;
      }
    }
    result.per_config.push_back(worst);
    result.max_rel_err = std::max(result.max_rel_err, worst);
  }
  return result;
}

}  // namespace dualview::objective
