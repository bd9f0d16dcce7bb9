#include "dualview/adam.hpp"

#include <cmath>

namespace dualview::grad {

void adam_init(AdamState& state, const std::vector<Var>& params) {
  state.step = 0;
  state.m.assign(params.size(), {});
  state.v.assign(params.size(), {});
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i].assign(params[i]->numel(), 0.0);
    state.v[i].assign(params[i]->numel(), 0.0);
  }
}

void adam_step(std::vector<Var>& params, AdamState& state) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam_step: state tracks " + std::to_string(state.m.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& param = *params[p];
    if (state.m[p].size() != param.numel()) {
      throw ShapeError("adam_step: moment size " + std::to_string(state.m[p].size()) +
                       " does not match parameter " + shape_str(param.shape));
    }
    if (param.grad.size() != param.numel()) continue;  // no grad this step
    for (std::size_t i = 0; i < param.numel(); ++i) {
      const double g = param.grad[i];
      state.m[p][i] = state.beta1 * state.m[p][i] + (1.0 - state.beta1) * g;
      state.v[p][i] = state.beta2 * state.v[p][i] + (1.0 - state.beta2) * g * g;
      const double mhat = state.m[p][i] / bc1;
      const double vhat = state.v[p][i] / bc2;
      param.value[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace dualview::grad
