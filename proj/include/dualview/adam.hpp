#pragma once

#include <vector>

#include "dualview/autodiff.hpp"

namespace dualview::grad {

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step = 0;
  std::vector<std::vector<double>> m;  // first moments, one per parameter
  std::vector<std::vector<double>> v;  // second moments
};

void adam_init(AdamState& state, const std::vector<Var>& params);

// Standard bias-corrected Adam; reads each parameter's grad in place.
void adam_step(std::vector<Var>& params, AdamState& state);

}  // namespace dualview::grad
