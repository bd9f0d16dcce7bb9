#pragma once

// Central finite-difference validation of the combined loss gradients on
// small random encoder configurations.

#include <cstdint>
#include <vector>

namespace dualview::objective {

struct GradCheckResult {
  double max_rel_err = 0.0;           // worst entry across all configs
  std::vector<double> per_config;     // worst entry per config
  long long entries_checked = 0;
};

GradCheckResult check_gradients(int n_configs = 20, std::uint64_t seed = 20240501,
                                double fd_epsilon = 1e-5, double tau_override = 0.0);

}  // namespace dualview::objective
