#include "dualview/losses.hpp"

namespace dualview::objective {

using grad::Tape;
using grad::Var;

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0)) throw ContractError("loss: temperature must be positive");
}

}  // namespace

Var info_nce_from_sims(Tape& tape, const Var& sims, double tau) {
  check_tau(tau);
  if (sims->shape.size() != 2 || sims->shape[0] != sims->shape[1] || sims->shape[0] < 1) {
    throw ShapeError("info_nce: expected a square similarity matrix, got " +
                     grad::shape_str(sims->shape));
  }
  auto logits = grad::scale(tape, sims, 1.0 / tau);
  auto pulled = grad::sub(tape, grad::logsumexp_rows(tape, logits), grad::diagonal(tape, logits));
  return grad::mean_all(tape, pulled);
}

Var mil_nce_from_sims(Tape& tape, const Var& sims, int m, double tau) {
  check_tau(tau);
  if (m < 1) throw ContractError("mil_nce: empty positive group (m < 1)");
  const int b = sims->shape.empty() ? 0 : sims->shape[0];
  if (sims->shape.size() != 2 || b < 1 || sims->shape[1] != b * m) {
    throw ShapeError("mil_nce: expected [B x B*M] similarities, got " +
                     grad::shape_str(sims->shape));
  }
  auto logits = grad::scale(tape, sims, 1.0 / tau);
  auto positive_block = grad::group_diagonal(tape, logits, m);
  auto pulled = grad::sub(tape, grad::logsumexp_rows(tape, logits),
                          grad::logsumexp_rows(tape, positive_block));
  return grad::mean_all(tape, pulled);
}

Var info_nce(Tape& tape, const Var& chi, const Var& beta, double tau) {
  return info_nce_from_sims(tape, grad::cosine_matrix(tape, chi, beta), tau);
}

Var mil_nce(Tape& tape, const Var& chi, const Var& gamma_flat, int m, double tau) {
  return mil_nce_from_sims(tape, grad::cosine_matrix(tape, chi, gamma_flat), m, tau);
}

Var combined_loss(Tape& tape, const Var& chi, const Var& beta, const Var& gamma_flat, int m,
                  double tau, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ContractError("combined_loss: epsilon outside [0, 1]");
  }
  auto info = info_nce(tape, chi, beta, tau);
  auto mil = mil_nce(tape, chi, gamma_flat, m, tau);
  return grad::add(tape, grad::scale(tape, info, epsilon),
                   grad::scale(tape, mil, 1.0 - epsilon));
}

}  // namespace dualview::objective
