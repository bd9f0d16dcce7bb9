#pragma once

// Contrastive objectives over the joint latent space. Both losses are
// one-directional (clip to text) and keep the positive term inside the
// denominator; all softmax math goes through logsumexp.

#include "dualview/autodiff.hpp"

namespace dualview::objective {

// sims: [B x B] similarity matrix, positives on the diagonal
grad::Var info_nce_from_sims(grad::Tape& tape, const grad::Var& sims, double tau);

// sims: [B x B*M]; row i's positive group is the column block [i*M, (i+1)*M)
grad::Var mil_nce_from_sims(grad::Tape& tape, const grad::Var& sims, int m, double tau);

grad::Var info_nce(grad::Tape& tape, const grad::Var& chi, const grad::Var& beta, double tau);

// gamma_flat: [B*M x d], row i*M+m holds the m-th candidate text of pair i
grad::Var mil_nce(grad::Tape& tape, const grad::Var& chi, const grad::Var& gamma_flat, int m,
                  double tau);

grad::Var combined_loss(grad::Tape& tape, const grad::Var& chi, const grad::Var& beta,
                        const grad::Var& gamma_flat, int m, double tau, double epsilon);

}  // namespace dualview::objective
