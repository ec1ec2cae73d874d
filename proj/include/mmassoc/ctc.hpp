#pragma once

#include <vector>

#include "mmassoc/numerics.hpp"

namespace mmassoc {

/// A sequence of class (or concept) indices.
using Transcript = std::vector<int>;

/// Blank-interleaved labeling b, l1, b, l2, ..., lk, b (length 2k+1).
std::vector<int> extend_labels(const Transcript& labels, int blank);

/// Fewest frames able to emit `labels`: one per label plus one blank between
/// every pair of equal neighbours.
Index min_frames(const Transcript& labels);

/// Forward/backward variables in the log domain. Both include the emission at
/// their own timestep, so for every t
///   logsumexp_u(log_fw[t,u] + log_bw[t,u] - log z[t, labeling[u]]) == log_prob.
struct CtcLattice
{
  std::vector<int> labeling;
  Matrix log_fw; // T x (2k+1)
  Matrix log_bw; // T x (2k+1)
  double log_prob = kNegInf;
};

/// The blank is the last channel of `z`. Throws InfeasibleSequence when `z`
/// has fewer than min_frames(labels) rows.
CtcLattice ctc_lattice(const Matrix& z, const Transcript& labels);

/// Per-frame posterior occupancy of every class given the labeling.
Matrix ctc_target(const CtcLattice& lattice, const Matrix& z);

/// z - y, the derivative with respect to the pre-softmax logits.
Matrix ctc_delta(const Matrix& z, const Matrix& y);

/// Argmax per frame (lowest index wins ties), merge repeats, drop blanks.
Transcript best_path_decode(const Matrix& z);

} // namespace mmassoc
