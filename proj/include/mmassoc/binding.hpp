#pragma once

#include <vector>

#include "mmassoc/ctc.hpp"
#include "mmassoc/numerics.hpp"

namespace mmassoc {

/// Concept vectors of one modality: row i holds the per-channel exponents of
/// concept i. Entries stay strictly positive.
struct ConceptVectors
{
  Matrix gamma; // C x C

  static ConceptVectors ones(Index concepts) { return {Matrix::Ones(concepts, concepts)}; }
  Index concepts() const { return gamma.rows(); }
};

/// z_hat(channel, concept) = mean_t z[t, channel] ^ gamma(concept, channel).
struct ConceptEvidence
{
  Matrix z_hat; // C x C
  Index frames = 0;
};

/// Concept i is coded by output channel perm[i].
struct Assignment
{
  std::vector<int> perm;

  static Assignment identity(Index concepts);
  Index size() const { return static_cast<Index>(perm.size()); }
  bool is_bijection() const;
  /// channel -> concept
  std::vector<int> inverse() const;
  bool operator==(const Assignment&) const = default;
};

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kGammaFloor = 1e-6;

/// Blank channel (last column of z) is excluded; z is clamped at 1e-12.
ConceptEvidence concept_evidence(const Matrix& z, const ConceptVectors& concepts);

/// Greedy elimination: repeatedly take the largest surviving entry (ties to
/// the smaller row, then the smaller column), bind concept=col to
/// channel=row, and strike that row and column.
Assignment row_column_elimination(const Matrix& z_hat);

/// Gradient of cost_i = ||z_hat_i - e_i / C||^2 with respect to gamma_i, for
/// every concept i, where e_i is the one-hot of channel perm[i].
Matrix concept_gradient(const Matrix& z, const ConceptVectors& concepts, const Assignment& assignment);

/// Sum over concepts of cost_i.
double concept_cost(const Matrix& z, const ConceptVectors& concepts, const Assignment& assignment);

/// One gradient step of rate `alpha`, then re-clamp every exponent at 1e-6.
void update_concept_vectors(ConceptVectors& concepts, const Matrix& z, const Assignment& assignment, double alpha);

/// Maps concept ids to channel ids.
Transcript relabel_transcript(const Transcript& concepts, const Assignment& assignment);

/// Maps channel ids back to concept ids.
Transcript channels_to_concepts(const Transcript& channels, const Assignment& assignment);

} // namespace mmassoc
