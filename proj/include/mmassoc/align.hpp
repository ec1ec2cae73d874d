#pragma once

#include <utility>
#include <vector>

#include "mmassoc/numerics.hpp"

namespace mmassoc {

/// Monotone correspondence from (0,0) to (T1-1, T2-1); each step advances the
/// first index, the second index, or both, by exactly one.
struct AlignmentPath
{
  std::vector<std::pair<Index, Index>> pairs;

  bool is_valid(Index first_len, Index second_len) const;
};

struct DtwResult
{
  double total_cost = 0.0;
  Matrix cost;         // accumulated DTW table, T1 x T2
  AlignmentPath path;
};

/// Pairwise Euclidean distances between the rows of a and b.
template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> row_distances(const Eigen::MatrixBase<DerivedA>& a,
                                                 const Eigen::MatrixBase<DerivedB>& b)
{
  if (a.cols() != b.cols()) throw InvalidArgument("row_distances: column mismatch");
  MatrixX<typename DerivedA::Scalar> d(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).norm();
  }
  return d;
}

/// DTW over a precomputed distance table. Backtrace prefers the diagonal,
/// then (i-1, j), then (i, j-1) on ties.
DtwResult dtw_from_distances(const Matrix& dist);

/// DTW between the rows of two output sequences.
DtwResult dtw(const Matrix& first, const Matrix& second);

enum class WarpDirection { FirstToSecond, SecondToFirst };

/// Moves a per-frame target stream across the path: every destination frame
/// receives the mean of the source frames paired with it, renormalized.
Matrix warp_targets(const Matrix& source, const AlignmentPath& path, Index target_len, WarpDirection direction);

} // namespace mmassoc
