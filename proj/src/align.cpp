#include "mmassoc/align.hpp"

#include <algorithm>

namespace mmassoc {

bool AlignmentPath::is_valid(Index first_len, Index second_len) const
{
  if (pairs.empty() || first_len < 1 || second_len < 1) return false;
  if (pairs.front() != std::pair<Index, Index>{0, 0}) return false;
  if (pairs.back() != std::pair<Index, Index>{first_len - 1, second_len - 1}) return false;
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    const Index di = pairs[k].first - pairs[k - 1].first;
    const Index dj = pairs[k].second - pairs[k - 1].second;
    if (di < 0 || dj < 0 || di > 1 || dj > 1 || di + dj == 0) return false;
  }
  return true;
}

DtwResult dtw_from_distances(const Matrix& dist)
{
  const Index n = dist.rows();
  const Index m = dist.cols();
  if (n < 1 || m < 1) throw InvalidArgument("dtw: empty sequence");

  DtwResult r;
  r.cost.resize(n, m);
  r.cost(0, 0) = dist(0, 0);
  for (Index i = 1; i < n; ++i) r.cost(i, 0) = dist(i, 0) + r.cost(i - 1, 0);
  for (Index j = 1; j < m; ++j) r.cost(0, j) = dist(0, j) + r.cost(0, j - 1);
  for (Index i = 1; i < n; ++i) {
    for (Index j = 1; j < m; ++j) {
      r.cost(i, j) = dist(i, j) + std::min({r.cost(i - 1, j - 1), r.cost(i - 1, j), r.cost(i, j - 1)});
    }
  }
  r.total_cost = r.cost(n - 1, m - 1);

  Index i = n - 1, j = m - 1;
  r.path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = r.cost(i - 1, j - 1);
      const double up = r.cost(i - 1, j);
      const double left = r.cost(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    r.path.pairs.emplace_back(i, j);
  }
  std::reverse(r.path.pairs.begin(), r.path.pairs.end());
  return r;
}

DtwResult dtw(const Matrix& first, const Matrix& second) { return dtw_from_distances(row_distances(first, second)); }

Matrix warp_targets(const Matrix& source, const AlignmentPath& path, Index target_len, WarpDirection direction)
{
  const bool forward = direction == WarpDirection::FirstToSecond;
  const Index first_len = forward ? source.rows() : target_len;
  const Index second_len = forward ? target_len : source.rows();
  if (!path.is_valid(first_len, second_len)) throw InvalidArgument("warp_targets: path does not fit the lengths");

  Matrix out = Matrix::Zero(target_len, source.cols());
  std::vector<int> hits(static_cast<std::size_t>(target_len), 0);
  for (const auto& [a, b] : path.pairs) {
    const Index src = forward ? a : b;
    const Index dst = forward ? b : a;
    out.row(dst) += source.row(src);
    ++hits[dst];
  }
  for (Index t = 0; t < target_len; ++t) {
    if (hits[t] == 0) throw InvalidArgument("warp_targets: target frame without a pair");
    out.row(t) /= hits[t];
  }
  normalize_rows(out, "warp_targets");
  return out;
}

} // namespace mmassoc
