#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "mmassoc/error.hpp"

namespace mmassoc {

// Dense storage is row-major with explicit dims: row t of a T x K matrix is the
// vector emitted at timestep t.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m)
{
  return m.derived().array().isFinite().all();
}

template <typename A, typename B>
void require_same_shape(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b, const char* what)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
  }
}

/// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
template <typename Scalar>
Scalar log_add(Scalar a, Scalar b)
{
  if (a == -std::numeric_limits<Scalar>::infinity()) return b;
  if (b == -std::numeric_limits<Scalar>::infinity()) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

/// Stable log-sum-exp of a nonempty vector expression.
template <typename Derived>
typename Derived::Scalar logsumexp(const Eigen::DenseBase<Derived>& v)
{
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) throw InvalidArgument("logsumexp: empty vector");
  const Scalar hi = v.maxCoeff();
  if (hi == -std::numeric_limits<Scalar>::infinity()) return hi;
  return hi + std::log((v.derived().array() - hi).exp().sum());
}

/// Row-wise softmax with max subtraction. Throws on non-finite input.
template <typename Derived>
MatrixX<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& m)
{
  using Scalar = typename Derived::Scalar;
  if (!all_finite(m)) throw InvalidArgument("softmax_rows: non-finite input");
  MatrixX<Scalar> out = m;
  for (Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r).array();
    row = (row - row.maxCoeff()).exp();
    row /= row.sum();
  }
  return out;
}

/// Rescales every row to sum to one. Rows that sum to zero are an error.
void normalize_rows(Matrix& m, const char* what);

/// Index of the largest entry; ties go to the lowest index.
template <typename Derived>
Index argmax_lowest(const Eigen::DenseBase<Derived>& v)
{
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v.derived().coeff(i) > v.derived().coeff(best)) best = i;
  }
  return best;
}

} // namespace mmassoc
