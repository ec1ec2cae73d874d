#include "mmassoc/binding.hpp"

#include <numeric>

namespace mmassoc {
namespace {

void check_dims(const Matrix& z, const ConceptVectors& concepts)
{
  if (concepts.gamma.rows() != concepts.gamma.cols()) throw InvalidArgument("concept vectors must be square");
  if (z.cols() != concepts.concepts() + 1) {
    throw InvalidArgument("concept evidence: z has " + std::to_string(z.cols()) + " channels, expected " +
                          std::to_string(concepts.concepts() + 1));
  }
  if (z.rows() < 1) throw InvalidArgument("concept evidence: empty sequence");
}

Matrix clamped_concept_channels(const Matrix& z)
{
  return z.leftCols(z.cols() - 1).cwiseMax(kProbabilityFloor);
}

} // namespace

Assignment Assignment::identity(Index concepts)
{
  Assignment a;
  a.perm.resize(static_cast<std::size_t>(concepts));
  std::iota(a.perm.begin(), a.perm.end(), 0);
  return a;
}

bool Assignment::is_bijection() const
{
  std::vector<bool> seen(perm.size(), false);
  for (int c : perm) {
    if (c < 0 || c >= static_cast<int>(perm.size()) || seen[c]) return false;
    seen[c] = true;
  }
  return true;
}

std::vector<int> Assignment::inverse() const
{
  std::vector<int> inv(perm.size(), -1);
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
  return inv;
}

ConceptEvidence concept_evidence(const Matrix& z, const ConceptVectors& concepts)
{
  check_dims(z, concepts);
  const Index C = concepts.concepts();
  const Matrix p = clamped_concept_channels(z);
  ConceptEvidence ev{Matrix::Zero(C, C), z.rows()};
  for (Index i = 0; i < C; ++i) {
    const Eigen::RowVectorXd exponent = concepts.gamma.row(i);
    for (Index t = 0; t < z.rows(); ++t) {
      ev.z_hat.col(i) += p.row(t).array().pow(exponent.array()).matrix().transpose();
    }
  }
  ev.z_hat /= static_cast<double>(z.rows());
  return ev;
}

Assignment row_column_elimination(const Matrix& z_hat)
{
  if (z_hat.rows() != z_hat.cols()) throw InvalidArgument("row_column_elimination: matrix must be square");
  if (!all_finite(z_hat)) throw InvalidArgument("row_column_elimination: non-finite entry");
  const Index C = z_hat.rows();
  std::vector<bool> row_alive(C, true), col_alive(C, true);
  Assignment a;
  a.perm.assign(C, -1);
  for (Index round = 0; round < C; ++round) {
    Index best_r = -1, best_c = -1;
    for (Index r = 0; r < C; ++r) {
      if (!row_alive[r]) continue;
      for (Index c = 0; c < C; ++c) {
        if (!col_alive[c]) continue;
        if (best_r < 0 || z_hat(r, c) > z_hat(best_r, best_c)) {
          best_r = r;
          best_c = c;
        }
      }
    }
    a.perm[best_c] = static_cast<int>(best_r);
    row_alive[best_r] = false;
    col_alive[best_c] = false;
  }
  return a;
}

Matrix concept_gradient(const Matrix& z, const ConceptVectors& concepts, const Assignment& assignment)
{
  check_dims(z, concepts);
  const Index C = concepts.concepts();
  if (assignment.size() != C || !assignment.is_bijection()) {
    throw InvalidArgument("concept_gradient: invalid assignment");
  }
  const Matrix p = clamped_concept_channels(z);
  const Matrix log_p = p.array().log().matrix();
  const double inv_t = 1.0 / static_cast<double>(z.rows());

  Matrix grad(C, C);
  for (Index i = 0; i < C; ++i) {
    Eigen::ArrayXd z_hat = Eigen::ArrayXd::Zero(C);
    Eigen::ArrayXd dz_hat = Eigen::ArrayXd::Zero(C); // d z_hat / d gamma, elementwise
    const Eigen::ArrayXd exponent = concepts.gamma.row(i).transpose().array();
    for (Index t = 0; t < z.rows(); ++t) {
      const Eigen::ArrayXd powered = p.row(t).transpose().array().pow(exponent);
      z_hat += powered;
      dz_hat += powered * log_p.row(t).transpose().array();
    }
    z_hat *= inv_t;
    dz_hat *= inv_t;
    Eigen::ArrayXd target = Eigen::ArrayXd::Zero(C);
    target(assignment.perm[i]) = 1.0 / static_cast<double>(C);
    grad.row(i) = (2.0 * (z_hat - target) * dz_hat).matrix().transpose();
  }
  return grad;
}

double concept_cost(const Matrix& z, const ConceptVectors& concepts, const Assignment& assignment)
{
  const ConceptEvidence ev = concept_evidence(z, concepts);
  const Index C = concepts.concepts();
  double cost = 0.0;
  for (Index i = 0; i < C; ++i) {
    Eigen::VectorXd diff = ev.z_hat.col(i);
    diff(assignment.perm[i]) -= 1.0 / static_cast<double>(C);
    cost += diff.squaredNorm();
  }
  return cost;
}

void update_concept_vectors(ConceptVectors& concepts, const Matrix& z, const Assignment& assignment, double alpha)
{
  const Matrix grad = concept_gradient(z, concepts, assignment);
  concepts.gamma = (concepts.gamma - alpha * grad).cwiseMax(kGammaFloor);
}

Transcript relabel_transcript(const Transcript& concepts, const Assignment& assignment)
{
  Transcript out;
  out.reserve(concepts.size());
  for (int s : concepts) {
    if (s < 0 || s >= static_cast<int>(assignment.perm.size())) {
      throw InvalidArgument("relabel_transcript: unknown concept " + std::to_string(s));
    }
    out.push_back(assignment.perm[s]);
  }
  return out;
}

Transcript channels_to_concepts(const Transcript& channels, const Assignment& assignment)
{
  const std::vector<int> inv = assignment.inverse();
  Transcript out;
  out.reserve(channels.size());
  for (int c : channels) {
    if (c < 0 || c >= static_cast<int>(inv.size())) {
      throw InvalidArgument("channels_to_concepts: unknown channel " + std::to_string(c));
    }
    out.push_back(inv[c]);
  }
  return out;
}

} // namespace mmassoc
