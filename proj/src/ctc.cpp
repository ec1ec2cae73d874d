#include "mmassoc/ctc.hpp"

#include "mmassoc/error.hpp"

namespace mmassoc {

std::vector<int> extend_labels(const Transcript& labels, int blank)
{
  std::vector<int> ext(2 * labels.size() + 1, blank);
  for (std::size_t k = 0; k < labels.size(); ++k) ext[2 * k + 1] = labels[k];
  return ext;
}

Index min_frames(const Transcript& labels)
{
  Index n = static_cast<Index>(labels.size());
  for (std::size_t k = 1; k < labels.size(); ++k) {
    if (labels[k] == labels[k - 1]) ++n;
  }
  return n;
}

CtcLattice ctc_lattice(const Matrix& z, const Transcript& labels)
{
  const Index T = z.rows();
  const int blank = static_cast<int>(z.cols()) - 1;
  if (blank < 0) throw InvalidArgument("ctc_lattice: no output channels");
  for (int l : labels) {
    if (l < 0 || l >= blank) throw InvalidArgument("ctc_lattice: label " + std::to_string(l) + " out of range");
  }
  if (T < 1 || T < min_frames(labels)) throw InfeasibleSequence();

  CtcLattice lat;
  lat.labeling = extend_labels(labels, blank);
  const auto& ext = lat.labeling;
  const Index U = static_cast<Index>(ext.size());
  const Matrix log_z = z.array().log().matrix();

  // transition u-2 -> u is allowed onto a label that differs from the one two back
  auto can_skip = [&ext](Index u) { return u >= 2 && ext[u] != ext[u - 2]; };

  lat.log_fw = Matrix::Constant(T, U, kNegInf);
  lat.log_fw(0, 0) = log_z(0, ext[0]);
  if (U > 1) lat.log_fw(0, 1) = log_z(0, ext[1]);
  for (Index t = 1; t < T; ++t) {
    for (Index u = 0; u < U; ++u) {
      double acc = lat.log_fw(t - 1, u);
      if (u >= 1) acc = log_add(acc, lat.log_fw(t - 1, u - 1));
      if (can_skip(u)) acc = log_add(acc, lat.log_fw(t - 1, u - 2));
      lat.log_fw(t, u) = acc == kNegInf ? kNegInf : acc + log_z(t, ext[u]);
    }
  }

  lat.log_bw = Matrix::Constant(T, U, kNegInf);
  lat.log_bw(T - 1, U - 1) = log_z(T - 1, ext[U - 1]);
  if (U > 1) lat.log_bw(T - 1, U - 2) = log_z(T - 1, ext[U - 2]);
  for (Index t = T - 2; t >= 0; --t) {
    for (Index u = 0; u < U; ++u) {
      double acc = lat.log_bw(t + 1, u);
      if (u + 1 < U) acc = log_add(acc, lat.log_bw(t + 1, u + 1));
      if (u + 2 < U && can_skip(u + 2)) acc = log_add(acc, lat.log_bw(t + 1, u + 2));
      lat.log_bw(t, u) = acc == kNegInf ? kNegInf : acc + log_z(t, ext[u]);
    }
  }

  lat.log_prob = lat.log_fw(T - 1, U - 1);
  if (U > 1) lat.log_prob = log_add(lat.log_prob, lat.log_fw(T - 1, U - 2));
  if (lat.log_prob == kNegInf) throw InfeasibleSequence();
  return lat;
}

Matrix ctc_target(const CtcLattice& lattice, const Matrix& z)
{
  const Index T = z.rows();
  const Index U = static_cast<Index>(lattice.labeling.size());
  if (lattice.log_fw.rows() != T || lattice.log_fw.cols() != U) {
    throw InvalidArgument("ctc_target: lattice does not match z");
  }
  Matrix y = Matrix::Zero(T, z.cols());
  for (Index t = 0; t < T; ++t) {
    for (Index u = 0; u < U; ++u) {
      const int c = lattice.labeling[u];
      const double both = lattice.log_fw(t, u) + lattice.log_bw(t, u);
      if (both == kNegInf) continue;
      y(t, c) += std::exp(both - std::log(z(t, c)) - lattice.log_prob);
    }
  }
  normalize_rows(y, "ctc_target");
  return y;
}

Matrix ctc_delta(const Matrix& z, const Matrix& y)
{
  require_same_shape(z, y, "ctc_delta");
  return z - y;
}

Transcript best_path_decode(const Matrix& z)
{
  const int blank = static_cast<int>(z.cols()) - 1;
  Transcript out;
  int prev = -1;
  for (Index t = 0; t < z.rows(); ++t) {
    const int c = static_cast<int>(argmax_lowest(z.row(t)));
    if (c != prev && c != blank) out.push_back(c);
    prev = c;
  }
  return out;
}

} // namespace mmassoc
