#include "mmassoc/fusion.hpp"

#include <algorithm>

namespace mmassoc {

bool SharedChannelMask::all() const
{
  return std::all_of(shared.begin(), shared.end(), [](bool b) { return b; });
}

SharedChannelMask shared_channel_mask(const Assignment& assignment, const Transcript& own, const Transcript& other)
{
  const Index C = assignment.size();
  auto present = [C](const Transcript& t) {
    std::vector<bool> in(static_cast<std::size_t>(C), false);
    for (int s : t) {
      if (s < 0 || s >= C) throw InvalidArgument("shared_channel_mask: unknown concept " + std::to_string(s));
      in[s] = true;
    }
    return in;
  };
  const auto in_own = present(own);
  const auto in_other = present(other);

  SharedChannelMask mask{std::vector<bool>(static_cast<std::size_t>(C) + 1, false)};
  for (Index i = 0; i < C; ++i) mask.shared[assignment.perm[i]] = in_own[i] && in_other[i];
  mask.shared[C] = true;
  return mask;
}

Matrix pooled_target(const Matrix& own, const Matrix& warped, const SharedChannelMask& mask)
{
  require_same_shape(own, warped, "pooled_target");
  if (mask.size() != own.cols()) throw InvalidArgument("pooled_target: mask size mismatch");
  Matrix out = own;
  for (Index c = 0; c < own.cols(); ++c) {
    if (mask.shared[c]) out.col(c) = own.col(c).cwiseMax(warped.col(c));
  }
  normalize_rows(out, "pooled_target");
  return out;
}

Matrix multimodal_delta(const Matrix& z, const Matrix& own, const Matrix& warped, const SharedChannelMask& mask,
                        FusionMode mode)
{
  require_same_shape(z, warped, "multimodal_delta");
  if (mode == FusionMode::Original) return z - warped;
  require_same_shape(z, own, "multimodal_delta");
  return z - pooled_target(own, warped, mask);
}

} // namespace mmassoc
