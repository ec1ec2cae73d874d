#pragma once

#include <vector>

#include "mmassoc/binding.hpp"
#include "mmassoc/numerics.hpp"

namespace mmassoc {

/// One flag per output channel; the blank (last) channel is always shared.
struct SharedChannelMask
{
  std::vector<bool> shared;

  Index size() const { return static_cast<Index>(shared.size()); }
  bool all() const;
};

/// Channel c is shared iff the concept this modality binds to c appears in
/// both transcripts.
SharedChannelMask shared_channel_mask(const Assignment& assignment, const Transcript& own, const Transcript& other);

/// Shared channels take max(own, warped), the rest keep own; rows renormalized.
Matrix pooled_target(const Matrix& own, const Matrix& warped, const SharedChannelMask& mask);

enum class FusionMode { Original, Pooled };

/// original: z - warped; pooled: z - pooled_target(own, warped, mask).
Matrix multimodal_delta(const Matrix& z, const Matrix& own, const Matrix& warped, const SharedChannelMask& mask,
                        FusionMode mode);

} // namespace mmassoc
