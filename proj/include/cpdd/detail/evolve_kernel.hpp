#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cpdd/detail/su2_kernel.hpp"
#include "cpdd/dynamics.hpp"

namespace cpdd::detail {

struct Su2Evolution {
  Su2 final;
  std::vector<Su2> samples;
};

/// Same contract as cpdd::evolve but stays in Cayley-Klein form. Lab-frame
/// runs are not SU(2)-preserving only through the U(1) part, which the
/// traceless lab Hamiltonian never generates, so the form is exact there too.
Su2Evolution evolve_su2(const FrameChoice& frame, std::span<const DriveSegment> segments,
                        const std::optional<SignalField>& signal, double substep,
                        std::span<const double> sample_times);

}  // namespace cpdd::detail
