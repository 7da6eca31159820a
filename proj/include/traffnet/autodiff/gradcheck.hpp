#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "traffnet/autodiff/tape.hpp"

namespace traffnet::ad {

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  /// Multiple of the central-difference rounding level eps*|loss|/step
  /// below which a derivative counts as unresolvable.
  double resolution_factor = 1e5;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t trials = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  /// Trials whose |analytic| + |numeric| fell under the resolution floor.
  std::size_t below_resolution = 0;
};

/// Builds a scalar loss on the given tape from the checked parameters.
using LossBuilder = std::function<Var(Tape&)>;

/// Compares reverse-mode gradients against central differences at randomly
/// drawn parameter coordinates. Error per trial is
/// |analytic - numeric| / max(floor, |analytic| + |numeric|), where floor is
/// resolution_factor * eps * max(1, |loss|) / step (at least 1e-8).
GradCheckResult check_gradients(const LossBuilder& build,
                                std::span<Parameter* const> params,
                                const GradCheckOptions& options = {});

}  // namespace traffnet::ad
