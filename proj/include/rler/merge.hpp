#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rler/policy.hpp"

namespace rler {

struct MergeConfig {
  /// Fraction of task-vector entries kept by magnitude, in (0, 1].
  double trim_fraction = 0.7;
  /// Scale applied to the merged task vector, in [0, 1].
  double scale = 0.5;
  /// Shared initialization the task vectors are measured from.
  PolicyParams base;
};

/// ceil(fraction * d), robust to products like 0.7 * 60 landing a hair above
/// an integer.
std::size_t trim_keep_count(std::size_t d, double fraction);

/// Zeroes all but the ceil(fraction * d) largest-magnitude entries; magnitude
/// ties keep the lower index.
std::vector<double> trim_task_vector(std::span<const double> v, double fraction);

/// Ties-merging: trim each task vector, elect a per-coordinate sign by the
/// larger summed magnitude (exact ties zero the coordinate), average the
/// entries that agree with the elected sign, and add the scaled result to the
/// base. Sums run over sorted values, so the output does not depend on the
/// order of `policies`.
PolicyParams ties_merge(std::span<const PolicyParams> policies, const MergeConfig& config);

}  // namespace rler
