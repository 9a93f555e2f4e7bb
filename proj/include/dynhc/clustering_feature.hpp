#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dynhc {

// Additive summary of a point set: componentwise linear sum, total
// squared norm, and the number of points represented.
struct ClusteringFeature {
  std::vector<double> ls;
  double ss = 0.0;
  std::int64_t n = 0;

  friend bool operator==(const ClusteringFeature&,
                         const ClusteringFeature&) = default;
};

ClusteringFeature single_point_cf(std::span<const double> coords);

// Componentwise sum; associative and commutative.
ClusteringFeature cf_merge(const ClusteringFeature& a,
                           const ClusteringFeature& b);

// Inverse of cf_merge. A slightly negative squared-norm sum from
// cancellation clamps to zero; a result count below one is rejected.
ClusteringFeature cf_subtract(const ClusteringFeature& a,
                              const ClusteringFeature& b);

}  // namespace dynhc
