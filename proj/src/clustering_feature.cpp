#include "dynhc/clustering_feature.hpp"

#include <algorithm>

#include "dynhc/errors.hpp"

namespace dynhc {

namespace {

void check_pair(const ClusteringFeature& a, const ClusteringFeature& b) {
  if (a.ls.size() != b.ls.size())
    throw InputError("clustering feature dimensions differ");
  if (a.n < 0 || b.n < 0)
    throw InputError("clustering feature has a negative count");
}

}  // namespace

ClusteringFeature single_point_cf(std::span<const double> coords) {
  if (coords.empty()) throw InputError("point has no coordinates");
  ClusteringFeature cf;
  cf.ls.assign(coords.begin(), coords.end());
  for (double x : coords) cf.ss += x * x;
  cf.n = 1;
  return cf;
}

ClusteringFeature cf_merge(const ClusteringFeature& a,
                           const ClusteringFeature& b) {
  check_pair(a, b);
  ClusteringFeature out;
  out.ls.resize(a.ls.size());
  for (std::size_t i = 0; i < a.ls.size(); ++i) out.ls[i] = a.ls[i] + b.ls[i];
  out.ss = a.ss + b.ss;
  out.n = a.n + b.n;
  return out;
}

ClusteringFeature cf_subtract(const ClusteringFeature& a,
                              const ClusteringFeature& b) {
  check_pair(a, b);
  if (a.n - b.n < 1)
    throw InputError("subtraction would empty the clustering feature");
  ClusteringFeature out;
  out.ls.resize(a.ls.size());
  for (std::size_t i = 0; i < a.ls.size(); ++i) out.ls[i] = a.ls[i] - b.ls[i];
  out.ss = a.ss - b.ss;
  if (out.ss < 0.0) {
    // cancellation noise clamps; anything larger means b was not a subset
    if (out.ss < -1e-9 * std::max(1.0, a.ss))
      throw InputError("squared-norm sum went negative in subtraction");
    out.ss = 0.0;
  }
  out.n = a.n - b.n;
  return out;
}

}  // namespace dynhc
