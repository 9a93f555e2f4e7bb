#include "dynhc/clustering_feature.hpp"

#include <vector>

#include "doctest.h"
#include "dynhc/errors.hpp"

using namespace dynhc;

TEST_CASE("single-point summaries") {
  const std::vector<double> coords{3.0, 4.0};
  const ClusteringFeature cf = single_point_cf(coords);
  CHECK(cf.ls == coords);
  CHECK(cf.ss == 25.0);
  CHECK(cf.n == 1);
  CHECK_THROWS_AS(single_point_cf(std::vector<double>{}), InputError);
}

TEST_CASE("merge adds componentwise") {
  const ClusteringFeature a{{2.0, 0.0}, 4.0, 2};
  const ClusteringFeature b{{1.0, 1.0}, 2.0, 1};
  const ClusteringFeature want{{3.0, 1.0}, 6.0, 3};
  CHECK(cf_merge(a, b) == want);
  CHECK(cf_merge(b, a) == want);

  const ClusteringFeature zero{{0.0, 0.0}, 0.0, 0};
  CHECK(cf_merge(a, zero) == a);

  const ClusteringFeature c{{5.0, -2.0}, 29.0, 1};
  CHECK(cf_merge(cf_merge(a, b), c) == cf_merge(a, cf_merge(b, c)));
}

TEST_CASE("merging the collinear fixture point by point") {
  ClusteringFeature total{{0.0}, 0.0, 0};
  for (double x : {0.0, 1.0, 2.0, 10.0})
    total = cf_merge(total, single_point_cf(std::vector<double>{x}));
  CHECK(total.ls == std::vector<double>{13.0});
  CHECK(total.ss == 105.0);
  CHECK(total.n == 4);
}

TEST_CASE("subtract inverts merge") {
  const ClusteringFeature a{{3.0, 1.0}, 6.0, 3};
  const ClusteringFeature b{{1.0, 1.0}, 2.0, 1};
  CHECK(cf_subtract(a, b) == ClusteringFeature{{2.0, 0.0}, 4.0, 2});

  // removing all but one point leaves that point's own summary
  const ClusteringFeature whole = cf_merge(
      single_point_cf(std::vector<double>{1.0, 2.0}),
      single_point_cf(std::vector<double>{4.0, 6.0}));
  const ClusteringFeature rest = single_point_cf(std::vector<double>{1.0, 2.0});
  CHECK(cf_subtract(whole, rest) ==
        single_point_cf(std::vector<double>{4.0, 6.0}));
}

TEST_CASE("subtract guards its invariants") {
  const ClusteringFeature a{{1.0}, 1.0, 1};
  CHECK_THROWS_AS(cf_subtract(a, a), InputError);

  const ClusteringFeature big{{1.0}, 1.0, 2};
  const ClusteringFeature noisy{{1.0}, 1.0 + 1e-13, 1};
  CHECK(cf_subtract(big, noisy).ss == 0.0);

  const ClusteringFeature way_off{{1.0}, 2.0, 1};
  CHECK_THROWS_AS(cf_subtract(big, way_off), InputError);
}

TEST_CASE("dimension mismatches are rejected") {
  const ClusteringFeature a{{1.0, 2.0}, 5.0, 1};
  const ClusteringFeature b{{1.0}, 1.0, 1};
  CHECK_THROWS_AS(cf_merge(a, b), InputError);
  CHECK_THROWS_AS(cf_subtract(a, b), InputError);
}
