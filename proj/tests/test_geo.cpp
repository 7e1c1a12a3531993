#include <doctest.h>

#include <cmath>
#include <vector>

#include "lsars/geo.hpp"
#include "lsars/rng.hpp"

using namespace lsars;

namespace {

GeoPoint random_point(Rng& rng) {
  return {rng.uniform01() * 160.0 - 80.0, rng.uniform01() * 340.0 - 170.0};
}

}  // namespace

TEST_CASE("haversine reference distances") {
  CHECK(haversine_km({0, 0}, {0, 0}) == 0.0);
  // quarter circumference: pi/2 * 6371
  CHECK(haversine_km({0, 0}, {0, 90}) ==
        doctest::Approx(10007.543398010286).epsilon(1e-9));
  // one degree of latitude: pi * 6371 / 180
  CHECK(haversine_km({1, 0}, {0, 0}) ==
        doctest::Approx(111.19492664455873).epsilon(1e-9));
}

TEST_CASE("haversine is symmetric and zero only at equality") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const GeoPoint a = random_point(rng), b = random_point(rng);
    CHECK(haversine_km(a, b) == doctest::Approx(haversine_km(b, a)).epsilon(1e-12));
    if (!(a == b)) CHECK(haversine_km(a, b) > 0.0);
  }
}

TEST_CASE("haversine satisfies the triangle inequality") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const GeoPoint a = random_point(rng), b = random_point(rng), c = random_point(rng);
    CHECK(haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-6);
  }
}

TEST_CASE("gaussian pdf closed-form values") {
  const RegionGaussian unit({0, 0}, {1, 0, 1});
  CHECK(unit.pdf({0, 0}) == doctest::Approx(0.15915494309189535).epsilon(1e-12));

  const RegionGaussian wide({0, 0}, {2, 0, 2});
  // offset (1,1): quadratic form = 1, norm = 1/(4 pi)
  CHECK(wide.pdf({1, 1}) == doctest::Approx(0.04826617631502696).epsilon(1e-12));
}

TEST_CASE("gaussian pdf is symmetric around the mean") {
  const RegionGaussian g({3, -4}, {2.0, 0.4, 1.0});
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const double dlat = rng.uniform01() * 4 - 2;
    const double dlon = rng.uniform01() * 4 - 2;
    const double fwd = g.pdf({3 + dlat, -4 + dlon});
    const double bwd = g.pdf({3 - dlat, -4 - dlon});
    CHECK(fwd == doctest::Approx(bwd).epsilon(1e-12));
    CHECK(fwd > 0.0);
  }
}

TEST_CASE("gaussian pdf integrates to one on a +-6 sigma grid") {
  const RegionGaussian g({1, 2}, {2.0, 0.5, 1.0});
  const double slat = std::sqrt(2.0) * 6, slon = std::sqrt(1.0) * 6;
  const int steps = 400;
  const double dlat = 2 * slat / steps, dlon = 2 * slon / steps;
  double integral = 0.0;
  for (int i = 0; i < steps; ++i) {
    for (int j = 0; j < steps; ++j) {
      const GeoPoint p{1 - slat + (i + 0.5) * dlat, 2 - slon + (j + 0.5) * dlon};
      integral += g.pdf(p) * dlat * dlon;
    }
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("non positive definite covariance is rejected") {
  CHECK_THROWS_AS(RegionGaussian({0, 0}, {1.0, 2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(RegionGaussian({0, 0}, {0.0, 0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("fit_region_gaussian hand-computed cases") {
  const std::vector<GeoPoint> two{{0, 0}, {2, 0}};
  const RegionGaussian g2 = fit_region_gaussian(two);
  CHECK(g2.mean().lat == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g2.mean().lon == 0.0);
  CHECK(g2.covariance().lat_lat == doctest::Approx(2.0 + kCovRegularization).epsilon(1e-15));
  CHECK(g2.covariance().lat_lon == 0.0);
  CHECK(g2.covariance().lon_lon == doctest::Approx(kCovRegularization).epsilon(1e-15));

  const std::vector<GeoPoint> one{{3, 4}};
  const RegionGaussian g1 = fit_region_gaussian(one);
  CHECK(g1.mean() == GeoPoint{3, 4});
  CHECK(g1.covariance() == CovMatrix2{kCovRegularization, 0.0, kCovRegularization});

  const RegionGaussian g0 = fit_region_gaussian({}, {7, 8});
  CHECK(g0.mean() == GeoPoint{7, 8});
  CHECK(g0.covariance() == CovMatrix2{kCovRegularization, 0.0, kCovRegularization});
}

TEST_CASE("fit_region_gaussian recovers a known gaussian statistically") {
  // sample from mean (10, 20), cov [[4, 1], [1, 2]] via its Cholesky factor
  Rng rng(101);
  const double l11 = 2.0, l21 = 0.5, l22 = std::sqrt(2.0 - 0.25);
  const int n = 10000;
  std::vector<GeoPoint> points;
  points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double n1 = rng.normal(), n2 = rng.normal();
    points.push_back({10 + l11 * n1, 20 + l21 * n1 + l22 * n2});
  }
  const RegionGaussian g = fit_region_gaussian(points);
  CHECK(std::abs(g.mean().lat - 10) < 3 * 2.0 / std::sqrt(n));
  CHECK(std::abs(g.mean().lon - 20) < 3 * std::sqrt(2.0) / std::sqrt(n));
  CHECK(std::abs(g.covariance().lat_lat - 4.0) / 4.0 < 0.2);
  CHECK(std::abs(g.covariance().lat_lon - 1.0) / 1.0 < 0.2);
  CHECK(std::abs(g.covariance().lon_lon - 2.0) / 2.0 < 0.2);
}

TEST_CASE("kmeans with one region puts everything together") {
  const std::vector<GeoPoint> points{{0, 0}, {1, 1}, {50, 50}};
  const auto assignment = kmeans_regions(points, 1, 3);
  for (const int a : assignment) CHECK(a == 0);
}

TEST_CASE("kmeans separates two clouds, checked by exhaustive partition cost") {
  const std::vector<GeoPoint> points{{0, 0},  {0.5, 0.2}, {-0.3, 0.4}, {0.2, -0.5},
                                     {0.1, 0.3}, {50, 50},  {50.4, 49.8}, {49.7, 50.2},
                                     {50.1, 50.5}, {49.9, 49.6}};
  const auto assignment = kmeans_regions(points, 2, 9);

  // cost of a 2-partition: within-cluster sum of squared distances to means
  auto cost_of = [&](unsigned mask) {
    double sum_lat[2] = {0, 0}, sum_lon[2] = {0, 0};
    int count[2] = {0, 0};
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int c = (mask >> i) & 1;
      sum_lat[c] += points[i].lat;
      sum_lon[c] += points[i].lon;
      ++count[c];
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int c = (mask >> i) & 1;
      if (count[c] == 0) continue;
      const double dlat = points[i].lat - sum_lat[c] / count[c];
      const double dlon = points[i].lon - sum_lon[c] / count[c];
      cost += dlat * dlat + dlon * dlon;
    }
    return cost;
  };

  double best = 1e300;
  unsigned best_mask = 0;
  for (unsigned mask = 0; mask < (1u << points.size()); ++mask) {
    const double c = cost_of(mask);
    if (c < best) {
      best = c;
      best_mask = mask;
    }
  }
  unsigned got_mask = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    got_mask |= static_cast<unsigned>(assignment[i] == assignment[5]) << i;
  }
  const unsigned complement = ~got_mask & ((1u << points.size()) - 1);
  CHECK((got_mask == best_mask || complement == best_mask));
}

TEST_CASE("kmeans with as many regions as distinct points isolates each point") {
  const std::vector<GeoPoint> points{{0, 0}, {10, 10}, {-20, 30}};
  const auto assignment = kmeans_regions(points, 3, 5);
  CHECK(assignment[0] != assignment[1]);
  CHECK(assignment[1] != assignment[2]);
  CHECK(assignment[0] != assignment[2]);
}

TEST_CASE("kmeans tolerates more regions than distinct points") {
  const std::vector<GeoPoint> points{{0, 0}, {0, 0}, {10, 10}};
  const auto assignment = kmeans_regions(points, 5, 5);
  CHECK(assignment[0] == assignment[1]);
  CHECK(assignment[0] != assignment[2]);
}

TEST_CASE("kmeans assigns every point to its nearest final centroid") {
  Rng rng(55);
  std::vector<GeoPoint> points;
  for (int i = 0; i < 60; ++i) points.push_back(random_point(rng));
  const int regions = 4;
  const auto assignment = kmeans_regions(points, regions, 77);

  std::vector<double> sum_lat(regions, 0), sum_lon(regions, 0);
  std::vector<int> count(regions, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    sum_lat[assignment[i]] += points[i].lat;
    sum_lon[assignment[i]] += points[i].lon;
    ++count[assignment[i]];
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int mine = assignment[i];
    const double my_dlat = points[i].lat - sum_lat[mine] / count[mine];
    const double my_dlon = points[i].lon - sum_lon[mine] / count[mine];
    const double my_d = my_dlat * my_dlat + my_dlon * my_dlon;
    for (int c = 0; c < regions; ++c) {
      if (count[c] == 0) continue;
      const double dlat = points[i].lat - sum_lat[c] / count[c];
      const double dlon = points[i].lon - sum_lon[c] / count[c];
      CHECK(my_d <= dlat * dlat + dlon * dlon + 1e-9);
    }
  }
}

TEST_CASE("kmeans is deterministic given the seed and rejects empty input") {
  Rng rng(3);
  std::vector<GeoPoint> points;
  for (int i = 0; i < 30; ++i) points.push_back(random_point(rng));
  CHECK(kmeans_regions(points, 3, 42) == kmeans_regions(points, 3, 42));
  CHECK_THROWS_AS(kmeans_regions({}, 2, 1), std::invalid_argument);
}
