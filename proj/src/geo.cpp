#include "lsars/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "lsars/rng.hpp"

namespace lsars {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEarthRadiusKm = 6371.0;

double radians(double degrees) { return degrees * kPi / 180.0; }

double squared_euclidean(const GeoPoint& a, const GeoPoint& b) {
  const double dlat = a.lat - b.lat;
  const double dlon = a.lon - b.lon;
  return dlat * dlat + dlon * dlon;
}

}  // namespace

bool valid_coordinates(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 &&
         p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = radians(a.lat);
  const double phi2 = radians(b.lat);
  const double dphi = radians(b.lat - a.lat);
  const double dlambda = radians(b.lon - a.lon);
  const double sp = std::sin(dphi / 2.0);
  const double sl = std::sin(dlambda / 2.0);
  const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, h)));
}

RegionGaussian::RegionGaussian(GeoPoint mean, CovMatrix2 cov)
    : mean_(mean), cov_(cov) {
  const double det = cov.lat_lat * cov.lon_lon - cov.lat_lon * cov.lat_lon;
  if (!(det > 0.0) || !(cov.lat_lat > 0.0) || !(cov.lon_lon > 0.0)) {
    throw std::invalid_argument("RegionGaussian: covariance is not positive definite");
  }
  inv_ll_ = cov.lon_lon / det;
  inv_lo_ = -cov.lat_lon / det;
  inv_oo_ = cov.lat_lat / det;
  log_norm_ = -std::log(2.0 * kPi) - 0.5 * std::log(det);
}

double RegionGaussian::log_pdf(const GeoPoint& p) const {
  const double dlat = p.lat - mean_.lat;
  const double dlon = p.lon - mean_.lon;
  const double quad =
      dlat * dlat * inv_ll_ + 2.0 * dlat * dlon * inv_lo_ + dlon * dlon * inv_oo_;
  return log_norm_ - 0.5 * quad;
}

double RegionGaussian::pdf(const GeoPoint& p) const { return std::exp(log_pdf(p)); }

RegionGaussian fit_region_gaussian(std::span<const GeoPoint> points,
                                   GeoPoint previous_mean) {
  const std::size_t n = points.size();
  if (n == 0) {
    return RegionGaussian(previous_mean,
                          {kCovRegularization, 0.0, kCovRegularization});
  }
  double mean_lat = 0.0, mean_lon = 0.0;
  for (const auto& p : points) {
    mean_lat += p.lat;
    mean_lon += p.lon;
  }
  mean_lat /= static_cast<double>(n);
  mean_lon /= static_cast<double>(n);
  if (n == 1) {
    return RegionGaussian({mean_lat, mean_lon},
                          {kCovRegularization, 0.0, kCovRegularization});
  }
  double ll = 0.0, lo = 0.0, oo = 0.0;
  for (const auto& p : points) {
    const double dlat = p.lat - mean_lat;
    const double dlon = p.lon - mean_lon;
    ll += dlat * dlat;
    lo += dlat * dlon;
    oo += dlon * dlon;
  }
  const double divisor = static_cast<double>(n - 1);
  return RegionGaussian({mean_lat, mean_lon},
                        {ll / divisor + kCovRegularization, lo / divisor,
                         oo / divisor + kCovRegularization});
}

std::vector<int> kmeans_regions(std::span<const GeoPoint> locations, int regions,
                                std::uint64_t seed, int max_iterations) {
  if (locations.empty()) throw std::invalid_argument("kmeans_regions: no locations");
  if (regions < 1) throw std::invalid_argument("kmeans_regions: regions must be >= 1");

  const std::size_t n = locations.size();
  const std::size_t k = static_cast<std::size_t>(regions);
  Rng rng(seed);

  std::set<std::pair<double, double>> distinct;
  for (const auto& p : locations) distinct.emplace(p.lat, p.lon);

  std::vector<GeoPoint> centroids;
  centroids.reserve(k);
  if (distinct.size() <= k) {
    for (const auto& [lat, lon] : distinct) centroids.push_back({lat, lon});
    while (centroids.size() < k) {
      centroids.push_back(locations[rng.below(n)]);
    }
  } else {
    // k-means++: next centroid drawn proportional to squared distance from
    // the nearest already-chosen one.
    centroids.push_back(locations[rng.below(n)]);
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    while (centroids.size() < k) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dist2[i] = std::min(dist2[i], squared_euclidean(locations[i], centroids.back()));
        total += dist2[i];
      }
      if (total <= 0.0) {
        centroids.push_back(locations[rng.below(n)]);
        continue;
      }
      centroids.push_back(locations[rng.pick_weighted(dist2, total)]);
    }
  }

  auto nearest = [&](const GeoPoint& p) {
    int best = 0;
    double best_d = squared_euclidean(p, centroids[0]);
    for (std::size_t c = 1; c < k; ++c) {
      const double d = squared_euclidean(p, centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    return best;
  };

  std::vector<int> assignment(n);
  for (std::size_t i = 0; i < n; ++i) assignment[i] = nearest(locations[i]);

  for (int iteration = 0; iteration < max_iterations; ++iteration) {
    std::vector<double> sum_lat(k, 0.0), sum_lon(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum_lat[assignment[i]] += locations[i].lat;
      sum_lon[assignment[i]] += locations[i].lon;
      ++count[assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) {
        centroids[c] = {sum_lat[c] / static_cast<double>(count[c]),
                        sum_lon[c] / static_cast<double>(count[c])};
      }
      // empty cluster keeps its previous centroid
    }
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest(locations[i]);
      if (c != assignment[i]) {
        assignment[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return assignment;
}

}  // namespace lsars
