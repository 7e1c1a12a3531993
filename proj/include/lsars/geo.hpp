#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lsars {

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]

  bool operator==(const GeoPoint&) const = default;
};

bool valid_coordinates(const GeoPoint& p);

// Great-circle distance, Earth radius 6371.0 km.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

// 2x2 symmetric covariance over (lat, lon), degrees^2.
struct CovMatrix2 {
  double lat_lat = 0.0;
  double lat_lon = 0.0;
  double lon_lon = 0.0;

  bool operator==(const CovMatrix2&) const = default;
};

// Added to both diagonal entries of every fitted covariance so the density
// stays finite for degenerate (empty or single-point) regions.
inline constexpr double kCovRegularization = 1e-4;

// Bivariate normal over raw (lat, lon) degree space. The inverse and
// normalization constant are cached at construction; covariance must be
// positive definite.
class RegionGaussian {
 public:
  RegionGaussian() : RegionGaussian({0.0, 0.0}, {1.0, 0.0, 1.0}) {}
  RegionGaussian(GeoPoint mean, CovMatrix2 cov);

  const GeoPoint& mean() const { return mean_; }
  const CovMatrix2& covariance() const { return cov_; }

  double pdf(const GeoPoint& p) const;
  double log_pdf(const GeoPoint& p) const;

  bool operator==(const RegionGaussian& other) const {
    return mean_ == other.mean_ && cov_ == other.cov_;
  }

 private:
  GeoPoint mean_;
  CovMatrix2 cov_;
  double inv_ll_, inv_lo_, inv_oo_;  // cached inverse covariance
  double log_norm_;                  // -log(2*pi*sqrt(det))
};

// Sample mean and unbiased sample covariance plus the regularizer.
// Degenerate inputs: one point -> that point with regularizer-only
// covariance; empty -> previous_mean retained, regularizer-only covariance.
RegionGaussian fit_region_gaussian(std::span<const GeoPoint> points,
                                   GeoPoint previous_mean = {0.0, 0.0});

// Lloyd's k-means on (lat, lon) with squared Euclidean distance, k-means++
// seeding driven by the seed, at most `max_iterations` rounds. Returns the
// region index per input location; every location ends up assigned to its
// nearest final centroid (ties toward the lower index). Fewer distinct
// locations than `regions`: each distinct location seeds a cluster and the
// surplus centroids start at randomly chosen existing points.
std::vector<int> kmeans_regions(std::span<const GeoPoint> locations, int regions,
                                std::uint64_t seed, int max_iterations = 100);

}  // namespace lsars
