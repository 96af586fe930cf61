#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace stopspacing {

inline constexpr double kEarthRadiusM = 6'371'000.0;

// WGS84 coordinate in degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool in_range() const {
    return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
  }
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct GeoBox {
  double min_lat;
  double min_lon;
  double max_lat;
  double max_lon;
};

// Haversine distance on a sphere of radius kEarthRadiusM.
double great_circle_distance(const GeoPoint& a, const GeoPoint& b);

// Point at `fraction` of the great-circle arc from a to b.
GeoPoint interpolate_great_circle(const GeoPoint& a, const GeoPoint& b, double fraction);

// Polyline with cumulative great-circle distances. Immutable once built.
class Path {
 public:
  // Requires at least two points.
  explicit Path(std::vector<GeoPoint> points);

  std::span<const GeoPoint> points() const { return points_; }
  std::span<const double> cumulative_m() const { return cumulative_m_; }
  std::size_t size() const { return points_.size(); }
  double length_m() const { return cumulative_m_.back(); }
  const GeoPoint& front() const { return points_.front(); }
  const GeoPoint& back() const { return points_.back(); }

  // Point at `distance_m` along the path, clamped to [0, length].
  GeoPoint point_at(double distance_m) const;

  GeoBox bounding_box() const;

 private:
  std::vector<GeoPoint> points_;
  std::vector<double> cumulative_m_;
};

inline double path_length(const Path& path) { return path.length_m(); }

// Location on a path. distance_along_m equals
// cumulative_m[segment_index] + fraction * (edge length).
struct PathPosition {
  std::size_t segment_index = 0;
  double fraction = 0.0;
  double distance_along_m = 0.0;
  double offset_m = 0.0;
};

// Closest position to `q` among positions whose distance along the path lies
// in [min_distance_along_m, max_distance_along_m]. Distances from q to each
// edge are measured in an equirectangular plane centred on q. Ties go to the
// earliest position.
PathPosition project_point_onto_path(
    const Path& path, const GeoPoint& q, double min_distance_along_m = 0.0,
    double max_distance_along_m = std::numeric_limits<double>::infinity());

// Portion of the path between two distances along it. Interior vertices are
// kept; end points are interpolated on the great circle. Throws
// Error(invalid_range) unless 0 <= from_m <= to_m <= length.
Path substring_path(const Path& path, double from_m, double to_m);

// Minimum planar distance from q to any edge of the path.
double point_to_path_distance(const Path& path, const GeoPoint& q);

}  // namespace stopspacing
