#include "stopspacing/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "stopspacing/error.hpp"

namespace stopspacing {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Relative slack for the path range checks in substring_path.
constexpr double kRangeSlack = 1e-9;

double wrap_longitude_delta(double delta) {
  while (delta > 180.0) delta -= 360.0;
  while (delta < -180.0) delta += 360.0;
  return delta;
}

struct PlanarPoint {
  double x;
  double y;
};

// Equirectangular projection about `origin`, in meters.
struct LocalPlane {
  GeoPoint origin;
  double cos_lat;

  explicit LocalPlane(const GeoPoint& o) : origin(o), cos_lat(std::cos(o.lat * kDegToRad)) {}

  PlanarPoint project(const GeoPoint& p) const {
    return {wrap_longitude_delta(p.lon - origin.lon) * kDegToRad * kEarthRadiusM * cos_lat,
            (p.lat - origin.lat) * kDegToRad * kEarthRadiusM};
  }
};

struct EdgeProjection {
  double t;
  double distance_m;
};

// Closest point to the plane origin on the edge a->b with t limited to
// [t_lo, t_hi].
EdgeProjection project_origin_onto_edge(const PlanarPoint& a, const PlanarPoint& b,
                                        double t_lo, double t_hi) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? -(a.x * dx + a.y * dy) / len2 : t_lo;
  t = std::clamp(t, t_lo, t_hi);
  const double px = a.x + t * dx;
  const double py = a.y + t * dy;
  return {t, std::hypot(px, py)};
}

}  // namespace

double great_circle_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = wrap_longitude_delta(b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = std::clamp(s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
}

GeoPoint interpolate_great_circle(const GeoPoint& a, const GeoPoint& b, double fraction) {
  if (fraction <= 0.0) return a;
  if (fraction >= 1.0) return b;
  const double delta = great_circle_distance(a, b) / kEarthRadiusM;
  if (delta < 1e-12) {
    return {a.lat + (b.lat - a.lat) * fraction,
            a.lon + wrap_longitude_delta(b.lon - a.lon) * fraction};
  }
  const double phi1 = a.lat * kDegToRad;
  const double lambda1 = a.lon * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double lambda2 = b.lon * kDegToRad;
  const double wa = std::sin((1.0 - fraction) * delta) / std::sin(delta);
  const double wb = std::sin(fraction * delta) / std::sin(delta);
  const double x = wa * std::cos(phi1) * std::cos(lambda1) + wb * std::cos(phi2) * std::cos(lambda2);
  const double y = wa * std::cos(phi1) * std::sin(lambda1) + wb * std::cos(phi2) * std::sin(lambda2);
  const double z = wa * std::sin(phi1) + wb * std::sin(phi2);
  return {std::atan2(z, std::hypot(x, y)) * kRadToDeg, std::atan2(y, x) * kRadToDeg};
}

Path::Path(std::vector<GeoPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "a path needs at least two points");
  }
  cumulative_m_.reserve(points_.size());
  cumulative_m_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cumulative_m_.push_back(cumulative_m_.back() +
                            great_circle_distance(points_[i - 1], points_[i]));
  }
}

GeoPoint Path::point_at(double distance_m) const {
  if (distance_m <= 0.0) return points_.front();
  if (distance_m >= length_m()) return points_.back();
  // First vertex strictly beyond distance_m; the edge ends there.
  const auto it = std::upper_bound(cumulative_m_.begin(), cumulative_m_.end(), distance_m);
  const auto end = static_cast<std::size_t>(it - cumulative_m_.begin());
  const std::size_t start = end - 1;
  const double edge = cumulative_m_[end] - cumulative_m_[start];
  const double fraction = edge > 0.0 ? (distance_m - cumulative_m_[start]) / edge : 0.0;
  return interpolate_great_circle(points_[start], points_[end], fraction);
}

GeoBox Path::bounding_box() const {
  GeoBox box{points_[0].lat, points_[0].lon, points_[0].lat, points_[0].lon};
  for (const auto& p : points_) {
    box.min_lat = std::min(box.min_lat, p.lat);
    box.max_lat = std::max(box.max_lat, p.lat);
    box.min_lon = std::min(box.min_lon, p.lon);
    box.max_lon = std::max(box.max_lon, p.lon);
  }
  return box;
}

PathPosition project_point_onto_path(const Path& path, const GeoPoint& q,
                                     double min_distance_along_m,
                                     double max_distance_along_m) {
  const auto points = path.points();
  const auto cumulative = path.cumulative_m();
  const double total = path.length_m();
  const double lo = std::clamp(min_distance_along_m, 0.0, total);
  const double hi = std::clamp(std::max(max_distance_along_m, lo), lo, total);

  const LocalPlane plane(q);
  PathPosition best;
  best.offset_m = std::numeric_limits<double>::infinity();
  PlanarPoint a = plane.project(points[0]);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const PlanarPoint b = plane.project(points[i + 1]);
    const double start = cumulative[i];
    const double end = cumulative[i + 1];
    const double length = end - start;
    if (end < lo) {
      a = b;
      continue;
    }
    if (start > hi) break;
    double t_lo = 0.0;
    double t_hi = 1.0;
    if (length > 0.0) {
      t_lo = std::clamp((lo - start) / length, 0.0, 1.0);
      t_hi = std::clamp((hi - start) / length, 0.0, 1.0);
    }
    const EdgeProjection proj = project_origin_onto_edge(a, b, t_lo, t_hi);
    if (proj.distance_m < best.offset_m) {
      best.segment_index = i;
      best.fraction = proj.t;
      best.distance_along_m = start + proj.t * length;
      best.offset_m = proj.distance_m;
    }
    a = b;
  }
  // Keep the reported position inside the requested window despite rounding.
  best.distance_along_m = std::clamp(best.distance_along_m, lo, hi);
  return best;
}

Path substring_path(const Path& path, double from_m, double to_m) {
  const double total = path.length_m();
  const double slack = kRangeSlack * std::max(1.0, total);
  if (!(from_m >= -slack) || !(to_m <= total + slack) || !(from_m <= to_m)) {
    throw Error(ErrorCode::invalid_range,
                "substring range [" + std::to_string(from_m) + ", " + std::to_string(to_m) +
                    "] outside path of length " + std::to_string(total));
  }
  from_m = std::clamp(from_m, 0.0, total);
  to_m = std::clamp(to_m, from_m, total);

  const auto points = path.points();
  const auto cumulative = path.cumulative_m();
  std::vector<GeoPoint> out;
  out.push_back(path.point_at(from_m));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (cumulative[i] > from_m && cumulative[i] < to_m) out.push_back(points[i]);
  }
  out.push_back(path.point_at(to_m));
  return Path(std::move(out));
}

double point_to_path_distance(const Path& path, const GeoPoint& q) {
  const auto points = path.points();
  const LocalPlane plane(q);
  double best = std::numeric_limits<double>::infinity();
  PlanarPoint a = plane.project(points[0]);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const PlanarPoint b = plane.project(points[i]);
    best = std::min(best, project_origin_onto_edge(a, b, 0.0, 1.0).distance_m);
    a = b;
  }
  return best;
}

}  // namespace stopspacing
