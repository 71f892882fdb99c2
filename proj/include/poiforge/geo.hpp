#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace poiforge {

inline constexpr double kEarthRadiusM = 6371000.0;

struct LatLng {
    double lat = 0.0;
    double lng = 0.0;

    friend bool operator==(const LatLng& a, const LatLng& b) {
        return a.lat == b.lat && a.lng == b.lng;
    }
};

struct XY {
    double x = 0.0;
    double y = 0.0;
};

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Equirectangular projection anchored at a local origin. Axes are meters
/// east (x) and north (y). Adequate below a few kilometers from the origin,
/// which is the scale everything here operates at.
class LocalProjection {
public:
    explicit LocalProjection(LatLng origin)
        : origin_(origin), cos_lat0_(std::cos(deg2rad(origin.lat))) {}

    XY forward(LatLng p) const {
        return {deg2rad(p.lng - origin_.lng) * kEarthRadiusM * cos_lat0_,
                deg2rad(p.lat - origin_.lat) * kEarthRadiusM};
    }

    LatLng inverse(XY p) const {
        return {origin_.lat + rad2deg(p.y / kEarthRadiusM),
                origin_.lng + rad2deg(p.x / (kEarthRadiusM * cos_lat0_))};
    }

    LatLng origin() const { return origin_; }

private:
    LatLng origin_;
    double cos_lat0_;
};

/// Distance in meters between two points via the projection anchored at a.
inline double distance_m(LatLng a, LatLng b) {
    LocalProjection proj(a);
    XY q = proj.forward(b);
    return std::hypot(q.x, q.y);
}

inline LatLng centroid_of(const std::vector<LatLng>& pts) {
    double lat = 0.0, lng = 0.0;
    for (const auto& p : pts) {
        lat += p.lat;
        lng += p.lng;
    }
    const double n = static_cast<double>(pts.size());
    return {lat / n, lng / n};
}

inline bool valid_coordinate(double lat, double lng) {
    return std::isfinite(lat) && std::isfinite(lng) &&
           lat >= -90.0 && lat <= 90.0 && lng >= -180.0 && lng <= 180.0;
}

}  // namespace poiforge
