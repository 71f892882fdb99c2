#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "poiforge/geo.hpp"

namespace poiforge {

struct AddressRecord {
    std::string address_id;
    double lat = 0.0;
    double lng = 0.0;
    std::string raw_text;
    std::string clean_text;  // after vocabulary preprocessing
    std::string mined_text;  // after specialized preprocessing
    std::optional<std::vector<double>> embedding;

    LatLng location() const { return {lat, lng}; }
};

enum class PolygonStage {
    raw_hull,
    merged,
    osm_corrected,
    baseline,
    ground_truth
};

inline const char* to_string(PolygonStage s) {
    switch (s) {
        case PolygonStage::raw_hull: return "raw_hull";
        case PolygonStage::merged: return "merged";
        case PolygonStage::osm_corrected: return "osm_corrected";
        case PolygonStage::baseline: return "baseline";
        case PolygonStage::ground_truth: return "ground_truth";
    }
    return "unknown";
}

inline PolygonStage stage_from_string(const std::string& s) {
    if (s == "raw_hull") return PolygonStage::raw_hull;
    if (s == "merged") return PolygonStage::merged;
    if (s == "osm_corrected") return PolygonStage::osm_corrected;
    if (s == "baseline") return PolygonStage::baseline;
    if (s == "ground_truth") return PolygonStage::ground_truth;
    throw std::invalid_argument("unknown polygon stage: " + s);
}

/// A PoI boundary: closed ring of WGS84 vertices (first == last).
struct PoiPolygon {
    std::string poi_id;
    std::vector<LatLng> ring;
    std::vector<std::string> names;
    int member_count = 0;
    PolygonStage stage = PolygonStage::raw_hull;
};

namespace detail {

inline double cross(XY o, XY a, XY b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(XY p, XY q, XY r) {
    return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
           std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
}

/// True when segments pq and rs share at least one point.
inline bool segments_intersect(XY p, XY q, XY r, XY s) {
    const double d1 = cross(r, s, p);
    const double d2 = cross(r, s, q);
    const double d3 = cross(p, q, r);
    const double d4 = cross(p, q, s);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(r, p, s)) return true;
    if (d2 == 0 && on_segment(r, q, s)) return true;
    if (d3 == 0 && on_segment(p, r, q)) return true;
    if (d4 == 0 && on_segment(p, s, q)) return true;
    return false;
}

}  // namespace detail

/// Shoelace area of a closed ring, in m^2 (projected at the ring centroid).
/// Positive for counterclockwise rings.
inline double ring_signed_area_m2(const std::vector<LatLng>& ring) {
    if (ring.size() < 4) return 0.0;
    std::vector<LatLng> open(ring.begin(), ring.end() - 1);
    LocalProjection proj(centroid_of(open));
    double acc = 0.0;
    for (size_t i = 0; i < open.size(); ++i) {
        XY a = proj.forward(open[i]);
        XY b = proj.forward(open[(i + 1) % open.size()]);
        acc += a.x * b.y - b.x * a.y;
    }
    return acc / 2.0;
}

inline double ring_area_m2(const std::vector<LatLng>& ring) {
    return std::abs(ring_signed_area_m2(ring));
}

/// True iff the ring is closed (first == last), has >= 4 entries, is simple
/// and encloses positive area.
inline bool validate_polygon(const std::vector<LatLng>& ring) {
    if (ring.size() < 4) return false;
    if (!(ring.front() == ring.back())) return false;

    const size_t n = ring.size() - 1;  // open vertex count
    for (size_t i = 0; i < n; ++i) {
        if (ring[i] == ring[i + 1]) return false;  // zero-length edge
    }

    // Simplicity: no two non-adjacent edges may touch. Edges are tested on
    // raw coordinates; the equirectangular map is affine per axis, so
    // incidence is unchanged.
    for (size_t i = 0; i < n; ++i) {
        XY p{ring[i].lng, ring[i].lat};
        XY q{ring[i + 1].lng, ring[i + 1].lat};
        for (size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) continue;
            XY r{ring[j].lng, ring[j].lat};
            XY s{ring[j + 1].lng, ring[j + 1].lat};
            if (detail::segments_intersect(p, q, r, s)) return false;
        }
    }

    return ring_area_m2(ring) > 1e-9;
}

inline bool validate_polygon(const PoiPolygon& poly) {
    return validate_polygon(poly.ring);
}

}  // namespace poiforge
