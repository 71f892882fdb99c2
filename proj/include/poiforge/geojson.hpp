#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "poiforge/geo.hpp"
#include "poiforge/types.hpp"

namespace poiforge {

namespace detail {

inline std::string json_string(const std::string& s) {
    return nlohmann::json(s).dump();
}

inline std::string coord_pair(LatLng p) {
    char buf[64];
    // fixed 9 decimals so identical polygons serialize identically
    std::snprintf(buf, sizeof(buf), "[%.9f,%.9f]", p.lng, p.lat);
    return buf;
}

}  // namespace detail

/// Canonical serialization: fixed key order, fixed number format, one
/// feature per line. Emitting a loaded file reproduces it byte for byte.
inline std::string polygons_to_geojson(const std::vector<PoiPolygon>& polys) {
    std::ostringstream out;
    out << "{\"type\":\"FeatureCollection\",\"features\":[";
    for (size_t i = 0; i < polys.size(); ++i) {
        const PoiPolygon& p = polys[i];
        out << (i == 0 ? "\n" : ",\n");
        out << "{\"type\":\"Feature\",\"properties\":{\"poi_id\":"
            << detail::json_string(p.poi_id) << ",\"names\":[";
        for (size_t k = 0; k < p.names.size(); ++k) {
            if (k) out << ",";
            out << detail::json_string(p.names[k]);
        }
        out << "],\"member_count\":" << p.member_count << ",\"stage\":\""
            << to_string(p.stage) << "\"},";
        out << "\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[";
        for (size_t k = 0; k < p.ring.size(); ++k) {
            if (k) out << ",";
            out << detail::coord_pair(p.ring[k]);
        }
        out << "]]}}";
    }
    out << (polys.empty() ? "]}" : "\n]}");
    out << "\n";
    return out.str();
}

inline void emit_geojson(const std::vector<PoiPolygon>& polys,
                         const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write geojson file: " + path);
    out << polygons_to_geojson(polys);
}

/// Reads Polygon features back into PoiPolygon records. Unknown properties
/// are ignored; missing ones default (poi_id from the feature index).
inline std::vector<PoiPolygon> load_polygons(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open geojson file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed geojson in " + path + ": " +
                                 e.what());
    }
    if (j.value("type", "") != "FeatureCollection" || !j.contains("features"))
        throw std::runtime_error(path + ": not a FeatureCollection");

    std::vector<PoiPolygon> out;
    size_t idx = 0;
    for (const auto& feature : j["features"]) {
        const auto& geom = feature.at("geometry");
        ++idx;
        if (geom.value("type", "") != "Polygon") continue;
        PoiPolygon poly;
        const auto& rings = geom.at("coordinates");
        if (rings.empty())
            throw std::runtime_error(path + ": polygon without rings");
        for (const auto& pt : rings[0]) {
            if (!pt.is_array() || pt.size() < 2)
                throw std::runtime_error(path + ": bad coordinate pair");
            poly.ring.push_back(
                {pt[1].get<double>(), pt[0].get<double>()});
        }
        if (poly.ring.size() >= 2 && !(poly.ring.front() == poly.ring.back()))
            poly.ring.push_back(poly.ring.front());
        poly.poi_id = "poly_" + std::to_string(idx - 1);
        if (feature.contains("properties") &&
            feature["properties"].is_object()) {
            const auto& props = feature["properties"];
            poly.poi_id = props.value("poi_id", poly.poi_id);
            if (props.contains("names"))
                for (const auto& n : props["names"])
                    poly.names.push_back(n.get<std::string>());
            poly.member_count = props.value("member_count", 0);
            if (props.contains("stage"))
                poly.stage = stage_from_string(props["stage"].get<std::string>());
        }
        out.push_back(std::move(poly));
    }
    return out;
}

}  // namespace poiforge
