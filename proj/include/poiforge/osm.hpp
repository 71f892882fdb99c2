#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "poiforge/config.hpp"
#include "poiforge/geo.hpp"
#include "poiforge/geojson.hpp"
#include "poiforge/geometry.hpp"
#include "poiforge/types.hpp"

namespace poiforge {

enum class RoadClass { private_road, public_road, unknown };

inline const char* to_string(RoadClass c) {
    switch (c) {
        case RoadClass::private_road: return "private";
        case RoadClass::public_road: return "public";
        case RoadClass::unknown: return "unknown";
    }
    return "?";
}

inline RoadClass classify_highway(const std::string& tag) {
    static const std::unordered_set<std::string> kPrivate = {
        "service", "unclassified", "footway", "tertiary",
        "path",    "pedestrian",   "track"};
    static const std::unordered_set<std::string> kPublic = {
        "primary",      "secondary",      "trunk",      "motorway",
        "primary_link", "secondary_link", "trunk_link", "motorway_link",
        "raceway",      "bridleway",      "escape",     "bus_guideway"};
    if (kPrivate.count(tag)) return RoadClass::private_road;
    if (kPublic.count(tag)) return RoadClass::public_road;
    return RoadClass::unknown;
}

struct OsmBuilding {
    std::string id;
    std::vector<LatLng> ring;  // closed, repaired on load if needed
};

struct OsmRoad {
    std::string id;
    std::vector<LatLng> line;
    std::string highway;
    bool circular = false;
    RoadClass road_class = RoadClass::unknown;
};

struct OsmLayer {
    std::vector<OsmBuilding> buildings;
    std::vector<OsmRoad> roads;
    size_t skipped = 0;  // features without usable geometry
};

namespace detail {

inline std::vector<LatLng> parse_coord_ring(const nlohmann::json& coords) {
    std::vector<LatLng> ring;
    for (const auto& pair : coords) {
        if (!pair.is_array() || pair.size() < 2)
            throw std::runtime_error("malformed coordinate pair");
        ring.push_back(LatLng{pair[1].get<double>(), pair[0].get<double>()});
    }
    return ring;
}

inline std::string feature_id(const nlohmann::json& feature, const char* prefix,
                              size_t ordinal) {
    if (feature.contains("id")) {
        const auto& id = feature.at("id");
        if (id.is_string()) return id.get<std::string>();
        if (id.is_number_integer())
            return std::to_string(id.get<long long>());
    }
    if (feature.contains("properties") && feature.at("properties").is_object()) {
        const auto& props = feature.at("properties");
        if (props.contains("id") && props.at("id").is_string())
            return props.at("id").get<std::string>();
    }
    return std::string(prefix) + std::to_string(ordinal);
}

}  // namespace detail

/// Reads a GeoJSON extract: Polygon features become buildings (exterior
/// ring only; invalid rings replaced by the α-shape of their vertices),
/// LineString features with a highway property become classified roads.
/// Anything else bumps the skipped counter.
inline OsmLayer load_osm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open OSM file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("malformed OSM GeoJSON: ") +
                                 e.what());
    }
    if (!j.contains("features") || !j.at("features").is_array() ||
        j.at("features").empty())
        throw std::runtime_error("OSM file has no features: " + path);

    OsmLayer layer;
    size_t ordinal = 0;
    for (const auto& feature : j.at("features")) {
        ++ordinal;
        if (!feature.contains("geometry") || feature.at("geometry").is_null()) {
            ++layer.skipped;
            continue;
        }
        const auto& geom = feature.at("geometry");
        std::string type = geom.value("type", "");
        try {
            if (type == "Polygon") {
                std::vector<LatLng> ring =
                    detail::parse_coord_ring(geom.at("coordinates").at(0));
                if (ring.size() >= 2 && !(ring.front() == ring.back()))
                    ring.push_back(ring.front());
                if (!validate_polygon(ring)) {
                    auto repaired = alpha_shape(ring);
                    if (!repaired) {
                        ++layer.skipped;
                        continue;
                    }
                    ring = *repaired;
                }
                layer.buildings.push_back(
                    {detail::feature_id(feature, "building_", ordinal),
                     std::move(ring)});
            } else if (type == "LineString") {
                if (!feature.contains("properties") ||
                    !feature.at("properties").is_object() ||
                    !feature.at("properties").contains("highway")) {
                    ++layer.skipped;
                    continue;
                }
                OsmRoad road;
                road.id = detail::feature_id(feature, "road_", ordinal);
                road.line = detail::parse_coord_ring(geom.at("coordinates"));
                if (road.line.size() < 2) {
                    ++layer.skipped;
                    continue;
                }
                road.highway =
                    feature.at("properties").at("highway").get<std::string>();
                road.road_class = classify_highway(road.highway);
                road.circular =
                    std::abs(road.line.front().lat - road.line.back().lat) <
                        1e-9 &&
                    std::abs(road.line.front().lng - road.line.back().lng) <
                        1e-9;
                layer.roads.push_back(std::move(road));
            } else {
                ++layer.skipped;
            }
        } catch (const nlohmann::json::exception&) {
            ++layer.skipped;
        }
    }
    return layer;
}

/// Canonical GeoJSON emission, the inverse of load_osm: buildings first,
/// then roads, one feature per line, 9-decimal fixed coordinates.
inline void save_osm(const OsmLayer& layer, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write OSM file: " + path);
    out << "{\"type\":\"FeatureCollection\",\"features\":[";
    bool first = true;
    auto sep = [&]() {
        out << (first ? "\n" : ",\n");
        first = false;
    };
    for (const OsmBuilding& b : layer.buildings) {
        sep();
        out << "{\"type\":\"Feature\",\"properties\":{\"id\":"
            << detail::json_string(b.id)
            << ",\"building\":\"yes\"},\"geometry\":{\"type\":\"Polygon\","
               "\"coordinates\":[[";
        for (size_t k = 0; k < b.ring.size(); ++k) {
            if (k) out << ",";
            out << detail::coord_pair(b.ring[k]);
        }
        out << "]]}}";
    }
    for (const OsmRoad& r : layer.roads) {
        sep();
        out << "{\"type\":\"Feature\",\"properties\":{\"id\":"
            << detail::json_string(r.id)
            << ",\"highway\":" << detail::json_string(r.highway)
            << "},\"geometry\":{\"type\":\"LineString\",\"coordinates\":[";
        for (size_t k = 0; k < r.line.size(); ++k) {
            if (k) out << ",";
            out << detail::coord_pair(r.line[k]);
        }
        out << "]}}";
    }
    out << (first ? "]}" : "\n]}") << "\n";
}

namespace detail {

inline bool polyline_intersects_ring(const std::vector<LatLng>& line,
                                     const std::vector<LatLng>& ring) {
    for (const LatLng& p : line)
        if (point_in_ring(ring, p)) return true;
    for (size_t i = 0; i + 1 < line.size(); ++i) {
        XY p{line[i].lng, line[i].lat};
        XY q{line[i + 1].lng, line[i + 1].lat};
        for (size_t k = 0; k + 1 < ring.size(); ++k) {
            XY r{ring[k].lng, ring[k].lat};
            XY s{ring[k + 1].lng, ring[k + 1].lat};
            if (segments_intersect(p, q, r, s)) return true;
        }
    }
    return false;
}

inline double polyline_length_m(const std::vector<LatLng>& line) {
    double len = 0.0;
    for (size_t i = 0; i + 1 < line.size(); ++i)
        len += distance_m(line[i], line[i + 1]);
    return len;
}

/// Thin corridor around a polyline (rectangles per segment, 16-gons per
/// vertex) used to cut polygons along roads.
inline std::vector<LatLng> polyline_corridor(const std::vector<XY>& pts,
                                             double r,
                                             const LocalProjection& proj) {
    const double pi = std::acos(-1.0);
    const double circum = r / std::cos(pi / 16.0);
    std::vector<BgPolygon> pieces;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const XY& p = pts[i];
        const XY& q = pts[i + 1];
        double dx = q.x - p.x, dy = q.y - p.y;
        double len = std::hypot(dx, dy);
        if (len > 1e-12) {
            double nx = -dy / len * r, ny = dx / len * r;
            BgPolygon quad;
            bg::append(quad.outer(), BgPoint(p.x + nx, p.y + ny));
            bg::append(quad.outer(), BgPoint(q.x + nx, q.y + ny));
            bg::append(quad.outer(), BgPoint(q.x - nx, q.y - ny));
            bg::append(quad.outer(), BgPoint(p.x - nx, p.y - ny));
            bg::correct(quad);
            pieces.push_back(std::move(quad));
        }
    }
    for (const XY& p : pts) {
        BgPolygon disc;
        for (int k = 0; k < 16; ++k) {
            double th = (2.0 * k + 1.0) * pi / 16.0;
            bg::append(disc.outer(), BgPoint(p.x + circum * std::cos(th),
                                             p.y + circum * std::sin(th)));
        }
        bg::correct(disc);
        pieces.push_back(std::move(disc));
    }
    BgMulti acc;
    acc.push_back(pieces[0]);
    for (size_t i = 1; i < pieces.size(); ++i) {
        BgMulti next;
        bg::union_(acc, pieces[i], next);
        acc = std::move(next);
    }
    auto ring = largest_part(acc, proj);
    if (!ring) throw std::runtime_error("degenerate road corridor");
    return *ring;
}

}  // namespace detail

/// Building attachment: union the polygon with every intersecting building
/// footprint, the footprint union buffered outward first to cover the
/// private space immediately around the walls.
inline std::vector<LatLng> attach_buildings(const std::vector<LatLng>& poly,
                                            const OsmLayer& layer,
                                            double buffer_m) {
    LocalProjection proj(ring_centroid(poly));
    BgMulti footprint;
    bool any = false;
    for (const OsmBuilding& b : layer.buildings) {
        OverlapStats s = overlap_stats(poly, b.ring);
        if (s.intersection <= 0.0) continue;
        BgMulti next;
        bg::union_(footprint, to_planar(b.ring, proj), next);
        footprint = std::move(next);
        any = true;
    }
    if (!any) return poly;

    std::vector<LatLng> out = poly;
    for (const BgPolygon& part : footprint) {
        std::vector<LatLng> ring = from_planar(part, proj);
        if (!validate_polygon(ring)) {
            auto repaired = alpha_shape(ring);
            if (!repaired) continue;
            ring = *repaired;
        }
        out = polygon_union(out, polygon_buffer(ring, buffer_m));
    }
    return out;
}

enum class CorrectionBranch {
    replace,
    union_with,
    intersect,
    subtract,
    prune,
    skip
};

inline const char* to_string(CorrectionBranch b) {
    switch (b) {
        case CorrectionBranch::replace: return "replace";
        case CorrectionBranch::union_with: return "union";
        case CorrectionBranch::intersect: return "intersection";
        case CorrectionBranch::subtract: return "difference";
        case CorrectionBranch::prune: return "prune";
        case CorrectionBranch::skip: return "skip";
    }
    return "?";
}

struct CorrectionStep {
    std::string road_id;
    CorrectionBranch branch = CorrectionBranch::skip;
};

/// Road pruning: cut the polygon along intersecting non-circular roads that
/// are public or long relative to the polygon diameter, keeping the largest
/// piece each time. Roads are processed in descending length order; the
/// diameter d is fixed at entry.
inline std::vector<LatLng> prune_polygon_via_highway(
    const std::vector<LatLng>& poly, const OsmLayer& layer,
    const PipelineConfig& cfg, std::vector<CorrectionStep>* trace = nullptr) {
    LocalProjection proj(ring_centroid(poly));
    double d = 0.0;
    std::vector<LatLng> verts = detail::ring_vertices_open(poly);
    for (size_t i = 0; i < verts.size(); ++i)
        for (size_t j = i + 1; j < verts.size(); ++j)
            d = std::max(d, distance_m(verts[i], verts[j]));

    std::vector<const OsmRoad*> roads;
    for (const OsmRoad& r : layer.roads) {
        if (r.circular) continue;
        if (detail::polyline_intersects_ring(r.line, poly))
            roads.push_back(&r);
    }
    std::stable_sort(roads.begin(), roads.end(),
                     [](const OsmRoad* a, const OsmRoad* b) {
                         return detail::polyline_length_m(a->line) >
                                detail::polyline_length_m(b->line);
                     });

    std::vector<LatLng> out = poly;
    for (const OsmRoad* road : roads) {
        double len = detail::polyline_length_m(road->line);
        bool cuts = road->road_class == RoadClass::public_road ||
                    len >= cfg.alg1_length_factor * d;
        if (!cuts) {
            if (trace) trace->push_back({road->id, CorrectionBranch::skip});
            continue;
        }
        if (trace) trace->push_back({road->id, CorrectionBranch::prune});

        // extend the terminal segments so clipped extracts still cross
        std::vector<XY> pts;
        for (const LatLng& p : road->line) pts.push_back(proj.forward(p));
        const double ext = d + 10.0;
        if (pts.size() >= 2) {
            XY a = pts[0], b = pts[1];
            double lab = std::hypot(b.x - a.x, b.y - a.y);
            if (lab > 1e-12)
                pts[0] = XY{a.x - (b.x - a.x) / lab * ext,
                            a.y - (b.y - a.y) / lab * ext};
            XY y = pts[pts.size() - 2], z = pts.back();
            double lyz = std::hypot(z.x - y.x, z.y - y.y);
            if (lyz > 1e-12)
                pts.back() = XY{z.x + (z.x - y.x) / lyz * ext,
                                z.y + (z.y - y.y) / lyz * ext};
        }
        std::vector<LatLng> corridor =
            detail::polyline_corridor(pts, 0.01, proj);
        auto cut = polygon_difference(out, corridor);
        if (cut) out = *cut;
    }
    return out;
}

struct RoadPolygon {
    std::vector<LatLng> ring;
    RoadClass road_class = RoadClass::unknown;
    std::string source_id;  // first contributing road
};

/// Already-closed roads polygonize directly; open roads are stitched
/// endpoint-to-endpoint (1 m snap) and contribute a polygon when a degree-2
/// component closes into a single loop. Mixed-class loops come out unknown.
inline std::vector<RoadPolygon> polygonize_roads(
    const std::vector<OsmRoad>& roads) {
    std::vector<RoadPolygon> out;

    auto emit = [&](std::vector<LatLng> ring, RoadClass cls,
                    const std::string& id) {
        if (ring.size() >= 2 && !(ring.front() == ring.back()))
            ring.push_back(ring.front());
        if (!validate_polygon(ring)) {
            auto repaired = alpha_shape(ring);
            if (!repaired) return;
            ring = *repaired;
        }
        out.push_back({std::move(ring), cls, id});
    };

    std::vector<const OsmRoad*> open;
    for (const OsmRoad& r : roads) {
        if (r.circular)
            emit(r.line, r.road_class, r.id);
        else
            open.push_back(&r);
    }

    // endpoint graph over the open roads
    std::vector<LatLng> nodes;
    auto node_of = [&](const LatLng& p) {
        for (size_t i = 0; i < nodes.size(); ++i)
            if (distance_m(nodes[i], p) <= 1.0) return i;
        nodes.push_back(p);
        return nodes.size() - 1;
    };
    struct End {
        size_t road;
        bool at_front;
    };
    std::vector<std::pair<size_t, size_t>> road_nodes(open.size());
    std::vector<std::vector<End>> at_node;
    for (size_t i = 0; i < open.size(); ++i) {
        size_t a = node_of(open[i]->line.front());
        size_t b = node_of(open[i]->line.back());
        road_nodes[i] = {a, b};
        at_node.resize(nodes.size());
        at_node[a].push_back({i, true});
        at_node[b].push_back({i, false});
    }

    std::vector<bool> used(open.size(), false);
    for (size_t start = 0; start < open.size(); ++start) {
        if (used[start]) continue;
        // walk from this road; every junction must join exactly two ends
        std::vector<std::pair<size_t, bool>> path;  // (road, forward)
        size_t start_node = road_nodes[start].first;
        size_t cur_road = start;
        bool forward = true;
        size_t cur_node = road_nodes[start].second;
        path.push_back({start, true});
        bool closed = false;
        while (true) {
            if (cur_node == start_node) {
                closed = true;
                break;
            }
            if (at_node[cur_node].size() != 2) break;
            const End& a = at_node[cur_node][0];
            const End& b = at_node[cur_node][1];
            if (a.road == b.road) break;  // both ends of one road; dead end
            const End& next = (a.road == cur_road) ? b : a;
            if (used[next.road] || next.road == cur_road) break;
            bool next_forward = next.at_front;
            path.push_back({next.road, next_forward});
            cur_road = next.road;
            cur_node = next_forward ? road_nodes[next.road].second
                                    : road_nodes[next.road].first;
            if (path.size() > open.size()) break;
        }
        if (!closed) continue;
        bool clean = true;
        std::vector<LatLng> ring;
        RoadClass cls = open[path[0].first]->road_class;
        for (const auto& [idx, fwd] : path) {
            if (used[idx]) {
                clean = false;
                break;
            }
            used[idx] = true;
            if (open[idx]->road_class != cls) cls = RoadClass::unknown;
            std::vector<LatLng> seg = open[idx]->line;
            if (!fwd) std::reverse(seg.begin(), seg.end());
            size_t from = ring.empty() ? 0 : 1;  // junction point shared
            for (size_t k = from; k < seg.size(); ++k) ring.push_back(seg[k]);
        }
        if (clean && ring.size() >= 3)
            emit(std::move(ring), cls, open[path[0].first]->id);
    }
    return out;
}

/// Circular-road correction ladder. Road polygons are the ones intersecting
/// the polygon at entry, visited in descending area order; the working
/// polygon updates between iterations. Every visit is traced.
inline std::vector<LatLng> correct_polygon_via_highway(
    const std::vector<LatLng>& poly, const OsmLayer& layer,
    const PipelineConfig& cfg, std::vector<CorrectionStep>* trace = nullptr) {
    std::vector<RoadPolygon> candidates = polygonize_roads(layer.roads);
    std::vector<std::pair<double, size_t>> order;
    for (size_t i = 0; i < candidates.size(); ++i) {
        OverlapStats s = overlap_stats(poly, candidates[i].ring);
        if (s.intersection > 0.0)
            order.push_back({ring_area_m2(candidates[i].ring), i});
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) {
                         return a.first > b.first;
                     });

    std::vector<LatLng> out = poly;
    for (const auto& [rp_area, idx] : order) {
        const RoadPolygon& rp = candidates[idx];
        double poly_area = ring_area_m2(out);
        OverlapStats s = overlap_stats(out, rp.ring);
        bool contains_poly = s.intersection >= poly_area * (1.0 - 1e-9);
        CorrectionBranch branch = CorrectionBranch::skip;

        if (contains_poly && rp.road_class == RoadClass::private_road &&
            rp_area <= cfg.alg2_encompass_area_factor * poly_area *
                           (1.0 + 1e-9)) {
            out = rp.ring;
            branch = CorrectionBranch::replace;
        } else if (rp.road_class == RoadClass::private_road &&
                   s.intersection + 1e-9 >=
                       cfg.alg2_private_overlap * poly_area) {
            out = polygon_union(out, rp.ring);
            branch = CorrectionBranch::union_with;
        } else if (rp.road_class == RoadClass::public_road) {
            if (s.intersection + 1e-9 >=
                cfg.alg2_public_overlap * poly_area) {
                if (auto r = polygon_intersection(out, rp.ring)) {
                    out = *r;
                    branch = CorrectionBranch::intersect;
                }
            } else {
                if (auto r = polygon_difference(out, rp.ring)) {
                    out = *r;
                    branch = CorrectionBranch::subtract;
                }
            }
        }
        if (trace) trace->push_back({rp.source_id, branch});
    }
    return out;
}

/// The full corrector. Stage order comes from config so a sensitivity
/// study can permute it; the default runs buildings, then circular-road
/// correction, then public-road pruning.
inline PoiPolygon correct(const PoiPolygon& poly, const OsmLayer& layer,
                          const PipelineConfig& cfg,
                          std::vector<CorrectionStep>* trace = nullptr) {
    PoiPolygon out = poly;
    std::stringstream stages(cfg.osm_stage_order);
    std::string stage;
    while (std::getline(stages, stage, ',')) {
        if (stage == "buildings")
            out.ring = attach_buildings(out.ring, layer, cfg.osm_buffer_m);
        else if (stage == "circular")
            out.ring = correct_polygon_via_highway(out.ring, layer, cfg, trace);
        else if (stage == "prune")
            out.ring = prune_polygon_via_highway(out.ring, layer, cfg, trace);
        else
            throw std::runtime_error("unknown osm_stage_order stage: " + stage);
    }
    out.stage = PolygonStage::osm_corrected;
    return out;
}

}  // namespace poiforge
