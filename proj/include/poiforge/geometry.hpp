#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "poiforge/geo.hpp"
#include "poiforge/types.hpp"

namespace poiforge {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, false, true>;  // ccw, closed
using BgMulti = bg::model::multi_polygon<BgPolygon>;

inline LatLng ring_centroid(const std::vector<LatLng>& ring) {
    std::vector<LatLng> open(ring.begin(),
                             ring.size() > 1 && ring.front() == ring.back()
                                 ? ring.end() - 1
                                 : ring.end());
    return centroid_of(open);
}

inline BgPolygon to_planar(const std::vector<LatLng>& ring,
                           const LocalProjection& proj) {
    BgPolygon poly;
    for (const LatLng& p : ring) {
        XY q = proj.forward(p);
        bg::append(poly.outer(), BgPoint(q.x, q.y));
    }
    bg::correct(poly);
    return poly;
}

/// Exterior ring back to lat/lng, consecutive duplicates dropped, closed.
/// Interior rings (holes) are intentionally ignored throughout.
inline std::vector<LatLng> from_planar(const BgPolygon& poly,
                                       const LocalProjection& proj) {
    std::vector<LatLng> ring;
    for (const BgPoint& p : poly.outer()) {
        LatLng q = proj.inverse(XY{bg::get<0>(p), bg::get<1>(p)});
        if (!ring.empty() && std::abs(q.lat - ring.back().lat) < 1e-12 &&
            std::abs(q.lng - ring.back().lng) < 1e-12)
            continue;
        ring.push_back(q);
    }
    if (ring.size() >= 3 && !(ring.front() == ring.back()))
        ring.push_back(ring.front());
    return ring;
}

/// Monotone-chain convex hull over lat/lng. Collinear boundary points are
/// dropped, so the hull is strictly convex. Returns nothing when the input
/// spans fewer than 3 non-collinear positions. The ring is CCW and closed.
inline std::optional<std::vector<LatLng>> convex_hull(
    std::vector<LatLng> pts) {
    std::sort(pts.begin(), pts.end(), [](const LatLng& a, const LatLng& b) {
        if (a.lng != b.lng) return a.lng < b.lng;
        return a.lat < b.lat;
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const LatLng& a, const LatLng& b) {
                              return a.lat == b.lat && a.lng == b.lng;
                          }),
              pts.end());
    const size_t n = pts.size();
    if (n < 3) return std::nullopt;

    auto cross = [](const LatLng& o, const LatLng& a, const LatLng& b) {
        return (a.lng - o.lng) * (b.lat - o.lat) -
               (a.lat - o.lat) * (b.lng - o.lng);
    };
    std::vector<LatLng> h(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (size_t i = n - 1, lo = k + 1; i-- > 0;) {
        while (k >= lo && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    if (h.size() < 3) return std::nullopt;
    h.push_back(h.front());
    return h;
}

/// Ray-cast point-in-polygon over a closed lat/lng ring; boundary points
/// count as inside.
inline bool point_in_ring(const std::vector<LatLng>& ring, const LatLng& p) {
    bool inside = false;
    const XY q{p.lng, p.lat};
    for (size_t i = 0; i + 1 < ring.size(); ++i) {
        const XY a{ring[i].lng, ring[i].lat};
        const XY b{ring[i + 1].lng, ring[i + 1].lat};
        if (detail::cross(a, b, q) == 0.0 && detail::on_segment(a, q, b))
            return true;
        bool crosses = (a.y > q.y) != (b.y > q.y);
        if (crosses) {
            double x = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (x > q.x) inside = !inside;
        }
    }
    return inside;
}

struct OverlapStats {
    double area_a = 0.0;
    double area_b = 0.0;
    double intersection = 0.0;
};

/// Areas and intersection area in m², both polygons projected at the
/// midpoint of their centroids so the call is symmetric in (a, b).
inline OverlapStats overlap_stats(const std::vector<LatLng>& a,
                                  const std::vector<LatLng>& b) {
    LatLng ca = ring_centroid(a), cb = ring_centroid(b);
    LocalProjection proj(LatLng{(ca.lat + cb.lat) / 2.0,
                                (ca.lng + cb.lng) / 2.0});
    BgPolygon pa = to_planar(a, proj), pb = to_planar(b, proj);
    OverlapStats s;
    s.area_a = bg::area(pa);
    s.area_b = bg::area(pb);
    BgMulti inter;
    bg::intersection(pa, pb, inter);
    s.intersection = bg::area(inter);
    double cap = std::min(s.area_a, s.area_b);
    if (s.intersection > cap) s.intersection = cap;  // clipping dust
    if (s.intersection < 0.0) s.intersection = 0.0;
    return s;
}

namespace detail {

inline std::vector<LatLng> ring_vertices_open(const std::vector<LatLng>& ring) {
    if (ring.size() > 1 && ring.front() == ring.back())
        return std::vector<LatLng>(ring.begin(), ring.end() - 1);
    return ring;
}

inline double planar_ring_area(const std::vector<XY>& ring) {
    double s = 0.0;
    for (size_t i = 0; i + 1 < ring.size(); ++i)
        s += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
    return s / 2.0;
}

inline std::optional<std::vector<LatLng>> largest_part(
    const BgMulti& multi, const LocalProjection& proj) {
    const BgPolygon* best = nullptr;
    double best_area = 0.0;
    for (const BgPolygon& p : multi) {
        double a = bg::area(p);
        if (a > best_area) {
            best_area = a;
            best = &p;
        }
    }
    if (!best || best_area <= 1e-9) return std::nullopt;
    std::vector<LatLng> ring = from_planar(*best, proj);
    if (validate_polygon(ring)) return ring;
    // clipping can leave a self-touching sliver; retreat to the hull
    return convex_hull(ring_vertices_open(ring));
}

}  // namespace detail

/// Union of two rings. A single-part result keeps its exterior ring; a
/// multipart or degenerate result falls back to the convex hull of all
/// input vertices (the pipeline's polygons are hulls anyway).
inline std::vector<LatLng> polygon_union(const std::vector<LatLng>& a,
                                         const std::vector<LatLng>& b) {
    LocalProjection proj(ring_centroid(a));
    BgMulti result;
    bg::union_(to_planar(a, proj), to_planar(b, proj), result);
    if (result.size() == 1) {
        std::vector<LatLng> ring = from_planar(result.front(), proj);
        if (validate_polygon(ring)) return ring;
    }
    std::vector<LatLng> verts = detail::ring_vertices_open(a);
    for (const LatLng& p : detail::ring_vertices_open(b)) verts.push_back(p);
    auto hull = convex_hull(std::move(verts));
    if (!hull) throw std::runtime_error("polygon_union: degenerate inputs");
    return *hull;
}

/// a minus b; the largest remaining part, or nothing when b swallows a.
inline std::optional<std::vector<LatLng>> polygon_difference(
    const std::vector<LatLng>& a, const std::vector<LatLng>& b) {
    LocalProjection proj(ring_centroid(a));
    BgMulti result;
    bg::difference(to_planar(a, proj), to_planar(b, proj), result);
    if (result.empty()) return std::nullopt;
    return detail::largest_part(result, proj);
}

/// a intersect b; the largest part, or nothing when disjoint.
inline std::optional<std::vector<LatLng>> polygon_intersection(
    const std::vector<LatLng>& a, const std::vector<LatLng>& b) {
    LocalProjection proj(ring_centroid(a));
    BgMulti result;
    bg::intersection(to_planar(a, proj), to_planar(b, proj), result);
    if (result.empty()) return std::nullopt;
    return detail::largest_part(result, proj);
}

/// Minkowski sum with a circumscribed regular 16-gon of apothem r_m: the
/// ring unioned with a rectangle per edge and a 16-gon per vertex. The
/// apothem convention means the result contains the true r_m disc buffer.
inline std::vector<LatLng> polygon_buffer(const std::vector<LatLng>& ring,
                                          double r_m) {
    if (!(r_m > 0.0))
        throw std::invalid_argument("polygon_buffer: radius must be > 0");
    LocalProjection proj(ring_centroid(ring));
    std::vector<XY> pts;
    for (const LatLng& p : detail::ring_vertices_open(ring))
        pts.push_back(proj.forward(p));

    const double pi = std::acos(-1.0);
    const double circum = r_m / std::cos(pi / 16.0);

    std::vector<BgPolygon> pieces;
    pieces.push_back(to_planar(ring, proj));
    for (size_t i = 0; i < pts.size(); ++i) {
        const XY& p = pts[i];
        const XY& q = pts[(i + 1) % pts.size()];
        double dx = q.x - p.x, dy = q.y - p.y;
        double len = std::hypot(dx, dy);
        if (len > 1e-12) {
            double nx = -dy / len * r_m, ny = dx / len * r_m;
            BgPolygon quad;
            bg::append(quad.outer(), BgPoint(p.x + nx, p.y + ny));
            bg::append(quad.outer(), BgPoint(q.x + nx, q.y + ny));
            bg::append(quad.outer(), BgPoint(q.x - nx, q.y - ny));
            bg::append(quad.outer(), BgPoint(p.x - nx, p.y - ny));
            bg::correct(quad);
            pieces.push_back(std::move(quad));
        }
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
    auto out = detail::largest_part(acc, proj);
    if (!out) throw std::runtime_error("polygon_buffer: degenerate result");
    return *out;
}

namespace detail {

struct DelaunayTri {
    int a, b, c;
    XY cc;      // circumcenter
    double r2;  // squared circumradius
};

inline std::optional<DelaunayTri> make_tri(const std::vector<XY>& pts, int a,
                                           int b, int c) {
    const XY &A = pts[a], &B = pts[b], &C = pts[c];
    double d = 2.0 * (A.x * (B.y - C.y) + B.x * (C.y - A.y) +
                      C.x * (A.y - B.y));
    if (std::abs(d) < 1e-12) return std::nullopt;  // collinear
    double a2 = A.x * A.x + A.y * A.y;
    double b2 = B.x * B.x + B.y * B.y;
    double c2 = C.x * C.x + C.y * C.y;
    XY cc{(a2 * (B.y - C.y) + b2 * (C.y - A.y) + c2 * (A.y - B.y)) / d,
          (a2 * (C.x - B.x) + b2 * (A.x - C.x) + c2 * (B.x - A.x)) / d};
    double dx = A.x - cc.x, dy = A.y - cc.y;
    return DelaunayTri{a, b, c, cc, dx * dx + dy * dy};
}

/// Bowyer-Watson over the point list; returns triangles by point index.
inline std::vector<DelaunayTri> delaunay(const std::vector<XY>& input) {
    std::vector<XY> pts = input;
    double xmin = pts[0].x, xmax = xmin, ymin = pts[0].y, ymax = ymin;
    for (const XY& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    double cx = (xmin + xmax) / 2.0, cy = (ymin + ymax) / 2.0;
    double h = std::max({xmax - xmin, ymax - ymin, 1.0});
    const int s0 = static_cast<int>(pts.size());
    pts.push_back(XY{cx - 30.0 * h, cy - 15.0 * h});
    pts.push_back(XY{cx + 30.0 * h, cy - 15.0 * h});
    pts.push_back(XY{cx, cy + 30.0 * h});

    std::vector<DelaunayTri> tris;
    if (auto t = make_tri(pts, s0, s0 + 1, s0 + 2)) tris.push_back(*t);

    for (int p = 0; p < s0; ++p) {
        std::vector<DelaunayTri> keep;
        std::map<std::pair<int, int>, int> edge_count;
        for (const DelaunayTri& t : tris) {
            double dx = pts[p].x - t.cc.x, dy = pts[p].y - t.cc.y;
            if (dx * dx + dy * dy <= t.r2 * (1.0 + 1e-12)) {
                auto add = [&](int u, int v) {
                    ++edge_count[{std::min(u, v), std::max(u, v)}];
                };
                add(t.a, t.b);
                add(t.b, t.c);
                add(t.c, t.a);
            } else {
                keep.push_back(t);
            }
        }
        for (const auto& [edge, count] : edge_count) {
            if (count != 1) continue;  // interior edge of the cavity
            if (auto t = make_tri(pts, edge.first, edge.second, p))
                keep.push_back(*t);
        }
        tris = std::move(keep);
    }

    std::vector<DelaunayTri> out;
    for (const DelaunayTri& t : tris)
        if (t.a < s0 && t.b < s0 && t.c < s0) out.push_back(t);
    return out;
}

/// Boundary of a triangle subset: edges used exactly once, walked into a
/// single cycle. Returns empty when the boundary is not one simple cycle.
inline std::vector<int> boundary_cycle(const std::vector<DelaunayTri>& tris) {
    std::map<std::pair<int, int>, int> edge_count;
    for (const DelaunayTri& t : tris) {
        auto add = [&](int u, int v) {
            ++edge_count[{std::min(u, v), std::max(u, v)}];
        };
        add(t.a, t.b);
        add(t.b, t.c);
        add(t.c, t.a);
    }
    std::map<int, std::vector<int>> adj;
    size_t n_edges = 0;
    for (const auto& [edge, count] : edge_count) {
        if (count != 1) continue;
        adj[edge.first].push_back(edge.second);
        adj[edge.second].push_back(edge.first);
        ++n_edges;
    }
    if (adj.empty()) return {};
    for (const auto& [v, nb] : adj)
        if (nb.size() != 2) return {};

    std::vector<int> cycle;
    int start = adj.begin()->first;
    int prev = -1, cur = start;
    do {
        cycle.push_back(cur);
        const auto& nb = adj[cur];
        int next = (nb[0] == prev) ? nb[1] : nb[0];
        prev = cur;
        cur = next;
        if (cycle.size() > n_edges) return {};
    } while (cur != start);
    if (cycle.size() != n_edges) return {};  // disconnected boundary
    return cycle;
}

}  // namespace detail

/// Tightest member of the α-shape family that is a single simple polygon
/// containing every input point: sweep candidate radii ascending, keep the
/// first triangle subset whose boundary is one simple cycle touching all
/// points. Falls back to the convex hull (α → ∞).
inline std::optional<std::vector<LatLng>> alpha_shape(
    const std::vector<LatLng>& input) {
    std::vector<LatLng> uniq;
    for (const LatLng& p : input) {
        bool dup = false;
        for (const LatLng& q : uniq)
            if (q.lat == p.lat && q.lng == p.lng) {
                dup = true;
                break;
            }
        if (!dup) uniq.push_back(p);
    }
    if (uniq.size() < 3) return std::nullopt;

    LocalProjection proj(centroid_of(uniq));
    std::vector<XY> pts;
    pts.reserve(uniq.size());
    for (const LatLng& p : uniq) pts.push_back(proj.forward(p));

    std::vector<detail::DelaunayTri> tris = detail::delaunay(pts);
    if (tris.empty()) return convex_hull(uniq);

    std::vector<double> radii;
    for (const auto& t : tris) radii.push_back(t.r2);
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    for (double r2 : radii) {
        std::vector<detail::DelaunayTri> kept;
        for (const auto& t : tris)
            if (t.r2 <= r2 * (1.0 + 1e-12)) kept.push_back(t);

        std::vector<bool> covered(pts.size(), false);
        for (const auto& t : kept)
            covered[t.a] = covered[t.b] = covered[t.c] = true;
        if (!std::all_of(covered.begin(), covered.end(),
                         [](bool v) { return v; }))
            continue;

        std::vector<int> cycle = detail::boundary_cycle(kept);
        if (cycle.empty()) continue;

        std::vector<XY> xy;
        for (int v : cycle) xy.push_back(pts[static_cast<size_t>(v)]);
        xy.push_back(xy.front());
        if (detail::planar_ring_area(xy) < 0.0)
            std::reverse(xy.begin(), xy.end());

        std::vector<LatLng> ring;
        for (const XY& p : xy) ring.push_back(proj.inverse(p));
        if (validate_polygon(ring)) return ring;
    }
    return convex_hull(uniq);
}

/// Drops polygons wholly contained in another (outermost survives chains).
/// Containment = intersection covering the polygon's own area to relative
/// 1e-9. Output keeps the input order of the survivors.
inline std::vector<PoiPolygon> discard_embedded(
    const std::vector<PoiPolygon>& polys) {
    const size_t n = polys.size();
    std::vector<double> area(n);
    for (size_t i = 0; i < n; ++i) area[i] = ring_area_m2(polys[i].ring);

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (area[a] != area[b]) return area[a] > area[b];
        return a < b;
    });

    std::vector<bool> kept(n, false);
    std::vector<size_t> kept_list;
    for (size_t i : order) {
        bool embedded = false;
        for (size_t j : kept_list) {
            // compare within one projection; area[] is for ordering only
            OverlapStats s = overlap_stats(polys[i].ring, polys[j].ring);
            if (s.intersection >= s.area_a * (1.0 - 1e-9)) {
                embedded = true;
                break;
            }
        }
        if (!embedded) {
            kept[i] = true;
            kept_list.push_back(i);
        }
    }

    std::vector<PoiPolygon> out;
    for (size_t i = 0; i < n; ++i)
        if (kept[i]) out.push_back(polys[i]);
    return out;
}

/// Graph merge of substantially intersecting polygons: edge when the
/// intersection covers overlap_threshold of the smaller polygon, DFS
/// components replaced by the hull of all component vertices.
inline std::vector<PoiPolygon> merge_substantial(
    const std::vector<PoiPolygon>& polys, double overlap_threshold) {
    const size_t n = polys.size();
    std::vector<std::vector<size_t>> adj(n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            OverlapStats s = overlap_stats(polys[i].ring, polys[j].ring);
            double smaller = std::min(s.area_a, s.area_b);
            if (s.intersection + 1e-12 >= overlap_threshold * smaller &&
                s.intersection > 0.0) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
        }

    std::vector<PoiPolygon> out;
    std::vector<bool> seen(n, false);
    for (size_t start = 0; start < n; ++start) {
        if (seen[start]) continue;
        std::vector<size_t> component;
        std::vector<size_t> stack = {start};
        seen[start] = true;
        while (!stack.empty()) {
            size_t u = stack.back();
            stack.pop_back();
            component.push_back(u);
            for (size_t v : adj[u])
                if (!seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
        }
        if (component.size() == 1) {
            out.push_back(polys[start]);
            continue;
        }
        std::sort(component.begin(), component.end());
        PoiPolygon merged;
        merged.poi_id = polys[component.front()].poi_id;
        merged.stage = PolygonStage::merged;
        std::vector<LatLng> verts;
        std::set<std::string> names;
        for (size_t u : component) {
            for (const LatLng& p : detail::ring_vertices_open(polys[u].ring))
                verts.push_back(p);
            for (const std::string& nm : polys[u].names) names.insert(nm);
            merged.member_count += polys[u].member_count;
        }
        auto hull = convex_hull(std::move(verts));
        if (!hull)
            throw std::runtime_error("merge_substantial: degenerate component");
        merged.ring = *hull;
        merged.names.assign(names.begin(), names.end());
        out.push_back(std::move(merged));
    }
    return out;
}

}  // namespace poiforge
