#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "poiforge/geo.hpp"
#include "poiforge/geometry.hpp"
#include "poiforge/osm.hpp"
#include "poiforge/text.hpp"
#include "poiforge/types.hpp"

namespace poiforge {

/// One synthetic city fits inside a single precision-5 geohash tile and
/// spans ~1 km, so the 5x5 partition grid lands one designed cell per PoI.
/// Four survey-pin addresses at the exact box corners fix the bin extent;
/// their corner cells are kept PoI-free so the pins land in sub-threshold
/// bins and never reach clustering.
struct SynthSpec {
    std::uint64_t seed = 7;
    int n_pois = 20;
    double poi_radius_m_min = 36.0;
    double poi_radius_m_max = 50.0;
    // drawn even so a 50/50 spelling mix splits with no remainder
    int addresses_per_poi_min = 90;
    int addresses_per_poi_max = 130;
    double gps_noise_sigma_m = 0.0;
    double spell_variant_rate = 0.0;
    double outlier_rate = 0.0;
    double leak_rate = 0.0;
    int towers_min = 1;
    int towers_max = 3;
    double tower_spread_m = 4.0;  // hard radius, keeps towers DBSCAN-tight
    double loop_scale = 1.08;     // private OSM loop vs gt ring, linear
    double building_half_m = 5.0;
    std::string city = "bengaluru";
    std::vector<std::string> poi_names;   // "tok1 tok2"; generated when empty
    std::vector<std::string> localities;  // generated when empty
    std::vector<std::string> fillers = {"flat", "no",   "house",
                                        "door", "floor", "block",
                                        "near", "gate",  "opp"};
};

struct PlantedPoi {
    std::string poi_id;
    std::string name;  // canonical spelling
    std::vector<LatLng> ring;
    LatLng center;
    std::vector<std::string> member_ids;  // sorted
};

struct SynthCity {
    std::vector<AddressRecord> addresses;
    std::vector<PlantedPoi> planted;
    std::vector<PoiPolygon> gt_polygons;
    OsmLayer osm;
    std::vector<std::string> locality_names;
    size_t n_outliers = 0;
};

namespace detail {

/// All randomness flows through raw engine draws so outputs are identical
/// across standard library implementations.
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : eng_(seed) {}

    double u01() { return (eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * u01(); }

    long long uniform_int(long long a, long long b) {
        return a + static_cast<long long>(
                       eng_() % static_cast<std::uint64_t>(b - a + 1));
    }

    double gauss(double sigma) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_ * sigma;
        }
        double u = 0.0;
        while (u <= 0.0) u = u01();
        double v = u01();
        double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(2.0 * std::numbers::pi * v);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * v) * sigma;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline const double kCityLatSw = 12.919921875 + 0.005;
inline const double kCityLngSw = 77.607421875 + 0.005;
inline const double kCitySpanDeg = 0.009;  // ~1 km, inside one geohash-5 tile

inline std::string make_token(SynthRng& rng, size_t len) {
    static const char* kSyllables[] = {"sha", "vel", "mor", "ind", "pra",
                                       "kal", "tha", "ran", "dev", "sur",
                                       "nag", "mal", "cha", "vin", "kor",
                                       "adi", "lur", "pet", "ban", "hos"};
    std::string tok;
    while (tok.size() < len)
        tok += kSyllables[rng.uniform_int(0, 19)];
    tok.resize(len);
    return tok;
}

/// Distinct tokens, pairwise edit distance >= 3 and disjoint from `avoid`,
/// so no two generated words ever trip a distance-1 match.
inline std::vector<std::string> make_lexicon(SynthRng& rng, size_t count,
                                             size_t len_min, size_t len_max,
                                             const std::set<std::string>& avoid) {
    std::vector<std::string> out;
    size_t attempts = 0;
    while (out.size() < count) {
        if (++attempts > count * 200)
            throw std::runtime_error("synth: lexicon generation stalled");
        std::string tok = make_token(
            rng, static_cast<size_t>(rng.uniform_int(
                     static_cast<long long>(len_min),
                     static_cast<long long>(len_max))));
        if (avoid.count(tok)) continue;
        bool ok = true;
        for (const std::string& prev : out)
            if (edit_distance(tok, prev) < 3) {
                ok = false;
                break;
            }
        if (ok) out.push_back(tok);
    }
    return out;
}

/// Radial distance from `center` to the ring boundary along direction
/// theta, in meters. The rings here are radial (built around the center),
/// so the outermost hit is the boundary.
inline double ring_radius_at(const std::vector<XY>& ring_xy, XY center,
                             double theta) {
    const double dx = std::cos(theta), dy = std::sin(theta);
    double best = 0.0;
    for (size_t i = 0; i < ring_xy.size(); ++i) {
        XY p = ring_xy[i], q = ring_xy[(i + 1) % ring_xy.size()];
        // solve center + t*(dx,dy) = p + s*(q-p)
        double ex = q.x - p.x, ey = q.y - p.y;
        double det = dx * ey - dy * ex;
        if (std::abs(det) < 1e-12) continue;
        double rx = p.x - center.x, ry = p.y - center.y;
        double t = (rx * ey - ry * ex) / det;
        double s = (rx * dy - ry * dx) / det;
        if (t > 0.0 && s >= 0.0 && s <= 1.0) best = std::max(best, t);
    }
    return best;
}

inline std::vector<LatLng> ring_from_xy(const std::vector<XY>& xy,
                                        const LocalProjection& proj) {
    std::vector<LatLng> ring;
    ring.reserve(xy.size() + 1);
    for (const XY& p : xy) ring.push_back(proj.inverse(p));
    ring.push_back(ring.front());
    return ring;
}

}  // namespace detail

/// Deterministic city: PoIs on a 5x5 cell grid (corners reserved for survey
/// pins), star-shaped ground-truth rings, members sampled per-tower with
/// truncated GPS noise, address texts templated from fillers + name +
/// locality + city + pincode, plus a matching OSM layer (private service
/// loop per PoI, public grid roads, one building per tower).
inline SynthCity generate_city(const SynthSpec& spec) {
    if (spec.n_pois < 1 || spec.n_pois > 21)
        throw std::runtime_error(
            "synth: n_pois must be in [1, 21] (21 non-corner grid cells)");
    for (double rate : {spec.spell_variant_rate, spec.outlier_rate,
                        spec.leak_rate})
        if (rate < 0.0 || rate > 1.0)
            throw std::runtime_error("synth: rates must be in [0, 1]");
    if (spec.poi_radius_m_min <= 0.0 ||
        spec.poi_radius_m_max < spec.poi_radius_m_min)
        throw std::runtime_error("synth: bad radius range");
    if (spec.addresses_per_poi_min < 2 ||
        spec.addresses_per_poi_max < spec.addresses_per_poi_min)
        throw std::runtime_error("synth: bad addresses_per_poi range");
    const double cell_m = detail::kCitySpanDeg / 5.0 * 111194.9;  // ~200 m
    if (spec.poi_radius_m_max * spec.loop_scale + 15.0 > cell_m / 2.0)
        throw std::runtime_error("synth: infeasible packing, radius too big");

    detail::SynthRng rng(spec.seed);
    SynthCity city;

    std::set<std::string> avoid(spec.fillers.begin(), spec.fillers.end());
    avoid.insert(spec.city);
    std::vector<std::string> names = spec.poi_names;
    if (names.empty()) {
        std::vector<std::string> toks = detail::make_lexicon(
            rng, static_cast<size_t>(spec.n_pois) * 2, 11, 13, avoid);
        for (int k = 0; k < spec.n_pois; ++k)
            names.push_back(toks[2 * k] + " " + toks[2 * k + 1]);
    }
    if (static_cast<int>(names.size()) < spec.n_pois)
        throw std::runtime_error("synth: not enough poi names");
    for (const std::string& n : names)
        for (const std::string& t : tokenize(n)) avoid.insert(t);

    city.locality_names = spec.localities;
    if (city.locality_names.empty())
        city.locality_names = detail::make_lexicon(rng, 24, 9, 11, avoid);
    std::vector<std::string> outlier_words =
        detail::make_lexicon(rng, 40, 9, 11, avoid);

    // grid cells, corners last so PoIs fill the 21 interior-edge cells
    std::vector<std::pair<int, int>> cells;
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c)
            if (!((r == 0 || r == 4) && (c == 0 || c == 4)))
                cells.push_back({r, c});

    const LatLng box_sw{detail::kCityLatSw, detail::kCityLngSw};
    auto cell_center = [&](int r, int c) {
        return LatLng{box_sw.lat + (r + 0.5) / 5.0 * detail::kCitySpanDeg,
                      box_sw.lng + (c + 0.5) / 5.0 * detail::kCitySpanDeg};
    };

    size_t next_id = 0;
    auto fresh_id = [&]() {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "a%06zu", next_id++);
        return std::string(buf);
    };

    auto compose_text = [&](const std::string& name_part,
                            const std::string& locality, int pincode) {
        // 3 distinct fillers, order fixed by draw sequence
        std::vector<std::string> picks;
        while (picks.size() < 3) {
            const std::string& f = spec.fillers[static_cast<size_t>(
                rng.uniform_int(0, static_cast<long long>(
                                       spec.fillers.size() - 1)))];
            if (std::find(picks.begin(), picks.end(), f) == picks.end())
                picks.push_back(f);
        }
        std::string text = picks[0] + " " +
                           std::to_string(rng.uniform_int(1, 399)) + " " +
                           picks[1] + " " + picks[2] + " " + name_part + " " +
                           locality + " " + spec.city + " " +
                           std::to_string(pincode);
        return text;
    };

    size_t total_in_poi = 0;
    for (int k = 0; k < spec.n_pois; ++k) {
        auto [row, col] = cells[static_cast<size_t>(k)];
        const LatLng center = cell_center(row, col);
        const LocalProjection local(center);

        const double r_max =
            rng.uniform(spec.poi_radius_m_min, spec.poi_radius_m_max);
        const int nv = static_cast<int>(rng.uniform_int(6, 10));
        std::vector<XY> ring_xy;
        for (int v = 0; v < nv; ++v) {
            double theta = 2.0 * std::numbers::pi *
                           (v + rng.uniform(-0.2, 0.2)) / nv;
            double rho = rng.uniform(0.8 * r_max, r_max);
            ring_xy.push_back({rho * std::cos(theta), rho * std::sin(theta)});
        }
        std::vector<LatLng> gt_ring = detail::ring_from_xy(ring_xy, local);

        PlantedPoi poi;
        poi.poi_id = "gt_" + std::to_string(k);
        poi.name = names[static_cast<size_t>(k)];
        poi.ring = gt_ring;
        poi.center = center;

        // spelling variants: both substitute the first character of the
        // second name token, so each is one edit from the canonical form
        std::vector<std::string> toks = tokenize(poi.name);
        std::string var_a_tok = toks[1], var_b_tok = toks[1];
        var_a_tok[0] = var_a_tok[0] == 'x' ? 'q' : 'x';
        var_b_tok[0] = var_b_tok[0] == 'z' ? 'j' : 'z';
        const std::string variant_a = toks[0] + " " + var_a_tok;
        const std::string variant_b = toks[0] + " " + var_b_tok;

        const int n_towers =
            static_cast<int>(rng.uniform_int(spec.towers_min, spec.towers_max));
        std::vector<XY> towers;
        for (int t = 0; t < n_towers; ++t) {
            double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
            double rho = rng.uniform(0.0, 0.35 * 0.8 * r_max);
            towers.push_back({rho * std::cos(theta), rho * std::sin(theta)});
        }

        int n_addr = static_cast<int>(rng.uniform_int(
            spec.addresses_per_poi_min, spec.addresses_per_poi_max));
        if (n_addr % 2 != 0) ++n_addr;
        const int pincode = 560000 + k;

        size_t varied = 0;
        for (int a = 0; a < n_addr; ++a) {
            const XY tower = towers[static_cast<size_t>(a) % towers.size()];
            // uniform disk around the tower, hard radius
            double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
            double rho = spec.tower_spread_m * std::sqrt(rng.u01());
            XY pt{tower.x + rho * std::cos(theta),
                  tower.y + rho * std::sin(theta)};
            if (spec.gps_noise_sigma_m > 0.0) {
                // truncated: resample until the noisy point stays inside
                XY noisy = pt;
                do {
                    noisy = {pt.x + rng.gauss(spec.gps_noise_sigma_m),
                             pt.y + rng.gauss(spec.gps_noise_sigma_m)};
                } while (!point_in_ring(gt_ring, local.inverse(noisy)));
                pt = noisy;
            }
            if (spec.leak_rate > 0.0 && rng.u01() < spec.leak_rate) {
                double ang = std::atan2(pt.y, pt.x);
                double boundary =
                    detail::ring_radius_at(ring_xy, XY{0.0, 0.0}, ang);
                double push = rng.uniform(1.01, 1.05);
                pt = {boundary * push * std::cos(ang),
                      boundary * push * std::sin(ang)};
            }

            std::string spelled = poi.name;
            if (spec.spell_variant_rate > 0.0 &&
                rng.u01() < spec.spell_variant_rate) {
                spelled = (varied % 2 == 0) ? variant_a : variant_b;
                ++varied;
            }
            const std::string& locality = city.locality_names[static_cast<size_t>(
                rng.uniform_int(0, static_cast<long long>(
                                       city.locality_names.size() - 1)))];

            AddressRecord rec;
            rec.address_id = fresh_id();
            LatLng loc = local.inverse(pt);
            rec.lat = loc.lat;
            rec.lng = loc.lng;
            rec.raw_text = compose_text(spelled, locality, pincode);
            poi.member_ids.push_back(rec.address_id);
            city.addresses.push_back(std::move(rec));
        }
        total_in_poi += static_cast<size_t>(n_addr);

        PoiPolygon gt;
        gt.poi_id = poi.poi_id;
        gt.ring = gt_ring;
        gt.names = {poi.name};
        gt.member_count = n_addr;
        gt.stage = PolygonStage::ground_truth;
        city.gt_polygons.push_back(std::move(gt));

        // OSM: private service loop (scaled gt ring) + one building per tower
        std::vector<XY> loop_xy;
        for (const XY& p : ring_xy)
            loop_xy.push_back({p.x * spec.loop_scale, p.y * spec.loop_scale});
        OsmRoad loop;
        loop.id = "loop_" + std::to_string(k);
        loop.line = detail::ring_from_xy(loop_xy, local);
        loop.highway = "service";
        loop.circular = true;
        loop.road_class = RoadClass::private_road;
        city.osm.roads.push_back(std::move(loop));

        for (size_t t = 0; t < towers.size(); ++t) {
            const XY& c = towers[t];
            const double h = spec.building_half_m;
            std::vector<XY> sq = {{c.x - h, c.y - h},
                                  {c.x + h, c.y - h},
                                  {c.x + h, c.y + h},
                                  {c.x - h, c.y + h}};
            OsmBuilding b;
            b.id = "b" + std::to_string(k) + "_" + std::to_string(t);
            b.ring = detail::ring_from_xy(sq, local);
            city.osm.buildings.push_back(std::move(b));
        }

        city.planted.push_back(std::move(poi));
    }

    // outliers: uniform over the box, one-off names, no planted membership
    for (size_t i = 0; i < total_in_poi; ++i) {
        if (rng.u01() >= spec.outlier_rate) continue;
        AddressRecord rec;
        rec.address_id = fresh_id();
        rec.lat = box_sw.lat + rng.u01() * detail::kCitySpanDeg;
        rec.lng = box_sw.lng + rng.u01() * detail::kCitySpanDeg;
        const std::string& word = outlier_words[static_cast<size_t>(
            rng.uniform_int(0, static_cast<long long>(
                                   outlier_words.size() - 1)))];
        const std::string& locality = city.locality_names[static_cast<size_t>(
            rng.uniform_int(0, static_cast<long long>(
                                   city.locality_names.size() - 1)))];
        rec.raw_text = compose_text(word, locality, 560090);
        city.addresses.push_back(std::move(rec));
        ++city.n_outliers;
    }

    // survey pins at the exact box corners fix the partition extent
    for (int r : {0, 1}) {
        for (int c : {0, 1}) {
            AddressRecord rec;
            rec.address_id = fresh_id();
            rec.lat = box_sw.lat + r * detail::kCitySpanDeg;
            rec.lng = box_sw.lng + c * detail::kCitySpanDeg;
            rec.raw_text = "survey pin " + std::to_string(r) + " " +
                           std::to_string(c) + " " + spec.city;
            city.addresses.push_back(std::move(rec));
        }
    }

    // public grid roads along interior cell boundaries, spanning the box
    for (int i = 1; i < 5; ++i) {
        const double lat = box_sw.lat + i / 5.0 * detail::kCitySpanDeg;
        const double lng = box_sw.lng + i / 5.0 * detail::kCitySpanDeg;
        OsmRoad horizontal;
        horizontal.id = "grid_h" + std::to_string(i);
        horizontal.line = {{lat, box_sw.lng},
                           {lat, box_sw.lng + detail::kCitySpanDeg}};
        horizontal.highway = "primary";
        horizontal.road_class = RoadClass::public_road;
        city.osm.roads.push_back(std::move(horizontal));
        OsmRoad vertical;
        vertical.id = "grid_v" + std::to_string(i);
        vertical.line = {{box_sw.lat, lng},
                         {box_sw.lat + detail::kCitySpanDeg, lng}};
        vertical.highway = "primary";
        vertical.road_class = RoadClass::public_road;
        city.osm.roads.push_back(std::move(vertical));
    }

    return city;
}

}  // namespace poiforge
