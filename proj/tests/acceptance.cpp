// Acceptance gate. Each criterion runs standalone (argv[1] = 1..8) and
// prints a single [PASS]/[FAIL] line; a nonzero exit means failure. The
// thresholds here are regression gates for this artifact, chosen so a
// correct build passes with margin and a broken stage cannot.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "poiforge/baseline.hpp"
#include "poiforge/cluster.hpp"
#include "poiforge/config.hpp"
#include "poiforge/corpus.hpp"
#include "poiforge/eval.hpp"
#include "poiforge/geojson.hpp"
#include "poiforge/geometry.hpp"
#include "poiforge/osm.hpp"
#include "poiforge/pipeline.hpp"
#include "poiforge/synth.hpp"
#include "poiforge/types.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace poiforge;

namespace {

int g_failures = 0;

void expect(bool ok, const std::string& what) {
    if (!ok) {
        std::printf("    failed: %s\n", what.c_str());
        ++g_failures;
    }
}

constexpr double kBaseLat = 12.97;
constexpr double kBaseLng = 77.59;
constexpr double kMetersPerDegLat = 111194.92664455873;

double lat_of(double north_m) { return kBaseLat + north_m / kMetersPerDegLat; }

double lng_of(double east_m) {
    return kBaseLng +
           east_m / (kMetersPerDegLat *
                     std::cos(kBaseLat * 3.14159265358979323846 / 180.0));
}

std::vector<LatLng> rect(double x0, double y0, double x1, double y1) {
    return {{lat_of(y0), lng_of(x0)},
            {lat_of(y0), lng_of(x1)},
            {lat_of(y1), lng_of(x1)},
            {lat_of(y1), lng_of(x0)},
            {lat_of(y0), lng_of(x0)}};
}

PoiPolygon poi_of(const std::string& id, std::vector<LatLng> ring) {
    PoiPolygon p;
    p.poi_id = id;
    p.ring = std::move(ring);
    p.member_count = 1;
    p.stage = PolygonStage::raw_hull;
    return p;
}

bool close_rel(double got, double want, double rel) {
    return std::abs(got - want) <= rel * std::abs(want);
}

std::set<std::vector<std::string>> cluster_sets(
    const std::vector<CandidateCluster>& clusters) {
    std::set<std::vector<std::string>> out;
    for (const CandidateCluster& c : clusters) {
        std::vector<std::string> ids = c.member_ids;
        std::sort(ids.begin(), ids.end());
        out.insert(ids);
    }
    return out;
}

std::set<std::vector<std::string>> planted_sets(const SynthCity& city) {
    std::set<std::vector<std::string>> out;
    for (const PlantedPoi& poi : city.planted) out.insert(poi.member_ids);
    return out;
}

SynthSpec city_spec() {
    SynthSpec spec;  // seed 7, 20 pois, 90..130 addresses per poi
    return spec;
}

std::map<std::string, std::vector<std::string>> locality_map(
    const SynthSpec& spec, const SynthCity& city) {
    return {{spec.city, city.locality_names}};
}

// ------------------------------------------------------------ criterion 1

void criterion_preprocessing() {
    CorpusStats vocab = fixtures::vocab_stats();
    size_t row_no = 0;
    for (const fixtures::VocabRow& row : fixtures::vocab_rows()) {
        ++row_no;
        std::string got = vocabulary_preprocess(row.raw, vocab);
        expect(got == row.expected,
               "vocabulary row " + std::to_string(row_no) + ": got '" + got +
                   "'");
    }

    CorpusStats stop = fixtures::stop_stats();
    row_no = 0;
    for (const fixtures::StopRow& row : fixtures::stop_rows()) {
        ++row_no;
        std::string clean = vocabulary_preprocess(row.input, stop);
        std::string got = specialized_preprocess(clean, stop, "chennai");
        expect(got == row.expected,
               "specialized row " + std::to_string(row_no) + ": got '" + got +
                   "'");
    }
}

// ------------------------------------------------------------ criterion 2

void criterion_formulas() {
    struct RectCase {
        std::vector<LatLng> alg, gt;
        double precision, recall;
    };
    const std::vector<RectCase> cases = {
        {rect(0, 0, 10, 10), rect(0, 0, 10, 10), 1.0, 1.0},
        {rect(0, 0, 10, 10), rect(0, 0, 10, 20), 1.0, 0.5},
        {rect(5, 0, 15, 10), rect(0, 0, 10, 10), 0.5, 0.5},
        {rect(0, 0, 10, 10), rect(4, 0, 14, 10), 0.6, 0.6},
        {rect(0, 0, 20, 10), rect(5, 0, 15, 10), 0.5, 1.0},
    };
    size_t case_no = 0;
    for (const RectCase& c : cases) {
        ++case_no;
        PoiPolygon alg = poi_of("alg", c.alg);
        PoiPolygon gt = poi_of("gt", c.gt);
        double p = area_precision(alg, gt);
        double r = area_recall(alg, gt);
        expect(close_rel(p, c.precision, 1e-9),
               "rect case " + std::to_string(case_no) + " precision " +
                   std::to_string(p));
        expect(close_rel(r, c.recall, 1e-9),
               "rect case " + std::to_string(case_no) + " recall " +
                   std::to_string(r));
    }

    expect(std::abs(f_score(0.5, 0.5) - 0.5) < 1e-12, "f(0.5,0.5)");
    for (double r : {0.1, 0.25, 0.66, 1.0})
        expect(std::abs(f_score(1.0, r) - 2.0 * r / (1.0 + r)) < 1e-12,
               "f(1,r) closed form");
    expect(std::abs(f_score(0.987, 0.082) - 0.1514) < 5e-4,
           "f(0.987,0.082) = " + std::to_string(f_score(0.987, 0.082)));
}

// ------------------------------------------------------------ criterion 3

void criterion_oracles() {
    for (int trial = 0; trial < 200; ++trial) {
        oracle::Rng rng(101 + static_cast<unsigned long long>(trial));
        const int dim = 1 + trial % 3;
        std::vector<std::vector<double>> pts(64);
        for (auto& p : pts) {
            p.resize(static_cast<size_t>(dim));
            for (double& v : p) v = rng.uniform(-50.0, 50.0);
        }
        Dendrogram d = single_linkage(pts);
        std::vector<double> want = oracle::single_linkage_heights(pts);
        expect(d.merges.size() == want.size(),
               "linkage trial " + std::to_string(trial) + " merge count");
        for (size_t i = 0; i < d.merges.size() && i < want.size(); ++i)
            if (d.merges[i].height != want[i]) {
                expect(false, "linkage trial " + std::to_string(trial) +
                                  " height " + std::to_string(i));
                break;
            }
    }

    PipelineConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
        oracle::Rng rng(7001 + static_cast<unsigned long long>(trial));
        const double box = rng.uniform(40.0, 160.0);
        const size_t n = 200;
        CandidateCluster in;
        char buf[16];
        for (size_t i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), "p%03zu", i);
            in.member_ids.push_back(buf);
            in.member_rows.push_back(i);
            in.locations.push_back({lat_of(rng.uniform(0.0, box)),
                                    lng_of(rng.uniform(0.0, box))});
            in.embeddings.push_back({1.0});
        }
        derive_centroids(in);

        std::vector<CandidateCluster> parts = dbscan_refine(in, cfg);

        std::vector<double> xs(n), ys(n);
        for (size_t i = 0; i < n; ++i)
            oracle::project(in.locations[i].lat, in.locations[i].lng,
                            in.location_centroid.lat, in.location_centroid.lng,
                            xs[i], ys[i]);
        std::vector<int> labels = oracle::dbscan_labels(
            xs, ys, cfg.dbscan_eps_m, cfg.dbscan_min_neighbours);

        std::map<int, std::vector<std::string>> groups;
        for (size_t i = 0; i < n; ++i)
            if (labels[i] >= 0) groups[labels[i]].push_back(in.member_ids[i]);
        std::set<std::vector<std::string>> want;
        for (auto& [id, ids] : groups) {
            std::sort(ids.begin(), ids.end());
            want.insert(ids);
        }
        expect(cluster_sets(parts) == want,
               "dbscan trial " + std::to_string(trial) + ": " +
                   std::to_string(parts.size()) + " clusters vs oracle " +
                   std::to_string(want.size()));
    }

    for (int trial = 0; trial < 1000; ++trial) {
        oracle::Rng rng(40009 + static_cast<unsigned long long>(trial));
        const int n = 3 + trial % 48;
        std::vector<LatLng> pts;
        for (int i = 0; i < n; ++i)
            pts.push_back({kBaseLat + rng.uniform(-0.01, 0.01),
                           kBaseLng + rng.uniform(-0.01, 0.01)});
        auto hull = convex_hull(pts);
        if (!hull) {
            expect(false, "hull trial " + std::to_string(trial) + " degenerate");
            continue;
        }
        const std::vector<LatLng>& ring = *hull;
        bool ok = ring.size() >= 4 && ring.front() == ring.back();
        std::vector<std::pair<double, double>> xy;
        for (const LatLng& p : ring) xy.push_back({p.lng, p.lat});
        for (size_t i = 0; ok && i + 2 < xy.size(); ++i)
            ok = oracle::turn(xy[i].first, xy[i].second, xy[i + 1].first,
                              xy[i + 1].second, xy[i + 2].first,
                              xy[i + 2].second) > 0.0;
        expect(ok, "hull trial " + std::to_string(trial) + " shape");

        for (const LatLng& p : pts)
            if (!oracle::inside_convex(xy, p.lng, p.lat, 1e-12)) {
                expect(false,
                       "hull trial " + std::to_string(trial) + " containment");
                break;
            }
        for (size_t i = 0; i + 1 < ring.size(); ++i) {
            bool found = false;
            for (const LatLng& p : pts)
                if (p == ring[i]) {
                    found = true;
                    break;
                }
            if (!found) {
                expect(false, "hull trial " + std::to_string(trial) +
                                  " foreign vertex");
                break;
            }
        }
    }
}

// ------------------------------------------------------------ criterion 4

void criterion_end_to_end() {
    PipelineConfig cfg;

    SynthSpec exact_spec = city_spec();
    SynthCity exact_city = generate_city(exact_spec);
    std::vector<AddressRecord> records = exact_city.addresses;
    PipelineResult exact = run_pipeline(
        records, std::nullopt, std::nullopt, exact_city.gt_polygons, cfg,
        locality_map(exact_spec, exact_city), exact_spec.city);
    expect(exact.clusters.size() == exact_city.planted.size(),
           "noise-free run: " + std::to_string(exact.clusters.size()) +
               " clusters for " + std::to_string(exact_city.planted.size()) +
               " planted pois");
    expect(cluster_sets(exact.clusters) == planted_sets(exact_city),
           "noise-free membership differs from planted membership");

    SynthSpec noisy_spec = city_spec();
    noisy_spec.gps_noise_sigma_m = 15.0;
    noisy_spec.leak_rate = 0.05;
    SynthCity noisy_city = generate_city(noisy_spec);
    std::vector<AddressRecord> noisy_records = noisy_city.addresses;
    PipelineResult noisy = run_pipeline(
        noisy_records, std::nullopt, std::nullopt, noisy_city.gt_polygons, cfg,
        locality_map(noisy_spec, noisy_city), noisy_spec.city);
    expect(noisy.metrics.has_value(), "noisy run produced no metrics");
    if (noisy.metrics) {
        expect(noisy.metrics->median_precision >= 0.8,
               "noisy median precision " +
                   std::to_string(noisy.metrics->median_precision));
        expect(noisy.metrics->median_recall >= 0.5,
               "noisy median recall " +
                   std::to_string(noisy.metrics->median_recall));
    }
}

// ------------------------------------------------------------ criterion 5

void criterion_osm_direction() {
    PipelineConfig cfg;
    SynthSpec spec = city_spec();
    spec.gps_noise_sigma_m = 15.0;
    spec.leak_rate = 0.05;
    SynthCity city = generate_city(spec);

    std::vector<AddressRecord> raw_records = city.addresses;
    PipelineResult raw = run_pipeline(
        raw_records, std::nullopt, std::nullopt, city.gt_polygons, cfg,
        locality_map(spec, city), spec.city);

    std::vector<AddressRecord> osm_records = city.addresses;
    PipelineResult corrected = run_pipeline(
        osm_records, std::nullopt, city.osm, city.gt_polygons, cfg,
        locality_map(spec, city), spec.city);

    expect(raw.metrics.has_value() && corrected.metrics.has_value(),
           "both runs must produce metrics");
    if (raw.metrics && corrected.metrics) {
        expect(corrected.metrics->median_recall > raw.metrics->median_recall,
               "recall did not increase: raw " +
                   std::to_string(raw.metrics->median_recall) +
                   " corrected " +
                   std::to_string(corrected.metrics->median_recall));
        expect(corrected.metrics->median_precision >= 0.6,
               "corrected median precision " +
                   std::to_string(corrected.metrics->median_precision));
    }
}

// ------------------------------------------------------------ criterion 6

void criterion_baseline_gap() {
    PipelineConfig cfg;
    SynthSpec spec = city_spec();
    spec.spell_variant_rate = 1.0;  // 50/50 mix of two distance-1 variants
    SynthCity city = generate_city(spec);

    std::vector<AddressRecord> records = city.addresses;
    PipelineResult result =
        run_pipeline(records, std::nullopt, std::nullopt, {}, cfg,
                     locality_map(spec, city), spec.city);

    size_t pipeline_valid = 0;
    for (const PoiPolygon& p : result.polygons)
        if (validate_polygon(p)) ++pipeline_valid;

    size_t baseline_valid = 0;
    for (const PoiPolygon& p : run_baseline(records, cfg))
        if (validate_polygon(p)) ++baseline_valid;
    expect(pipeline_valid > baseline_valid,
           "pipeline " + std::to_string(pipeline_valid) +
               " vs baseline " + std::to_string(baseline_valid));
}

// ------------------------------------------------------------ criterion 7

void criterion_branch_coverage() {
    PipelineConfig cfg;
    const double side = 20.0;

    auto loop_layer = [&](double area_factor, const char* highway) {
        const double half = side * std::sqrt(area_factor) / 2.0;
        OsmLayer layer;
        OsmRoad loop;
        loop.id = "loop";
        loop.line = rect(10.0 - half, 10.0 - half, 10.0 + half, 10.0 + half);
        loop.highway = highway;
        loop.circular = true;
        loop.road_class = classify_highway(highway);
        layer.roads.push_back(std::move(loop));
        return layer;
    };

    {  // encompassing private loop within the area ladder: replace
        OsmLayer layer = loop_layer(1.4, "service");
        std::vector<CorrectionStep> trace;
        PoiPolygon out =
            correct(poi_of("p", rect(0, 0, side, side)), layer, cfg, &trace);
        expect(trace.size() == 1 && trace[0].branch == CorrectionBranch::replace,
               "replace fixture trace");
        expect(close_rel(ring_area_m2(out.ring), 560.0, 1e-3),
               "replace fixture area " +
                   std::to_string(ring_area_m2(out.ring)));
    }
    {  // loop too large to replace: union
        OsmLayer layer = loop_layer(1.6, "service");
        std::vector<CorrectionStep> trace;
        PoiPolygon out =
            correct(poi_of("p", rect(0, 0, side, side)), layer, cfg, &trace);
        expect(trace.size() == 1 &&
                   trace[0].branch == CorrectionBranch::union_with,
               "union fixture trace");
        expect(close_rel(ring_area_m2(out.ring), 640.0, 1e-3),
               "union fixture area " + std::to_string(ring_area_m2(out.ring)));
    }
    {  // public ring covering 60%: intersection
        OsmLayer layer;
        OsmRoad ring_road;
        ring_road.id = "pub";
        ring_road.line = rect(0, 0, 12, side);
        ring_road.highway = "primary";
        ring_road.circular = true;
        ring_road.road_class = RoadClass::public_road;
        layer.roads.push_back(ring_road);
        std::vector<CorrectionStep> trace;
        PoiPolygon out =
            correct(poi_of("p", rect(0, 0, side, side)), layer, cfg, &trace);
        expect(trace.size() == 1 &&
                   trace[0].branch == CorrectionBranch::intersect,
               "intersection fixture trace");
        expect(close_rel(ring_area_m2(out.ring), 240.0, 1e-3),
               "intersection fixture area " +
                   std::to_string(ring_area_m2(out.ring)));
    }
    {  // public ring covering 40%: difference
        OsmLayer layer;
        OsmRoad ring_road;
        ring_road.id = "pub";
        ring_road.line = rect(0, 0, 8, side);
        ring_road.highway = "primary";
        ring_road.circular = true;
        ring_road.road_class = RoadClass::public_road;
        layer.roads.push_back(ring_road);
        std::vector<CorrectionStep> trace;
        PoiPolygon out =
            correct(poi_of("p", rect(0, 0, side, side)), layer, cfg, &trace);
        expect(trace.size() == 1 &&
                   trace[0].branch == CorrectionBranch::subtract,
               "difference fixture trace");
        expect(close_rel(ring_area_m2(out.ring), 240.0, 1e-3),
               "difference fixture area " +
                   std::to_string(ring_area_m2(out.ring)));
    }
    {  // public road through the polygon: prune keeps the larger side
        OsmLayer layer;
        OsmRoad road;
        road.id = "cut";
        road.line = {{lat_of(-20), lng_of(12)}, {lat_of(40), lng_of(12)}};
        road.highway = "primary";
        road.road_class = RoadClass::public_road;
        layer.roads.push_back(road);
        std::vector<CorrectionStep> trace;
        PoiPolygon out =
            correct(poi_of("p", rect(0, 0, side, side)), layer, cfg, &trace);
        expect(trace.size() == 1 && trace[0].branch == CorrectionBranch::prune,
               "prune fixture trace");
        expect(close_rel(ring_area_m2(out.ring), 240.0, 0.01),
               "prune fixture area " + std::to_string(ring_area_m2(out.ring)));
    }
    {  // short private road: explicit no-op
        OsmLayer layer;
        OsmRoad road;
        road.id = "lane";
        road.line = {{lat_of(-5), lng_of(10)}, {lat_of(25), lng_of(10)}};
        road.highway = "service";
        road.road_class = RoadClass::private_road;
        layer.roads.push_back(road);
        std::vector<CorrectionStep> trace;
        PoiPolygon in = poi_of("p", rect(0, 0, side, side));
        PoiPolygon out = correct(in, layer, cfg, &trace);
        expect(trace.size() == 1 && trace[0].branch == CorrectionBranch::skip,
               "no-op fixture trace");
        expect(out.ring == in.ring, "no-op fixture must keep the ring");
    }
}

// ------------------------------------------------------------ criterion 8

void criterion_determinism() {
    PipelineConfig cfg;
    SynthSpec spec = city_spec();
    spec.gps_noise_sigma_m = 15.0;
    spec.leak_rate = 0.05;
    SynthCity city = generate_city(spec);

    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
    };

    std::vector<std::string> polygon_bytes, hull_bytes, metric_bytes,
        cluster_bytes;
    for (int workers : {1, 4, 8}) {
        std::vector<AddressRecord> records = city.addresses;
        PipelineResult result = run_pipeline(
            records, std::nullopt, city.osm, city.gt_polygons, cfg,
            locality_map(spec, city), spec.city, workers);
        polygon_bytes.push_back(polygons_to_geojson(result.polygons));
        hull_bytes.push_back(polygons_to_geojson(result.hull_polygons));
        metric_bytes.push_back(
            result.metrics ? report_to_json(*result.metrics).dump() : "");
        std::string path =
            "acceptance_clusters_w" + std::to_string(workers) + ".jsonl";
        save_clusters_jsonl(result, path);
        cluster_bytes.push_back(slurp(path));
        std::remove(path.c_str());
    }
    expect(polygon_bytes[0] == polygon_bytes[1] &&
               polygon_bytes[0] == polygon_bytes[2],
           "polygon output differs across workers");
    expect(hull_bytes[0] == hull_bytes[1] && hull_bytes[0] == hull_bytes[2],
           "hull output differs across workers");
    expect(metric_bytes[0] == metric_bytes[1] &&
               metric_bytes[0] == metric_bytes[2],
           "metrics differ across workers");
    expect(!cluster_bytes[0].empty() && cluster_bytes[0] == cluster_bytes[1] &&
               cluster_bytes[0] == cluster_bytes[2],
           "cluster dump differs across workers");
}

struct Criterion {
    const char* label;
    void (*run)();
    double time_limit_s;  // 0 = no limit
};

const Criterion kCriteria[] = {
    {"preprocessing fixtures", criterion_preprocessing, 1.0},
    {"area formula checks", criterion_formulas, 0.0},
    {"oracle equivalence", criterion_oracles, 60.0},
    {"end-to-end synthetic city", criterion_end_to_end, 120.0},
    {"osm correction direction", criterion_osm_direction, 0.0},
    {"baseline gap", criterion_baseline_gap, 0.0},
    {"correction branch coverage", criterion_branch_coverage, 0.0},
    {"worker determinism", criterion_determinism, 0.0},
};

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <criterion 1..8>\n", argv[0]);
        return 2;
    }
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 8) {
        std::fprintf(stderr, "criterion must be 1..8, got '%s'\n", argv[1]);
        return 2;
    }
    const Criterion& c = kCriteria[n - 1];

    auto t0 = std::chrono::steady_clock::now();
    try {
        c.run();
    } catch (const std::exception& e) {
        expect(false, std::string("unhandled exception: ") + e.what());
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (c.time_limit_s > 0.0 && elapsed > c.time_limit_s) {
        expect(false, "runtime " + std::to_string(elapsed) + "s exceeds " +
                          std::to_string(c.time_limit_s) + "s");
    }

    std::printf("[%s] criterion %d: %s (%.2fs)\n",
                g_failures == 0 ? "PASS" : "FAIL", n, c.label, elapsed);
    return g_failures == 0 ? 0 : 1;
}
