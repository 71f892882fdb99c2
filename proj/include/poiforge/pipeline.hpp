#pragma once

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "poiforge/baseline.hpp"
#include "poiforge/cluster.hpp"
#include "poiforge/config.hpp"
#include "poiforge/corpus.hpp"
#include "poiforge/csvio.hpp"
#include "poiforge/embed.hpp"
#include "poiforge/eval.hpp"
#include "poiforge/geojson.hpp"
#include "poiforge/geometry.hpp"
#include "poiforge/namemerge.hpp"
#include "poiforge/osm.hpp"
#include "poiforge/partition.hpp"
#include "poiforge/types.hpp"

namespace poiforge {

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct RunManifest {
    nlohmann::json config;
    std::map<std::string, std::string> input_digests;
    size_t n_addresses = 0;
    size_t n_bins = 0;
    size_t n_binned_addresses = 0;
    size_t n_homogeneous = 0;
    size_t n_dbscan = 0;
    size_t n_merged = 0;
    size_t n_polygons = 0;
    size_t n_osm_corrected = 0;
    int workers = 1;
    std::vector<StageTiming> timings;
};

inline nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [name, digest] : m.input_digests) inputs[name] = digest;
    nlohmann::json timings = nlohmann::json::array();
    for (const StageTiming& t : m.timings)
        timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    return nlohmann::json{
        {"config", m.config},
        {"inputs", inputs},
        {"counts",
         {{"addresses", m.n_addresses},
          {"bins", m.n_bins},
          {"binned_addresses", m.n_binned_addresses},
          {"homogeneous_clusters", m.n_homogeneous},
          {"dbscan_clusters", m.n_dbscan},
          {"merged_clusters", m.n_merged},
          {"polygons", m.n_polygons},
          {"osm_corrected", m.n_osm_corrected}}},
        {"workers", m.workers},
        {"timings", timings}};
}

inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot digest file: " + path);
    char buf[1 << 16];
    std::uint64_t h = 0;
    bool first = true;
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = detail::fnv1a64(buf, static_cast<size_t>(in.gcount()),
                            first ? 0 : h);
        first = false;
    }
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv1a:%016llx",
                  static_cast<unsigned long long>(h));
    return hex;
}

struct PipelineResult {
    std::vector<PoiPolygon> polygons;       // deepest polygon stage reached
    std::vector<PoiPolygon> hull_polygons;  // post-merge, pre-OSM snapshot
    std::vector<CandidateCluster> clusters;
    std::vector<std::string> cluster_bins;  // bin key per cluster, parallel
    std::optional<MetricsReport> metrics;
    RunManifest manifest;
};

namespace detail {

inline int stage_rank(const std::string& stage) {
    static const std::vector<std::string> order = {
        "preprocess", "embed", "partition", "cluster",
        "dbscan",     "merge", "polygons",  "osm",
        "evaluate"};
    for (size_t i = 0; i < order.size(); ++i)
        if (order[i] == stage) return static_cast<int>(i);
    throw std::runtime_error("unknown pipeline stage: " + stage);
}

}  // namespace detail

/// End-to-end run. The bin is the unit of parallelism: per-bin work is pure
/// and collected into a vector indexed by the pre-sorted bin order, so any
/// worker count produces identical output. `stage_through` truncates the
/// run after the named stage ("" = full).
inline PipelineResult run_pipeline(
    std::vector<AddressRecord>& records,
    const std::optional<EmbeddingSet>& embeddings,
    const std::optional<OsmLayer>& osm, const std::vector<PoiPolygon>& gt,
    const PipelineConfig& cfg,
    const std::map<std::string, std::vector<std::string>>& localities = {},
    const std::string& city = "", int workers = 1,
    const std::string& stage_through = "") {
    validate_config(cfg);
    if (records.empty()) throw std::runtime_error("no addresses to process");
    const int last =
        stage_through.empty() ? 1000 : detail::stage_rank(stage_through);
    if (workers < 1) workers = 1;

    PipelineResult result;
    result.manifest.config = config_to_json(cfg);
    result.manifest.n_addresses = records.size();
    result.manifest.workers = workers;

    auto timed = [&](const char* name, auto&& body) {
        auto t0 = std::chrono::steady_clock::now();
        body();
        auto t1 = std::chrono::steady_clock::now();
        result.manifest.timings.push_back(
            {name, std::chrono::duration<double>(t1 - t0).count()});
    };

    timed("preprocess", [&] {
        std::vector<std::string> texts;
        texts.reserve(records.size());
        for (const AddressRecord& r : records) texts.push_back(r.raw_text);
        CorpusStats stats = build_corpus_stats(
            texts, localities, cfg.bigram_min_count, cfg.top_words_count);
        for (AddressRecord& r : records) {
            r.clean_text = vocabulary_preprocess(r.raw_text, stats);
            r.mined_text = specialized_preprocess(r.clean_text, stats, city);
        }
    });
    if (last < detail::stage_rank("embed")) return result;

    timed("embed", [&] {
        if (embeddings) {
            for (AddressRecord& r : records) {
                auto it = embeddings->by_id.find(r.address_id);
                if (it == embeddings->by_id.end())
                    throw std::runtime_error("no embedding for address " +
                                             r.address_id);
                r.embedding = it->second;
            }
        } else {
            TrigramEmbedder embedder(cfg.embedding_dim);
            for (AddressRecord& r : records)
                r.embedding = embedder.embed(r.mined_text);
        }
    });
    if (last < detail::stage_rank("partition")) return result;

    std::vector<GeoBin> bins;
    timed("partition", [&] {
        bins = make_bins(records, cfg);
        result.manifest.n_bins = bins.size();
        for (const GeoBin& b : bins)
            result.manifest.n_binned_addresses += b.member_idx.size();
    });
    if (last < detail::stage_rank("cluster")) return result;

    // per-bin mining, parallel over bins
    struct BinOutcome {
        std::vector<CandidateCluster> homogeneous;
        std::vector<CandidateCluster> dbscan;
        std::vector<CandidateCluster> merged;
        std::vector<PoiPolygon> hulls;
        std::string error;
    };
    std::vector<BinOutcome> outcomes(bins.size());

    timed("mine", [&] {
        std::atomic<size_t> cursor{0};
        auto work = [&]() {
            for (size_t i = cursor.fetch_add(1); i < bins.size();
                 i = cursor.fetch_add(1)) {
                BinOutcome& oc = outcomes[i];
                const std::string key = bins[i].key.to_string();
                try {
                    BinFeatures feats =
                        build_features(bins[i], records, cfg.location_scale);
                    Dendrogram dendro = single_linkage(feats.features);
                    oc.homogeneous =
                        extract_homogeneous(dendro, feats, records, cfg);
                    if (last < detail::stage_rank("dbscan")) continue;
                    for (const CandidateCluster& c : oc.homogeneous)
                        for (CandidateCluster& r : dbscan_refine(c, cfg))
                            oc.dbscan.push_back(std::move(r));
                    if (last < detail::stage_rank("merge")) continue;
                    oc.merged = merge_homonyms(oc.dbscan, records, cfg);
                    if (last < detail::stage_rank("polygons")) continue;
                    for (size_t k = 0; k < oc.merged.size(); ++k) {
                        auto hull = convex_hull(oc.merged[k].locations);
                        if (!hull) continue;  // degenerate cluster
                        PoiPolygon poly;
                        poly.poi_id = key + "_" + std::to_string(k);
                        poly.ring = *hull;
                        poly.names = oc.merged[k].names;
                        poly.member_count = static_cast<int>(
                            oc.merged[k].member_ids.size());
                        poly.stage = PolygonStage::raw_hull;
                        oc.hulls.push_back(std::move(poly));
                    }
                } catch (const std::exception& e) {
                    oc.error = "bin " + key + ": " + e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        const size_t n_threads =
            std::min<size_t>(static_cast<size_t>(workers),
                             bins.empty() ? 1 : bins.size());
        for (size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
        work();
        for (auto& th : pool) th.join();
    });

    std::vector<PoiPolygon> hulls;
    for (size_t i = 0; i < outcomes.size(); ++i) {
        const BinOutcome& oc = outcomes[i];
        if (!oc.error.empty()) throw std::runtime_error(oc.error);
        result.manifest.n_homogeneous += oc.homogeneous.size();
        result.manifest.n_dbscan += oc.dbscan.size();
        result.manifest.n_merged += oc.merged.size();
        const std::string key = bins[i].key.to_string();
        const std::vector<CandidateCluster>* deepest =
            last >= detail::stage_rank("merge")
                ? &oc.merged
                : (last >= detail::stage_rank("dbscan") ? &oc.dbscan
                                                        : &oc.homogeneous);
        for (const CandidateCluster& c : *deepest) {
            result.clusters.push_back(c);
            result.cluster_bins.push_back(key);
        }
        for (const PoiPolygon& p : oc.hulls) hulls.push_back(p);
    }
    if (last < detail::stage_rank("polygons")) return result;

    timed("polygons", [&] {
        std::vector<PoiPolygon> kept = discard_embedded(hulls);
        result.hull_polygons =
            merge_substantial(kept, cfg.polygon_merge_overlap);
        result.manifest.n_polygons = result.hull_polygons.size();
    });
    result.polygons = result.hull_polygons;
    if (last < detail::stage_rank("osm")) return result;

    if (osm) {
        timed("osm", [&] {
            for (PoiPolygon& p : result.polygons) {
                p = correct(p, *osm, cfg);
                ++result.manifest.n_osm_corrected;
            }
        });
    }
    if (last < detail::stage_rank("evaluate")) return result;

    if (!gt.empty())
        timed("evaluate",
              [&] { result.metrics = evaluate(result.polygons, gt); });
    return result;
}

/// The comparison baseline over the same partition: location-only
/// clustering plus n-gram thresholds, per bin.
inline std::vector<PoiPolygon> run_baseline(
    const std::vector<AddressRecord>& records, const PipelineConfig& cfg) {
    std::vector<PoiPolygon> out;
    for (const GeoBin& bin : make_bins(records, cfg)) {
        std::vector<AddressRecord> members;
        members.reserve(bin.member_idx.size());
        for (size_t i : bin.member_idx) members.push_back(records[i]);
        std::sort(members.begin(), members.end(),
                  [](const AddressRecord& a, const AddressRecord& b) {
                      return a.address_id < b.address_id;
                  });
        for (PoiPolygon poly : mummidi_krumm(members, cfg)) {
            poly.poi_id = bin.key.to_string() + "_" + poly.poi_id;
            out.push_back(std::move(poly));
        }
    }
    return out;
}

/// One JSON object per cluster, for inspection and stage-through output.
inline void save_clusters_jsonl(const PipelineResult& result,
                                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write clusters file: " + path);
    for (size_t i = 0; i < result.clusters.size(); ++i) {
        const CandidateCluster& c = result.clusters[i];
        nlohmann::json j{{"bin", result.cluster_bins[i]},
                         {"stage", to_string(c.stage)},
                         {"member_ids", c.member_ids},
                         {"names", c.names},
                         {"centroid_lat", c.location_centroid.lat},
                         {"centroid_lng", c.location_centroid.lng}};
        out << j.dump() << "\n";
    }
}

}  // namespace poiforge
