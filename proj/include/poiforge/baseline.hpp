#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "poiforge/cluster.hpp"
#include "poiforge/config.hpp"
#include "poiforge/geometry.hpp"
#include "poiforge/namemerge.hpp"
#include "poiforge/types.hpp"

namespace poiforge {

struct BaselineCluster {
    std::vector<std::string> member_ids;
    std::vector<LatLng> locations;
    std::optional<std::string> best_ngram;
    double tp = 0.0;
    double tfidf = 0.0;
};

namespace detail {

inline bool text_contains_ngram(const std::string& text,
                                const std::string& ngram) {
    std::vector<std::string> toks = tokenize(text);
    std::vector<std::string> want = tokenize(ngram);
    if (want.empty() || toks.size() < want.size()) return false;
    for (size_t i = 0; i + want.size() <= toks.size(); ++i) {
        bool all = true;
        for (size_t k = 0; k < want.size(); ++k)
            if (toks[i + k] != want[k]) {
                all = false;
                break;
            }
        if (all) return true;
    }
    return false;
}

}  // namespace detail

/// Fraction of member texts containing the n-gram as a contiguous token run.
inline double term_purity(const std::string& ngram,
                          const std::vector<std::string>& cluster_texts) {
    if (cluster_texts.empty())
        throw std::runtime_error("term_purity: empty cluster");
    size_t hits = 0;
    for (const std::string& text : cluster_texts)
        if (detail::text_contains_ngram(text, ngram)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(cluster_texts.size());
}

/// Normalized TF-IDF over clusters: TF is the term purity, IDF counts the
/// clusters containing the n-gram anywhere, and the product is scaled by
/// ln(N) so a cluster-exclusive full-purity n-gram scores exactly 1. With a
/// single cluster the IDF is vacuous and the score is just the TF.
inline double tf_idf(const std::string& ngram,
                     const std::vector<std::string>& cluster_texts,
                     const std::vector<std::vector<std::string>>& all_clusters) {
    if (all_clusters.empty()) throw std::runtime_error("tf_idf: no clusters");
    double tf = term_purity(ngram, cluster_texts);
    if (all_clusters.size() == 1) return std::clamp(tf, 0.0, 1.0);
    size_t df = 0;
    for (const auto& texts : all_clusters)
        for (const std::string& text : texts)
            if (detail::text_contains_ngram(text, ngram)) {
                ++df;
                break;
            }
    if (df == 0) return 0.0;
    double n = static_cast<double>(all_clusters.size());
    double score = tf * std::log(n / static_cast<double>(df)) / std::log(n);
    return std::clamp(score, 0.0, 1.0);
}

/// Location-only single-linkage clustering cut at a fixed distance, then an
/// n-gram gate: a cluster survives when it has at least baseline_min_points
/// members and some n-gram clears both the term-purity and tf-idf
/// thresholds. Survivors become convex hulls named by their best n-gram,
/// and hulls sharing a name are merged (hull of the union).
inline std::vector<PoiPolygon> mummidi_krumm(
    const std::vector<AddressRecord>& records, const PipelineConfig& cfg) {
    std::vector<PoiPolygon> out;
    if (records.empty()) return out;

    std::vector<LatLng> pts;
    for (const AddressRecord& r : records) pts.push_back(r.location());
    LocalProjection proj(centroid_of(pts));
    std::vector<std::vector<double>> features;
    for (const LatLng& p : pts) {
        XY xy = proj.forward(p);
        features.push_back({xy.x, xy.y});
    }
    Dendrogram dendro = single_linkage(features);

    // cut: apply merges up to the distance threshold; single linkage has
    // nondecreasing heights so this is a prefix of the merge list
    std::map<size_t, std::vector<size_t>> comps;
    for (size_t i = 0; i < records.size(); ++i) comps[i] = {i};
    for (size_t m = 0; m < dendro.merges.size(); ++m) {
        const auto& merge = dendro.merges[m];
        if (merge.height > cfg.baseline_cut_m) break;
        std::vector<size_t> joined = std::move(comps[merge.a]);
        auto& other = comps[merge.b];
        joined.insert(joined.end(), other.begin(), other.end());
        comps.erase(merge.a);
        comps.erase(merge.b);
        comps[dendro.n_leaves + m] = std::move(joined);
    }

    std::vector<std::vector<size_t>> clusters;
    for (auto& [node, rows] : comps) {
        std::sort(rows.begin(), rows.end(), [&](size_t a, size_t b) {
            return records[a].address_id < records[b].address_id;
        });
        clusters.push_back(rows);
    }
    std::sort(clusters.begin(), clusters.end(),
              [&](const auto& a, const auto& b) {
                  return records[a.front()].address_id <
                         records[b.front()].address_id;
              });

    std::vector<std::vector<std::string>> cluster_texts(clusters.size());
    for (size_t c = 0; c < clusters.size(); ++c)
        for (size_t row : clusters[c])
            cluster_texts[c].push_back(records[row].mined_text);

    std::vector<PoiPolygon> emitted;
    for (size_t c = 0; c < clusters.size(); ++c) {
        if (clusters[c].size() < static_cast<size_t>(cfg.baseline_min_points))
            continue;
        std::set<std::string> grams;
        for (size_t row : clusters[c]) {
            std::unordered_set<std::string> addr;
            detail::address_ngrams(records[row].mined_text, cfg.ngram_sizes,
                                   addr);
            grams.insert(addr.begin(), addr.end());
        }

        std::optional<std::string> best;
        double best_tp = 0.0, best_tfidf = 0.0;
        for (const std::string& g : grams) {
            double tp = term_purity(g, cluster_texts[c]);
            if (tp + 1e-9 < cfg.baseline_tp) continue;
            double score = tf_idf(g, cluster_texts[c], cluster_texts);
            if (score + 1e-9 < cfg.baseline_tfidf) continue;
            size_t ntok = tokenize(g).size();
            size_t btok = best ? tokenize(*best).size() : 0;
            bool better =
                !best || tp > best_tp ||
                (tp == best_tp &&
                 (score > best_tfidf ||
                  (score == best_tfidf &&
                   (ntok > btok || (ntok == btok && g < *best)))));
            if (better) {
                best = g;
                best_tp = tp;
                best_tfidf = score;
            }
        }
        if (!best) continue;

        std::vector<LatLng> members;
        for (size_t row : clusters[c]) members.push_back(pts[row]);
        auto hull = convex_hull(members);
        if (!hull) continue;  // collinear cluster cannot bound an area
        PoiPolygon poly;
        poly.poi_id = "baseline_" + std::to_string(emitted.size());
        poly.ring = *hull;
        poly.names = {*best};
        poly.member_count = clusters[c].size();
        poly.stage = PolygonStage::baseline;
        emitted.push_back(std::move(poly));
    }

    // low tf-idf threshold admits one name in several clusters; fold them
    std::map<std::string, std::vector<size_t>> by_name;
    for (size_t i = 0; i < emitted.size(); ++i)
        by_name[emitted[i].names[0]].push_back(i);
    for (const auto& [name, idxs] : by_name) {
        if (idxs.size() == 1) {
            out.push_back(emitted[idxs[0]]);
            continue;
        }
        std::vector<LatLng> all_pts;
        size_t member_count = 0;
        for (size_t i : idxs) {
            const auto& ring = emitted[i].ring;
            all_pts.insert(all_pts.end(), ring.begin(), ring.end() - 1);
            member_count += emitted[i].member_count;
        }
        auto hull = convex_hull(all_pts);
        if (!hull) continue;
        PoiPolygon poly = emitted[idxs[0]];
        poly.ring = *hull;
        poly.member_count = member_count;
        out.push_back(std::move(poly));
    }
    std::sort(out.begin(), out.end(),
              [](const PoiPolygon& a, const PoiPolygon& b) {
                  return a.poi_id < b.poi_id;
              });
    return out;
}

}  // namespace poiforge
