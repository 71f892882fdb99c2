#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "poiforge/cluster.hpp"
#include "poiforge/config.hpp"
#include "poiforge/text.hpp"
#include "poiforge/types.hpp"

namespace poiforge {

struct NameCandidate {
    std::string ngram;
    double support = 0.0;  // fraction of member addresses containing it
};

namespace detail {

inline void address_ngrams(const std::string& mined_text,
                           const std::vector<int>& sizes,
                           std::unordered_set<std::string>& out) {
    std::vector<std::string> toks = tokenize(mined_text);
    for (int n : sizes) {
        if (n <= 0 || static_cast<size_t>(n) > toks.size()) continue;
        for (size_t i = 0; i + n <= toks.size(); ++i) {
            std::string g = toks[i];
            for (size_t k = 1; k < static_cast<size_t>(n); ++k)
                g += " " + toks[i + k];
            out.insert(std::move(g));
        }
    }
}

inline int token_count(const std::string& s) {
    if (s.empty()) return 0;
    return 1 + static_cast<int>(std::count(s.begin(), s.end(), ' '));
}

}  // namespace detail

/// N-grams present (document frequency, counted once per address) in at
/// least hcn_support of the cluster's mined texts. Sorted by support
/// descending, then more tokens first, then lexicographic.
inline std::vector<NameCandidate> extract_high_confidence_names(
    const CandidateCluster& cluster, const std::vector<AddressRecord>& records,
    const PipelineConfig& cfg) {
    const size_t n = cluster.member_rows.size();
    std::vector<NameCandidate> out;
    if (n == 0) return out;
    std::unordered_map<std::string, size_t> presence;
    std::unordered_set<std::string> per_address;
    for (size_t row : cluster.member_rows) {
        per_address.clear();
        detail::address_ngrams(records[row].mined_text, cfg.ngram_sizes,
                               per_address);
        for (const std::string& g : per_address) ++presence[g];
    }
    for (const auto& [g, count] : presence) {
        if (static_cast<double>(count) + 1e-9 >=
            cfg.hcn_support * static_cast<double>(n))
            out.push_back({g, static_cast<double>(count) /
                                  static_cast<double>(n)});
    }
    std::sort(out.begin(), out.end(),
              [](const NameCandidate& a, const NameCandidate& b) {
                  if (a.support != b.support) return a.support > b.support;
                  int ta = detail::token_count(a.ngram);
                  int tb = detail::token_count(b.ngram);
                  if (ta != tb) return ta > tb;
                  return a.ngram < b.ngram;
              });
    return out;
}

/// Splits clusters into high and low confidence name clusters. HCNCs get
/// their names filled in candidate order.
inline std::pair<std::vector<CandidateCluster>, std::vector<CandidateCluster>>
classify_clusters(std::vector<CandidateCluster> clusters,
                  const std::vector<AddressRecord>& records,
                  const PipelineConfig& cfg) {
    std::vector<CandidateCluster> hcnc, lcnc;
    for (auto& c : clusters) {
        std::vector<NameCandidate> names =
            extract_high_confidence_names(c, records, cfg);
        if (names.empty()) {
            c.names.clear();
            lcnc.push_back(std::move(c));
        } else {
            c.names.clear();
            for (const auto& nc : names) c.names.push_back(nc.ngram);
            hcnc.push_back(std::move(c));
        }
    }
    return {std::move(hcnc), std::move(lcnc)};
}

struct HomonymEdge {
    size_t a = 0, b = 0;  // indices into the HCNC list
    std::string name_a, name_b;
    int edit_dist = 0;
    double centroid_dist_m = 0.0;
};

struct HomonymGraph {
    size_t n_nodes = 0;
    std::vector<HomonymEdge> edges;
};

/// Edge iff some name pair matches within the edit threshold and the
/// cluster centroids are within the distance threshold (strict). The
/// recorded witness is the first qualifying pair in name-list order.
inline HomonymGraph build_homonym_graph(
    const std::vector<CandidateCluster>& hcncs, const PipelineConfig& cfg) {
    HomonymGraph g;
    g.n_nodes = hcncs.size();
    for (size_t i = 0; i < hcncs.size(); ++i) {
        for (size_t j = i + 1; j < hcncs.size(); ++j) {
            double dist = distance_m(hcncs[i].location_centroid,
                                     hcncs[j].location_centroid);
            if (!(dist < cfg.hcn_centroid_dist_m)) continue;
            bool found = false;
            HomonymEdge e;
            for (const std::string& na : hcncs[i].names) {
                for (const std::string& nb : hcncs[j].names) {
                    int ed = edit_distance(na, nb);
                    if (ed <= cfg.hcn_edit_distance) {
                        e = {i, j, na, nb, ed, dist};
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
            if (found) g.edges.push_back(std::move(e));
        }
    }
    return g;
}

/// DFS over the homonym graph; every component unions its member sets into
/// one cluster with recomputed centroids and re-extracted names. Singleton
/// components and all LCNCs pass through untouched.
inline std::vector<CandidateCluster> merge_components(
    const HomonymGraph& graph, const std::vector<CandidateCluster>& hcncs,
    const std::vector<CandidateCluster>& lcncs,
    const std::vector<AddressRecord>& records, const PipelineConfig& cfg) {
    std::vector<std::vector<size_t>> adj(graph.n_nodes);
    for (const auto& e : graph.edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }

    std::vector<CandidateCluster> out;
    std::vector<bool> seen(graph.n_nodes, false);
    for (size_t start = 0; start < graph.n_nodes; ++start) {
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
            out.push_back(hcncs[start]);
            continue;
        }
        CandidateCluster merged;
        merged.stage = ClusterStage::name_merged;
        for (size_t u : component) {
            const CandidateCluster& c = hcncs[u];
            for (size_t k = 0; k < c.member_rows.size(); ++k) {
                merged.member_ids.push_back(c.member_ids[k]);
                merged.member_rows.push_back(c.member_rows[k]);
                merged.locations.push_back(c.locations[k]);
                merged.embeddings.push_back(c.embeddings[k]);
            }
        }
        // re-sort by address_id so the merged order is canonical
        std::vector<size_t> perm(merged.member_ids.size());
        for (size_t k = 0; k < perm.size(); ++k) perm[k] = k;
        std::sort(perm.begin(), perm.end(), [&](size_t a, size_t b) {
            return merged.member_ids[a] < merged.member_ids[b];
        });
        CandidateCluster sorted;
        sorted.stage = merged.stage;
        for (size_t k : perm) {
            sorted.member_ids.push_back(std::move(merged.member_ids[k]));
            sorted.member_rows.push_back(merged.member_rows[k]);
            sorted.locations.push_back(merged.locations[k]);
            sorted.embeddings.push_back(std::move(merged.embeddings[k]));
        }
        derive_centroids(sorted);
        for (const auto& nc :
             extract_high_confidence_names(sorted, records, cfg))
            sorted.names.push_back(nc.ngram);
        out.push_back(std::move(sorted));
    }
    for (const auto& c : lcncs) out.push_back(c);
    return out;
}

/// The whole step 3: classify, link homonyms, merge components.
inline std::vector<CandidateCluster> merge_homonyms(
    std::vector<CandidateCluster> clusters,
    const std::vector<AddressRecord>& records, const PipelineConfig& cfg) {
    auto [hcnc, lcnc] = classify_clusters(std::move(clusters), records, cfg);
    HomonymGraph graph = build_homonym_graph(hcnc, cfg);
    return merge_components(graph, hcnc, lcnc, records, cfg);
}

}  // namespace poiforge
