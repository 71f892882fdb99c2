#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "poiforge/config.hpp"
#include "poiforge/embed.hpp"
#include "poiforge/geo.hpp"
#include "poiforge/partition.hpp"
#include "poiforge/types.hpp"

namespace poiforge {

enum class ClusterStage { homogeneous, dbscan_refined, name_merged };

inline const char* to_string(ClusterStage s) {
    switch (s) {
        case ClusterStage::homogeneous: return "homogeneous";
        case ClusterStage::dbscan_refined: return "dbscan_refined";
        case ClusterStage::name_merged: return "name_merged";
    }
    return "?";
}

struct CandidateCluster {
    std::vector<std::string> member_ids;
    std::vector<size_t> member_rows;  // indices into the address list
    std::vector<LatLng> locations;
    std::vector<std::vector<double>> embeddings;
    std::vector<double> median_centroid;
    LatLng location_centroid;
    ClusterStage stage = ClusterStage::homogeneous;
    std::vector<std::string> names;  // filled by the name-merge stage
};

inline void derive_centroids(CandidateCluster& c) {
    std::vector<const std::vector<double>*> refs;
    refs.reserve(c.embeddings.size());
    for (const auto& e : c.embeddings) refs.push_back(&e);
    c.median_centroid = median_vector(refs);
    c.location_centroid = centroid_of(c.locations);
}

/// Per-bin feature matrix: rows sorted by address_id, laid out
/// (λ·lat_norm, λ·lng_norm, v₁..v_dim).
struct BinFeatures {
    std::vector<std::string> ids;     // ascending address_id
    std::vector<size_t> record_rows;  // parallel, into the address list
    std::vector<std::vector<double>> features;
};

inline BinFeatures build_features(const GeoBin& bin,
                                  const std::vector<AddressRecord>& records,
                                  double lambda) {
    BinFeatures out;
    out.record_rows = bin.member_idx;
    std::sort(out.record_rows.begin(), out.record_rows.end(),
              [&](size_t a, size_t b) {
                  return records[a].address_id < records[b].address_id;
              });
    out.ids.reserve(out.record_rows.size());
    out.features.reserve(out.record_rows.size());
    for (size_t row : out.record_rows) {
        const AddressRecord& r = records[row];
        if (!r.embedding)
            throw std::runtime_error("address " + r.address_id +
                                     " has no embedding");
        double lat_n = bin.lat_std > 0.0 ? (r.lat - bin.lat_mean) / bin.lat_std
                                         : 0.0;
        double lng_n = bin.lng_std > 0.0 ? (r.lng - bin.lng_mean) / bin.lng_std
                                         : 0.0;
        std::vector<double> f;
        f.reserve(r.embedding->size() + 2);
        f.push_back(lambda * lat_n);
        f.push_back(lambda * lng_n);
        f.insert(f.end(), r.embedding->begin(), r.embedding->end());
        out.ids.push_back(r.address_id);
        out.features.push_back(std::move(f));
    }
    return out;
}

/// Merge i joins nodes a and b into node n_leaves + i. Leaves are
/// 0..n_leaves-1 in feature order. Heights are nondecreasing (single
/// linkage is monotone).
struct Dendrogram {
    size_t n_leaves = 0;
    struct Merge {
        int a = 0, b = 0;
        double height = 0.0;
    };
    std::vector<Merge> merges;
};

/// Agglomerative single linkage, Euclidean metric, O(n²) via the
/// min-update rule. The merge height is always a minimum over original
/// pairwise distances, never derived arithmetic, so results are bit-exact
/// against brute force. Ties pick the pair whose (smaller min-leaf, larger
/// min-leaf) key is lexicographically least.
inline Dendrogram single_linkage(
    const std::vector<std::vector<double>>& features) {
    const size_t n = features.size();
    if (n == 0) throw std::invalid_argument("single_linkage: no features");
    Dendrogram d;
    d.n_leaves = n;
    if (n == 1) return d;

    std::vector<double> dist(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            const auto& a = features[i];
            const auto& b = features[j];
            if (a.size() != b.size())
                throw std::invalid_argument("single_linkage: ragged features");
            double s = 0.0;
            for (size_t k = 0; k < a.size(); ++k) {
                double diff = a[k] - b[k];
                s += diff * diff;
            }
            dist[i * n + j] = dist[j * n + i] = std::sqrt(s);
        }

    std::vector<int> node(n);       // current node id of slot i
    std::vector<int> min_leaf(n);   // smallest leaf index under that node
    std::vector<bool> alive(n, true);
    for (size_t i = 0; i < n; ++i) {
        node[i] = static_cast<int>(i);
        min_leaf[i] = static_cast<int>(i);
    }

    d.merges.reserve(n - 1);
    for (size_t step = 0; step + 1 < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        int best_lo = -1, best_hi = -1;
        size_t bi = 0, bj = 0;
        for (size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (size_t j = i + 1; j < n; ++j) {
                if (!alive[j]) continue;
                double v = dist[i * n + j];
                int lo = std::min(min_leaf[i], min_leaf[j]);
                int hi = std::max(min_leaf[i], min_leaf[j]);
                if (v < best ||
                    (v == best &&
                     (lo < best_lo || (lo == best_lo && hi < best_hi)))) {
                    best = v;
                    best_lo = lo;
                    best_hi = hi;
                    bi = i;
                    bj = j;
                }
            }
        }
        d.merges.push_back({node[bi], node[bj], best});
        // slot bi absorbs bj; single-link distance is the plain minimum
        for (size_t k = 0; k < n; ++k) {
            if (!alive[k] || k == bi || k == bj) continue;
            double v = std::min(dist[bi * n + k], dist[bj * n + k]);
            dist[bi * n + k] = dist[k * n + bi] = v;
        }
        alive[bj] = false;
        node[bi] = static_cast<int>(n + step);
        min_leaf[bi] = std::min(min_leaf[bi], min_leaf[bj]);
    }
    return d;
}

/// ≥ homogeneity_fraction of members must sit within the cosine threshold
/// of the coordinate-wise median centroid. The flag flips the measure to
/// literal cosine distance (1 - similarity) for the sensitivity study.
inline bool is_homogeneous(const std::vector<const std::vector<double>*>& embs,
                           const PipelineConfig& cfg) {
    if (embs.empty()) return false;
    std::vector<double> centroid = median_vector(embs);
    size_t count = 0;
    for (const auto* e : embs) {
        double sim = cosine_similarity(*e, centroid);
        double measure = cfg.cosine_use_distance ? 1.0 - sim : sim;
        if (measure >= cfg.cosine_similarity_threshold) ++count;
    }
    return static_cast<double>(count) + 1e-9 >=
           cfg.homogeneity_fraction * static_cast<double>(embs.size());
}

namespace detail {

inline void collect_leaves(const Dendrogram& d, int node,
                           std::vector<int>& out) {
    const int n = static_cast<int>(d.n_leaves);
    if (node < n) {
        out.push_back(node);
        return;
    }
    const auto& m = d.merges[static_cast<size_t>(node - n)];
    collect_leaves(d, m.a, out);
    collect_leaves(d, m.b, out);
}

}  // namespace detail

/// Top-down sweep from the dendrogram root: a node that is big enough and
/// homogeneous is emitted whole and its subtree skipped; otherwise both
/// children are tried. Emitted clusters are the maximal homogeneous nodes.
inline std::vector<CandidateCluster> extract_homogeneous(
    const Dendrogram& d, const BinFeatures& members,
    const std::vector<AddressRecord>& records, const PipelineConfig& cfg) {
    std::vector<CandidateCluster> out;
    if (d.n_leaves == 0) return out;
    const int n = static_cast<int>(d.n_leaves);
    const int root = d.merges.empty()
                         ? 0
                         : n + static_cast<int>(d.merges.size()) - 1;

    std::vector<int> stack = {root};
    std::vector<int> leaves;
    while (!stack.empty()) {
        int node = stack.back();
        stack.pop_back();
        leaves.clear();
        detail::collect_leaves(d, node, leaves);
        std::sort(leaves.begin(), leaves.end());
        bool qualifies = false;
        if (static_cast<int>(leaves.size()) >= cfg.min_cluster_size) {
            std::vector<const std::vector<double>*> embs;
            embs.reserve(leaves.size());
            for (int leaf : leaves)
                embs.push_back(&*records[members.record_rows[leaf]].embedding);
            qualifies = is_homogeneous(embs, cfg);
        }
        if (qualifies) {
            CandidateCluster c;
            c.stage = ClusterStage::homogeneous;
            for (int leaf : leaves) {
                size_t row = members.record_rows[leaf];
                c.member_ids.push_back(members.ids[leaf]);
                c.member_rows.push_back(row);
                c.locations.push_back(records[row].location());
                c.embeddings.push_back(*records[row].embedding);
            }
            derive_centroids(c);
            out.push_back(std::move(c));
        } else if (node >= n) {
            const auto& m = d.merges[static_cast<size_t>(node - n)];
            // push b then a, so a (the earlier side) is processed first
            stack.push_back(m.b);
            stack.push_back(m.a);
        }
    }
    return out;
}

/// Classic DBSCAN over member locations, meters, projection at the cluster
/// centroid. Core = at least dbscan_min_neighbours points within eps,
/// excluding the point itself unless dbscan_count_self. Scan order is
/// ascending address_id; border points stay with the first cluster that
/// reaches them. Noise is dropped.
inline std::vector<CandidateCluster> dbscan_refine(const CandidateCluster& in,
                                                   const PipelineConfig& cfg) {
    const size_t n = in.member_ids.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return in.member_ids[a] < in.member_ids[b];
    });

    LocalProjection proj(in.location_centroid);
    std::vector<XY> pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = proj.forward(in.locations[i]);

    const double eps2 = cfg.dbscan_eps_m * cfg.dbscan_eps_m;
    auto neighbours = [&](size_t p) {
        std::vector<size_t> out;
        for (size_t q : order) {
            if (q == p && !cfg.dbscan_count_self) continue;
            double dx = pts[p].x - pts[q].x, dy = pts[p].y - pts[q].y;
            if (dx * dx + dy * dy <= eps2) out.push_back(q);
        }
        return out;
    };

    constexpr int kUnvisited = -2, kNoise = -1;
    std::vector<int> label(n, kUnvisited);
    int next_cluster = 0;
    for (size_t p : order) {
        if (label[p] != kUnvisited) continue;
        std::vector<size_t> nb = neighbours(p);
        if (static_cast<int>(nb.size()) < cfg.dbscan_min_neighbours) {
            label[p] = kNoise;
            continue;
        }
        const int cid = next_cluster++;
        label[p] = cid;
        std::deque<size_t> seeds(nb.begin(), nb.end());
        while (!seeds.empty()) {
            size_t q = seeds.front();
            seeds.pop_front();
            if (label[q] == kNoise) label[q] = cid;  // rescued as border
            if (label[q] != kUnvisited) continue;
            label[q] = cid;
            std::vector<size_t> nq = neighbours(q);
            if (static_cast<int>(nq.size()) >= cfg.dbscan_min_neighbours)
                for (size_t r : nq) seeds.push_back(r);
        }
    }

    std::vector<CandidateCluster> out(static_cast<size_t>(next_cluster));
    for (size_t p : order) {
        if (label[p] < 0) continue;
        CandidateCluster& c = out[static_cast<size_t>(label[p])];
        c.member_ids.push_back(in.member_ids[p]);
        c.member_rows.push_back(in.member_rows[p]);
        c.locations.push_back(in.locations[p]);
        c.embeddings.push_back(in.embeddings[p]);
    }
    for (auto& c : out) {
        c.stage = ClusterStage::dbscan_refined;
        derive_centroids(c);
    }
    return out;
}

}  // namespace poiforge
