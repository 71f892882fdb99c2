#pragma once

#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "poiforge/config.hpp"
#include "poiforge/geohash.hpp"
#include "poiforge/types.hpp"

namespace poiforge {

/// Orders bins by (geohash, row, col); this ordering fixes the bin
/// processing sequence everywhere downstream.
struct BinKey {
    std::string geohash;
    int row = 0;
    int col = 0;

    bool operator<(const BinKey& o) const {
        return std::tie(geohash, row, col) <
               std::tie(o.geohash, o.row, o.col);
    }
    bool operator==(const BinKey& o) const {
        return geohash == o.geohash && row == o.row && col == o.col;
    }

    std::string to_string() const {
        return geohash + "_" + std::to_string(row) + "_" + std::to_string(col);
    }
};

/// One cell of the per-tile grid. The grid spans the min/max coordinates of
/// the tile's own members, not the geohash cell bounds, so it adapts to
/// where the addresses actually are. Normalization stats are per bin,
/// population variance.
struct GeoBin {
    BinKey key;
    double lat_min = 0.0, lat_max = 0.0;
    double lng_min = 0.0, lng_max = 0.0;
    std::vector<size_t> member_idx;  // indices into the record list, input order
    double lat_mean = 0.0, lat_std = 0.0;
    double lng_mean = 0.0, lng_std = 0.0;
};

namespace detail {

inline int grid_slot(double v, double lo, double hi, int g) {
    if (!(hi > lo)) return 0;  // degenerate axis collapses to slot 0
    int slot = static_cast<int>((v - lo) / (hi - lo) * g);
    if (slot >= g) slot = g - 1;  // max edge belongs to the last row/col
    if (slot < 0) slot = 0;
    return slot;
}

}  // namespace detail

/// Groups addresses by geohash, lays a bin_grid x bin_grid linear grid over
/// each tile's member extent, and drops bins too small to ever yield a
/// retained cluster. Returned bins are sorted by key.
inline std::vector<GeoBin> make_bins(const std::vector<AddressRecord>& records,
                                     const PipelineConfig& cfg) {
    std::map<std::string, std::vector<size_t>> tiles;
    for (size_t i = 0; i < records.size(); ++i)
        tiles[geohash_encode(records[i].lat, records[i].lng,
                             cfg.geohash_precision)]
            .push_back(i);

    const int g = cfg.bin_grid;
    std::map<BinKey, GeoBin> bins;
    for (const auto& [hash, idx] : tiles) {
        double lat_lo = records[idx[0]].lat, lat_hi = lat_lo;
        double lng_lo = records[idx[0]].lng, lng_hi = lng_lo;
        for (size_t i : idx) {
            lat_lo = std::min(lat_lo, records[i].lat);
            lat_hi = std::max(lat_hi, records[i].lat);
            lng_lo = std::min(lng_lo, records[i].lng);
            lng_hi = std::max(lng_hi, records[i].lng);
        }
        double lat_step = (lat_hi - lat_lo) / g, lng_step = (lng_hi - lng_lo) / g;
        for (size_t i : idx) {
            BinKey key{hash,
                       detail::grid_slot(records[i].lat, lat_lo, lat_hi, g),
                       detail::grid_slot(records[i].lng, lng_lo, lng_hi, g)};
            GeoBin& bin = bins[key];
            if (bin.member_idx.empty()) {
                bin.key = key;
                bin.lat_min = lat_lo + key.row * lat_step;
                bin.lat_max = lat_lo + (key.row + 1) * lat_step;
                bin.lng_min = lng_lo + key.col * lng_step;
                bin.lng_max = lng_lo + (key.col + 1) * lng_step;
            }
            bin.member_idx.push_back(i);
        }
    }

    std::vector<GeoBin> out;
    for (auto& [key, bin] : bins) {
        if (static_cast<int>(bin.member_idx.size()) < cfg.min_cluster_size)
            continue;
        double lat_sum = 0.0, lng_sum = 0.0;
        for (size_t i : bin.member_idx) {
            lat_sum += records[i].lat;
            lng_sum += records[i].lng;
        }
        const double n = static_cast<double>(bin.member_idx.size());
        bin.lat_mean = lat_sum / n;
        bin.lng_mean = lng_sum / n;
        // a constant axis must come out exactly 0, not mean-rounding residue
        double lat_var = 0.0, lng_var = 0.0;
        bool lat_const = true, lng_const = true;
        for (size_t i : bin.member_idx) {
            lat_var += (records[i].lat - bin.lat_mean) * (records[i].lat - bin.lat_mean);
            lng_var += (records[i].lng - bin.lng_mean) * (records[i].lng - bin.lng_mean);
            lat_const = lat_const && records[i].lat == records[bin.member_idx[0]].lat;
            lng_const = lng_const && records[i].lng == records[bin.member_idx[0]].lng;
        }
        bin.lat_std = lat_const ? 0.0 : std::sqrt(lat_var / n);
        bin.lng_std = lng_const ? 0.0 : std::sqrt(lng_var / n);
        out.push_back(std::move(bin));
    }
    return out;
}

/// Mean-0, std-1 per axis over the bin's members; a zero-variance axis maps
/// to all zeros.
inline std::vector<std::pair<double, double>> normalize_locations(
    const GeoBin& bin, const std::vector<AddressRecord>& records) {
    std::vector<std::pair<double, double>> out;
    out.reserve(bin.member_idx.size());
    for (size_t i : bin.member_idx) {
        double la = bin.lat_std > 0.0
                        ? (records[i].lat - bin.lat_mean) / bin.lat_std
                        : 0.0;
        double lo = bin.lng_std > 0.0
                        ? (records[i].lng - bin.lng_mean) / bin.lng_std
                        : 0.0;
        out.emplace_back(la, lo);
    }
    return out;
}

}  // namespace poiforge
