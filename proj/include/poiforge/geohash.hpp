#pragma once

#include <stdexcept>
#include <string>

#include "poiforge/geo.hpp"

namespace poiforge {

namespace detail {
inline constexpr char kGeohashBase32[] = "0123456789bcdefghjkmnpqrstuvwxyz";

inline int geohash_char_value(char c) {
    for (int i = 0; i < 32; ++i)
        if (kGeohashBase32[i] == c) return i;
    return -1;
}
}  // namespace detail

/// Standard geohash: bits alternate longitude/latitude starting with
/// longitude, packed five per base32 character.
inline std::string geohash_encode(double lat, double lng, int precision) {
    if (precision < 1 || precision > 12)
        throw std::invalid_argument("geohash precision must be in [1,12]");
    if (!valid_coordinate(lat, lng))
        throw std::invalid_argument("geohash: coordinate out of range");
    double lat_lo = -90.0, lat_hi = 90.0, lng_lo = -180.0, lng_hi = 180.0;
    std::string out;
    out.reserve(static_cast<size_t>(precision));
    int bit = 0, value = 0;
    bool even = true;  // even bits slice longitude
    while (static_cast<int>(out.size()) < precision) {
        if (even) {
            double mid = (lng_lo + lng_hi) / 2.0;
            if (lng >= mid) {
                value = value * 2 + 1;
                lng_lo = mid;
            } else {
                value = value * 2;
                lng_hi = mid;
            }
        } else {
            double mid = (lat_lo + lat_hi) / 2.0;
            if (lat >= mid) {
                value = value * 2 + 1;
                lat_lo = mid;
            } else {
                value = value * 2;
                lat_hi = mid;
            }
        }
        even = !even;
        if (++bit == 5) {
            out.push_back(detail::kGeohashBase32[value]);
            bit = 0;
            value = 0;
        }
    }
    return out;
}

struct GeohashCell {
    double lat_min = 0.0, lat_max = 0.0;
    double lng_min = 0.0, lng_max = 0.0;
};

inline GeohashCell geohash_decode_cell(const std::string& hash) {
    if (hash.empty()) throw std::invalid_argument("geohash: empty string");
    double lat_lo = -90.0, lat_hi = 90.0, lng_lo = -180.0, lng_hi = 180.0;
    bool even = true;
    for (char c : hash) {
        int value = detail::geohash_char_value(c);
        if (value < 0)
            throw std::invalid_argument(std::string("geohash: bad character '") +
                                        c + "'");
        for (int b = 4; b >= 0; --b) {
            int bit = (value >> b) & 1;
            if (even) {
                double mid = (lng_lo + lng_hi) / 2.0;
                (bit ? lng_lo : lng_hi) = mid;
            } else {
                double mid = (lat_lo + lat_hi) / 2.0;
                (bit ? lat_lo : lat_hi) = mid;
            }
            even = !even;
        }
    }
    return GeohashCell{lat_lo, lat_hi, lng_lo, lng_hi};
}

}  // namespace poiforge
