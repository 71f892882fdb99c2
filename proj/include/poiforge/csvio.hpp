#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "poiforge/geo.hpp"
#include "poiforge/types.hpp"

namespace poiforge {

namespace detail {

/// One RFC-4180 record, possibly spanning multiple physical lines when a
/// quoted field contains newlines. Returns false at end of stream.
/// `line_no` advances past every physical line consumed.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields,
                            size_t& line_no) {
    fields.clear();
    std::string line;
    if (!std::getline(in, line)) return false;
    ++line_no;
    std::string field;
    bool quoted = false;
    size_t i = 0;
    while (true) {
        if (i == line.size()) {
            if (!quoted) break;
            if (!std::getline(in, line))
                throw std::runtime_error("unterminated quoted field at line " +
                                         std::to_string(line_no));
            ++line_no;
            field += '\n';
            i = 0;
            continue;
        }
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
                ++i;
                continue;
            }
            field += c;
            ++i;
        } else if (c == '"' && field.empty()) {
            quoted = true;
            ++i;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
            ++i;
        } else if (c == '\r' && i + 1 == line.size()) {
            ++i;  // CRLF input
        } else {
            field += c;
            ++i;
        }
    }
    fields.push_back(field);
    return true;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline double parse_coord(const std::string& s, const char* what,
                          size_t line_no) {
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("bad ") + what + " at line " +
                                 std::to_string(line_no) + ": '" + s + "'");
    }
    if (used != s.size())
        throw std::runtime_error(std::string("bad ") + what + " at line " +
                                 std::to_string(line_no) + ": '" + s + "'");
    return v;
}

}  // namespace detail

/// Strict 4-column address reader: header `address_id,lat,lng,text`,
/// validated coordinates, ids unique. Errors carry the offending line.
inline std::vector<AddressRecord> load_addresses(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open address file: " + path);
    size_t line_no = 0;
    std::vector<std::string> fields;
    if (!detail::read_csv_record(in, fields, line_no) ||
        fields != std::vector<std::string>{"address_id", "lat", "lng", "text"})
        throw std::runtime_error(
            "address file must start with header address_id,lat,lng,text");

    std::vector<AddressRecord> out;
    std::unordered_set<std::string> seen;
    while (detail::read_csv_record(in, fields, line_no)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != 4)
            throw std::runtime_error("expected 4 fields at line " +
                                     std::to_string(line_no));
        AddressRecord rec;
        rec.address_id = fields[0];
        if (rec.address_id.empty())
            throw std::runtime_error("empty address_id at line " +
                                     std::to_string(line_no));
        if (!seen.insert(rec.address_id).second)
            throw std::runtime_error("duplicate address_id '" +
                                     rec.address_id + "' at line " +
                                     std::to_string(line_no));
        rec.lat = detail::parse_coord(fields[1], "lat", line_no);
        rec.lng = detail::parse_coord(fields[2], "lng", line_no);
        if (!valid_coordinate(rec.lat, rec.lng))
            throw std::runtime_error("invalid coordinate at line " +
                                     std::to_string(line_no));
        rec.raw_text = fields[3];
        out.push_back(std::move(rec));
    }
    return out;
}

inline void save_addresses(const std::vector<AddressRecord>& records,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write address file: " + path);
    out << "address_id,lat,lng,text\n";
    char buf[64];
    for (const AddressRecord& r : records) {
        std::snprintf(buf, sizeof(buf), ",%.9f,%.9f,", r.lat, r.lng);
        out << detail::csv_escape(r.address_id) << buf
            << detail::csv_escape(r.raw_text) << "\n";
    }
}

/// Six-column variant produced by the preprocess step and consumed by later
/// subcommands, carrying both preprocessing outputs alongside the input.
inline void save_processed(const std::vector<AddressRecord>& records,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write processed file: " + path);
    out << "address_id,lat,lng,text,clean_text,mined_text\n";
    char buf[64];
    for (const AddressRecord& r : records) {
        std::snprintf(buf, sizeof(buf), ",%.9f,%.9f,", r.lat, r.lng);
        out << detail::csv_escape(r.address_id) << buf
            << detail::csv_escape(r.raw_text) << ","
            << detail::csv_escape(r.clean_text) << ","
            << detail::csv_escape(r.mined_text) << "\n";
    }
}

inline std::vector<AddressRecord> load_processed(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open processed file: " + path);
    size_t line_no = 0;
    std::vector<std::string> fields;
    if (!detail::read_csv_record(in, fields, line_no) ||
        fields != std::vector<std::string>{"address_id", "lat", "lng", "text",
                                           "clean_text", "mined_text"})
        throw std::runtime_error(
            "processed file must start with header "
            "address_id,lat,lng,text,clean_text,mined_text");
    std::vector<AddressRecord> out;
    std::unordered_set<std::string> seen;
    while (detail::read_csv_record(in, fields, line_no)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != 6)
            throw std::runtime_error("expected 6 fields at line " +
                                     std::to_string(line_no));
        AddressRecord rec;
        rec.address_id = fields[0];
        if (rec.address_id.empty() || !seen.insert(rec.address_id).second)
            throw std::runtime_error("bad or duplicate address_id at line " +
                                     std::to_string(line_no));
        rec.lat = detail::parse_coord(fields[1], "lat", line_no);
        rec.lng = detail::parse_coord(fields[2], "lng", line_no);
        if (!valid_coordinate(rec.lat, rec.lng))
            throw std::runtime_error("invalid coordinate at line " +
                                     std::to_string(line_no));
        rec.raw_text = fields[3];
        rec.clean_text = fields[4];
        rec.mined_text = fields[5];
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace poiforge
