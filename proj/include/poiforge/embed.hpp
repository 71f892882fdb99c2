#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "poiforge/text.hpp"

namespace poiforge {

namespace detail {

inline uint64_t fnv1a64(const char* data, size_t n, uint64_t seed = 0) {
    uint64_t h = 14695981039346656037ULL ^ seed;
    for (size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

/// Hashed character-trigram text embedder. It is not a learned model; it is
/// a deterministic stand-in with the one property the pipeline needs from an
/// encoder: near-identical strings land near each other in cosine space and
/// unrelated strings do not. Each token is padded to "^token$", every
/// trigram is FNV-hashed into one of `dim` signed buckets, and the sum is
/// L2-normalized. An all-filtered (empty) text embeds to the zero vector.
class TrigramEmbedder {
public:
    explicit TrigramEmbedder(int dim) : dim_(dim) {
        if (dim_ < 1) throw std::invalid_argument("embedding dim must be >= 1");
    }

    int dim() const { return dim_; }

    std::vector<double> embed(const std::string& text) const {
        std::vector<double> v(static_cast<size_t>(dim_), 0.0);
        for (const std::string& tok : tokenize(text)) {
            std::string padded = "^" + tok + "$";
            for (size_t i = 0; i + 3 <= padded.size(); ++i) {
                uint64_t h = detail::fnv1a64(padded.data() + i, 3);
                size_t bucket = static_cast<size_t>(h % static_cast<uint64_t>(dim_));
                double sign = (h >> 63) ? -1.0 : 1.0;
                v[bucket] += sign;
            }
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
        }
        return v;
    }

private:
    int dim_;
};

inline double cosine_similarity(const std::vector<double>& a,
                                const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Coordinate-wise median of a set of vectors; even-sized coordinates take
/// the lower median so the result never depends on summation order.
inline std::vector<double> median_vector(
    const std::vector<const std::vector<double>*>& vecs) {
    if (vecs.empty()) return {};
    const size_t dim = vecs[0]->size();
    std::vector<double> out(dim, 0.0);
    std::vector<double> col(vecs.size());
    for (size_t d = 0; d < dim; ++d) {
        for (size_t i = 0; i < vecs.size(); ++i) col[i] = (*vecs[i])[d];
        size_t mid = (col.size() - 1) / 2;
        std::nth_element(col.begin(), col.begin() + mid, col.end());
        out[d] = col[mid];
    }
    return out;
}

/// Embedding files are JSONL: a {"dim": N} header line, then one
/// {"id": ..., "v": [...]} object per embedded record.
struct EmbeddingSet {
    int dim = 0;
    std::unordered_map<std::string, std::vector<double>> by_id;
};

inline EmbeddingSet load_embeddings(const std::string& path,
                                    int expected_dim = 0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embeddings file: " + path);
    EmbeddingSet set;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("embeddings line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
        if (set.dim == 0 && j.contains("dim")) {
            set.dim = j.at("dim").get<int>();
            if (set.dim < 1)
                throw std::runtime_error("embeddings header: dim must be >= 1");
            if (expected_dim > 0 && set.dim != expected_dim)
                throw std::runtime_error(
                    "embeddings dim " + std::to_string(set.dim) +
                    " does not match expected " + std::to_string(expected_dim));
            continue;
        }
        if (set.dim == 0)
            throw std::runtime_error(
                "embeddings file must start with a {\"dim\": N} header");
        std::string id;
        std::vector<double> v;
        try {
            const auto& jid = j.at("id");
            id = jid.is_string() ? jid.get<std::string>()
                                 : std::to_string(jid.get<long long>());
            v = j.at("v").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("embeddings line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
        if (static_cast<int>(v.size()) != set.dim)
            throw std::runtime_error("embedding for id '" + id +
                                     "' has length " + std::to_string(v.size()) +
                                     ", expected " + std::to_string(set.dim));
        if (!set.by_id.emplace(id, std::move(v)).second)
            throw std::runtime_error("duplicate embedding id '" + id +
                                     "' at line " + std::to_string(lineno));
    }
    if (set.dim == 0)
        throw std::runtime_error("embeddings file is empty: " + path);
    return set;
}

inline void save_embeddings(
    const std::vector<std::pair<std::string, std::vector<double>>>& rows,
    int dim, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write embeddings file: " + path);
    out << nlohmann::json{{"dim", dim}}.dump() << "\n";
    for (const auto& [id, v] : rows) {
        nlohmann::json j{{"id", id}, {"v", v}};
        out << j.dump() << "\n";
    }
}

}  // namespace poiforge
