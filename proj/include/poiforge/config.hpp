#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace poiforge {

/// Every tunable in the pipeline, with its default. A config file is a flat
/// JSON object using exactly these field names; unknown keys are rejected so
/// a typo cannot silently fall back to a default.
struct PipelineConfig {
    double location_scale = 10.0;
    int min_cluster_size = 10;
    double homogeneity_fraction = 0.9;
    double cosine_similarity_threshold = 0.9;
    double dbscan_eps_m = 10.0;
    int dbscan_min_neighbours = 5;
    std::vector<int> ngram_sizes = {2, 3, 4};
    double hcn_support = 0.7;
    int hcn_edit_distance = 1;
    double hcn_centroid_dist_m = 100.0;
    double polygon_merge_overlap = 0.7;
    int geohash_precision = 5;
    int bin_grid = 5;  // bins per axis within a geohash tile
    double osm_buffer_m = 5.0;
    double alg1_length_factor = 2.0;
    double alg2_encompass_area_factor = 1.5;
    double alg2_private_overlap = 0.2;
    double alg2_public_overlap = 0.5;
    double baseline_tp = 0.7;
    double baseline_tfidf = 0.1;
    int baseline_min_points = 15;
    int embedding_dim = 300;
    int top_words_count = 10;

    // Reconstructed/toggle knobs, defaults documented in the README.
    int bigram_min_count = 5;
    double baseline_cut_m = 30.0;
    bool dbscan_count_self = false;
    bool cosine_use_distance = false;
    std::string osm_stage_order = "buildings,circular,prune";
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_fraction(const char* key, double v) {
    if (!(v > 0.0 && v <= 1.0))
        throw ConfigError(std::string("config key '") + key +
                          "' must be in (0,1]");
}

inline void check_positive(const char* key, double v) {
    if (!(v > 0.0))
        throw ConfigError(std::string("config key '") + key +
                          "' must be > 0");
}

inline void check_count(const char* key, long long v, long long min = 1) {
    if (v < min)
        throw ConfigError(std::string("config key '") + key + "' must be >= " +
                          std::to_string(min));
}

}  // namespace detail

inline void validate_config(const PipelineConfig& c) {
    using namespace detail;
    if (c.location_scale < 0.0)
        throw ConfigError("config key 'location_scale' must be >= 0");
    check_count("min_cluster_size", c.min_cluster_size);
    check_fraction("homogeneity_fraction", c.homogeneity_fraction);
    check_fraction("cosine_similarity_threshold", c.cosine_similarity_threshold);
    check_positive("dbscan_eps_m", c.dbscan_eps_m);
    check_count("dbscan_min_neighbours", c.dbscan_min_neighbours);
    if (c.ngram_sizes.empty())
        throw ConfigError("config key 'ngram_sizes' must be non-empty");
    for (int n : c.ngram_sizes) check_count("ngram_sizes", n);
    check_fraction("hcn_support", c.hcn_support);
    check_count("hcn_edit_distance", c.hcn_edit_distance, 0);
    check_positive("hcn_centroid_dist_m", c.hcn_centroid_dist_m);
    check_fraction("polygon_merge_overlap", c.polygon_merge_overlap);
    check_count("geohash_precision", c.geohash_precision);
    check_count("bin_grid", c.bin_grid);
    check_positive("osm_buffer_m", c.osm_buffer_m);
    check_positive("alg1_length_factor", c.alg1_length_factor);
    check_positive("alg2_encompass_area_factor", c.alg2_encompass_area_factor);
    check_fraction("alg2_private_overlap", c.alg2_private_overlap);
    check_fraction("alg2_public_overlap", c.alg2_public_overlap);
    check_fraction("baseline_tp", c.baseline_tp);
    check_fraction("baseline_tfidf", c.baseline_tfidf);
    check_count("baseline_min_points", c.baseline_min_points);
    check_count("embedding_dim", c.embedding_dim);
    check_count("top_words_count", c.top_words_count);
    check_count("bigram_min_count", c.bigram_min_count);
    check_positive("baseline_cut_m", c.baseline_cut_m);
    std::string stage;
    std::stringstream stages(c.osm_stage_order);
    while (std::getline(stages, stage, ','))
        if (stage != "buildings" && stage != "circular" && stage != "prune")
            throw ConfigError("config key 'osm_stage_order' has unknown stage '" +
                              stage + "'");
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
    return nlohmann::json{
        {"location_scale", c.location_scale},
        {"min_cluster_size", c.min_cluster_size},
        {"homogeneity_fraction", c.homogeneity_fraction},
        {"cosine_similarity_threshold", c.cosine_similarity_threshold},
        {"dbscan_eps_m", c.dbscan_eps_m},
        {"dbscan_min_neighbours", c.dbscan_min_neighbours},
        {"ngram_sizes", c.ngram_sizes},
        {"hcn_support", c.hcn_support},
        {"hcn_edit_distance", c.hcn_edit_distance},
        {"hcn_centroid_dist_m", c.hcn_centroid_dist_m},
        {"polygon_merge_overlap", c.polygon_merge_overlap},
        {"geohash_precision", c.geohash_precision},
        {"bin_grid", c.bin_grid},
        {"osm_buffer_m", c.osm_buffer_m},
        {"alg1_length_factor", c.alg1_length_factor},
        {"alg2_encompass_area_factor", c.alg2_encompass_area_factor},
        {"alg2_private_overlap", c.alg2_private_overlap},
        {"alg2_public_overlap", c.alg2_public_overlap},
        {"baseline_tp", c.baseline_tp},
        {"baseline_tfidf", c.baseline_tfidf},
        {"baseline_min_points", c.baseline_min_points},
        {"embedding_dim", c.embedding_dim},
        {"top_words_count", c.top_words_count},
        {"bigram_min_count", c.bigram_min_count},
        {"baseline_cut_m", c.baseline_cut_m},
        {"dbscan_count_self", c.dbscan_count_self},
        {"cosine_use_distance", c.cosine_use_distance},
        {"osm_stage_order", c.osm_stage_order},
    };
}

/// Applies overrides from a flat JSON object onto defaults. Unknown keys and
/// out-of-range values raise ConfigError naming the key.
inline PipelineConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    PipelineConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const nlohmann::json& v = it.value();
        try {
            if (key == "location_scale") c.location_scale = v.get<double>();
            else if (key == "min_cluster_size") c.min_cluster_size = v.get<int>();
            else if (key == "homogeneity_fraction") c.homogeneity_fraction = v.get<double>();
            else if (key == "cosine_similarity_threshold") c.cosine_similarity_threshold = v.get<double>();
            else if (key == "dbscan_eps_m") c.dbscan_eps_m = v.get<double>();
            else if (key == "dbscan_min_neighbours") c.dbscan_min_neighbours = v.get<int>();
            else if (key == "ngram_sizes") c.ngram_sizes = v.get<std::vector<int>>();
            else if (key == "hcn_support") c.hcn_support = v.get<double>();
            else if (key == "hcn_edit_distance") c.hcn_edit_distance = v.get<int>();
            else if (key == "hcn_centroid_dist_m") c.hcn_centroid_dist_m = v.get<double>();
            else if (key == "polygon_merge_overlap") c.polygon_merge_overlap = v.get<double>();
            else if (key == "geohash_precision") c.geohash_precision = v.get<int>();
            else if (key == "bin_grid") c.bin_grid = v.get<int>();
            else if (key == "osm_buffer_m") c.osm_buffer_m = v.get<double>();
            else if (key == "alg1_length_factor") c.alg1_length_factor = v.get<double>();
            else if (key == "alg2_encompass_area_factor") c.alg2_encompass_area_factor = v.get<double>();
            else if (key == "alg2_private_overlap") c.alg2_private_overlap = v.get<double>();
            else if (key == "alg2_public_overlap") c.alg2_public_overlap = v.get<double>();
            else if (key == "baseline_tp") c.baseline_tp = v.get<double>();
            else if (key == "baseline_tfidf") c.baseline_tfidf = v.get<double>();
            else if (key == "baseline_min_points") c.baseline_min_points = v.get<int>();
            else if (key == "embedding_dim") c.embedding_dim = v.get<int>();
            else if (key == "top_words_count") c.top_words_count = v.get<int>();
            else if (key == "bigram_min_count") c.bigram_min_count = v.get<int>();
            else if (key == "baseline_cut_m") c.baseline_cut_m = v.get<double>();
            else if (key == "dbscan_count_self") c.dbscan_count_self = v.get<bool>();
            else if (key == "cosine_use_distance") c.cosine_use_distance = v.get<bool>();
            else if (key == "osm_stage_order") c.osm_stage_order = v.get<std::string>();
            else
                throw ConfigError("unknown config key '" + key + "'");
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config key '" + key + "' has the wrong type");
        }
    }
    validate_config(c);
    return c;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    // An empty (or whitespace-only) file means "all defaults".
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        return PipelineConfig{};
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    return config_from_json(j);
}

inline void save_config(const PipelineConfig& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << config_to_json(c).dump(2) << "\n";
}

}  // namespace poiforge
