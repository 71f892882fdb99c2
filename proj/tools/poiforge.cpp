// poiforge command line front end. Every subcommand is a thin wrapper over
// the library; all heavy lifting lives in the headers so the tests and the
// tool cannot drift apart.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poiforge/baseline.hpp"
#include "poiforge/config.hpp"
#include "poiforge/corpus.hpp"
#include "poiforge/csvio.hpp"
#include "poiforge/embed.hpp"
#include "poiforge/eval.hpp"
#include "poiforge/geojson.hpp"
#include "poiforge/osm.hpp"
#include "poiforge/pipeline.hpp"
#include "poiforge/synth.hpp"
#include "poiforge/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string addresses;
    std::string embeddings;
    std::string osm;
    std::string gt;
    std::string polygons;
    std::string localities;
    std::string city;
    std::string out_dir = ".";
    std::string stage_through;
    int workers = 1;
    bool with_baseline = false;
    json overrides = json::object();
};

// Flags mirror the config file keys one to one; a flag given on the command
// line wins over the same key in --config.
void add_config_flags(CLI::App* cmd, CommonArgs& a) {
    auto opt = [&a, cmd](const std::string& key, const char* help) {
        cmd->add_option_function<double>(
            "--" + key,
            [&a, key](const double& v) { a.overrides[key] = v; }, help);
    };
    auto opt_int = [&a, cmd](const std::string& key, const char* help) {
        cmd->add_option_function<int>(
            "--" + key, [&a, key](const int& v) { a.overrides[key] = v; },
            help);
    };
    opt("location_scale", "weight of normalized location vs embedding");
    opt_int("min_cluster_size", "minimum members per cluster");
    opt("homogeneity_fraction", "fraction near centroid for homogeneity");
    opt("cosine_similarity_threshold", "cosine cut for homogeneity");
    opt("dbscan_eps_m", "DBSCAN epsilon in meters");
    opt_int("dbscan_min_neighbours", "DBSCAN core point neighbour count");
    opt("hcn_support", "n-gram support fraction for confident names");
    opt_int("hcn_edit_distance", "max edit distance for homonym merge");
    opt("hcn_centroid_dist_m", "max centroid distance for homonym merge");
    opt("polygon_merge_overlap", "overlap fraction for polygon merge");
    opt_int("geohash_precision", "geohash cell precision");
    opt_int("bin_grid", "bins per axis inside a geohash cell");
    opt("osm_buffer_m", "buffer radius for OSM building union");
    opt("alg1_length_factor", "road length factor for pruning");
    opt("alg2_encompass_area_factor", "max loop/polygon area ratio");
    opt("alg2_private_overlap", "private loop overlap threshold");
    opt("alg2_public_overlap", "public loop overlap threshold");
    opt("baseline_tp", "baseline term purity threshold");
    opt("baseline_tfidf", "baseline TF-IDF threshold");
    opt_int("baseline_min_points", "baseline minimum cluster size");
    opt_int("embedding_dim", "reference embedder dimension");
    opt_int("top_words_count", "stop words taken per city");
    opt_int("bigram_min_count", "bigram dictionary support count");
    opt("baseline_cut_m", "baseline dendrogram cut height in meters");
}

poiforge::PipelineConfig resolve_config(const CommonArgs& a) {
    json merged = json::object();
    if (!a.config_path.empty()) {
        std::ifstream in(a.config_path);
        if (!in)
            throw poiforge::ConfigError("cannot open config file: " +
                                        a.config_path);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
            try {
                merged = json::parse(text);
            } catch (const json::exception& e) {
                throw poiforge::ConfigError(
                    std::string("config parse failure: ") + e.what());
            }
            if (!merged.is_object())
                throw poiforge::ConfigError("config must be a JSON object");
        }
    }
    for (auto it = a.overrides.begin(); it != a.overrides.end(); ++it)
        merged[it.key()] = it.value();
    return poiforge::config_from_json(merged);
}

int resolve_workers(int requested) {
    if (requested < 1) requested = 1;
    if (const char* env = std::getenv("POIFORGE_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1 && cap < requested) requested = cap;
    }
    return requested;
}

// city name and locality list from a "<city>.localities.txt" file
std::pair<std::string, std::vector<std::string>> read_localities(
    const std::string& path, const std::string& city_flag) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open localities file: " + path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (!line.empty()) names.push_back(line);
    }
    std::string city = city_flag;
    if (city.empty()) {
        city = fs::path(path).filename().string();
        const std::string suffix = ".localities.txt";
        if (city.size() > suffix.size() &&
            city.compare(city.size() - suffix.size(), suffix.size(),
                         suffix) == 0)
            city.resize(city.size() - suffix.size());
        else
            city = fs::path(city).stem().string();
    }
    return {city, names};
}

struct LoadedInputs {
    std::vector<poiforge::AddressRecord> records;
    std::optional<poiforge::EmbeddingSet> embeddings;
    std::optional<poiforge::OsmLayer> osm;
    std::vector<poiforge::PoiPolygon> gt;
    std::map<std::string, std::vector<std::string>> localities;
    std::string city;
    std::map<std::string, std::string> digests;
};

LoadedInputs load_inputs(const CommonArgs& a) {
    LoadedInputs in;
    in.city = a.city;
    if (a.addresses.empty())
        throw std::runtime_error("--addresses is required");
    in.records = poiforge::load_addresses(a.addresses);
    in.digests["addresses"] = poiforge::file_digest(a.addresses);
    if (!a.embeddings.empty()) {
        in.embeddings = poiforge::load_embeddings(a.embeddings);
        in.digests["embeddings"] = poiforge::file_digest(a.embeddings);
    }
    if (!a.osm.empty()) {
        in.osm = poiforge::load_osm(a.osm);
        in.digests["osm"] = poiforge::file_digest(a.osm);
    }
    if (!a.gt.empty()) {
        in.gt = poiforge::load_polygons(a.gt);
        in.digests["gt"] = poiforge::file_digest(a.gt);
    }
    if (!a.localities.empty()) {
        auto [city, names] = read_localities(a.localities, a.city);
        in.city = city;
        in.localities[city] = names;
        in.digests["localities"] = poiforge::file_digest(a.localities);
    }
    return in;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec && !fs::is_directory(dir))
        throw std::runtime_error("cannot create output directory: " + dir);
}

std::string out_path(const CommonArgs& a, const char* name) {
    return (fs::path(a.out_dir) / name).string();
}

void write_manifest(const poiforge::RunManifest& manifest,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << poiforge::manifest_to_json(manifest).dump(2) << "\n";
}

poiforge::CorpusStats stats_for(const LoadedInputs& in,
                                const poiforge::PipelineConfig& cfg) {
    std::vector<std::string> texts;
    texts.reserve(in.records.size());
    for (const auto& r : in.records) texts.push_back(r.raw_text);
    return poiforge::build_corpus_stats(texts, in.localities,
                                        cfg.bigram_min_count,
                                        cfg.top_words_count);
}

int cmd_stats_build(const CommonArgs& a) {
    auto cfg = resolve_config(a);
    auto in = load_inputs(a);
    ensure_out_dir(a.out_dir);
    poiforge::save_stats(stats_for(in, cfg), out_path(a, "stats.json"));
    std::cout << "wrote " << out_path(a, "stats.json") << "\n";
    return 0;
}

int cmd_preprocess(const CommonArgs& a) {
    auto cfg = resolve_config(a);
    auto in = load_inputs(a);
    ensure_out_dir(a.out_dir);
    auto stats = stats_for(in, cfg);
    for (auto& r : in.records) {
        r.clean_text = poiforge::vocabulary_preprocess(r.raw_text, stats);
        r.mined_text =
            poiforge::specialized_preprocess(r.clean_text, stats, in.city);
    }
    poiforge::save_processed(in.records, out_path(a, "processed.csv"));
    std::cout << "wrote " << out_path(a, "processed.csv") << "\n";
    return 0;
}

int cmd_embed(const CommonArgs& a) {
    auto cfg = resolve_config(a);
    auto in = load_inputs(a);
    ensure_out_dir(a.out_dir);
    auto stats = stats_for(in, cfg);
    poiforge::TrigramEmbedder embedder(cfg.embedding_dim);
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    rows.reserve(in.records.size());
    for (auto& r : in.records) {
        r.clean_text = poiforge::vocabulary_preprocess(r.raw_text, stats);
        r.mined_text =
            poiforge::specialized_preprocess(r.clean_text, stats, in.city);
        rows.emplace_back(r.address_id, embedder.embed(r.mined_text));
    }
    poiforge::save_embeddings(rows, cfg.embedding_dim,
                              out_path(a, "embeddings.jsonl"));
    std::cout << "wrote " << out_path(a, "embeddings.jsonl") << "\n";
    return 0;
}

int run_and_emit(const CommonArgs& a, bool allow_osm, bool allow_eval) {
    auto cfg = resolve_config(a);
    auto in = load_inputs(a);
    ensure_out_dir(a.out_dir);
    int workers = resolve_workers(a.workers);
    auto result = poiforge::run_pipeline(
        in.records, in.embeddings, allow_osm ? in.osm : std::nullopt,
        allow_eval ? in.gt : std::vector<poiforge::PoiPolygon>{}, cfg,
        in.localities, in.city, workers, a.stage_through);
    result.manifest.input_digests = in.digests;

    poiforge::save_clusters_jsonl(result, out_path(a, "clusters.jsonl"));
    if (!result.hull_polygons.empty() || a.stage_through.empty() ||
        a.stage_through == "polygons" || a.stage_through == "osm" ||
        a.stage_through == "evaluate") {
        poiforge::emit_geojson(result.hull_polygons,
                               out_path(a, "hulls.geojson"));
        poiforge::emit_geojson(result.polygons,
                               out_path(a, "polygons.geojson"));
    }
    if (result.metrics) {
        poiforge::save_report(*result.metrics, out_path(a, "metrics.json"));
        poiforge::save_pair_csv(*result.metrics, out_path(a, "pairs.csv"));
    }
    if (a.with_baseline) {
        auto base = poiforge::run_baseline(in.records, cfg);
        poiforge::emit_geojson(base, out_path(a, "baseline.geojson"));
        if (!in.gt.empty()) {
            auto m = poiforge::evaluate(base, in.gt);
            poiforge::save_report(m, out_path(a, "baseline_metrics.json"));
        }
    }
    write_manifest(result.manifest, out_path(a, "manifest.json"));
    std::cout << "addresses " << result.manifest.n_addresses << ", bins "
              << result.manifest.n_bins << ", polygons "
              << result.polygons.size() << "\n";
    return 0;
}

int cmd_osm_correct(const CommonArgs& a) {
    auto cfg = resolve_config(a);
    if (a.polygons.empty())
        throw std::runtime_error("--polygons is required for osm-correct");
    if (a.osm.empty())
        throw std::runtime_error("--osm is required for osm-correct");
    auto polys = poiforge::load_polygons(a.polygons);
    auto layer = poiforge::load_osm(a.osm);
    ensure_out_dir(a.out_dir);
    for (auto& p : polys) p = poiforge::correct(p, layer, cfg);
    poiforge::emit_geojson(polys, out_path(a, "corrected.geojson"));
    std::cout << "wrote " << out_path(a, "corrected.geojson") << "\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& a) {
    if (a.polygons.empty())
        throw std::runtime_error("--polygons is required for evaluate");
    if (a.gt.empty()) throw std::runtime_error("--gt is required for evaluate");
    auto polys = poiforge::load_polygons(a.polygons);
    auto gt = poiforge::load_polygons(a.gt);
    ensure_out_dir(a.out_dir);
    auto report = poiforge::evaluate(polys, gt);
    poiforge::save_report(report, out_path(a, "metrics.json"));
    poiforge::save_pair_csv(report, out_path(a, "pairs.csv"));
    std::cout << "pairs " << report.counts.n_pairs << ", median precision "
              << report.median_precision << ", median recall "
              << report.median_recall << "\n";
    return 0;
}

int cmd_synth(const CommonArgs& a, const poiforge::SynthSpec& spec) {
    ensure_out_dir(a.out_dir);
    auto city = poiforge::generate_city(spec);
    poiforge::save_addresses(city.addresses, out_path(a, "addresses.csv"));
    poiforge::emit_geojson(city.gt_polygons, out_path(a, "gt.geojson"));
    poiforge::save_osm(city.osm, out_path(a, "osm.geojson"));
    std::string loc_name = spec.city + ".localities.txt";
    std::ofstream loc(fs::path(a.out_dir) / loc_name);
    if (!loc) throw std::runtime_error("cannot write localities file");
    for (const auto& name : city.locality_names) loc << name << "\n";
    std::cout << "wrote " << city.addresses.size() << " addresses, "
              << city.gt_polygons.size() << " ground truth polygons, "
              << city.osm.buildings.size() << " buildings, "
              << city.osm.roads.size() << " roads\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"poiforge: mine PoI polygons from address records"};
    app.require_subcommand(1);

    CommonArgs a;
    poiforge::SynthSpec spec;

    auto add_common = [&](CLI::App* cmd, bool needs_addresses) {
        cmd->add_option("--config", a.config_path, "JSON config file");
        if (needs_addresses)
            cmd->add_option("--addresses", a.addresses, "address CSV")
                ->required();
        cmd->add_option("--localities", a.localities,
                        "locality list, one name per line");
        cmd->add_option("--city", a.city, "city key for stop words");
        cmd->add_option("--out", a.out_dir, "output directory")->required();
        add_config_flags(cmd, a);
    };

    auto* c_stats = app.add_subcommand("stats-build",
                                       "build corpus statistics");
    add_common(c_stats, true);

    auto* c_pre = app.add_subcommand("preprocess",
                                     "vocabulary + specialized preprocessing");
    add_common(c_pre, true);

    auto* c_embed = app.add_subcommand("embed",
                                       "compute reference embeddings");
    add_common(c_embed, true);

    auto* c_mine = app.add_subcommand("mine", "mine polygons, no correction");
    add_common(c_mine, true);
    c_mine->add_option("--embeddings", a.embeddings, "embeddings JSONL");
    c_mine->add_option("--workers", a.workers, "worker threads");
    c_mine->add_option("--stage-through", a.stage_through,
                       "stop after this stage");

    auto* c_osm = app.add_subcommand("osm-correct",
                                     "correct polygons against an extract");
    c_osm->add_option("--config", a.config_path, "JSON config file");
    c_osm->add_option("--polygons", a.polygons, "polygon GeoJSON")->required();
    c_osm->add_option("--osm", a.osm, "OSM extract GeoJSON")->required();
    c_osm->add_option("--out", a.out_dir, "output directory")->required();
    add_config_flags(c_osm, a);

    auto* c_eval = app.add_subcommand("evaluate",
                                      "area precision/recall report");
    c_eval->add_option("--polygons", a.polygons, "polygon GeoJSON")
        ->required();
    c_eval->add_option("--gt", a.gt, "ground truth GeoJSON")->required();
    c_eval->add_option("--out", a.out_dir, "output directory")->required();

    auto* c_synth = app.add_subcommand("synth", "generate a synthetic city");
    c_synth->add_option("--out", a.out_dir, "output directory")->required();
    c_synth->add_option("--seed", spec.seed, "RNG seed");
    c_synth->add_option("--n-pois", spec.n_pois, "planted PoI count");
    c_synth->add_option("--gps-noise-sigma-m", spec.gps_noise_sigma_m,
                        "GPS noise sigma in meters");
    c_synth->add_option("--spell-variant-rate", spec.spell_variant_rate,
                        "fraction of addresses with a spelling variant");
    c_synth->add_option("--outlier-rate", spec.outlier_rate,
                        "unrelated address fraction");
    c_synth->add_option("--leak-rate", spec.leak_rate,
                        "fraction pushed just outside the boundary");
    c_synth->add_option("--city", spec.city, "city name");

    auto* c_run = app.add_subcommand("run", "full pipeline end to end");
    add_common(c_run, true);
    c_run->add_option("--embeddings", a.embeddings, "embeddings JSONL");
    c_run->add_option("--osm", a.osm, "OSM extract GeoJSON");
    c_run->add_option("--gt", a.gt, "ground truth GeoJSON");
    c_run->add_option("--workers", a.workers, "worker threads");
    c_run->add_option("--stage-through", a.stage_through,
                      "stop after this stage");
    c_run->add_flag("--baseline", a.with_baseline,
                    "also emit the comparison baseline");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_stats->parsed()) return cmd_stats_build(a);
        if (c_pre->parsed()) return cmd_preprocess(a);
        if (c_embed->parsed()) return cmd_embed(a);
        if (c_mine->parsed()) return run_and_emit(a, false, false);
        if (c_osm->parsed()) return cmd_osm_correct(a);
        if (c_eval->parsed()) return cmd_evaluate(a);
        if (c_synth->parsed()) return cmd_synth(a, spec);
        if (c_run->parsed()) return run_and_emit(a, true, true);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
