#pragma once

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "poiforge/geometry.hpp"
#include "poiforge/types.hpp"

namespace poiforge {

struct PairScore {
    std::string alg_id;
    std::string gt_id;
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
};

struct MetricsCounts {
    size_t n_alg = 0;
    size_t n_gt = 0;
    size_t n_pairs = 0;
    size_t n_gt_matched = 0;
};

/// Every intersecting (algorithmic, ground-truth) polygon pair scored
/// independently; a polygon may appear in several pairs. Medians are the
/// lower median of the sorted per-pair lists, 0 when no pair exists.
struct MetricsReport {
    std::vector<PairScore> pairs;
    double median_precision = 0.0;
    double median_recall = 0.0;
    double median_f = 0.0;
    std::vector<double> cdf_precision;  // sorted ascending
    std::vector<double> cdf_recall;
    MetricsCounts counts;
};

inline double lower_median(const std::vector<double>& sorted_vals) {
    if (sorted_vals.empty()) return 0.0;
    return sorted_vals[(sorted_vals.size() - 1) / 2];
}

inline double area_precision(const PoiPolygon& alg, const PoiPolygon& gt) {
    OverlapStats ov = overlap_stats(alg.ring, gt.ring);
    if (ov.intersection <= 0.0)
        throw std::runtime_error("area_precision: polygons do not intersect");
    return ov.intersection / ov.area_a;
}

inline double area_recall(const PoiPolygon& alg, const PoiPolygon& gt) {
    OverlapStats ov = overlap_stats(alg.ring, gt.ring);
    if (ov.intersection <= 0.0)
        throw std::runtime_error("area_recall: polygons do not intersect");
    return ov.intersection / ov.area_b;
}

inline double f_score(double p, double r) {
    if (p <= 0.0 || r <= 0.0)
        throw std::runtime_error("f_score: inputs must be positive");
    return 2.0 / (1.0 / p + 1.0 / r);
}

inline MetricsReport evaluate(const std::vector<PoiPolygon>& alg_polys,
                              const std::vector<PoiPolygon>& gt_polys) {
    MetricsReport report;
    report.counts.n_alg = alg_polys.size();
    report.counts.n_gt = gt_polys.size();
    std::vector<bool> gt_hit(gt_polys.size(), false);
    for (const PoiPolygon& alg : alg_polys) {
        for (size_t g = 0; g < gt_polys.size(); ++g) {
            OverlapStats ov = overlap_stats(alg.ring, gt_polys[g].ring);
            if (ov.intersection <= 0.0) continue;
            PairScore score;
            score.alg_id = alg.poi_id;
            score.gt_id = gt_polys[g].poi_id;
            score.precision = ov.intersection / ov.area_a;
            score.recall = ov.intersection / ov.area_b;
            score.f_score = f_score(score.precision, score.recall);
            report.pairs.push_back(score);
            gt_hit[g] = true;
        }
    }
    report.counts.n_pairs = report.pairs.size();
    for (bool hit : gt_hit)
        if (hit) ++report.counts.n_gt_matched;

    std::vector<double> fs;
    for (const PairScore& s : report.pairs) {
        report.cdf_precision.push_back(s.precision);
        report.cdf_recall.push_back(s.recall);
        fs.push_back(s.f_score);
    }
    std::sort(report.cdf_precision.begin(), report.cdf_precision.end());
    std::sort(report.cdf_recall.begin(), report.cdf_recall.end());
    std::sort(fs.begin(), fs.end());
    report.median_precision = lower_median(report.cdf_precision);
    report.median_recall = lower_median(report.cdf_recall);
    report.median_f = lower_median(fs);
    return report;
}

inline nlohmann::json report_to_json(const MetricsReport& report) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const PairScore& s : report.pairs)
        pairs.push_back({{"alg_id", s.alg_id},
                         {"gt_id", s.gt_id},
                         {"precision", s.precision},
                         {"recall", s.recall},
                         {"f_score", s.f_score}});
    return nlohmann::json{
        {"counts",
         {{"n_alg", report.counts.n_alg},
          {"n_gt", report.counts.n_gt},
          {"n_pairs", report.counts.n_pairs},
          {"n_gt_matched", report.counts.n_gt_matched}}},
        {"median_precision", report.median_precision},
        {"median_recall", report.median_recall},
        {"median_f", report.median_f},
        {"cdf_precision", report.cdf_precision},
        {"cdf_recall", report.cdf_recall},
        {"pairs", pairs}};
}

inline void save_report(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report file: " + path);
    out << report_to_json(report).dump(2) << "\n";
}

/// One row per scored pair, for external CDF plotting.
inline void save_pair_csv(const MetricsReport& report,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write pair csv: " + path);
    out << "alg_id,gt_id,precision,recall,f_score\n";
    char buf[64];
    for (const PairScore& s : report.pairs) {
        std::snprintf(buf, sizeof(buf), ",%.9f,%.9f,%.9f\n", s.precision,
                      s.recall, s.f_score);
        out << s.alg_id << "," << s.gt_id << buf;
    }
}

}  // namespace poiforge
