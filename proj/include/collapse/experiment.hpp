#pragma once

#include "collapse/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace collapse {

// Sweep configuration. Defaults reproduce the desk-scale experiment:
// three classes, three samples each, fifteen features, three initialization
// scales spanning three decades.
struct ExperimentConfig {
    ModelDims dims{3, 3, 15};
    std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
    double learning_rate = 0.05;
    int steps = 20000;
    std::uint64_t seed = 1729;
    std::filesystem::path output_dir = "out";
    bool emit_svg = true;
    int record_stride = 10;
};

// One sampled iteration of a run. snc2_rel is empty when the feature matrix
// is exactly zero (the relative error has no meaning there).
struct RunRecord {
    int iteration = 0;
    double risk = 0.0;
    double snc1 = 0.0;
    std::optional<double> snc2_rel;
    double snc3 = 0.0;
    double dist_s_rel = 0.0;
};

struct RunSeries {
    double epsilon = 0.0;
    std::vector<RunRecord> records;
    std::optional<int> diverged_at; // step index when the run blew up
};

// Runs the sweep: per epsilon, a seeded Gaussian init (seed + sweep index)
// followed by gradient descent, with metrics sampled every record_stride
// iterations plus the final one. Runs execute in parallel up to the
// COLLAPSE_LAB_THREADS cap; results always come back in sweep order.
// A diverged run keeps its records so far and is flagged, not fatal.
std::vector<RunSeries> run_experiment(const ExperimentConfig& cfg);

// Metric columns a chart or CSV can address by name.
inline const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"risk", "snc1", "snc2_rel",
                                                "snc3", "dist_S_rel"};
    return names;
}

std::optional<double> metric_value(const RunRecord& record,
                                   const std::string& metric_name);

// CSV with header iteration,risk,snc1,snc2_rel,snc3,dist_S_rel; values at
// 17 significant digits (lossless for doubles), undefined snc2_rel as an
// empty field, LF line endings.
void write_csv(const std::vector<RunRecord>& records,
               const std::filesystem::path& path);

std::filesystem::path csv_path(const std::filesystem::path& dir, double epsilon);

// Self-contained SVG line chart of one metric: log-scale y axis, one
// polyline per epsilon, legend and axis labels. A metric with no positive
// finite samples yields an annotated chart with no polyline.
void write_svg(const std::vector<RunSeries>& series,
               const std::string& metric_name,
               const std::filesystem::path& path);

// Writes the per-epsilon CSVs and, when configured, the four metric charts
// (snc1, snc2_rel, snc3, dist_S_rel) into cfg.output_dir.
void write_outputs(const ExperimentConfig& cfg,
                   const std::vector<RunSeries>& series);

} // namespace collapse
