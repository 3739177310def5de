#include "collapse/experiment.hpp"

#include "collapse/flow.hpp"
#include "collapse/metrics.hpp"
#include "collapse/model.hpp"
#include "collapse/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>
#include <utility>

namespace collapse {

namespace {

RunRecord make_record(int iteration, const ModelState& state) {
    const SncErrors errors = snc_errors(state);
    RunRecord record;
    record.iteration = iteration;
    record.risk = empirical_risk(state);
    record.snc1 = errors.snc1;
    record.snc2_rel = errors.snc2_rel;
    record.snc3 = errors.snc3;
    record.dist_s_rel = distance_to_S_relative(state);
    return record;
}

RunSeries run_single(const ExperimentConfig& cfg, std::size_t sweep_index) {
    RunSeries series;
    series.epsilon = cfg.epsilons[sweep_index];

    const InitSpec spec{series.epsilon,
                        cfg.seed + static_cast<std::uint64_t>(sweep_index)};
    ModelState state = random_init(cfg.dims, spec);

    int last_recorded = -1;
    int last_step = 0;
    try {
        last_step = descend_inplace(
            state, cfg.learning_rate, cfg.steps,
            [&](int k, const ModelState& z) {
                if (k % cfg.record_stride == 0) {
                    series.records.push_back(make_record(k, z));
                    last_recorded = k;
                }
            });
    } catch (const divergence_error& err) {
        series.diverged_at = err.step();
        return series;
    }
    if (last_step != last_recorded)
        series.records.push_back(make_record(last_step, state));
    return series;
}

int thread_cap(std::size_t jobs) {
    int cap = static_cast<int>(std::min<std::size_t>(
        jobs, std::max(1u, std::thread::hardware_concurrency())));
    if (const char* env = std::getenv("COLLAPSE_LAB_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && parsed > 0)
            cap = static_cast<int>(std::min<long>(parsed, cap));
    }
    return cap;
}

std::string format_value(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string format_epsilon(double epsilon) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%g", epsilon);
    return buffer;
}

} // namespace

std::vector<RunSeries> run_experiment(const ExperimentConfig& cfg) {
    cfg.dims.validate();
    if (cfg.epsilons.empty())
        throw std::invalid_argument("run_experiment: empty epsilon sweep");
    for (double eps : cfg.epsilons)
        if (eps <= 0.0)
            throw std::domain_error("run_experiment: epsilons must be positive");
    if (cfg.learning_rate <= 0.0 || cfg.steps < 1 || cfg.record_stride < 1)
        throw std::domain_error("run_experiment: invalid learning rate or counts");
    if (!std::is_sorted(cfg.epsilons.rbegin(), cfg.epsilons.rend()))
        std::cerr << "warning: epsilon sweep is not strictly decreasing\n";

    std::vector<RunSeries> results(cfg.epsilons.size());
    const int workers = thread_cap(cfg.epsilons.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < cfg.epsilons.size(); ++i)
            results[i] = run_single(cfg, i);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < cfg.epsilons.size();
                 i = next.fetch_add(1))
                results[i] = run_single(cfg, i);
        });
    for (std::thread& t : pool) t.join();
    return results;
}

std::optional<double> metric_value(const RunRecord& record,
                                   const std::string& metric_name) {
    if (metric_name == "risk") return record.risk;
    if (metric_name == "snc1") return record.snc1;
    if (metric_name == "snc2_rel") return record.snc2_rel;
    if (metric_name == "snc3") return record.snc3;
    if (metric_name == "dist_S_rel") return record.dist_s_rel;
    throw std::invalid_argument("unknown metric: " + metric_name);
}

void write_csv(const std::vector<RunRecord>& records,
               const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_csv: cannot open " + path.string());
    out << "iteration,risk,snc1,snc2_rel,snc3,dist_S_rel\n";
    for (const RunRecord& r : records) {
        out << r.iteration << ',' << format_value(r.risk) << ','
            << format_value(r.snc1) << ',';
        if (r.snc2_rel) out << format_value(*r.snc2_rel);
        out << ',' << format_value(r.snc3) << ',' << format_value(r.dist_s_rel)
            << '\n';
    }
    if (!out)
        throw std::runtime_error("write_csv: write failed for " + path.string());
}

std::filesystem::path csv_path(const std::filesystem::path& dir, double epsilon) {
    return dir / ("run_eps_" + format_epsilon(epsilon) + ".csv");
}

namespace {

struct ChartLayout {
    double width = 860, height = 520;
    double left = 70, right = 690, top = 30, bottom = 470;
};

std::string color_for(std::size_t index) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    return palette[index % (sizeof(palette) / sizeof(palette[0]))];
}

} // namespace

void write_svg(const std::vector<RunSeries>& series,
               const std::string& metric_name,
               const std::filesystem::path& path) {
    if (series.empty())
        throw std::invalid_argument("write_svg: need at least one run");
    metric_value(RunRecord{}, metric_name); // validates the name

    // Data ranges over positive finite samples only (log axis).
    double min_value = std::numeric_limits<double>::infinity();
    double max_value = 0.0;
    int max_iteration = 1;
    for (const RunSeries& s : series) {
        for (const RunRecord& r : s.records) {
            max_iteration = std::max(max_iteration, r.iteration);
            const auto v = metric_value(r, metric_name);
            if (v && std::isfinite(*v) && *v > 0.0) {
                min_value = std::min(min_value, *v);
                max_value = std::max(max_value, *v);
            }
        }
    }
    const bool has_data = max_value > 0.0;

    int exp_lo = 0, exp_hi = 1;
    if (has_data) {
        exp_lo = static_cast<int>(std::floor(std::log10(min_value)));
        exp_hi = static_cast<int>(std::ceil(std::log10(max_value)));
        if (exp_lo == exp_hi) { --exp_lo; ++exp_hi; }
    }

    const ChartLayout box;
    const auto x_of = [&](double iteration) {
        return box.left + (box.right - box.left) * iteration / max_iteration;
    };
    const auto y_of = [&](double value) {
        const double frac = (std::log10(value) - exp_lo) / (exp_hi - exp_lo);
        return box.bottom - (box.bottom - box.top) * frac;
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << box.width
        << "\" height=\"" << box.height << "\" viewBox=\"0 0 " << box.width
        << ' ' << box.height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes
    svg << "<line x1=\"" << box.left << "\" y1=\"" << box.bottom << "\" x2=\""
        << box.right << "\" y2=\"" << box.bottom
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << box.left << "\" y1=\"" << box.top << "\" x2=\""
        << box.left << "\" y2=\"" << box.bottom
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // X ticks: five evenly spaced iteration marks.
    for (int k = 0; k <= 5; ++k) {
        const double it = max_iteration * k / 5.0;
        const double x = x_of(it);
        svg << "<line x1=\"" << x << "\" y1=\"" << box.bottom << "\" x2=\"" << x
            << "\" y2=\"" << box.bottom + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << x << "\" y=\"" << box.bottom + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">"
            << static_cast<long>(std::llround(it)) << "</text>\n";
    }
    svg << "<text x=\"" << (box.left + box.right) / 2 << "\" y=\""
        << box.bottom + 40 << "\" font-size=\"14\" text-anchor=\"middle\">"
        << "iteration</text>\n";

    // Y ticks at integer decades.
    const int stride = std::max(1, (exp_hi - exp_lo + 5) / 6);
    for (int e = exp_lo; e <= exp_hi; e += stride) {
        const double y = y_of(std::pow(10.0, e));
        svg << "<line x1=\"" << box.left - 5 << "\" y1=\"" << y << "\" x2=\""
            << box.left << "\" y2=\"" << y << "\" stroke=\"black\"/>\n"
            << "<line x1=\"" << box.left << "\" y1=\"" << y << "\" x2=\""
            << box.right << "\" y2=\"" << y
            << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n"
            << "<text x=\"" << box.left - 8 << "\" y=\"" << y + 4
            << "\" font-size=\"12\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    svg << "<text x=\"18\" y=\"" << (box.top + box.bottom) / 2
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << (box.top + box.bottom) / 2 << ")\">" << metric_name << "</text>\n";

    if (!has_data) {
        svg << "<text x=\"" << (box.left + box.right) / 2 << "\" y=\""
            << (box.top + box.bottom) / 2
            << "\" font-size=\"14\" text-anchor=\"middle\">" << metric_name
            << ": no positive finite values to plot</text>\n";
    } else {
        for (std::size_t s = 0; s < series.size(); ++s) {
            const std::string color = color_for(s);
            std::vector<std::pair<double, double>> segment;
            const auto flush = [&] {
                if (segment.size() >= 2) {
                    svg << "<polyline fill=\"none\" stroke=\"" << color
                        << "\" stroke-width=\"1.5\" points=\"";
                    for (const auto& [x, y] : segment) svg << x << ',' << y << ' ';
                    svg << "\"/>\n";
                } else if (segment.size() == 1) {
                    svg << "<circle cx=\"" << segment[0].first << "\" cy=\""
                        << segment[0].second << "\" r=\"2\" fill=\"" << color
                        << "\"/>\n";
                }
                segment.clear();
            };
            for (const RunRecord& r : series[s].records) {
                const auto v = metric_value(r, metric_name);
                if (v && std::isfinite(*v) && *v > 0.0)
                    segment.emplace_back(x_of(r.iteration), y_of(*v));
                else
                    flush();
            }
            flush();
        }
    }

    // Legend
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double y = box.top + 16 + 22 * static_cast<double>(s);
        svg << "<line x1=\"" << box.right + 14 << "\" y1=\"" << y << "\" x2=\""
            << box.right + 44 << "\" y2=\"" << y << "\" stroke=\"" << color_for(s)
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << box.right + 50 << "\" y=\"" << y + 4
            << "\" font-size=\"12\">eps = " << format_epsilon(series[s].epsilon)
            << (series[s].diverged_at ? " (diverged)" : "") << "</text>\n";
    }

    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_svg: cannot open " + path.string());
    out << svg.str();
    if (!out)
        throw std::runtime_error("write_svg: write failed for " + path.string());
}

void write_outputs(const ExperimentConfig& cfg,
                   const std::vector<RunSeries>& series) {
    std::filesystem::create_directories(cfg.output_dir);
    for (const RunSeries& s : series)
        write_csv(s.records, csv_path(cfg.output_dir, s.epsilon));
    if (cfg.emit_svg)
        for (const std::string& name :
             {std::string("snc1"), std::string("snc2_rel"), std::string("snc3"),
              std::string("dist_S_rel")})
            write_svg(series, name, cfg.output_dir / (name + ".svg"));
}

} // namespace collapse
