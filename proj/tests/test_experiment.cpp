#include "collapse/checks.hpp"
#include "collapse/experiment.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace collapse;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Minimal XML well-formedness: balanced, properly nested tags, quoted
// attributes, one root element. Enough to catch malformed generator output.
bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    int roots = 0;
    std::size_t i = 0;
    bool seen_root = false;
    while (i < text.size()) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        if (text.compare(i, 2, "<?") == 0) {
            const auto end = text.find("?>", i);
            if (end == std::string::npos) return false;
            i = end + 2;
            continue;
        }
        if (text.compare(i, 4, "<!--") == 0) {
            const auto end = text.find("-->", i);
            if (end == std::string::npos) return false;
            i = end + 3;
            continue;
        }
        // find the closing '>' outside quotes
        std::size_t j = i + 1;
        bool in_quote = false;
        while (j < text.size() && (in_quote || text[j] != '>')) {
            if (text[j] == '"') in_quote = !in_quote;
            if (!in_quote && text[j] == '<') return false;
            ++j;
        }
        if (j >= text.size()) return false;
        std::string tag = text.substr(i + 1, j - i - 1);
        const bool closing = !tag.empty() && tag.front() == '/';
        const bool self_closing = !tag.empty() && tag.back() == '/';
        if (closing) tag = tag.substr(1);
        if (self_closing) tag.pop_back();
        std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
        if (name.empty()) return false;
        if (closing) {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!self_closing) {
            if (stack.empty()) {
                if (seen_root) return false;
                seen_root = true;
                ++roots;
            }
            stack.push_back(name);
        } else if (stack.empty() && !seen_root) {
            return false; // self-closing root only would be odd for charts
        }
        i = j + 1;
    }
    return stack.empty() && roots == 1;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("collapse_lab_test_" + tag)) {
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

ExperimentConfig tiny_config(const fs::path& out) {
    ExperimentConfig cfg;
    cfg.epsilons = {1e-1, 1e-2};
    cfg.steps = 100;
    cfg.seed = 5;
    cfg.output_dir = out;
    return cfg;
}

} // namespace

TEST_CASE("run produces stride-aligned records") {
    TempDir dir("records");
    ExperimentConfig cfg = tiny_config(dir.path);
    const auto series = run_experiment(cfg);
    REQUIRE(series.size() == 2);
    for (const RunSeries& run : series) {
        CHECK(!run.diverged_at.has_value());
        REQUIRE(run.records.size() == 11); // 0,10,...,100
        CHECK(run.records.front().iteration == 0);
        CHECK(run.records.back().iteration == 100);
        for (const RunRecord& r : run.records) {
            CHECK(r.iteration % cfg.record_stride == 0);
            CHECK(r.snc2_rel.has_value());
        }
    }
    // distinct epsilons draw distinct trajectories
    CHECK(series[0].records.back().risk != series[1].records.back().risk);

    ExperimentConfig ragged = cfg;
    ragged.steps = 105;
    const auto extra = run_experiment(ragged);
    CHECK(extra[0].records.back().iteration == 105);
    CHECK(extra[0].records.size() == 12);
}

TEST_CASE("configuration validation") {
    ExperimentConfig cfg;
    cfg.epsilons.clear();
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg = ExperimentConfig{};
    cfg.epsilons = {0.1, -0.5};
    CHECK_THROWS_AS(run_experiment(cfg), std::domain_error);
    cfg = ExperimentConfig{};
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(run_experiment(cfg), std::domain_error);

    RunRecord record;
    CHECK_THROWS_AS(metric_value(record, "unknown"), std::invalid_argument);
}

TEST_CASE("csv format and exact round trip") {
    TempDir dir("csv");

    // header-only file for an empty record list
    const fs::path empty_path = dir.path / "empty.csv";
    write_csv({}, empty_path);
    CHECK(slurp(empty_path) == "iteration,risk,snc1,snc2_rel,snc3,dist_S_rel\n");

    ExperimentConfig cfg = tiny_config(dir.path);
    const auto series = run_experiment(cfg);
    const fs::path path = csv_path(dir.path, series[0].epsilon);
    write_csv(series[0].records, path);

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "iteration,risk,snc1,snc2_rel,snc3,dist_S_rel");
    for (const RunRecord& expected : series[0].records) {
        REQUIRE(std::getline(in, line));
        std::vector<std::string> fields;
        std::stringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() == 6);
        CHECK(std::atoi(fields[0].c_str()) == expected.iteration);
        CHECK(std::strtod(fields[1].c_str(), nullptr) == expected.risk);
        CHECK(std::strtod(fields[2].c_str(), nullptr) == expected.snc1);
        CHECK(std::strtod(fields[3].c_str(), nullptr) == *expected.snc2_rel);
        CHECK(std::strtod(fields[4].c_str(), nullptr) == expected.snc3);
        CHECK(std::strtod(fields[5].c_str(), nullptr) == expected.dist_s_rel);
    }

    // undefined snc2_rel serializes as an empty field
    RunRecord undefined;
    undefined.iteration = 3;
    undefined.snc2_rel = std::nullopt;
    const fs::path sentinel_path = dir.path / "sentinel.csv";
    write_csv({undefined}, sentinel_path);
    CHECK(slurp(sentinel_path).find("3,0,0,,0,0\n") != std::string::npos);
}

TEST_CASE("same seed twice gives byte-identical outputs") {
    TempDir dir_a("bytes_a");
    TempDir dir_b("bytes_b");
    for (const fs::path& out : {dir_a.path, dir_b.path}) {
        ExperimentConfig cfg = tiny_config(out);
        write_outputs(cfg, run_experiment(cfg));
    }
    for (double eps : {1e-1, 1e-2}) {
        const std::string a = slurp(csv_path(dir_a.path, eps));
        const std::string b = slurp(csv_path(dir_b.path, eps));
        CHECK(!a.empty());
        CHECK(a == b);
    }
    CHECK(fs::exists(dir_a.path / "snc1.svg"));
    CHECK(fs::exists(dir_a.path / "snc2_rel.svg"));
    CHECK(fs::exists(dir_a.path / "snc3.svg"));
    CHECK(fs::exists(dir_a.path / "dist_S_rel.svg"));
}

TEST_CASE("svg charts are well-formed and honest about their data") {
    TempDir dir("svg");

    ExperimentConfig cfg = tiny_config(dir.path);
    const auto series = run_experiment(cfg);
    const fs::path chart = dir.path / "snc1.svg";
    write_svg(series, "snc1", chart);
    const std::string body = slurp(chart);
    CHECK(xml_well_formed(body));
    CHECK(body.find("<polyline") != std::string::npos);
    CHECK(body.find("iteration") != std::string::npos);
    CHECK(body.find("snc1") != std::string::npos);
    CHECK(body.find("eps = 0.1") != std::string::npos); // legend labels

    // constant series draws a horizontal line
    RunSeries constant;
    constant.epsilon = 0.5;
    for (int k : {0, 10, 20}) {
        RunRecord r;
        r.iteration = k;
        r.snc1 = 0.125;
        constant.records.push_back(r);
    }
    const fs::path flat_path = dir.path / "flat.svg";
    write_svg({constant}, "snc1", flat_path);
    const std::string flat = slurp(flat_path);
    CHECK(xml_well_formed(flat));
    const auto begin = flat.find("points=\"");
    REQUIRE(begin != std::string::npos);
    const auto end = flat.find('"', begin + 8);
    std::stringstream points(flat.substr(begin + 8, end - begin - 8));
    std::string pair;
    std::vector<double> ys;
    while (points >> pair)
        ys.push_back(std::strtod(pair.substr(pair.find(',') + 1).c_str(), nullptr));
    REQUIRE(ys.size() == 3);
    CHECK(ys[0] == ys[1]);
    CHECK(ys[1] == ys[2]);

    // a metric with no finite positive values gets an annotation, no polyline
    RunSeries undefined = constant;
    for (RunRecord& r : undefined.records) r.snc2_rel = std::nullopt;
    const fs::path empty_path = dir.path / "undefined.svg";
    write_svg({undefined}, "snc2_rel", empty_path);
    const std::string empty_chart = slurp(empty_path);
    CHECK(xml_well_formed(empty_chart));
    CHECK(empty_chart.find("<polyline") == std::string::npos);
    CHECK(empty_chart.find("no positive finite values") != std::string::npos);
}

TEST_CASE("a diverging run is flagged and the sweep continues") {
    TempDir dir("diverge");
    ExperimentConfig cfg = tiny_config(dir.path);
    cfg.epsilons = {1e8, 1e-2}; // the first blows up within a few steps
    const auto series = run_experiment(cfg);
    REQUIRE(series.size() == 2);
    CHECK(series[0].diverged_at.has_value());
    CHECK(*series[0].diverged_at >= 1);
    CHECK(!series[1].diverged_at.has_value());
    CHECK(series[1].records.back().iteration == cfg.steps);

    // outputs still get written, with the partial record set
    write_outputs(cfg, series);
    CHECK(fs::exists(csv_path(dir.path, 1e8)));
    const std::string chart = slurp(dir.path / "snc1.svg");
    CHECK(chart.find("(diverged)") != std::string::npos);
}

TEST_CASE("recorded rows are re-derivable from a fresh simulation") {
    CHECK(checks::csv_rederivability(77).pass);
    CHECK(checks::harness_determinism(78).pass);
}
