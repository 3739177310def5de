// Acceptance suite: one criterion per section, each printed as a single
// pass/fail line with its measured defect and runtime. Exit code 0 only if
// every criterion passes.

#include "collapse/checks.hpp"
#include "collapse/experiment.hpp"
#include "collapse/flow.hpp"
#include "collapse/metrics.hpp"
#include "collapse/model.hpp"
#include "collapse/spectral.hpp"

#include "spectral_oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace collapse;
namespace fs = std::filesystem;

namespace {

const ModelDims kMain{3, 3, 15};
constexpr std::uint64_t kSeed = 20240901;

struct Criterion {
    int number;
    std::string label;
    bool pass;
    std::string detail;
    double seconds;
};

std::vector<Criterion> g_results;

template <class Body>
void criterion(int number, const std::string& label, double time_budget,
               Body&& body) {
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        auto [ok, text] = body();
        pass = ok;
        detail = text;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (seconds >= time_budget) {
        pass = false;
        detail += " [runtime budget " + std::to_string(time_budget) + " s exceeded]";
    }
    g_results.push_back({number, label, pass, detail, seconds});
    std::printf("[%s] criterion %d: %-28s %s [%.2f s]\n", pass ? "PASS" : "FAIL",
                number, label.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::pair<bool, std::string> analytic_point_suite() {
    const std::vector<ModelDims> dims_set{{3, 3, 15}, {4, 2, 6}, {5, 5, 4}};
    double worst_risk = 0.0, worst_snc = 0.0, worst_nc = 0.0;
    for (const ModelDims& dims : dims_set) {
        const ModelState z = synthesize_snc_point(dims, kSeed);
        worst_risk = std::max(worst_risk, empirical_risk(z));
        const SncErrors errors = snc_errors(z);
        worst_snc = std::max({worst_snc, errors.snc1,
                              errors.snc2_rel.value_or(0.0), errors.snc3});
        const NcReport nc = nc_report(z);
        worst_nc = std::max({worst_nc, nc.nc1_within_class, nc.nc2_equinorm,
                             nc.nc2_gram, nc.nc3_selfdual, nc.nc4_disagreement});
    }
    std::ostringstream out;
    out << "risk " << worst_risk << ", snc " << worst_snc << ", nc " << worst_nc;
    return {worst_risk <= 1e-18 && worst_snc <= 1e-12 && worst_nc <= 1e-10,
            out.str()};
}

std::pair<bool, std::string> gradient_suite() {
    const auto result = checks::gradient_finite_difference(kSeed);
    std::ostringstream out;
    out << "max rel error " << result.worst << " (tol 1e-6)";
    return {result.pass && result.worst < 1e-6, out.str()};
}

std::pair<bool, std::string> spectral_suite() {
    const std::vector<std::pair<Eigenspace, int>> expected{
        {Eigenspace::E1Plus, 30}, {Eigenspace::E1Minus, 30},
        {Eigenspace::E2Plus, 15}, {Eigenspace::E2Minus, 15},
        {Eigenspace::E3, 90}};
    int total = 0;
    for (const auto& [space, dim] : expected) {
        const auto basis = oracle::orthonormal_basis(space, kMain);
        if (basis.size() != static_cast<std::size_t>(dim) ||
            eigenspace_dim(space, kMain) != dim)
            return {false, "wrong eigenspace dimension"};
        total += dim;
    }
    if (total != 180) return {false, "dimensions do not sum to 180"};

    const auto algebra = checks::projector_algebra(kSeed + 1);
    const auto relations = checks::operator_eigen_relations(kSeed + 2);
    std::ostringstream out;
    out << "dims 30+30+15+15+90=180, projector defect " << algebra.worst
        << ", eigen defect " << relations.worst << " (tol 1e-12)";
    return {algebra.worst < 1e-12 && relations.worst < 1e-12, out.str()};
}

std::pair<bool, std::string> linearized_growth_suite() {
    const IntegratorConfig cfg{1e-3, 0, Method::Rk4Flow};
    double worst_state = 0.0, worst_bias = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const PairState u0 = checks::random_pair(kMain, kSeed + 10 + trial, 0.5);
        const FlowTrajectory traj = linearized_flow_numeric(u0, 3.0, cfg);
        for (std::size_t i = 0; i < traj.states.size(); i += 250) {
            const double t = traj.times[i];
            const PairState analytic = linearized_flow_analytic(u0, t, kMain);
            const PairState numeric{traj.states[i].features,
                                    traj.states[i].weights};
            const PairState d{numeric.features - analytic.features,
                              numeric.weights - analytic.weights};
            worst_state = std::max(worst_state, energy_norm(d) /
                                                    std::max(energy_norm(analytic),
                                                             1e-300));
            worst_bias = std::max(
                worst_bias,
                (traj.states[i].bias - bias_closed_form(t, kMain, 1.0)).norm());
        }
    }
    const auto bound = checks::initial_growth_bound(kSeed + 30);
    std::ostringstream out;
    out << "state rel " << worst_state << " (tol 1e-6), bias " << worst_bias
        << " (tol 1e-8), bound slack " << bound.worst;
    return {worst_state <= 1e-6 && worst_bias <= 1e-8 && bound.pass, out.str()};
}

std::pair<bool, std::string> invariant_flow_suite() {
    const auto in_s = checks::gradient_stays_in_s(kSeed + 40);
    const auto flow_s = checks::flow_stays_in_s(kSeed + 41);
    const auto reduced = checks::reduced_full_consistency(kSeed + 42);

    // (c): Gram limit reached at t = 10/sqrt(N) from full-rank starts
    const double root_n = std::sqrt(3.0);
    const Matrix target = root_n * (Matrix::Identity(3, 3) -
                                    Matrix::Constant(3, 3, 1.0 / 3.0));
    const IntegratorConfig cfg{1e-3, 0, Method::Rk4Flow};
    double worst_gram = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const ModelState z0 = checks::random_s_state(kMain, kSeed + 50 + trial);
        const ReducedTrajectory traj =
            reduced_flow_numeric(z0.weights, 10.0 / root_n, 3, cfg);
        const Matrix gram = traj.weights.back() * traj.weights.back().transpose();
        worst_gram = std::max(worst_gram, (gram - target).norm());
    }
    std::ostringstream out;
    out << "(a) grad defect " << in_s.worst << ", flow dist " << flow_s.worst
        << "; (b) W defect " << reduced.worst << "; (c) gram defect "
        << worst_gram << " (tol 1e-3)";
    return {in_s.pass && flow_s.pass && reduced.pass && worst_gram < 1e-3,
            out.str()};
}

std::pair<bool, std::string> risk_decomposition_suite() {
    const auto result = checks::in_s_risk_decomposition(kSeed + 60);
    std::ostringstream out;
    out << "max rel defect " << result.worst << " (tol 1e-12)";
    return {result.pass, out.str()};
}

ExperimentConfig default_sweep(const fs::path& out) {
    ExperimentConfig cfg; // spec defaults: (3,3,15), {1e-1,1e-2,1e-3}, lr 0.05,
                          // 20000 steps
    cfg.output_dir = out;
    cfg.emit_svg = true;
    return cfg;
}

std::vector<RunSeries> g_first_sweep;
fs::path g_sweep_dir_a;

std::pair<bool, std::string> figure_trends() {
    g_sweep_dir_a = fs::temp_directory_path() / "collapse_lab_acceptance_a";
    fs::remove_all(g_sweep_dir_a);
    const ExperimentConfig cfg = default_sweep(g_sweep_dir_a);
    g_first_sweep = run_experiment(cfg);
    write_outputs(cfg, g_first_sweep);
    const auto trends = checks::sweep_trends(g_first_sweep, 1e-6, /*soft=*/false);
    std::ostringstream out;
    for (const RunSeries& run : g_first_sweep)
        out << "eps " << run.epsilon << " final risk "
            << run.records.back().risk << "; ";
    out << (trends.note.empty() ? "all trends non-increasing" : trends.note);
    return {trends.pass, out.str()};
}

std::pair<bool, std::string> determinism() {
    const fs::path dir_b = fs::temp_directory_path() / "collapse_lab_acceptance_b";
    fs::remove_all(dir_b);
    const ExperimentConfig cfg = default_sweep(dir_b);
    write_outputs(cfg, run_experiment(cfg));

    bool identical = true;
    for (double eps : cfg.epsilons) {
        const std::string a = slurp(csv_path(g_sweep_dir_a, eps));
        const std::string b = slurp(csv_path(dir_b, eps));
        if (a.empty() || a != b) identical = false;
    }
    std::error_code ec;
    fs::remove_all(g_sweep_dir_a, ec);
    fs::remove_all(dir_b, ec);
    return {identical, identical ? "byte-identical CSVs across repeat runs"
                                 : "CSV bytes differ between repeat runs"};
}

} // namespace

int main() {
    std::printf("acceptance suite: dims (3,3,15) unless stated, seed %llu\n\n",
                static_cast<unsigned long long>(kSeed));

    criterion(1, "analytic point exactness", 5.0, analytic_point_suite);
    criterion(2, "gradient correctness", 5.0, gradient_suite);
    criterion(3, "spectral suite", 10.0, spectral_suite);
    criterion(4, "linearized growth closed form", 30.0, linearized_growth_suite);
    criterion(5, "invariant subspace flow", 60.0, invariant_flow_suite);
    criterion(6, "in-S risk decomposition", 1.0, risk_decomposition_suite);
    criterion(7, "sweep trend reproduction", 120.0, figure_trends);
    criterion(8, "sweep determinism", 120.0, determinism);

    int failed = 0;
    for (const Criterion& c : g_results)
        if (!c.pass) ++failed;
    std::printf("\n%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failed,
                g_results.size());
    return failed == 0 ? 0 : 1;
}
