#include "collapse/checks.hpp"
#include "collapse/experiment.hpp"
#include "collapse/metrics.hpp"
#include "collapse/model.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

void add_dims_flags(CLI::App* cmd, collapse::ModelDims& dims) {
    cmd->add_option("--classes", dims.classes, "number of classes")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--per-class", dims.per_class, "samples per class")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--feature-dim", dims.feature_dim, "feature dimension")
        ->check(CLI::PositiveNumber);
}

void print_matrix(const char* label, const collapse::Matrix& m) {
    std::printf("%s (%ldx%ld):\n", label, static_cast<long>(m.rows()),
                static_cast<long>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            std::printf("% 11.6f", m(i, j));
        std::printf("\n");
    }
}

int run_command(const collapse::ExperimentConfig& cfg) {
    const auto series = collapse::run_experiment(cfg);
    collapse::write_outputs(cfg, series);
    for (const auto& run : series) {
        if (run.diverged_at) {
            std::printf("eps %-8g DIVERGED at step %d (%zu records kept)\n",
                        run.epsilon, *run.diverged_at, run.records.size());
            continue;
        }
        const auto& last = run.records.back();
        std::printf("eps %-8g iterations %-6d final risk %.3e snc1 %.3e "
                    "snc2_rel %.3e snc3 %.3e\n",
                    run.epsilon, last.iteration, last.risk, last.snc1,
                    last.snc2_rel.value_or(0.0), last.snc3);
    }
    std::printf("outputs written to %s\n", cfg.output_dir.string().c_str());
    return 0;
}

int verify_command(std::uint64_t seed) {
    const auto results = collapse::checks::run_all(seed);
    bool all_pass = true;
    for (const auto& group : results) {
        std::printf("[%s] %-38s worst %11.4e (tol %g)%s%s\n",
                    group.pass ? "PASS" : "FAIL", group.name.c_str(), group.worst,
                    group.tolerance, group.note.empty() ? "" : "  ",
                    group.note.c_str());
        all_pass = all_pass && group.pass;
    }
    std::printf("%s\n", all_pass ? "all groups passed" : "verification FAILED");
    return all_pass ? 0 : 1;
}

int snc_command(const collapse::ModelDims& dims, std::uint64_t seed) {
    const collapse::ModelState state = collapse::synthesize_snc_point(dims, seed);
    print_matrix("weights", state.weights);
    print_matrix("features", state.features);
    print_matrix("bias", state.bias);
    print_matrix("weights * weights^T", state.weights * state.weights.transpose());

    const collapse::SncErrors errors = collapse::snc_errors(state);
    std::printf("\nrisk              %.3e\n", collapse::empirical_risk(state));
    std::printf("snc1 error        %.3e\n", errors.snc1);
    std::printf("snc2 rel error    %.3e\n", errors.snc2_rel.value_or(0.0));
    std::printf("snc3 error        %.3e\n", errors.snc3);

    const collapse::NcReport nc = collapse::nc_report(state);
    std::printf("nc1 within-class  %.3e\n", nc.nc1_within_class);
    std::printf("nc2 equinorm      %.3e\n", nc.nc2_equinorm);
    std::printf("nc2 gram          %.3e\n", nc.nc2_gram);
    std::printf("nc3 self-dual     %.3e\n", nc.nc3_selfdual);
    std::printf("nc4 disagreement  %.3e\n", nc.nc4_disagreement);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for collapse dynamics in the "
                 "unconstrained features model"};
    app.require_subcommand(1);

    collapse::ExperimentConfig cfg;
    CLI::App* run = app.add_subcommand(
        "run", "run the epsilon sweep and write CSV/SVG outputs");
    add_dims_flags(run, cfg.dims);
    run->add_option("--epsilons", cfg.epsilons, "initialization scales to sweep")
        ->check(CLI::PositiveNumber);
    run->add_option("--lr", cfg.learning_rate, "learning rate")
        ->check(CLI::PositiveNumber);
    run->add_option("--steps", cfg.steps, "gradient descent iterations")
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", cfg.seed, "master seed (per-run seeds derive from it)");
    run->add_option("--out", cfg.output_dir, "output directory");
    run->add_flag("--svg,!--no-svg", cfg.emit_svg, "emit SVG charts");
    run->add_option("--record-stride", cfg.record_stride,
                    "iterations between metric samples")
        ->check(CLI::PositiveNumber);

    std::uint64_t verify_seed = 97;
    CLI::App* verify = app.add_subcommand(
        "verify", "run the invariant and property suite, print pass/fail per group");
    verify->add_option("--seed", verify_seed, "seed for randomized checks");

    collapse::ModelDims snc_dims{3, 3, 15};
    std::uint64_t snc_seed = 7;
    CLI::App* snc = app.add_subcommand(
        "snc", "print the analytic strong-collapse point and its metrics");
    add_dims_flags(snc, snc_dims);
    snc->add_option("--seed", snc_seed, "seed for the random orthonormal factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return run_command(cfg);
        if (verify->parsed()) return verify_command(verify_seed);
        if (snc->parsed()) return snc_command(snc_dims, snc_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
