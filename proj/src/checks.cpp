#include "collapse/checks.hpp"

#include "collapse/flow.hpp"
#include "collapse/metrics.hpp"
#include "collapse/model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace collapse::checks {

namespace {

const ModelDims kMain{3, 3, 15};
const ModelDims kAlt{4, 2, 5};
const std::vector<ModelDims> kGradientDims{{2, 1, 2}, {3, 3, 15}, {4, 2, 5}};
const std::vector<ModelDims> kSncDims{{3, 3, 15}, {4, 2, 6}, {5, 5, 4}};
const std::vector<Eigenspace> kAllSpaces{Eigenspace::E1Plus, Eigenspace::E1Minus,
                                         Eigenspace::E2Plus, Eigenspace::E2Minus,
                                         Eigenspace::E3};

Matrix gaussian(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            m(i, j) = normal(rng);
    return m;
}

GroupResult finish(std::string name, double worst, double tolerance,
                   std::string note = {}) {
    GroupResult result;
    result.name = std::move(name);
    result.worst = worst;
    result.tolerance = tolerance;
    result.pass = worst <= tolerance;
    result.note = std::move(note);
    return result;
}

PairState pair_of(const ModelState& z) { return PairState{z.features, z.weights}; }

PairState pair_diff(const PairState& a, const PairState& b) {
    return PairState{a.features - b.features, a.weights - b.weights};
}

} // namespace

ModelState random_state(const ModelDims& dims, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    ModelState z;
    z.features = scale * gaussian(dims.feature_dim, dims.samples(), rng);
    z.weights = scale * gaussian(dims.classes, dims.feature_dim, rng);
    z.bias = scale * gaussian(dims.classes, 1, rng).col(0);
    return z;
}

PairState random_pair(const ModelDims& dims, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    PairState u;
    u.features = scale * gaussian(dims.feature_dim, dims.samples(), rng);
    u.weights = scale * gaussian(dims.classes, dims.feature_dim, rng);
    return u;
}

ModelState random_s_state(const ModelDims& dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Matrix w = gaussian(dims.classes, dims.feature_dim, rng);
    w.rowwise() -= w.colwise().mean();
    std::normal_distribution<double> normal(0.0, 1.0);
    ModelState z;
    z.weights = w;
    z.features = features_from_weights(w, dims.per_class);
    z.bias = Vector::Constant(dims.classes, normal(rng));
    return z;
}

PairState random_eigenspace_element(Eigenspace space, const ModelDims& dims,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    switch (space) {
        case Eigenspace::E1Plus:
            return e1_element(gaussian(dims.classes, dims.feature_dim, rng),
                              dims.per_class, true);
        case Eigenspace::E1Minus:
            return e1_element(gaussian(dims.classes, dims.feature_dim, rng),
                              dims.per_class, false);
        case Eigenspace::E2Plus:
            return e2_element(gaussian(dims.feature_dim, 1, rng).col(0), dims, true);
        case Eigenspace::E2Minus:
            return e2_element(gaussian(dims.feature_dim, 1, rng).col(0), dims, false);
        case Eigenspace::E3:
            return e3_element(gaussian(dims.feature_dim, dims.samples(), rng), dims);
    }
    throw std::logic_error("random_eigenspace_element: unknown eigenspace");
}

ModelState finite_difference_gradient(const ModelState& state, double step) {
    ModelState probe = state;
    ModelState grad{Matrix::Zero(state.features.rows(), state.features.cols()),
                    Matrix::Zero(state.weights.rows(), state.weights.cols()),
                    Vector::Zero(state.bias.size())};
    const auto central = [&](double& slot) {
        const double saved = slot;
        slot = saved + step;
        const double up = empirical_risk(probe);
        slot = saved - step;
        const double down = empirical_risk(probe);
        slot = saved;
        return (up - down) / (2.0 * step);
    };
    for (Eigen::Index j = 0; j < state.features.cols(); ++j)
        for (Eigen::Index i = 0; i < state.features.rows(); ++i)
            grad.features(i, j) = central(probe.features(i, j));
    for (Eigen::Index j = 0; j < state.weights.cols(); ++j)
        for (Eigen::Index i = 0; i < state.weights.rows(); ++i)
            grad.weights(i, j) = central(probe.weights(i, j));
    for (Eigen::Index i = 0; i < state.bias.size(); ++i)
        grad.bias(i) = central(probe.bias(i));
    return grad;
}

GroupResult gradient_finite_difference(std::uint64_t seed) {
    double worst = 0.0;
    for (const ModelDims& dims : kGradientDims) {
        for (int trial = 0; trial < 10; ++trial) {
            const ModelState z = random_state(dims, seed + trial, 0.7);
            const ModelState analytic = gradient(z);
            const ModelState numeric = finite_difference_gradient(z, 1e-5);
            const double err_h = (numeric.features - analytic.features).norm() /
                                 std::max(analytic.features.norm(), 1e-300);
            const double err_w = (numeric.weights - analytic.weights).norm() /
                                 std::max(analytic.weights.norm(), 1e-300);
            const double err_b = (numeric.bias - analytic.bias).norm() /
                                 std::max(analytic.bias.norm(), 1e-300);
            worst = std::max({worst, err_h, err_w, err_b});
        }
        seed += 101;
    }
    return finish("model_core.gradient_finite_difference", worst, 1e-6);
}

GroupResult risk_residual_identity(std::uint64_t seed) {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const ModelState z = random_state(kMain, seed + trial, 1.3);
        const Matrix a = residual(z);
        // independent elementwise accumulation
        double sum = 0.0;
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                sum += a(i, j) * a(i, j);
        const double risk = empirical_risk(z);
        worst = std::max(worst, std::abs(risk - 0.5 * sum) / std::max(risk, 1e-300));
    }
    return finish("model_core.risk_residual_identity", worst, 1e-14);
}

GroupResult zero_residual_equivalence(std::uint64_t seed) {
    double worst = 0.0;
    for (const ModelDims& dims : kSncDims) {
        const ModelState z = synthesize_snc_point(dims, seed++);
        const double res = residual(z).norm();
        const double risk = empirical_risk(z);
        const double grad = energy_norm(gradient(z));
        worst = std::max({worst, res, std::sqrt(2.0 * risk), grad});
    }
    return finish("model_core.zero_residual_equivalence", worst, 1e-14);
}

GroupResult snc_synthesis(std::uint64_t seed) {
    double worst_snc = 0.0;
    double worst_nc = 0.0;
    for (const ModelDims& dims : kSncDims) {
        const ModelState z = synthesize_snc_point(dims, seed++);
        const SncErrors errors = snc_errors(z);
        const double ones_w =
            (Eigen::RowVectorXd::Ones(dims.classes) * z.weights).norm();
        worst_snc = std::max({worst_snc, errors.snc1, errors.snc2_rel.value_or(0.0),
                              errors.snc3, ones_w});
        const NcReport nc = nc_report(z);
        worst_nc = std::max({worst_nc, nc.nc1_within_class, nc.nc2_equinorm,
                             nc.nc2_gram, nc.nc3_selfdual, nc.nc4_disagreement});
    }
    std::ostringstream note;
    note << "nc defect " << worst_nc << (worst_nc <= 1e-10 ? " <= " : " > ") << 1e-10;
    GroupResult result = finish("model_core.snc_synthesis", worst_snc, 1e-12,
                                note.str());
    result.pass = result.pass && worst_nc <= 1e-10;
    return result;
}

GroupResult operator_self_adjoint(std::uint64_t seed) {
    double worst = 0.0;
    for (const ModelDims& dims : {kMain, kAlt}) {
        std::mt19937_64 rng(seed++);
        std::uniform_real_distribution<double> unif(0.0, 1.0 / dims.classes);
        for (int trial = 0; trial < 5; ++trial) {
            const LinearizedOperator op{dims, unif(rng)};
            const PairState u = random_pair(dims, seed + 11 * trial);
            const PairState v = random_pair(dims, seed + 11 * trial + 5);
            const double lhs = energy_inner(apply_operator(op, u), v);
            const double rhs = energy_inner(u, apply_operator(op, v));
            worst = std::max(worst, std::abs(lhs - rhs) /
                                        std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
        }
        seed += 997;
    }
    return finish("spectral.operator_self_adjoint", worst, 1e-12);
}

GroupResult operator_eigen_relations(std::uint64_t seed) {
    double worst = 0.0;
    for (const ModelDims& dims : {kMain, kAlt}) {
        std::mt19937_64 rng(seed++);
        std::uniform_real_distribution<double> unif(0.0, 1.0 / dims.classes);
        for (int trial = 0; trial < 5; ++trial) {
            const double beta = unif(rng);
            const LinearizedOperator op{dims, beta};
            for (Eigenspace space : kAllSpaces) {
                PairState u = random_eigenspace_element(space, dims, seed + trial);
                const double norm = energy_norm(u);
                if (norm == 0.0) continue; // empty eigenspace (e.g. E3 at N = 1)
                u.features /= norm;
                u.weights /= norm;
                const double lambda = eigenvalue(space, dims, beta);
                const PairState lu = apply_operator(op, u);
                const PairState defect{lu.features - lambda * u.features,
                                       lu.weights - lambda * u.weights};
                worst = std::max(worst, energy_norm(defect));
            }
        }
        seed += 997;
    }
    return finish("spectral.operator_eigen_relations", worst, 1e-12);
}

GroupResult projector_algebra(std::uint64_t seed) {
    double worst = 0.0;
    for (const ModelDims& dims : {kMain, kAlt}) {
        for (int trial = 0; trial < 5; ++trial) {
            const PairState u = random_pair(dims, seed + 13 * trial);
            const PairState v = random_pair(dims, seed + 13 * trial + 7);
            const double scale = std::max(energy_norm(u), 1e-300);

            PairState sum{Matrix::Zero(u.features.rows(), u.features.cols()),
                          Matrix::Zero(u.weights.rows(), u.weights.cols())};
            for (Eigenspace space : kAllSpaces) {
                const PairState pu = project(space, u);
                worst = std::max(worst,
                                 energy_norm(pair_diff(project(space, pu), pu)) / scale);
                const double self_adj =
                    std::abs(energy_inner(pu, v) - energy_inner(u, project(space, v)));
                worst = std::max(worst,
                                 self_adj / (energy_norm(u) * energy_norm(v)));
                for (Eigenspace other : kAllSpaces)
                    if (other != space)
                        worst = std::max(
                            worst, energy_norm(project(other, pu)) / scale);
                sum.features += pu.features;
                sum.weights += pu.weights;
            }
            worst = std::max(worst, energy_norm(pair_diff(sum, u)) / scale);
        }
        seed += 997;
    }
    return finish("spectral.projector_algebra", worst, 1e-12);
}

GroupResult pythagorean_identity(std::uint64_t seed) {
    double worst = 0.0;
    for (const ModelDims& dims : {kMain, kAlt}) {
        for (int trial = 0; trial < 5; ++trial) {
            const PairState u = random_pair(dims, seed + 17 * trial);
            double parts = 0.0;
            for (Eigenspace space : kAllSpaces) {
                const double n = energy_norm(project(space, u));
                parts += n * n;
            }
            const double total = energy_inner(u, u);
            worst = std::max(worst, std::abs(total - parts) / total);
        }
        seed += 997;
    }
    return finish("spectral.pythagorean_identity", worst, 1e-12);
}

GroupResult t_equals_e1plus(std::uint64_t seed) {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const PairState u = random_pair(kMain, seed + trial);
        const PairState on_t = project(Eigenspace::E1Plus, u);
        worst = std::max(worst,
                         t_membership_defect(on_t) / std::max(energy_norm(u), 1e-300));
    }
    return finish("spectral.t_equals_e1plus", worst, 1e-12);
}

GroupResult descent_monotonicity(std::uint64_t seed) {
    const double lr = 0.1;
    ModelState z = random_init(kMain, InitSpec{1e-2, seed});
    std::vector<double> risks;
    std::vector<double> grad_norms;
    descend_inplace(z, lr, 3000, [&](int, const ModelState& s) {
        risks.push_back(empirical_risk(s));
        grad_norms.push_back(energy_norm(gradient(s)));
    });
    double worst = 0.0;
    std::string note;
    for (std::size_t k = 10; k + 1 < risks.size(); ++k) {
        worst = std::max(worst, risks[k + 1] - risks[k]);
        if (grad_norms[k] > 1e-10 && !(risks[k + 1] < risks[k]) && note.empty())
            note = "not strictly decreasing at iteration " + std::to_string(k);
    }
    GroupResult result = finish("flow.descent_monotonicity", worst, 0.0, note);
    result.pass = result.pass && note.empty();
    return result;
}

GroupResult gradient_stays_in_s(std::uint64_t seed) {
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const ModelState z = random_s_state(kMain, seed + trial);
        const ModelState g = gradient(z);
        const double scale = std::max(energy_norm(g), 1e-300);
        const double bias_defect =
            (g.bias - Vector::Constant(g.bias.size(), g.bias.mean())).norm();
        const double weight_defect =
            (Eigen::RowVectorXd::Ones(kMain.classes) * g.weights).norm();
        const double feature_defect =
            (g.features - features_from_weights(g.weights, kMain.per_class)).norm();
        worst = std::max(
            worst, std::max({bias_defect, weight_defect, feature_defect}) / scale);
    }
    return finish("flow.gradient_stays_in_s", worst, 1e-12);
}

GroupResult flow_stays_in_s(std::uint64_t seed) {
    double worst = 0.0;
    const IntegratorConfig cfg{1e-3, 10000, Method::Rk4Flow};
    for (int trial = 0; trial < 5; ++trial) {
        const ModelState z0 = random_s_state(kMain, seed + trial);
        const FlowTrajectory traj = gradient_flow(z0, cfg);
        for (std::size_t i = 0; i < traj.states.size(); i += 100)
            worst = std::max(worst, distance_to_S_relative(traj.states[i]));
        worst = std::max(worst, distance_to_S_relative(traj.states.back()));
    }
    return finish("flow.flow_stays_in_s", worst, 1e-8);
}

// Comparison horizon ends at t = 8: the cubic flow grows every tiny singular
// value at rate sqrt(N), so the ~1e-15 rank contamination of any double
// precision W0 reaches ~3e-8 by t = 10 along every computational route, and
// route-to-route agreement below 1e-8 is only meaningful while the amplified
// contamination stays under that level.
GroupResult reduced_full_consistency(std::uint64_t seed) {
    const double t_end = 8.0;
    const IntegratorConfig cfg{1e-3, 8000, Method::Rk4Flow};
    double worst_w = 0.0;
    double worst_b = 0.0;
    double worst_analytic = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        ModelState z0 = random_s_state(kMain, seed + trial);
        // moderate weight scale: keeps the cubic flow well inside the RK4
        // accuracy budget while still crossing the logistic transient
        z0.weights *= 2.0 / z0.weights.norm();
        z0.features = features_from_weights(z0.weights, kMain.per_class);
        const double alpha = alpha_from_bias(z0.bias);
        const FlowTrajectory full = gradient_flow(z0, cfg);
        const ReducedTrajectory reduced =
            reduced_flow_numeric(z0.weights, t_end, kMain.per_class, cfg);
        for (std::size_t i = 0; i < full.states.size(); i += 250) {
            const double t = full.times[i];
            worst_w = std::max(worst_w,
                               (full.states[i].weights - reduced.weights[i]).norm());
            worst_b = std::max(
                worst_b,
                (full.states[i].bias - bias_closed_form(t, kMain, alpha)).norm());
            worst_analytic = std::max(
                worst_analytic,
                (full.states[i].weights -
                 reduced_flow_analytic(z0.weights, t, kMain.per_class))
                    .norm());
        }
    }
    std::ostringstream note;
    note << "bias defect " << worst_b << ", logistic defect " << worst_analytic;
    GroupResult result =
        finish("flow.reduced_full_consistency", worst_w, 1e-8, note.str());
    result.pass = result.pass && worst_b <= 1e-8 && worst_analytic <= 1e-6;
    return result;
}

GroupResult linearized_analytic_agreement(std::uint64_t seed) {
    const IntegratorConfig cfg{1e-3, 0, Method::Rk4Flow};
    double worst = 0.0;
    double worst_bias = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const PairState u0 = random_pair(kMain, seed + trial);
        const FlowTrajectory traj = linearized_flow_numeric(u0, 2.0, cfg);
        for (double t : {0.5, 1.0, 2.0}) {
            const auto idx = static_cast<std::size_t>(std::llround(t / cfg.step_size));
            const PairState analytic = linearized_flow_analytic(u0, t, kMain);
            const PairState numeric = pair_of(traj.states[idx]);
            worst = std::max(worst, energy_norm(pair_diff(numeric, analytic)) /
                                        std::max(energy_norm(analytic), 1e-300));
            worst_bias = std::max(
                worst_bias,
                (traj.states[idx].bias - bias_closed_form(t, kMain, 1.0)).norm());
        }
    }
    std::ostringstream note;
    note << "bias defect " << worst_bias;
    GroupResult result =
        finish("flow.linearized_analytic_agreement", worst, 1e-6, note.str());
    result.pass = result.pass && worst_bias <= 1e-8;
    return result;
}

GroupResult initial_growth_bound(std::uint64_t seed) {
    const IntegratorConfig cfg{1e-3, 0, Method::Rk4Flow};
    const double root_n = std::sqrt(static_cast<double>(kMain.per_class));
    const double envelope = std::exp(1.0 / (kMain.classes * root_n));
    double worst = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 10; ++trial) {
        const PairState u0 = random_pair(kMain, seed + trial, 1e-1);
        const PairState on_t = project(Eigenspace::E1Plus, u0);
        const double off_t = energy_norm(pair_diff(u0, on_t));
        const FlowTrajectory traj = linearized_flow_numeric(u0, 3.0, cfg);
        for (std::size_t i = 0; i < traj.states.size(); i += 30) {
            const double t = traj.times[i];
            const double growth = std::exp(root_n * t);
            const PairState drift{traj.states[i].features - growth * on_t.features,
                                  traj.states[i].weights - growth * on_t.weights};
            worst = std::max(worst, energy_norm(drift) - envelope * off_t);
        }
    }
    return finish("flow.initial_growth_bound", worst, 1e-6);
}

GroupResult rk4_order(std::uint64_t seed) {
    const ModelState z0 = random_state(kMain, seed, 0.5);
    const auto terminal = [&](double h) {
        const IntegratorConfig cfg{h, static_cast<int>(std::llround(1.0 / h)),
                                   Method::Rk4Flow};
        return gradient_flow(z0, cfg).states.back();
    };
    const ModelState ref = terminal(0.005);
    const ModelState coarse = terminal(0.02);
    const ModelState fine = terminal(0.01);
    const double err_coarse =
        energy_norm(ModelState{coarse.features - ref.features,
                               coarse.weights - ref.weights, coarse.bias - ref.bias});
    const double err_fine =
        energy_norm(ModelState{fine.features - ref.features,
                               fine.weights - ref.weights, fine.bias - ref.bias});
    const double ratio = err_coarse / std::max(err_fine, 1e-300);
    std::ostringstream note;
    note << "error ratio " << ratio << " (expected near 17)";
    return finish("flow.rk4_order", std::abs(ratio - 17.0), 5.0, note.str());
}

GroupResult logistic_closed_form(std::uint64_t seed) {
    (void)seed;
    const int per_class = 3;
    const double root_n = std::sqrt(static_cast<double>(per_class));
    const auto scalar_rk4 = [&](double lambda0, double t_end) {
        const double h = 1e-4;
        const auto f = [&](double l) { return 2.0 * l * (root_n - l); };
        double l = lambda0;
        double t = 0.0;
        while (t < t_end - 1e-12) {
            const double dt = std::min(h, t_end - t);
            const double k1 = f(l);
            const double k2 = f(l + 0.5 * dt * k1);
            const double k3 = f(l + 0.5 * dt * k2);
            const double k4 = f(l + dt * k3);
            l += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
        }
        return l;
    };
    const auto closed = [&](double lambda0, double t) {
        return root_n * lambda0 /
               (lambda0 + (root_n - lambda0) * std::exp(-2.0 * root_n * t));
    };
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.0})
        worst = std::max(worst, std::abs(closed(0.01, t) - scalar_rk4(0.01, t)));
    // fixed points
    worst = std::max(worst, std::abs(closed(root_n, 5.0) - root_n));
    worst = std::max(worst, std::abs(closed(0.0, 5.0)));
    return finish("flow.logistic_closed_form", worst, 1e-8);
}

GroupResult gram_limit_agreement(std::uint64_t seed) {
    const IntegratorConfig cfg{1e-3, 0, Method::Rk4Flow};
    const double root_n = std::sqrt(static_cast<double>(kMain.per_class));
    double worst = 0.0;
    double worst_snc1 = 0.0;
    const int c = kMain.classes;
    const Matrix snc1_target =
        root_n * (Matrix::Identity(c, c) - Matrix::Constant(c, c, 1.0 / c));
    for (int trial = 0; trial < 3; ++trial) {
        std::mt19937_64 rng(seed + trial);
        Matrix w0 = gaussian(c, kMain.feature_dim, rng);
        w0.rowwise() -= w0.colwise().mean();
        const Matrix limit = gram_limit(w0, kMain.per_class);
        worst_snc1 = std::max(worst_snc1, (limit - snc1_target).norm());
        const ReducedTrajectory traj =
            reduced_flow_numeric(w0, 10.0 / root_n, kMain.per_class, cfg);
        const Matrix gram = traj.weights.back() * traj.weights.back().transpose();
        worst = std::max(worst, (gram - limit).norm());
    }
    std::ostringstream note;
    note << "limit vs simplex Gram " << worst_snc1;
    GroupResult result = finish("flow.gram_limit_agreement", worst, 1e-3, note.str());
    result.pass = result.pass && worst_snc1 <= 1e-12;
    return result;
}

GroupResult snc_implies_nc(std::uint64_t seed) {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const ModelDims& dims = kSncDims[trial % kSncDims.size()];
        const ModelState z = synthesize_snc_point(dims, seed + trial);
        const NcReport nc = nc_report(z);
        worst = std::max({worst, nc.nc1_within_class, nc.nc2_equinorm, nc.nc2_gram,
                          nc.nc3_selfdual, nc.nc4_disagreement});
    }
    return finish("metrics.snc_implies_nc", worst, 1e-10);
}

GroupResult in_s_risk_decomposition(std::uint64_t seed) {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const ModelState z = random_s_state(kMain, seed + trial);
        const SncErrors errors = snc_errors(z);
        const double risk = empirical_risk(z);
        const double via_errors = 0.5 * errors.snc1 * errors.snc1 +
                                  0.5 * kMain.samples() * errors.snc3 * errors.snc3;
        worst = std::max(worst,
                         std::abs(risk - via_errors) / std::max(risk, 1e-300));
    }
    // minimizer characterization: the synthesized point sits at zero on both sides
    const ModelState snc = synthesize_snc_point(kMain, seed);
    const SncErrors at_min = snc_errors(snc);
    std::ostringstream note;
    note << "snc point risk " << empirical_risk(snc) << ", snc1 " << at_min.snc1
         << ", snc3 " << at_min.snc3;
    GroupResult result =
        finish("metrics.in_s_risk_decomposition", worst, 1e-12, note.str());
    result.pass = result.pass && empirical_risk(snc) <= 1e-18 &&
                  at_min.snc1 <= 1e-12 && at_min.snc3 <= 1e-12;
    return result;
}

GroupResult nc4_shift_invariance(std::uint64_t seed) {
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        ModelState z = random_state(kMain, seed + trial);
        const double base = nc_report(z).nc4_disagreement;
        for (double shift : {-2.5, 0.7, 1e3}) {
            ModelState shifted = z;
            shifted.bias.array() += shift;
            worst = std::max(worst,
                             std::abs(nc_report(shifted).nc4_disagreement - base));
        }
    }
    return finish("metrics.nc4_shift_invariance", worst, 0.0);
}

GroupResult snc2_scale_covariance(std::uint64_t seed) {
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const ModelState z = random_state(kMain, seed + trial);
        const double base = *snc_errors(z).snc2_rel;
        for (double s : {0.5, 2.0, 17.0}) {
            ModelState scaled = z;
            scaled.features *= s;
            scaled.weights *= s;
            worst = std::max(worst, std::abs(*snc_errors(scaled).snc2_rel - base) /
                                        std::max(base, 1e-300));
        }
    }
    // exact lifted form stays exact under scaling
    const ModelState s_state = random_s_state(kMain, seed + 99);
    ModelState scaled = s_state;
    scaled.features *= 17.0;
    scaled.weights *= 17.0;
    worst = std::max(worst, *snc_errors(scaled).snc2_rel);
    return finish("metrics.snc2_scale_covariance", worst, 1e-13);
}

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

ExperimentConfig small_config(std::uint64_t seed,
                              const std::filesystem::path& out) {
    ExperimentConfig cfg;
    cfg.epsilons = {1e-1, 1e-2};
    cfg.steps = 500;
    cfg.seed = seed;
    cfg.output_dir = out;
    cfg.emit_svg = false;
    return cfg;
}

} // namespace

GroupResult harness_determinism(std::uint64_t seed) {
    namespace fs = std::filesystem;
    const fs::path base =
        fs::temp_directory_path() / ("collapse_lab_verify_" + std::to_string(seed));
    const fs::path dir_a = base / "a";
    const fs::path dir_b = base / "b";
    bool identical = true;
    std::string note;
    for (const fs::path& dir : {dir_a, dir_b}) {
        ExperimentConfig cfg = small_config(seed, dir);
        write_outputs(cfg, run_experiment(cfg));
    }
    ExperimentConfig cfg = small_config(seed, dir_a);
    for (double eps : cfg.epsilons) {
        const std::string a = slurp(csv_path(dir_a, eps));
        const std::string b = slurp(csv_path(dir_b, eps));
        if (a.empty() || a != b) {
            identical = false;
            note = "csv mismatch for eps " + std::to_string(eps);
        }
    }
    std::error_code ec;
    fs::remove_all(base, ec);
    GroupResult result =
        finish("harness.determinism", identical ? 0.0 : 1.0, 0.0, note);
    return result;
}

GroupResult csv_rederivability(std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.epsilons = {1e-2};
    cfg.steps = 300;
    cfg.seed = seed;
    const std::vector<RunSeries> series = run_experiment(cfg);
    const RunSeries& run = series.front();
    const RunRecord& sample = run.records[run.records.size() / 2];

    ModelState z = random_init(cfg.dims, InitSpec{run.epsilon, cfg.seed});
    descend_inplace(z, cfg.learning_rate, sample.iteration, nullptr);
    const SncErrors errors = snc_errors(z);
    const auto rel = [](double a, double b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
    };
    double worst = rel(empirical_risk(z), sample.risk);
    worst = std::max(worst, rel(errors.snc1, sample.snc1));
    worst = std::max(worst, rel(*errors.snc2_rel, *sample.snc2_rel));
    worst = std::max(worst, rel(errors.snc3, sample.snc3));
    worst = std::max(worst, rel(distance_to_S_relative(z), sample.dist_s_rel));
    return finish("harness.csv_rederivability", worst, 1e-12);
}

GroupResult sweep_trends(const std::vector<RunSeries>& series, double risk_bound,
                         bool soft) {
    double worst = 0.0;
    std::ostringstream note;
    bool violated = false;

    const auto final_metric = [](const RunSeries& run, const std::string& name) {
        return metric_value(run.records.back(), name).value_or(0.0);
    };
    const auto max_dist_past_init = [](const RunSeries& run) {
        double max_dist = 0.0;
        for (const RunRecord& r : run.records)
            if (r.iteration >= 1) max_dist = std::max(max_dist, r.dist_s_rel);
        return max_dist;
    };

    for (const RunSeries& run : series) {
        if (run.diverged_at) {
            violated = true;
            note << "run eps " << run.epsilon << " diverged at step "
                 << *run.diverged_at << "; ";
            continue;
        }
        const double final_risk = run.records.back().risk;
        worst = std::max(worst, final_risk - risk_bound);
        if (final_risk >= risk_bound) {
            violated = true;
            note << "final risk " << final_risk << " at eps " << run.epsilon
                 << " above " << risk_bound << "; ";
        }
    }

    for (const std::string& name : {std::string("snc1"), std::string("snc2_rel"),
                                    std::string("snc3")}) {
        for (std::size_t i = 0; i + 1 < series.size(); ++i) {
            const double wide = final_metric(series[i], name);
            const double narrow = final_metric(series[i + 1], name);
            const double slack = 1e-9 * std::abs(wide);
            worst = std::max(worst, narrow - wide);
            if (narrow > wide + slack) {
                violated = true;
                note << name << " not non-increasing between eps " << series[i].epsilon
                     << " and " << series[i + 1].epsilon << "; ";
            }
        }
    }
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        const double wide = max_dist_past_init(series[i]);
        const double narrow = max_dist_past_init(series[i + 1]);
        worst = std::max(worst, narrow - wide);
        if (narrow > wide + 1e-9 * wide) {
            violated = true;
            note << "max dist_S_rel not non-increasing between eps "
                 << series[i].epsilon << " and " << series[i + 1].epsilon << "; ";
        }
    }

    GroupResult result;
    result.name = "harness.sweep_trends";
    result.worst = worst;
    result.tolerance = 0.0;
    result.note = note.str();
    result.pass = soft || !violated;
    if (soft && violated) result.note += "(soft: reported as warning)";
    return result;
}

std::vector<GroupResult> run_all(std::uint64_t seed) {
    std::vector<GroupResult> results;
    results.push_back(gradient_finite_difference(seed + 1));
    results.push_back(risk_residual_identity(seed + 2));
    results.push_back(zero_residual_equivalence(seed + 3));
    results.push_back(snc_synthesis(seed + 4));
    results.push_back(operator_self_adjoint(seed + 5));
    results.push_back(operator_eigen_relations(seed + 6));
    results.push_back(projector_algebra(seed + 7));
    results.push_back(pythagorean_identity(seed + 8));
    results.push_back(t_equals_e1plus(seed + 9));
    results.push_back(descent_monotonicity(seed + 10));
    results.push_back(gradient_stays_in_s(seed + 11));
    results.push_back(flow_stays_in_s(seed + 12));
    results.push_back(reduced_full_consistency(seed + 13));
    results.push_back(linearized_analytic_agreement(seed + 14));
    results.push_back(initial_growth_bound(seed + 15));
    results.push_back(rk4_order(seed + 16));
    results.push_back(logistic_closed_form(seed + 17));
    results.push_back(gram_limit_agreement(seed + 18));
    results.push_back(snc_implies_nc(seed + 19));
    results.push_back(in_s_risk_decomposition(seed + 20));
    results.push_back(nc4_shift_invariance(seed + 21));
    results.push_back(snc2_scale_covariance(seed + 22));
    results.push_back(harness_determinism(seed + 23));
    results.push_back(csv_rederivability(seed + 24));
    {
        ExperimentConfig cfg;
        cfg.steps = 1000;
        cfg.seed = seed + 25;
        results.push_back(sweep_trends(run_experiment(cfg), 1e-6, /*soft=*/true));
    }
    return results;
}

} // namespace collapse::checks
