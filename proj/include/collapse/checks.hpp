#pragma once

#include "collapse/experiment.hpp"
#include "collapse/spectral.hpp"
#include "collapse/types.hpp"

#include <string>
#include <vector>

namespace collapse::checks {

// Outcome of one named invariant group: the worst measured defect against
// the tolerance it was held to.
struct GroupResult {
    std::string name;
    bool pass = true;
    double worst = 0.0;
    double tolerance = 0.0;
    std::string note;
};

// -- model_core ------------------------------------------------------------
GroupResult gradient_finite_difference(std::uint64_t seed);
GroupResult risk_residual_identity(std::uint64_t seed);
GroupResult zero_residual_equivalence(std::uint64_t seed);
GroupResult snc_synthesis(std::uint64_t seed);

// -- spectral_geometry -----------------------------------------------------
GroupResult operator_self_adjoint(std::uint64_t seed);
GroupResult operator_eigen_relations(std::uint64_t seed);
GroupResult projector_algebra(std::uint64_t seed);
GroupResult pythagorean_identity(std::uint64_t seed);
GroupResult t_equals_e1plus(std::uint64_t seed);

// -- flow_dynamics ---------------------------------------------------------
GroupResult descent_monotonicity(std::uint64_t seed);
GroupResult gradient_stays_in_s(std::uint64_t seed);
GroupResult flow_stays_in_s(std::uint64_t seed);
GroupResult reduced_full_consistency(std::uint64_t seed);
GroupResult linearized_analytic_agreement(std::uint64_t seed);
GroupResult initial_growth_bound(std::uint64_t seed);
GroupResult rk4_order(std::uint64_t seed);
GroupResult logistic_closed_form(std::uint64_t seed);
GroupResult gram_limit_agreement(std::uint64_t seed);

// -- collapse_metrics ------------------------------------------------------
GroupResult snc_implies_nc(std::uint64_t seed);
GroupResult in_s_risk_decomposition(std::uint64_t seed);
GroupResult nc4_shift_invariance(std::uint64_t seed);
GroupResult snc2_scale_covariance(std::uint64_t seed);

// -- experiment_harness ----------------------------------------------------
GroupResult harness_determinism(std::uint64_t seed);
GroupResult csv_rederivability(std::uint64_t seed);

// Final-value trends across a finished sweep: risk below `risk_bound` for
// every run, and final snc errors plus max distance from S (over iterations
// past the random initialization) non-increasing as epsilon decreases.
// When `soft` is set a trend violation downgrades to a warning note.
GroupResult sweep_trends(const std::vector<RunSeries>& series,
                         double risk_bound, bool soft);

// Every group above, in module order, derived from one master seed.
std::vector<GroupResult> run_all(std::uint64_t seed);

// -- deterministic random inputs for checks and tests ----------------------
ModelState random_state(const ModelDims& dims, std::uint64_t seed,
                        double scale = 1.0);
PairState random_pair(const ModelDims& dims, std::uint64_t seed,
                      double scale = 1.0);
// A random member of the invariant subspace: centered Gaussian weights,
// features forced to the lifted form, bias a random multiple of ones.
ModelState random_s_state(const ModelDims& dims, std::uint64_t seed);
PairState random_eigenspace_element(Eigenspace space, const ModelDims& dims,
                                    std::uint64_t seed);

// Central-difference gradient of the empirical risk, coordinate by
// coordinate; the oracle for the analytic gradient.
ModelState finite_difference_gradient(const ModelState& state, double step);

} // namespace collapse::checks
