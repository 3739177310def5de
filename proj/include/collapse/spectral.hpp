#pragma once

#include "collapse/types.hpp"

namespace collapse {

// The five invariant eigenspaces of the linearized operator on pair space.
// E1Plus doubles as the subspace T; E3 is the kernel.
enum class Eigenspace { E1Plus, E1Minus, E2Plus, E2Minus, E3 };

// The self-adjoint map (H, W) -> (W^T M, M H^T) with
// M = target - beta * ones. The scalar beta stands in for the bias
// trajectory value (1 - e^{-CNt})/C; callers supply it directly.
struct LinearizedOperator {
    ModelDims dims;
    double beta = 0.0;
};

inline double beta_of_time(double t, const ModelDims& dims) {
    const double cn = static_cast<double>(dims.samples());
    return (1.0 - std::exp(-cn * t)) / static_cast<double>(dims.classes);
}

PairState apply_operator(const LinearizedOperator& op, const PairState& u);

// Orthogonal projection in the energy inner product, via closed forms.
PairState project(Eigenspace space, const PairState& u);

// Eigenvalue of the operator on the given eigenspace.
double eigenvalue(Eigenspace space, const ModelDims& dims, double beta);

// Dimension of the eigenspace as a linear subspace of pair space.
int eigenspace_dim(Eigenspace space, const ModelDims& dims);

// Canonical members of the parametric eigenspace families. Parameters are
// centered internally (column sums against the all-ones vector for E1,
// per-class means for E3), so any input yields a valid member.
PairState e1_element(const Matrix& weights, int per_class, bool positive);
PairState e2_element(const Vector& direction, const ModelDims& dims, bool positive);
PairState e3_element(const Matrix& features, const ModelDims& dims);

// Projection onto the invariant subspace S of full states: the pair part
// maps onto E1Plus, the bias part onto span of the all-ones vector.
ModelState project_S(const ModelState& state);

// |Z - Pi_S Z|_E / |Z|_E in [0, 1]. Throws on the zero state.
double distance_to_S_relative(const ModelState& state);

// Membership defect for T = E1Plus: how far (H, W) is from satisfying
// H = (1/sqrt(N)) (W (x) 1_N)^T and 1^T W = 0, in energy norm.
double t_membership_defect(const PairState& u);

} // namespace collapse
