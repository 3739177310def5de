#pragma once

#include "collapse/types.hpp"

namespace collapse {

// One-hot target matrix: classes x samples, block structure with a row of
// ones over each class block (the Kronecker product of I_C with a row of N
// ones).
Matrix target_matrix(const ModelDims& dims);

// Residual A = weights * features + bias * 1^T - target, classes x samples.
Matrix residual(const ModelState& state);

// Squared-loss empirical risk, 0.5 * |residual|_F^2.
double empirical_risk(const ModelState& state);

// Analytic gradient of the empirical risk, packaged with the same shapes as
// the state itself:
//   d/dfeatures = weights^T A,  d/dweights = A features^T,  d/dbias = A 1.
ModelState gradient(const ModelState& state);

// Gaussian init rescaled so |features|_F = |weights|_F = epsilon exactly
// (up to rounding); bias starts at zero. Deterministic given the seed.
ModelState random_init(const ModelDims& dims, const InitSpec& spec);

// Analytic point satisfying all three strong-collapse conditions:
//   weights * weights^T = sqrt(N) (I - (1/C) 1 1^T)
//   features           = (1/sqrt(N)) (weights (x) 1_N)^T
//   bias               = (1/C) 1
// Requires feature_dim >= classes - 1. Deterministic given the seed.
ModelState synthesize_snc_point(const ModelDims& dims, std::uint64_t seed);

// Lifts a classifier to the feature layout of the second strong-collapse
// condition: class block c holds per_class copies of row c of `weights`,
// scaled by 1/sqrt(per_class). Returns feature_dim x samples.
Matrix features_from_weights(const Matrix& weights, int per_class);

// Per-class column means of a feature matrix, feature_dim x classes.
Matrix class_means(const Matrix& features, const ModelDims& dims);

} // namespace collapse
