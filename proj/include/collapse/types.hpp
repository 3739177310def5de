#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace collapse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Problem dimensions: `classes` labels, `per_class` samples per label,
// features living in R^feature_dim. The training set has classes * per_class
// columns, laid out in contiguous class blocks of size per_class.
struct ModelDims {
    int classes = 0;     // C >= 2
    int per_class = 0;   // N >= 1
    int feature_dim = 0; // p >= 1

    int samples() const { return classes * per_class; }

    void validate() const {
        if (classes < 2 || per_class < 1 || feature_dim < 1)
            throw std::domain_error(
                "ModelDims: need classes >= 2, per_class >= 1, feature_dim >= 1");
    }

    bool operator==(const ModelDims&) const = default;
};

// Full optimization variable Z = (features, weights, bias).
//   features : feature_dim x samples, column i is the feature vector of sample i
//   weights  : classes x feature_dim, linear classifier
//   bias     : classes
struct ModelState {
    Matrix features;
    Matrix weights;
    Vector bias;
};

// The (features, weights) pair; carries the energy norm
// |(H,W)|_E^2 = |H|_F^2 + |W|_F^2.
struct PairState {
    Matrix features;
    Matrix weights;
};

// Random initialization: features and weights drawn i.i.d. Gaussian, then
// rescaled so each has Frobenius norm `epsilon`; bias starts at zero.
struct InitSpec {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

// Thrown when an integration step produces a non-finite entry.
class divergence_error : public std::runtime_error {
public:
    divergence_error(int step, const std::string& what_happened)
        : std::runtime_error("divergence at step " + std::to_string(step) +
                             ": " + what_happened),
          step_(step) {}

    int step() const { return step_; }

private:
    int step_;
};

inline double energy_inner(const PairState& a, const PairState& b) {
    return a.features.cwiseProduct(b.features).sum() +
           a.weights.cwiseProduct(b.weights).sum();
}

inline double energy_norm(const PairState& u) {
    return std::sqrt(energy_inner(u, u));
}

inline double energy_inner(const ModelState& a, const ModelState& b) {
    return a.features.cwiseProduct(b.features).sum() +
           a.weights.cwiseProduct(b.weights).sum() + a.bias.dot(b.bias);
}

inline double energy_norm(const ModelState& z) {
    return std::sqrt(energy_inner(z, z));
}

// Recovers the dimensions encoded by a state's shapes, throwing
// std::invalid_argument when the three components are inconsistent.
ModelDims dims_of(const ModelState& state);
ModelDims dims_of(const PairState& pair);

bool all_finite(const ModelState& state);
bool all_finite(const PairState& pair);

} // namespace collapse
