#include "collapse/model.hpp"

#include <cmath>
#include <random>

namespace collapse {

ModelDims dims_of(const ModelState& state) {
    const auto classes = static_cast<int>(state.weights.rows());
    const auto feature_dim = static_cast<int>(state.weights.cols());
    const auto samples = static_cast<int>(state.features.cols());
    if (classes < 2 || feature_dim < 1 || samples < 1 ||
        state.features.rows() != feature_dim || samples % classes != 0 ||
        state.bias.size() != classes)
        throw std::invalid_argument("ModelState: inconsistent component shapes");
    return ModelDims{classes, samples / classes, feature_dim};
}

ModelDims dims_of(const PairState& pair) {
    const auto classes = static_cast<int>(pair.weights.rows());
    const auto feature_dim = static_cast<int>(pair.weights.cols());
    const auto samples = static_cast<int>(pair.features.cols());
    if (classes < 2 || feature_dim < 1 || samples < 1 ||
        pair.features.rows() != feature_dim || samples % classes != 0)
        throw std::invalid_argument("PairState: inconsistent component shapes");
    return ModelDims{classes, samples / classes, feature_dim};
}

bool all_finite(const ModelState& state) {
    return state.features.allFinite() && state.weights.allFinite() &&
           state.bias.allFinite();
}

bool all_finite(const PairState& pair) {
    return pair.features.allFinite() && pair.weights.allFinite();
}

Matrix target_matrix(const ModelDims& dims) {
    dims.validate();
    Matrix target = Matrix::Zero(dims.classes, dims.samples());
    for (int c = 0; c < dims.classes; ++c)
        target.block(c, c * dims.per_class, 1, dims.per_class).setOnes();
    return target;
}

Matrix residual(const ModelState& state) {
    const ModelDims dims = dims_of(state);
    Matrix a = state.weights * state.features;
    a.colwise() += state.bias;
    for (int c = 0; c < dims.classes; ++c)
        a.row(c).segment(c * dims.per_class, dims.per_class).array() -= 1.0;
    return a;
}

double empirical_risk(const ModelState& state) {
    return 0.5 * residual(state).squaredNorm();
}

ModelState gradient(const ModelState& state) {
    const Matrix a = residual(state);
    ModelState grad;
    grad.features = state.weights.transpose() * a;
    grad.weights = a * state.features.transpose();
    grad.bias = a.rowwise().sum();
    return grad;
}

namespace {

// Column-major fill keeps the draw order independent of Eigen internals.
Matrix gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            m(i, j) = normal(rng);
    return m;
}

Matrix orthonormal_columns(const Matrix& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

} // namespace

ModelState random_init(const ModelDims& dims, const InitSpec& spec) {
    dims.validate();
    if (spec.epsilon <= 0.0)
        throw std::domain_error("random_init: epsilon must be positive");

    std::mt19937_64 rng(spec.seed);
    ModelState state;
    state.features = gaussian_matrix(dims.feature_dim, dims.samples(), rng);
    state.weights = gaussian_matrix(dims.classes, dims.feature_dim, rng);
    state.features *= spec.epsilon / state.features.norm();
    state.weights *= spec.epsilon / state.weights.norm();
    state.bias = Vector::Zero(dims.classes);
    return state;
}

ModelState synthesize_snc_point(const ModelDims& dims, std::uint64_t seed) {
    dims.validate();
    const int c = dims.classes;
    if (dims.feature_dim < c - 1)
        throw std::domain_error(
            "synthesize_snc_point: infeasible, requires feature_dim >= classes - 1");

    // Orthonormal basis of the complement of the all-ones vector, from the
    // first C-1 columns of the centering matrix.
    Matrix centering = Matrix::Identity(c, c) -
                       Matrix::Constant(c, c, 1.0 / static_cast<double>(c));
    const Matrix q = orthonormal_columns(centering.leftCols(c - 1));

    std::mt19937_64 rng(seed);
    const Matrix p =
        orthonormal_columns(gaussian_matrix(dims.feature_dim, c - 1, rng));

    const double root_n = std::sqrt(static_cast<double>(dims.per_class));
    ModelState state;
    state.weights = std::pow(static_cast<double>(dims.per_class), 0.25) * q *
                    p.transpose();
    state.features = features_from_weights(state.weights, dims.per_class);
    state.bias = Vector::Constant(c, 1.0 / static_cast<double>(c));

    const Matrix gram_target =
        root_n * (Matrix::Identity(c, c) -
                  Matrix::Constant(c, c, 1.0 / static_cast<double>(c)));
    if ((state.weights * state.weights.transpose() - gram_target).norm() > 1e-10)
        throw std::logic_error("synthesize_snc_point: Gram identity violated");
    return state;
}

Matrix features_from_weights(const Matrix& weights, int per_class) {
    if (per_class < 1)
        throw std::invalid_argument("features_from_weights: per_class must be >= 1");
    const auto classes = static_cast<int>(weights.rows());
    const auto feature_dim = static_cast<int>(weights.cols());
    const double scale = 1.0 / std::sqrt(static_cast<double>(per_class));
    Matrix features(feature_dim, classes * per_class);
    for (int c = 0; c < classes; ++c)
        features.middleCols(c * per_class, per_class).colwise() =
            scale * weights.row(c).transpose();
    return features;
}

Matrix class_means(const Matrix& features, const ModelDims& dims) {
    if (features.rows() != dims.feature_dim || features.cols() != dims.samples())
        throw std::invalid_argument("class_means: features shape does not match dims");
    Matrix means(dims.feature_dim, dims.classes);
    for (int c = 0; c < dims.classes; ++c)
        means.col(c) =
            features.middleCols(c * dims.per_class, dims.per_class).rowwise().mean();
    return means;
}

} // namespace collapse
