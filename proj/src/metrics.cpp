#include "collapse/metrics.hpp"

#include "collapse/model.hpp"

#include <cmath>

namespace collapse {

SncErrors snc_errors(const ModelState& state) {
    const ModelDims dims = dims_of(state);
    const int c = dims.classes;
    const double root_n = std::sqrt(static_cast<double>(dims.per_class));

    const Matrix gram_target =
        root_n * (Matrix::Identity(c, c) - Matrix::Constant(c, c, 1.0 / c));

    SncErrors errors;
    errors.snc1 = (state.weights * state.weights.transpose() - gram_target).norm();
    const double feature_norm = state.features.norm();
    if (feature_norm > 0.0)
        errors.snc2_rel =
            (state.features - features_from_weights(state.weights, dims.per_class))
                .norm() /
            feature_norm;
    errors.snc3 = (state.bias - Vector::Constant(c, 1.0 / c)).norm();
    return errors;
}

ClassStatistics class_statistics(const Matrix& features, const ModelDims& dims) {
    dims.validate();
    ClassStatistics stats;
    stats.class_means = class_means(features, dims);
    stats.global_mean = stats.class_means.rowwise().mean();

    stats.normalized_means = Matrix(dims.feature_dim, dims.classes);
    double scale = 0.0;
    for (int c = 0; c < dims.classes; ++c)
        scale = std::max(scale, stats.class_means.col(c).norm());
    for (int c = 0; c < dims.classes; ++c) {
        const Vector centered = stats.class_means.col(c) - stats.global_mean;
        const double norm = centered.norm();
        if (norm <= 1e-13 * (1.0 + scale))
            throw std::domain_error(
                "class_statistics: degenerate class, mean coincides with global mean");
        stats.normalized_means.col(c) = centered / norm;
    }
    return stats;
}

namespace {

// Lowest index wins ties, so disagreement counts are deterministic.
int argmax(const Vector& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

} // namespace

NcReport nc_report(const ModelState& state) {
    const ModelDims dims = dims_of(state);
    const ClassStatistics stats = class_statistics(state.features, dims);
    const int c = dims.classes;
    NcReport report;

    // NC1: within-class scatter relative to total centered scatter.
    double within = 0.0;
    double total = 0.0;
    for (int i = 0; i < dims.samples(); ++i) {
        const int label = i / dims.per_class;
        within += (state.features.col(i) - stats.class_means.col(label)).squaredNorm();
        total += (state.features.col(i) - stats.global_mean).squaredNorm();
    }
    if (total == 0.0)
        throw std::domain_error("nc_report: all features coincide with the global mean");
    report.nc1_within_class = within / total;

    // NC2, equinorm half: coefficient of variation of the centered mean norms.
    Vector norms(c);
    for (int k = 0; k < c; ++k)
        norms[k] = (stats.class_means.col(k) - stats.global_mean).norm();
    const double mean_norm = norms.mean();
    const double variance = (norms.array() - mean_norm).square().mean();
    report.nc2_equinorm = std::sqrt(variance) / mean_norm;

    // NC2, angle half: Gram defect against the simplex frame.
    const Matrix simplex_gram =
        (static_cast<double>(c) / (c - 1)) * Matrix::Identity(c, c) -
        Matrix::Constant(c, c, 1.0 / (c - 1));
    report.nc2_gram = (stats.normalized_means.transpose() * stats.normalized_means -
                       simplex_gram)
                          .norm();

    // NC3: self-duality of classifier and centered class means.
    const double weights_norm = state.weights.norm();
    if (weights_norm == 0.0)
        throw std::domain_error("nc_report: zero classifier has no direction");
    report.nc3_selfdual = (state.weights.transpose() / weights_norm -
                           stats.normalized_means / stats.normalized_means.norm())
                              .norm();

    // NC4: fraction of training columns where the linear classifier and the
    // nearest-class-mean rule pick different labels.
    int disagreements = 0;
    for (int i = 0; i < dims.samples(); ++i) {
        const Vector z = state.features.col(i);
        const Vector scores = state.weights * z + state.bias;
        Vector neg_distances(c);
        for (int k = 0; k < c; ++k)
            neg_distances[k] = -(z - stats.class_means.col(k)).norm();
        if (argmax(scores) != argmax(neg_distances)) ++disagreements;
    }
    report.nc4_disagreement =
        static_cast<double>(disagreements) / static_cast<double>(dims.samples());
    return report;
}

EtfCheck verify_etf(const std::vector<Vector>& vectors) {
    if (vectors.empty())
        throw std::invalid_argument("verify_etf: empty tuple");
    const auto dim = vectors.front().size();
    const auto n = vectors.size();
    constexpr double kTol = 1e-10;

    for (const Vector& v : vectors) {
        if (v.size() != dim)
            throw std::invalid_argument("verify_etf: mixed dimensions");
        if (std::abs(v.norm() - 1.0) > kTol)
            throw std::domain_error("verify_etf: input vector is not unit norm");
    }

    EtfCheck check;
    // Tightness: the frame operator of a unit tuple has trace n, so the only
    // admissible constant is n/d.
    check.alpha = static_cast<double>(n) / static_cast<double>(dim);
    Matrix frame_operator = Matrix::Zero(dim, dim);
    for (const Vector& v : vectors) frame_operator += v * v.transpose();
    const bool tight =
        (frame_operator - check.alpha * Matrix::Identity(dim, dim)).norm() <= kTol;

    double min_sq = 1.0;
    double max_sq = 0.0;
    double sum_sq = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double sq = std::pow(vectors[i].dot(vectors[j]), 2);
            min_sq = std::min(min_sq, sq);
            max_sq = std::max(max_sq, sq);
            sum_sq += sq;
            ++pairs;
        }
    }
    const bool equiangular = pairs == 0 || (max_sq - min_sq) <= kTol;
    check.beta = pairs > 0 ? sum_sq / static_cast<double>(pairs) : 0.0;
    check.is_etf = tight && equiangular;
    return check;
}

} // namespace collapse
