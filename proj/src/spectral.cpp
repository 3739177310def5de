#include "collapse/spectral.hpp"

#include "collapse/model.hpp"

#include <cmath>

namespace collapse {

namespace {

// Subtract from each row the mean row, i.e. center column sums against 1_C.
Matrix center_rows(const Matrix& m) {
    return m - Vector::Ones(m.rows()) * m.colwise().mean();
}

// Subtract the per-class column mean inside every class block.
Matrix center_classes(const Matrix& features, const ModelDims& dims) {
    Matrix out = features;
    for (int c = 0; c < dims.classes; ++c) {
        auto block = out.middleCols(c * dims.per_class, dims.per_class);
        block.colwise() -= block.rowwise().mean().eval();
    }
    return out;
}

double sign_of(bool positive) { return positive ? 1.0 : -1.0; }

} // namespace

PairState apply_operator(const LinearizedOperator& op, const PairState& u) {
    const ModelDims dims = dims_of(u);
    if (!(dims == op.dims))
        throw std::invalid_argument("apply_operator: state shape does not match operator");
    Matrix m = target_matrix(dims);
    m.array() -= op.beta;
    return PairState{u.weights.transpose() * m, m * u.features.transpose()};
}

double eigenvalue(Eigenspace space, const ModelDims& dims, double beta) {
    const double root_n = std::sqrt(static_cast<double>(dims.per_class));
    switch (space) {
        case Eigenspace::E1Plus: return root_n;
        case Eigenspace::E1Minus: return -root_n;
        case Eigenspace::E2Plus: return root_n * (1.0 - dims.classes * beta);
        case Eigenspace::E2Minus: return -root_n * (1.0 - dims.classes * beta);
        case Eigenspace::E3: return 0.0;
    }
    throw std::logic_error("eigenvalue: unknown eigenspace");
}

int eigenspace_dim(Eigenspace space, const ModelDims& dims) {
    switch (space) {
        case Eigenspace::E1Plus:
        case Eigenspace::E1Minus:
            return dims.feature_dim * (dims.classes - 1);
        case Eigenspace::E2Plus:
        case Eigenspace::E2Minus:
            return dims.feature_dim;
        case Eigenspace::E3:
            return dims.feature_dim * dims.classes * (dims.per_class - 1);
    }
    throw std::logic_error("eigenspace_dim: unknown eigenspace");
}

PairState e1_element(const Matrix& weights, int per_class, bool positive) {
    const Matrix centered = center_rows(weights);
    return PairState{sign_of(positive) * features_from_weights(centered, per_class),
                     centered};
}

PairState e2_element(const Vector& direction, const ModelDims& dims, bool positive) {
    dims.validate();
    if (direction.size() != dims.feature_dim)
        throw std::invalid_argument("e2_element: direction length != feature_dim");
    const double root_n = std::sqrt(static_cast<double>(dims.per_class));
    PairState u;
    u.features = sign_of(positive) * direction *
                 Eigen::RowVectorXd::Ones(dims.samples());
    u.weights = root_n * Vector::Ones(dims.classes) * direction.transpose();
    return u;
}

PairState e3_element(const Matrix& features, const ModelDims& dims) {
    dims.validate();
    if (features.rows() != dims.feature_dim || features.cols() != dims.samples())
        throw std::invalid_argument("e3_element: features shape does not match dims");
    return PairState{center_classes(features, dims),
                     Matrix::Zero(dims.classes, dims.feature_dim)};
}

PairState project(Eigenspace space, const PairState& u) {
    const ModelDims dims = dims_of(u);
    const double root_n = std::sqrt(static_cast<double>(dims.per_class));

    switch (space) {
        case Eigenspace::E1Plus:
        case Eigenspace::E1Minus: {
            const double sign = space == Eigenspace::E1Plus ? 1.0 : -1.0;
            // Least-squares coefficient: rows g_c = sign*sqrt(N)*mean_c(H) + w_c,
            // centered against 1_C and halved.
            const Matrix g =
                sign * root_n * class_means(u.features, dims).transpose() +
                u.weights;
            const Matrix v = 0.5 * center_rows(g);
            return PairState{sign * features_from_weights(v, dims.per_class), v};
        }
        case Eigenspace::E2Plus:
        case Eigenspace::E2Minus: {
            const double sign = space == Eigenspace::E2Plus ? 1.0 : -1.0;
            const Vector z =
                (sign * u.features.rowwise().sum() +
                 root_n * u.weights.transpose() * Vector::Ones(dims.classes)) /
                (2.0 * dims.samples());
            PairState out;
            out.features = sign * z * Eigen::RowVectorXd::Ones(dims.samples());
            out.weights = root_n * Vector::Ones(dims.classes) * z.transpose();
            return out;
        }
        case Eigenspace::E3:
            return PairState{center_classes(u.features, dims),
                             Matrix::Zero(dims.classes, dims.feature_dim)};
    }
    throw std::logic_error("project: unknown eigenspace");
}

ModelState project_S(const ModelState& state) {
    const ModelDims dims = dims_of(state);
    const PairState on_t =
        project(Eigenspace::E1Plus, PairState{state.features, state.weights});
    ModelState out;
    out.features = on_t.features;
    out.weights = on_t.weights;
    out.bias = Vector::Constant(dims.classes, state.bias.mean());
    return out;
}

double distance_to_S_relative(const ModelState& state) {
    const double norm = energy_norm(state);
    if (norm == 0.0)
        throw std::domain_error("distance_to_S_relative: zero state");
    const ModelState on_s = project_S(state);
    ModelState defect;
    defect.features = state.features - on_s.features;
    defect.weights = state.weights - on_s.weights;
    defect.bias = state.bias - on_s.bias;
    return energy_norm(defect) / norm;
}

double t_membership_defect(const PairState& u) {
    const ModelDims dims = dims_of(u);
    const Matrix lifted = features_from_weights(u.weights, dims.per_class);
    const double feature_defect = (u.features - lifted).norm();
    const double sum_defect =
        (Eigen::RowVectorXd::Ones(dims.classes) * u.weights).norm();
    return std::hypot(feature_defect, sum_defect);
}

} // namespace collapse
