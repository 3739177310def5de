#include "collapse/flow.hpp"

#include "collapse/model.hpp"
#include "collapse/spectral.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace collapse {

namespace {

ModelState add_scaled(const ModelState& z, const ModelState& delta, double s) {
    return ModelState{z.features + s * delta.features,
                      z.weights + s * delta.weights, z.bias + s * delta.bias};
}

// One classical RK4 step for an autonomous system z' = f(z).
template <class Deriv>
ModelState rk4_step(const ModelState& z, double h, Deriv&& f) {
    const ModelState k1 = f(z);
    const ModelState k2 = f(add_scaled(z, k1, 0.5 * h));
    const ModelState k3 = f(add_scaled(z, k2, 0.5 * h));
    const ModelState k4 = f(add_scaled(z, k3, h));
    ModelState out = z;
    out.features += (h / 6.0) * (k1.features + 2.0 * k2.features +
                                 2.0 * k3.features + k4.features);
    out.weights += (h / 6.0) * (k1.weights + 2.0 * k2.weights +
                                2.0 * k3.weights + k4.weights);
    out.bias += (h / 6.0) * (k1.bias + 2.0 * k2.bias + 2.0 * k3.bias + k4.bias);
    return out;
}

template <class Deriv>
FlowTrajectory integrate_rk4(const ModelState& z0, double t_end, double h,
                             Deriv&& f) {
    if (h <= 0.0)
        throw std::domain_error("integrate_rk4: step size must be positive");
    FlowTrajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(z0);
    ModelState z = z0;
    double t = 0.0;
    int step = 0;
    while (t < t_end - 1e-12 * std::max(1.0, t_end)) {
        const double dt = std::min(h, t_end - t);
        z = rk4_step(z, dt, f);
        ++step;
        if (!all_finite(z))
            throw divergence_error(step, "non-finite entry in RK4 state");
        t = std::min(t + dt, t_end);
        traj.times.push_back(t);
        traj.states.push_back(z);
    }
    return traj;
}

void require_method(const IntegratorConfig& cfg, Method wanted, const char* who) {
    if (cfg.method != wanted)
        throw std::invalid_argument(std::string(who) + ": wrong integrator method");
    if (cfg.step_size <= 0.0)
        throw std::domain_error(std::string(who) + ": step size must be positive");
}

} // namespace

int descend_inplace(ModelState& state, double learning_rate, int num_steps,
                    const std::function<void(int, const ModelState&)>& observe) {
    if (observe) observe(0, state);
    int last = 0;
    for (int k = 1; k <= num_steps; ++k) {
        const ModelState grad = gradient(state);
        if (energy_norm(grad) < kDescentGradientFloor) break;
        state = add_scaled(state, grad, -learning_rate);
        if (!all_finite(state))
            throw divergence_error(k, "non-finite entry after descent step");
        if (observe) observe(k, state);
        last = k;
    }
    return last;
}

FlowTrajectory gradient_descent(const ModelState& z0, const IntegratorConfig& cfg) {
    require_method(cfg, Method::EulerDescent, "gradient_descent");
    dims_of(z0);
    FlowTrajectory traj;
    ModelState z = z0;
    descend_inplace(z, cfg.step_size, cfg.num_steps,
                    [&](int k, const ModelState& s) {
                        traj.times.push_back(k * cfg.step_size);
                        traj.states.push_back(s);
                    });
    return traj;
}

FlowTrajectory gradient_flow(const ModelState& z0, const IntegratorConfig& cfg) {
    require_method(cfg, Method::Rk4Flow, "gradient_flow");
    dims_of(z0);
    const double t_end = cfg.step_size * cfg.num_steps;
    return integrate_rk4(z0, t_end, cfg.step_size, [](const ModelState& z) {
        ModelState g = gradient(z);
        g.features = -g.features;
        g.weights = -g.weights;
        g.bias = -g.bias;
        return g;
    });
}

FlowTrajectory linearized_flow_numeric(const PairState& u0, double t_end,
                                       const IntegratorConfig& cfg) {
    require_method(cfg, Method::Rk4Flow, "linearized_flow_numeric");
    if (t_end <= 0.0)
        throw std::domain_error("linearized_flow_numeric: t_end must be positive");
    const ModelDims dims = dims_of(u0);
    const Matrix target = target_matrix(dims);

    ModelState z0{u0.features, u0.weights, Vector::Zero(dims.classes)};
    return integrate_rk4(z0, t_end, cfg.step_size, [&](const ModelState& z) {
        // modified residual b 1^T - Y, negated: m(c, i) = Y(c, i) - b_c
        Matrix m = target;
        m.colwise() -= z.bias;
        return ModelState{z.weights.transpose() * m, m * z.features.transpose(),
                          dims.per_class *
                              (Vector::Ones(dims.classes) - dims.classes * z.bias)};
    });
}

PairState linearized_flow_analytic(const PairState& u0, double t,
                                   const ModelDims& dims) {
    if (!(dims_of(u0) == dims))
        throw std::invalid_argument("linearized_flow_analytic: shape mismatch");
    const double root_n = std::sqrt(static_cast<double>(dims.per_class));
    const double cn = static_cast<double>(dims.samples());
    const double settle = (1.0 - std::exp(-cn * t)) / (dims.classes * root_n);

    struct Term {
        Eigenspace space;
        double factor;
    };
    const Term terms[] = {
        {Eigenspace::E1Plus, std::exp(root_n * t)},
        {Eigenspace::E1Minus, std::exp(-root_n * t)},
        {Eigenspace::E2Plus, std::exp(settle)},
        {Eigenspace::E2Minus, std::exp(-settle)},
        {Eigenspace::E3, 1.0},
    };

    PairState out{Matrix::Zero(u0.features.rows(), u0.features.cols()),
                  Matrix::Zero(u0.weights.rows(), u0.weights.cols())};
    for (const Term& term : terms) {
        const PairState part = project(term.space, u0);
        out.features += term.factor * part.features;
        out.weights += term.factor * part.weights;
    }
    return out;
}

Vector bias_closed_form(double t, const ModelDims& dims, double alpha) {
    dims.validate();
    const double cn = static_cast<double>(dims.samples());
    const double value = (1.0 - alpha * std::exp(-cn * t)) / dims.classes;
    return Vector::Constant(dims.classes, value);
}

namespace {

void require_centered_weights(const Matrix& w0, const char* who) {
    const double defect = (Eigen::RowVectorXd::Ones(w0.rows()) * w0).norm();
    if (defect > 1e-10 * std::max(1.0, w0.norm()))
        throw std::domain_error(std::string(who) +
                                ": weights must satisfy 1^T W = 0");
}

} // namespace

ReducedTrajectory reduced_flow_numeric(const Matrix& w0, double t_end,
                                       int per_class, const IntegratorConfig& cfg) {
    require_method(cfg, Method::Rk4Flow, "reduced_flow_numeric");
    require_centered_weights(w0, "reduced_flow_numeric");
    if (per_class < 1)
        throw std::domain_error("reduced_flow_numeric: per_class must be >= 1");
    if (t_end <= 0.0)
        throw std::domain_error("reduced_flow_numeric: t_end must be positive");
    const double root_n = std::sqrt(static_cast<double>(per_class));
    const auto f = [root_n](const Matrix& w) -> Matrix {
        return root_n * w - w * w.transpose() * w;
    };

    ReducedTrajectory traj;
    traj.times.push_back(0.0);
    traj.weights.push_back(w0);
    Matrix w = w0;
    double t = 0.0;
    int step = 0;
    while (t < t_end - 1e-12 * std::max(1.0, t_end)) {
        const double dt = std::min(cfg.step_size, t_end - t);
        const Matrix k1 = f(w);
        const Matrix k2 = f(w + 0.5 * dt * k1);
        const Matrix k3 = f(w + 0.5 * dt * k2);
        const Matrix k4 = f(w + dt * k3);
        w += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        ++step;
        if (!w.allFinite())
            throw divergence_error(step, "non-finite entry in reduced flow");
        t = std::min(t + dt, t_end);
        traj.times.push_back(t);
        traj.weights.push_back(w);
    }
    return traj;
}

Matrix reduced_flow_analytic(const Matrix& w0, double t, int per_class) {
    require_centered_weights(w0, "reduced_flow_analytic");
    if (per_class < 1)
        throw std::domain_error("reduced_flow_analytic: per_class must be >= 1");
    const double root_n = std::sqrt(static_cast<double>(per_class));

    Eigen::JacobiSVD<Matrix> svd(w0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector sigma0 = svd.singularValues();
    Vector sigma_t(sigma0.size());
    for (Eigen::Index i = 0; i < sigma0.size(); ++i) {
        const double l0 = sigma0[i] * sigma0[i];
        const double lt =
            root_n * l0 / (l0 + (root_n - l0) * std::exp(-2.0 * root_n * t));
        sigma_t[i] = std::sqrt(lt);
    }
    return svd.matrixU() * sigma_t.asDiagonal() * svd.matrixV().transpose();
}

Matrix gram_limit(const Matrix& w0, int per_class) {
    require_centered_weights(w0, "gram_limit");
    if (per_class < 1)
        throw std::domain_error("gram_limit: per_class must be >= 1");
    const double root_n = std::sqrt(static_cast<double>(per_class));

    Eigen::JacobiSVD<Matrix> svd(w0, Eigen::ComputeThinU);
    const Vector sigma = svd.singularValues();
    const double tol = std::max(w0.rows(), w0.cols()) *
                       std::numeric_limits<double>::epsilon() *
                       (sigma.size() > 0 ? sigma[0] : 0.0);
    Matrix range_projector = Matrix::Zero(w0.rows(), w0.rows());
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma[i] > tol)
            range_projector += svd.matrixU().col(i) * svd.matrixU().col(i).transpose();
    return root_n * range_projector;
}

double alpha_from_bias(const Vector& b0) {
    const auto classes = static_cast<int>(b0.size());
    if (classes < 2)
        throw std::invalid_argument("alpha_from_bias: bias too short");
    const double mean = b0.mean();
    const double defect = (b0 - Vector::Constant(classes, mean)).norm();
    if (defect > 1e-10 * std::max(1.0, b0.norm()))
        throw std::domain_error("alpha_from_bias: bias is not in span{1}");
    return 1.0 - classes * mean;
}

} // namespace collapse
