#pragma once

#include "collapse/types.hpp"

#include <functional>
#include <vector>

namespace collapse {

enum class Method { EulerDescent, Rk4Flow };

struct IntegratorConfig {
    double step_size = 1e-3; // learning rate for descent, time step for flows
    int num_steps = 1000;
    Method method = Method::Rk4Flow;
};

struct FlowTrajectory {
    std::vector<double> times;
    std::vector<ModelState> states;
};

struct ReducedTrajectory {
    std::vector<double> times;
    std::vector<Matrix> weights;
};

// Descent stops early once the gradient's energy norm falls below this;
// keeps recorded trajectory lengths reproducible without wasted iterations.
inline constexpr double kDescentGradientFloor = 1e-12;

// Plain gradient descent z <- z - step_size * grad. Runs in place, calling
// `observe(k, state)` for k = 0 (initial state) and after every accepted
// step. Returns the last step index taken. Throws divergence_error naming
// the step that produced a non-finite entry.
int descend_inplace(ModelState& state, double learning_rate, int num_steps,
                    const std::function<void(int, const ModelState&)>& observe);

FlowTrajectory gradient_descent(const ModelState& z0, const IntegratorConfig& cfg);

// Classical fixed-step RK4 on Z' = -grad R(Z).
FlowTrajectory gradient_flow(const ModelState& z0, const IntegratorConfig& cfg);

// RK4 on the partially decoupled system in which the residual is replaced
// by bias * 1^T - target: feature/weight growth driven by the bias
// trajectory alone. The bias starts at zero and rides along in the states.
FlowTrajectory linearized_flow_numeric(const PairState& u0, double t_end,
                                       const IntegratorConfig& cfg);

// Closed-form solution of the same system at time t via the five-eigenspace
// decomposition: exponential factors on E1, the double-exponential factor
// exp(+-(1 - e^{-CNt})/(C sqrt(N))) on E2, constant on the kernel.
PairState linearized_flow_analytic(const PairState& u0, double t,
                                   const ModelDims& dims);

// b(t) = ((1 - alpha e^{-CNt})/C) * 1; the modified system above starts at
// b(0) = 0, which is the case alpha = 1.
Vector bias_closed_form(double t, const ModelDims& dims, double alpha);

// RK4 on the cubic matrix flow W' = sqrt(N) W - W W^T W that governs the
// weights inside the invariant subspace. Requires 1^T w0 = 0.
ReducedTrajectory reduced_flow_numeric(const Matrix& w0, double t_end,
                                       int per_class, const IntegratorConfig& cfg);

// Closed form for the same flow: singular vectors are stationary and each
// squared singular value follows the logistic law
//   lambda(t) = sqrt(N) l0 / (l0 + (sqrt(N) - l0) e^{-2 sqrt(N) t}).
Matrix reduced_flow_analytic(const Matrix& w0, double t, int per_class);

// Limit Gram matrix sqrt(N) (I - Pi) where Pi projects onto ker(w0^T).
Matrix gram_limit(const Matrix& w0, int per_class);

// Reads alpha from a bias in span{1}: alpha = 1 - C * mean(b0). Refuses
// biases farther than 1e-10 from that span.
double alpha_from_bias(const Vector& b0);

} // namespace collapse
