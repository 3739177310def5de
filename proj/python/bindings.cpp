#include "collapse/checks.hpp"
#include "collapse/experiment.hpp"
#include "collapse/flow.hpp"
#include "collapse/metrics.hpp"
#include "collapse/model.hpp"
#include "collapse/spectral.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace collapse;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Collapse dynamics laboratory: risk, gradients, eigenspace "
              "projections, flows, and collapse metrics for the unconstrained "
              "features model.";
#ifdef COLLAPSE_LAB_VERSION
    m.attr("__version__") = COLLAPSE_LAB_VERSION;
#endif

    py::register_exception<divergence_error>(m, "DivergenceError");

    py::class_<ModelDims>(m, "ModelDims")
        .def(py::init<int, int, int>(), py::arg("classes"), py::arg("per_class"),
             py::arg("feature_dim"))
        .def_readwrite("classes", &ModelDims::classes)
        .def_readwrite("per_class", &ModelDims::per_class)
        .def_readwrite("feature_dim", &ModelDims::feature_dim)
        .def("samples", &ModelDims::samples)
        .def("__repr__", [](const ModelDims& d) {
            return "ModelDims(classes=" + std::to_string(d.classes) +
                   ", per_class=" + std::to_string(d.per_class) +
                   ", feature_dim=" + std::to_string(d.feature_dim) + ")";
        });

    py::class_<ModelState>(m, "ModelState")
        .def(py::init([](Matrix features, Matrix weights, Vector bias) {
                 return ModelState{std::move(features), std::move(weights),
                                   std::move(bias)};
             }),
             py::arg("features"), py::arg("weights"), py::arg("bias"))
        .def_readwrite("features", &ModelState::features)
        .def_readwrite("weights", &ModelState::weights)
        .def_readwrite("bias", &ModelState::bias);

    py::class_<PairState>(m, "PairState")
        .def(py::init([](Matrix features, Matrix weights) {
                 return PairState{std::move(features), std::move(weights)};
             }),
             py::arg("features"), py::arg("weights"))
        .def_readwrite("features", &PairState::features)
        .def_readwrite("weights", &PairState::weights);

    py::class_<InitSpec>(m, "InitSpec")
        .def(py::init<double, std::uint64_t>(), py::arg("epsilon"), py::arg("seed"))
        .def_readwrite("epsilon", &InitSpec::epsilon)
        .def_readwrite("seed", &InitSpec::seed);

    m.def("energy_norm", py::overload_cast<const ModelState&>(&energy_norm));
    m.def("energy_norm", py::overload_cast<const PairState&>(&energy_norm));
    m.def("target_matrix", &target_matrix, py::arg("dims"));
    m.def("residual", &residual, py::arg("state"));
    m.def("empirical_risk", &empirical_risk, py::arg("state"));
    m.def("gradient", &gradient, py::arg("state"));
    m.def("random_init", &random_init, py::arg("dims"), py::arg("spec"));
    m.def("synthesize_snc_point", &synthesize_snc_point, py::arg("dims"),
          py::arg("seed"));
    m.def("features_from_weights", &features_from_weights, py::arg("weights"),
          py::arg("per_class"));
    m.def("class_means", &class_means, py::arg("features"), py::arg("dims"));

    py::enum_<Eigenspace>(m, "Eigenspace")
        .value("E1_PLUS", Eigenspace::E1Plus)
        .value("E1_MINUS", Eigenspace::E1Minus)
        .value("E2_PLUS", Eigenspace::E2Plus)
        .value("E2_MINUS", Eigenspace::E2Minus)
        .value("E3", Eigenspace::E3);

    py::class_<LinearizedOperator>(m, "LinearizedOperator")
        .def(py::init<ModelDims, double>(), py::arg("dims"), py::arg("beta"))
        .def_readwrite("dims", &LinearizedOperator::dims)
        .def_readwrite("beta", &LinearizedOperator::beta);

    m.def("beta_of_time", &beta_of_time, py::arg("t"), py::arg("dims"));
    m.def("apply_operator", &apply_operator, py::arg("op"), py::arg("u"));
    m.def("project", &project, py::arg("space"), py::arg("u"));
    m.def("eigenvalue", &eigenvalue, py::arg("space"), py::arg("dims"),
          py::arg("beta"));
    m.def("eigenspace_dim", &eigenspace_dim, py::arg("space"), py::arg("dims"));
    m.def("project_S", &project_S, py::arg("state"));
    m.def("distance_to_S_relative", &distance_to_S_relative, py::arg("state"));

    py::enum_<Method>(m, "Method")
        .value("EULER_DESCENT", Method::EulerDescent)
        .value("RK4_FLOW", Method::Rk4Flow);

    py::class_<IntegratorConfig>(m, "IntegratorConfig")
        .def(py::init<double, int, Method>(), py::arg("step_size"),
             py::arg("num_steps"), py::arg("method"))
        .def_readwrite("step_size", &IntegratorConfig::step_size)
        .def_readwrite("num_steps", &IntegratorConfig::num_steps)
        .def_readwrite("method", &IntegratorConfig::method);

    py::class_<FlowTrajectory>(m, "FlowTrajectory")
        .def_readonly("times", &FlowTrajectory::times)
        .def_readonly("states", &FlowTrajectory::states);

    py::class_<ReducedTrajectory>(m, "ReducedTrajectory")
        .def_readonly("times", &ReducedTrajectory::times)
        .def_readonly("weights", &ReducedTrajectory::weights);

    m.def("gradient_descent", &gradient_descent, py::arg("z0"), py::arg("cfg"));
    m.def("gradient_flow", &gradient_flow, py::arg("z0"), py::arg("cfg"));
    m.def("linearized_flow_numeric", &linearized_flow_numeric, py::arg("u0"),
          py::arg("t_end"), py::arg("cfg"));
    m.def("linearized_flow_analytic", &linearized_flow_analytic, py::arg("u0"),
          py::arg("t"), py::arg("dims"));
    m.def("bias_closed_form", &bias_closed_form, py::arg("t"), py::arg("dims"),
          py::arg("alpha"));
    m.def("reduced_flow_numeric", &reduced_flow_numeric, py::arg("w0"),
          py::arg("t_end"), py::arg("per_class"), py::arg("cfg"));
    m.def("reduced_flow_analytic", &reduced_flow_analytic, py::arg("w0"),
          py::arg("t"), py::arg("per_class"));
    m.def("gram_limit", &gram_limit, py::arg("w0"), py::arg("per_class"));
    m.def("alpha_from_bias", &alpha_from_bias, py::arg("b0"));

    py::class_<SncErrors>(m, "SncErrors")
        .def_readonly("snc1", &SncErrors::snc1)
        .def_readonly("snc2_rel", &SncErrors::snc2_rel)
        .def_readonly("snc3", &SncErrors::snc3);

    py::class_<ClassStatistics>(m, "ClassStatistics")
        .def_readonly("class_means", &ClassStatistics::class_means)
        .def_readonly("global_mean", &ClassStatistics::global_mean)
        .def_readonly("normalized_means", &ClassStatistics::normalized_means);

    py::class_<NcReport>(m, "NcReport")
        .def_readonly("nc1_within_class", &NcReport::nc1_within_class)
        .def_readonly("nc2_equinorm", &NcReport::nc2_equinorm)
        .def_readonly("nc2_gram", &NcReport::nc2_gram)
        .def_readonly("nc3_selfdual", &NcReport::nc3_selfdual)
        .def_readonly("nc4_disagreement", &NcReport::nc4_disagreement);

    py::class_<EtfCheck>(m, "EtfCheck")
        .def_readonly("alpha", &EtfCheck::alpha)
        .def_readonly("beta", &EtfCheck::beta)
        .def_readonly("is_etf", &EtfCheck::is_etf);

    m.def("snc_errors", &snc_errors, py::arg("state"));
    m.def("class_statistics", &class_statistics, py::arg("features"),
          py::arg("dims"));
    m.def("nc_report", &nc_report, py::arg("state"));
    m.def("verify_etf", &verify_etf, py::arg("vectors"));

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("dims", &ExperimentConfig::dims)
        .def_readwrite("epsilons", &ExperimentConfig::epsilons)
        .def_readwrite("learning_rate", &ExperimentConfig::learning_rate)
        .def_readwrite("steps", &ExperimentConfig::steps)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("output_dir", &ExperimentConfig::output_dir)
        .def_readwrite("emit_svg", &ExperimentConfig::emit_svg)
        .def_readwrite("record_stride", &ExperimentConfig::record_stride);

    py::class_<RunRecord>(m, "RunRecord")
        .def_readonly("iteration", &RunRecord::iteration)
        .def_readonly("risk", &RunRecord::risk)
        .def_readonly("snc1", &RunRecord::snc1)
        .def_readonly("snc2_rel", &RunRecord::snc2_rel)
        .def_readonly("snc3", &RunRecord::snc3)
        .def_readonly("dist_s_rel", &RunRecord::dist_s_rel);

    py::class_<RunSeries>(m, "RunSeries")
        .def_readonly("epsilon", &RunSeries::epsilon)
        .def_readonly("records", &RunSeries::records)
        .def_readonly("diverged_at", &RunSeries::diverged_at);

    m.def("run_experiment", &run_experiment, py::arg("cfg"),
          py::call_guard<py::gil_scoped_release>());
    m.def("write_csv", &write_csv, py::arg("records"), py::arg("path"));
    m.def("write_svg", &write_svg, py::arg("series"), py::arg("metric_name"),
          py::arg("path"));
    m.def("write_outputs", &write_outputs, py::arg("cfg"), py::arg("series"));

    py::class_<checks::GroupResult>(m, "GroupResult")
        .def_readonly("name", &checks::GroupResult::name)
        .def_readonly("pass_", &checks::GroupResult::pass)
        .def_readonly("worst", &checks::GroupResult::worst)
        .def_readonly("tolerance", &checks::GroupResult::tolerance)
        .def_readonly("note", &checks::GroupResult::note);

    m.def("run_verification", &checks::run_all, py::arg("seed") = 97,
          py::call_guard<py::gil_scoped_release>());
}
