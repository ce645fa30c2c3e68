#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "liapcert/errors.hpp"
#include "liapcert/gallery.hpp"
#include "liapcert/scalar.hpp"
#include "liapcert/strong.hpp"
#include "liapcert/weak.hpp"

namespace py = pybind11;

using namespace liapcert;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Explicit quadratic Liapunov certificates for partially damped "
              "coupled second-order systems";

    py::register_exception<InvalidInputError>(m, "InvalidInputError",
                                              PyExc_ValueError);
    py::register_exception<CertificationError>(m, "CertificationError");
    py::register_exception<NumericalError>(m, "NumericalError");

    // forms ------------------------------------------------------------
    py::class_<forms::LinearFlow>(m, "LinearFlow")
        .def_property_readonly(
            "S", [](const forms::LinearFlow& f) { return f.S; })
        .def_property_readonly("dim", &forms::LinearFlow::dim);

    py::class_<forms::QuadraticForm>(m, "QuadraticForm")
        .def(py::init<Eigen::MatrixXd, std::string>(), py::arg("matrix"),
             py::arg("label") = "")
        .def_property_readonly("matrix", &forms::QuadraticForm::matrix)
        .def_property_readonly("label", &forms::QuadraticForm::label)
        .def("__call__", &forms::QuadraticForm::operator());

    py::class_<forms::CertificateReport>(m, "CertificateReport")
        .def_readonly("positivity_margin",
                      &forms::CertificateReport::positivity_margin)
        .def_readonly("gamma", &forms::CertificateReport::gamma)
        .def_readonly("delta", &forms::CertificateReport::delta)
        .def_readonly("valid", &forms::CertificateReport::valid)
        .def_readonly("notes", &forms::CertificateReport::notes);

    m.def("lie_derivative", &forms::lie_derivative, py::arg("Q"),
          py::arg("flow"));
    m.def("is_positive_definite", &forms::is_positive_definite, py::arg("Q"),
          py::arg("tol") = 0.0);
    m.def("strictness_rate", &forms::strictness_rate, py::arg("Q"),
          py::arg("flow"), py::arg("R"));
    m.def("sandwich_constants", &forms::sandwich_constants, py::arg("Q"),
          py::arg("R"));
    m.def("gram_liapunov", &forms::gram_liapunov, py::arg("flow"));

    // numerics ----------------------------------------------------------
    m.def("poly_roots", [](const std::vector<double>& coeffs) {
        return numerics::poly_roots(numerics::Polynomial(coeffs));
    }, py::arg("coeffs"), "Roots of a polynomial, coefficients highest first");
    m.def("sym_eig", &numerics::sym_eig, py::arg("M"));
    m.def("gen_eig_min", &numerics::gen_eig_min, py::arg("L"), py::arg("R"));
    m.def("expm", &numerics::expm, py::arg("S"), py::arg("t"));
    m.def("spectral_decrement", &numerics::spectral_decrement, py::arg("S"));

    // scalar --------------------------------------------------------------
    py::class_<scalar::ScalarParams>(m, "ScalarParams")
        .def(py::init<double, double>(), py::arg("lam"), py::arg("c"))
        .def_readonly("lam", &scalar::ScalarParams::lambda)
        .def_readonly("c", &scalar::ScalarParams::c);

    py::class_<scalar::RateBoundParams>(m, "RateBoundParams")
        .def_readonly("p", &scalar::RateBoundParams::p)
        .def_readonly("gamma_aux", &scalar::RateBoundParams::gamma_aux)
        .def_readonly("eps", &scalar::RateBoundParams::eps)
        .def_readonly("theta", &scalar::RateBoundParams::theta)
        .def_readonly("delta", &scalar::RateBoundParams::delta);

    m.def("flow_matrix", &scalar::flow_matrix, py::arg("params"));
    m.def("energy_form", &scalar::energy_form, py::arg("params"));
    m.def("liapunov_form", &scalar::liapunov_form, py::arg("params"),
          py::arg("p"), py::arg("eps"));
    m.def("char_poly", [](const scalar::ScalarParams& params) {
        return scalar::char_poly(params).coeffs;
    }, py::arg("params"));
    m.def("decrement_spectral", &scalar::decrement_spectral, py::arg("params"));
    m.def("real_root_onset", &scalar::real_root_onset, py::arg("lam"),
          py::arg("c"));
    m.def("near_optimal_params", &scalar::near_optimal_params, py::arg("eps"));
    m.def("rate_bound", &scalar::rate_bound, py::arg("params"),
          py::arg("gamma_aux"));
    m.def("optimize_rate_bound", &scalar::optimize_rate_bound,
          py::arg("params"));

    // strong ----------------------------------------------------------------
    py::class_<strong::OperatorPair>(m, "OperatorPair")
        .def_static("create", &strong::OperatorPair::create, py::arg("A"),
                    py::arg("C"))
        .def_readonly("A", &strong::OperatorPair::A)
        .def_readonly("C", &strong::OperatorPair::C)
        .def_readonly("n", &strong::OperatorPair::n)
        .def_readonly("lambda1", &strong::OperatorPair::lambda1);

    py::class_<strong::ConditionReport>(m, "ConditionReport")
        .def_readonly("norm_C_V_Vprime",
                      &strong::ConditionReport::norm_C_V_Vprime)
        .def_readonly("norm_Cinv_H_V", &strong::ConditionReport::norm_Cinv_H_V)
        .def_readonly("norm_Cinv_Vprime_H",
                      &strong::ConditionReport::norm_Cinv_Vprime_H)
        .def_readonly("norm_commutator_D",
                      &strong::ConditionReport::norm_commutator_D)
        .def_readonly("passes", &strong::ConditionReport::passes);

    m.def("check_conditions", &strong::check_conditions, py::arg("pair"));
    m.def("generator",
          py::overload_cast<const strong::OperatorPair&>(&strong::generator),
          py::arg("pair"));
    m.def("base_energy_form", &strong::base_energy_form, py::arg("pair"));
    m.def("liapunov_form_strong", &strong::liapunov_form_strong,
          py::arg("pair"), py::arg("p"), py::arg("eps"));
    m.def("certify_strong", &strong::certify_strong, py::arg("pair"),
          py::arg("p"), py::arg("eps"));
    m.def("auto_epsilon", &strong::auto_epsilon, py::arg("pair"),
          py::arg("p") = 3.0);

    // gallery ----------------------------------------------------------------
    py::class_<gallery::DiscretizationSpec>(m, "DiscretizationSpec")
        .def(py::init([](int n_modes, double L, int quadrature_nodes) {
                 return gallery::DiscretizationSpec{n_modes, L, quadrature_nodes};
             }),
             py::arg("n_modes"), py::arg("L") = 3.14159265358979323846,
             py::arg("quadrature_nodes") = 0)
        .def_readonly("n_modes", &gallery::DiscretizationSpec::n_modes)
        .def_readonly("L", &gallery::DiscretizationSpec::L);

    m.def("complex_scalar", &gallery::complex_scalar, py::arg("lam"),
          py::arg("c"), py::arg("d"));
    m.def("wave_strong", &gallery::wave_strong, py::arg("spec"),
          py::arg("gamma"));
    m.def("plate_structural", &gallery::plate_structural, py::arg("spec"),
          py::arg("gamma"));
    m.def("string_periodic", &gallery::string_periodic, py::arg("spec"),
          py::arg("gamma"));
    m.def("string_liapunov_form", &gallery::string_liapunov_form,
          py::arg("pair"), py::arg("p"), py::arg("eps"));
    m.def("wave_potentials", &gallery::wave_potentials, py::arg("spec"),
          py::arg("gamma"), py::arg("a"), py::arg("b"));
    m.def("plate_multiplication", &gallery::plate_multiplication,
          py::arg("spec"), py::arg("gamma"), py::arg("m"));

    // weak ----------------------------------------------------------------
    py::class_<weak::WeakSystem>(m, "WeakSystem")
        .def_static("create", &weak::WeakSystem::create, py::arg("A"),
                    py::arg("c"))
        .def_readonly("lambda1", &weak::WeakSystem::lambda1)
        .def_readonly("c", &weak::WeakSystem::c);

    py::class_<weak::WeakLiapunovParams>(m, "WeakLiapunovParams")
        .def_readonly("p", &weak::WeakLiapunovParams::p)
        .def_readonly("eps", &weak::WeakLiapunovParams::eps)
        .def_readonly("rho", &weak::WeakLiapunovParams::rho);

    m.def("make_weak_params", &weak::make_weak_params, py::arg("sys"),
          py::arg("p"), py::arg("eps"));
    m.def("weak_flow", &weak::flow, py::arg("sys"));
    m.def("liapunov_form_weak", &weak::liapunov_form_weak, py::arg("sys"),
          py::arg("params"));
    m.def("certify_weak", &weak::certify_weak, py::arg("sys"),
          py::arg("params"));
    m.def("auto_epsilon_weak", &weak::auto_epsilon_weak, py::arg("sys"),
          py::arg("p"));

    m.attr("__version__") = "0.1.0";
}
