#pragma once

#include "liapcert/strong.hpp"

#include <functional>

namespace liapcert::gallery {

/// Spectral Galerkin truncation of a 1-D domain (0, L).
struct DiscretizationSpec {
    int n_modes;
    double L = 3.14159265358979323846;
    int quadrature_nodes = 0; ///< 0: default 16 * n_modes (>= 2 * n_modes)

    int effective_quadrature_nodes() const;
};

/// Real form (n = 2) of the complex-coupled oscillator
///   u'' + u' + lambda u + (c + i d) v = 0,  v'' + lambda v + (c - i d) u = 0:
/// A = lambda I2, C = [[c, -d], [d, c]] (multiplication by c + i d).
/// Requires 0 < sqrt(c^2 + d^2) < lambda.
strong::OperatorPair complex_scalar(double lambda, double c, double d);

/// Wave pair with strong coupling -gamma Laplacian, Dirichlet sine basis:
/// A = diag(mu_k), mu_k = (k pi / L)^2, C = gamma A. Requires gamma in (0, 1).
strong::OperatorPair wave_strong(const DiscretizationSpec& spec, double gamma);

/// Hinged plate with structural coupling: A = diag(mu_k^2),
/// C = gamma diag(mu_k). Requires gamma in (0, mu_1).
strong::OperatorPair plate_structural(const DiscretizationSpec& spec,
                                      double gamma);

/// Periodic string with skew first-order coupling on the mean-zero real
/// Fourier basis {cos, sin} per wavenumber: A = diag(nu_k I2),
/// nu_k = (2 pi k / L)^2, C = gamma block-skew with blocks
/// [[0, -kappa_k], [kappa_k, 0]], kappa_k = 2 pi k / L (so C^T = -C).
/// Refuses gamma beyond the numerically determined threshold where either
/// the V'-norm condition or positivity of the displayed base functional
/// breaks (threshold found by bisection and reported).
strong::OperatorPair string_periodic(const DiscretizationSpec& spec,
                                     double gamma);

/// The string's displayed Liapunov functional: the general H_eps of the pair
/// plus the lower-order (|u|^2 + |v|^2)/2 terms. (On the mean-zero space the
/// gradient norm is already coercive, so these terms are redundant; they are
/// kept to match the functional exactly.)
forms::QuadraticForm string_liapunov_form(const strong::OperatorPair& pair,
                                          double p, double eps);

/// Largest admissible |gamma| for the string at this discretization.
double string_gamma_threshold(const DiscretizationSpec& spec);

/// Wave pair with non-commuting potentials: A = diag(mu_k) + M_a,
/// C = gamma (diag(mu_k) + M_b), where (M_f)_{jk} = int f phi_j phi_k by
/// composite Gauss-Legendre quadrature. Requires min a, min b > -mu_1 and
/// gamma > 0; when the V'-norm condition fails the error reports the max
/// admissible gamma found by bisection.
strong::OperatorPair wave_potentials(const DiscretizationSpec& spec,
                                     double gamma,
                                     const std::function<double(double)>& a,
                                     const std::function<double(double)>& b);

/// Plate pair with multiplication perturbation: A = diag(mu_k^2) + M_m,
/// C = gamma diag(mu_k), m >= 0, gamma in (0, mu_1). The commutator identity
/// A C^{-1} - C^{-1} A = (1/gamma)(M_m D^{-1} - D^{-1} M_m), D = diag(mu_k),
/// is verified entrywise at construction.
strong::OperatorPair plate_multiplication(const DiscretizationSpec& spec,
                                          double gamma,
                                          const std::function<double(double)>& m);

/// Galerkin matrix of multiplication by f in the Dirichlet sine basis
/// (exposed for quadrature cross-checks).
Eigen::MatrixXd multiplication_matrix(const DiscretizationSpec& spec,
                                      const std::function<double(double)>& f);

} // namespace liapcert::gallery
