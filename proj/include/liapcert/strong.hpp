#pragma once

#include "liapcert/forms.hpp"

#include <Eigen/Dense>

namespace liapcert::strong {

/// Operator pair (A, C) of the strongly coupled system
///   u'' + u' + A u + C v = 0
///   v''      + A v + C* u = 0
/// in an H-orthonormal Galerkin basis (the Gram matrix is the identity).
/// A must be symmetric positive definite; C invertible. The V-norm is
/// |A^{1/2} u|, the V'-norm |A^{-1/2} u|.
struct OperatorPair {
    Eigen::MatrixXd A;
    Eigen::MatrixXd C;
    int n = 0;

    Eigen::MatrixXd A_half;     ///< A^{1/2}
    Eigen::MatrixXd A_inv_half; ///< A^{-1/2}
    Eigen::MatrixXd A_inv;      ///< A^{-1}
    Eigen::MatrixXd C_adjoint;  ///< C^T
    double lambda1 = 0.0;       ///< min eigenvalue of A
    double c_cond = 0.0;        ///< condition number of C (inf if singular)

    static OperatorPair create(Eigen::MatrixXd A, Eigen::MatrixXd C);
};

/// Operator norms entering the admissibility conditions. In finite
/// dimensions invertibility of C is the only real constraint; the magnitudes
/// are still reported as discretization-uniformity diagnostics.
struct ConditionReport {
    double norm_C_V_Vprime = 0.0;   ///< |A^{-1/2} C A^{-1/2}|, must be < 1
    double norm_Cinv_H_V = 0.0;     ///< |A^{1/2} C^{-1}|
    double norm_Cinv_Vprime_H = 0.0;///< |C^{-1} A^{1/2}|
    double norm_commutator_D = 0.0; ///< |A C^{-1} - C^{-1} A| on H
    bool c_invertible = false;
    bool passes = false;            ///< norm_C_V_Vprime < 1 and C invertible
};

ConditionReport check_conditions(const OperatorPair& pair);

/// Flow matrix of the first-order system: u' = w, v' = z,
/// w' = -A u - C v - w, z' = -A v - C^T u. Low-level overload for callers
/// that already hold raw matrices.
forms::LinearFlow generator(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C);
forms::LinearFlow generator(const OperatorPair& pair);

/// Base energy H0 = (|A^{1/2}u|^2 + |A^{1/2}v|^2 + |w|^2 + |z|^2)/2 + <Cv, u>.
/// Its derivative along the generator is exactly -|w|^2 for every C; the
/// coupling enters as the exact state-space-symmetric blocks (C/2, C^T/2).
forms::QuadraticForm base_energy_form(const OperatorPair& pair);

/// The strict Liapunov candidate
///   H_eps = H0 - eps (v,z) + p eps (u,w)
///           + ((p+1) eps / 2) [<A C^{-1} w, v> - <C^{-1} A u, z>].
/// Refuses (with the report attached to the message) when the admissibility
/// conditions fail.
forms::QuadraticForm liapunov_form_strong(const OperatorPair& pair, double p,
                                          double eps);

/// Certifies H_eps: positivity margin, strictness rate vs H_eps itself, and
/// the slack of the dissipation bound
///   dH_eps/dt <= -(eps/2)(|w|^2 + |z|^2)
///               - ((p-1) eps / 4)(1 - |C|_{V,V'})(|A^{1/2}u|^2 + |A^{1/2}v|^2)
/// (min eigenvalue of the difference; nonnegative when the bound holds).
forms::CertificateReport certify_strong(const OperatorPair& pair, double p,
                                        double eps);

/// Finds eps maximizing the certified rate by golden-section inside the
/// positivity window. Throws NoCertificateError when no eps certifies.
std::pair<double, forms::CertificateReport> auto_epsilon(
    const OperatorPair& pair, double p = 3.0);

} // namespace liapcert::strong
