#pragma once

#include "liapcert/forms.hpp"
#include "liapcert/numerics.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace liapcert::weak {

/// Weakly coupled system u'' + u' + A u + c v = 0, v'' + A v + c u = 0 with
/// scalar coupling 0 < |c| < lambda1(A). The dual pairing is realized as
/// <u, v>_* = (A^{-1} u, v), |w|_*^2 = (A^{-1} w, w).
struct WeakSystem {
    Eigen::MatrixXd A;
    double c = 0.0;
    int n = 0;
    double lambda1 = 0.0;
    Eigen::MatrixXd A_inv;

    static WeakSystem create(Eigen::MatrixXd A, double c);
};

/// (p, eps) with the admissibility condition (p+1)/(p-1) < lambda1/|c| and
/// the derived coefficient rho = (p+1) lambda1 / (2c).
struct WeakLiapunovParams {
    double p = 0.0;
    double eps = 0.0;
    double rho = 0.0;
};

/// Validates the admissibility condition and fills rho.
WeakLiapunovParams make_weak_params(const WeakSystem& sys, double p,
                                    double eps);

forms::LinearFlow flow(const WeakSystem& sys);

struct WeakEnergyForms {
    forms::QuadraticForm E;        ///< energy-space form, dE/dt = -|u'|^2
    forms::QuadraticForm E_minus1; ///< dual-norm energy, dE_-1/dt = -|u'|_*^2
    forms::QuadraticForm K;        ///< |u|^2 + |v|^2 + |w|_*^2 + |z|_*^2
};

WeakEnergyForms weak_energy_forms(const WeakSystem& sys);

/// H_eps = E - eps lambda1 (v, z)_* + p eps (u, w) + rho eps [(w,v) - (u,z)].
forms::QuadraticForm liapunov_form_weak(const WeakSystem& sys,
                                        const WeakLiapunovParams& params);

/// gamma is measured against K (a weaker form than H_eps): dH_eps/dt <=
/// -gamma K yields integrability of K, hence 1/t decay rather than
/// exponential decay in the energy norm.
forms::CertificateReport certify_weak(const WeakSystem& sys,
                                      const WeakLiapunovParams& params);

/// Golden-section choice of eps maximizing gamma for a given p.
std::pair<WeakLiapunovParams, forms::CertificateReport> auto_epsilon_weak(
    const WeakSystem& sys, double p);

/// Long-horizon simulation of the 1/t decay: records t * K(t), the observed
/// constant sup_{1 <= t <= T} t K(t) / H_eps(0) and the proof constant
/// (lambda1 + |c|) / ((lambda1 - |c|) gamma).
struct PolynomialDecayResult {
    numerics::DecayTrace trace;
    double C_observed = 0.0;
    double C_theoretical = 0.0;
    double gamma = 0.0;
};

PolynomialDecayResult polynomial_decay_study(const WeakSystem& sys,
                                             const WeakLiapunovParams& params,
                                             const Eigen::VectorXd& U0,
                                             double T = 2000.0,
                                             double dt = 0.5);

/// One row per Galerkin truncation A_n = diag((k pi / L)^2), k <= n, with the
/// same normalized initial datum across n.
struct UniformityRow {
    int n = 0;
    bool certified = false;
    double gamma = 0.0;
    double eps = 0.0;
    double C_observed = 0.0;
    double C_theoretical = 0.0;
    double spectral_decrement = 0.0;
    std::string note;
};

struct UniformityTable {
    std::vector<UniformityRow> rows;
    bool passes = false; ///< max/min ratio of C_observed over certified rows <= 2
};

UniformityTable uniformity_check(const std::vector<int>& mode_counts, double c,
                                 double p, double T = 2000.0, double L = 3.14159265358979323846);

} // namespace liapcert::weak
