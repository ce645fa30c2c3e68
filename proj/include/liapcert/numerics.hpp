#pragma once

#include "liapcert/forms.hpp"

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <string>
#include <vector>

namespace liapcert::numerics {

/// Real polynomial, coefficients highest degree first. Degree in [1, 12],
/// nonzero leading coefficient.
struct Polynomial {
    std::vector<double> coeffs;

    explicit Polynomial(std::vector<double> c);

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    std::complex<double> operator()(std::complex<double> zeta) const;
    std::complex<double> derivative_at(std::complex<double> zeta) const;
};

/// All deg(p) roots with multiplicity: companion-matrix eigenvalues followed
/// by Newton polishing on the monic polynomial. Sorted by (Re, Im).
std::vector<std::complex<double>> poly_roots(const Polynomial& p);

/// Residual |p(z)| / (1 + |z|^deg) of the monic-normalized polynomial.
double root_residual(const Polynomial& p, std::complex<double> z);

/// Eigenvalues of a symmetric matrix, ascending. Rejects inputs with relative
/// asymmetry above 1e-12.
std::vector<double> sym_eig(const Eigen::MatrixXd& M);

/// Min eigenvalue of R^{-1/2} L R^{-1/2}; the largest gamma with L >= gamma R.
/// R must be symmetric positive definite (min eig > 1e-12 * max eig).
double gen_eig_min(const Eigen::MatrixXd& L, const Eigen::MatrixXd& R);

/// Max eigenvalue of the same pencil.
double gen_eig_max(const Eigen::MatrixXd& L, const Eigen::MatrixXd& R);

/// Scaling-and-squaring matrix exponential of S*t. Entries must be finite.
Eigen::MatrixXd expm(const Eigen::MatrixXd& S, double t);

/// Eigenvalues of a general square real matrix (for spectral abscissa work).
std::vector<std::complex<double>> general_eig(const Eigen::MatrixXd& S);

/// min over eigenvalues of -Re(eig): the logarithmic decrement of U' = S U.
double spectral_decrement(const Eigen::MatrixXd& S);

/// Spectral radius estimate by 20 power iterations (used as the RK4 guard).
double spectral_radius_estimate(const Eigen::MatrixXd& S);

enum class StepMethod { rk4, expm_step };

/// Simulated trajectory with named observed functionals.
struct DecayTrace {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::map<std::string, std::vector<double>> functionals;
};

/// Integrates U' = S U from U0, recording states at k*dt for k*dt <= T and
/// evaluating every observer per step (series keyed by observer label).
/// expm_step applies the cached exponential of S*dt and is exact per step;
/// rk4 enforces dt * spectral_radius(S) <= 1 and suggests a stable dt
/// otherwise.
DecayTrace integrate(const forms::LinearFlow& flow, const Eigen::VectorXd& U0,
                     double dt, double T, StepMethod method,
                     const std::vector<forms::QuadraticForm>& observers = {});

} // namespace liapcert::numerics
