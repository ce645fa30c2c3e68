#include "liapcert/numerics.hpp"

#include "liapcert/errors.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace liapcert::numerics {

namespace {

constexpr int kMaxPolyDegree = 12;

bool all_finite(const Eigen::MatrixXd& M) { return M.allFinite(); }

void check_symmetric(const Eigen::MatrixXd& M, const char* what) {
    if (M.rows() != M.cols()) {
        throw InvalidInputError(std::string(what) + ": matrix not square");
    }
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
        throw InvalidInputError(std::string(what) +
                                ": relative asymmetry above 1e-12");
    }
}

} // namespace

Polynomial::Polynomial(std::vector<double> c) : coeffs(std::move(c)) {
    if (coeffs.size() < 2) {
        throw InvalidInputError("Polynomial: degree must be at least 1");
    }
    if (degree() > kMaxPolyDegree) {
        throw InvalidInputError("Polynomial: degree above 12");
    }
    if (coeffs.front() == 0.0 || !std::isfinite(coeffs.front())) {
        throw InvalidInputError("Polynomial: leading coefficient must be nonzero");
    }
    for (double a : coeffs) {
        if (!std::isfinite(a)) {
            throw InvalidInputError("Polynomial: non-finite coefficient");
        }
    }
}

std::complex<double> Polynomial::operator()(std::complex<double> zeta) const {
    std::complex<double> acc = 0.0;
    for (double a : coeffs) {
        acc = acc * zeta + a;
    }
    return acc;
}

std::complex<double> Polynomial::derivative_at(std::complex<double> zeta) const {
    std::complex<double> acc = 0.0;
    const int deg = degree();
    for (int i = 0; i < deg; ++i) {
        acc = acc * zeta + coeffs[static_cast<size_t>(i)] * double(deg - i);
    }
    return acc;
}

double root_residual(const Polynomial& p, std::complex<double> z) {
    // Residual of the monic-normalized polynomial.
    const double lead = p.coeffs.front();
    return std::abs(p(z) / lead) /
           (1.0 + std::pow(std::abs(z), p.degree()));
}

std::vector<std::complex<double>> poly_roots(const Polynomial& p) {
    const int deg = p.degree();
    const double lead = p.coeffs.front();

    // Companion matrix of the monic polynomial: ones on the subdiagonal,
    // last column -a_i (a_i = coefficient of zeta^i).
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 0; i + 1 < deg; ++i) {
        companion(i + 1, i) = 1.0;
    }
    for (int i = 0; i < deg; ++i) {
        companion(i, deg - 1) = -p.coeffs[static_cast<size_t>(deg - i)] / lead;
    }

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("poly_roots: companion eigensolve failed");
    }

    std::vector<std::complex<double>> roots(static_cast<size_t>(deg));
    for (int i = 0; i < deg; ++i) {
        std::complex<double> z = solver.eigenvalues()(i);
        // Newton polishing on the monic polynomial; keep a step only while
        // it reduces |p|. Multiple roots stall with a tiny derivative and
        // simply keep the companion value.
        for (int it = 0; it < 8; ++it) {
            const std::complex<double> pz = p(z) / lead;
            const std::complex<double> dpz = p.derivative_at(z) / lead;
            if (std::abs(dpz) < 1e-300) break;
            const std::complex<double> z_next = z - pz / dpz;
            if (!(std::abs(p(z_next)) < std::abs(p(z) * (1.0 - 1e-15)))) break;
            z = z_next;
        }
        roots[static_cast<size_t>(i)] = z;
    }
    std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

std::vector<double> sym_eig(const Eigen::MatrixXd& M) {
    check_symmetric(M, "sym_eig");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("sym_eig: eigensolve did not converge");
    }
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

namespace {

Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& L,
                                        const Eigen::MatrixXd& R) {
    check_symmetric(L, "gen_eig");
    check_symmetric(R, "gen_eig (reference)");
    if (L.rows() != R.rows()) {
        throw InvalidInputError("gen_eig: dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rsolver(R);
    if (rsolver.info() != Eigen::Success) {
        throw NumericalError("gen_eig: reference eigensolve failed");
    }
    const double rmin = rsolver.eigenvalues()(0);
    const double rmax = rsolver.eigenvalues()(R.rows() - 1);
    if (!(rmin > 1e-12 * std::max(rmax, 0.0))) {
        throw InvalidInputError("gen_eig: reference form not positive definite");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(L, R);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("gen_eig: pencil eigensolve did not converge");
    }
    return solver.eigenvalues();
}

} // namespace

double gen_eig_min(const Eigen::MatrixXd& L, const Eigen::MatrixXd& R) {
    const Eigen::VectorXd ev = generalized_eigenvalues(L, R);
    return ev(0);
}

double gen_eig_max(const Eigen::MatrixXd& L, const Eigen::MatrixXd& R) {
    const Eigen::VectorXd ev = generalized_eigenvalues(L, R);
    return ev(ev.size() - 1);
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& S, double t) {
    if (S.rows() != S.cols()) {
        throw InvalidInputError("expm: matrix not square");
    }
    if (!all_finite(S) || !std::isfinite(t)) {
        throw InvalidInputError("expm: non-finite input");
    }
    return (S * t).exp();
}

std::vector<std::complex<double>> general_eig(const Eigen::MatrixXd& S) {
    if (S.rows() != S.cols() || !all_finite(S)) {
        throw InvalidInputError("general_eig: invalid matrix");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(S);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("general_eig: eigensolve did not converge");
    }
    std::vector<std::complex<double>> out(static_cast<size_t>(S.rows()));
    for (int i = 0; i < S.rows(); ++i) {
        out[static_cast<size_t>(i)] = solver.eigenvalues()(i);
    }
    return out;
}

double spectral_decrement(const Eigen::MatrixXd& S) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& z : general_eig(S)) {
        best = std::min(best, -z.real());
    }
    return best;
}

double spectral_radius_estimate(const Eigen::MatrixXd& S) {
    const int d = static_cast<int>(S.rows());
    Eigen::VectorXd x = Eigen::VectorXd::Ones(d);
    x(0) = 1.5; // break symmetry for alternating-sign spectra
    x.normalize();
    double rho = 0.0;
    for (int it = 0; it < 20; ++it) {
        Eigen::VectorXd y = S * x;
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        // Complex-dominant spectra make the ratio oscillate; keep the peak.
        rho = std::max(rho, norm);
        x = y / norm;
    }
    return rho;
}

DecayTrace integrate(const forms::LinearFlow& flow, const Eigen::VectorXd& U0,
                     double dt, double T, StepMethod method,
                     const std::vector<forms::QuadraticForm>& observers) {
    const auto& S = flow.S;
    if (U0.size() != S.rows()) {
        throw InvalidInputError("integrate: initial state dimension mismatch");
    }
    if (!(dt > 0.0) || !(T >= dt)) {
        throw InvalidInputError("integrate: need dt > 0 and T >= dt");
    }
    for (const auto& obs : observers) {
        if (obs.dim() != S.rows()) {
            throw InvalidInputError("integrate: observer dimension mismatch");
        }
    }
    for (size_t i = 0; i < observers.size(); ++i) {
        for (size_t j = i + 1; j < observers.size(); ++j) {
            if (observers[i].label() == observers[j].label()) {
                throw InvalidInputError("integrate: duplicate observer label '" +
                                        observers[i].label() + "'");
            }
        }
    }

    Eigen::MatrixXd step;
    if (method == StepMethod::expm_step) {
        step = expm(S, dt);
    } else {
        const double rho = spectral_radius_estimate(S);
        if (dt * rho > 1.0) {
            throw StepSizeError(
                "integrate: rk4 step unstable (dt * spectral_radius > 1)",
                0.9 / rho);
        }
    }

    const auto n_steps = static_cast<size_t>(std::floor(T / dt + 1e-9));
    DecayTrace trace;
    trace.times.reserve(n_steps + 1);
    trace.states.reserve(n_steps + 1);
    for (const auto& obs : observers) {
        trace.functionals[obs.label()].reserve(n_steps + 1);
    }

    Eigen::VectorXd U = U0;
    for (size_t k = 0; k <= n_steps; ++k) {
        trace.times.push_back(double(k) * dt);
        trace.states.push_back(U);
        for (const auto& obs : observers) {
            trace.functionals[obs.label()].push_back(obs(U));
        }
        if (k == n_steps) break;
        if (method == StepMethod::expm_step) {
            U = step * U;
        } else {
            const Eigen::VectorXd k1 = S * U;
            const Eigen::VectorXd k2 = S * (U + 0.5 * dt * k1);
            const Eigen::VectorXd k3 = S * (U + 0.5 * dt * k2);
            const Eigen::VectorXd k4 = S * (U + dt * k3);
            U += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return trace;
}

} // namespace liapcert::numerics
