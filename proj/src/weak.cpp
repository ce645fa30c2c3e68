#include "liapcert/weak.hpp"

#include "liapcert/errors.hpp"
#include "liapcert/strong.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace liapcert::weak {

using forms::Block;
using forms::BlockLayout;
using forms::FormBuilder;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd scalar_coupling(const WeakSystem& sys) {
    return sys.c * Eigen::MatrixXd::Identity(sys.n, sys.n);
}

} // namespace

WeakSystem WeakSystem::create(Eigen::MatrixXd A, double c) {
    WeakSystem sys;
    sys.n = static_cast<int>(A.rows());
    if (A.rows() != A.cols() || sys.n == 0) {
        throw InvalidInputError("WeakSystem: A must be square");
    }
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidInputError("WeakSystem: A must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("WeakSystem: eigensolve of A failed");
    }
    sys.lambda1 = solver.eigenvalues()(0);
    if (!(sys.lambda1 > 0.0)) {
        throw InvalidInputError("WeakSystem: A must be positive definite");
    }
    if (!(std::abs(c) > 0.0) || !(std::abs(c) < sys.lambda1)) {
        throw InvalidInputError("WeakSystem: need 0 < |c| < lambda_1(A)");
    }
    sys.A_inv = solver.eigenvectors() *
                solver.eigenvalues().cwiseInverse().asDiagonal() *
                solver.eigenvectors().transpose();
    sys.A = std::move(A);
    sys.c = c;
    return sys;
}

WeakLiapunovParams make_weak_params(const WeakSystem& sys, double p,
                                    double eps) {
    if (!(eps >= 0.0)) {
        throw InvalidInputError("make_weak_params: need eps >= 0");
    }
    const double ratio = sys.lambda1 / std::abs(sys.c);
    const double p_min = (ratio + 1.0) / (ratio - 1.0);
    if (!(p > 1.0) || !((p + 1.0) / (p - 1.0) < ratio)) {
        std::ostringstream msg;
        msg << "make_weak_params: admissibility condition (p+1)/(p-1) < "
               "lambda_1/|c| fails for p = "
            << p << "; admissible p in (" << p_min << ", inf)";
        throw InvalidPError(msg.str());
    }
    WeakLiapunovParams params;
    params.p = p;
    params.eps = eps;
    params.rho = (p + 1.0) * sys.lambda1 / (2.0 * sys.c);
    return params;
}

forms::LinearFlow flow(const WeakSystem& sys) {
    return strong::generator(sys.A, scalar_coupling(sys));
}

WeakEnergyForms weak_energy_forms(const WeakSystem& sys) {
    WeakEnergyForms out;
    const BlockLayout layout = BlockLayout::uniform(sys.n);

    FormBuilder e(layout);
    e.add_diag(Block::u, 0.5 * sys.A)
        .add_diag(Block::v, 0.5 * sys.A)
        .add_diag(Block::w, 0.5)
        .add_diag(Block::z, 0.5)
        .add_pairing(Block::v, Block::u, sys.c);
    out.E = e.build("E");

    FormBuilder em1(layout);
    em1.add_diag(Block::u, 0.5)
        .add_diag(Block::v, 0.5)
        .add_diag(Block::w, 0.5 * sys.A_inv)
        .add_diag(Block::z, 0.5 * sys.A_inv)
        .add_pairing(Block::v, Block::u, sys.A_inv, sys.c);
    out.E_minus1 = em1.build("E_minus1");

    FormBuilder k(layout);
    k.add_diag(Block::u, 1.0)
        .add_diag(Block::v, 1.0)
        .add_diag(Block::w, sys.A_inv)
        .add_diag(Block::z, sys.A_inv);
    out.K = k.build("K");
    return out;
}

forms::QuadraticForm liapunov_form_weak(const WeakSystem& sys,
                                        const WeakLiapunovParams& params) {
    make_weak_params(sys, params.p, params.eps); // re-validate condition (11)
    FormBuilder builder(BlockLayout::uniform(sys.n));
    builder.add_diag(Block::u, 0.5 * sys.A)
        .add_diag(Block::v, 0.5 * sys.A)
        .add_diag(Block::w, 0.5)
        .add_diag(Block::z, 0.5)
        .add_pairing(Block::v, Block::u, sys.c)
        .add_pairing(Block::z, Block::v, sys.A_inv,
                     -params.eps * sys.lambda1)
        .add_pairing(Block::w, Block::u, params.p * params.eps)
        .add_pairing(Block::w, Block::v, params.rho * params.eps)
        .add_pairing(Block::u, Block::z, -params.rho * params.eps);
    return builder.build("H_eps_weak");
}

forms::CertificateReport certify_weak(const WeakSystem& sys,
                                      const WeakLiapunovParams& params) {
    const forms::QuadraticForm H = liapunov_form_weak(sys, params);
    const forms::QuadraticForm K = weak_energy_forms(sys).K;
    const forms::LinearFlow S = flow(sys);

    forms::CertificateReport report;
    report.positivity_margin = forms::is_positive_definite(H).second;
    report.gamma = forms::strictness_rate(H, S, K);
    report.delta = report.gamma;
    report.valid = report.positivity_margin > 0.0 && report.gamma > 0.0;
    report.notes.push_back(
        "rate measured against K: drives 1/t decay, not exponential decay");
    return report;
}

std::pair<WeakLiapunovParams, forms::CertificateReport> auto_epsilon_weak(
    const WeakSystem& sys, double p) {
    make_weak_params(sys, p, 0.0);
    const forms::QuadraticForm K = weak_energy_forms(sys).K;
    const forms::LinearFlow S = flow(sys);
    const auto result = forms::maximize_certificate(
        S,
        [&](double eps) {
            return liapunov_form_weak(sys, make_weak_params(sys, p, eps));
        },
        &K);
    if (!result.report.valid) {
        throw NoCertificateError(
            "auto_epsilon_weak: no eps yields a valid certificate");
    }
    forms::CertificateReport report = result.report;
    report.notes.push_back(
        "rate measured against K: drives 1/t decay, not exponential decay");
    return {make_weak_params(sys, p, result.eps), report};
}

PolynomialDecayResult polynomial_decay_study(const WeakSystem& sys,
                                             const WeakLiapunovParams& params,
                                             const Eigen::VectorXd& U0,
                                             double T, double dt) {
    const forms::CertificateReport cert = certify_weak(sys, params);
    if (!cert.valid) {
        throw CertificationError(
            "polynomial_decay_study: certificate invalid for these params");
    }
    const WeakEnergyForms energies = weak_energy_forms(sys);
    const forms::QuadraticForm H = liapunov_form_weak(sys, params);

    PolynomialDecayResult out;
    out.gamma = cert.gamma;
    out.trace = numerics::integrate(
        flow(sys), U0, dt, T, numerics::StepMethod::expm_step,
        {energies.E, energies.E_minus1, energies.K, H});

    const double H0 = H(U0);
    double sup = 0.0;
    const auto& K_series = out.trace.functionals.at("K");
    std::vector<double> t_times_K(out.trace.times.size());
    for (size_t i = 0; i < out.trace.times.size(); ++i) {
        const double t = out.trace.times[i];
        t_times_K[i] = t * K_series[i];
        if (t >= 1.0) {
            sup = std::max(sup, t * K_series[i] / H0);
        }
    }
    out.trace.functionals["t_times_K"] = std::move(t_times_K);
    out.C_observed = sup;
    const double c_abs = std::abs(sys.c);
    out.C_theoretical =
        (sys.lambda1 + c_abs) / ((sys.lambda1 - c_abs) * cert.gamma);
    if (!(out.C_observed <= out.C_theoretical * (1.0 + 1e-6))) {
        throw NumericalError(
            "polynomial_decay_study: observed constant exceeds the proof bound");
    }
    return out;
}

namespace {

// The same smooth datum across truncations: fixed coefficients on the first
// (up to 8) modes, zero-padded above, normalized to E = 1.
Eigen::VectorXd embedded_datum(const WeakSystem& sys) {
    const int n = sys.n;
    const int m = std::min(n, 8);
    Eigen::VectorXd U = Eigen::VectorXd::Zero(4 * n);
    for (int k = 1; k <= m; ++k) {
        U(k - 1) = 1.0 / double(k * k);                    // u
        U(n + k - 1) = 1.0 / double((k + 1) * (k + 1));    // v
        U(2 * n + k - 1) = 1.0 / double((k + 2) * (k + 2));// w
        U(3 * n + k - 1) = (k % 2 == 0 ? -1.0 : 1.0) /
                           double((k + 2) * (k + 2));      // z
    }
    const double e0 = weak_energy_forms(sys).E(U);
    return U / std::sqrt(e0);
}

} // namespace

UniformityTable uniformity_check(const std::vector<int>& mode_counts, double c,
                                 double p, double T, double L) {
    UniformityTable table;
    table.rows.reserve(mode_counts.size());

    for (int n : mode_counts) {
        UniformityRow row;
        row.n = n;
        try {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
            for (int k = 1; k <= n; ++k) {
                const double mu = double(k) * kPi / L;
                A(k - 1, k - 1) = mu * mu;
            }
            const WeakSystem sys = WeakSystem::create(std::move(A), c);
            row.spectral_decrement = numerics::spectral_decrement(flow(sys).S);

            const auto [params, cert] = auto_epsilon_weak(sys, p);
            row.gamma = cert.gamma;
            row.eps = params.eps;

            const auto study =
                polynomial_decay_study(sys, params, embedded_datum(sys), T);
            row.C_observed = study.C_observed;
            row.C_theoretical = study.C_theoretical;
            row.certified = true;
        } catch (const Error& err) {
            row.certified = false;
            row.note = err.what();
        }
        table.rows.push_back(std::move(row));
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    bool all_certified = !table.rows.empty();
    for (const auto& row : table.rows) {
        if (!row.certified) {
            all_certified = false;
            continue;
        }
        lo = std::min(lo, row.C_observed);
        hi = std::max(hi, row.C_observed);
    }
    table.passes = all_certified && lo > 0.0 && hi / lo <= 2.0;
    return table;
}

} // namespace liapcert::weak
