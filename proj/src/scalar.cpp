#include "liapcert/scalar.hpp"

#include "liapcert/errors.hpp"
#include "liapcert/strong.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace liapcert::scalar {

namespace {

strong::OperatorPair as_pair(const ScalarParams& params) {
    Eigen::MatrixXd A(1, 1), C(1, 1);
    A(0, 0) = params.lambda;
    C(0, 0) = params.c;
    return strong::OperatorPair::create(std::move(A), std::move(C));
}

// Real part of (zeta^2 + lambda)(zeta^2 + zeta + lambda) at zeta = s + i a;
// the root condition P(zeta) = 0 reads Re = c^2, Im = 0.
std::complex<double> conservative_char(double lambda,
                                       std::complex<double> zeta) {
    return (zeta * zeta + lambda) * (zeta * zeta + zeta + lambda);
}

} // namespace

ScalarParams::ScalarParams(double lambda_, double c_) : lambda(lambda_), c(c_) {
    if (!(lambda > 0.0) || !std::isfinite(lambda) || !std::isfinite(c)) {
        throw InvalidInputError("ScalarParams: need lambda > 0");
    }
    if (!(std::abs(c) > 0.0) || !(std::abs(c) < lambda)) {
        throw InvalidInputError("ScalarParams: need 0 < |c| < lambda");
    }
}

forms::LinearFlow flow_matrix(const ScalarParams& params) {
    return strong::generator(as_pair(params));
}

forms::QuadraticForm energy_form(const ScalarParams& params) {
    return strong::base_energy_form(as_pair(params));
}

forms::QuadraticForm liapunov_form(const ScalarParams& params, double p,
                                   double eps) {
    return strong::liapunov_form_strong(as_pair(params), p, eps);
}

numerics::Polynomial char_poly(const ScalarParams& params) {
    const double lambda = params.lambda;
    const double c = params.c;
    return numerics::Polynomial(
        {1.0, 1.0, 2.0 * lambda, lambda, lambda * lambda - c * c});
}

double decrement_spectral(const ScalarParams& params) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& zeta : numerics::poly_roots(char_poly(params))) {
        best = std::min(best, -zeta.real());
    }
    return best;
}

RootRelationResiduals check_root_relations(const ScalarParams& params,
                                           std::complex<double> root) {
    const double lambda = params.lambda;
    const double s = root.real();
    const double a = root.imag();
    RootRelationResiduals res;

    const double bracket =
        4.0 * s * s * s + 3.0 * s * s + (lambda - a * a) * (1.0 + 4.0 * s);
    res.res_imag = std::abs(a * bracket);

    if (a == 0.0) {
        res.res_a2 = 0.0;
        return res;
    }
    const double denom = 1.0 + 4.0 * s;
    if (std::abs(denom) < 1e-8) {
        // At the singular point the relation collapses to 4s^3 + 3s^2 = 0;
        // report that residual instead.
        res.a2_singular = true;
        res.res_a2 = std::abs(4.0 * s * s * s + 3.0 * s * s);
        return res;
    }
    res.res_a2 =
        std::abs(a * a - (lambda + (4.0 * s * s * s + 3.0 * s * s) / denom));
    return res;
}

std::pair<bool, std::optional<double>> real_root_onset(double lambda,
                                                       double c) {
    if (!(lambda > 0.0) || !(c > 0.0) || !(c < lambda)) {
        throw InvalidInputError("real_root_onset: need lambda > 0, 0 < c < lambda");
    }
    // Real roots zeta = -theta solve g(theta) = 0 with
    // g(theta) = (lambda + theta^2)(lambda - theta + theta^2) - c^2 = G^2 - c^2.
    // g(0) = lambda^2 - c^2 > 0 and g(theta) > 0 for theta >= 1, so every
    // crossing lies in (0, 1); scan for the first sign change and bisect.
    // Near the onset the negative dip can be narrower than the scan, so a
    // golden-section minimization backs the scan up.
    const auto g = [lambda, c](double theta) {
        return (lambda + theta * theta) *
                   (lambda - theta + theta * theta) -
               c * c;
    };
    constexpr int kScan = 4000;
    double lo = 0.0;
    double hi = -1.0;
    for (int i = 1; i <= kScan; ++i) {
        const double theta = double(i) / kScan;
        if (g(theta) <= 0.0) {
            lo = double(i - 1) / kScan;
            hi = theta;
            break;
        }
    }
    if (hi < 0.0) {
        const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = 0.0, b = 1.0;
        double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
        double f1 = g(x1), f2 = g(x2);
        for (int it = 0; it < 120; ++it) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - invphi * (b - a);
                f1 = g(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + invphi * (b - a);
                f2 = g(x2);
            }
        }
        const double theta_min = (f1 < f2) ? x1 : x2;
        if (!(g(theta_min) <= 0.0)) {
            return {false, std::nullopt};
        }
        lo = 0.0;
        hi = theta_min;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    const double theta = 0.5 * (lo + hi);
    const double root = -theta;
    const double residual =
        numerics::root_residual(char_poly(ScalarParams(lambda, c)), root);
    if (residual > 1e-9) {
        throw NumericalError("real_root_onset: root residual " +
                             std::to_string(residual));
    }
    return {true, root};
}

std::pair<ScalarParams, double> near_optimal_params(double eps) {
    if (!(eps > 0.0) || !(eps <= 0.02)) {
        throw InvalidInputError(
            "near_optimal_params: need 0 < eps <= 0.02 (asymptotic regime)");
    }
    const double lambda = 1.0 / (16.0 * eps);
    const double s = -0.25 + eps;
    // a^2 from the imaginary-part relation (1 + 4s = 4 eps != 0 here), then
    // c^2 from the expanded real-part condition Re P0(s + i a) = c^2.
    const double a2 = lambda + (4.0 * s * s * s + 3.0 * s * s) / (1.0 + 4.0 * s);
    if (!(a2 > 0.0)) {
        throw CertificationError("near_optimal_params: a^2 <= 0, construction failed");
    }
    const double a = std::sqrt(a2);
    const std::complex<double> P0 = conservative_char(lambda, {s, a});
    const double c2 = P0.real();
    if (std::abs(P0.imag()) > 1e-9 * (1.0 + std::abs(c2))) {
        throw NumericalError("near_optimal_params: imaginary-part condition not met");
    }
    if (!(c2 > 0.0)) {
        throw CertificationError("near_optimal_params: c^2 <= 0, construction failed");
    }
    const double c = std::sqrt(c2);
    if (!(c < lambda)) {
        throw CertificationError("near_optimal_params: c >= lambda, construction failed");
    }

    const ScalarParams params(lambda, c);
    const double predicted = 0.25 - eps;

    // Self-verification against the root solver: the decrement must match
    // the placed root pair and the remaining pair must be non-real.
    const double decrement = decrement_spectral(params);
    if (std::abs(decrement - predicted) > 1e-6) {
        throw NumericalError("near_optimal_params: decrement check failed");
    }
    int non_real = 0;
    for (const auto& zeta : numerics::poly_roots(char_poly(params))) {
        if (std::abs(zeta.imag()) > 1e-6 && zeta.real() < s - eps) {
            ++non_real;
        }
    }
    if (non_real != 2) {
        throw CertificationError(
            "near_optimal_params: remaining root pair is real (outside regime)");
    }
    return {params, predicted};
}

RateBoundParams rate_bound(const ScalarParams& params, double gamma_aux) {
    if (!(gamma_aux > 0.0) || !(gamma_aux < 1.0)) {
        throw InvalidInputError("rate_bound: need gamma_aux in (0, 1)");
    }
    const double lambda = params.lambda;
    const double c = std::abs(params.c);
    const double theta = c / lambda;

    RateBoundParams out;
    out.gamma_aux = gamma_aux;
    out.theta = theta;
    out.p = 1.0 + 2.0 / ((1.0 - gamma_aux) * (1.0 - theta));
    const double p = out.p;
    out.eps = 1.0 / (1.0 + p +
                     (1.0 - gamma_aux) / (16.0 * gamma_aux * lambda) *
                         (4.0 * p * p + (p + 1.0) * (p + 1.0) / (theta * theta)));
    if (!(out.p > 1.0) || !(out.eps > 0.0)) {
        throw InvalidInputError("rate_bound: chain left the valid regime");
    }
    const double sandwich_upper =
        (lambda + c) / (2.0 * lambda) +
        out.eps * (p / (2.0 * std::sqrt(lambda)) +
                   (p + 1.0) * std::sqrt(lambda) / (4.0 * c));
    out.delta = out.eps / sandwich_upper;
    return out;
}

RateBoundParams optimize_rate_bound(const ScalarParams& params) {
    const double lambda = params.lambda;
    const double c = std::abs(params.c);
    const double gamma_seed = std::min(std::sqrt(lambda) / c, 0.5);
    const forms::LinearFlow flow = flow_matrix(params);

    RateBoundParams best;
    best.gamma_aux = gamma_seed;
    best.theta = c / lambda;
    best.delta = -std::numeric_limits<double>::infinity();

    const auto try_p = [&](double p) {
        const auto result = forms::maximize_certificate(
            flow, [&](double eps) { return liapunov_form(params, p, eps); });
        if (result.report.gamma > best.delta) {
            best.p = p;
            best.eps = result.eps;
            best.delta = result.report.gamma;
        }
    };

    constexpr int kGrid = 40;
    for (int i = 0; i < kGrid; ++i) {
        try_p(1.1 * std::pow(10.0 / 1.1, double(i) / (kGrid - 1)));
    }
    // Seed from the analytic chain; its (p, eps) can land between grid points.
    const RateBoundParams seed = rate_bound(params, gamma_seed);
    const forms::QuadraticForm H_seed = liapunov_form(params, seed.p, seed.eps);
    if (forms::is_positive_definite(H_seed).first) {
        const double gamma_seed_rate = forms::strictness_rate(H_seed, flow, H_seed);
        if (gamma_seed_rate > best.delta) {
            best.p = seed.p;
            best.eps = seed.eps;
            best.delta = gamma_seed_rate;
        }
    }

    if (!(best.delta > 0.0)) {
        std::ostringstream msg;
        msg << "optimize_rate_bound: no positive certificate for lambda = "
            << lambda << ", c = " << params.c;
        throw NoCertificateError(msg.str());
    }
    return best;
}

} // namespace liapcert::scalar
