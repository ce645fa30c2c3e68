#include "liapcert/gallery.hpp"

#include "liapcert/errors.hpp"
#include "liapcert/numerics.hpp"

#include <cmath>
#include <sstream>

namespace liapcert::gallery {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 12-point Gauss-Legendre rule on [-1, 1].
constexpr int kPanelOrder = 12;
constexpr double kGlNodes[kPanelOrder / 2] = {
    0.1252334085114689155, 0.3678314989981801938, 0.5873179542866174473,
    0.7699026741943046870, 0.9041172563704748566, 0.9815606342467192506};
constexpr double kGlWeights[kPanelOrder / 2] = {
    0.2491470458134027850, 0.2334925365383548087, 0.2031674267230659217,
    0.1600783285433462263, 0.1069393259953184309, 0.0471753363865118295};

void check_spec(const DiscretizationSpec& spec) {
    if (spec.n_modes < 1) {
        throw InvalidInputError("DiscretizationSpec: need n_modes >= 1");
    }
    if (!(spec.L > 0.0)) {
        throw InvalidInputError("DiscretizationSpec: need L > 0");
    }
    if (spec.quadrature_nodes != 0 &&
        spec.quadrature_nodes < 2 * spec.n_modes) {
        throw InvalidInputError(
            "DiscretizationSpec: need quadrature_nodes >= 2 * n_modes");
    }
}

double dirichlet_mu(const DiscretizationSpec& spec, int k) {
    const double base = double(k) * kPi / spec.L;
    return base * base;
}

// Composite quadrature over (0, L): panels of the 12-point rule sized so the
// total node count reaches the requested one.
template <typename F>
double integrate_panels(const DiscretizationSpec& spec, const F& f) {
    const int nodes = spec.effective_quadrature_nodes();
    const int panels = (nodes + kPanelOrder - 1) / kPanelOrder;
    const double h = spec.L / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        double acc = 0.0;
        for (int i = 0; i < kPanelOrder / 2; ++i) {
            const double dx = 0.5 * h * kGlNodes[i];
            acc += kGlWeights[i] * (f(mid - dx) + f(mid + dx));
        }
        total += 0.5 * h * acc;
    }
    return total;
}

double min_on_grid(const DiscretizationSpec& spec,
                   const std::function<double(double)>& f) {
    const int samples = std::max(256, 4 * spec.effective_quadrature_nodes());
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= samples; ++i) {
        lo = std::min(lo, f(spec.L * double(i) / samples));
    }
    return lo;
}

Eigen::MatrixXd string_A(const DiscretizationSpec& spec) {
    const int n = spec.n_modes;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int k = 1; k <= n; ++k) {
        const double kappa = 2.0 * kPi * double(k) / spec.L;
        A(2 * k - 2, 2 * k - 2) = kappa * kappa;
        A(2 * k - 1, 2 * k - 1) = kappa * kappa;
    }
    return A;
}

Eigen::MatrixXd string_C(const DiscretizationSpec& spec, double gamma) {
    const int n = spec.n_modes;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int k = 1; k <= n; ++k) {
        const double kappa = 2.0 * kPi * double(k) / spec.L;
        C(2 * k - 2, 2 * k - 1) = -gamma * kappa;
        C(2 * k - 1, 2 * k - 2) = gamma * kappa;
    }
    return C;
}

bool string_gamma_admissible(const DiscretizationSpec& spec, double gamma) {
    if (gamma == 0.0) return false;
    const auto pair =
        strong::OperatorPair::create(string_A(spec), string_C(spec, gamma));
    if (!strong::check_conditions(pair).passes) return false;
    return forms::is_positive_definite(strong::base_energy_form(pair)).first;
}

} // namespace

int DiscretizationSpec::effective_quadrature_nodes() const {
    return quadrature_nodes > 0 ? quadrature_nodes : 16 * n_modes;
}

strong::OperatorPair complex_scalar(double lambda, double c, double d) {
    if (!(lambda > 0.0)) {
        throw InvalidInputError("complex_scalar: need lambda > 0");
    }
    const double rho = std::hypot(c, d);
    if (!(rho > 0.0)) {
        throw InvalidInputError("complex_scalar: need c^2 + d^2 > 0");
    }
    if (!(rho < lambda)) {
        throw InvalidInputError(
            "complex_scalar: coupling too strong, need sqrt(c^2 + d^2) < lambda");
    }
    Eigen::MatrixXd A = lambda * Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd C(2, 2);
    C << c, -d, d, c;
    return strong::OperatorPair::create(std::move(A), std::move(C));
}

strong::OperatorPair wave_strong(const DiscretizationSpec& spec, double gamma) {
    check_spec(spec);
    if (!(gamma > 0.0) || !(gamma < 1.0)) {
        throw InvalidInputError("wave_strong: need gamma in (0, 1)");
    }
    const int n = spec.n_modes;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        A(k - 1, k - 1) = dirichlet_mu(spec, k);
    }
    Eigen::MatrixXd C = gamma * A;
    return strong::OperatorPair::create(std::move(A), std::move(C));
}

strong::OperatorPair plate_structural(const DiscretizationSpec& spec,
                                      double gamma) {
    check_spec(spec);
    const double mu1 = dirichlet_mu(spec, 1);
    if (!(gamma > 0.0) || !(gamma < mu1)) {
        std::ostringstream msg;
        msg << "plate_structural: need gamma in (0, lambda_1) = (0, " << mu1
            << ")";
        throw InvalidInputError(msg.str());
    }
    const int n = spec.n_modes;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        const double mu = dirichlet_mu(spec, k);
        A(k - 1, k - 1) = mu * mu;
        C(k - 1, k - 1) = gamma * mu;
    }
    return strong::OperatorPair::create(std::move(A), std::move(C));
}

double string_gamma_threshold(const DiscretizationSpec& spec) {
    check_spec(spec);
    double lo = 0.0, hi = 1.0;
    while (string_gamma_admissible(spec, hi) && hi < 1e6) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (string_gamma_admissible(spec, mid) ? lo : hi) = mid;
    }
    return lo;
}

strong::OperatorPair string_periodic(const DiscretizationSpec& spec,
                                     double gamma) {
    check_spec(spec);
    if (gamma == 0.0 || !std::isfinite(gamma)) {
        throw InvalidInputError("string_periodic: need gamma != 0");
    }
    if (!string_gamma_admissible(spec, std::abs(gamma))) {
        const double threshold = string_gamma_threshold(spec);
        std::ostringstream msg;
        msg << "string_periodic: coupling too strong, base functional loses "
               "positivity; admissible |gamma| <= "
            << threshold;
        throw CouplingTooStrongError(msg.str(), threshold);
    }
    return strong::OperatorPair::create(string_A(spec), string_C(spec, gamma));
}

forms::QuadraticForm string_liapunov_form(const strong::OperatorPair& pair,
                                          double p, double eps) {
    // Displayed functional: the general H_eps plus the lower-order
    // (|u|^2 + |v|^2)/2 terms (redundant on the mean-zero space, kept for
    // exact agreement with the stated formula).
    Eigen::MatrixXd Q = strong::liapunov_form_strong(pair, p, eps).matrix();
    const int n = pair.n;
    Q.block(0, 0, 2 * n, 2 * n) +=
        0.5 * Eigen::MatrixXd::Identity(2 * n, 2 * n);
    return forms::QuadraticForm(std::move(Q), "H_eps_string");
}

Eigen::MatrixXd multiplication_matrix(const DiscretizationSpec& spec,
                                      const std::function<double(double)>& f) {
    check_spec(spec);
    const int n = spec.n_modes;
    const double L = spec.L;
    Eigen::MatrixXd M(n, n);
    for (int j = 1; j <= n; ++j) {
        for (int k = j; k <= n; ++k) {
            const double value = integrate_panels(spec, [&](double x) {
                return f(x) * (2.0 / L) * std::sin(j * kPi * x / L) *
                       std::sin(k * kPi * x / L);
            });
            M(j - 1, k - 1) = value;
            M(k - 1, j - 1) = value;
        }
    }
    return M;
}

strong::OperatorPair wave_potentials(const DiscretizationSpec& spec,
                                     double gamma,
                                     const std::function<double(double)>& a,
                                     const std::function<double(double)>& b) {
    check_spec(spec);
    if (!(gamma > 0.0)) {
        throw InvalidInputError("wave_potentials: need gamma > 0");
    }
    // The continuum condition is min(a), min(b) + lambda_1 > 0; the Galerkin
    // matrices stay definite at equality (cos attains -lambda_1 at L = pi),
    // so the grid check is non-strict and definiteness is re-validated on
    // the assembled matrices.
    const double mu1 = dirichlet_mu(spec, 1);
    if (min_on_grid(spec, a) < -mu1 || min_on_grid(spec, b) < -mu1) {
        throw InvalidInputError(
            "wave_potentials: need min(a), min(b) >= -lambda_1");
    }

    const int n = spec.n_modes;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        D(k - 1, k - 1) = dirichlet_mu(spec, k);
    }
    Eigen::MatrixXd A = D + multiplication_matrix(spec, a);
    const Eigen::MatrixXd C_unit = D + multiplication_matrix(spec, b);

    auto pair_of = [&](double g) {
        return strong::OperatorPair::create(A, g * C_unit);
    };
    auto admissible = [&](double g) {
        const auto pair = pair_of(g);
        return strong::check_conditions(pair).passes &&
               forms::is_positive_definite(strong::base_energy_form(pair)).first;
    };

    if (!admissible(gamma)) {
        double lo = 0.0, hi = gamma;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (admissible(mid) ? lo : hi) = mid;
        }
        std::ostringstream msg;
        msg << "wave_potentials: coupling condition fails at gamma = " << gamma
            << "; max admissible gamma ~= " << lo;
        throw CouplingTooStrongError(msg.str(), lo);
    }
    return pair_of(gamma);
}

strong::OperatorPair plate_multiplication(
    const DiscretizationSpec& spec, double gamma,
    const std::function<double(double)>& m) {
    check_spec(spec);
    const double mu1 = dirichlet_mu(spec, 1);
    if (!(gamma > 0.0) || !(gamma < mu1)) {
        std::ostringstream msg;
        msg << "plate_multiplication: need gamma in (0, lambda_1) = (0, " << mu1
            << ")";
        throw InvalidInputError(msg.str());
    }
    if (min_on_grid(spec, m) < 0.0) {
        throw InvalidInputError("plate_multiplication: need m >= 0");
    }

    const int n = spec.n_modes;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        D(k - 1, k - 1) = dirichlet_mu(spec, k);
    }
    const Eigen::MatrixXd M_m = multiplication_matrix(spec, m);
    Eigen::MatrixXd A = D * D + M_m;
    Eigen::MatrixXd C = gamma * D;

    // Commutator identity against the multiplication operator:
    // A C^{-1} - C^{-1} A = (1/gamma)(M_m D^{-1} - D^{-1} M_m).
    const Eigen::MatrixXd C_inv = C.inverse();
    const Eigen::MatrixXd D_inv = D.inverse();
    const Eigen::MatrixXd lhs = A * C_inv - C_inv * A;
    const Eigen::MatrixXd rhs = (M_m * D_inv - D_inv * M_m) / gamma;
    const double residual = (lhs - rhs).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if (residual > 1e-10 * scale) {
        throw NumericalError(
            "plate_multiplication: commutator identity residual " +
            std::to_string(residual));
    }
    return strong::OperatorPair::create(std::move(A), std::move(C));
}

} // namespace liapcert::gallery
