#include <doctest.h>

#include "liapcert/errors.hpp"
#include "liapcert/numerics.hpp"
#include "liapcert/scalar.hpp"
#include "support.hpp"

#include <algorithm>
#include <complex>
#include <random>

using namespace liapcert;
using numerics::Polynomial;

namespace {

std::vector<std::complex<double>> sorted(std::vector<std::complex<double>> v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return v;
}

} // namespace

TEST_CASE("poly_roots: forced factorizations") {
    const auto r1 = numerics::poly_roots(Polynomial({1.0, 0.0, 1.0}));
    REQUIRE(r1.size() == 2);
    CHECK(std::abs(r1[0] - std::complex<double>(0.0, -1.0)) < 1e-12);
    CHECK(std::abs(r1[1] - std::complex<double>(0.0, 1.0)) < 1e-12);

    const auto r2 = numerics::poly_roots(Polynomial({1.0, 4.0, 6.0, 4.0, 1.0}));
    REQUIRE(r2.size() == 4);
    for (const auto& z : r2) {
        CHECK(std::abs(z - std::complex<double>(-1.0, 0.0)) < 2e-3);
        CHECK(numerics::root_residual(Polynomial({1, 4, 6, 4, 1}), z) < 1e-10);
    }
}

TEST_CASE("poly_roots: quartic of the coupled pair has root sum -1") {
    const Polynomial p({1.0, 1.0, 2.0, 1.0, 0.75});
    const auto roots = numerics::poly_roots(p);
    REQUIRE(roots.size() == 4);
    std::complex<double> sum = 0.0;
    for (const auto& z : roots) {
        sum += z;
        CHECK(numerics::root_residual(p, z) < 1e-10);
    }
    CHECK(std::abs(sum - std::complex<double>(-1.0, 0.0)) < 1e-10);
}

TEST_CASE("poly_roots: rejects degree 0 and degree > 12") {
    CHECK_THROWS_AS(Polynomial({2.0}), InvalidInputError);
    CHECK_THROWS_AS(Polynomial(std::vector<double>(14, 1.0)), InvalidInputError);
    CHECK_THROWS_AS(Polynomial({0.0, 1.0}), InvalidInputError);
}

TEST_CASE("poly_roots: coefficient identities on random polynomials") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int deg = 2 + int(rng() % 7);
        // build from known roots so the product/sum identities are sharp
        std::vector<std::complex<double>> roots;
        std::vector<std::complex<double>> poly = {1.0};
        for (int i = 0; i < deg; ++i) {
            std::complex<double> r;
            if (i + 1 < deg && (rng() % 2 == 0)) {
                r = {coeff(rng), coeff(rng)};
                roots.push_back(r);
                roots.push_back(std::conj(r));
            } else {
                r = {coeff(rng), 0.0};
                roots.push_back(r);
            }
            if (roots.size() >= size_t(deg)) break;
        }
        roots.resize(size_t(deg), {0.5, 0.0});
        for (const auto& r : roots) {
            std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
            for (size_t k = 0; k < poly.size(); ++k) {
                next[k] += poly[k];
                next[k + 1] -= poly[k] * r;
            }
            poly = next;
        }
        std::vector<double> real_coeffs(poly.size());
        for (size_t k = 0; k < poly.size(); ++k) {
            real_coeffs[k] = poly[k].real();
        }
        const Polynomial p(real_coeffs);
        const auto computed = numerics::poly_roots(p);

        std::complex<double> sum = 0.0, prod = 1.0;
        for (const auto& z : computed) {
            sum += z;
            prod *= z;
        }
        const double expected_sum = -p.coeffs[1] / p.coeffs[0];
        const double expected_prod =
            (p.degree() % 2 == 0 ? 1.0 : -1.0) * p.coeffs.back() / p.coeffs[0];
        CHECK(std::abs(sum.real() - expected_sum) < 1e-9);
        CHECK(std::abs(sum.imag()) < 1e-9);
        CHECK(std::abs(prod.real() - expected_prod) < 1e-9);
        CHECK(std::abs(prod.imag()) < 1e-9);
    }
}

TEST_CASE("sym_eig: fixed spectra") {
    const auto id3 = numerics::sym_eig(Eigen::MatrixXd::Identity(3, 3));
    CHECK(id3 == std::vector<double>{1.0, 1.0, 1.0});

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
    D.diagonal() << 3.0, 1.0, 2.0;
    const auto d = numerics::sym_eig(D);
    CHECK(d[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(d[2] == doctest::Approx(3.0).epsilon(1e-14));

    Eigen::MatrixXd M(2, 2);
    M << 2.0, 1.0, 1.0, 2.0;
    const auto m = numerics::sym_eig(M);
    CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m[1] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("sym_eig: rejects asymmetric input") {
    Eigen::MatrixXd M(2, 2);
    M << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(numerics::sym_eig(M), InvalidInputError);
}

TEST_CASE("sym_eig: trace and determinant identities") {
    std::mt19937 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 2 + int(rng() % 8);
        const Eigen::MatrixXd A = test_support::random_spd(d, rng, 0.1, 5.0);
        const auto ev = numerics::sym_eig(A);
        double sum = 0.0, prod = 1.0;
        for (double e : ev) {
            sum += e;
            prod *= e;
        }
        CHECK(std::abs(sum - A.trace()) < 1e-10 * std::abs(A.trace()));
        CHECK(std::abs(prod - A.determinant()) <
              1e-9 * std::abs(A.determinant()));
    }
}

TEST_CASE("gen_eig_min: closed forms and the sampling oracle") {
    const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
    CHECK(numerics::gen_eig_min(2.0 * I2, I2) == doctest::Approx(2.0));

    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(2, 2);
    L.diagonal() << 1.0, 4.0;
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2, 2);
    R.diagonal() << 1.0, 2.0;
    CHECK(numerics::gen_eig_min(L, R) == doctest::Approx(1.0).epsilon(1e-14));

    std::mt19937 rng(13);
    const Eigen::MatrixXd L4 = test_support::random_spd(4, rng, 0.2, 3.0);
    const Eigen::MatrixXd R4 = test_support::random_spd(4, rng, 0.5, 2.0);
    const double oracle = test_support::rayleigh_min_oracle(L4, R4, 99);
    CHECK(numerics::gen_eig_min(L4, R4) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("gen_eig_min: scaling in the left argument") {
    std::mt19937 rng(14);
    const Eigen::MatrixXd L = test_support::random_spd(5, rng, 0.1, 4.0);
    const Eigen::MatrixXd R = test_support::random_spd(5, rng, 0.5, 2.0);
    const double base = numerics::gen_eig_min(L, R);
    for (double alpha : {0.25, 2.0, 13.5}) {
        CHECK(numerics::gen_eig_min(alpha * L, R) ==
              doctest::Approx(alpha * base).epsilon(1e-10));
    }
}

TEST_CASE("gen_eig_min: rejects indefinite reference") {
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(2, 2);
    R(1, 1) = -1.0;
    CHECK_THROWS_AS(
        numerics::gen_eig_min(Eigen::MatrixXd::Identity(2, 2), R),
        InvalidInputError);
}

TEST_CASE("expm: fixed values") {
    Eigen::MatrixXd S(2, 2);
    S << 0.0, 1.0, -1.0, 0.0;
    CHECK((numerics::expm(S, 0.0) - Eigen::MatrixXd::Identity(2, 2))
              .cwiseAbs()
              .maxCoeff() == 0.0);

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
    D.diagonal() << -1.0, -2.0;
    const Eigen::MatrixXd E = numerics::expm(D, 1.0);
    CHECK(E(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
    CHECK(E(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-13));
    CHECK(std::abs(E(0, 1)) < 1e-15);

    Eigen::MatrixXd N(2, 2);
    N << 0.0, 1.0, 0.0, 0.0;
    for (double t : {0.1, 1.0, 7.5}) {
        const Eigen::MatrixXd R = numerics::expm(N, t);
        CHECK(R(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(R(0, 1) == doctest::Approx(t).epsilon(1e-14));
        CHECK(std::abs(R(1, 0)) < 1e-15);
        CHECK(R(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
    }

    // rotation block: closed form at |S t| = 10
    const Eigen::MatrixXd Rot = numerics::expm(S, 10.0);
    CHECK(Rot(0, 0) == doctest::Approx(std::cos(10.0)).epsilon(1e-12));
    CHECK(Rot(0, 1) == doctest::Approx(std::sin(10.0)).epsilon(1e-12));

    Eigen::MatrixXd bad(1, 1);
    bad << std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(numerics::expm(bad, 1.0), InvalidInputError);
}

TEST_CASE("integrate: exponential decay in one dimension") {
    Eigen::MatrixXd S(1, 1);
    S << -1.0;
    const auto flow = forms::make_flow(S);
    Eigen::VectorXd U0(1);
    U0 << 1.0;
    const auto trace = numerics::integrate(flow, U0, 0.25, 5.0,
                                           numerics::StepMethod::expm_step);
    for (size_t i = 0; i < trace.times.size(); ++i) {
        CHECK(std::abs(trace.states[i](0) - std::exp(-trace.times[i])) < 1e-12);
    }
}

TEST_CASE("integrate: conserved quadratic form of the harmonic oscillator") {
    Eigen::MatrixXd S(2, 2);
    S << 0.0, 1.0, -1.0, 0.0;
    const auto flow = forms::make_flow(S);
    Eigen::VectorXd U0(2);
    U0 << 1.0, 0.0;
    const forms::QuadraticForm half_norm(
        0.5 * Eigen::MatrixXd::Identity(2, 2), "half_norm");
    const auto trace = numerics::integrate(
        flow, U0, 0.1, 20.0, numerics::StepMethod::expm_step, {half_norm});
    for (double value : trace.functionals.at("half_norm")) {
        CHECK(value == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("integrate: rk4 matches the exponential stepper") {
    const scalar::ScalarParams params(1.0, 0.5);
    const auto flow = scalar::flow_matrix(params);
    Eigen::VectorXd U0(4);
    U0 << 1.0, -0.5, 0.25, 0.75;
    const auto exact = numerics::integrate(flow, U0, 1e-3, 10.0,
                                           numerics::StepMethod::expm_step);
    const auto rk4 =
        numerics::integrate(flow, U0, 1e-3, 10.0, numerics::StepMethod::rk4);
    const Eigen::VectorXd diff = exact.states.back() - rk4.states.back();
    CHECK(diff.norm() < 1e-6 * exact.states.back().norm());
}

TEST_CASE("integrate: exponential stepping satisfies the semigroup property") {
    const scalar::ScalarParams params(2.0, -0.7);
    const auto flow = scalar::flow_matrix(params);
    Eigen::VectorXd U0(4);
    U0 << 1.0, 0.3, -0.2, 0.4;
    const auto trace = numerics::integrate(flow, U0, 0.5, 6.0,
                                           numerics::StepMethod::expm_step);
    const Eigen::MatrixXd jump = numerics::expm(flow.S, 2.0);
    for (size_t i = 0; i + 4 < trace.states.size(); ++i) {
        const Eigen::VectorXd moved = jump * trace.states[i];
        CHECK((moved - trace.states[i + 4]).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("integrate: rk4 guard rejects unstable steps with a suggestion") {
    const scalar::ScalarParams params(100.0, 50.0);
    const auto flow = scalar::flow_matrix(params);
    Eigen::VectorXd U0 = Eigen::VectorXd::Ones(4);
    try {
        numerics::integrate(flow, U0, 0.5, 5.0, numerics::StepMethod::rk4);
        FAIL("expected StepSizeError");
    } catch (const StepSizeError& e) {
        CHECK(e.suggested_dt > 0.0);
        CHECK(e.suggested_dt < 0.5);
        // the suggestion must actually pass the guard
        numerics::integrate(flow, U0, e.suggested_dt, 1.0,
                            numerics::StepMethod::rk4);
    }
}

TEST_CASE("integrate: input validation") {
    Eigen::MatrixXd S(1, 1);
    S << -1.0;
    const auto flow = forms::make_flow(S);
    Eigen::VectorXd U0(1);
    U0 << 1.0;
    CHECK_THROWS_AS(numerics::integrate(flow, U0, 0.0, 1.0,
                                        numerics::StepMethod::expm_step),
                    InvalidInputError);
    CHECK_THROWS_AS(numerics::integrate(flow, U0, 2.0, 1.0,
                                        numerics::StepMethod::expm_step),
                    InvalidInputError);
    Eigen::VectorXd bad(2);
    bad << 1.0, 2.0;
    CHECK_THROWS_AS(numerics::integrate(flow, bad, 0.1, 1.0,
                                        numerics::StepMethod::expm_step),
                    InvalidInputError);

    const forms::QuadraticForm obs(Eigen::MatrixXd::Identity(1, 1), "norm");
    CHECK_THROWS_AS(numerics::integrate(flow, U0, 0.1, 1.0,
                                        numerics::StepMethod::expm_step,
                                        {obs, obs}),
                    InvalidInputError);
}

TEST_CASE("spectral_decrement agrees with the abscissa of simple systems") {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3, 3);
    S.diagonal() << -0.5, -2.0, -1.0;
    CHECK(numerics::spectral_decrement(S) == doctest::Approx(0.5));
    CHECK(sorted(numerics::general_eig(S)).front().real() ==
          doctest::Approx(-2.0));
}
