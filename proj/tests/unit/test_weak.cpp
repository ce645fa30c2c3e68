#include <doctest.h>

#include "liapcert/errors.hpp"
#include "liapcert/numerics.hpp"
#include "liapcert/scalar.hpp"
#include "liapcert/weak.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace liapcert;
using weak::WeakSystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

WeakSystem dirichlet_system(int n, double c, double L = kPi) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        const double mu = double(k) * kPi / L;
        A(k - 1, k - 1) = mu * mu;
    }
    return WeakSystem::create(std::move(A), c);
}

} // namespace

TEST_CASE("WeakSystem validates the coupling window") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(WeakSystem::create(A, 0.0), InvalidInputError);
    CHECK_THROWS_AS(WeakSystem::create(A, 1.0), InvalidInputError);
    CHECK_NOTHROW(WeakSystem::create(A, -0.5));
}

TEST_CASE("weak_energy_forms: fixed evaluation") {
    const auto sys = WeakSystem::create(Eigen::MatrixXd::Identity(1, 1), 0.5);
    const auto energies = weak::weak_energy_forms(sys);
    Eigen::VectorXd U(4);
    U << 1.0, 1.0, 0.0, 0.0;
    CHECK(energies.E(U) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("weak_energy_forms: the dual-norm sandwich of E_-1 and K") {
    // for diagonal A the extreme generalized eigenvalues are attained on the
    // lowest mode: exactly (lambda1 -+ c) / (2 lambda1)
    const auto sys = dirichlet_system(6, 0.5);
    const auto energies = weak::weak_energy_forms(sys);
    const auto [m, M] = forms::sandwich_constants(energies.E_minus1, energies.K);
    CHECK(m == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(M == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("weak dissipation identities are exact") {
    std::mt19937 rng(51);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + int(rng() % 6);
        const Eigen::MatrixXd A = test_support::random_spd(n, rng, 0.5, 20.0);
        const double lambda1 = numerics::sym_eig(A).front();
        std::uniform_real_distribution<double> frac(0.05, 0.95);
        const double c = frac(rng) * lambda1 * (trial % 2 == 0 ? 1.0 : -1.0);
        const auto sys = WeakSystem::create(A, c);
        const auto flow = weak::flow(sys);
        const auto energies = weak::weak_energy_forms(sys);

        Eigen::MatrixXd expected_E = Eigen::MatrixXd::Zero(4 * n, 4 * n);
        expected_E.block(2 * n, 2 * n, n, n) = -Eigen::MatrixXd::Identity(n, n);
        CHECK((forms::lie_derivative(energies.E, flow).matrix() - expected_E)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-14);

        Eigen::MatrixXd expected_Em1 = Eigen::MatrixXd::Zero(4 * n, 4 * n);
        expected_Em1.block(2 * n, 2 * n, n, n) = -sys.A_inv;
        CHECK((forms::lie_derivative(energies.E_minus1, flow).matrix() -
               expected_Em1)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-14);
    }
}

TEST_CASE("liapunov_form_weak: eps = 0 is the energy form") {
    const auto sys = dirichlet_system(4, 0.2);
    const auto params = weak::make_weak_params(sys, 2.0, 0.0);
    const auto H = weak::liapunov_form_weak(sys, params);
    CHECK((H.matrix() - weak::weak_energy_forms(sys).E.matrix())
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("liapunov_form_weak: rho from the admissibility data") {
    const auto sys = dirichlet_system(3, 0.2);
    const auto params = weak::make_weak_params(sys, 2.0, 0.01);
    CHECK(params.rho == doctest::Approx(7.5).epsilon(1e-14));
}

TEST_CASE("liapunov_form_weak: admissibility window for p") {
    const auto sys = dirichlet_system(3, 0.5);
    // (p+1)/(p-1) = 3 >= lambda1/|c| = 2
    CHECK_THROWS_AS(weak::make_weak_params(sys, 2.0, 0.01), InvalidPError);
    try {
        weak::make_weak_params(sys, 2.0, 0.01);
    } catch (const InvalidPError& e) {
        CHECK(std::string(e.what()).find("admissible p in (3") !=
              std::string::npos);
    }
    CHECK_NOTHROW(weak::make_weak_params(sys, 3.5, 0.01));
}

TEST_CASE("liapunov_form_weak: n = 1 coincides with the scalar candidate") {
    // at n = 1 the dual pairing collapses: lambda1 A^{-1} = 1 and the rho
    // blocks match the scalar coefficient, so the two constructions agree
    // (they diverge for n > 1 where lambda1 A^{-1} != I)
    const double lambda = 2.0, c = 0.7, p = 3.0, eps = 0.04;
    Eigen::MatrixXd A(1, 1);
    A << lambda;
    const auto sys = WeakSystem::create(A, c);
    const auto H_weak =
        weak::liapunov_form_weak(sys, weak::make_weak_params(sys, p, eps));
    const auto H_scalar =
        scalar::liapunov_form(scalar::ScalarParams(lambda, c), p, eps);
    const double scale = H_scalar.matrix().cwiseAbs().maxCoeff();
    CHECK((H_weak.matrix() - H_scalar.matrix()).cwiseAbs().maxCoeff() <
          1e-13 * scale);

    // and it genuinely differs for n > 1
    const auto sys2 = dirichlet_system(2, 0.2);
    const auto params2 = weak::make_weak_params(sys2, 3.5, 0.04);
    const auto H2 = weak::liapunov_form_weak(sys2, params2);
    const Eigen::MatrixXd vz_block = H2.matrix().block(2, 6, 2, 2);
    CHECK(vz_block(0, 0) != vz_block(1, 1)); // lambda1 A^{-1} is not scalar
}

TEST_CASE("certify_weak: valid certificate and degenerate limits") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
    A.diagonal() << 1.0, 4.0, 9.0;
    const auto sys = WeakSystem::create(A, 0.2);
    const auto [params, cert] = weak::auto_epsilon_weak(sys, 2.0);
    CHECK(cert.valid);
    CHECK(cert.gamma > 0.0);
    CHECK(params.eps > 0.0);

    // eps -> 0 degenerates the certificate
    const auto tiny = weak::certify_weak(sys, weak::make_weak_params(sys, 2.0, 1e-8));
    CHECK(tiny.gamma < 1e-6);
    CHECK(tiny.gamma >= -1e-12);
}

TEST_CASE("polynomial_decay_study: the proof chain holds along trajectories") {
    const auto sys = dirichlet_system(8, 0.2);
    const auto [params, cert] = weak::auto_epsilon_weak(sys, 2.0);
    REQUIRE(cert.valid);

    Eigen::VectorXd U0 = Eigen::VectorXd::Zero(32);
    for (int k = 0; k < 8; ++k) {
        U0(k) = 1.0 / double((k + 1) * (k + 1));
        U0(8 + k) = 0.5 / double(k + 1);
    }
    const auto study = weak::polynomial_decay_study(sys, params, U0, 500.0, 0.5);
    CHECK(study.C_observed > 0.0);
    CHECK(study.C_observed <= study.C_theoretical * (1.0 + 1e-6));

    // K <= 2 lambda1 / (lambda1 - c) E_-1 pointwise and E_-1 non-increasing
    const auto energies = weak::weak_energy_forms(sys);
    const auto& K = study.trace.functionals.at("K");
    const auto& Em1 = study.trace.functionals.at("E_minus1");
    const double factor = 2.0 * sys.lambda1 / (sys.lambda1 - sys.c);
    for (size_t i = 0; i < K.size(); ++i) {
        CHECK(K[i] <= factor * Em1[i] * (1.0 + 1e-12));
        if (i > 0) CHECK(Em1[i] <= Em1[i - 1] * (1.0 + 1e-12));
    }
}

TEST_CASE("polynomial_decay_study: H decrease balances the K integral") {
    const auto sys = dirichlet_system(4, 0.2);
    const auto [params, cert] = weak::auto_epsilon_weak(sys, 2.0);
    REQUIRE(cert.valid);
    const auto H = weak::liapunov_form_weak(sys, params);

    Eigen::VectorXd U0 = Eigen::VectorXd::Ones(16);
    const double dt = 0.01;
    const auto trace = numerics::integrate(
        weak::flow(sys), U0, dt, 20.0, numerics::StepMethod::expm_step,
        {H, weak::weak_energy_forms(sys).K});
    const auto& Hs = trace.functionals.at("H_eps_weak");
    const auto& Ks = trace.functionals.at("K");

    // H(t2) - H(t1) <= -gamma int K dt, trapezoid within 1e-4 relative
    double integral = 0.0;
    for (size_t i = 1; i < Ks.size(); ++i) {
        integral += 0.5 * dt * (Ks[i] + Ks[i - 1]);
        const double drop = Hs[i] - Hs.front();
        CHECK(drop <= -cert.gamma * integral +
                          1e-4 * (1.0 + cert.gamma * integral));
    }
}

TEST_CASE("polynomial_decay_study: near-exponential start, bounded t K(t)") {
    // initial datum purely in (u, w); the almost-decoupled u-oscillator
    // drains quickly before the weak coupling takes over
    const auto sys = dirichlet_system(4, 0.01);
    const auto [params, cert] = weak::auto_epsilon_weak(sys, 2.0);
    REQUIRE(cert.valid);
    Eigen::VectorXd U0 = Eigen::VectorXd::Zero(16);
    U0(0) = 1.0;
    U0(8) = 1.0;
    const auto study = weak::polynomial_decay_study(sys, params, U0, 200.0, 0.1);
    const auto& K = study.trace.functionals.at("K");
    CHECK(K[50] < 0.05 * K.front()); // t = 5
    CHECK(std::isfinite(study.C_observed));
    CHECK(study.C_observed <= study.C_theoretical * (1.0 + 1e-6));
}

TEST_CASE("uniformity_check: constants stay within a factor of two") {
    const auto table = weak::uniformity_check({8, 16}, 0.2, 2.0, 300.0);
    REQUIRE(table.rows.size() == 2);
    for (const auto& row : table.rows) {
        CHECK(row.certified);
        CHECK(row.gamma > 0.0);
    }
    CHECK(table.passes);
    // gamma(n) stabilizes: lambda1 does not move with n
    CHECK(std::abs(table.rows[1].gamma - table.rows[0].gamma) <=
          0.10 * table.rows[0].gamma);
    // the spectral decrement of the truncation keeps falling (the
    // non-exponential signature)
    CHECK(table.rows[1].spectral_decrement < table.rows[0].spectral_decrement);
}

TEST_CASE("uniformity_check: empty admissible window reported per row") {
    const auto table = weak::uniformity_check({4, 8}, 0.9, 10.0, 50.0);
    REQUIRE(table.rows.size() == 2);
    for (const auto& row : table.rows) {
        CHECK(!row.certified);
        CHECK(row.note.find("admissible p") != std::string::npos);
    }
    CHECK(!table.passes);
}
