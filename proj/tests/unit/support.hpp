#pragma once

#include "liapcert/forms.hpp"
#include "liapcert/scalar.hpp"

#include <Eigen/Dense>

#include <random>

namespace test_support {

// Independent Rayleigh-quotient oracle for generalized-eigenvalue checks:
// coarse sphere sampling followed by projected gradient descent on
// q(x) = x^T L x / x^T R x. No eigensolver involved.
inline double rayleigh_min_oracle(const Eigen::MatrixXd& L,
                                  const Eigen::MatrixXd& R, unsigned seed,
                                  int samples = 20000, int descent = 4000) {
    const int d = static_cast<int>(L.rows());
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const auto quotient = [&](const Eigen::VectorXd& x) {
        return x.dot(L * x) / x.dot(R * x);
    };

    Eigen::VectorXd best = Eigen::VectorXd::Zero(d);
    double best_q = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd x(d);
        for (int i = 0; i < d; ++i) x(i) = gauss(rng);
        const double q = quotient(x);
        if (q < best_q) {
            best_q = q;
            best = x;
        }
    }

    Eigen::VectorXd x = best.normalized();
    double step = 0.5;
    double q = quotient(x);
    for (int it = 0; it < descent; ++it) {
        const double xRx = x.dot(R * x);
        const Eigen::VectorXd grad = 2.0 * (L * x - q * (R * x)) / xRx;
        Eigen::VectorXd trial = (x - step * grad).normalized();
        const double tq = quotient(trial);
        if (tq < q) {
            x = trial;
            q = tq;
            step *= 1.2;
        } else {
            step *= 0.5;
            if (step < 1e-18) break;
        }
    }
    return q;
}

inline double rayleigh_max_oracle(const Eigen::MatrixXd& L,
                                  const Eigen::MatrixXd& R, unsigned seed) {
    return -rayleigh_min_oracle(-L, R, seed);
}

inline Eigen::MatrixXd random_spd(int d, std::mt19937& rng, double eig_lo = 0.5,
                                  double eig_hi = 20.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd G(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) G(i, j) = gauss(rng);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    const Eigen::MatrixXd Q = qr.householderQ();
    std::uniform_real_distribution<double> eig(eig_lo, eig_hi);
    Eigen::VectorXd ev(d);
    for (int i = 0; i < d; ++i) ev(i) = eig(rng);
    Eigen::MatrixXd A = Q * ev.asDiagonal() * Q.transpose();
    // exact symmetry for the validating constructors
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j) A(i, j) = A(j, i);
    return A;
}

inline liapcert::scalar::ScalarParams random_scalar_params(std::mt19937& rng) {
    std::uniform_real_distribution<double> log_lambda(std::log(0.5),
                                                      std::log(50.0));
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    std::bernoulli_distribution sign(0.5);
    const double lambda = std::exp(log_lambda(rng));
    const double c = (sign(rng) ? 1.0 : -1.0) * frac(rng) * lambda;
    return {lambda, c};
}

} // namespace test_support
