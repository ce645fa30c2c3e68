#include "liapcert/strong.hpp"

#include "liapcert/errors.hpp"
#include "liapcert/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace liapcert::strong {

using forms::Block;
using forms::BlockLayout;
using forms::FormBuilder;
using forms::LinearFlow;
using forms::QuadraticForm;

namespace {

double operator_norm(const Eigen::MatrixXd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues()(0);
}

} // namespace

OperatorPair OperatorPair::create(Eigen::MatrixXd A, Eigen::MatrixXd C) {
    OperatorPair pair;
    pair.n = static_cast<int>(A.rows());
    if (A.rows() != A.cols() || C.rows() != C.cols() || C.rows() != A.rows() ||
        pair.n == 0) {
        throw InvalidInputError("OperatorPair: A, C must be square, same order");
    }
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidInputError("OperatorPair: A must be symmetric");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("OperatorPair: eigensolve of A failed");
    }
    pair.lambda1 = solver.eigenvalues()(0);
    if (!(pair.lambda1 > 0.0)) {
        throw InvalidInputError("OperatorPair: A must be positive definite");
    }
    const auto& V = solver.eigenvectors();
    const Eigen::VectorXd ev = solver.eigenvalues();
    pair.A_half = V * ev.cwiseSqrt().asDiagonal() * V.transpose();
    pair.A_inv_half = V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
    pair.A_inv = V * ev.cwiseInverse().asDiagonal() * V.transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(pair.n - 1);
    pair.c_cond = (smin > 0.0) ? smax / smin
                               : std::numeric_limits<double>::infinity();

    pair.C_adjoint = C.transpose();
    pair.A = std::move(A);
    pair.C = std::move(C);
    return pair;
}

ConditionReport check_conditions(const OperatorPair& pair) {
    ConditionReport report;
    report.norm_C_V_Vprime =
        operator_norm(pair.A_inv_half * pair.C * pair.A_inv_half);
    report.c_invertible = std::isfinite(pair.c_cond) && pair.c_cond < 1e14;
    if (report.c_invertible) {
        const Eigen::MatrixXd C_inv = pair.C.inverse();
        report.norm_Cinv_H_V = operator_norm(pair.A_half * C_inv);
        report.norm_Cinv_Vprime_H = operator_norm(C_inv * pair.A_half);
        report.norm_commutator_D =
            operator_norm(pair.A * C_inv - C_inv * pair.A);
    } else {
        const double inf = std::numeric_limits<double>::infinity();
        report.norm_Cinv_H_V = inf;
        report.norm_Cinv_Vprime_H = inf;
        report.norm_commutator_D = inf;
    }
    report.passes = report.c_invertible && report.norm_C_V_Vprime < 1.0;
    return report;
}

LinearFlow generator(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C) {
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    const auto I = Eigen::MatrixXd::Identity(n, n);
    S.block(0, 2 * n, n, n) = I;                       // u' = w
    S.block(n, 3 * n, n, n) = I;                       // v' = z
    S.block(2 * n, 0, n, n) = -A;                      // w' = -A u - C v - w
    S.block(2 * n, n, n, n) = -C;
    S.block(2 * n, 2 * n, n, n) = -I;
    S.block(3 * n, n, n, n) = -A;                      // z' = -A v - C^T u
    S.block(3 * n, 0, n, n) = -C.transpose();
    return forms::make_flow(std::move(S), BlockLayout::uniform(n));
}

LinearFlow generator(const OperatorPair& pair) {
    return generator(pair.A, pair.C);
}

QuadraticForm base_energy_form(const OperatorPair& pair) {
    FormBuilder builder(BlockLayout::uniform(pair.n));
    builder.add_diag(Block::u, 0.5 * pair.A)
        .add_diag(Block::v, 0.5 * pair.A)
        .add_diag(Block::w, 0.5)
        .add_diag(Block::z, 0.5)
        .add_pairing(Block::v, Block::u, pair.C, 1.0); // <C v, u>
    return builder.build("H0");
}

QuadraticForm liapunov_form_strong(const OperatorPair& pair, double p,
                                   double eps) {
    if (!(p > 1.0)) {
        throw InvalidInputError("liapunov_form_strong: need p > 1");
    }
    if (!(eps >= 0.0)) {
        throw InvalidInputError("liapunov_form_strong: need eps >= 0");
    }
    const ConditionReport cond = check_conditions(pair);
    if (!cond.passes) {
        std::ostringstream msg;
        msg << "liapunov_form_strong: admissibility conditions fail ("
            << "|C|_{V,V'} = " << cond.norm_C_V_Vprime
            << ", C invertible = " << (cond.c_invertible ? "yes" : "no") << ")";
        throw CertificationError(msg.str());
    }

    const Eigen::MatrixXd C_inv = pair.C.inverse();
    const Eigen::MatrixXd AC_inv = pair.A * C_inv;
    const Eigen::MatrixXd C_invA = C_inv * pair.A;

    FormBuilder builder(BlockLayout::uniform(pair.n));
    builder.add_diag(Block::u, 0.5 * pair.A)
        .add_diag(Block::v, 0.5 * pair.A)
        .add_diag(Block::w, 0.5)
        .add_diag(Block::z, 0.5)
        .add_pairing(Block::v, Block::u, pair.C, 1.0)
        .add_pairing(Block::z, Block::v, -eps)
        .add_pairing(Block::w, Block::u, p * eps)
        .add_pairing(Block::w, Block::v, AC_inv, 0.5 * (p + 1.0) * eps)
        .add_pairing(Block::u, Block::z, C_invA, -0.5 * (p + 1.0) * eps);
    return builder.build("H_eps");
}

forms::CertificateReport certify_strong(const OperatorPair& pair, double p,
                                        double eps) {
    const LinearFlow flow = generator(pair);
    const QuadraticForm H = liapunov_form_strong(pair, p, eps);
    forms::CertificateReport report = forms::certify_form(flow, H);

    // Slack of the conservative dissipation bound:
    // lie(H) <= -(eps/2)(|w|^2 + |z|^2)
    //           - ((p-1) eps / 4)(1 - |C|) (|A^(1/2)u|^2 + |A^(1/2)v|^2).
    const ConditionReport cond = check_conditions(pair);
    FormBuilder bound(BlockLayout::uniform(pair.n));
    const double uv_coeff = 0.25 * (p - 1.0) * eps *
                            (1.0 - cond.norm_C_V_Vprime);
    bound.add_diag(Block::u, uv_coeff * pair.A)
        .add_diag(Block::v, uv_coeff * pair.A)
        .add_diag(Block::w, 0.5 * eps)
        .add_diag(Block::z, 0.5 * eps);
    const Eigen::MatrixXd slack_matrix =
        -forms::lie_derivative(H, flow).matrix() - bound.build().matrix();
    report.dissipation_bound_slack = numerics::sym_eig(slack_matrix).front();
    if (report.dissipation_bound_slack < 0.0) {
        report.notes.push_back("intermediate dissipation bound violated at this (p, eps)");
    }
    return report;
}

std::pair<double, forms::CertificateReport> auto_epsilon(
    const OperatorPair& pair, double p) {
    if (!(p > 1.0)) {
        throw InvalidInputError("auto_epsilon: need p > 1");
    }
    const ConditionReport cond = check_conditions(pair);
    if (!cond.passes) {
        throw CertificationError("auto_epsilon: admissibility conditions fail");
    }
    const LinearFlow flow = generator(pair);
    const auto result = forms::maximize_certificate(
        flow, [&](double eps) { return liapunov_form_strong(pair, p, eps); });
    if (!result.report.valid) {
        throw NoCertificateError(
            "auto_epsilon: no eps in (0, " + std::to_string(result.eps_max) +
            ") yields a valid certificate");
    }
    return {result.eps, result.report};
}

} // namespace liapcert::strong
