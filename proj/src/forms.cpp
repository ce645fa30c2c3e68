#include "liapcert/forms.hpp"

#include "liapcert/errors.hpp"
#include "liapcert/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace liapcert::forms {

namespace {

// Copies the upper triangle onto the lower one so the stored matrix is
// symmetric bit for bit.
void mirror_upper(Eigen::MatrixXd& Q) {
    for (int i = 0; i < Q.rows(); ++i) {
        for (int j = 0; j < i; ++j) {
            Q(i, j) = Q(j, i);
        }
    }
}

} // namespace

LinearFlow make_flow(Eigen::MatrixXd S, BlockLayout layout) {
    if (S.rows() != S.cols()) {
        throw InvalidInputError("LinearFlow: matrix not square");
    }
    if (layout.dim() != S.rows()) {
        throw InvalidInputError("LinearFlow: block sizes do not sum to order");
    }
    if (layout.n_u != layout.n_w || layout.n_v != layout.n_z) {
        throw InvalidInputError("LinearFlow: need n_u = n_w and n_v = n_z");
    }
    return LinearFlow{std::move(S), layout};
}

LinearFlow make_flow(Eigen::MatrixXd S) {
    if (S.rows() != S.cols() || S.rows() == 0) {
        throw InvalidInputError("LinearFlow: matrix must be square");
    }
    return LinearFlow{std::move(S), BlockLayout{}};
}

QuadraticForm::QuadraticForm(Eigen::MatrixXd Q, std::string label)
    : Q_(std::move(Q)), label_(std::move(label)) {
    if (Q_.rows() != Q_.cols() || Q_.rows() == 0) {
        throw InvalidInputError("QuadraticForm: matrix must be square");
    }
    const double scale = std::max(1.0, Q_.cwiseAbs().maxCoeff());
    const double asym = (Q_ - Q_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
        throw InvalidInputError("QuadraticForm: matrix not symmetric");
    }
    mirror_upper(Q_);
}

double QuadraticForm::operator()(const Eigen::VectorXd& U) const {
    if (U.size() != Q_.rows()) {
        throw InvalidInputError("QuadraticForm: state dimension mismatch");
    }
    return U.dot(Q_ * U);
}

FormBuilder::FormBuilder(BlockLayout layout)
    : layout_(layout), Q_(Eigen::MatrixXd::Zero(layout.dim(), layout.dim())) {}

int FormBuilder::offset(Block b) const {
    switch (b) {
        case Block::u: return layout_.offset_u();
        case Block::v: return layout_.offset_v();
        case Block::w: return layout_.offset_w();
        default: return layout_.offset_z();
    }
}

int FormBuilder::size(Block b) const {
    switch (b) {
        case Block::u: return layout_.n_u;
        case Block::v: return layout_.n_v;
        case Block::w: return layout_.n_w;
        default: return layout_.n_z;
    }
}

FormBuilder& FormBuilder::add_diag(Block b, const Eigen::MatrixXd& M) {
    const int o = offset(b);
    const int s = size(b);
    if (M.rows() != s || M.cols() != s) {
        throw InvalidInputError("FormBuilder: diagonal block size mismatch");
    }
    Q_.block(o, o, s, s) += M;
    return *this;
}

FormBuilder& FormBuilder::add_diag(Block b, double scalar_times_identity) {
    const int o = offset(b);
    const int s = size(b);
    Q_.block(o, o, s, s) +=
        scalar_times_identity * Eigen::MatrixXd::Identity(s, s);
    return *this;
}

FormBuilder& FormBuilder::add_pairing(Block x, Block y, const Eigen::MatrixXd& M,
                                      double coeff) {
    const int ox = offset(x), sx = size(x);
    const int oy = offset(y), sy = size(y);
    if (M.rows() != sy || M.cols() != sx) {
        throw InvalidInputError("FormBuilder: pairing block size mismatch");
    }
    if (x == y) {
        Q_.block(ox, ox, sx, sx) += coeff * 0.5 * (M + M.transpose());
        return *this;
    }
    const Eigen::MatrixXd half = 0.5 * coeff * M;
    Q_.block(oy, ox, sy, sx) += half;
    Q_.block(ox, oy, sx, sy) += half.transpose();
    return *this;
}

FormBuilder& FormBuilder::add_pairing(Block x, Block y, double coeff) {
    if (size(x) != size(y)) {
        throw InvalidInputError("FormBuilder: scalar pairing needs equal blocks");
    }
    return add_pairing(x, y, Eigen::MatrixXd::Identity(size(y), size(x)), coeff);
}

QuadraticForm FormBuilder::build(std::string label) const {
    return QuadraticForm(Q_, std::move(label));
}

double evaluate(const QuadraticForm& Q, const Eigen::VectorXd& U) {
    return Q(U);
}

QuadraticForm lie_derivative(const QuadraticForm& Q, const LinearFlow& flow) {
    if (Q.dim() != flow.dim()) {
        throw InvalidInputError("lie_derivative: dimension mismatch");
    }
    // S^T Q + Q S is symmetric up to rounding in the products; mirroring the
    // upper triangle keeps block cancellations exact.
    Eigen::MatrixXd QS = Q.matrix() * flow.S;
    Eigen::MatrixXd L = QS.transpose() + QS;
    for (int i = 0; i < L.rows(); ++i) {
        for (int j = 0; j < i; ++j) {
            L(i, j) = L(j, i);
        }
    }
    return QuadraticForm(std::move(L), "d/dt " + Q.label());
}

std::pair<bool, double> is_positive_definite(const QuadraticForm& Q,
                                             double tol) {
    const std::vector<double> ev = numerics::sym_eig(Q.matrix());
    const double margin = ev.front();
    return {margin > tol, margin};
}

double strictness_rate(const QuadraticForm& Q, const LinearFlow& flow,
                       const QuadraticForm& R) {
    const QuadraticForm L = lie_derivative(Q, flow);
    // lie(Q) <= -gamma R  <=>  gamma <= min eig of the pencil (-lie(Q), R).
    return numerics::gen_eig_min(-L.matrix(), R.matrix());
}

std::pair<double, double> sandwich_constants(const QuadraticForm& Q,
                                             const QuadraticForm& R) {
    return {numerics::gen_eig_min(Q.matrix(), R.matrix()),
            numerics::gen_eig_max(Q.matrix(), R.matrix())};
}

QuadraticForm gram_liapunov(const LinearFlow& flow) {
    const auto& S = flow.S;
    const int d = flow.dim();

    double abscissa = -std::numeric_limits<double>::infinity();
    for (const auto& z : numerics::general_eig(S)) {
        abscissa = std::max(abscissa, z.real());
    }
    if (!(abscissa < 0.0)) {
        throw NoCertificateError(
            "gram_liapunov: flow is not Hurwitz (spectral abscissa " +
            std::to_string(abscissa) + ")");
    }

    // Unknowns: upper triangle q_{ij}, i <= j. Equations: upper triangle of
    // S^T Q + Q S = -I.
    const int m = d * (d + 1) / 2;
    auto idx = [d](int i, int j) { return i * d - i * (i - 1) / 2 + (j - i); };
    Eigen::MatrixXd Amat = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);

    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            const int row = idx(i, j);
            rhs(row) = (i == j) ? -1.0 : 0.0;
            // (S^T Q + Q S)_{ij} = sum_k S_{ki} q_{kj} + q_{ik} S_{kj}
            for (int k = 0; k < d; ++k) {
                Amat(row, idx(std::min(k, j), std::max(k, j))) += S(k, i);
                Amat(row, idx(std::min(i, k), std::max(i, k))) += S(k, j);
            }
        }
    }

    Eigen::VectorXd q = Amat.partialPivLu().solve(rhs);
    Eigen::MatrixXd Q(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            Q(i, j) = q(idx(i, j));
            Q(j, i) = Q(i, j);
        }
    }

    const double residual =
        (S.transpose() * Q + Q * S + Eigen::MatrixXd::Identity(d, d))
            .cwiseAbs()
            .maxCoeff();
    if (!(residual <= 1e-8)) {
        throw NumericalError("gram_liapunov: residual " +
                             std::to_string(residual));
    }
    return QuadraticForm(std::move(Q), "gram");
}

CertificateReport certify_form(const LinearFlow& flow, const QuadraticForm& H) {
    CertificateReport report;
    report.positivity_margin = is_positive_definite(H).second;
    if (report.positivity_margin > 0.0) {
        report.gamma = strictness_rate(H, flow, H);
    } else {
        // The pencil needs a definite reference; an indefinite H carries no
        // certificate regardless of the rate.
        report.gamma = 0.0;
        report.notes.push_back("form not positive definite");
    }
    report.delta = report.gamma;
    report.valid = report.positivity_margin > 0.0 && report.gamma > 0.0;
    return report;
}

CertificateSearchResult maximize_certificate(
    const LinearFlow& flow,
    const std::function<QuadraticForm(double)>& H_of_eps,
    const QuadraticForm* rate_reference) {
    const auto pd = [&](double eps) {
        return is_positive_definite(H_of_eps(eps)).first;
    };
    const auto rate = [&](double eps) -> double {
        const QuadraticForm H = H_of_eps(eps);
        if (!is_positive_definite(H).first) {
            return -std::numeric_limits<double>::infinity();
        }
        return strictness_rate(H, flow, rate_reference ? *rate_reference : H);
    };

    if (!pd(0.0)) {
        throw NoCertificateError(
            "certificate search: base form (eps = 0) not positive definite");
    }

    // Positivity window: H is affine in eps, so {eps >= 0 : H(eps) > 0} is an
    // interval. Bracket the breakdown by doubling, then bisect.
    double lo = 0.0, hi = 1.0;
    if (pd(hi)) {
        while (pd(hi) && hi < 1e8) {
            lo = hi;
            hi *= 2.0;
        }
    }
    double eps_max;
    if (hi >= 1e8 && pd(hi)) {
        eps_max = hi; // positivity never breaks in the searched range
    } else {
        for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (pd(mid) ? lo : hi) = mid;
        }
        eps_max = lo;
    }

    // Coarse log-scan to bracket the peak, then golden-section refinement.
    const double eps_hi = 0.999 * eps_max;
    const double eps_lo = 1e-7 * eps_max;
    constexpr int kScan = 24;
    double best_eps = eps_hi;
    double best_rate = -std::numeric_limits<double>::infinity();
    std::vector<double> grid(kScan);
    for (int i = 0; i < kScan; ++i) {
        grid[static_cast<size_t>(i)] =
            eps_lo * std::pow(eps_hi / eps_lo, double(i) / (kScan - 1));
        const double r = rate(grid[static_cast<size_t>(i)]);
        if (r > best_rate) {
            best_rate = r;
            best_eps = grid[static_cast<size_t>(i)];
        }
    }
    int best_i = 0;
    for (int i = 0; i < kScan; ++i) {
        if (grid[static_cast<size_t>(i)] == best_eps) best_i = i;
    }
    double a = grid[static_cast<size_t>(std::max(0, best_i - 1))];
    double b = grid[static_cast<size_t>(std::min(kScan - 1, best_i + 1))];

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = rate(x1), f2 = rate(x2);
    for (int it = 0; it < 60 && (b - a) > 1e-12 * eps_max; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = rate(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = rate(x1);
        }
    }
    const double eps_star = (f1 > f2) ? x1 : x2;
    if (std::max(f1, f2) > best_rate) {
        best_eps = eps_star;
    }

    CertificateSearchResult result;
    result.eps = best_eps;
    result.eps_max = eps_max;
    const QuadraticForm H = H_of_eps(best_eps);
    result.report.positivity_margin = is_positive_definite(H).second;
    result.report.gamma = strictness_rate(
        H, flow, rate_reference ? *rate_reference : H);
    result.report.delta = result.report.gamma;
    result.report.valid = result.report.positivity_margin > 0.0 &&
                          result.report.gamma > 0.0;
    return result;
}

} // namespace liapcert::forms
