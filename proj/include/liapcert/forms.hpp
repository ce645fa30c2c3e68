#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace liapcert::forms {

/// Block layout of the state vector U = (u, v, w, z), where w = u', z = v'.
struct BlockLayout {
    int n_u = 0;
    int n_v = 0;
    int n_w = 0;
    int n_z = 0;

    int dim() const { return n_u + n_v + n_w + n_z; }
    int offset_u() const { return 0; }
    int offset_v() const { return n_u; }
    int offset_w() const { return n_u + n_v; }
    int offset_z() const { return n_u + n_v + n_w; }

    static BlockLayout uniform(int n) { return {n, n, n, n}; }
};

/// First-order linear system U' = S U with block layout metadata.
struct LinearFlow {
    Eigen::MatrixXd S;
    BlockLayout layout;

    int dim() const { return static_cast<int>(S.rows()); }
};

/// Validates S square, block sizes summing to the order, n_u = n_w, n_v = n_z.
LinearFlow make_flow(Eigen::MatrixXd S, BlockLayout layout);

/// Flow without (u, v, w, z) structure (generic first-order system); the
/// layout is left empty. Form operations apply unchanged.
LinearFlow make_flow(Eigen::MatrixXd S);

/// Symmetric quadratic form U |-> U^T Q U on the state space.
///
/// The matrix is stored exactly symmetric: the constructor checks the input
/// asymmetry and mirrors the upper triangle into the lower one, so identities
/// that hold exactly in block arithmetic stay exact.
class QuadraticForm {
public:
    QuadraticForm() = default;
    explicit QuadraticForm(Eigen::MatrixXd Q, std::string label = "");

    int dim() const { return static_cast<int>(Q_.rows()); }
    const Eigen::MatrixXd& matrix() const { return Q_; }
    const std::string& label() const { return label_; }

    double operator()(const Eigen::VectorXd& U) const;

private:
    Eigen::MatrixXd Q_;
    std::string label_;
};

/// State-space blocks used when assembling forms term by term.
enum class Block { u, v, w, z };

/// Incremental assembly of a symmetric form from bilinear pairings.
///
/// add_pairing(x, y, M, a) adds the term a * <M x_blk, y_blk> = a * y^T M x.
/// For x != y the contribution is split as Q[y,x] += a*M/2, Q[x,y] += a*M^T/2,
/// which reproduces the pairing exactly for any M (symmetric, skew or
/// otherwise). For x == y the symmetric part of M enters.
class FormBuilder {
public:
    explicit FormBuilder(BlockLayout layout);

    FormBuilder& add_diag(Block b, const Eigen::MatrixXd& M);
    FormBuilder& add_diag(Block b, double scalar_times_identity);
    FormBuilder& add_pairing(Block x, Block y, const Eigen::MatrixXd& M,
                             double coeff = 1.0);
    FormBuilder& add_pairing(Block x, Block y, double coeff);

    QuadraticForm build(std::string label = "") const;

private:
    int offset(Block b) const;
    int size(Block b) const;

    BlockLayout layout_;
    Eigen::MatrixXd Q_;
};

/// Positivity margin, strictness rate and certified decay rate of a
/// candidate Liapunov form.
struct CertificateReport {
    double positivity_margin = 0.0; ///< min eigenvalue of the form matrix
    double gamma = 0.0;             ///< largest g with dQ/dt <= -g R [1/time]
    double delta = 0.0;             ///< certified decay rate of the form [1/time]
    bool valid = false;             ///< positivity_margin > 0 and gamma > 0
    double dissipation_bound_slack = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> notes;
};

double evaluate(const QuadraticForm& Q, const Eigen::VectorXd& U);

/// Form whose value at U equals d/dt (U(t)^T Q U(t)) when U' = S U,
/// i.e. the symmetric part of S^T Q + Q S. Linear in Q.
QuadraticForm lie_derivative(const QuadraticForm& Q, const LinearFlow& flow);

/// (positive definite?, margin = min eigenvalue). True iff margin > tol.
std::pair<bool, double> is_positive_definite(const QuadraticForm& Q,
                                             double tol = 0.0);

/// Largest gamma with lie_derivative(Q, flow) <= -gamma * R, computed from the
/// symmetric-definite pencil. May be <= 0 (no certificate); R must be positive
/// definite.
double strictness_rate(const QuadraticForm& Q, const LinearFlow& flow,
                       const QuadraticForm& R);

/// Largest m and smallest M with m R <= Q <= M R (extreme generalized
/// eigenvalues). R must be positive definite.
std::pair<double, double> sandwich_constants(const QuadraticForm& Q,
                                             const QuadraticForm& R);

/// The Gram-integral Liapunov form of the flow: the unique symmetric Q with
/// sym(S^T Q + Q S) = -I, solved as a dense linear system in the
/// upper-triangle unknowns. Requires S Hurwitz; the result is then positive
/// definite and lie_derivative(Q, flow) = -I.
QuadraticForm gram_liapunov(const LinearFlow& flow);

/// One-parameter certificate search: maximizes the strictness rate of
/// H(eps) over eps in the positivity window (0, eps_max), where eps_max is
/// the positive-definiteness breakdown located by bisection (the window is an
/// interval because H is affine in eps). The rate is measured against
/// `rate_reference` when given, against H(eps) itself otherwise.
struct CertificateSearchResult {
    double eps = 0.0;
    double eps_max = 0.0;
    CertificateReport report;
};

CertificateSearchResult maximize_certificate(
    const LinearFlow& flow,
    const std::function<QuadraticForm(double)>& H_of_eps,
    const QuadraticForm* rate_reference = nullptr);

/// Margin, strictness rate vs the form itself, and validity of H as a strict
/// Liapunov form for the flow.
CertificateReport certify_form(const LinearFlow& flow, const QuadraticForm& H);

} // namespace liapcert::forms
