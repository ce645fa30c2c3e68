#pragma once

#include "liapcert/forms.hpp"
#include "liapcert/numerics.hpp"

#include <complex>
#include <optional>

namespace liapcert::scalar {

/// Parameters of the coupled pair
///   u'' + u' + lambda u + c v = 0
///   v''      + lambda v + c u = 0
/// with 0 < |c| < lambda. The damping coefficient is normalized to 1; a
/// general damping b u' reduces to this by a time-scale change.
struct ScalarParams {
    double lambda;
    double c;

    ScalarParams(double lambda_, double c_);
};

/// Output of the closed-form rate-bound chain: auxiliary splitting constant
/// gamma_aux, coupling ratio theta = |c|/lambda, the derived (p, eps) and the
/// certified decay rate delta of the Liapunov form (the norm-level decrement
/// is delta / 2).
struct RateBoundParams {
    double p = 0.0;
    double gamma_aux = 0.0;
    double eps = 0.0;
    double theta = 0.0;
    double delta = 0.0;
};

/// 4x4 flow matrix in (u, v, w, z) coordinates.
forms::LinearFlow flow_matrix(const ScalarParams& params);

/// Total energy E = (w^2 + z^2 + lambda(u^2 + v^2))/2 + c u v.
/// Its derivative along the flow is exactly -w^2.
forms::QuadraticForm energy_form(const ScalarParams& params);

/// The strict Liapunov candidate
///   H_eps = E - eps v z + p eps u w + ((p+1) lambda eps / (2c)) (w v - u z).
/// eps = 0 gives the energy form exactly.
forms::QuadraticForm liapunov_form(const ScalarParams& params, double p,
                                   double eps);

/// Characteristic polynomial (zeta^2 + lambda)(zeta^2 + zeta + lambda) - c^2,
/// expanded: [1, 1, 2 lambda, lambda, lambda^2 - c^2].
numerics::Polynomial char_poly(const ScalarParams& params);

/// min over roots of -Re(zeta): the logarithmic decrement. Always in
/// (0, 1/4) on the valid parameter domain.
double decrement_spectral(const ScalarParams& params);

/// Residuals of the real/imaginary root relations at zeta = s + i a.
///
/// res_imag is the imaginary-part condition a[4s^3 + 4(lambda - a^2)s + 3s^2
/// + lambda - a^2] (zero exactly for real roots). res_a2 is the residual of
/// a^2 = lambda + (4s^3 + 3s^2)/(1 + 4s); when 1 + 4s is at the singular
/// point the undivided relation 4s^3 + 3s^2 + (lambda - a^2)(1 + 4s) is
/// reported instead and a2_singular is set.
struct RootRelationResiduals {
    double res_imag = 0.0;
    double res_a2 = 0.0;
    bool a2_singular = false;
};

RootRelationResiduals check_root_relations(const ScalarParams& params,
                                           std::complex<double> root);

/// Detects real characteristic roots by solving G(theta) = c on the
/// decreasing branch of G(theta) = sqrt((lambda + theta^2)(lambda - theta +
/// theta^2)) by bisection. All real roots lie in (-1, 0); returns zeta =
/// -theta verified to satisfy P(zeta) = 0 within 1e-9.
std::pair<bool, std::optional<double>> real_root_onset(double lambda, double c);

/// Constructs (lambda, c) with logarithmic decrement exactly 1/4 - eps:
/// lambda = 1/(16 eps), root placed at s = -1/4 + eps with a^2 from the
/// imaginary-part relation and c^2 from the expanded real-part condition
/// (self-verified against the root solver). Valid for 0 < eps <= 0.02.
std::pair<ScalarParams, double> near_optimal_params(double eps);

/// Evaluates the closed-form chain
///   p   = 1 + 2 / ((1 - gamma_aux)(1 - theta))
///   eps = 1 / (1 + p + (1 - gamma_aux)/(16 gamma_aux lambda)
///               * [4 p^2 + (p+1)^2 / theta^2])
///   delta = eps / ((lambda + |c|)/(2 lambda)
///               + eps (p/(2 sqrt(lambda)) + (p+1) sqrt(lambda)/(4 |c|)))
/// for gamma_aux in (0, 1). The measured strictness rate of the resulting
/// H_eps is guaranteed >= delta up to numerical slack.
RateBoundParams rate_bound(const ScalarParams& params, double gamma_aux);

/// Maximizes the certified decay rate over p in [1.1, 10] (40 log-spaced
/// points) with golden-section in eps per p, seeded by rate_bound with
/// gamma_aux = min(sqrt(lambda)/|c|, 1/2). The certified norm decrement
/// delta/2 never exceeds the spectral decrement.
RateBoundParams optimize_rate_bound(const ScalarParams& params);

} // namespace liapcert::scalar
