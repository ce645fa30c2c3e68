"""Explicit quadratic Liapunov certificates for partially damped coupled
second-order systems.

The heavy lifting lives in the compiled extension ``liapcert._core``; this
package re-exports its public surface. When ``LIAPCERT_EXT_DIR`` is set
(as the in-tree test harness does), the extension is loaded from that
directory instead of the installed package.
"""

import os
import sys

_ext_dir = os.environ.get("LIAPCERT_EXT_DIR")
if _ext_dir and _ext_dir not in sys.path:
    sys.path.insert(0, _ext_dir)
    try:
        import _core  # noqa: F401
        sys.modules[__name__ + "._core"] = _core
    finally:
        sys.path.remove(_ext_dir)

from ._core import (  # noqa: E402,F401
    CertificateReport,
    CertificationError,
    ConditionReport,
    DiscretizationSpec,
    InvalidInputError,
    LinearFlow,
    NumericalError,
    OperatorPair,
    QuadraticForm,
    RateBoundParams,
    ScalarParams,
    WeakLiapunovParams,
    WeakSystem,
    __version__,
    auto_epsilon,
    auto_epsilon_weak,
    base_energy_form,
    certify_strong,
    certify_weak,
    char_poly,
    check_conditions,
    complex_scalar,
    decrement_spectral,
    energy_form,
    expm,
    flow_matrix,
    gen_eig_min,
    generator,
    gram_liapunov,
    is_positive_definite,
    liapunov_form,
    liapunov_form_strong,
    liapunov_form_weak,
    lie_derivative,
    make_weak_params,
    near_optimal_params,
    optimize_rate_bound,
    plate_multiplication,
    plate_structural,
    poly_roots,
    rate_bound,
    real_root_onset,
    sandwich_constants,
    spectral_decrement,
    strictness_rate,
    string_liapunov_form,
    string_periodic,
    sym_eig,
    wave_potentials,
    wave_strong,
    weak_flow,
)
