"""Central numeric policy.

Tolerances used across the package live here so they can be audited in one
place.  The cone tolerance is overridable through the environment, the rest
are package policy.
"""

import os

ENV_CONE_TOL = "LOGDET_LMI_TOL"
ENV_KERNEL_BACKEND = "LOGDET_LMI_BACKEND"

DEFAULT_CONE_TOL = 1e-9      # PD/PSD classification cutoff
LOAD_ASYMMETRY_REL = 1e-8    # matrix literals: asymmetry rejection threshold
SQRT_CLAMP_REL = 1e-10       # eigenvalue clamping in sqrt_psd, relative to max |eig|
CONVEXITY_REL_TOL = 1e-7     # scale-normalized convexity slack floor
STRICT_TIGHT_REL = 1e-9      # "slack is numerically zero" threshold
HESSIAN_PSD_TOL = 1e-4       # allowed negativity of second differences
FD_STEP_REL = 1e-5           # default finite-difference step scale


def cone_tol() -> float:
    """Global PD/PSD tolerance; LOGDET_LMI_TOL overrides the default."""
    raw = os.environ.get(ENV_CONE_TOL)
    if raw is None:
        return DEFAULT_CONE_TOL
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(
            f"{ENV_CONE_TOL} must be a decimal number, got {raw!r}"
        ) from None
    if value < 0.0:
        raise ValueError(f"{ENV_CONE_TOL} must be nonnegative, got {value!r}")
    return value
