"""Moment bounds for Lipschitz (possibly nonlinear) noise couplings.

For ``|rho(u)| <= lip_upper * |u|`` the p-th moment of the solution is
bounded by the *linear-case* second-moment integral run at an inflated
coupling:

    ||u(t,x)||_p^2 <= ∬ |mu|(dz1) |mu|(dz2)
                      c_p * K_star(t, x-z1, x-z2, 0; c_p^2 sqrt(p/2) lip_upper)

with ``c_p = 1`` for p = 2 and 2 otherwise.  For ``|rho(u)| >= lip_lower |u|``
and nonnegative initial data the second moment is bounded below by the same
integral at coupling ``lip_lower`` (prefactor 1).

Both functions return bounds on the SQUARED p-norm ``||u(t,x)||_p^2``, not on
the norm itself.
"""

from __future__ import annotations

from .errors import InadmissibleMeasureError
from .kernels import KernelParams, MomentBoundParams
from .measures import InitialMeasure, second_moment


def p_moment_upper_bound(t: float, x: float, mu: InitialMeasure,
                         bounds: MomentBoundParams, nu: float) -> float:
    """Upper bound on ||u(t,x)||_p^2; exact at p = 2 for linear rho."""
    params = KernelParams(nu=nu, lam=bounds.effective_lambda)
    integral = second_moment(t, x, mu.total_variation(), params,
                             formula="direct")
    return bounds.c_p * integral


def second_moment_lower_bound(t: float, x: float, mu: InitialMeasure,
                              lip_lower: float, nu: float) -> float:
    """Lower bound on ||u(t,x)||_2^2; requires a nonnegative measure."""
    if not mu.is_nonnegative:
        raise InadmissibleMeasureError(
            "second_moment_lower_bound requires a nonnegative initial measure")
    params = KernelParams(nu=nu, lam=lip_lower)
    return second_moment(t, x, mu, params, formula="direct")
