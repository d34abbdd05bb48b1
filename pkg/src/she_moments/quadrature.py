"""Adaptive quadrature helpers.

Thin contract layer over QUADPACK (Gauss-Kronrod panels with the standard
rational map for infinite tails).  Every integrand in this package is
Gaussian-dominated or exponentially decaying, which is exactly the regime
these routines converge fast in.  The wrappers exist so that quadrature
failures surface as :class:`~she_moments.errors.QuadratureError` with the
achieved error estimate instead of a silent warning.
"""

from __future__ import annotations

import warnings
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import QuadratureError

ABS_TOL = 1e-12
REL_TOL = 1e-10


def integrate_1d(f: Callable[[float], float], a: float, b: float,
                 abs_tol: float = ABS_TOL, rel_tol: float = REL_TOL,
                 limit: int = 200) -> float:
    """Integrate ``f`` over ``[a, b]`` (either end may be infinite).

    Raises QuadratureError when QUADPACK reports non-convergence or the
    error estimate exceeds ``max(abs_tol, rel_tol * |result|)`` by more
    than a factor of 10.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=abs_tol, epsrel=rel_tol,
                                      limit=limit)
        except integrate.IntegrationWarning as exc:
            # Retry once with a finer subdivision budget before giving up.
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, err = integrate.quad(f, a, b, epsabs=abs_tol,
                                          epsrel=rel_tol, limit=10 * limit)
            tol = max(abs_tol, rel_tol * abs(val))
            if not np.isfinite(val) or err > 10 * tol:
                raise QuadratureError(
                    f"quadrature did not converge on [{a}, {b}]: {exc}",
                    achieved=err, requested=tol) from exc
    if not np.isfinite(val):
        raise QuadratureError(f"quadrature returned non-finite value on [{a}, {b}]",
                              achieved=err, requested=abs_tol)
    return val


def integrate_2d(f: Callable[[float, float], float],
                 outer: tuple[float, float], inner: tuple[float, float],
                 abs_tol: float = 1e-11, rel_tol: float = 1e-9) -> float:
    """Nested adaptive quadrature ``∫ douter ∫ dinner f(outer, inner)``.

    The inner integral runs at a tighter tolerance than the outer one so
    the outer panels see a smooth integrand.
    """
    def outer_integrand(u: float) -> float:
        return integrate_1d(lambda v: f(u, v), inner[0], inner[1],
                            abs_tol=abs_tol / 10, rel_tol=rel_tol / 10)

    return integrate_1d(outer_integrand, outer[0], outer[1],
                        abs_tol=abs_tol, rel_tol=rel_tol)
