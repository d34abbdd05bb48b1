"""Initial measures and the quadrature of the two-point formulas.

Admissible initial data are signed Borel measures integrating
``exp(-a x^2)`` for *every* ``a > 0`` (equivalently: heat smoothing is
finite for all positive times).  That condition is not decidable
numerically, so density measures must carry a growth certificate from a
family that implies it:

    |f(x)| <= amplitude * (1 + |x|)^degree * exp(rate * |x|^power)

is admissible iff ``power < 2``, or ``power == 2`` with ``rate <= 0``.
Certificates outside the family are rejected at construction.

The two-point correlation of the solution is

    E[u(t,x1) u(t,x2)] = ∬ mu(dz1) mu(dz2) K_star(t, x1-z1, x2-z2, x1-x2)

or, splitting off the mean-field product,

    E[u(t,x1) u(t,x2)] = J0(t,x1) J0(t,x2)
                         + ∬ mu(dz1) mu(dz2) K_dag(...).

The split form is the default: the covariance kernel decays exponentially
in the separation variable, which conditions the quadrature much better
than the full kernel.  Double integrals run in rotated coordinates
``zbar = (z1+z2)/2`` (outer) and ``dz = z2-z1`` (inner), where the kernel
factors into a Gaussian in ``zbar`` times a function of ``|dz|``.

Measures parse from a declarative JSON object::

    {"type": "atoms", "atoms": [[x, m], ...]}
    {"type": "lebesgue", "scale": c}
    {"type": "gaussian", "mean": m, "var": v, "mass": c}
    {"type": "sum", "terms": [ ... ]}

The parsed object is kept verbatim on the measure (``.config``) so batch
outputs can echo it bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InadmissibleMeasureError
from .gaussian import heat_kernel
from .kernels import (KernelParams, TwoPointQuery, covariance_kernel,
                      two_point_kernel)
from .quadrature import integrate_1d

__all__ = [
    "GrowthCertificate", "InitialMeasure", "DiracAtoms", "LebesgueScaled",
    "DensityMeasure", "MeasureSum", "gaussian_density", "parse_measure",
    "mean_field", "second_moment", "two_point", "check_membership",
]


@dataclass(frozen=True)
class GrowthCertificate:
    """Declared envelope |f(x)| <= amplitude (1+|x|)^degree exp(rate |x|^power)."""

    amplitude: float
    degree: float = 0.0
    rate: float = 0.0
    power: float = 0.0

    def __post_init__(self):
        if not (self.amplitude >= 0 and np.isfinite(self.amplitude)):
            raise DomainError("certificate amplitude must be finite and >= 0")
        if self.degree < 0:
            raise DomainError("certificate degree must be >= 0")
        if not (0 <= self.power <= 2):
            raise DomainError("certificate power must lie in [0, 2]")

    @property
    def admissible(self) -> bool:
        """Whether the envelope implies Gaussian integrability for every a > 0."""
        if self.rate <= 0 or self.power < 2:
            return True
        return False


class InitialMeasure:
    """Base class; see the concrete variants below."""

    config: dict | None = None

    def primitive_terms(self) -> list["InitialMeasure"]:
        return [self]

    @property
    def is_nonnegative(self) -> bool:
        raise NotImplementedError

    def total_variation(self) -> "InitialMeasure":
        raise NotImplementedError

    def support_extent(self) -> float:
        """Half-width of (effective) support, for simulation-domain sizing."""
        raise NotImplementedError


@dataclass(frozen=True)
class DiracAtoms(InitialMeasure):
    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms",
                           tuple((float(x), float(m)) for x, m in self.atoms))
        if not self.atoms:
            raise DomainError("DiracAtoms requires at least one atom")

    @property
    def is_nonnegative(self) -> bool:
        return all(m >= 0 for _, m in self.atoms)

    def total_variation(self) -> "DiracAtoms":
        return DiracAtoms(tuple((x, abs(m)) for x, m in self.atoms))

    def support_extent(self) -> float:
        return max(abs(x) for x, _ in self.atoms)


@dataclass(frozen=True)
class LebesgueScaled(InitialMeasure):
    scale: float = 1.0

    @property
    def is_nonnegative(self) -> bool:
        return self.scale >= 0

    def total_variation(self) -> "LebesgueScaled":
        return LebesgueScaled(abs(self.scale))

    def support_extent(self) -> float:
        return 0.0


@dataclass(frozen=True)
class DensityMeasure(InitialMeasure):
    """Absolutely continuous measure ``f(x) dx`` with a growth certificate.

    ``nonnegative`` is declared, not verified.  ``support_radius`` (optional)
    bounds where the density is non-negligible; used only for simulation
    grid sizing.
    """

    f: Callable[[np.ndarray], np.ndarray]
    certificate: GrowthCertificate
    nonnegative: bool = False
    support_radius: float | None = None

    def __post_init__(self):
        if not self.certificate.admissible:
            raise InadmissibleMeasureError(
                "density growth certificate allows exp(rate * x^2) growth with "
                f"rate={self.certificate.rate} > 0; such measures are not "
                "heat-smoothable for every a > 0")

    @property
    def is_nonnegative(self) -> bool:
        return self.nonnegative

    def total_variation(self) -> "DensityMeasure":
        if self.nonnegative:
            return self
        fn = self.f
        return DensityMeasure(lambda x: np.abs(fn(x)), self.certificate,
                              nonnegative=True,
                              support_radius=self.support_radius)

    def support_extent(self) -> float:
        return self.support_radius if self.support_radius is not None else 0.0


@dataclass(frozen=True)
class MeasureSum(InitialMeasure):
    terms: tuple[InitialMeasure, ...]

    def __post_init__(self):
        if not self.terms:
            raise DomainError("MeasureSum requires at least one term")

    def primitive_terms(self) -> list[InitialMeasure]:
        out: list[InitialMeasure] = []
        for term in self.terms:
            out.extend(term.primitive_terms())
        return out

    @property
    def is_nonnegative(self) -> bool:
        return all(t.is_nonnegative for t in self.terms)

    def total_variation(self) -> "MeasureSum":
        return MeasureSum(tuple(t.total_variation() for t in self.terms))

    def support_extent(self) -> float:
        return max(t.support_extent() for t in self.terms)


def gaussian_density(mean: float, var: float, mass: float = 1.0) -> DensityMeasure:
    """Gaussian density ``mass * N(mean, var)`` with a bounded certificate."""
    if not (var > 0):
        raise DomainError(f"gaussian_density requires var > 0, got {var}")
    norm = mass / math.sqrt(2.0 * math.pi * var)

    def f(x):
        return norm * np.exp(-(np.asarray(x, dtype=float) - mean) ** 2 / (2.0 * var))

    return DensityMeasure(f, GrowthCertificate(amplitude=abs(norm)),
                          nonnegative=mass >= 0,
                          support_radius=abs(mean) + 8.0 * math.sqrt(var))


def parse_measure(obj: dict) -> InitialMeasure:
    """Build a measure from its declarative JSON form (echoed on ``.config``)."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise InadmissibleMeasureError(f"measure spec must be an object with a "
                                       f"'type' key, got {obj!r}")
    kind = obj["type"]
    if kind == "atoms":
        mu: InitialMeasure = DiracAtoms(tuple((float(x), float(m))
                                              for x, m in obj["atoms"]))
    elif kind == "lebesgue":
        mu = LebesgueScaled(float(obj.get("scale", 1.0)))
    elif kind == "gaussian":
        mu = gaussian_density(float(obj["mean"]), float(obj["var"]),
                              float(obj.get("mass", 1.0)))
    elif kind == "sum":
        mu = MeasureSum(tuple(parse_measure(t) for t in obj["terms"]))
    else:
        raise InadmissibleMeasureError(f"unknown measure type {kind!r}")
    object.__setattr__(mu, "config", obj)
    return mu


# ---------------------------------------------------------------------------
# Heat smoothing (mean field)
# ---------------------------------------------------------------------------

def mean_field(t: float, x: float, mu: InitialMeasure, nu: float) -> float:
    """J0(t, x): the heat semigroup applied to the initial measure.

    Exact for atoms and Lebesgue; adaptive quadrature (abs tol 1e-10) for
    densities.
    """
    if isinstance(mu, DiracAtoms):
        return float(sum(m * heat_kernel(t, x - loc, nu) for loc, m in mu.atoms))
    if isinstance(mu, LebesgueScaled):
        if not (t > 0 and nu > 0):
            raise DomainError("mean_field requires t > 0 and nu > 0")
        return mu.scale
    if isinstance(mu, DensityMeasure):
        fn = mu.f
        return integrate_1d(lambda y: float(fn(y)) * heat_kernel(t, x - y, nu),
                            -np.inf, np.inf, abs_tol=1e-10, rel_tol=1e-10)
    if isinstance(mu, MeasureSum):
        return float(sum(mean_field(t, x, term, nu) for term in mu.terms))
    raise DomainError(f"unsupported measure type {type(mu).__name__}")


# ---------------------------------------------------------------------------
# Bilinear kernel integrals
# ---------------------------------------------------------------------------

def _density_callable(mu: InitialMeasure):
    """Uniform density view of a non-atomic primitive measure."""
    if isinstance(mu, LebesgueScaled):
        c = mu.scale
        return lambda z: c
    if isinstance(mu, DensityMeasure):
        fn = mu.f
        return lambda z: float(fn(z))
    raise DomainError(f"measure {type(mu).__name__} has no density")


def _bilinear_primitive(mu1: InitialMeasure, mu2: InitialMeasure,
                        kernel: Callable[[float, float], float],
                        abs_tol: float, rel_tol: float) -> float:
    """∬ mu1(dz1) mu2(dz2) kernel(z1, z2) for primitive (non-sum) measures.

    Atomic factors reduce to sums; everything else integrates in rotated
    coordinates (outer zbar, inner dz).
    """
    a1, a2 = isinstance(mu1, DiracAtoms), isinstance(mu2, DiracAtoms)
    if a1 and a2:
        return float(sum(m1 * m2 * kernel(x1, x2)
                         for x1, m1 in mu1.atoms for x2, m2 in mu2.atoms))
    if a1 or a2:
        atoms = mu1.atoms if a1 else mu2.atoms
        dens = _density_callable(mu2 if a1 else mu1)
        total = 0.0
        for loc, m in atoms:
            if a1:
                def integrand(z2, loc=loc):
                    return dens(z2) * kernel(loc, z2)
            else:
                def integrand(z1, loc=loc):
                    return dens(z1) * kernel(z1, loc)
            total += m * integrate_1d(integrand, -np.inf, np.inf,
                                      abs_tol=abs_tol, rel_tol=rel_tol)
        return total

    f1, f2 = _density_callable(mu1), _density_callable(mu2)

    def rotated(zbar: float, dz: float) -> float:
        z1 = zbar - 0.5 * dz
        z2 = zbar + 0.5 * dz
        return f1(z1) * f2(z2) * kernel(z1, z2)

    def outer_integrand(zbar: float) -> float:
        return integrate_1d(lambda dz: rotated(zbar, dz), -np.inf, np.inf,
                            abs_tol=abs_tol / 10, rel_tol=rel_tol / 10)

    return integrate_1d(outer_integrand, -np.inf, np.inf,
                        abs_tol=abs_tol, rel_tol=rel_tol)


def _bilinear(mu: InitialMeasure, kernel: Callable[[float, float], float],
              abs_tol: float = 1e-10, rel_tol: float = 1e-9) -> float:
    """∬ mu(dz1) mu(dz2) kernel(z1, z2), expanding sums bilinearly."""
    terms = mu.primitive_terms()
    total = 0.0
    for t1 in terms:
        for t2 in terms:
            total += _bilinear_primitive(t1, t2, kernel, abs_tol, rel_tol)
    return total


def two_point(q: TwoPointQuery, mu: InitialMeasure, params: KernelParams,
              formula: str = "split") -> float:
    """E[u(t,x1) u(t,x2)] for a general admissible initial measure.

    ``formula="split"`` (default) evaluates J0*J0 plus the covariance-kernel
    integral; ``formula="direct"`` integrates the full two-point kernel.
    The two must agree; cross-checking them is the point of keeping both.
    """
    if formula == "split":
        def kernel(z1: float, z2: float) -> float:
            return float(covariance_kernel(q.t, q.x1 - z1, q.x2 - z2,
                                           q.x1 - q.x2, params))
        j0j0 = (mean_field(q.t, q.x1, mu, params.nu)
                * mean_field(q.t, q.x2, mu, params.nu))
        return j0j0 + _bilinear(mu, kernel)
    if formula == "direct":
        def kernel(z1: float, z2: float) -> float:
            return float(two_point_kernel(q.t, q.x1 - z1, q.x2 - z2,
                                          q.x1 - q.x2, params))
        return _bilinear(mu, kernel)
    raise DomainError(f"unknown two_point formula {formula!r}")


def second_moment(t: float, x: float, mu: InitialMeasure,
                  params: KernelParams, formula: str = "split") -> float:
    """E[u(t,x)^2]: the two-point function on the diagonal."""
    return two_point(TwoPointQuery(t, x, x), mu, params, formula=formula)


def check_membership(mu: InitialMeasure, a_grid: Sequence[float]) -> list[dict]:
    """Confirm ∫ exp(-a x^2) |mu|(dx) < inf for each ``a`` in the grid.

    Returns one report row per ``a`` with the computed integral.  Raises
    InadmissibleMeasureError if any integral fails to converge.
    """
    a_grid = [float(a) for a in a_grid]
    if not a_grid:
        raise DomainError("check_membership requires a nonempty a_grid")
    if any(a <= 0 for a in a_grid):
        raise DomainError("check_membership requires every a > 0")
    tv = mu.total_variation()
    report = []
    for a in a_grid:
        total = 0.0
        for term in tv.primitive_terms():
            if isinstance(term, DiracAtoms):
                total += sum(m * math.exp(-a * x * x) for x, m in term.atoms)
            elif isinstance(term, LebesgueScaled):
                total += term.scale * math.sqrt(math.pi / a)
            else:
                fn = _density_callable(term)
                try:
                    total += integrate_1d(
                        lambda z: fn(z) * math.exp(-a * z * z),
                        -np.inf, np.inf, abs_tol=1e-10, rel_tol=1e-8)
                except Exception as exc:
                    raise InadmissibleMeasureError(
                        f"Gaussian-weighted mass diverges at a={a}") from exc
        if not np.isfinite(total):
            raise InadmissibleMeasureError(
                f"Gaussian-weighted mass is not finite at a={a}")
        report.append({"a": a, "integral": total})
    return report
