"""Stochastic verifiers: direct SPDE Monte Carlo and Feynman-Kac sampling.

Two independent estimators of the same two-point moments:

* ``spde_estimate_two_point`` integrates the equation itself with an
  explicit Euler scheme on a finite grid (biased by discretisation,
  oblivious to the closed forms being checked);

* ``fk_two_point`` averages the path functional

      u0(x1 + (W1 + W2)/2) * u0(x2 + (W2 - W1)/2)
          * exp((lam^2 / 2 nu) * L),

  where ``W1, W2`` are independent N(0, 2 nu t) endpoints and ``(W1, L)``
  is drawn *exactly* from the joint law of a Brownian endpoint and its
  local time at level ``x2 - x1`` (time ``2 nu t``).  No path
  discretisation: the only error is statistical.

``fk_two_point_occupation`` is a third, deliberately cruder route that
discretises the Brownian pair and mollifies the interaction clock with a
narrow Gaussian; it converges to the same numbers as the mollification
width and time step shrink.

Reproducibility contract: every path's randomness is a pure function of
``(seed, path index)`` (see :mod:`she_moments.rng`), and per-path results
are reduced in path order with a fixed pairwise-summation tree.  Identical
(seed, n_paths) therefore give bit-identical estimates for any worker
count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import ConfigError, DivergenceError, DomainError
from .kernels import TwoPointQuery
from .local_time import JointLocalTimeLaw
from .measures import (DensityMeasure, DiracAtoms, InitialMeasure,
                       LebesgueScaled)
from .rng import (DOMAIN_FK, DOMAIN_FK_OCC, DOMAIN_SPDE, path_generator,
                  uniforms_at)

__all__ = [
    "Estimate", "SpdeGrid", "McConfig", "RhoSpec", "BoundedInitialData",
    "spde_solve_path", "spde_estimate_two_point", "fk_two_point",
    "fk_two_point_occupation",
]

MAX_DIVERGENT_FRACTION = 1e-3

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo result: sample mean, standard error, and path counts."""

    value: float
    std_error: float
    n: int
    n_divergent: int = 0


@dataclass(frozen=True)
class McConfig:
    """Path count, seed, and work partitioning.

    ``batch_size`` only controls memory/scheduling granularity; results are
    independent of it and of ``workers``.
    """

    n_paths: int
    seed: int = 0
    batch_size: int = 256
    workers: int = 1

    def __post_init__(self):
        if self.n_paths < 1:
            raise ConfigError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class SpdeGrid:
    """Uniform space-time grid on ``[-L, L] x [0, t_final]``.

    ``L`` is rounded up to the nearest multiple of ``dx``.  Stability of the
    explicit stencil requires ``dt <= dx^2 / nu``, checked against the
    diffusion coefficient at solve time.
    """

    L: float
    dx: float
    dt: float
    t_final: float
    boundary: str = "neumann0"

    def __post_init__(self):
        if self.L <= 0 or self.dx <= 0 or self.dt <= 0 or self.t_final <= 0:
            raise ConfigError("SpdeGrid requires positive L, dx, dt, t_final")
        if self.boundary not in ("dirichlet0", "neumann0"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")

    @property
    def n_cells(self) -> int:
        return max(2, int(math.ceil(2.0 * self.L / self.dx - 1e-9)))

    @property
    def half_width(self) -> float:
        return 0.5 * self.n_cells * self.dx

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.n_nodes)

    @property
    def n_time_steps(self) -> int:
        return max(1, int(round(self.t_final / self.dt)))

    def index_of(self, x: float) -> int:
        idx = int(round((x + self.half_width) / self.dx))
        if not (0 <= idx < self.n_nodes):
            raise ConfigError(f"point x={x} lies outside the grid")
        return idx

    def check_cfl(self, nu: float) -> None:
        if self.dt > self.dx ** 2 / nu * (1.0 + 1e-12):
            raise ConfigError(
                f"CFL violation: dt={self.dt} exceeds dx^2/nu="
                f"{self.dx ** 2 / nu:.6g}")


class RhoSpec:
    """Named noise-coupling presets (picklable, vectorised).

    ``linear(lam)``:    rho(u) = lam * u
    ``clipped(lam, c)``: rho(u) = lam * clip(u, -c, c)   (Lipschitz lam)
    ``zero()``:          rho == 0
    """

    def __init__(self, kind: str, lam: float = 0.0, clip: float = 0.0):
        if kind not in ("linear", "clipped", "zero"):
            raise ConfigError(f"unknown rho preset {kind!r}")
        if kind == "clipped" and clip <= 0:
            raise ConfigError("clipped rho requires clip > 0")
        self.kind = kind
        self.lam = float(lam)
        self.clip = float(clip)

    @classmethod
    def linear(cls, lam: float) -> "RhoSpec":
        return cls("linear", lam=lam)

    @classmethod
    def clipped(cls, lam: float, clip: float) -> "RhoSpec":
        return cls("clipped", lam=lam, clip=clip)

    @classmethod
    def zero(cls) -> "RhoSpec":
        return cls("zero")

    @property
    def lip_upper(self) -> float:
        return abs(self.lam) if self.kind != "zero" else 0.0

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or self.lam == 0.0

    def __call__(self, u: np.ndarray) -> np.ndarray:
        if self.kind == "linear":
            return self.lam * u
        if self.kind == "clipped":
            return self.lam * np.clip(u, -self.clip, self.clip)
        return np.zeros_like(u)

    def to_config(self) -> dict:
        cfg = {"kind": self.kind}
        if self.kind != "zero":
            cfg["lam"] = self.lam
        if self.kind == "clipped":
            cfg["clip"] = self.clip
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "RhoSpec":
        return cls(cfg["kind"], lam=cfg.get("lam", 0.0),
                   clip=cfg.get("clip", 0.0))


@dataclass(frozen=True)
class BoundedInitialData:
    """Bounded measurable initial function with a declared sup-norm bound."""

    f: Callable[[np.ndarray], np.ndarray]
    sup_bound: float

    def __post_init__(self):
        if not (np.isfinite(self.sup_bound) and self.sup_bound >= 0):
            raise ConfigError("BoundedInitialData requires a finite sup-norm "
                              "certificate")

    @classmethod
    def constant(cls, value: float) -> "BoundedInitialData":
        return cls(lambda x: np.full_like(np.asarray(x, dtype=float), value),
                   abs(value))

    @classmethod
    def indicator(cls, lo: float, hi: float) -> "BoundedInitialData":
        if not (lo < hi):
            raise ConfigError("indicator requires lo < hi")
        return cls(lambda x: ((np.asarray(x) >= lo)
                              & (np.asarray(x) <= hi)).astype(float), 1.0)


# ---------------------------------------------------------------------------
# SPDE engine
# ---------------------------------------------------------------------------

def _initial_field(grid: SpdeGrid, mu: InitialMeasure) -> np.ndarray:
    u = np.zeros(grid.n_nodes)
    for term in mu.primitive_terms():
        if isinstance(term, DiracAtoms):
            for loc, mass in term.atoms:
                u[grid.index_of(loc)] += mass / grid.dx
        elif isinstance(term, LebesgueScaled):
            u += term.scale
        elif isinstance(term, DensityMeasure):
            u += np.asarray(term.f(grid.nodes), dtype=float)
        else:
            raise ConfigError(f"measure {type(term).__name__} cannot be "
                              "discretised on a grid")
    if grid.boundary == "dirichlet0":
        u[0] = u[-1] = 0.0
    return u


def _run_spde_batch(grid: SpdeGrid, u0_field: np.ndarray, rho: RhoSpec,
                    nu: float, seed: int, lo: int, hi: int) -> np.ndarray:
    """Evolve paths [lo, hi) to t_final; returns fields (hi-lo, n_nodes)."""
    n_paths = hi - lo
    nx = grid.n_nodes
    n_steps = grid.n_time_steps
    r = nu * grid.dt / (2.0 * grid.dx ** 2)
    noise_scale = math.sqrt(grid.dt) / math.sqrt(grid.dx)
    dirichlet = grid.boundary == "dirichlet0"

    u = np.tile(u0_field, (n_paths, 1))
    gens = [path_generator(seed, DOMAIN_SPDE, i) for i in range(lo, hi)]
    chunk = max(1, 65536 // nx)

    lap = np.empty_like(u)
    step = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while step < n_steps:
            this_chunk = min(chunk, n_steps - step)
            if rho.is_zero:
                noise = None
            else:
                noise = np.stack([g.standard_normal((this_chunk, nx))
                                  for g in gens])
            for k in range(this_chunk):
                lap[:, 1:-1] = u[:, :-2] - 2.0 * u[:, 1:-1] + u[:, 2:]
                if dirichlet:
                    lap[:, 0] = lap[:, -1] = 0.0
                else:
                    lap[:, 0] = 2.0 * (u[:, 1] - u[:, 0])
                    lap[:, -1] = 2.0 * (u[:, -2] - u[:, -1])
                if noise is None:
                    u += r * lap
                else:
                    drift = r * lap
                    drift += rho(u) * (noise_scale * noise[:, k, :])
                    u += drift
                if dirichlet:
                    u[:, 0] = 0.0
                    u[:, -1] = 0.0
            step += this_chunk
    return u


def spde_solve_path(grid: SpdeGrid, mu: InitialMeasure, rho: RhoSpec,
                    nu: float, rng: np.random.Generator) -> np.ndarray:
    """One field sample at ``t_final`` on the grid nodes.

    Explicit Euler with space-time white noise discretised as iid normals
    scaled by ``sqrt(dt / dx)`` per cell.  Raises DivergenceError naming the
    step if the field leaves double precision (coarse grids with strong
    coupling can blow up; this is reported, never clipped).
    """
    if not (nu > 0):
        raise DomainError(f"spde_solve_path requires nu > 0, got {nu}")
    grid.check_cfl(nu)
    u = _initial_field(grid, mu)[None, :].copy()
    n_steps = grid.n_time_steps
    r = nu * grid.dt / (2.0 * grid.dx ** 2)
    noise_scale = math.sqrt(grid.dt) / math.sqrt(grid.dx)
    dirichlet = grid.boundary == "dirichlet0"
    lap = np.empty_like(u)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_steps):
            lap[:, 1:-1] = u[:, :-2] - 2.0 * u[:, 1:-1] + u[:, 2:]
            if dirichlet:
                lap[:, 0] = lap[:, -1] = 0.0
            else:
                lap[:, 0] = 2.0 * (u[:, 1] - u[:, 0])
                lap[:, -1] = 2.0 * (u[:, -2] - u[:, -1])
            if rho.is_zero:
                u += r * lap
            else:
                drift = r * lap
                drift += rho(u) * (noise_scale * rng.standard_normal(u.shape))
                u += drift
            if dirichlet:
                u[:, 0] = u[:, -1] = 0.0
            if not np.all(np.isfinite(u)):
                raise DivergenceError(
                    f"field diverged at step {k + 1} of {n_steps}",
                    n_divergent=1, n_total=1)
    return u[0]


def _estimate_from_values(values: np.ndarray, n_total: int) -> Estimate:
    finite = np.isfinite(values)
    n_div = int(n_total - finite.sum())
    if n_div > MAX_DIVERGENT_FRACTION * n_total:
        raise DivergenceError(
            f"{n_div} of {n_total} paths diverged "
            f"(> {MAX_DIVERGENT_FRACTION:.1%})",
            n_divergent=n_div, n_total=n_total)
    good = values[finite]
    n = good.size
    value = float(np.mean(good))
    std_error = float(np.std(good, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(value=value, std_error=std_error, n=n, n_divergent=n_div)


def _parallel_values(n_paths: int, batch_size: int, workers: int,
                     task: Callable[[int, int], np.ndarray]) -> np.ndarray:
    """Fill a path-indexed value array batch by batch; order-independent."""
    values = np.empty(n_paths)
    ranges = [(lo, min(lo + batch_size, n_paths))
              for lo in range(0, n_paths, batch_size)]
    if workers <= 1 or len(ranges) == 1:
        for lo, hi in ranges:
            values[lo:hi] = task(lo, hi)
        return values
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(task, lo, hi): (lo, hi) for lo, hi in ranges}
        for fut, (lo, hi) in futures.items():
            values[lo:hi] = fut.result()
    return values


def spde_estimate_two_point(q: TwoPointQuery, mu: InitialMeasure,
                            rho: RhoSpec, nu: float, grid: SpdeGrid,
                            mc: McConfig) -> Estimate:
    """Monte Carlo estimate of E[u(t,x1) u(t,x2)] by direct simulation.

    Observation points are read at the nearest grid node.  Paths whose field
    leaves double precision are counted as divergent and excluded; more than
    0.1% divergent rejects the whole estimate.
    """
    grid.check_cfl(nu)
    if abs(grid.t_final - q.t) > 1e-12 * max(1.0, q.t):
        raise ConfigError(f"grid.t_final={grid.t_final} != query t={q.t}")
    margin = 4.0 * math.sqrt(nu * q.t)
    if not (-grid.half_width + margin < q.x1 < grid.half_width - margin
            and -grid.half_width + margin < q.x2 < grid.half_width - margin):
        raise ConfigError("observation points must sit at least "
                          "4 sqrt(nu t) inside the domain")
    needed = 6.0 * math.sqrt(nu * q.t) + mu.support_extent()
    if grid.half_width < needed:
        raise ConfigError(f"domain half-width {grid.half_width:.4g} < "
                          f"required {needed:.4g} (boundary contamination)")

    u0_field = _initial_field(grid, mu)
    i1, i2 = grid.index_of(q.x1), grid.index_of(q.x2)

    def task(lo: int, hi: int) -> np.ndarray:
        fields = _run_spde_batch(grid, u0_field, rho, nu, mc.seed, lo, hi)
        with np.errstate(over="ignore", invalid="ignore"):
            return fields[:, i1] * fields[:, i2]

    values = _parallel_values(mc.n_paths, mc.batch_size, mc.workers, task)
    return _estimate_from_values(values, mc.n_paths)


# ---------------------------------------------------------------------------
# Feynman-Kac engines
# ---------------------------------------------------------------------------

def fk_two_point(q: TwoPointQuery, u0: BoundedInitialData, nu: float,
                 lam: float, mc: McConfig) -> Estimate:
    """Unbiased Feynman-Kac estimate of E[u(t,x1) u(t,x2)] for bounded
    function initial data, via exact joint (endpoint, local time) sampling.

    Each path consumes exactly five uniforms from its counter-based
    substream, so the estimate is reproducible across any partitioning.
    """
    if not (nu > 0):
        raise DomainError(f"fk_two_point requires nu > 0, got {nu}")
    law = JointLocalTimeLaw(t=2.0 * nu * q.t, a=q.x2 - q.x1)
    scale = math.sqrt(2.0 * nu * q.t)
    rate = lam * lam / (2.0 * nu)

    def task(lo: int, hi: int) -> np.ndarray:
        idx = np.arange(lo, hi, dtype=np.uint64)
        u = uniforms_at(mc.seed, DOMAIN_FK, idx, 5)
        y, v = law.sample_from_uniforms(u[:, :4])
        w2 = scale * special.ndtri(u[:, 4])
        vals = (np.asarray(u0.f(q.x1 + 0.5 * (w2 + y)), dtype=float)
                * np.asarray(u0.f(q.x2 + 0.5 * (w2 - y)), dtype=float))
        return vals * np.exp(rate * v)

    values = _parallel_values(mc.n_paths, mc.batch_size, mc.workers, task)
    return _estimate_from_values(values, mc.n_paths)


def fk_two_point_occupation(q: TwoPointQuery, u0: BoundedInitialData,
                            nu: float, lam: float, mc: McConfig,
                            eps: float, n_steps: int) -> Estimate:
    """Feynman-Kac estimate with a discretised interaction clock.

    The pair difference ``B1 - B2`` is simulated by Euler steps; the
    singular interaction is replaced by a Gaussian of variance ``eps`` and
    the occupation integral by a trapezoid sum.  Biased (bias -> 0 as
    ``eps`` and ``t / n_steps`` -> 0); serves as a third, independent check.
    """
    if not (eps > 0):
        raise ConfigError(f"eps must be > 0, got {eps}")
    if n_steps < 1:
        raise ConfigError(f"n_steps must be >= 1, got {n_steps}")
    a = q.x2 - q.x1
    dt_s = q.t / n_steps
    inc_scale = math.sqrt(2.0 * nu * dt_s)
    end_scale = math.sqrt(2.0 * nu * q.t)
    lam2 = lam * lam
    inv_norm = 1.0 / math.sqrt(2.0 * math.pi * eps)

    def task(lo: int, hi: int) -> np.ndarray:
        out = np.empty(hi - lo)
        for i in range(lo, hi):
            gen = path_generator(mc.seed, DOMAIN_FK_OCC, i)
            steps = gen.standard_normal(n_steps) * inc_scale
            d = np.empty(n_steps + 1)
            d[0] = 0.0
            np.cumsum(steps, out=d[1:])
            weights = inv_norm * np.exp(-(d - a) ** 2 / (2.0 * eps))
            occ = _trapezoid(weights, dx=dt_s)
            s_t = gen.standard_normal() * end_scale
            b1 = 0.5 * (s_t + d[-1])
            b2 = 0.5 * (s_t - d[-1])
            out[i - lo] = (float(u0.f(q.x1 + b1)) * float(u0.f(q.x2 + b2))
                           * math.exp(lam2 * occ))
        return out

    values = _parallel_values(mc.n_paths, mc.batch_size, mc.workers, task)
    return _estimate_from_values(values, mc.n_paths)
