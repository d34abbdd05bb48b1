"""Command-line surface: kernel tables, two-point evaluation, verification
suites, Monte Carlo runs, and local-time tables, all with reproducible
manifests.

Conventions:

* grids are ``start:stop:count`` with inclusive endpoints (or a single
  number), so table shapes are deterministic;
* CSV output is RFC-4180 (CRLF rows); JSON output has sorted keys;
* every stochastic output embeds a manifest (command, full config echo,
  seed, library version, timestamp); rerunning from the manifest
  reproduces the value fields bit-exactly;
* exit codes: 0 ok, 1 verification failure, 2 usage/config, 3 domain,
  4 inadmissible measure, 5 divergence.

Which number came from which route is always explicit (``--method``,
``--engine``); nothing falls back silently.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import (ConfigError, DivergenceError, DomainError,
                     InadmissibleMeasureError, KernelOverflowError, PoleError,
                     QuadratureError)
from .kernels import (KernelParams, TwoPointQuery, covariance_kernel,
                      mgf_local_time, second_moment_kernel,
                      second_moment_time_factor, two_point_delta,
                      two_point_kernel, two_point_lebesgue,
                      two_point_time_factor)
from .local_time import JointLocalTimeLaw
from .measures import (DiracAtoms, LebesgueScaled, parse_measure, two_point)
from .simulate import (BoundedInitialData, McConfig, RhoSpec, SpdeGrid,
                       fk_two_point, fk_two_point_occupation,
                       spde_estimate_two_point)
from .verify import SUITE_NAMES, run_suite

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_MEASURE = 4
EXIT_DIVERGENCE = 5

REL_DIFF_GATE = 1e-6


def _parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive) or a single float."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ConfigError(f"grid count must be >= 1, got {count}")
        return np.linspace(start, stop, count)
    return np.array([float(text)])


def _write_csv(rows: list[dict], path: str | None) -> None:
    if not rows:
        return
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    data = buf.getvalue()
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)


def _write_json(obj, path: str | None) -> None:
    data = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)


def _manifest(command: str, config_echo: dict, seed: int | None) -> dict:
    return {
        "command": command,
        "config_echo": config_echo,
        "seed": seed,
        "library_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


# ---------------------------------------------------------------------------
# kernel
# ---------------------------------------------------------------------------

def _cmd_kernel(args) -> int:
    params = KernelParams(nu=args.nu, lam=args.lam)
    t = args.t
    rows: list[dict] = []
    base = {"t": t, "nu": args.nu, "lambda": args.lam}
    if args.which == "H":
        rows.append(dict(base, value=second_moment_time_factor(t, params)))
    elif args.which in ("K", "Htilde"):
        fn = (second_moment_kernel if args.which == "K"
              else two_point_time_factor)
        for x in _parse_grid(args.x):
            rows.append(dict(base, x=float(x),
                             value=float(fn(t, float(x), params))))
    else:
        kern = covariance_kernel if args.which == "Kdagger" else two_point_kernel
        for z1 in _parse_grid(args.z1):
            for z2 in _parse_grid(args.z2):
                for y in _parse_grid(args.y):
                    rows.append(dict(base, z1=float(z1), z2=float(z2),
                                     y=float(y),
                                     value=float(kern(t, float(z1), float(z2),
                                                      float(y), params))))
    _write_csv(rows, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# two-point / second-moment
# ---------------------------------------------------------------------------

def _closed_two_point(q: TwoPointQuery, mu, params: KernelParams) -> float:
    """Closed/specialised evaluation: exact formulas for Lebesgue, exact
    kernel sums for atoms, split-form quadrature otherwise."""
    if isinstance(mu, LebesgueScaled):
        return mu.scale ** 2 * two_point_lebesgue(q, params)
    if isinstance(mu, DiracAtoms) and mu.atoms == ((0.0, 1.0),):
        return float(two_point_delta(q, params))
    return two_point(q, mu, params, formula="split")


def _two_point_rows(q: TwoPointQuery, mu, params: KernelParams,
                    method: str, base: dict) -> tuple[list[dict], int]:
    code = EXIT_OK
    row = dict(base, method=method)
    if method == "closed":
        row["value"] = _closed_two_point(q, mu, params)
    elif method == "quadrature":
        row["value"] = two_point(q, mu, params, formula="direct")
    else:
        closed = _closed_two_point(q, mu, params)
        quad = two_point(q, mu, params, formula="direct")
        rel = abs(closed - quad) / max(abs(closed), abs(quad), 1e-300)
        row.update(value=closed, value_quadrature=quad, rel_diff=rel)
        if rel > REL_DIFF_GATE:
            code = EXIT_VERIFY_FAIL
    return [row], code


def _load_measure(path: str):
    with open(path) as fh:
        return parse_measure(json.load(fh))


def _cmd_two_point(args) -> int:
    mu = _load_measure(args.measure)
    params = KernelParams(nu=args.nu, lam=args.lam)
    q = TwoPointQuery(t=args.t, x1=args.x1, x2=args.x2)
    base = {"t": args.t, "x1": args.x1, "x2": args.x2,
            "nu": args.nu, "lambda": args.lam}
    rows, code = _two_point_rows(q, mu, params, args.method, base)
    _write_csv(rows, args.out)
    return code


def _cmd_second_moment(args) -> int:
    mu = _load_measure(args.measure)
    params = KernelParams(nu=args.nu, lam=args.lam)
    q = TwoPointQuery(t=args.t, x1=args.x, x2=args.x)
    base = {"t": args.t, "x": args.x, "nu": args.nu, "lambda": args.lam}
    rows, code = _two_point_rows(q, mu, params, args.method, base)
    _write_csv(rows, args.out)
    return code


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _cmd_verify(args) -> int:
    checks = run_suite(args.suite)
    all_pass = all(c["status"] == "pass" for c in checks)
    report = {"suite": args.suite, "library_version": __version__,
              "all_pass": all_pass, "checks": checks}
    _write_json(report, args.out)
    return EXIT_OK if all_pass else EXIT_VERIFY_FAIL


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _u0_from_config(cfg: dict) -> BoundedInitialData:
    kind = cfg.get("kind")
    if kind == "constant":
        return BoundedInitialData.constant(float(cfg["value"]))
    if kind == "indicator":
        return BoundedInitialData.indicator(float(cfg["lo"]), float(cfg["hi"]))
    raise ConfigError(f"unknown u0 kind {kind!r}")


def _oracle_value(engine: str, config: dict) -> float:
    t = float(config["t"])
    x1, x2 = float(config.get("x1", 0.0)), float(config.get("x2", 0.0))
    nu = float(config.get("nu", 1.0))
    lam = float(config.get("lambda", 0.0))
    q = TwoPointQuery(t=t, x1=x1, x2=x2)
    params = KernelParams(nu=nu, lam=lam)
    if engine == "spde":
        rho = RhoSpec.from_config(config["rho"])
        if rho.kind != "linear":
            raise ConfigError("--oracle requires a linear rho preset")
        mu = parse_measure(config["measure"])
        if not isinstance(mu, (DiracAtoms, LebesgueScaled)):
            raise ConfigError("--oracle requires an atoms or lebesgue measure")
        return two_point(q, mu, KernelParams(nu=nu, lam=rho.lam),
                         formula="split")
    u0 = config.get("u0", {})
    if u0.get("kind") != "constant":
        raise ConfigError("--oracle for fk engines requires constant u0")
    c = float(u0["value"])
    return c * c * two_point_lebesgue(q, params)


def _run_engine(engine: str, config: dict, mc: McConfig):
    t = float(config["t"])
    x1, x2 = float(config.get("x1", 0.0)), float(config.get("x2", 0.0))
    nu = float(config.get("nu", 1.0))
    lam = float(config.get("lambda", 0.0))
    q = TwoPointQuery(t=t, x1=x1, x2=x2)
    if engine == "spde":
        gcfg = config["grid"]
        grid = SpdeGrid(L=float(gcfg["L"]), dx=float(gcfg["dx"]),
                        dt=float(gcfg["dt"]), t_final=t,
                        boundary=gcfg.get("boundary", "neumann0"))
        mu = parse_measure(config["measure"])
        rho = RhoSpec.from_config(config["rho"])
        return spde_estimate_two_point(q, mu, rho, nu, grid, mc)
    u0 = _u0_from_config(config.get("u0", {"kind": "constant", "value": 1.0}))
    if engine == "fk":
        return fk_two_point(q, u0, nu, lam, mc)
    if engine == "fk-occupation":
        return fk_two_point_occupation(q, u0, nu, lam, mc,
                                       eps=float(config["eps"]),
                                       n_steps=int(config["n_steps"]))
    raise ConfigError(f"unknown engine {engine!r}")


def _cmd_simulate(args) -> int:
    if args.from_manifest:
        with open(args.from_manifest) as fh:
            previous = json.load(fh)
        manifest = previous["manifest"]
        engine = manifest["config_echo"]["engine"]
        config = manifest["config_echo"]["config"]
        seed = manifest["seed"]
    else:
        if not args.config:
            raise ConfigError("either --config or --from-manifest is required")
        with open(args.config) as fh:
            config = json.load(fh)
        engine = args.engine
        seed = args.seed
    mc_cfg = dict(config.get("mc", {}))
    if seed is not None:
        mc_cfg["seed"] = seed
    if args.paths is not None:
        mc_cfg["n_paths"] = args.paths
    if args.workers is not None:
        mc_cfg["workers"] = args.workers
    elif "workers" not in mc_cfg:
        mc_cfg["workers"] = int(os.environ.get("SHE_MOMENTS_WORKERS", "1"))
    mc = McConfig(n_paths=int(mc_cfg.get("n_paths", 10000)),
                  seed=int(mc_cfg.get("seed", 0)),
                  batch_size=int(mc_cfg.get("batch_size", 256)),
                  workers=int(mc_cfg.get("workers", 1)))

    estimate = _run_engine(engine, config, mc)

    echo = {"engine": engine, "config": config,
            "mc": {"n_paths": mc.n_paths, "seed": mc.seed,
                   "batch_size": mc.batch_size, "workers": mc.workers}}
    out = {
        "value": estimate.value,
        "std_error": estimate.std_error,
        "n": estimate.n,
        "divergent_paths": estimate.n_divergent,
        "config_echo": echo,
        "manifest": _manifest("simulate", echo, mc.seed),
    }
    if args.oracle:
        oracle = _oracle_value(engine, config)
        diff = estimate.value - oracle
        if estimate.std_error > 0:
            z = diff / estimate.std_error
        else:
            z = 0.0 if diff == 0 else math.inf
        out["oracle"] = {"value": oracle, "z_score": z}
    _write_json(out, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# local-time
# ---------------------------------------------------------------------------

def _cmd_local_time(args) -> int:
    if args.lt_command == "mgf":
        value = mgf_local_time(args.t, args.a, args.lam)
        _write_csv([{"t": args.t, "a": args.a, "lambda": args.lam,
                     "value": value}], args.out)
        return EXIT_OK
    law = JointLocalTimeLaw(t=args.t, a=args.a)
    if args.lt_command == "density":
        rows = []
        for y in _parse_grid(args.y):
            for v in _parse_grid(args.v):
                if v <= 0:
                    raise DomainError("density grid requires v > 0; the atom "
                                      "profile is reported separately via "
                                      "column v=0 requests")
                rows.append({"y": float(y), "v": float(v),
                             "f": law.density_cont(float(y), float(v))})
        _write_csv(rows, args.out)
        return EXIT_OK
    if args.lt_command == "sample":
        if args.n < 1:
            raise ConfigError(f"sample requires --n >= 1, got {args.n}")
        rng = np.random.default_rng(args.seed)
        y, v = law.sample(rng, size=args.n)
        rows = [{"y": float(yi), "v": float(vi)} for yi, vi in zip(y, v)]
        _write_csv(rows, args.out)
        return EXIT_OK
    raise ConfigError(f"unknown local-time subcommand {args.lt_command!r}")


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="she-moments",
        description="Moment kernels of the multiplicative stochastic heat "
                    "equation, the Brownian local-time law, and Monte Carlo "
                    "cross-verifiers.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="tabulate a closed-form kernel")
    k.add_argument("--which", required=True,
                   choices=["K", "Kdagger", "Kstar", "H", "Htilde"])
    k.add_argument("--t", type=float, required=True)
    k.add_argument("--nu", type=float, default=1.0)
    k.add_argument("--lambda", dest="lam", type=float, default=1.0)
    k.add_argument("--x", default="0")
    k.add_argument("--z1", default="0")
    k.add_argument("--z2", default="0")
    k.add_argument("--y", default="0")
    k.add_argument("--out")
    k.set_defaults(func=_cmd_kernel)

    tp = sub.add_parser("two-point", help="two-point correlation for a "
                                          "measure file")
    tp.add_argument("--measure", required=True)
    tp.add_argument("--t", type=float, required=True)
    tp.add_argument("--x1", type=float, required=True)
    tp.add_argument("--x2", type=float, required=True)
    tp.add_argument("--nu", type=float, default=1.0)
    tp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    tp.add_argument("--method", choices=["closed", "quadrature", "both"],
                    default="closed")
    tp.add_argument("--out")
    tp.set_defaults(func=_cmd_two_point)

    smp = sub.add_parser("second-moment", help="second moment for a "
                                               "measure file")
    smp.add_argument("--measure", required=True)
    smp.add_argument("--t", type=float, required=True)
    smp.add_argument("--x", type=float, required=True)
    smp.add_argument("--nu", type=float, default=1.0)
    smp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    smp.add_argument("--method", choices=["closed", "quadrature", "both"],
                     default="closed")
    smp.add_argument("--out")
    smp.set_defaults(func=_cmd_second_moment)

    v = sub.add_parser("verify", help="run a deterministic verification suite")
    v.add_argument("--suite", required=True, choices=list(SUITE_NAMES))
    v.add_argument("--out")
    v.set_defaults(func=_cmd_verify)

    s = sub.add_parser("simulate", help="run a Monte Carlo engine")
    s.add_argument("--engine", choices=["spde", "fk", "fk-occupation"],
                   default="fk")
    s.add_argument("--config")
    s.add_argument("--from-manifest")
    s.add_argument("--seed", type=int)
    s.add_argument("--paths", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--oracle", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_simulate)

    lt = sub.add_parser("local-time", help="joint local-time law tables")
    lt_sub = lt.add_subparsers(dest="lt_command", required=True)
    ltd = lt_sub.add_parser("density")
    ltd.add_argument("--t", type=float, required=True)
    ltd.add_argument("--a", type=float, required=True)
    ltd.add_argument("--y", default="-2:2:9")
    ltd.add_argument("--v", default="0.1:2:5")
    ltd.add_argument("--out")
    lts = lt_sub.add_parser("sample")
    lts.add_argument("--t", type=float, required=True)
    lts.add_argument("--a", type=float, required=True)
    lts.add_argument("--n", type=int, required=True)
    lts.add_argument("--seed", type=int, default=0)
    lts.add_argument("--out")
    ltm = lt_sub.add_parser("mgf")
    ltm.add_argument("--t", type=float, required=True)
    ltm.add_argument("--a", type=float, required=True)
    ltm.add_argument("--lambda", dest="lam", type=float, required=True)
    ltm.add_argument("--out")
    lt.set_defaults(func=_cmd_local_time)

    return parser


_VALUE_FLAGS = {"--x", "--z1", "--z2", "--y", "--v", "--x1", "--x2", "--a",
                "--t", "--lambda", "--nu"}
_GRID_CHARS = set("0123456789.:eE+-")


def _normalise_argv(argv: list[str]) -> list[str]:
    """Join flag/value pairs whose value starts with '-' (e.g. --x -2:2:5),
    which argparse would otherwise read as an option."""
    out: list[str] = []
    skip = False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (tok in _VALUE_FLAGS and nxt is not None and nxt.startswith("-")
                and set(nxt) <= _GRID_CHARS and any(c.isdigit() for c in nxt)):
            out.append(f"{tok}={nxt}")
            skip = True
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_normalise_argv(list(argv)))
    try:
        return args.func(args)
    except InadmissibleMeasureError as exc:
        print(f"inadmissible measure: {exc}", file=sys.stderr)
        return EXIT_MEASURE
    except (ConfigError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, PoleError, KernelOverflowError,
            QuadratureError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
