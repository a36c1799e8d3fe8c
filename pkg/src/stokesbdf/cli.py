"""Batch experiment driver emitting machine-readable CSV.

Experiments: temporal and spatial convergence sweeps, the small time-step
pressure study, stability-ratio sweeps and the multiplier check.  Rows are
written in deterministic parameter order with 17 significant digits, so
identical configurations produce byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bdf import NoMultiplierError, build_g_matrix, make_scheme, multiplier_positivity
from .diagnostics import error_norms, fit_rate, stability_ratios
from .march import MarchConfig, build_discretization, run
from .mms import case_by_name

__all__ = ["ExperimentConfig", "run_experiment", "main"]

CSV_HEADER = (
    "experiment,case,q,k,n,h,tau,nu,stab,gamma,init,"
    "err_linf_H,err_l2_V,err_l2_Q,seminorm_jh,accel_l2_H,smallstep_p,"
    "ratio_thm41,ratio_thm42,ratio_thm43"
)

EXPERIMENTS = ("converge-time", "converge-space", "small-step", "stability", "multiplier-check")


@dataclass
class ExperimentConfig:
    experiment: str
    q: int = 3
    k: int = 1
    n: list[int] = field(default_factory=lambda: [16])
    tau: list[float] = field(default_factory=lambda: [0.1])
    T: float = 1.0
    nu: float = 1.0
    stab: str = "cip"
    gamma: float | None = None
    init: str = "ritz"
    case: str = "paper"
    out: str | None = None
    samples: int = 100_000

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment: must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if not 1 <= self.q <= 6:
            raise ValueError(f"q: BDF order must be in 1..6, got {self.q}")
        if not 1 <= self.k <= 6:
            raise ValueError(f"k: polynomial degree must be in 1..6, got {self.k}")
        if self.init not in ("ritz", "interp"):
            raise ValueError(f"init: must be 'ritz' or 'interp', got {self.init!r}")
        if self.stab not in ("cip", "bp", "none"):
            raise ValueError(f"stab: must be cip, bp or none, got {self.stab!r}")
        if self.experiment in ("converge-time", "converge-space"):
            seq = self.tau if self.experiment == "converge-time" else self.n
            name = "tau" if self.experiment == "converge-time" else "n"
            if len(seq) >= 2:
                ratios = [seq[i] / seq[i + 1] for i in range(len(seq) - 1)]
                target = 2.0 if name == "tau" else 0.5
                if any(abs(r - target) > 1e-9 for r in ratios):
                    raise ValueError(f"{name}: sweep values must form a geometric ratio-2 list")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _row(config: ExperimentConfig, n: int, tau: float, norms=None, ratios=None) -> str:
    h = np.sqrt(2.0) / n
    cells = [
        config.experiment, config.case, config.q, config.k, n, h, tau,
        config.nu, config.stab,
        config.gamma if config.gamma is not None else "",
        config.init,
    ]
    if norms is None:
        cells += [""] * 6
    else:
        cells += [
            norms.err_linf_H, norms.err_l2_V, norms.err_l2_Q,
            norms.seminorm_jh, norms.accel_l2_H, norms.smallstep_p,
        ]
    if ratios is None:
        cells += [""] * 3
    else:
        cells += [ratios.ratio["velocity"], ratios.ratio["acceleration"], ratios.ratio["pressure"]]
    return ",".join(_fmt(c) for c in cells)


def _worker_count() -> int:
    env = os.environ.get("STOKES_BDF_THREADS")
    if env:
        return max(1, int(env))
    return 1


def _march_point(config: ExperimentConfig, n: int, tau: float, disc, init: str):
    cfg = MarchConfig(
        scheme=make_scheme(config.q),
        tau=tau,
        T=config.T,
        case=case_by_name(config.case, nu=config.nu),
        n=n,
        k=config.k,
        nu=config.nu,
        stab=config.stab,
        gamma=config.gamma,
        init=init,
        high_order=config.k > 3,
    )
    result = run(cfg, disc=disc)
    return error_norms(result), stability_ratios(result)


def _sweep(config: ExperimentConfig, points, log):
    """Run (n, tau, init) points concurrently, preserving parameter order."""
    discs = {}
    for n, _, _ in points:
        if n not in discs:
            discs[n] = build_discretization(
                n, config.k, nu=config.nu, stab=config.stab,
                gamma=config.gamma, high_order=config.k > 3,
            )
    workers = _worker_count()
    if workers == 1:
        results = [_march_point(config, n, tau, discs[n], init) for n, tau, init in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_march_point, config, n, tau, discs[n], init)
                for n, tau, init in points
            ]
            results = [f.result() for f in futures]
    rows = []
    for (n, tau, init), (norms, ratios) in zip(points, results):
        row_cfg = ExperimentConfig(**{**config.__dict__, "init": init})
        rows.append(_row(row_cfg, n, tau, norms, ratios))
    return rows, results


def run_experiment(config: ExperimentConfig, log=print) -> int:
    """Execute one experiment; returns the process exit code."""
    config.validate()

    if config.experiment == "multiplier-check":
        scheme = make_scheme(config.q)
        rep = multiplier_positivity(scheme, config.samples)
        eta_str = (
            f"{scheme.eta[0]:.4f}" if len(scheme.eta) == 1
            else "(" + ", ".join(f"{e:.6g}" for e in scheme.eta) + ")"
        )
        try:
            gmat = build_g_matrix(scheme)
            lo, hi = gmat.eig_range
            eig_str = f"[{lo:.6g}, {hi:.6g}]"
        except NoMultiplierError as exc:
            eig_str = f"unavailable ({exc})"
        line = (
            f"q={config.q} eta={eta_str} min={rep.min_value:.6e} "
            f"at={'x' if rep.relaxed else 'theta'}={rep.location:.6f} G-eigs={eig_str}"
        )
        log(line)
        if config.out:
            with open(config.out, "w") as fh:
                fh.write(line + "\n")
        return 0

    if config.experiment == "converge-time":
        points = [(config.n[0], tau, config.init) for tau in config.tau]
        xcol = [tau for _, tau, _ in points]
    elif config.experiment == "converge-space":
        points = [(n, config.tau[0], config.init) for n in config.n]
        xcol = [np.sqrt(2.0) / n for n, _, _ in points]
    elif config.experiment == "small-step":
        points = [(config.n[0], tau, init) for init in ("ritz", "interp") for tau in config.tau]
        xcol = None
    else:  # stability
        points = [(config.n[0], tau, config.init) for tau in config.tau]
        xcol = None

    try:
        rows, results = _sweep(config, points, log)
    except Exception as exc:
        log(f"solver failure: {exc}")
        return 1

    if config.out:
        with open(config.out, "w", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in rows:
                fh.write(row + "\n")
        log(f"wrote {config.out}")

    if xcol is not None and len(xcol) >= 2:
        for label, pick in (
            ("err_linf_H", lambda r: r[0].err_linf_H),
            ("err_l2_V", lambda r: r[0].err_l2_V),
            ("err_l2_Q", lambda r: r[0].err_l2_Q),
        ):
            errs = [pick(r) for r in results]
            if all(e > 0 for e in errs):
                _, slope = fit_rate(xcol, errs)
                log(f"{label}: slope {slope:.3f}")
    elif config.experiment == "stability":
        for (n, tau, _), (_, ratios) in zip(points, results):
            flags = " conditional" if ratios.conditional else ""
            log(
                f"tau={tau:g}: ratios velocity={ratios.ratio['velocity']:.4g} "
                f"acceleration={ratios.ratio['acceleration']:.4g} "
                f"pressure={ratios.ratio['pressure']:.4g}{flags}"
            )
    elif config.experiment == "small-step":
        for (n, tau, init), (norms, _) in zip(points, results):
            log(f"init={init} tau={tau:g}: smallstep_p={norms.smallstep_p:.6e}")
    return 0


def _parse_args(argv):
    ap = argparse.ArgumentParser(
        prog="stokes-bdf",
        description="Transient Stokes BDF experiment driver",
    )
    ap.add_argument("--experiment", required=False, default=None, choices=EXPERIMENTS)
    ap.add_argument("--q", type=int, default=None, help="BDF order (1..6)")
    ap.add_argument("--k", type=int, default=None, help="polynomial degree")
    ap.add_argument("--n", type=str, default=None, help="mesh subdivisions, comma-separated list")
    ap.add_argument("--tau", type=str, default=None, help="time steps, comma-separated list")
    ap.add_argument("--T", type=float, default=None, help="final time")
    ap.add_argument("--nu", type=float, default=None, help="viscosity (default 1)")
    ap.add_argument("--stab", default=None, choices=("cip", "bp", "none"))
    ap.add_argument("--gamma", type=float, default=None, help="stabilization weight")
    ap.add_argument("--init", default=None, choices=("ritz", "interp"))
    ap.add_argument("--case", default=None, help="paper | paper-steady-g1 | space-exact:<m>")
    ap.add_argument("--out", default=None, help="output CSV path")
    ap.add_argument("--samples", type=int, default=None, help="positivity samples")
    ap.add_argument("--config", default=None, help="JSON config file (flags override)")
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(sys.argv[1:] if argv is None else argv)
    data = {}
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    for key in ("experiment", "q", "k", "T", "nu", "stab", "gamma", "init", "case", "out", "samples"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.n is not None:
        data["n"] = [int(v) for v in str(args.n).split(",")]
    if args.tau is not None:
        data["tau"] = [float(v) for v in str(args.tau).split(",")]
    if isinstance(data.get("n"), (int, float)):
        data["n"] = [int(data["n"])]
    if isinstance(data.get("tau"), (int, float)):
        data["tau"] = [float(data["tau"])]
    if "experiment" not in data:
        print("error: --experiment is required (flag or config file)", file=sys.stderr)
        return 2
    try:
        config = ExperimentConfig(**data)
        return run_experiment(config)
    except (ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
