"""Discrete norms, error norms, stability-theorem ratios and rate fits."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .march import MarchResult

__all__ = [
    "POINCARE_UNIT_SQUARE",
    "NormReport",
    "StabilityReport",
    "discrete_norm",
    "error_norms",
    "stability_ratios",
    "fit_rate",
]

#: Sharp Poincare constant of the unit square with full Dirichlet data:
#: the first Laplace eigenvalue is 2*pi^2, so ||v|| <= ||grad v|| / (pi sqrt 2).
POINCARE_UNIT_SQUARE = 1.0 / (np.pi * np.sqrt(2.0))


def discrete_norm(values: Sequence[float], tau: float, kind: str = "l2") -> float:
    """Time-discrete norm of per-step values: l2 -> sqrt(tau * sum v^2), linf -> max."""
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        raise ValueError("empty sequence")
    if kind == "l2":
        return float(np.sqrt(tau * np.sum(vals**2)))
    if kind == "linf":
        return float(np.abs(vals).max())
    raise ValueError(f"unknown norm kind {kind!r}")


@dataclass(frozen=True)
class NormReport:
    """Error and monitor norms of one run, accumulated over the computed steps."""

    err_linf_H: float     # max_n ||u(t_n) - u_h^n||_{L2}
    err_final_H: float    # the same at n = N
    err_l2_V: float       # sqrt(tau sum ||u - u_h||_V^2)
    err_l2_Q: float       # pressure error, nu^{-1/2} L2, mean-corrected
    seminorm_jh: float    # sqrt(tau sum |p_h^n|_{jh}^2), a stability monitor
    accel_l2_H: float     # sqrt(tau sum ||dbar_q u_h^n||_H^2)
    smallstep_p: float    # tau^{1/2} ||p(t_q) - p_h^q||_Q


def _spatial_errors(result: MarchResult, n: int) -> tuple[float, float, float]:
    """(H, V, Q) errors of step n by high-order quadrature against the exact fields."""
    ops = result.disc.ops
    case = result.config.case
    t = float(result.times[n])
    u_h = result.velocities[n]
    p_h = result.pressures[n]
    qu, qq = ops.quad_u, ops.quad_q
    x, y = qu.phys[..., 0], qu.phys[..., 1]

    ue = np.asarray(case.u(x, y, t), dtype=float)
    diff = qu.field_values(u_h) - ue
    err_H = np.sqrt(np.einsum("cq,cqd->", qu.wdet, diff**2))

    ge = np.asarray(case.grad_u(x, y, t), dtype=float)
    gdiff = qu.field_gradients(u_h) - ge
    err_V = np.sqrt(ops.nu * np.einsum("cq,cqde->", qu.wdet, gdiff**2))

    xq, yq = qq.phys[..., 0], qq.phys[..., 1]
    pe = np.asarray(case.p(xq, yq, t), dtype=float)
    pdiff = qq.field_values(p_h) - pe
    # compare mean-zero representatives
    pdiff = pdiff - np.einsum("cq,cq->", qq.wdet, pdiff)
    err_Q = np.sqrt(np.einsum("cq,cq->", qq.wdet, pdiff**2) / ops.nu)
    return float(err_H), float(err_V), float(err_Q)


def error_norms(result: MarchResult) -> NormReport:
    """Evaluate the reported norms of a completed run."""
    ops = result.disc.ops
    config = result.config
    tau, q = config.tau, config.scheme.q

    errs_H, errs_V, errs_Q, semis, accels = [], [], [], [], []
    d = config.scheme.delta_float
    for n, t, u, p in result.computed():
        eh, ev, eq = _spatial_errors(result, n)
        errs_H.append(eh)
        errs_V.append(ev)
        errs_Q.append(eq)
        semis.append(ops.seminorm_jh(p))
        dbar = sum(d[i] * result.velocities[n - i] for i in range(q + 1)) / tau
        accels.append(ops.norm_H(dbar))

    _, _, eq_first = _spatial_errors(result, q)
    return NormReport(
        err_linf_H=discrete_norm(errs_H, tau, "linf"),
        err_final_H=errs_H[-1],
        err_l2_V=discrete_norm(errs_V, tau, "l2"),
        err_l2_Q=discrete_norm(errs_Q, tau, "l2"),
        seminorm_jh=discrete_norm(semis, tau, "l2"),
        accel_l2_H=discrete_norm(accels, tau, "l2"),
        smallstep_p=float(np.sqrt(tau) * eq_first),
    )


@dataclass(frozen=True)
class StabilityReport:
    """Left- and right-hand sides of the three discrete stability estimates.

    ``velocity``: final H-norm plus l2(V) and l2(jh) monitors against the
    initial H-norms and the scaled forcing.  ``acceleration``: l2(H) of the
    discrete derivative plus final V/jh against initial V/jh and forcing.
    ``pressure``: l2(Q) of the pressure against the combined data terms.
    Ratios are LHS/RHS, 0 with ``zero_rhs`` set when the data vanishes;
    ``conditional`` marks reports lacking initial pressures (interpolation
    seeding), whose acceleration/pressure bounds are only conditionally valid.
    """

    lhs: dict
    rhs: dict
    ratio: dict
    c_P: float
    zero_rhs: dict
    conditional: bool


def stability_ratios(result: MarchResult, c_P: float = POINCARE_UNIT_SQUARE) -> StabilityReport:
    ops = result.disc.ops
    config = result.config
    tau, q, nu = config.tau, config.scheme.q, config.nu
    d = config.scheme.delta_float

    u_init = result.velocities[:q]
    p_init = result.pressures[:q]
    conditional = any(p is None for p in p_init)

    u_H2, u_V2, p_jh2, accel2 = [], [], [], []
    for n, t, u, p in result.computed():
        u_H2.append(ops.norm_H(u) ** 2)
        u_V2.append(ops.norm_V(u) ** 2)
        p_jh2.append(ops.seminorm_jh(p) ** 2)
        dbar = sum(d[i] * result.velocities[n - i] for i in range(q + 1)) / tau
        accel2.append(ops.norm_H(dbar) ** 2)
    uN = result.velocities[-1]
    pN = result.pressures[-1]
    pQ2 = [ops.norm_Q(p) ** 2 for _, _, _, p in result.computed()]

    f_l2_sq = tau * float(np.sum(result.f_norms**2))
    init_H2 = sum(ops.norm_H(u) ** 2 for u in u_init)
    init_V2 = sum(ops.norm_V(u) ** 2 for u in u_init)
    init_jh2 = sum(0.0 if p is None else ops.seminorm_jh(p) ** 2 for p in p_init)

    lhs = {
        "velocity": ops.norm_H(uN) ** 2 + tau * sum(u_V2) + tau * sum(p_jh2),
        "acceleration": tau * sum(accel2) + ops.norm_V(uN) ** 2 + ops.seminorm_jh(pN) ** 2,
        "pressure": tau * sum(pQ2),
    }
    rhs = {
        "velocity": init_H2 + (c_P**2 / nu) * f_l2_sq,
        "acceleration": init_V2 + init_jh2 + f_l2_sq,
        "pressure": init_H2
        + (c_P**2 / nu) * (init_V2 + init_jh2)
        + (c_P**2 / nu) * f_l2_sq,
    }
    ratio, zero = {}, {}
    for key in lhs:
        if rhs[key] <= 0.0:
            ratio[key] = 0.0
            zero[key] = True
        else:
            ratio[key] = lhs[key] / rhs[key]
            zero[key] = False
    return StabilityReport(
        lhs=lhs, rhs=rhs, ratio=ratio, c_P=c_P, zero_rhs=zero, conditional=conditional
    )


def fit_rate(xs: Sequence[float], errors: Sequence[float]) -> tuple[list[float], float]:
    """Convergence rates from (parameter, error) pairs.

    Returns the per-level slopes log(e_i/e_{i+1}) / log(x_i/x_{i+1}) and the
    global least-squares slope of log e against log x.
    """
    x = np.asarray(xs, dtype=float)
    e = np.asarray(errors, dtype=float)
    if len(x) < 2 or len(x) != len(e):
        raise ValueError("need at least two (parameter, error) pairs")
    if np.any(e <= 0) or np.any(x <= 0):
        raise ValueError("parameters and errors must be positive")
    pairwise = [
        float(np.log(e[i] / e[i + 1]) / np.log(x[i] / x[i + 1])) for i in range(len(x) - 1)
    ]
    slope = float(np.polyfit(np.log(x), np.log(e), 1)[0])
    return pairwise, slope
