"""Manufactured solutions with closed-form forcing f = du/dt - nu*lap(u) + grad(p).

Two cases: a trigonometric field with a stiff time profile for convergence
studies, and a space-exact case (affine in space, polynomial in time) that
any P_k pair represents without spatial error, isolating the temporal order.
All callables are vectorized over coordinate arrays with a trailing
component axis for vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import cos, sin
from typing import Callable

import numpy as np

__all__ = ["ManufacturedCase", "paper_case", "space_exact_case", "case_by_name"]


@dataclass(frozen=True)
class ManufacturedCase:
    """Exact velocity/pressure fields with the analytic derivatives needed
    by the solver: time derivative, Laplacian, gradients and forcing."""

    name: str
    u: Callable      # u(x, y, t) -> (..., 2)
    grad_u: Callable  # (..., 2, 2), [component, derivative]
    dt_u: Callable   # (..., 2)
    lap_u: Callable  # (..., 2)
    p: Callable      # p(x, y, t) -> (...)
    grad_p: Callable  # (..., 2)
    nu: float = 1.0

    def forcing(self, x, y, t):
        return self.dt_u(x, y, t) - self.nu * self.lap_u(x, y, t) + self.grad_p(x, y, t)

    def velocity_at(self, t: float):
        """Freeze time: (u, grad_u) callables of (x, y) for projections."""
        return (lambda x, y: self.u(x, y, t)), (lambda x, y: self.grad_u(x, y, t))

    def pressure_at(self, t: float):
        return lambda x, y: self.p(x, y, t)


def paper_case(nu: float = 1.0, steady_g: bool = False) -> ManufacturedCase:
    """Trigonometric divergence-free field on the unit square.

    u = g(t) (sin(pi x - 0.7) sin(pi y + 0.2), cos(pi x - 0.7) cos(pi y + 0.2)),
    p = g(t) (sin(x) cos(y) + (cos 1 - 1) sin 1), with the time profile
    g(t) = 1 + 5t + exp(-10t) + sin(t); ``steady_g`` selects g = 1 for the
    small time-step experiments.
    """
    # mean of sin(x)cos(y) on the unit square is (1 - cos 1) sin 1
    p_shift = (cos(1.0) - 1.0) * sin(1.0)

    if steady_g:
        g = lambda t: np.ones_like(np.asarray(t, dtype=float))
        dg = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    else:
        g = lambda t: 1.0 + 5.0 * t + np.exp(-10.0 * t) + np.sin(t)
        dg = lambda t: 5.0 - 10.0 * np.exp(-10.0 * t) + np.cos(t)

    def base(x, y):
        sx, cx = np.sin(np.pi * x - 0.7), np.cos(np.pi * x - 0.7)
        sy, cy = np.sin(np.pi * y + 0.2), np.cos(np.pi * y + 0.2)
        return sx, cx, sy, cy

    def u(x, y, t):
        sx, cx, sy, cy = base(x, y)
        return np.stack([g(t) * sx * sy, g(t) * cx * cy], axis=-1)

    def grad_u(x, y, t):
        sx, cx, sy, cy = base(x, y)
        row0 = np.stack([np.pi * cx * sy, np.pi * sx * cy], axis=-1)
        row1 = np.stack([-np.pi * sx * cy, -np.pi * cx * sy], axis=-1)
        return float(g(t)) * np.stack([row0, row1], axis=-2)

    def dt_u(x, y, t):
        sx, cx, sy, cy = base(x, y)
        return np.stack([dg(t) * sx * sy, dg(t) * cx * cy], axis=-1)

    def lap_u(x, y, t):
        # each component is a product of two pi-frequency factors
        return -2.0 * np.pi**2 * u(x, y, t)

    def p(x, y, t):
        return g(t) * (np.sin(x) * np.cos(y) + p_shift)

    def grad_p(x, y, t):
        gt = g(t)
        return np.stack([gt * np.cos(x) * np.cos(y), -gt * np.sin(x) * np.sin(y)], axis=-1)

    name = "paper-steady-g1" if steady_g else "paper"
    return ManufacturedCase(
        name=name, u=u, grad_u=grad_u, dt_u=dt_u, lap_u=lap_u, p=p, grad_p=grad_p, nu=nu
    )


def space_exact_case(m: int, nu: float = 1.0) -> ManufacturedCase:
    """Rotation field u = t^m (y, -x) with pressure p = t^m (x + y - 1).

    Affine in space, hence represented exactly by every P_k pair (k >= 1)
    and invisible to gradient-jump or gradient stabilization; the only
    discretization error left is temporal.  The forcing is
    m t^{m-1} (y, -x) + t^m (1, 1).
    """
    # m = 7 pairs the six-step scheme with its leading-defect exponent
    if not 0 <= m <= 7:
        raise ValueError(f"time exponent must be in 0..7, got {m}")

    def tm(t, power):
        t = np.asarray(t, dtype=float)
        if power < 0:
            return np.zeros_like(t)
        return t**power

    def u(x, y, t):
        s = tm(t, m)
        return np.stack([s * y, -s * x], axis=-1)

    def grad_u(x, y, t):
        s = tm(t, m) * np.ones_like(x)
        z = np.zeros_like(x)
        row0 = np.stack([z, s], axis=-1)
        row1 = np.stack([-s, z], axis=-1)
        return np.stack([row0, row1], axis=-2)

    def dt_u(x, y, t):
        s = m * tm(t, m - 1)
        return np.stack([s * y, -s * x], axis=-1)

    def lap_u(x, y, t):
        z = np.zeros_like(x * np.asarray(t, dtype=float))
        return np.stack([z, z], axis=-1)

    def p(x, y, t):
        return tm(t, m) * (x + y - 1.0)

    def grad_p(x, y, t):
        s = tm(t, m) * np.ones_like(x)
        return np.stack([s, s], axis=-1)

    return ManufacturedCase(
        name=f"space-exact:{m}", u=u, grad_u=grad_u, dt_u=dt_u, lap_u=lap_u,
        p=p, grad_p=grad_p, nu=nu,
    )


def case_by_name(name: str, nu: float = 1.0) -> ManufacturedCase:
    """Resolve a case selector: ``paper``, ``paper-steady-g1``, ``space-exact:<m>``."""
    if name == "paper":
        return paper_case(nu=nu)
    if name == "paper-steady-g1":
        return paper_case(nu=nu, steady_g=True)
    if name.startswith("space-exact:"):
        return space_exact_case(int(name.split(":", 1)[1]), nu=nu)
    raise ValueError(f"unknown manufactured case {name!r}")
