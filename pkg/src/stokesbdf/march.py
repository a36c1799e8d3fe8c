"""Fully discrete BDF time marching for the transient Stokes system.

Each step solves the saddle-point system with velocity block
(delta_0 / tau) M + A and history right-hand side
(f^n, v) - (1/tau) sum_{i>=1} delta_i M u^{n-i}; boundary values come from
the exact trace of the manufactured solution.  The system matrix is
time-independent, so one factorization serves the whole march.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import StokesOperators, apply_dirichlet, assemble_load, assemble_operators, load_norm
from .bdf import BdfScheme
from .fem import FeSpace, interpolate, make_space
from .mesh import Mesh, unit_square_mesh
from .mms import ManufacturedCase
from .stokes import SaddleSolver, ritz_project

__all__ = [
    "Discretization",
    "MarchConfig",
    "SolutionHistory",
    "MarchResult",
    "build_discretization",
    "initialize",
    "step",
    "run",
    "divergence_residual",
    "momentum_residual",
]


@dataclass
class Discretization:
    mesh: Mesh
    V: FeSpace
    Q: FeSpace
    ops: StokesOperators
    _steady: SaddleSolver | None = field(default=None, repr=False, compare=False)

    def steady_solver(self) -> SaddleSolver:
        """Factorization with velocity block A, shared across runs."""
        if self._steady is None:
            self._steady = SaddleSolver(self.ops, self.ops.A)
        return self._steady


def build_discretization(
    n: int,
    k: int,
    nu: float = 1.0,
    stab: str = "cip",
    gamma: float | None = None,
    high_order: bool = False,
) -> Discretization:
    """Equal-order pair of degree k for stabilized runs; Taylor-Hood
    (k, k-1) when stab='none'."""
    mesh = unit_square_mesh(n)
    V = make_space(mesh, k, components=2, high_order=high_order)
    kp = k if stab != "none" else k - 1
    Q = make_space(mesh, kp, components=1, high_order=high_order)
    ops = assemble_operators(V, Q, nu=nu, stab=stab, gamma=gamma)
    return Discretization(mesh=mesh, V=V, Q=Q, ops=ops)


@dataclass(frozen=True)
class MarchConfig:
    """One time-marching run: scheme, step size, horizon, data and spaces."""

    scheme: BdfScheme
    tau: float
    T: float
    case: ManufacturedCase
    n: int
    k: int
    nu: float = 1.0
    stab: str = "cip"
    gamma: float | None = None
    init: str = "ritz"
    high_order: bool = False

    def __post_init__(self):
        if self.init not in ("ritz", "interp"):
            raise ValueError(f"init must be 'ritz' or 'interp', got {self.init!r}")
        if self.tau <= 0 or self.T <= 0:
            raise ValueError("tau and T must be positive")
        N = self.T / self.tau
        if abs(N - round(N)) > 1e-9 * max(1.0, N):
            raise ValueError(f"T/tau = {N} is not an integer")
        if self.scheme.q * self.tau > self.T * (1 + 1e-12):
            raise ValueError("horizon too short: need q*tau <= T")

    @property
    def num_steps(self) -> int:
        return round(self.T / self.tau)


@dataclass
class SolutionHistory:
    """Ring buffer of the last q coefficient pairs, newest first.

    ``pressures[i]`` may be None for interpolation-seeded starting values,
    where no discrete pressure exists yet.
    """

    q: int
    tau: float
    velocities: list[np.ndarray]
    pressures: list[np.ndarray | None]
    n: int  # time index of the newest entry

    def push(self, u: np.ndarray, p: np.ndarray | None):
        self.velocities.insert(0, u)
        self.pressures.insert(0, p)
        del self.velocities[self.q :]
        del self.pressures[self.q :]
        self.n += 1

    def discrete_derivative(self, scheme: BdfScheme) -> np.ndarray:
        """(1/tau) sum_i delta_i u^{n-i} over the stored window plus newest."""
        d = scheme.delta_float
        if len(self.velocities) < scheme.q + 1:
            raise ValueError("history too short for the discrete derivative")
        acc = d[0] * self.velocities[0]
        for i in range(1, scheme.q + 1):
            acc = acc + d[i] * self.velocities[i]
        return acc / self.tau


@dataclass
class MarchResult:
    config: MarchConfig
    disc: Discretization
    times: np.ndarray                 # t_0 .. t_N
    velocities: list[np.ndarray]      # all indices 0..N
    pressures: list[np.ndarray | None]
    f_norms: np.ndarray               # ||f^n||_H for n = q..N
    step_indices: np.ndarray          # q..N

    @property
    def q(self) -> int:
        return self.config.scheme.q

    def computed(self):
        """(n, t_n, u, p) for the computed steps n = q..N."""
        for n in self.step_indices:
            yield int(n), float(self.times[n]), self.velocities[n], self.pressures[n]


def initialize(config: MarchConfig, disc: Discretization, solver: SaddleSolver | None = None):
    """Seed the q starting values at t_0..t_{q-1}.

    ``ritz`` projects (u(t_i), 0), producing discretely divergence-free
    pairs; ``interp`` stores the nodal interpolant with no pressure.
    """
    case = config.case
    ops = disc.ops
    vels, press = [], []
    for i in range(config.scheme.q):
        t = i * config.tau
        if config.init == "ritz":
            u_fn, grad_fn = case.velocity_at(t)
            u, p = ritz_project(ops, u_fn, grad_fn, None, solver=solver)
        else:
            u = interpolate(disc.V, lambda x, y: case.u(x, y, t))
            p = None
        vels.append(u)
        press.append(p)
    history = SolutionHistory(
        q=config.scheme.q,
        tau=config.tau,
        velocities=list(reversed(vels)),
        pressures=list(reversed(press)),
        n=config.scheme.q - 1,
    )
    return history, vels, press


def step(
    history: SolutionHistory,
    ops: StokesOperators,
    solver: SaddleSolver,
    scheme: BdfScheme,
    load: np.ndarray,
    boundary_values: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Advance one BDF step given the assembled load at t_n."""
    if len(history.velocities) < scheme.q:
        raise ValueError("history not fully seeded")
    d = scheme.delta_float
    rhs = load.copy()
    for i in range(1, scheme.q + 1):
        rhs -= (d[i] / history.tau) * (ops.M @ history.velocities[i - 1])
    u, p = solver.solve(rhs, boundary_values=boundary_values)
    history.push(u, p)
    return u, p


def run(
    config: MarchConfig,
    disc: Discretization | None = None,
    on_step: Callable | None = None,
) -> MarchResult:
    """Initialize, march to T and collect the trajectory.

    ``on_step(n, t, u, p)`` streams each computed step when given.
    """
    if disc is None:
        disc = build_discretization(
            config.n, config.k, nu=config.nu, stab=config.stab,
            gamma=config.gamma, high_order=config.high_order,
        )
    ops = disc.ops
    scheme = config.scheme
    q, tau = scheme.q, config.tau
    N = config.num_steps

    K = (scheme.delta_float[0] / tau) * ops.M + ops.A
    solver = SaddleSolver(ops, K)
    ritz_solver = disc.steady_solver() if config.init == "ritz" else None
    history, vels, press = initialize(config, disc, solver=ritz_solver)

    times = np.arange(N + 1) * tau
    f_norms = []
    for n in range(q, N + 1):
        t = times[n]
        load = assemble_load(ops, config.case.forcing, t)
        bc = apply_dirichlet(ops, config.case.u, t)
        u, p = step(history, ops, solver, scheme, load, bc.values)
        vels.append(u)
        press.append(p)
        f_norms.append(load_norm(ops, config.case.forcing, t))
        if on_step is not None:
            on_step(n, float(t), u, p)

    return MarchResult(
        config=config,
        disc=disc,
        times=times,
        velocities=vels,
        pressures=press,
        f_norms=np.array(f_norms),
        step_indices=np.arange(q, N + 1),
    )


def divergence_residual(
    ops: StokesOperators, u: np.ndarray, p: np.ndarray | None = None
) -> float:
    """Max-norm residual of the incompressibility constraint on the
    mean-zero pressure test space.

    The pressure test space excludes constants, so the component of the
    residual along the mean-value functional (the net boundary flux,
    handled by the multiplier) is projected out before taking the norm.
    With ``p`` = None the best discrete pressure is fitted first, measuring
    whether ``u`` is discretely divergence-free at all.
    """
    r = ops.B.T @ u
    if p is not None:
        r = r - ops.J @ p
    else:
        fit = spla.lsqr(ops.J, r, atol=1e-14, btol=1e-14, iter_lim=10_000)
        r = r - ops.J @ fit[0]
    m = ops.mean_row
    r = r - m * (m @ r) / (m @ m)
    return float(np.abs(r).max())


def momentum_residual(result: MarchResult, n: int) -> float:
    """Re-insertion check: the stored history around step n must satisfy the
    momentum equation on interior dofs to solver precision."""
    config, ops = result.config, result.disc.ops
    scheme, tau = config.scheme, config.tau
    if not scheme.q <= n <= config.num_steps:
        raise ValueError(f"step {n} outside computed range")
    d = scheme.delta_float
    dbar = sum(d[i] * result.velocities[n - i] for i in range(scheme.q + 1)) / tau
    load = assemble_load(ops, config.case.forcing, result.times[n])
    r = ops.M @ dbar + ops.A @ result.velocities[n] + ops.B @ result.pressures[n] - load
    return float(np.abs(r[ops.interior_dofs()]).max())
