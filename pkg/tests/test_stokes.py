"""Saddle-point solves and the Stokes Ritz projection."""
import dataclasses

import numpy as np
import pytest

from stokesbdf.assembly import ConfigurationError, assemble_load
from stokesbdf.fem import interpolate
from stokesbdf.march import build_discretization, divergence_residual
from stokesbdf.mms import paper_case
from stokesbdf.stokes import SaddleSolver, ritz_project, solve_steady


def constant_forcing(cx, cy):
    return lambda x, y, t: np.stack([np.full_like(x, cx), np.full_like(x, cy)], axis=-1)


@pytest.mark.parametrize("fixture", ["disc_p1_cip_8", "disc_th_8"])
def test_steady_gradient_forcing(fixture, request):
    """f = (1, 0) = grad x with zero boundary data gives u = 0, p = x - 1/2."""
    disc = request.getfixturevalue(fixture)
    ops = disc.ops
    load = assemble_load(ops, constant_forcing(1.0, 0.0), 0.0)
    u, p = solve_steady(ops, load, solver=disc.steady_solver())
    p_exact = interpolate(ops.Q, lambda x, y: x - 0.5)
    assert np.abs(u).max() < 1e-10
    assert np.abs(p - p_exact).max() < 1e-10
    assert abs(ops.mean_row @ p) < 1e-12


def test_steady_zero_data(disc_p1_cip_8):
    ops = disc_p1_cip_8.ops
    u, p = solve_steady(ops, np.zeros(ops.V.num_dofs), solver=disc_p1_cip_8.steady_solver())
    assert np.abs(u).max() < 1e-14
    assert np.abs(p).max() < 1e-13


def test_random_rhs_residual(disc_p1_cip_8):
    ops = disc_p1_cip_8.ops
    solver = disc_p1_cip_8.steady_solver()
    rng = np.random.default_rng(9)
    for _ in range(3):
        rhs = rng.standard_normal(ops.V.num_dofs)
        solver.solve(rhs)
        assert solver.last_residual() <= 1e-10


def test_singular_system_reported(disc_p1_cip_8):
    ops = dataclasses.replace(disc_p1_cip_8.ops, mean_row=np.zeros(disc_p1_cip_8.ops.Q.num_scalar_dofs))
    with pytest.raises(ConfigurationError):
        SaddleSolver(ops, ops.A)


def test_ritz_reproduces_discrete_steady_solution(disc_p1_cip_8):
    """Projecting an exactly representable steady pair returns it unchanged."""
    disc = disc_p1_cip_8
    ops = disc.ops
    u_fn = lambda x, y: np.stack([np.zeros_like(x), np.zeros_like(x)], axis=-1)
    grad_fn = lambda x, y: np.zeros(np.shape(x) + (2, 2))
    p_fn = lambda x, y: x - 0.5
    Su, Sp = ritz_project(ops, u_fn, grad_fn, p_fn, solver=disc.steady_solver())
    assert np.abs(Su).max() < 1e-11
    assert np.abs(Sp - interpolate(ops.Q, p_fn)).max() < 1e-10


def test_ritz_discrete_divergence_free(disc_p1_cip_8):
    disc = disc_p1_cip_8
    case = paper_case()
    u_fn, grad_fn = case.velocity_at(0.0)
    Su, Sp = ritz_project(disc.ops, u_fn, grad_fn, None, solver=disc.steady_solver())
    assert divergence_residual(disc.ops, Su, Sp) <= 1e-10


def test_ritz_stability_constant_bounded():
    """||S_u||_V^2 + |S_p|_jh^2 <= C (||u||_V^2 + ||p||_Q^2), C stable under refinement."""
    case = paper_case()
    u_fn, grad_fn = case.velocity_at(0.0)
    p_fn = case.pressure_at(0.0)
    consts = []
    for n in (8, 16, 32, 64):
        disc = build_discretization(n, 1)
        ops = disc.ops
        Su, Sp = ritz_project(ops, u_fn, grad_fn, p_fn)
        lhs = ops.norm_V(Su) ** 2 + ops.seminorm_jh(Sp) ** 2
        qu = ops.quad_u
        x, y = qu.phys[..., 0], qu.phys[..., 1]
        gu = grad_fn(x, y)
        u_V2 = ops.nu * np.einsum("cq,cqde->", qu.wdet, gu**2)
        p_Q2 = np.einsum("cq,cq->", qu.wdet, p_fn(x, y) ** 2) / ops.nu
        consts.append(lhs / (u_V2 + p_Q2))
    # bounded, no growth under h-halving
    assert max(consts) < 1.5
    assert consts[-1] <= 1.25 * consts[0]


def test_ritz_error_rates():
    """V-rate k, Q-rate >= k, and the improved H-rate k+1 at k = 1."""
    case = paper_case()
    u_fn, grad_fn = case.velocity_at(0.0)
    p_fn = case.pressure_at(0.0)
    errs_V, errs_H, errs_Q, hs = [], [], [], []
    for n in (8, 16, 32):
        disc = build_discretization(n, 1)
        ops = disc.ops
        Su, Sp = ritz_project(ops, u_fn, grad_fn, p_fn)
        qu, qq = ops.quad_u, ops.quad_q
        x, y = qu.phys[..., 0], qu.phys[..., 1]
        du = qu.field_values(Su) - case.u(x, y, 0.0)
        dg = qu.field_gradients(Su) - grad_fn(x, y)
        errs_H.append(np.sqrt(np.einsum("cq,cqd->", qu.wdet, du**2)))
        errs_V.append(np.sqrt(ops.nu * np.einsum("cq,cqde->", qu.wdet, dg**2)))
        xq, yq = qq.phys[..., 0], qq.phys[..., 1]
        dp = qq.field_values(Sp) - p_fn(xq, yq)
        dp = dp - np.einsum("cq,cq->", qq.wdet, dp)
        errs_Q.append(np.sqrt(np.einsum("cq,cq->", qq.wdet, dp**2) / ops.nu))
        hs.append(disc.mesh.h)
    slope = lambda errs: np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope(errs_V) == pytest.approx(1.0, abs=0.25)
    assert slope(errs_H) == pytest.approx(2.0, abs=0.25)
    assert slope(errs_Q) >= 0.75


def test_boundary_trace_respected(disc_p1_cip_8):
    disc = disc_p1_cip_8
    ops = disc.ops
    case = paper_case()
    u_fn, grad_fn = case.velocity_at(0.3)
    Su, _ = ritz_project(ops, u_fn, grad_fn, None, solver=disc.steady_solver())
    trace = interpolate(ops.V, u_fn)
    bdofs = ops.V.boundary_dofs
    assert np.allclose(Su[bdofs], trace[bdofs], atol=1e-14)
