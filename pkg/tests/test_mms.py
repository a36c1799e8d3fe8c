"""Manufactured cases: analytic consistency via finite-difference oracles."""
from math import cos, sin

import numpy as np
import pytest

from stokesbdf.fem import interpolate, triangle_quadrature
from stokesbdf.mms import case_by_name, paper_case, space_exact_case
from stokesbdf.stokes import ritz_project

CASES = [paper_case(), paper_case(steady_g=True), space_exact_case(3), space_exact_case(0)]


def fd_time(fn, x, y, t, h=1e-5):
    return (fn(x, y, t + h) - fn(x, y, t - h)) / (2 * h)


def fd_grad(fn, x, y, t, h=1e-6):
    dx = (fn(x + h, y, t) - fn(x - h, y, t)) / (2 * h)
    dy = (fn(x, y + h, t) - fn(x, y - h, t)) / (2 * h)
    return dx, dy


def fd_lap(fn, x, y, t, h=1e-4):
    return (
        fn(x + h, y, t) + fn(x - h, y, t) + fn(x, y + h, t) + fn(x, y - h, t)
        - 4 * fn(x, y, t)
    ) / h**2


@pytest.mark.parametrize("case", CASES, ids=lambda c: c.name)
def test_derivative_fields_match_finite_differences(case):
    rng = np.random.default_rng(12)
    pts = rng.random((30, 2)) * 0.8 + 0.1
    ts = rng.random(30) * 0.9 + 0.05
    for (x, y), t in zip(pts, ts):
        assert np.allclose(case.dt_u(x, y, t), fd_time(case.u, x, y, t), atol=1e-6)
        assert np.allclose(case.lap_u(x, y, t), fd_lap(case.u, x, y, t), atol=1e-5)
        dx, dy = fd_grad(case.p, x, y, t)
        assert np.allclose(case.grad_p(x, y, t), np.stack([dx, dy]), atol=1e-8)
        gdx, gdy = fd_grad(case.u, x, y, t)
        assert np.allclose(case.grad_u(x, y, t), np.stack([gdx, gdy], axis=-1), atol=1e-8)


@pytest.mark.parametrize("case", CASES, ids=lambda c: c.name)
def test_forcing_is_exact_combination(case):
    rng = np.random.default_rng(13)
    x, y = rng.random(100), rng.random(100)
    t = 0.42
    f = case.forcing(x, y, t)
    combo = case.dt_u(x, y, t) - case.nu * case.lap_u(x, y, t) + case.grad_p(x, y, t)
    assert np.abs(f - combo).max() <= 1e-12


@pytest.mark.parametrize("case", CASES, ids=lambda c: c.name)
def test_divergence_free(case):
    rng = np.random.default_rng(14)
    x, y = rng.random(100), rng.random(100)
    for t in (0.0, 0.37, 1.0):
        g = case.grad_u(x, y, t)
        assert np.abs(g[..., 0, 0] + g[..., 1, 1]).max() <= 1e-14


@pytest.mark.parametrize("case", CASES, ids=lambda c: c.name)
def test_pressure_mean_zero(case):
    rule = triangle_quadrature(12)
    mesh_n = 8
    # quadrature over the structured mesh of the unit square
    from stokesbdf.mesh import unit_square_mesh
    from stokesbdf.fem import make_space
    from stokesbdf.assembly import cell_quadrature

    space = make_space(unit_square_mesh(mesh_n), 1)
    quad = cell_quadrature(space, 12)
    x, y = quad.phys[..., 0], quad.phys[..., 1]
    for t in (0.0, 0.5, 1.0):
        mean = np.einsum("cq,cq->", quad.wdet, case.p(x, y, t))
        assert abs(mean) <= 1e-10


def test_paper_time_profile():
    case = paper_case()
    assert case.u(0.25, 0.25, 0.0)[0] / sin(np.pi * 0.25 - 0.7) / sin(np.pi * 0.25 + 0.2) == (
        pytest.approx(2.0, rel=1e-14)
    )  # g(0) = 1 + 0 + 1 + 0
    steady = paper_case(steady_g=True)
    v0 = steady.u(0.3, 0.7, 0.0)
    v1 = steady.u(0.3, 0.7, 0.9)
    assert np.allclose(v0, v1, atol=1e-15)
    assert np.abs(steady.dt_u(0.3, 0.7, 0.5)).max() == 0.0


def test_pressure_shift_constant():
    """The additive constant is minus the mean of sin(x)cos(y) on the square."""
    from stokesbdf.assembly import cell_quadrature
    from stokesbdf.fem import make_space
    from stokesbdf.mesh import unit_square_mesh

    space = make_space(unit_square_mesh(8), 1)
    quad = cell_quadrature(space, 12)
    x, y = quad.phys[..., 0], quad.phys[..., 1]
    integral = np.einsum("cq,cq->", quad.wdet, np.sin(x) * np.cos(y))
    assert integral == pytest.approx((1 - cos(1)) * sin(1), abs=1e-12)


def test_space_exact_forcing_formula():
    case = space_exact_case(3)
    rng = np.random.default_rng(15)
    x, y = rng.random(50), rng.random(50)
    t = 0.8
    f = case.forcing(x, y, t)
    expect = np.stack([3 * t**2 * y + t**3, -3 * t**2 * x + t**3], axis=-1)
    assert np.abs(f - expect).max() <= 1e-13


def test_space_exact_m0_steady():
    case = space_exact_case(0)
    assert np.abs(case.dt_u(0.3, 0.4, 0.7)).max() == 0.0
    f = case.forcing(np.array(0.3), np.array(0.4), 0.0)
    assert np.allclose(f, [1.0, 1.0], atol=1e-15)


def test_space_exact_ritz_reproduces_interpolant(disc_p1_cip_8):
    """No spatial error: the projection equals the nodal interpolant."""
    disc = disc_p1_cip_8
    case = space_exact_case(2)
    t = 0.6
    u_fn, grad_fn = case.velocity_at(t)
    Su, Sp = ritz_project(disc.ops, u_fn, grad_fn, case.pressure_at(t), solver=disc.steady_solver())
    assert np.abs(Su - interpolate(disc.V, u_fn)).max() <= 1e-10
    assert np.abs(Sp - interpolate(disc.Q, case.pressure_at(t))).max() <= 1e-10


def test_case_by_name():
    assert case_by_name("paper").name == "paper"
    assert case_by_name("paper-steady-g1").name == "paper-steady-g1"
    assert case_by_name("space-exact:4").name == "space-exact:4"
    with pytest.raises(ValueError):
        case_by_name("unknown")
    with pytest.raises(ValueError):
        space_exact_case(8)
