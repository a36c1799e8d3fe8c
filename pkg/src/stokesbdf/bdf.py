"""Backward differentiation formulae and their G-stability machinery.

Provides exact rational BDF coefficients for orders 1 to 6, the
Nevanlinna-Odeh multipliers that make the schemes amenable to energy
arguments, a sampled positivity check on the unit circle, and the
construction of the symmetric positive-definite G-matrix via
Fejer-Riesz spectral factorization and quadratic-form coefficient
matching.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "BdfScheme",
    "GMatrix",
    "PositivityReport",
    "NoMultiplierError",
    "ETA_MULTIPLIER",
    "BDF6_MULTIPLIER",
    "make_scheme",
    "multiplier_positivity",
    "critical_eta",
    "build_g_matrix",
    "g_norm",
]


class NoMultiplierError(RuntimeError):
    """Raised when the requested multiplier admits no valid factorization."""


#: Scalar multipliers eta_q with 0 <= eta < 1 such that
#: Re[delta(z) * conj(1 - eta*z)] >= 0 on the unit circle.  The values
#: commonly tabulated in the literature (0.0836, 0.2878, 0.8097) are not all
#: admissible: the sampled minimum is -1.3e-5 for eta_4 = 0.2878 and -1.4e-2
#: for eta_5 = 0.8097, because the true positivity thresholds are
#: 0.0835922, 0.2878066 and 0.8159802 (see ``critical_eta``).  We therefore
#: round the thresholds up at the fourth decimal.
ETA_MULTIPLIER = {1: 0.0, 2: 0.0, 3: 0.0836, 4: 0.2879, 5: 0.8160}

#: Relaxed multiplier vector for the six-step method: no scalar
#: Nevanlinna-Odeh multiplier exists for q = 6, but this vector satisfies
#: the relaxed positivity condition 1 - sum_i eta_i cos(i*x) > 0 on [0, pi].
BDF6_MULTIPLIER = (
    float(Fraction(13, 9)),
    float(Fraction(-25, 36)),
    float(Fraction(1, 9)),
    0.0,
    0.0,
    0.0,
)


@dataclass(frozen=True)
class BdfScheme:
    """A q-step BDF scheme: delta coefficients plus multiplier vector.

    ``delta`` holds the exact rational coefficients delta_0..delta_q of the
    generating polynomial sum_{l=1..q} (1/l)(1-z)^l; the discrete derivative
    at step n is (1/tau) * sum_i delta_i u^{n-i}.  ``eta`` has length 1 for
    q <= 5 (scalar multiplier) and length 6 for the relaxed q = 6 multiplier.
    """

    q: int
    delta: tuple[Fraction, ...]
    eta: tuple[float, ...]

    def __post_init__(self):
        if sum(self.delta) != 0:
            raise ValueError("delta coefficients must sum to zero")
        if sum(i * d for i, d in enumerate(self.delta)) != -1:
            raise ValueError("first-order condition sum i*delta_i = -1 violated")
        if self.delta[0] <= 0:
            raise ValueError("leading coefficient delta_0 must be positive")
        if len(self.eta) == 1 and not 0.0 <= self.eta[0] < 1.0:
            raise ValueError("scalar multiplier must satisfy 0 <= eta < 1")

    @property
    def delta_float(self) -> np.ndarray:
        return np.array([float(d) for d in self.delta])

    def with_scalar_eta(self, eta: float) -> "BdfScheme":
        """Same delta coefficients with a custom scalar multiplier."""
        return BdfScheme(self.q, self.delta, (eta,))


@dataclass(frozen=True)
class GMatrix:
    """Certified G-stability data for a BDF scheme.

    ``g`` is the symmetric positive-definite q x q matrix and ``gamma`` the
    length-(q+1) factorization coefficients appearing in the quadratic-form
    identity that telescopes the discrete derivative against the multiplied
    test sequence.  Index 1 of ``g`` pairs with the newest entry of a
    solution window, the convention used by the G-norm.
    """

    q: int
    g: np.ndarray
    gamma: np.ndarray

    @property
    def eig_range(self) -> tuple[float, float]:
        ev = np.linalg.eigvalsh(self.g)
        return float(ev[0]), float(ev[-1])


@dataclass(frozen=True)
class PositivityReport:
    """Sampled minimum of the multiplier positivity function."""

    q: int
    min_value: float
    location: float
    relaxed: bool


def make_scheme(q: int) -> BdfScheme:
    """Build the q-step BDF scheme, 1 <= q <= 6, in exact rational arithmetic."""
    if not isinstance(q, int) or not 1 <= q <= 6:
        raise ValueError(f"BDF order must be an integer in 1..6, got {q!r}")
    delta = [Fraction(0)] * (q + 1)
    for l in range(1, q + 1):
        for i in range(l + 1):
            delta[i] += Fraction(1, l) * Fraction((-1) ** i * comb(l, i))
    eta = BDF6_MULTIPLIER if q == 6 else (ETA_MULTIPLIER[q],)
    return BdfScheme(q, tuple(delta), tuple(eta))


def _positivity_samples(scheme: BdfScheme, samples: int) -> tuple[np.ndarray, np.ndarray]:
    """Return (abscissae, values) of the positivity function on its domain."""
    if len(scheme.eta) == 1:
        theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
        z = np.exp(1j * theta)
        dz = np.polyval(scheme.delta_float[::-1], z)
        mu = 1.0 - scheme.eta[0] * z
        return theta, np.real(dz * np.conj(mu))
    # relaxed condition for the vector multiplier
    x = np.linspace(0.0, np.pi, samples)
    vals = np.ones_like(x)
    for i, eta_i in enumerate(scheme.eta, start=1):
        if eta_i != 0.0:
            vals -= eta_i * np.cos(i * x)
    return x, vals


def multiplier_positivity(scheme: BdfScheme, samples: int = 100_000) -> PositivityReport:
    """Sampled minimum certifying the multiplier positivity condition.

    For a scalar multiplier this is min over theta in [0, 2*pi) of
    Re[delta(e^{i theta}) * conj(1 - eta e^{i theta})]; a forced zero sits at
    theta = 0 because delta(1) = 0.  For the length-6 relaxed multiplier it
    is min over [0, pi] of 1 - sum_i eta_i cos(i*x).
    """
    if samples < 1000:
        raise ValueError("at least 1000 samples required")
    x, vals = _positivity_samples(scheme, samples)
    i = int(np.argmin(vals))
    return PositivityReport(
        q=scheme.q,
        min_value=float(vals[i]),
        location=float(x[i]),
        relaxed=len(scheme.eta) > 1,
    )


def critical_eta(q: int, tol: float = 1e-9) -> float:
    """Smallest scalar eta for which the positivity minimum is >= 0 (bisection)."""
    scheme = make_scheme(q)
    lo, hi = 0.0, 1.0 - 1e-9
    if multiplier_positivity(scheme.with_scalar_eta(lo), 100_000).min_value >= -1e-12:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        rep = multiplier_positivity(scheme.with_scalar_eta(mid), 100_000)
        if rep.min_value >= -1e-12:
            hi = mid
        else:
            lo = mid
    return hi


def _deflate_unit_root_pairs(coeffs: np.ndarray) -> tuple[np.ndarray, int]:
    """Divide out (z - 1)^{2m}, the exact even-multiplicity root at z = 1.

    ``coeffs`` are in increasing powers.  The zero of delta at z = 1 forces
    an even-order zero of the spectral polynomial there; deflating it before
    numerical root finding avoids the O(sqrt(eps)) accuracy loss of repeated
    roots.
    """
    scale = np.abs(coeffs).max()
    mult = 0
    cur = coeffs.copy()
    while len(cur) > 1 and abs(cur.sum()) <= 1e-9 * scale:
        desc = cur[::-1]
        out = np.empty(len(desc) - 1)
        acc = 0.0
        for i in range(len(out)):
            acc += desc[i]
            out[i] = acc
        cur = out[::-1]
        mult += 1
    if mult % 2 != 0:
        raise NoMultiplierError("boundary zero at z = 1 has odd multiplicity")
    return cur, mult


def build_g_matrix(scheme: BdfScheme) -> GMatrix:
    """Construct and certify the G-matrix of a scheme with scalar multiplier.

    Steps: (1) form the trigonometric polynomial
    E(theta) = Re[delta(z) conj(mu(z))], z = e^{i theta}, which is
    nonnegative when the multiplier is admissible; (2) Fejer-Riesz factorize
    E = |gamma(z)|^2 from the roots of the associated Laurent polynomial,
    keeping roots in the closed unit disk; (3) with gamma fixed, match the
    coefficients of the scalar quadratic-form identity, which is linear in
    the entries of G, and solve in least squares; (4) certify the residual
    and positive definiteness.
    """
    q = scheme.q
    if len(scheme.eta) != 1:
        raise NoMultiplierError("G-matrix construction requires a scalar multiplier (q <= 5)")
    rep = multiplier_positivity(scheme, 100_000)
    if rep.min_value < -1e-12:
        raise NoMultiplierError(
            f"positivity minimum {rep.min_value:.3e} at theta={rep.location:.4f}; "
            "no Fejer-Riesz factorization exists"
        )
    dd = scheme.delta_float
    mu = np.zeros(q + 1)
    mu[0] = 1.0
    mu[1] = -scheme.eta[0]

    # P(z) = z^q * (delta(z) mu(1/z) + delta(1/z) mu(z)) / 2, degree 2q,
    # whose unit-circle values are E(theta).
    P = 0.5 * (np.convolve(dd, mu[::-1]) + np.convolve(dd[::-1], mu))
    Pt, mult = _deflate_unit_root_pairs(P)

    residual_roots = np.roots(Pt[::-1]) if len(Pt) > 1 else np.array([])
    selected = residual_roots[np.abs(residual_roots) <= 1.0 + 1e-9]
    n_expected = q - mult // 2
    if len(selected) != n_expected:
        # near-critical multipliers can push mirror pairs onto the circle;
        # fall back to taking the smallest-modulus roots
        order = np.argsort(np.abs(residual_roots))
        selected = residual_roots[order[:n_expected]]
    selected = np.concatenate([selected, np.ones(mult // 2)])

    gamma_monic = np.real(np.polynomial.polynomial.polyfromroots(selected))

    # scale so |gamma|^2 matches E; anchor at the maximizer of E
    theta, E = _positivity_samples(scheme, 8192)
    gvals = np.polynomial.polynomial.polyval(np.exp(1j * theta), gamma_monic)
    j = int(np.argmax(E))
    s2 = E[j] / np.abs(gvals[j]) ** 2

    # quadratic-form coefficient matching: unknowns g_ab, 1 <= a <= b <= q
    d_rev = dd[::-1]
    m_rev = mu[::-1]
    lam = 0.5 * (np.outer(d_rev, m_rev) + np.outer(m_rev, d_rev))
    target = lam - s2 * np.outer(gamma_monic, gamma_monic)

    index = {}
    for a in range(1, q + 1):
        for b in range(a, q + 1):
            index[(a, b)] = len(index)
    rows, rhs = [], []
    for a in range(q + 1):
        for b in range(a, q + 1):
            row = np.zeros(len(index))
            if a >= 1:
                row[index[(a, b)]] += 1.0
            if b <= q - 1:
                row[index[(a + 1, b + 1)]] -= 1.0
            rows.append(row)
            rhs.append(target[a, b])
    A = np.array(rows)
    b = np.array(rhs)
    sol = np.linalg.solve(A.T @ A, A.T @ b)

    G = np.zeros((q, q))
    for (a, bb), i in index.items():
        G[a - 1, bb - 1] = sol[i]
        G[bb - 1, a - 1] = sol[i]

    # certification
    R = np.zeros((q + 1, q + 1))
    R[1:, 1:] += G
    R[:-1, :-1] -= G
    resid = float(np.abs(target - R).max())
    if resid > 1e-10:
        raise NoMultiplierError(f"coefficient-matching residual {resid:.3e} exceeds 1e-10")
    ev = np.linalg.eigvalsh(G)
    if ev[0] <= 0:
        raise NoMultiplierError(f"G-matrix is not positive definite (min eigenvalue {ev[0]:.3e})")
    # the matching pairs index 1 with the oldest sequence entry; store in the
    # window convention of the G-norm, index 1 = newest
    return GMatrix(q=q, g=G[::-1, ::-1].copy(), gamma=np.sqrt(s2) * gamma_monic)


def identity_residual(scheme: BdfScheme, gmat: GMatrix, v: Sequence[float]) -> float:
    """Residual of the telescoping quadratic-form identity on one scalar sequence.

    ``v`` holds v_0..v_q, oldest first; the identity equates the
    multiplied-derivative product with the difference of G-norms of the
    newest and previous windows plus the gamma square.
    """
    q = scheme.q
    x = np.asarray(v, dtype=float)
    if x.shape != (q + 1,):
        raise ValueError(f"sequence must have length {q + 1}")
    dd = scheme.delta_float
    mu = np.zeros(q + 1)
    mu[0] = 1.0
    mu[1] = -scheme.eta[0]
    lhs = (dd[::-1] @ x) * (mu[::-1] @ x)
    w_new = x[1:][::-1]  # newest first, matching the G-norm window order
    w_old = x[:-1][::-1]
    rhs = w_new @ gmat.g @ w_new - w_old @ gmat.g @ w_old + (gmat.gamma @ x) ** 2
    return float(abs(lhs - rhs))


def g_norm(
    gmat: GMatrix,
    window: Sequence[np.ndarray],
    inner: Callable[[np.ndarray, np.ndarray], float],
) -> float:
    """Squared G-norm of a window [v^n, v^{n-1}, ..., v^{n-q+1}].

    Returns sum_{i,j} g_ij * inner(v^{n-i+1}, v^{n-j+1}); nonnegative for any
    semi-inner product, and bounded between the extreme eigenvalues of G
    times the sum of squared semi-norms.
    """
    q = gmat.q
    if len(window) != q:
        raise ValueError(f"window must hold {q} vectors")
    dim = np.shape(window[0])
    for w in window:
        if np.shape(w) != dim:
            raise ValueError("window vectors must share one dimension")
    inners = np.empty((q, q))
    for i in range(q):
        inners[i, i] = inner(window[i], window[i])
        for j in range(i + 1, q):
            val = inner(window[i], window[j])
            inners[i, j] = val
            inners[j, i] = val
    return float(np.sum(gmat.g * inners))
