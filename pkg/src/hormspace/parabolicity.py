"""Petrovskii parabolicity and boundary covering checks for principal symbols.

Symbols are constant-coefficient principal parts stored as maps from
(multi-index alpha, time order beta) to complex coefficients, with the
homogeneity |alpha| + 2 b beta fixed (2m for the interior symbol, m_j for
a boundary symbol).  Both pointwise conditions are open conditions on a
compact normalized set, so they are certified by quasi-random sampling of
that set plus a local polish of the worst candidates, with an explicit
margin threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    CoveringPreconditionError,
    DegenerateFrameError,
    StructuralSymbolError,
)

__all__ = [
    "PrincipalSymbol",
    "BoundarySymbol",
    "BoundaryFrame",
    "PetrovskiiVerdict",
    "CoveringVerdict",
    "symbol_eval",
    "petrovskii_check",
    "zeta_polynomial",
    "root_split",
    "plus_polynomial",
    "covering_check",
    "sigma0",
    "random_frames",
]

_NEAR_REAL_REL = 1e-9
_CLUSTER_REL = 1e-7
_DELTA_MIN = 1e-9
_COVER_TOL = 1e-8


def _norm_coeffs(coeffs, n: int, b: int, degree: int, what: str):
    out = {}
    for key, val in coeffs.items():
        alpha, beta = key
        alpha = tuple(int(a) for a in alpha)
        beta = int(beta)
        if len(alpha) != n or any(a < 0 for a in alpha) or beta < 0:
            raise StructuralSymbolError(f"{what}: bad index {key}")
        if sum(alpha) + 2 * b * beta != degree:
            raise StructuralSymbolError(
                f"{what}: index {key} has |alpha| + 2b beta = "
                f"{sum(alpha) + 2 * b * beta}, expected {degree}"
            )
        c = complex(val)
        if c != 0:
            out[(alpha, beta)] = c
    return out


@dataclass(frozen=True)
class PrincipalSymbol:
    """Principal part of an interior operator: sum over |alpha| + 2b beta = 2m."""

    n: int
    b: int
    m: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("spatial dimension must be >= 1")
        if not (self.m >= self.b >= 1):
            raise ValueError("need m >= b >= 1")
        if self.m % self.b != 0:
            raise ValueError("m/b must be an integer")
        object.__setattr__(
            self, "coeffs", _norm_coeffs(self.coeffs, self.n, self.b, 2 * self.m, "A")
        )

    @property
    def kappa(self) -> int:
        return self.m // self.b

    def validate_structure(self) -> None:
        """The coefficient of p**kappa at alpha = 0 must be nonzero."""
        key = ((0,) * self.n, self.kappa)
        if key not in self.coeffs or self.coeffs[key] == 0:
            raise StructuralSymbolError(
                "coefficient of p**kappa at alpha = 0 vanishes; the symbol "
                "cannot satisfy the parabolicity condition at xi = 0, p = 1"
            )


@dataclass(frozen=True)
class BoundarySymbol:
    """Principal part of a boundary operator of order m_j."""

    n: int
    b: int
    m_j: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.m_j < 0:
            raise ValueError("boundary order must be >= 0")
        object.__setattr__(
            self, "coeffs", _norm_coeffs(self.coeffs, self.n, self.b, self.m_j, "B")
        )


@dataclass(frozen=True)
class BoundaryFrame:
    """Inward normal nu, tangential frequency xi_tan _|_ nu, and Re p >= 0."""

    nu: np.ndarray
    xi_tan: np.ndarray
    p: complex

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float)
        xi = np.asarray(self.xi_tan, dtype=float)
        if nu.shape != xi.shape or nu.ndim != 1:
            raise ValueError("nu and xi_tan must be 1-D vectors of equal length")
        if abs(np.linalg.norm(nu) - 1.0) > 1e-9:
            raise ValueError("nu must be a unit vector")
        scale = 1.0 + float(np.linalg.norm(xi))
        if abs(float(np.dot(nu, xi))) > 1e-9 * scale:
            raise ValueError("xi_tan must be orthogonal to nu")
        if complex(self.p).real < -1e-12:
            raise ValueError("Re p must be >= 0")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "xi_tan", xi)
        object.__setattr__(self, "p", complex(self.p))

    def magnitude(self) -> float:
        return float(np.linalg.norm(self.xi_tan)) + abs(self.p)


def symbol_eval(symbol, xi, p: complex) -> complex:
    """Sum of coeff * xi**alpha * p**beta over the symbol's index set."""
    xi = np.asarray(xi, dtype=complex)
    total = 0.0 + 0.0j
    for (alpha, beta), c in symbol.coeffs.items():
        term = c
        for a, x in zip(alpha, xi):
            if a:
                term = term * x**a
        if beta:
            term = term * p**beta
        total += term
    return complex(total)


def _eval_batch(symbol, xi_mat: np.ndarray, p_vec: np.ndarray) -> np.ndarray:
    """Vectorized symbol evaluation; xi_mat is (N, n), p_vec is (N,)."""
    total = np.zeros(p_vec.shape, dtype=complex)
    for (alpha, beta), c in symbol.coeffs.items():
        term = np.full(p_vec.shape, c, dtype=complex)
        for axis, a in enumerate(alpha):
            if a:
                term = term * xi_mat[:, axis] ** a
        if beta:
            term = term * p_vec**beta
        total += term
    return total


def _kronecker_sphere(n_samples: int, dim: int) -> np.ndarray:
    """Deterministic low-discrepancy points on the unit sphere in R**dim."""
    from scipy.special import ndtri

    # additive recurrence driven by the generalized golden ratio
    phi = 2.0
    for _ in range(64):
        phi = (1.0 + phi) ** (1.0 / (dim + 1))
    alphas = np.array([math.modf(phi ** -(i + 1))[0] for i in range(dim)])
    idx = np.arange(1, n_samples + 1)[:, None]
    u = np.mod(0.5 + idx * alphas[None, :], 1.0)
    u = np.clip(u, 1e-12, 1.0 - 1e-12)
    g = ndtri(u)
    norms = np.linalg.norm(g, axis=1)
    norms[norms < 1e-12] = 1.0
    return g / norms[:, None]


@dataclass(frozen=True)
class PetrovskiiVerdict:
    passed: bool
    min_abs: float
    witness_xi: np.ndarray
    witness_p: complex
    n_evaluated: int

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "min_abs_symbol": self.min_abs,
            "witness_xi": [float(v) for v in self.witness_xi],
            "witness_p": {"re": self.witness_p.real, "im": self.witness_p.imag},
            "n_evaluated": self.n_evaluated,
        }


def petrovskii_check(
    A: PrincipalSymbol,
    n_samples: int,
    *,
    delta_min: float = _DELTA_MIN,
    polish: bool = True,
) -> PetrovskiiVerdict:
    """Certify A != 0 on the set {|xi|**2 + |p|**2 = 1, Re p >= 0}.

    Samples the hemisphere quasi-randomly (plus the axis points xi = 0,
    p = 1 and p = 0, |xi| = 1), then locally minimizes |A|**2 from the
    worst candidates, so genuine zeros are located to high accuracy.
    Passes iff the located minimum exceeds delta_min.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    A.validate_structure()
    n = A.n
    dim = n + 2

    pts = _kronecker_sphere(n_samples, dim)
    axis_pts = []
    zero_xi = np.zeros(dim)
    zero_xi[n] = 1.0  # xi = 0, p = 1
    axis_pts.append(zero_xi)
    for j in range(n):
        for sign in (1.0, -1.0):
            v = np.zeros(dim)
            v[j] = sign  # p = 0, |xi| = 1
            axis_pts.append(v)
    pts = np.vstack([np.array(axis_pts), pts])
    pts[:, n] = np.abs(pts[:, n])  # enforce Re p >= 0

    xi_mat = pts[:, :n]
    p_vec = pts[:, n] + 1j * pts[:, n + 1]
    vals = np.abs(_eval_batch(A, xi_mat, p_vec))
    order = np.argsort(vals)
    best_val = float(vals[order[0]])
    best_pt = pts[order[0]]

    if polish:
        from scipy.optimize import minimize

        def objective(v):
            nv = np.linalg.norm(v)
            if nv < 1e-12:
                return 1e300
            w = v / nv
            xi = w[:n]
            p = complex(abs(w[n]), w[n + 1])
            return abs(symbol_eval(A, xi, p)) ** 2

        for start in order[:4]:
            res = minimize(
                objective,
                pts[start],
                method="Nelder-Mead",
                options={"maxiter": 4000, "xatol": 1e-13, "fatol": 1e-26},
            )
            val = math.sqrt(max(float(res.fun), 0.0))
            if val < best_val:
                best_val = val
                w = res.x / np.linalg.norm(res.x)
                w[n] = abs(w[n])
                best_pt = w

    witness_xi = best_pt[:n].copy()
    witness_p = complex(abs(best_pt[n]), best_pt[n + 1])
    return PetrovskiiVerdict(
        passed=bool(best_val > delta_min),
        min_abs=best_val,
        witness_xi=witness_xi,
        witness_p=witness_p,
        n_evaluated=len(pts),
    )


def _zeta_poly_from_coeffs(coeffs, frame: BoundaryFrame, degree: int) -> np.ndarray:
    """Ascending coefficients of zeta -> symbol(xi_tan + zeta nu, p)."""
    out = np.zeros(degree + 1, dtype=complex)
    xi = frame.xi_tan
    nu = frame.nu
    for (alpha, beta), c in coeffs.items():
        term = np.array([complex(c)])
        for a, (x, v) in zip(alpha, zip(xi, nu)):
            for _ in range(a):
                term = npoly.polymul(term, np.array([x, v], dtype=complex))
        if beta:
            term = term * frame.p**beta
        out[: len(term)] += term
    return out


def zeta_polynomial(A: PrincipalSymbol, frame: BoundaryFrame) -> np.ndarray:
    """A(xi_tan + zeta nu, p) as ascending coefficients in zeta (degree 2m)."""
    return _zeta_poly_from_coeffs(A.coeffs, frame, 2 * A.m)


def _cluster_roots(roots: np.ndarray, rel_radius: float = _CLUSTER_REL) -> np.ndarray:
    """Merge eigenvalue clusters into centroids to stabilize multiple roots."""
    if roots.size <= 1:
        return roots
    order = np.lexsort((roots.imag, roots.real))
    roots = roots[order]
    clusters: list[list[complex]] = []
    for z in roots:
        placed = False
        for cl in clusters:
            center = sum(cl) / len(cl)
            if abs(z - center) <= rel_radius * (1.0 + abs(center)):
                cl.append(z)
                placed = True
                break
        if not placed:
            clusters.append([z])
    merged = []
    for cl in clusters:
        center = sum(cl) / len(cl)
        merged.extend([center] * len(cl))
    return np.asarray(merged)


def root_split(poly) -> tuple[list[complex], list[complex]]:
    """Roots of the ascending-coefficient polynomial, split by sign of Im.

    Raises DegenerateFrameError on roots too close to the real axis and
    CoveringPreconditionError when the halves are unbalanced.
    """
    c = np.asarray(poly, dtype=complex)
    if c.size < 2:
        raise ValueError("polynomial must have degree >= 1")
    if c[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    roots = np.roots(c[::-1])
    roots = _cluster_roots(roots)
    near_real = np.abs(roots.imag) < _NEAR_REAL_REL * (1.0 + np.abs(roots))
    if np.any(near_real):
        bad = roots[near_real][0]
        raise DegenerateFrameError(
            f"root {bad} is too close to the real axis; the frame is degenerate"
        )
    plus = [complex(z) for z in roots[roots.imag > 0]]
    minus = [complex(z) for z in roots[roots.imag < 0]]
    if len(plus) != len(minus):
        raise CoveringPreconditionError(
            f"unbalanced root split: {len(plus)} upper vs {len(minus)} lower",
            n_plus=len(plus),
            n_minus=len(minus),
        )
    return plus, minus


def plus_polynomial(roots_plus) -> np.ndarray:
    """Monic polynomial (ascending coefficients) with the given roots."""
    roots = list(roots_plus)
    if not roots:
        raise ValueError("need at least one root")
    return npoly.polyfromroots(roots).astype(complex)


@dataclass(frozen=True)
class CoveringVerdict:
    passed: bool
    min_singular: float  # smallest singular value normalized by matrix max
    frame_index: int
    frame: BoundaryFrame
    raw_singular: float

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "min_singular_normalized": self.min_singular,
            "worst_frame_index": self.frame_index,
            "worst_frame": {
                "nu": [float(v) for v in self.frame.nu],
                "xi_tan": [float(v) for v in self.frame.xi_tan],
                "p": {"re": self.frame.p.real, "im": self.frame.p.imag},
            },
            "raw_singular": self.raw_singular,
        }


def covering_check(
    A: PrincipalSymbol,
    Bs: list[BoundarySymbol],
    frames: list[BoundaryFrame],
    *,
    tol: float = _COVER_TOL,
) -> CoveringVerdict:
    """Rank test of the boundary symbols modulo the plus-factor of A.

    For each frame the boundary polynomials are reduced modulo the monic
    product over roots with positive imaginary part; the check passes iff
    the m x m matrix of remainder coefficients has smallest singular value
    above tol times its largest entry magnitude at every frame.
    """
    m = A.m
    if len(Bs) != m:
        raise ValueError(f"need exactly m = {m} boundary symbols, got {len(Bs)}")
    if not frames:
        raise ValueError("need at least one frame")
    worst = None
    for i, frame in enumerate(frames):
        if frame.magnitude() == 0.0:
            raise ValueError(f"frame {i}: |xi_tan| + |p| must be nonzero")
        poly = zeta_polynomial(A, frame)
        scale = float(np.max(np.abs(poly)))
        if scale == 0.0 or abs(poly[-1]) < 1e-12 * scale:
            raise DegenerateFrameError(
                f"frame {i}: leading zeta coefficient is (near) zero"
            )
        plus, _ = root_split(poly)
        if len(plus) != m:
            raise CoveringPreconditionError(
                f"frame {i}: expected {m} upper roots, found {len(plus)}",
                n_plus=len(plus),
                n_minus=2 * m - len(plus),
            )
        pp = plus_polynomial(plus)
        mat = np.zeros((m, m), dtype=complex)
        for j, B in enumerate(Bs):
            bpoly = _zeta_poly_from_coeffs(B.coeffs, frame, B.m_j)
            _, rem = npoly.polydiv(bpoly, pp)
            rem = np.atleast_1d(rem)
            mat[j, : min(m, rem.size)] = rem[:m]
        max_mag = float(np.max(np.abs(mat)))
        if max_mag == 0.0:
            return CoveringVerdict(False, 0.0, i, frame, 0.0)
        smin = float(np.linalg.svd(mat, compute_uv=False)[-1])
        normalized = smin / max_mag
        if not smin > tol * max_mag:
            return CoveringVerdict(False, normalized, i, frame, smin)
        if worst is None or normalized < worst[0]:
            worst = (normalized, i, frame, smin)
    return CoveringVerdict(True, worst[0], worst[1], worst[2], worst[3])


def sigma0(m: int, b: int, m_orders) -> int:
    """Smallest integer >= 2m and >= m_j + 1 for all j that 2b divides."""
    if not (m >= b >= 1):
        raise ValueError("need m >= b >= 1")
    if m % b != 0:
        raise ValueError("m/b must be an integer")
    orders = list(m_orders)
    if any(o < 0 for o in orders):
        raise ValueError("boundary orders must be nonnegative")
    lower = max([2 * m] + [o + 1 for o in orders])
    step = 2 * b
    return step * math.ceil(lower / step)


def random_frames(
    n_frames: int, dim: int, seed: int, *, normalize: bool = True
) -> list[BoundaryFrame]:
    """Seeded random frames with unit normal and nonzero (xi_tan, p)."""
    rng = np.random.default_rng(seed)
    frames = []
    while len(frames) < n_frames:
        nu = rng.standard_normal(dim)
        nn = np.linalg.norm(nu)
        if nn < 1e-6:
            continue
        nu /= nn
        xi = rng.standard_normal(dim)
        xi -= np.dot(xi, nu) * nu
        p = complex(abs(rng.standard_normal()), rng.standard_normal())
        mag = math.hypot(float(np.linalg.norm(xi)), abs(p))
        if mag < 1e-9:
            continue
        if normalize:
            # put |xi_tan|**2 + |p|**2 on the unit sphere
            scale = 1.0 / math.sqrt(float(np.dot(xi, xi)) + abs(p) ** 2)
            xi = xi * scale
            p = p * scale
        frames.append(BoundaryFrame(nu=nu, xi_tan=xi, p=p))
    return frames
