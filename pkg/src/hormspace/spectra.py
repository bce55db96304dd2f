"""Frequency lattices, unitary DFT, and anisotropic weighted spectral norms.

Conventions used throughout the package:

* A lattice has k spatial axes of n_x points each (period L_x) followed by
  one time axis of n_t points (period L_t); samples are stored C-order with
  the time axis last.
* Spatial samples sit at x_j = j L_x / n_x; time samples sit at
  t_j = -L_t/2 + j L_t / n_t, so t = 0 is exactly the slice n_t // 2 and
  the window covers both signs of t.
* Frequencies are xi_m = 2 pi m / L_x and eta_m = 2 pi m / L_t with
  m in {-n/2, ..., n/2 - 1}, stored in FFT order.
* The DFT is unitary (norm="ortho"), so coefficient energy equals sample
  energy exactly.
* Norms carry the frequency cell volume (2 pi / L_x)**k * (2 pi / L_t) so
  that they are quadrature approximations of the corresponding integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .class_m import PhiFunction, constant_one, eval_phi

__all__ = [
    "AnisotropicIndex",
    "Lattice",
    "GridFunction",
    "SpectralField",
    "r_gamma",
    "hormander_weight",
    "dft",
    "idft",
    "hnorm",
    "embedding_constants",
    "weight_array",
    "r_gamma_array",
    "random_grid",
]


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class AnisotropicIndex:
    """Regularity triple (s, gamma, phi); parabolic use has gamma = 1/(2b)."""

    s: float
    gamma: float
    phi: PhiFunction = None

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.phi is None:
            object.__setattr__(self, "phi", constant_one())

    def time_order_b(self) -> int:
        """The integer b with gamma = 1/(2b); raises if there is none."""
        b = 1.0 / (2.0 * self.gamma)
        bi = round(b)
        if bi < 1 or abs(b - bi) > 1e-9:
            raise ValueError(f"gamma={self.gamma} is not 1/(2b) for integer b")
        return bi


@dataclass(frozen=True)
class Lattice:
    """Discrete space-time frequency lattice."""

    k: int
    n_x: int
    n_t: int
    L_x: float
    L_t: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("spatial dimension k must be >= 1")
        if not _is_pow2(self.n_x) or not _is_pow2(self.n_t):
            raise ValueError("n_x and n_t must be powers of two")
        if self.L_x <= 0 or self.L_t <= 0:
            raise ValueError("periods must be positive")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_x,) * self.k + (self.n_t,)

    @property
    def size(self) -> int:
        return self.n_x**self.k * self.n_t

    @property
    def cell_volume(self) -> float:
        return (2.0 * math.pi / self.L_x) ** self.k * (2.0 * math.pi / self.L_t)

    def xi_axis(self) -> np.ndarray:
        """Spatial frequencies in FFT order."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n_x, d=self.L_x / self.n_x)

    def eta_axis(self) -> np.ndarray:
        """Time frequencies in FFT order."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n_t, d=self.L_t / self.n_t)

    def t_axis(self) -> np.ndarray:
        """Physical time samples, centered so t=0 is index n_t // 2."""
        return -0.5 * self.L_t + self.L_t * np.arange(self.n_t) / self.n_t

    def x_axis(self) -> np.ndarray:
        return self.L_x * np.arange(self.n_x) / self.n_x

    def refine(self, factor_x: int = 1, factor_t: int = 1) -> "Lattice":
        return Lattice(self.k, self.n_x * factor_x, self.n_t * factor_t, self.L_x, self.L_t)


@dataclass(frozen=True)
class GridFunction:
    """Complex samples on a lattice."""

    lattice: Lattice
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=complex)
        if arr.shape != self.lattice.shape:
            raise ValueError(f"samples shape {arr.shape} != lattice shape {self.lattice.shape}")
        object.__setattr__(self, "samples", arr)


@dataclass(frozen=True)
class SpectralField:
    """DFT image of a GridFunction, indexed by (xi, eta) in FFT order."""

    lattice: Lattice
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=complex)
        if arr.shape != self.lattice.shape:
            raise ValueError(f"coeffs shape {arr.shape} != lattice shape {self.lattice.shape}")
        object.__setattr__(self, "coeffs", arr)


def r_gamma(xi, eta, gamma: float):
    """(1 + |xi|**2 + |eta|**(2 gamma))**(1/2); xi a vector or scalar."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    return float(np.sqrt(1.0 + np.sum(xi_arr**2) + abs(eta) ** (2.0 * gamma)))


def hormander_weight(idx: AnisotropicIndex, xi, eta) -> float:
    """r_gamma**s * phi(r_gamma) at a single frequency point."""
    r = r_gamma(xi, eta, idx.gamma)
    return r**idx.s * eval_phi(idx.phi, r)


def r_gamma_array(lattice: Lattice, gamma: float) -> np.ndarray:
    """r_gamma over the whole frequency lattice (FFT order)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    xi = lattice.xi_axis()
    eta = lattice.eta_axis()
    sq = np.zeros(lattice.shape)
    for axis in range(lattice.k):
        shape = [1] * (lattice.k + 1)
        shape[axis] = lattice.n_x
        sq = sq + (xi**2).reshape(shape)
    sq = sq + (np.abs(eta) ** (2.0 * gamma)).reshape((1,) * lattice.k + (lattice.n_t,))
    return np.sqrt(1.0 + sq)


def weight_array(lattice: Lattice, idx: AnisotropicIndex) -> np.ndarray:
    """hormander_weight over the whole frequency lattice (FFT order)."""
    r = r_gamma_array(lattice, idx.gamma)
    return r**idx.s * eval_phi(idx.phi, r)


def dft(g: GridFunction) -> SpectralField:
    """Unitary forward DFT over all axes."""
    return SpectralField(g.lattice, np.fft.fftn(g.samples, norm="ortho"))


def idft(field: SpectralField) -> GridFunction:
    """Unitary inverse DFT; idft(dft(g)) == g to machine precision."""
    return GridFunction(field.lattice, np.fft.ifftn(field.coeffs, norm="ortho"))


def hnorm(g: GridFunction, idx: AnisotropicIndex) -> float:
    """Weighted spectral norm: (sum weight**2 |coeff|**2 cell_volume)**(1/2).

    With s=0 and phi==1 this is the L2 norm of the samples scaled by the
    square root of the frequency cell volume (Parseval).
    """
    w = weight_array(g.lattice, idx)
    coeffs = np.fft.fftn(g.samples, norm="ortho")
    return float(np.sqrt(np.sum((w * np.abs(coeffs)) ** 2) * g.lattice.cell_volume))


def embedding_constants(
    idx0: AnisotropicIndex,
    idx: AnisotropicIndex,
    idx1: AnisotropicIndex,
    lattice: Lattice,
) -> tuple[float, float]:
    """Lattice certificates for the norm chain idx0 <= idx <= idx1.

    Returns (c_low, c_high) with c_low = max weight(idx0)/weight(idx) and
    c_high = max weight(idx)/weight(idx1), so that on this lattice
    ||.||_{idx0} <= c_low ||.||_{idx} and ||.||_{idx} <= c_high ||.||_{idx1}.
    Orders may touch (s0 <= s <= s1); reversal is an error.
    """
    if not (idx0.s <= idx.s <= idx1.s):
        raise ValueError("need idx0.s <= idx.s <= idx1.s")
    if not (idx0.gamma == idx.gamma == idx1.gamma):
        raise ValueError("indices must share gamma")
    w0 = weight_array(lattice, idx0)
    w = weight_array(lattice, idx)
    w1 = weight_array(lattice, idx1)
    return float(np.max(w0 / w)), float(np.max(w / w1))


def random_grid(lattice: Lattice, seed: int, *, band: int | None = None) -> GridFunction:
    """Seeded complex Gaussian samples; optional spectral band limit |m| <= band."""
    rng = np.random.default_rng(seed)
    samples = rng.standard_normal(lattice.shape) + 1j * rng.standard_normal(lattice.shape)
    if band is None:
        return GridFunction(lattice, samples)
    coeffs = np.fft.fftn(samples, norm="ortho")
    mask = np.ones(lattice.shape, dtype=bool)
    for axis, n in enumerate(lattice.shape):
        m = np.rint(np.fft.fftfreq(n) * n).astype(int)
        shape = [1] * len(lattice.shape)
        shape[axis] = n
        mask &= (np.abs(m) <= band).reshape(shape)
    coeffs[~mask] = 0.0
    return GridFunction(lattice, np.fft.ifftn(coeffs, norm="ortho"))
