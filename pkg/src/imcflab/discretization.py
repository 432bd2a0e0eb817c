"""Grids, finite differences and quadrature over S^{n-1}.

Two grid kinds are supported:

* ``periodic``: plane curves (n = 2), nodes phi_i = i*h on [0, 2*pi).
* ``polar``: axisymmetric hypersurfaces (n >= 3), nodes theta_i = i*h on
  [0, pi] including both poles. Fields on this grid are assumed even about
  each pole, which is what smoothness of an axisymmetric radial graph means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import InvalidField, InvalidSpec

PERIODIC = "periodic"
POLAR = "polar"
MIN_NODES = 16


def sphere_measure(dim: int) -> float:
    """Total measure of the unit sphere S^dim (S^0 counts two points)."""
    k = dim + 1
    return 2.0 * math.pi ** (k / 2) / math.gamma(k / 2)


@dataclass(frozen=True)
class Grid:
    kind: str
    N: int
    n: int

    def __post_init__(self):
        if self.kind not in (PERIODIC, POLAR):
            raise InvalidSpec(f"unknown grid kind {self.kind!r}")
        if int(self.N) != self.N or self.N < MIN_NODES:
            raise InvalidSpec(f"grid needs an integer N >= {MIN_NODES}, got {self.N}")
        if self.kind == PERIODIC and self.n != 2:
            raise InvalidSpec("periodic grids describe plane curves (n = 2)")
        if self.kind == POLAR and self.n < 3:
            raise InvalidSpec("polar grids require n >= 3")

    @classmethod
    def for_dimension(cls, n: int, N: int) -> "Grid":
        return cls(PERIODIC if n == 2 else POLAR, N, n)

    @property
    def h(self) -> float:
        if self.kind == PERIODIC:
            return 2.0 * math.pi / self.N
        return math.pi / (self.N - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.arange(self.N) * self.h
        if self.kind == POLAR:
            x[-1] = math.pi
        x.flags.writeable = False
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights including the sin^{n-2} Jacobian and the S^{n-2} factor."""
        if self.kind == PERIODIC:
            w = np.full(self.N, self.h)
        else:
            w = sphere_measure(self.n - 2) * _polar_weights(self.N, self.n - 2)
        w.flags.writeable = False
        return w

    @cached_property
    def cot(self) -> np.ndarray:
        """cot(theta) on polar grids, with zeros at the poles (never used there)."""
        c = np.zeros(self.N)
        th = self.nodes[1:-1]
        c[1:-1] = np.cos(th) / np.sin(th)
        c.flags.writeable = False
        return c

    def measure(self) -> float:
        return sphere_measure(self.n - 1)


def _sin_power_moments(p: int, kmax: int) -> np.ndarray:
    """m_k = int_0^pi cos(k t) sin^p(t) dt for k = 0..kmax, exactly.

    sin^p is a trigonometric polynomial of degree p; its Fourier coefficients
    come out of a small FFT without truncation error, and each term then
    integrates in closed form against cos(k t).
    """
    L = 4 * (p + 1)
    t = 2.0 * np.pi * np.arange(L) / L
    c = np.fft.fft(np.sin(t) ** p) / L
    k = np.arange(kmax + 1)
    m = np.zeros(kmax + 1)
    for j in range(-p, p + 1):
        cj = c[j % L]
        a, b = cj.real, -cj.imag  # sin^p = sum a cos(jt) + b sin(jt)
        if abs(a) > 1e-15:
            m += a * 0.5 * np.pi * ((k == j).astype(float) + (k == -j).astype(float))
        if abs(b) > 1e-15 and j != 0:
            m += b * 0.5 * (_int_sin(j + k) + _int_sin(j - k))
    return m


def _int_sin(j: np.ndarray) -> np.ndarray:
    # int_0^pi sin(j t) dt for integer j
    j = np.asarray(j)
    out = np.zeros(j.shape)
    nz = j != 0
    out[nz] = (1.0 - np.where(j[nz] % 2 == 0, 1.0, -1.0)) / j[nz]
    return out


@lru_cache(maxsize=64)
def _polar_weights(N: int, p: int) -> np.ndarray:
    """Weights integrating cosine polynomials of degree N-1 against sin^p exactly.

    For p = 1 these are the Clenshaw-Curtis weights in cos(theta).
    """
    M = N - 1
    m = _sin_power_moments(p, M)
    ck = np.ones(M + 1)
    ck[0] = ck[M] = 0.5
    ej = np.ones(N)
    ej[0] = ej[-1] = 0.5
    j = np.arange(N)
    C = np.cos(np.outer(j, np.arange(M + 1)) * (math.pi / M))
    w = (2.0 / M) * ej * (C @ (ck * m))
    return w


def _check_field(grid: Grid, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.N,):
        raise InvalidField(f"field has shape {f.shape}, grid has {grid.N} nodes")
    if not np.all(np.isfinite(f)):
        raise InvalidField("field contains non-finite values")
    return f


def _diffs(grid: Grid, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # unchecked first and second centered differences
    if grid.kind == PERIODIC:
        fp = np.roll(f, -1)
        fm = np.roll(f, 1)
    else:
        g = np.empty(f.size + 2)
        g[1:-1] = f
        g[0] = f[1]
        g[-1] = f[-2]
        fp = g[2:]
        fm = g[:-2]
    h = grid.h
    return (fp - fm) / (2.0 * h), (fp - 2.0 * f + fm) / (h * h)


def derivative(grid: Grid, f, order: int) -> np.ndarray:
    """Centered second-order difference of a node field.

    Polar grids use mirror ghosts f[-1] = f[1], f[N] = f[N-2], so first
    derivatives of even data vanish exactly at the poles.
    """
    f = _check_field(grid, f)
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    d1, d2 = _diffs(grid, f)
    return d1 if order == 1 else d2


def sphere_integral(grid: Grid, f) -> float:
    """Integrate a node field over the unit sphere S^{n-1}.

    Periodic grids use the trapezoid rule. Polar grids use weights exact for
    cosine polynomials of degree N-1 times sin^{n-2}. Summation goes through
    math.fsum so results do not depend on BLAS threading.
    """
    f = _check_field(grid, f)
    return math.fsum(grid.weights * f)


def refine(grid: Grid) -> Grid:
    """Double the resolution, keeping existing nodes."""
    N = 2 * grid.N if grid.kind == PERIODIC else 2 * grid.N - 1
    return Grid(grid.kind, N, grid.n)
