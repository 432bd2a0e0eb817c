"""Pointwise curvature fields and global integrals of a radial graph.

Everything is written in terms of u = log(rho) and its angular derivatives
u', u''. With v = sqrt(1 + u'^2):

* profile (or plane-curve) curvature   k_p = (v^2 - u'') / (rho v^3)
* orbit curvature (n >= 3)             k_o = (1 - u' cot(theta)) / (rho v)
* outward normal                       nu  = (e_r - u' e_theta) / v
* area element                         dmu = rho^{n-1} v dsigma

These are the classical polar-curve formulas; at the poles k_o is replaced by
its umbilic limit k_p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .discretization import POLAR, Grid, _diffs, sphere_integral
from .errors import InternalError, InvalidField, LostMeanConvexity

if TYPE_CHECKING:
    from .shapes import RadialShape


@dataclass(frozen=True)
class GeometrySnapshot:
    n: int
    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    v: np.ndarray
    kappa_profile: np.ndarray
    kappa_orbit: np.ndarray
    H: np.ndarray
    ii_sq: np.ndarray
    area_weight: np.ndarray
    r2: np.ndarray
    normal_radial: np.ndarray
    # globals, filled by integrals()
    vol: float | None = None
    area: float | None = None
    int_r2H: float | None = None
    int_invH: float | None = None
    q_raw: float | None = None
    roundness: float | None = None

    @property
    def support(self) -> np.ndarray:
        """<X - P, nu> at each node."""
        return self.rho / self.v

    @property
    def ii_gap(self) -> np.ndarray:
        """|II|^2 - H^2/(n-1); nonnegative up to roundoff."""
        return self.ii_sq - self.H**2 / (self.n - 1)


@dataclass(frozen=True)
class QValue:
    t: float
    Q: float


def _curvature_fields(grid: Grid, u: np.ndarray):
    """(rho, u', u'', v, k_p, k_o, H) without any validation; the flow's hot path."""
    u1, u2 = _diffs(grid, u)
    rho = np.exp(u)
    v2 = 1.0 + u1 * u1
    v = np.sqrt(v2)
    kp = (v2 - u2) / (rho * v2 * v)
    if grid.kind == POLAR:
        ko = (1.0 - u1 * grid.cot) / (rho * v)
        ko[0] = kp[0]
        ko[-1] = kp[-1]
        H = kp + (grid.n - 2) * ko
    else:
        ko = np.zeros_like(kp)
        H = kp
    return rho, u1, u2, v, kp, ko, H


def curvatures(shape: "RadialShape") -> GeometrySnapshot:
    """Per-node geometric fields of ``shape``."""
    grid, n, d = shape.grid, shape.n, shape.offset
    rho, u1, u2, v, kp, ko, H = _curvature_fields(grid, shape.u)
    if grid.kind == POLAR and np.any(rho[1:-1] * np.sin(grid.nodes[1:-1]) <= 0.0):
        raise InternalError("profile curve touches the axis away from the poles")
    ii_sq = kp * kp + (n - 2) * ko * ko
    area_weight = rho ** (n - 1) * v
    c = np.cos(grid.nodes)
    r2 = rho * rho - 2.0 * d * rho * c + d * d
    snap = GeometrySnapshot(
        n=n,
        rho=rho,
        u1=u1,
        u2=u2,
        v=v,
        kappa_profile=kp,
        kappa_orbit=ko,
        H=H,
        ii_sq=ii_sq,
        area_weight=area_weight,
        r2=r2,
        normal_radial=1.0 / v,
    )
    for f in (H, ii_sq, area_weight, r2):
        if not np.all(np.isfinite(f)):
            raise InvalidField("non-finite curvature field")
    return snap


def integrals(
    shape: "RadialShape", snap: GeometrySnapshot | None = None, with_inv_h: bool = True
) -> GeometrySnapshot:
    """Fill in Vol, Area, int r^2 H, int 1/H, Q_raw and roundness.

    Raises LostMeanConvexity if ``with_inv_h`` and H <= 0 somewhere.
    """
    grid, n = shape.grid, shape.n
    if snap is None:
        snap = curvatures(shape)
    rho, H, w = snap.rho, snap.H, snap.area_weight
    vol = sphere_integral(grid, rho**n) / n
    area = sphere_integral(grid, w)
    int_r2H = sphere_integral(grid, snap.r2 * H * w)
    int_invH = None
    if with_inv_h:
        min_h = float(np.min(H))
        if min_h <= 0.0:
            raise LostMeanConvexity(min_h, 0.0)
        int_invH = sphere_integral(grid, w / H)
    q_raw = n * vol - int_r2H / (n - 1)
    roundness = float((np.max(rho) - np.min(rho)) / np.mean(rho))
    return replace(
        snap,
        vol=vol,
        area=area,
        int_r2H=int_r2H,
        int_invH=int_invH,
        q_raw=q_raw,
        roundness=roundness,
    )


def snapshot(shape: "RadialShape", with_inv_h: bool = True) -> GeometrySnapshot:
    return integrals(shape, curvatures(shape), with_inv_h=with_inv_h)


def q_prefactor(n: int, t: float) -> float:
    return math.exp(-t * (n - 2) / (n - 1))


def q_value(shape: "RadialShape", t: float, snap: GeometrySnapshot | None = None) -> QValue:
    if snap is None or snap.q_raw is None:
        snap = snapshot(shape, with_inv_h=False)
    return QValue(t, q_prefactor(shape.n, t) * snap.q_raw)


def normal_derivative_r2(shape: "RadialShape", snap: GeometrySnapshot) -> np.ndarray:
    """d(r^2)/dnu = 2 <X - O, nu>."""
    th = shape.grid.nodes
    d = shape.offset
    return 2.0 * (snap.rho - d * (np.cos(th) + snap.u1 * np.sin(th))) / snap.v


def reilly_terms(shape: "RadialShape", snap: GeometrySnapshot | None = None) -> tuple[float, float]:
    """Both sides of the boundary Reilly identity for u = r^2.

    lhs = int H (du/dnu)^2 dmu
    rhs = int II(grad u, grad u) dmu + 4 n (n-1) Vol

    The tangential gradient of r^2 lies along the profile direction, so
    II(grad u, grad u) = k_p |grad u|^2 with |grad u|^2 = 4 r^2 - (du/dnu)^2.
    """
    if snap is None or snap.vol is None:
        snap = snapshot(shape, with_inv_h=False)
    grid, n = shape.grid, shape.n
    dn = normal_derivative_r2(shape, snap)
    tang = np.maximum(4.0 * snap.r2 - dn * dn, 0.0)
    lhs = sphere_integral(grid, snap.H * dn * dn * snap.area_weight)
    rhs = sphere_integral(grid, snap.kappa_profile * tang * snap.area_weight)
    rhs += 4.0 * n * (n - 1) * snap.vol
    return lhs, rhs


def support_positivity(shape: "RadialShape") -> float:
    """min over nodes of <X - P, nu> = rho / v."""
    u1, _ = _diffs(shape.grid, shape.u)
    return float(np.min(np.exp(shape.u) / np.sqrt(1.0 + u1 * u1)))
