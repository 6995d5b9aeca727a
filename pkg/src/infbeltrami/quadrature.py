"""Integration of representable fields over disks and annuli.

Piecewise fields are integrated cell by cell so that every leaf integral
sees a smooth integrand on a region that matches its geometry: pieces on
their own disks, the background over the region minus the pieces (an exact
annulus when a hole is concentric, otherwise by subtraction). Leaf sums use
``math.fsum`` over a fixed radial-major node order, so results do not depend
on how anything upstream was scheduled.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError, KernelSingularityError, SingularPointError
from .fields import Combination, Field, MomentLaurent, Piecewise
from .geometry import REL_EPS, Annulus, Disk, region_contains, relation
from .grid import DiskGrid

log = logging.getLogger(__name__)

NEAR_BAND = 1.05
DIRECT_BAND = 2.0


def _fsum_rows(rows: np.ndarray) -> np.ndarray:
    return np.array([complex(math.fsum(r.real), math.fsum(r.imag)) for r in rows])


def _check_leaf(field: Field, region):
    if isinstance(field, MomentLaurent):
        hole = field.hole
        if isinstance(region, Annulus) and abs(region.center - hole.center) <= REL_EPS * hole.radius:
            if region.inner >= hole.radius * (1 - 1e-9):
                return
        elif relation(hole, region) == "disjoint":
            return
        raise DomainError("integration region overlaps the inner disk of a Laurent field")


def _leaf(field, region, res: DiskGrid, mult):
    _check_leaf(field, region)
    g = res.on(region)
    for _ in range(4):
        vals = field._values(g.nodes)
        if not np.isnan(vals).any():
            break
        # a node sits on an excluded point; turn the rays off it
        g = g.rotated()
    else:
        raise SingularPointError("quadrature nodes keep hitting excluded points")
    wv = g.weights * vals
    rows = wv[None, :] if mult is None else mult(g.nodes) * wv[None, :]
    return _fsum_rows(rows)


def _fallback(field, region, res, mult):
    log.warning("piece boundary crosses the integration region; using plain tensor quadrature")
    g = res.on(region)
    vals = field._values(g.nodes)
    wv = g.weights * vals
    rows = wv[None, :] if mult is None else mult(g.nodes) * wv[None, :]
    return _fsum_rows(rows)


def _excluding(bg, region, holes, res, mult):
    rest = list(holes)
    base = None
    if isinstance(region, Disk):
        for h in holes:
            if abs(h.center - region.center) <= REL_EPS * region.radius:
                rest.remove(h)
                if h.radius < region.radius * (1 - REL_EPS):
                    base = _integrate(bg, Annulus(region.center, h.radius, region.radius), res, mult)
                else:
                    base = 0.0
                break
    if base is None:
        base = _integrate(bg, region, res, mult)
    for h in rest:
        base = base - _integrate(bg, h, res, mult)
    return base


def _integrate(field: Field, region, res: DiskGrid, mult):
    if isinstance(field, Combination):
        total = 0.0
        for c, f in field.terms:
            total = total + c * _integrate(f, region, res, mult)
        return total
    if isinstance(field, Piecewise):
        inside = []
        for p in field.pieces:
            rel = relation(p.disk, region)
            if rel == "contains":
                return _integrate(p.field, region, res, mult)
            if rel == "inside":
                inside.append(p)
            elif rel == "crossing":
                return _fallback(field, region, res, mult)
        total = _excluding(field.background, region, [p.disk for p in inside], res, mult)
        for p in inside:
            total = total + _integrate(p.field, p.disk, res, mult)
        return total
    return _leaf(field, region, res, mult)


def monomial_multiplier(degree: int, origin: complex = 0j, scale: float = 1.0):
    """Multiplier producing rows ``((z - origin) / scale) ** n`` for ``n = 0..degree``."""

    def mult(z):
        w = (z - origin) / scale
        rows = np.empty((degree + 1, z.size), dtype=complex)
        rows[0] = 1.0
        for n in range(1, degree + 1):
            rows[n] = rows[n - 1] * w
        return rows

    return mult


def integrate_weighted(field: Field, region, grid: DiskGrid, mult=None) -> np.ndarray:
    """Vector of integrals of ``field * mult_i`` over ``region``."""
    if not region_contains(field.domain, region):
        raise DomainError("integration region exceeds the field's domain")
    out = np.asarray(_integrate(field, region, grid, mult), dtype=complex)
    if out.ndim == 0:
        rows = 1 if mult is None else mult(np.zeros(1, dtype=complex)).shape[0]
        out = np.full(rows, complex(out))
    return out


def integrate(field: Field, region=None, grid: DiskGrid | None = None) -> complex:
    """Area integral of ``field`` over ``region`` (default: its whole domain).

    Only the resolution (``n_rad``, ``n_ang``) of ``grid`` is used; nodes
    are laid out per integration cell.
    """
    region = field.domain if region is None else region
    grid = grid or DiskGrid()
    return complex(integrate_weighted(field, region, grid)[0])


@dataclass(frozen=True)
class PairingReport:
    """Pairings ``p_n`` of a field against ``(z - c)**n`` over its domain."""

    degree: int
    pairings: tuple
    grid: dict
    max_abs: float

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "pairings": [[p.real, p.imag] for p in self.pairings],
            "max_abs": self.max_abs,
            "grid": self.grid,
        }

    @classmethod
    def from_values(cls, values, grid) -> PairingReport:
        vals = tuple(complex(v) for v in values)
        return cls(len(vals) - 1, vals, grid.descriptor(),
                   max((abs(v) for v in vals), default=0.0))


def pairing_monomials(field: Field, degree: int, grid: DiskGrid | None = None) -> PairingReport:
    """Pair ``field`` with the monomial basis of holomorphic quadratic differentials.

    The monomials are centered at the field's domain center, so for fields
    on the unit disk this is ``p_n = integral of field * z**n dA``.
    """
    if degree < 0:
        raise DomainError("pairing degree must be >= 0")
    grid = grid or DiskGrid()
    c = field.domain.center
    vals = integrate_weighted(field, field.domain, grid, monomial_multiplier(degree, c))
    return PairingReport.from_values(vals, grid.on(field.domain))


def _geometric_cells(center: complex, r: float, gap: float) -> list:
    cuts = [0.0, 0.5 * r]
    step = 0.25 * r
    while step > 0.5 * gap and len(cuts) < 60:
        cuts.append(r - step)
        step *= 0.5
    cuts.append(r)
    cells = [Disk(center, cuts[1])]
    cells += [Annulus(center, a, b) for a, b in zip(cuts[1:-1], cuts[2:])]
    return cells


def cauchy_integral_direct(inner: Field, r: float, z: complex, tol: float = 1e-10,
                           center: complex = 0j, n_rad: int = 16, n_ang: int = 64,
                           max_refine: int = 5) -> complex:
    """Cauchy integral of ``inner`` over the disk ``|zeta - center| < r``.

    Computes ``integral of inner(zeta) / (zeta - z) dA(zeta)`` for a point
    ``z`` outside the support. Far points (``|z - center| >= 2r``) use one
    tensor rule; in the band ``1.05 r < |z - center| < 2 r`` the disk is cut
    into annuli shrinking geometrically toward the boundary circle. Each cell
    doubles its resolution until two successive estimates agree to its share
    of ``tol``.

    Raises
    ------
    KernelSingularityError
        If ``|z - center| <= 1.05 r``; use the moment series there.
    AccuracyError
        If a cell does not settle within ``max_refine`` doublings.
    """
    z = complex(z)
    d = abs(z - center)
    if d <= r:
        raise KernelSingularityError("kernel point lies in the closed support", z=[z.real, z.imag])
    if d <= NEAR_BAND * r:
        raise KernelSingularityError(
            "kernel point too close to the support; evaluate the moment series instead",
            z=[z.real, z.imag], ratio=d / r)
    support = Disk(center, r)
    if not region_contains(inner.domain, support):
        raise DomainError("inner field is not defined on the whole support disk")

    def mult(nodes):
        return (1.0 / (nodes - z))[None, :]

    cells = [support] if d >= DIRECT_BAND * r else _geometric_cells(center, r, d - r)
    share = tol / len(cells)
    parts = []
    for cell in cells:
        res = DiskGrid(n_rad=n_rad, n_ang=n_ang)
        prev = _integrate(inner, cell, res, mult)[0]
        err = math.inf
        for _ in range(max_refine):
            res = res.with_resolution(2 * res.n_rad, 2 * res.n_ang)
            cur = _integrate(inner, cell, res, mult)[0]
            err = abs(cur - prev)
            prev = cur
            if err <= share:
                break
        else:
            raise AccuracyError("Cauchy integral did not converge", achieved=err,
                                cell=cell.as_dict())
        parts.append(prev)
    return complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))
