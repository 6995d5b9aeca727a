"""Trivial extensions and localisation.

Given a field ``nu`` on the inner disk ``|w| < r`` of a host disk (``w`` the
host coordinate normalised to the unit disk), the exterior correction

    beta(w) = s / (pi (1 - r**2)) * sum_k c_k w**-k,   c_k = int_{|w|<r} nu w**k dA

makes ``nu`` glued to ``beta`` pair to zero with every ``w**n``, ``n <= K``,
because the annulus integral of ``w**-k * w**n`` is ``pi (1 - r**2)`` when
``k == n`` and zero otherwise. The sign ``s`` is not taken on faith: it is
fixed by :func:`sign_calibration`, which tries both and keeps the one that
annihilates the pairings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import (ConstructionInvalidError, GeometryError, PreconditionError,
                     ValidationError)
from .fields import (Combination, Constant, Field, MomentLaurent, Piece, Piecewise,
                     PolyZZbar, adapted_grid, circles, ess_sup, phase_points, poles)
from .geometry import Annulus, Disk, region_contains
from .grid import DiskGrid
from .quadrature import integrate_weighted, monomial_multiplier, pairing_monomials

SAFETY = 0.99
CALIBRATION_RADIUS = 0.5


@dataclass(frozen=True)
class MomentVector:
    """Area moments ``c_k`` of an inner field, in host-normalised coordinates."""

    radius: float
    values: tuple

    @property
    def K(self) -> int:
        return len(self.values) - 1

    def bounds(self, sup: float) -> np.ndarray:
        """Crude bounds ``sup * pi * r**(k+2) * 2 / (k+2)``."""
        k = np.arange(self.K + 1)
        return sup * math.pi * self.radius ** (k + 2) * 2.0 / (k + 2)

    def to_dict(self) -> dict:
        return {"r": self.radius, "K": self.K,
                "values": [[c.real, c.imag] for c in self.values]}


def _check_radius(r):
    if not 0 < r < 1:
        raise ValidationError(f"inner radius must lie in (0, 1), got {r!r}")


def moments(nu: Field, r: float, K: int, grid: DiskGrid, host: Disk | None = None) -> MomentVector:
    """Moments ``c_k = int_{|w| < r} nu(w) w**k dA(w)`` for ``k = 0..K``.

    ``w = (z - host.center) / host.radius``; the integral is taken in ``w``,
    so a host of radius ``R`` contributes the Jacobian ``R**-2``.
    """
    _check_radius(r)
    if K < 0:
        raise ValidationError("moment truncation K must be >= 0")
    host = host or Disk.unit()
    inner = Disk(host.center, r * host.radius)
    mult = monomial_multiplier(K, host.center, host.radius)
    vals = integrate_weighted(nu, inner, grid, mult) / host.radius**2
    return MomentVector(r, tuple(complex(v) for v in vals))


def _beta(m: MomentVector, host: Disk, sign: int) -> MomentLaurent:
    return MomentLaurent(host, m.values, m.radius, sign)


def _glue(nu: Field, beta: MomentLaurent, host: Disk) -> Piecewise:
    return Piecewise(host, beta, (Piece(beta.hole, nu),))


def _calibration_defects(grid: DiskGrid, sign: int) -> float:
    r = CALIBRATION_RADIUS
    host = Disk.unit()
    worst = 0.0
    tests = (
        (Constant(host, 1.0), (math.pi * r**2, 0.0)),
        (PolyZZbar(host, ((0, 1, 1.0),)), (0.0, math.pi * r**4 / 2)),
    )
    for nu, expected in tests:
        m = moments(nu, r, 1, grid, host)
        # a grid that cannot reproduce these closed forms cannot certify anything
        for got, want in zip(m.values, expected):
            worst = max(worst, abs(got - want))
        mu = _glue(nu, _beta(m, host, sign), host)
        worst = max(worst, pairing_monomials(mu, 1, grid).max_abs)
    return worst


@lru_cache(maxsize=32)
def _calibrate(n_rad: int, n_ang: int, tol: float) -> int:
    grid = DiskGrid(n_rad=n_rad, n_ang=n_ang)
    passing = [s for s in (-1, 1) if _calibration_defects(grid, s) <= tol]
    if len(passing) != 1:
        raise ConstructionInvalidError(
            "sign calibration failed: the grid cannot separate the two orientations",
            passing=passing, n_rad=n_rad, n_ang=n_ang)
    return passing[0]


def sign_calibration(grid: DiskGrid | None = None, tol: float = 1e-12) -> int:
    """Sign ``s`` of the exterior correction that makes the glued field trivial.

    Runs the constant field (and the first moment field ``conj(z)``) with
    ``r = 0.5`` for both signs and returns the one whose pairings vanish.
    Results are cached per grid resolution.

    Raises
    ------
    ConstructionInvalidError
        If not exactly one sign passes, which means the grid is too coarse
        to integrate the calibration moments exactly.
    """
    grid = grid or DiskGrid()
    return _calibrate(grid.n_rad, grid.n_ang, tol)


@dataclass(frozen=True, eq=False)
class TrivialExtension:
    """Inner field glued to its moment-matched exterior correction."""

    inner: Field
    host: Disk
    moments: MomentVector
    sign: int
    beta: MomentLaurent
    field: Piecewise

    @property
    def radius(self) -> float:
        return self.moments.radius

    @property
    def inner_disk(self) -> Disk:
        return self.beta.hole

    @property
    def annulus(self) -> Annulus:
        return Annulus(self.host.center, self.inner_disk.radius, self.host.radius)

    def to_doc(self) -> dict:
        doc = self.field.to_doc()
        block = self.moments.to_dict()
        block["sign"] = self.sign
        doc["moments"] = block
        return doc


def beta_eval(ext: TrivialExtension, z) -> complex:
    """Exterior correction at ``z``; defined for ``|w| > r`` (any distance out)."""
    w = (complex(z) - ext.host.center) / ext.host.radius
    if abs(w) <= ext.radius:
        raise GeometryError("beta is only defined outside the closed inner disk",
                            z=[complex(z).real, complex(z).imag])
    acc = 0j
    for c in reversed(ext.moments.values):
        acc = acc / w + c
    return ext.beta.prefactor * acc


def construct_trivial(nu: Field, r: float, K: int, grid: DiskGrid | None = None,
                      host: Disk | None = None, tol: float = 1e-10,
                      check: bool = True) -> TrivialExtension:
    """Glue ``nu`` on the inner disk to its exterior correction.

    Parameters
    ----------
    nu : Field
        Inner field; must be defined on the inner disk.
    r : float
        Inner radius relative to the host radius, in (0, 1).
    K : int
        Truncation; pairings vanish for monomials of degree ``<= K``.
    host : Disk, optional
        Host disk, the unit disk by default.
    tol : float
        Tolerance of the triviality post-check, scaled by the host area.
    check : bool
        Verify the invariants (inner agreement, triviality, the sup bound).

    Raises
    ------
    ConstructionInvalidError
        If a post-condition fails on ``grid``.
    """
    _check_radius(r)
    grid = grid or DiskGrid()
    host = host or Disk.unit()
    if not region_contains(nu.domain, Disk(host.center, r * host.radius)):
        raise ValidationError("inner field is not defined on the inner disk")
    sign = sign_calibration(grid)
    m = moments(nu, r, K, grid, host)
    beta = _beta(m, host, sign)
    ext = TrivialExtension(nu, host, m, sign, beta, _glue(nu, beta, host))
    if check:
        _verify_extension(ext, grid, tol)
    return ext


def extension_bound(ext: TrivialExtension, nu_sup: float) -> float:
    r = ext.radius
    return 3.0 * nu_sup * r / (1.0 - r**2)


def _verify_extension(ext: TrivialExtension, grid: DiskGrid, tol: float):
    report = pairing_monomials(ext.field, ext.moments.K, grid)
    scale = ext.host.radius**2
    if report.max_abs > tol * scale:
        raise ConstructionInvalidError("extension is not trivial on the grid",
                                       max_abs=report.max_abs, tol=tol)
    inner_grid = grid.on(ext.inner_disk)
    if not np.array_equal(ext.field._values(inner_grid.nodes), ext.inner._values(inner_grid.nodes)):
        raise ConstructionInvalidError("extension differs from the inner field on the inner disk")
    nu_sup = ess_sup(ext.inner, inner_grid)
    beta_sup = ess_sup(ext.beta, grid.on(ext.annulus))
    if beta_sup > extension_bound(ext, nu_sup) + 1e-9:
        raise ConstructionInvalidError("exterior correction exceeds its sup bound",
                                       beta_sup=beta_sup, bound=extension_bound(ext, nu_sup))


def choose_radius(nu_sup: float, eps: float) -> float:
    """Largest inner radius keeping the correction below ``eps``, times 0.99.

    Solves ``3 nu_sup r / (1 - r**2) = eps``, i.e. the positive root of
    ``eps r**2 + 3 nu_sup r - eps = 0``. With ``nu_sup == 0`` any radius
    works and the cap ``0.99`` is returned.
    """
    if eps <= 0:
        raise ValidationError("eps must be positive")
    if nu_sup < 0:
        raise ValidationError("nu_sup must be non-negative")
    if nu_sup == 0 or math.isinf(eps):
        return SAFETY
    b = 3.0 * nu_sup
    # stable form of (-b + sqrt(b^2 + 4 eps^2)) / (2 eps)
    root = 2.0 * eps / (b + math.sqrt(b * b + 4.0 * eps * eps))
    return SAFETY * min(root, 1.0)


def host_radius(ambient: Disk, zeta: complex, *fields: Field) -> float:
    """Half the distance from ``zeta`` to the ambient circle and to field seams.

    Seams are piece circles and singular points of the given fields; a seam
    passing exactly through ``zeta`` makes the host impossible. Singular
    points located at ``zeta`` itself are harmless (polar grids centered
    there integrate them exactly) and are skipped.
    """
    dist = ambient.radius - abs(zeta - ambient.center)
    for f in fields:
        for c in circles(f):
            dist = min(dist, abs(abs(zeta - c.center) - c.radius))
        for p in poles(f) + phase_points(f):
            if p != zeta:
                dist = min(dist, abs(zeta - p))
    return 0.5 * dist


class Localization(NamedTuple):
    field: Field
    inner: Disk
    host: Disk
    extension: TrivialExtension | None


def localize(mu: Field, alpha: Field, zeta, eps: float, K: int,
             grid: DiskGrid | None = None, ambient: Disk | None = None,
             tol: float = 1e-10) -> Localization:
    """Replace ``mu`` by ``alpha`` on a small disk around ``zeta`` within the class of ``mu``.

    A host disk ``D = Disk(zeta, rho)`` is placed inside ``ambient`` (default:
    ``mu``'s domain); ``chi = alpha - mu`` on ``D`` is extended trivially with
    an inner radius from :func:`choose_radius`, and the result is ``mu``
    outside ``D``, ``alpha`` on the inner disk and ``mu + beta`` on the rest
    of ``D``. Values on the inner disk are ``alpha``'s own, bit for bit.

    Returns
    -------
    Localization
        ``(field, inner_disk, host_disk, extension)``; ``extension`` is None
        when ``alpha`` already agrees with ``mu`` on ``D``.
    """
    grid = grid or DiskGrid()
    ambient = ambient or mu.domain
    zeta = complex(zeta)
    if eps <= 0:
        raise ValidationError("eps must be positive")
    if not region_contains(mu.domain, ambient):
        raise ValidationError("ambient disk must lie in mu's domain")
    if abs(zeta - ambient.center) >= ambient.radius:
        raise GeometryError("zeta is not inside the ambient disk")
    rho = host_radius(ambient, zeta, mu, alpha)
    if rho <= 1e-12 * ambient.radius:
        raise GeometryError("no host disk fits around zeta", zeta=[zeta.real, zeta.imag])
    host = Disk(zeta, rho)
    if not region_contains(alpha.domain, host):
        raise ValidationError("alpha is not defined on the host disk")
    chi = Combination(host, ((1.0, alpha), (-1.0, mu)))
    nu_sup = ess_sup(chi, adapted_grid(chi, grid))
    if nu_sup == 0.0:
        return Localization(mu, host, host, None)
    r = choose_radius(nu_sup, eps)
    ext = construct_trivial(chi, r, K, grid, host=host, tol=tol)
    inner = ext.inner_disk
    on_host = Piecewise(host, Combination(host, ((1.0, ext.beta), (1.0, mu))),
                        (Piece(inner, alpha),))
    nu = Piecewise(mu.domain, mu, (Piece(host, on_host),))
    return Localization(nu, inner, host, ext)


def random_poly(rng: np.random.Generator, degree: int = 4, domain: Disk | None = None,
                n_terms: int | None = None) -> PolyZZbar:
    """Random ``PolyZZbar`` with bidegree ``j + k <= degree`` and coefficients in the unit box."""
    domain = domain or Disk.unit()
    monos = [(j, k) for j in range(degree + 1) for k in range(degree + 1 - j)]
    if n_terms is not None:
        idx = rng.choice(len(monos), size=min(n_terms, len(monos)), replace=False)
        monos = [monos[i] for i in sorted(idx)]
    coeffs = rng.uniform(-1.0, 1.0, size=(len(monos), 2))
    return PolyZZbar(domain, tuple((j, k, complex(a, b)) for (j, k), (a, b) in zip(monos, coeffs)))


def require_trivial(field: Field, K: int, grid: DiskGrid, tol: float):
    rep = pairing_monomials(field, K, grid)
    if rep.max_abs > tol:
        raise PreconditionError("field is not trivial at this degree", max_abs=rep.max_abs)
    return rep
