"""Representable Beltrami differentials.

Every construction in this package produces a field from a small closed
family of kinds, so values, moments and pairings stay semi-analytic:

``Constant``       c
``PolyZZbar``      sum a_jk w**j * conj(w)**k, with w = z - center
``MomentLaurent``  s / (pi (1 - r**2)) * sum c_k w**-k, with w = (z - center) / R,
                   defined on the annulus r <= |w| <= 1
``TeichForm``      k * conj(psi(w)) / |psi(w)|, psi(w) = sum b_n w**n
``RationalPhase``  k * conj(w)**m / w**m
``Piecewise``      a background field overridden on disjoint sub-disks
``Combination``    a complex linear combination of fields

Fields are immutable. ``_values`` is the unchecked vectorised kernel and
returns NaN at excluded points (zeros of psi, the center of a phase field);
:func:`evaluate` is the checked entry point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .errors import DomainError, FieldSpecError, SingularPointError
from .geometry import REL_EPS, Disk, region_contains
from .grid import DiskGrid, NodeSet


class Field:
    """Base class of all field kinds."""

    kind: ClassVar[str] = ""
    domain: Disk

    def _values(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def children(self) -> tuple:
        return ()

    def own_circles(self) -> tuple:
        return ()

    def own_poles(self) -> tuple:
        return ()

    def own_phase_points(self) -> tuple:
        return ()

    def payload(self) -> dict:
        raise NotImplementedError

    def to_doc(self) -> dict:
        doc = {"kind": self.kind, "domain": self.domain.as_dict()}
        doc.update(self.payload())
        return doc

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other):
        return Combination(self.domain, ((1.0, self), (1.0, other)))

    def __sub__(self, other):
        return Combination(self.domain, ((1.0, self), (-1.0, other)))

    def __mul__(self, c):
        return Combination(self.domain, ((complex(c), self),))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _cpair(c: complex) -> list:
    return [float(c.real), float(c.imag)]


@dataclass(frozen=True, eq=False)
class Constant(Field):
    domain: Disk
    value: complex

    kind: ClassVar[str] = "Constant"

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))

    def _values(self, z):
        return np.full(np.shape(z), self.value, dtype=complex)

    def payload(self):
        return {"value": _cpair(self.value)}


@dataclass(frozen=True, eq=False)
class PolyZZbar(Field):
    """Polynomial in ``w`` and ``conj(w)``; entries ``(j, k, a_jk)``."""

    domain: Disk
    coefficients: tuple

    kind: ClassVar[str] = "PolyZZbar"

    def __post_init__(self):
        coeffs = []
        for entry in self.coefficients:
            j, k, a = entry
            if int(j) != j or int(k) != k or j < 0 or k < 0:
                raise FieldSpecError(f"PolyZZbar exponents must be non-negative ints: {entry!r}")
            coeffs.append((int(j), int(k), complex(a)))
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        return max((j + k for j, k, _ in self.coefficients), default=0)

    def _values(self, z):
        w = np.asarray(z, dtype=complex) - self.domain.center
        wb = np.conj(w)
        out = np.zeros(w.shape, dtype=complex)
        for j, k, a in self.coefficients:
            out = out + a * (w**j) * (wb**k)
        return out

    def payload(self):
        return {"coefficients": [[j, k, float(a.real), float(a.imag)]
                                 for j, k, a in self.coefficients]}


@dataclass(frozen=True, eq=False)
class MomentLaurent(Field):
    """Exterior Laurent part built from inner moments.

    ``moments[k]`` are area moments of the inner field in coordinates
    normalised by the domain radius; ``inner_radius`` is normalised the same
    way.
    """

    domain: Disk
    moments: tuple
    inner_radius: float
    sign: int = -1

    kind: ClassVar[str] = "MomentLaurent"

    def __post_init__(self):
        object.__setattr__(self, "moments", tuple(complex(c) for c in self.moments))
        object.__setattr__(self, "inner_radius", float(self.inner_radius))
        if not 0 < self.inner_radius < 1:
            raise FieldSpecError("MomentLaurent inner_radius must lie in (0, 1)")
        if self.sign not in (1, -1):
            raise FieldSpecError("MomentLaurent sign must be +1 or -1")
        object.__setattr__(self, "sign", int(self.sign))

    @property
    def prefactor(self) -> float:
        return self.sign / (math.pi * (1.0 - self.inner_radius**2))

    @property
    def hole(self) -> Disk:
        return Disk(self.domain.center, self.inner_radius * self.domain.radius)

    def _values(self, z):
        w = (np.asarray(z, dtype=complex) - self.domain.center) / self.domain.radius
        if np.any(np.abs(w) < self.inner_radius * (1 - 1e-9)):
            raise DomainError("MomentLaurent evaluated inside its inner disk")
        u = 1.0 / w
        acc = np.zeros(w.shape, dtype=complex)
        for c in reversed(self.moments):
            acc = acc * u + c
        return self.prefactor * acc

    def own_circles(self):
        return (self.hole,)

    def own_poles(self):
        return (self.domain.center,)

    def payload(self):
        return {"moments": [_cpair(c) for c in self.moments],
                "inner_radius": self.inner_radius, "sign": self.sign}


@dataclass(frozen=True, eq=False)
class TeichForm(Field):
    """``k * conj(psi) / |psi|`` for a polynomial ``psi`` (coefficients low to high)."""

    domain: Disk
    psi: tuple
    k: float

    kind: ClassVar[str] = "TeichForm"

    def __post_init__(self):
        object.__setattr__(self, "psi", tuple(complex(b) for b in self.psi))
        object.__setattr__(self, "k", float(self.k))
        if not 0 <= self.k < 1:
            raise FieldSpecError("TeichForm modulus k must lie in [0, 1)")
        if not any(self.psi):
            raise FieldSpecError("TeichForm needs a nonzero psi")

    def _values(self, z):
        w = np.asarray(z, dtype=complex) - self.domain.center
        p = np.zeros(w.shape, dtype=complex)
        for b in reversed(self.psi):
            p = p * w + b
        mod = np.abs(p)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = self.k * np.conj(p) / mod
        out[mod == 0] = np.nan
        return out

    def own_phase_points(self):
        coeffs = list(self.psi)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) < 2:
            return ()
        roots = np.roots(coeffs[::-1])
        return tuple(self.domain.center + complex(r) for r in roots)

    def payload(self):
        return {"psi": [_cpair(b) for b in self.psi], "k": self.k}


@dataclass(frozen=True, eq=False)
class RationalPhase(Field):
    """``k * conj(w)**m / w**m``; unimodular up to ``k``, undefined at ``w = 0``."""

    domain: Disk
    k: float
    m: int

    kind: ClassVar[str] = "RationalPhase"

    def __post_init__(self):
        object.__setattr__(self, "k", float(self.k))
        if int(self.m) != self.m or self.m < 0:
            raise FieldSpecError("RationalPhase exponent m must be a non-negative int")
        object.__setattr__(self, "m", int(self.m))

    def _values(self, z):
        w = np.asarray(z, dtype=complex) - self.domain.center
        with np.errstate(invalid="ignore", divide="ignore"):
            out = self.k * (np.conj(w) / w) ** self.m
        out[w == 0] = np.nan
        return out

    def own_phase_points(self):
        return (self.domain.center,) if self.m else ()

    def payload(self):
        return {"k": self.k, "m": self.m}


@dataclass(frozen=True)
class Piece:
    disk: Disk
    field: Field


@dataclass(frozen=True, eq=False)
class Piecewise(Field):
    """``background`` everywhere except on the disks of ``pieces``.

    Piece membership is the open disk, so points on a piece circle take the
    background value.
    """

    domain: Disk
    background: Field
    pieces: tuple

    kind: ClassVar[str] = "Piecewise"

    def __post_init__(self):
        pieces = tuple(p if isinstance(p, Piece) else Piece(*p) for p in self.pieces)
        object.__setattr__(self, "pieces", pieces)
        if not region_contains(self.background.domain, self.domain):
            raise FieldSpecError("Piecewise background must be defined on the whole domain")
        for i, p in enumerate(pieces):
            if not p.disk.inside(self.domain, strict=True):
                raise FieldSpecError(f"piece {i} is not strictly inside the domain")
            if not region_contains(p.field.domain, p.disk):
                raise FieldSpecError(f"piece {i} field is not defined on its disk")
            for j in range(i):
                if not p.disk.disjoint(pieces[j].disk):
                    raise FieldSpecError(f"pieces {j} and {i} overlap")

    def _values(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        free = np.ones(z.shape, dtype=bool)
        for p in self.pieces:
            mask = free & (np.abs(z - p.disk.center) < p.disk.radius)
            if mask.any():
                out[mask] = p.field._values(z[mask])
                free &= ~mask
        if free.any():
            out[free] = self.background._values(z[free])
        return out

    def children(self):
        return (self.background,) + tuple(p.field for p in self.pieces)

    def own_circles(self):
        return tuple(p.disk for p in self.pieces)

    def payload(self):
        return {
            "background": self.background.to_doc(),
            "pieces": [{"disk": p.disk.as_dict(), "field": p.field.to_doc()}
                       for p in self.pieces],
        }


@dataclass(frozen=True, eq=False)
class Combination(Field):
    """``sum coef_i * field_i`` on a common domain."""

    domain: Disk
    terms: tuple

    kind: ClassVar[str] = "Combination"

    def __post_init__(self):
        terms = tuple((complex(c), f) for c, f in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise FieldSpecError("Combination needs at least one term")
        for c, f in terms:
            if not region_contains(f.domain, self.domain):
                raise FieldSpecError("Combination term not defined on the whole domain")

    def _values(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for c, f in self.terms:
            out = out + c * f._values(z)
        return out

    def children(self):
        return tuple(f for _, f in self.terms)

    def payload(self):
        return {"terms": [{"coef": _cpair(c), "field": f.to_doc()} for c, f in self.terms]}


def zero(domain: Disk | None = None) -> Constant:
    return Constant(domain or Disk.unit(), 0.0)


def restrict(field: Field, disk: Disk) -> Field:
    """The same field viewed on a smaller domain."""
    if not region_contains(field.domain, disk):
        raise DomainError("restriction disk leaves the field's domain")
    return Combination(disk, ((1.0, field),))


# ---------------------------------------------------------------- traversal

def _walk(field: Field):
    seen = set()
    stack = [field]
    while stack:
        f = stack.pop()
        if id(f) in seen:
            continue
        seen.add(id(f))
        yield f
        stack.extend(reversed(f.children()))


def circles(field: Field) -> list:
    """All internal discontinuity circles (piece boundaries, Laurent holes)."""
    out = {}
    for f in _walk(field):
        for d in f.own_circles():
            out.setdefault((d.center, d.radius), d)
    return list(out.values())


def piece_disks(field: Field) -> list:
    out = {}
    for f in _walk(field):
        if isinstance(f, Piecewise):
            for p in f.pieces:
                out.setdefault((p.disk.center, p.disk.radius), p.disk)
    return list(out.values())


def poles(field: Field) -> list:
    return list(dict.fromkeys(p for f in _walk(field) for p in f.own_poles()))


def phase_points(field: Field) -> list:
    return list(dict.fromkeys(p for f in _walk(field) for p in f.own_phase_points()))


def depth(field: Field) -> int:
    kids = field.children()
    return 1 + max((depth(k) for k in kids), default=0)


# ------------------------------------------------------------- evaluation

def evaluate(field: Field, point):
    """Value of ``field`` at ``point`` (scalar or array).

    Raises
    ------
    DomainError
        If a point lies outside ``field.domain``.
    SingularPointError
        If a point is an excluded zero / phase singularity.
    """
    scalar = np.ndim(point) == 0
    z = np.atleast_1d(np.asarray(point, dtype=complex))
    d = np.abs(z - field.domain.center)
    if np.any(d > field.domain.radius * (1 + REL_EPS)):
        raise DomainError("point outside the field's domain",
                          points=[_cpair(p) for p in z[d > field.domain.radius][:5]])
    vals = field._values(z)
    bad = np.isnan(vals)
    if bad.any():
        raise SingularPointError("evaluation at an excluded point",
                                 points=[_cpair(p) for p in z[bad][:5]])
    return complex(vals[0]) if scalar else vals


def ess_sup(field: Field, grid) -> float:
    """Max of ``|field|`` over the grid nodes.

    A grid estimate of the essential sup from below; it only sees pieces the
    grid actually samples (see :func:`adapted_grid`).
    """
    vals = evaluate(field, grid.nodes)
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def adapted_grid(field: Field, grid: DiskGrid, region: Disk | None = None) -> NodeSet:
    """Nodes of ``grid`` over the domain plus a same-resolution grid on every piece."""
    region = region or field.domain
    parts = [grid.on(region)]
    for d in piece_disks(field):
        if d.inside(region, strict=False):
            parts.append(grid.on(d))
    return NodeSet.union(*parts)


# ---------------------------------------------------------------- documents

def _complex(v, what) -> complex:
    if isinstance(v, (int, float)):
        return complex(float(v), 0.0)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise FieldSpecError(f"{what}: expected [re, im], got {v!r}")


def field_from_doc(doc) -> Field:
    """Build a field from its JSON document (see module docstring for kinds)."""
    if not isinstance(doc, dict):
        raise FieldSpecError("field document must be an object")
    if "kind" not in doc and "field" in doc:
        return field_from_doc(doc["field"])
    try:
        kind = doc["kind"]
        domain = Disk.from_dict(doc["domain"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FieldSpecError(f"field document needs kind and domain: {exc}") from exc
    try:
        if kind == "Constant":
            return Constant(domain, _complex(doc["value"], "value"))
        if kind == "PolyZZbar":
            coeffs = []
            for e in doc["coefficients"]:
                if len(e) != 4:
                    raise FieldSpecError(f"coefficient entry must be [j, k, re, im]: {e!r}")
                coeffs.append((e[0], e[1], complex(float(e[2]), float(e[3]))))
            return PolyZZbar(domain, tuple(coeffs))
        if kind == "MomentLaurent":
            return MomentLaurent(domain, tuple(_complex(c, "moment") for c in doc["moments"]),
                                 float(doc["inner_radius"]), int(doc.get("sign", -1)))
        if kind == "TeichForm":
            return TeichForm(domain, tuple(_complex(b, "psi") for b in doc["psi"]),
                             float(doc["k"]))
        if kind == "RationalPhase":
            return RationalPhase(domain, float(doc["k"]), int(doc["m"]))
        if kind == "Piecewise":
            pieces = tuple(Piece(Disk.from_dict(p["disk"]), field_from_doc(p["field"]))
                           for p in doc["pieces"])
            return Piecewise(domain, field_from_doc(doc["background"]), pieces)
        if kind == "Combination":
            return Combination(domain, tuple((_complex(t["coef"], "coef"),
                                              field_from_doc(t["field"]))
                                             for t in doc["terms"]))
    except FieldSpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FieldSpecError(f"bad {kind} payload: {exc!r}") from exc
    raise FieldSpecError(f"unknown field kind {kind!r}")
