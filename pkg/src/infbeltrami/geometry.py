"""Disks and annuli in the complex plane."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import GeometryError

# relative slack used by every containment test
REL_EPS = 1e-12


@dataclass(frozen=True)
class Disk:
    """Open round disk ``{z : |z - center| < radius}``."""

    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise GeometryError(f"disk radius must be positive, got {self.radius!r}")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    def contains_point(self, z, closed=True) -> bool:
        d = abs(complex(z) - self.center)
        if closed:
            return d <= self.radius * (1 + REL_EPS)
        return d < self.radius

    def inside(self, parent: Disk, strict=True) -> bool:
        """Whether the closure of ``self`` lies in ``parent``."""
        d = abs(self.center - parent.center) + self.radius
        if strict:
            return d < parent.radius
        return d <= parent.radius * (1 + REL_EPS)

    def disjoint(self, other: Disk) -> bool:
        gap = abs(self.center - other.center) - self.radius - other.radius
        return gap >= -REL_EPS * (self.radius + other.radius)

    def distance_to_boundary(self, z) -> float:
        """Distance from an interior point to the circle ``|z - c| = R``."""
        return self.radius - abs(complex(z) - self.center)

    def outer(self) -> Disk:
        return self

    def as_dict(self) -> dict:
        return {"cx": self.center.real, "cy": self.center.imag, "r": self.radius}

    @classmethod
    def from_dict(cls, d) -> Disk:
        return cls(complex(float(d["cx"]), float(d["cy"])), float(d["r"]))

    @classmethod
    def unit(cls) -> Disk:
        return cls(0j, 1.0)


@dataclass(frozen=True)
class Annulus:
    """Open annulus ``{z : inner < |z - center| < outer}``."""

    center: complex
    inner: float
    outer_radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not (0 <= self.inner < self.outer_radius):
            raise GeometryError(
                f"annulus needs 0 <= inner < outer, got {self.inner}, {self.outer_radius}"
            )

    @property
    def radius(self) -> float:
        return self.outer_radius

    @property
    def area(self) -> float:
        return math.pi * (self.outer_radius**2 - self.inner**2)

    def contains_point(self, z, closed=True) -> bool:
        d = abs(complex(z) - self.center)
        return self.inner <= d <= self.outer_radius

    def outer(self) -> Disk:
        return Disk(self.center, self.outer_radius)

    def as_dict(self) -> dict:
        return {
            "cx": self.center.real,
            "cy": self.center.imag,
            "r_inner": self.inner,
            "r": self.outer_radius,
        }


def relation(piece: Disk, region) -> str:
    """Classify ``piece`` against ``region``.

    Returns one of ``"inside"`` (piece within region), ``"contains"``
    (region within piece), ``"disjoint"`` or ``"crossing"``.
    """
    d = abs(piece.center - region.center)
    rho = piece.radius
    outer = region.outer_radius if isinstance(region, Annulus) else region.radius
    inner = region.inner if isinstance(region, Annulus) else 0.0
    slack = REL_EPS * (outer + rho)
    if d + rho <= outer + slack and (inner == 0.0 or d - rho >= inner - slack):
        return "inside"
    if d + outer <= rho + slack:
        return "contains"
    if d >= outer + rho - slack or (inner > 0.0 and d + rho <= inner + slack):
        return "disjoint"
    return "crossing"


def region_contains(outer: Disk, region) -> bool:
    """Whether ``region`` (disk or annulus) lies in the closed disk ``outer``."""
    r = region.outer_radius if isinstance(region, Annulus) else region.radius
    return abs(region.center - outer.center) + r <= outer.radius * (1 + REL_EPS)


def point_in_region(z: complex, region) -> bool:
    d = abs(z - region.center)
    if isinstance(region, Annulus):
        return region.inner < d < region.outer_radius
    return d < region.radius
