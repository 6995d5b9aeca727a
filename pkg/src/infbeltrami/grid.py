"""Polar quadrature grids over disks and annuli.

Radial nodes are Gauss-Legendre on ``[inner, outer]`` with the Jacobian
``rho`` folded into the weights; angles are uniform. With ``n_rad`` radial
nodes the rule integrates ``rho**p`` exactly for ``p <= 2*n_rad - 2`` and the
angular rule is exact for ``exp(i*m*theta)`` with ``|m| < n_ang``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import ValidationError
from .geometry import Annulus, Disk

GOLDEN_FRACTION = (math.sqrt(5.0) - 1.0) / 2.0


@lru_cache(maxsize=64)
def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class DiskGrid:
    """Tensor-product polar grid.

    Parameters
    ----------
    center : complex
        Center of the disk or annulus.
    radius : float
        Outer radius.
    n_rad, n_ang : int
        Number of radial Gauss nodes and of uniform angles.
    inner : float
        Inner radius, 0 for a full disk.
    offset : float
        Angular offset of the first ray, in units of the angular spacing.
    """

    center: complex = 0j
    radius: float = 1.0
    n_rad: int = 64
    n_ang: int = 256
    inner: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if self.n_rad < 1 or self.n_ang < 1:
            raise ValidationError("grid needs n_rad >= 1 and n_ang >= 1")
        if not (0 <= self.inner < self.radius):
            raise ValidationError("grid needs 0 <= inner < radius")

    @classmethod
    def over(cls, region, n_rad=64, n_ang=256, offset=0.0) -> DiskGrid:
        if isinstance(region, Annulus):
            return cls(region.center, region.outer_radius, n_rad, n_ang, region.inner, offset)
        return cls(region.center, region.radius, n_rad, n_ang, 0.0, offset)

    def on(self, region, offset=None) -> DiskGrid:
        """Grid with this resolution over another region."""
        return DiskGrid.over(region, self.n_rad, self.n_ang,
                             self.offset if offset is None else offset)

    def with_resolution(self, n_rad: int, n_ang: int) -> DiskGrid:
        return DiskGrid(self.center, self.radius, n_rad, n_ang, self.inner, self.offset)

    @property
    def region(self):
        if self.inner > 0:
            return Annulus(self.center, self.inner, self.radius)
        return Disk(self.center, self.radius)

    @cached_property
    def radial(self):
        x, w = _gauss_legendre(self.n_rad)
        half = 0.5 * (self.radius - self.inner)
        rho = half * x + 0.5 * (self.radius + self.inner)
        return rho, half * w * rho

    @cached_property
    def angles(self):
        return 2.0 * np.pi * (np.arange(self.n_ang) + self.offset) / self.n_ang

    @cached_property
    def nodes(self) -> np.ndarray:
        # radial-major ordering: all angles of the first ring, then the next
        rho, _ = self.radial
        ring = np.exp(1j * self.angles)
        pts = self.center + (rho[:, None] * ring[None, :])
        pts = pts.ravel()
        pts.setflags(write=False)
        return pts

    @cached_property
    def weights(self) -> np.ndarray:
        _, wr = self.radial
        w = np.repeat(wr * (2.0 * np.pi / self.n_ang), self.n_ang)
        w.setflags(write=False)
        return w

    def rotated(self) -> DiskGrid:
        """Same grid with the rays turned by an irrational fraction of a step."""
        return DiskGrid(self.center, self.radius, self.n_rad, self.n_ang, self.inner,
                        (self.offset + GOLDEN_FRACTION) % 1.0)

    def descriptor(self) -> dict:
        return {
            "cx": self.center.real,
            "cy": self.center.imag,
            "r": self.radius,
            "r_inner": self.inner,
            "n_rad": self.n_rad,
            "n_ang": self.n_ang,
            "offset": self.offset,
        }


@dataclass(frozen=True, eq=False)
class NodeSet:
    """A bag of sample points; used where only node locations matter."""

    nodes: np.ndarray
    parts: tuple = ()

    def descriptor(self) -> dict:
        return {"kind": "composite", "n_nodes": int(self.nodes.size),
                "parts": [p.descriptor() for p in self.parts]}

    @classmethod
    def union(cls, *grids) -> NodeSet:
        parts = []
        for g in grids:
            parts.extend(g.parts if isinstance(g, NodeSet) else [g])
        return cls(np.concatenate([g.nodes for g in parts]), tuple(parts))
