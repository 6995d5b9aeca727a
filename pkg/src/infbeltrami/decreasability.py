"""Domination checks, strong-decrease witnesses and the greedy zeroing run.

The greedy run is a finite prefix of the disk-zeroing sequence: at every
step a decrease oracle proposes a witness ``(eta, G, delta)`` for the current
field ``chi``; ``eta`` is localised to zero on a small disk inside ``G`` and
the result becomes the next ``chi``. Everything is checked on grids, so all
verdicts hold "at grid scale" only.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Protocol

import numpy as np

from .classcheck import verify_class_equality
from .errors import (ConstructionInvalidError, DominationFailure, PreconditionError,
                     StrategyContractError, ValidationError)
from .fields import (Combination, Field, adapted_grid, circles, ess_sup, evaluate,
                     field_from_doc, phase_points, poles, zero)
from .geometry import Disk
from .grid import DiskGrid, NodeSet
from .quadrature import PairingReport, pairing_monomials
from .trivial import construct_trivial, localize, random_poly

log = logging.getLogger(__name__)

DOMINATION_SLACK = 1e-12
SEARCH_GRID = (6, 16)


# ------------------------------------------------------------------ checks

@dataclass(frozen=True)
class DominationReport:
    ok: bool
    min_margin: float
    max_margin: float
    n_nodes: int
    offending: tuple = ()

    def __bool__(self):
        return self.ok

    def to_dict(self) -> dict:
        return {"dominated": self.ok, "min_margin": self.min_margin,
                "max_margin": self.max_margin, "n_nodes": self.n_nodes,
                "offending": [[z.real, z.imag] for z in self.offending]}


def check_domination(nu: Field, mu: Field, grid: DiskGrid | None = None,
                     slack: float = DOMINATION_SLACK) -> DominationReport:
    """Whether ``|nu| <= |mu| + slack`` at every node.

    Nodes are the grid over the common domain plus a grid on every piece of
    either field; margins are ``|mu| - |nu|``.
    """
    grid = grid or DiskGrid()
    nodes = NodeSet.union(adapted_grid(nu, grid, mu.domain), adapted_grid(mu, grid))
    margin = np.abs(evaluate(mu, nodes.nodes)) - np.abs(evaluate(nu, nodes.nodes))
    bad = margin < -slack
    return DominationReport(not bad.any(), float(margin.min()), float(margin.max()),
                            int(margin.size), tuple(complex(z) for z in nodes.nodes[bad][:10]))


@dataclass(frozen=True, eq=False)
class DecreaseWitness:
    """``eta`` in the class of ``chi`` with ``|eta| <= |chi|`` and ``|eta| <= |chi| - delta`` on ``disk``."""

    eta: Field
    disk: Disk
    delta: float

    def to_dict(self, with_field=True) -> dict:
        d = {"disk": self.disk.as_dict(), "delta": self.delta}
        if with_field:
            d["eta"] = self.eta.to_doc()
        return d

    @classmethod
    def from_doc(cls, doc) -> DecreaseWitness:
        try:
            return cls(field_from_doc(doc["eta"]), Disk.from_dict(doc["disk"]), float(doc["delta"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"witness document needs eta, disk and delta: {exc!r}") from exc


@dataclass(frozen=True)
class WitnessCheck:
    ok: bool
    in_class: bool
    condition_a: bool
    condition_b: bool
    class_report: PairingReport | None
    margin_a: float
    margin_b: float
    reason: str = ""

    def __bool__(self):
        return self.ok

    def to_dict(self) -> dict:
        return {
            "valid": self.ok, "in_class": self.in_class, "condition_a": self.condition_a,
            "condition_b": self.condition_b, "min_margin_a": self.margin_a,
            "min_margin_b": self.margin_b, "reason": self.reason,
            "pairing": self.class_report.to_dict() if self.class_report else None,
        }


def verify_strong_witness(chi: Field, w: DecreaseWitness, N: int, grid: DiskGrid | None = None,
                          tol: float = 1e-8) -> WitnessCheck:
    """Check (i) class membership, (ii) domination on the domain, (iii) the ``delta`` margin on ``G``."""
    grid = grid or DiskGrid()
    if not w.disk.inside(chi.domain, strict=True):
        raise PreconditionError("witness disk must lie strictly inside the domain")
    if not w.delta > 0:
        return WitnessCheck(False, False, False, False, None, math.nan, math.nan,
                            "delta must be positive")
    cls = verify_class_equality(w.eta, chi, N, grid, tol)
    dom = check_domination(w.eta, chi, grid)
    gnodes = grid.on(w.disk).nodes
    margin_b = np.abs(evaluate(chi, gnodes)) - np.abs(evaluate(w.eta, gnodes)) - w.delta
    b_ok = bool(np.all(margin_b >= -DOMINATION_SLACK))
    reasons = []
    if not cls:
        reasons.append(f"eta not in the class (max pairing {cls.report.max_abs:.3e} > {tol:.1e})")
    if not dom:
        reasons.append("condition (A) fails")
    if not b_ok:
        reasons.append("condition (B) fails on G")
    ok = bool(cls) and bool(dom) and b_ok
    return WitnessCheck(ok, bool(cls), bool(dom), b_ok, cls.report, dom.min_margin,
                        float(margin_b.min()), "; ".join(reasons))


# ----------------------------------------------------------------- zeroing

class Zeroing(NamedTuple):
    field: Field
    zero_disk: Disk
    host: Disk
    witness_disk: Disk
    retries: int


def _oscillation(chi: Field, disk: Disk, grid: DiskGrid) -> float:
    a = np.abs(evaluate(chi, grid.on(disk).nodes))
    return float(a.max() - a.min())


def zero_on_disk(chi: Field, w: DecreaseWitness, K: int, grid: DiskGrid | None = None,
                 tol: float = 1e-8, max_retries: int = 4) -> Zeroing:
    """Make the witness vanish on a small disk inside ``G``; return the glued field.

    ``eta`` is localised on ``G`` with ``alpha = 0`` and ``eps = delta / 2``;
    the result equals ``eta`` off the host disk. If ``|chi'| <= |chi|`` fails
    at some node, ``G`` is shrunk about its center until ``|chi|`` varies by
    less than ``delta / 4`` on it, and the step is retried.

    Raises
    ------
    PreconditionError
        If the witness does not verify.
    DominationFailure
        If domination still fails after ``max_retries`` shrinks.
    ConstructionInvalidError
        If the result leaves the class or does not vanish on the zero disk.
    """
    grid = grid or DiskGrid()
    check = verify_strong_witness(chi, w, K, grid, tol)
    if not check:
        raise PreconditionError(f"invalid witness: {check.reason}", check=check.to_dict())
    G = w.disk
    alpha = zero(chi.domain)
    for attempt in range(max_retries + 1):
        loc = localize(w.eta, alpha, G.center, w.delta / 2, K, grid, ambient=G)
        dom = check_domination(loc.field, chi, grid)
        if dom:
            break
        log.info("domination failed on %s; shrinking witness disk", G)
        G = Disk(G.center, G.radius / 2)
        while _oscillation(chi, G, grid) >= w.delta / 4 and G.radius > 1e-6:
            G = Disk(G.center, G.radius / 2)
    else:
        raise DominationFailure("domination could not be restored",
                                offending=[[z.real, z.imag] for z in dom.offending],
                                min_margin=dom.min_margin)
    chi_p = loc.field
    cls = verify_class_equality(chi_p, chi, K, grid, tol)
    if not cls:
        raise ConstructionInvalidError("zeroed field left the class",
                                       max_abs=cls.report.max_abs)
    if np.any(evaluate(chi_p, grid.on(loc.inner).nodes) != 0):
        raise ConstructionInvalidError("zeroed field does not vanish on its zero disk")
    return Zeroing(chi_p, loc.inner, loc.host, G, attempt)


# ---------------------------------------------------------------- search

def _seam_distance(centers: np.ndarray, fields, ambient: Disk) -> np.ndarray:
    dist = ambient.radius - np.abs(centers - ambient.center)
    for f in fields:
        for c in circles(f):
            dist = np.minimum(dist, np.abs(np.abs(centers - c.center) - c.radius))
        for p in poles(f) + phase_points(f):
            dist = np.minimum(dist, np.abs(centers - p))
    return dist


def search_disks(fields, ambient: Disk, predicate, forbidden=(), n_r: int = 12, n_a: int = 24,
                 shrink_levels: int = 3, safety: float = 0.95) -> Disk | None:
    """Largest lattice-centered disk that avoids every seam and passes ``predicate``.

    Centers form a staggered polar lattice in ``ambient``. Each center gets
    the largest radius not crossing the ambient circle, a piece circle, a
    singular point or a forbidden disk (times ``safety``), plus halvings of
    it. Candidates are tried largest first, ties in lattice order.
    """
    i = np.arange(n_r)
    rad = (i + 0.5) / n_r * ambient.radius
    centers = np.concatenate([
        ambient.center + rad[k] * np.exp(2j * np.pi * (np.arange(n_a) + 0.5 * (k % 2)) / n_a)
        for k in range(n_r)])
    reach = _seam_distance(centers, fields, ambient)
    for b in forbidden:
        reach = np.minimum(reach, np.abs(centers - b.center) - b.radius)
    reach = safety * reach
    cands = []
    for idx, (c, R) in enumerate(zip(centers, reach)):
        for s in range(shrink_levels + 1):
            r = R / 2**s
            if r > 1e-9 * ambient.radius:
                cands.append((-r, idx, s, complex(c)))
    cands.sort()
    for negr, _, _, c in cands:
        disk = Disk(c, -negr)
        if predicate(disk):
            return disk
    return None


def _search_grid(disk: Disk) -> DiskGrid:
    return DiskGrid.over(disk, *SEARCH_GRID)


# ---------------------------------------------------------------- oracles

class DecreaseOracle(Protocol):
    name: str

    def propose(self, chi: Field, forbidden: tuple, K: int, grid: DiskGrid,
                tol: float) -> DecreaseWitness | None:
        ...


@dataclass
class ZeroOracle:
    """Witness ``eta = retain * chi`` for a trivial ``chi``.

    ``eta`` stays in the class only when ``chi`` pairs to zero, so the oracle
    declines otherwise. ``G`` is the largest searched disk on which
    ``|chi| >= 2 * delta0``; then ``delta = (1 - retain) * min_G |chi|``.
    ``retain = 0`` gives the bare ``eta = 0`` witness, after which nothing
    is left to decrease.
    """

    delta0: float = 1e-3
    retain: float = 0.5
    name: str = "zero"
    last_diagnostic: str = ""

    def propose(self, chi, forbidden, K, grid, tol):
        rep = pairing_monomials(chi, K, grid)
        if rep.max_abs > tol:
            self.last_diagnostic = f"chi is not trivial (max pairing {rep.max_abs:.3e})"
            return None
        floor = 2.0 * self.delta0

        def ok(disk):
            return np.abs(evaluate(chi, _search_grid(disk).nodes)).min() >= floor

        G = search_disks([chi], chi.domain, ok, forbidden)
        if G is None:
            self.last_diagnostic = "no disk with |chi| >= 2*delta0 away from seams"
            return None
        m = float(np.abs(evaluate(chi, grid.on(G).nodes)).min())
        delta = (1.0 - self.retain) * m
        if not delta > 0:
            self.last_diagnostic = "zero margin on the chosen disk"
            return None
        eta = Combination(chi.domain, ((self.retain, chi),))
        return DecreaseWitness(eta, G, delta)


@dataclass
class FileOracle:
    """Witness read from a document ``{"eta": field, "disk": {...}, "delta": x}``."""

    source: str | Path | dict
    name: str = "file"
    last_diagnostic: str = ""

    def _load(self) -> DecreaseWitness:
        doc = self.source
        if not isinstance(doc, dict):
            doc = json.loads(Path(doc).read_text())
        return DecreaseWitness.from_doc(doc)

    def propose(self, chi, forbidden, K, grid, tol):
        w = self._load()
        if not w.disk.inside(chi.domain, strict=True):
            self.last_diagnostic = "witness disk is not strictly inside the domain"
            return None
        check = verify_strong_witness(chi, w, K, grid, tol)
        if not check:
            self.last_diagnostic = check.reason
            return None
        return w


@dataclass
class PerturbationOracle:
    """Try ``eta = chi - tau`` for seeded small trivial fields ``tau``.

    Each ``tau`` is the trivial extension of a random low-degree polynomial
    (coefficients scaled by ``scale``) with an inner radius cycling through
    ``radii``. Extra inner fields may be supplied through ``inner_fields``;
    they are tried first.
    """

    samples: int = 16
    seed: int = 0
    scale: float = 0.05
    degree: int = 2
    radii: tuple = (0.1, 0.3, 0.5)
    inner_fields: tuple = ()
    name: str = "perturb"
    last_diagnostic: str = ""
    tried: int = field(default=0, init=False)

    def _inners(self, domain):
        yield from self.inner_fields
        rng = np.random.default_rng(self.seed)
        for _ in range(self.samples):
            yield self.scale * random_poly(rng, self.degree, domain)

    def propose(self, chi, forbidden, K, grid, tol):
        self.tried = 0
        for i, nu in enumerate(self._inners(chi.domain)):
            self.tried += 1
            r = self.radii[i % len(self.radii)]
            tau = construct_trivial(nu, r, K, grid).field
            eta = Combination(chi.domain, ((1.0, chi), (-1.0, tau)))
            if not check_domination(eta, chi, grid):
                continue

            def ok(disk, eta=eta):
                nodes = _search_grid(disk).nodes
                gap = np.abs(evaluate(chi, nodes)) - np.abs(evaluate(eta, nodes))
                return gap.min() > 1e-9

            G = search_disks([chi, eta], chi.domain, ok, forbidden)
            if G is None:
                continue
            nodes = grid.on(G).nodes
            delta = float((np.abs(evaluate(chi, nodes)) - np.abs(evaluate(eta, nodes))).min())
            if not delta > 0:
                continue
            w = DecreaseWitness(eta, G, delta)
            if verify_strong_witness(chi, w, K, grid, tol):
                return w
        self.last_diagnostic = f"no sample out of {self.tried} gives a valid witness"
        return None


def make_oracle(name: str, **kw) -> DecreaseOracle:
    if name == "zero":
        return ZeroOracle(**kw)
    if name == "file":
        return FileOracle(**kw)
    if name == "perturb":
        return PerturbationOracle(**kw)
    raise ValidationError(f"unknown strategy {name!r}")


# ----------------------------------------------------------------- greedy

@dataclass(frozen=True, eq=False)
class GreedyRecord:
    """State after one greedy step."""

    step: int
    chi: Field
    disk: Disk
    rho_estimate: float
    pairing: PairingReport
    ess_sup: float
    disks: tuple
    witness: DecreaseWitness
    pairing_drift: float

    def to_dict(self, with_field=True) -> dict:
        d = {
            "step": self.step,
            "disk": self.disk.as_dict(),
            "rho_estimate": self.rho_estimate,
            "ess_sup": self.ess_sup,
            "pairing": self.pairing.to_dict(),
            "pairing_drift": self.pairing_drift,
            "disks": [b.as_dict() for b in self.disks],
            "witness": self.witness.to_dict(with_field=False),
        }
        if with_field:
            d["chi"] = self.chi.to_doc()
        return d


@dataclass(frozen=True)
class GreedyRun:
    records: list
    verdict: str
    initial_pairing: PairingReport
    initial_ess_sup: float

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def fields(self) -> list:
        return [r.chi for r in self.records]

    def to_dict(self, with_fields=True) -> dict:
        return {
            "steps": len(self.records),
            "verdict": self.verdict,
            "initial": {"pairing": self.initial_pairing.to_dict(),
                        "ess_sup": self.initial_ess_sup},
            "records": [r.to_dict(with_fields) for r in self.records],
        }


def greedy_run(chi0: Field, strategy: DecreaseOracle, max_steps: int, K: int,
               grid: DiskGrid | None = None, tol: float = 1e-8) -> GreedyRun:
    """Run at most ``max_steps`` zeroing steps from ``chi0``.

    Each record keeps the zero disk at half the achieved radius (the
    ``r_n = rho_n / 2`` rule), the pairing vector of the new field and its
    grid sup. The run stops early when the strategy finds no witness; the
    final field is then reported weakly non-decreasable at grid scale.

    Raises
    ------
    StrategyContractError
        If the strategy returns a witness touching an earlier zero disk or
        failing verification.
    """
    grid = grid or DiskGrid()
    if max_steps < 0:
        raise ValidationError("max_steps must be >= 0")
    dom_grid = grid.on(chi0.domain)
    base = pairing_monomials(chi0, K, grid)
    base_vec = np.array(base.pairings)
    chi = chi0
    disks: list = []
    records = []
    verdict = "max steps reached"
    for n in range(max_steps):
        w = strategy.propose(chi, tuple(disks), K, grid, tol)
        if w is None:
            verdict = (f"weakly non-decreasable at grid scale (degree {K}, "
                       f"grid {grid.n_rad}x{grid.n_ang})")
            diag = getattr(strategy, "last_diagnostic", "")
            if diag:
                verdict += f": {diag}"
            break
        for b in disks:
            if not w.disk.disjoint(b):
                raise StrategyContractError("witness disk overlaps an earlier zero disk",
                                            disk=w.disk.as_dict(), forbidden=b.as_dict())
        check = verify_strong_witness(chi, w, K, grid, tol)
        if not check:
            raise StrategyContractError(f"strategy returned an invalid witness: {check.reason}")
        z = zero_on_disk(chi, w, K, grid, tol)
        rho = z.zero_disk.radius
        disk = Disk(z.zero_disk.center, rho / 2)
        disks.append(disk)
        chi = z.field
        rep = pairing_monomials(chi, K, grid)
        drift = float(np.max(np.abs(np.array(rep.pairings) - base_vec)))
        records.append(GreedyRecord(n, chi, disk, rho, rep, ess_sup(chi, dom_grid),
                                    tuple(disks), w, drift))
        log.info("greedy step %d: zero disk %s, sup %.6g", n, disk, records[-1].ess_sup)
    if max_steps == 0:
        verdict = "no steps requested"
    return GreedyRun(records, verdict, base, ess_sup(chi0, dom_grid))
