"""Command line front end.

Every subcommand reads field documents, runs one operation and writes a
JSON report (``--out`` or stdout) that embeds the run configuration and the
grid. Exit codes: 0 success, 2 validation failure (bad input or a failed
check), 3 construction invalid, 4 accuracy failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classcheck import norm_lower_bound, verify_class_equality
from .decreasability import (DecreaseWitness, check_domination, greedy_run, make_oracle,
                             zero_on_disk)
from .errors import AccuracyError, BeltramiError, ConstructionInvalidError, ValidationError
from .fields import adapted_grid, ess_sup, evaluate, field_from_doc
from .geometry import Annulus, Disk
from .grid import DiskGrid
from .quadrature import pairing_monomials
from .render import render_ppm
from .serialize import dumps, load_json, write_atomic
from .trivial import construct_trivial, extension_bound, localize, sign_calibration

log = logging.getLogger("infbeltrami")

EXIT_OK, EXIT_VALIDATION, EXIT_CONSTRUCTION, EXIT_ACCURACY = 0, 2, 3, 4


@dataclass
class RunConfig:
    subcommand: str
    inputs: dict = field(default_factory=dict)
    n_rad: int = 64
    n_ang: int = 256
    degree: int = 8
    tol: float = 1e-8
    eps: float | None = None
    delta: float | None = None
    seed: int = 0
    max_steps: int | None = None
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.n_rad < 1 or self.n_ang < 1:
            raise ValidationError("grid sizes must be positive")
        if self.degree < 0:
            raise ValidationError("degree must be >= 0")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        for name in ("eps", "delta"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValidationError(f"{name} must be positive")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValidationError("max-steps must be >= 0")

    @property
    def grid(self) -> DiskGrid:
        return DiskGrid(n_rad=self.n_rad, n_ang=self.n_ang)

    def to_dict(self) -> dict:
        return asdict(self)


class CheckFailed(Exception):
    """A verification ran cleanly but its verdict is negative."""

    def __init__(self, report):
        super().__init__("check failed")
        self.report = report


def _load_field(path):
    try:
        doc = load_json(path)
    except FileNotFoundError as exc:
        raise ValidationError(f"no such file: {path}") from exc
    except ValueError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    return field_from_doc(doc)


def _point(text: str) -> complex:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"expected x,y but got {text!r}") from exc
    return complex(x, y)


def _disk(text: str) -> Disk:
    try:
        x, y, r = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"expected x,y,r but got {text!r}") from exc
    return Disk(complex(x, y), r)


def _header(cfg: RunConfig) -> dict:
    return {"command": cfg.subcommand, "version": __version__, "config": cfg.to_dict(),
            "grid": cfg.grid.descriptor()}


# ------------------------------------------------------------- subcommands

def cmd_construct_trivial(cfg: RunConfig) -> dict:
    nu = _load_field(cfg.inputs["input"])
    grid = cfg.grid
    ext = construct_trivial(nu, cfg.extra["radius"], cfg.degree, grid, tol=cfg.extra["pair_tol"])
    rep = pairing_monomials(ext.field, cfg.degree, grid)
    nu_sup = ess_sup(nu, grid.on(ext.inner_disk))
    beta_sup = ess_sup(ext.beta, grid.on(ext.annulus))
    return {
        **_header(cfg),
        "sign": ext.sign,
        "pairing": rep.to_dict(),
        "checks": {"trivial": rep.max_abs <= cfg.extra["pair_tol"],
                   "nu_sup": nu_sup, "beta_sup": beta_sup,
                   "beta_bound": extension_bound(ext, nu_sup)},
        "field": ext.to_doc(),
    }


def cmd_localize(cfg: RunConfig) -> dict:
    mu = _load_field(cfg.inputs["input"])
    alpha = _load_field(cfg.inputs["alpha"])
    grid = cfg.grid
    zeta = _point(cfg.extra["center"])
    loc = localize(mu, alpha, zeta, cfg.eps, cfg.degree, grid)
    cls = verify_class_equality(loc.field, mu, cfg.degree, grid, cfg.tol)
    outside = grid.on(Annulus(loc.inner.center, loc.inner.radius, loc.host.radius))
    sup_out = max(ess_sup(loc.field, grid.on(mu.domain)), ess_sup(loc.field, outside))
    inner_vals = evaluate(loc.field, grid.on(loc.inner).nodes)
    agree = bool(np.array_equal(inner_vals, evaluate(alpha, grid.on(loc.inner).nodes)))
    report = {
        **_header(cfg),
        "sign": loc.extension.sign if loc.extension else sign_calibration(grid),
        "inner_disk": loc.inner.as_dict(),
        "host_disk": loc.host.as_dict(),
        "checks": {"in_class": bool(cls), "equals_alpha_on_inner": agree,
                   "ess_sup_outside": sup_out,
                   "ess_sup_mu": ess_sup(mu, adapted_grid(mu, grid))},
        "pairing_difference": cls.report.to_dict(),
        "field": loc.field.to_doc(),
    }
    if not (cls and agree):
        raise ConstructionInvalidError("localisation post-checks failed", report=report)
    return report


def cmd_verify_class(cfg: RunConfig) -> dict:
    a = _load_field(cfg.inputs["a"])
    b = _load_field(cfg.inputs["b"])
    chk = verify_class_equality(a, b, cfg.degree, cfg.grid, cfg.tol)
    report = {**_header(cfg), **chk.to_dict()}
    if not chk:
        raise CheckFailed(report)
    return report


def cmd_norm_bound(cfg: RunConfig) -> dict:
    mu = _load_field(cfg.inputs["input"])
    grid = cfg.grid
    est = norm_lower_bound(mu, cfg.degree, grid, cfg.extra["restarts"], cfg.extra["iters"],
                           cfg.seed)
    return {**_header(cfg), **est.to_dict(),
            "ess_sup_upper": ess_sup(mu, adapted_grid(mu, grid))}


def cmd_check_dominate(cfg: RunConfig) -> dict:
    nu = _load_field(cfg.inputs["a"])
    mu = _load_field(cfg.inputs["b"])
    rep = check_domination(nu, mu, cfg.grid)
    report = {**_header(cfg), **rep.to_dict()}
    if not rep:
        raise CheckFailed(report)
    return report


def cmd_zero_on_disk(cfg: RunConfig) -> dict:
    chi = _load_field(cfg.inputs["chi"])
    eta = _load_field(cfg.inputs["eta"])
    w = DecreaseWitness(eta, _disk(cfg.extra["disk"]), cfg.delta)
    z = zero_on_disk(chi, w, cfg.degree, cfg.grid, cfg.tol)
    rep = pairing_monomials(z.field, cfg.degree, cfg.grid)
    return {**_header(cfg), "sign": sign_calibration(cfg.grid),
            "zero_disk": z.zero_disk.as_dict(), "host_disk": z.host.as_dict(),
            "witness_disk": z.witness_disk.as_dict(), "retries": z.retries,
            "pairing": rep.to_dict(), "field": z.field.to_doc()}


def cmd_greedy(cfg: RunConfig) -> dict:
    chi = _load_field(cfg.inputs["chi"])
    name = cfg.extra["strategy"]
    if name == "zero":
        oracle = make_oracle("zero", delta0=cfg.extra["delta0"], retain=cfg.extra["retain"])
    elif name == "file":
        if not cfg.inputs.get("witness"):
            raise ValidationError("--strategy file needs --witness")
        oracle = make_oracle("file", source=load_json(cfg.inputs["witness"]))
    else:
        oracle = make_oracle("perturb", samples=cfg.extra["samples"], seed=cfg.seed)
    run = greedy_run(chi, oracle, cfg.max_steps, cfg.degree, cfg.grid, cfg.tol)
    render_dir = cfg.extra.get("render_dir")
    if render_dir:
        vmax = run.initial_ess_sup
        for rec in run:
            write_atomic(Path(render_dir) / f"step_{rec.step:03d}.ppm",
                         render_ppm(rec.chi, cfg.extra["res"], vmax=vmax))
    return {**_header(cfg), "sign": sign_calibration(cfg.grid), "strategy": name,
            **run.to_dict()}


def cmd_render(cfg: RunConfig) -> dict:
    f = _load_field(cfg.inputs["input"])
    grid = cfg.grid
    vmax = ess_sup(f, adapted_grid(f, grid))
    img = render_ppm(f, cfg.extra["res"], vmax=vmax)
    write_atomic(cfg.extra["image"], img)
    return {**_header(cfg), "ess_sup": vmax, "res": cfg.extra["res"], "bytes": len(img)}


COMMANDS = {
    "construct-trivial": cmd_construct_trivial,
    "localize": cmd_localize,
    "verify-class": cmd_verify_class,
    "norm-bound": cmd_norm_bound,
    "check-dominate": cmd_check_dominate,
    "zero-on-disk": cmd_zero_on_disk,
    "greedy": cmd_greedy,
    "render": cmd_render,
}


# ----------------------------------------------------------------- parsing

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="infbeltrami", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, out=True):
        sp.add_argument("--n-rad", type=int, default=64)
        sp.add_argument("--n-ang", type=int, default=256)
        sp.add_argument("--degree", type=int, default=8, help="pairing degree N / truncation K")
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--seed", type=int, default=0)
        if out:
            sp.add_argument("--out", help="report path (default: stdout)")
        sp.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("construct-trivial", help="glue a field to its exterior correction")
    sp.add_argument("--input", required=True)
    sp.add_argument("--radius", type=float, required=True)
    sp.add_argument("--pair-tol", type=float, default=1e-10)
    common(sp)

    sp = sub.add_parser("localize", help="prescribe alpha on a small disk inside the class")
    sp.add_argument("--input", required=True)
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--center", required=True, help="x,y")
    sp.add_argument("--eps", type=float, required=True)
    common(sp)

    sp = sub.add_parser("verify-class", help="check infinitesimal equivalence")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    common(sp)

    sp = sub.add_parser("norm-bound", help="lower bound for the class norm")
    sp.add_argument("--input", required=True)
    sp.add_argument("--restarts", type=int, default=8)
    sp.add_argument("--iters", type=int, default=200)
    common(sp)

    sp = sub.add_parser("check-dominate", help="check |a| <= |b| at every node")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    common(sp)

    sp = sub.add_parser("zero-on-disk", help="zero a witness on a small disk")
    sp.add_argument("--chi", required=True)
    sp.add_argument("--eta", required=True)
    sp.add_argument("--disk", required=True, help="x,y,r")
    sp.add_argument("--delta", type=float, required=True)
    common(sp)

    sp = sub.add_parser("greedy", help="run the greedy disk-zeroing sequence")
    sp.add_argument("--chi", required=True)
    sp.add_argument("--strategy", choices=("zero", "file", "perturb"), default="zero")
    sp.add_argument("--max-steps", type=int, default=5)
    sp.add_argument("--witness", help="witness document for --strategy file")
    sp.add_argument("--delta0", type=float, default=1e-3)
    sp.add_argument("--retain", type=float, default=0.5)
    sp.add_argument("--samples", type=int, default=16)
    sp.add_argument("--render-dir")
    sp.add_argument("--res", type=int, default=256)
    common(sp)

    sp = sub.add_parser("render", help="write a PPM heatmap of |field|")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out", required=True, dest="image", help="image path (.ppm)")
    sp.add_argument("--report", dest="out", help="report path (default: stdout)")
    sp.add_argument("--res", type=int, default=512)
    common(sp, out=False)
    return p


_INPUT_KEYS = ("input", "alpha", "a", "b", "chi", "eta", "witness")
_CORE_KEYS = {"subcommand", "n_rad", "n_ang", "degree", "tol", "seed", "eps", "delta",
              "max_steps", "out", "verbose"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = vars(ns)
    inputs = {k: d[k] for k in _INPUT_KEYS if d.get(k) is not None}
    extra = {k: v for k, v in d.items() if k not in _CORE_KEYS and k not in _INPUT_KEYS}
    cfg = RunConfig(ns.subcommand, inputs, ns.n_rad, ns.n_ang, ns.degree, ns.tol,
                    d.get("eps"), d.get("delta"), ns.seed, d.get("max_steps"), extra)
    cfg.validate()
    return cfg


def _emit(report: dict, out):
    text = dumps(report)
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def run(cfg: RunConfig, out=None) -> int:
    """Execute one configured command; return the exit code."""
    try:
        report = COMMANDS[cfg.subcommand](cfg)
    except CheckFailed as exc:
        _emit(exc.report, out)
        return EXIT_VALIDATION
    except BeltramiError as exc:
        code = EXIT_VALIDATION
        if isinstance(exc, AccuracyError):
            code = EXIT_ACCURACY
        elif not isinstance(exc, ValidationError):
            code = EXIT_CONSTRUCTION
        diag = {**_header(cfg), "error": type(exc).__name__, "message": str(exc),
                "details": _jsonable(exc.details)}
        _emit(diag, out)
        print(f"infbeltrami: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    _emit(report, out)
    return EXIT_OK


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return repr(obj)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
    except ValidationError as exc:
        print(f"infbeltrami: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(cfg, ns.out)


if __name__ == "__main__":
    sys.exit(main())
