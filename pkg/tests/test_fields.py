import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infbeltrami import (Combination, Disk, DiskGrid, DomainError, FieldSpecError,
                         MomentLaurent, Piecewise, PolyZZbar, RationalPhase, TeichForm, ess_sup,
                         evaluate, field_from_doc)
from infbeltrami.errors import SingularPointError
from infbeltrami.geometry import Annulus
from infbeltrami.fields import adapted_grid, circles, depth, zero
from infbeltrami.serialize import dumps

from conftest import const, zbar

U = Disk.unit()


def test_constant_value():
    assert evaluate(const(0.3), 0.2 + 0.1j) == 0.3


def test_teichform_closed_form():
    # 0.3 * conj(0.25) / |0.25|
    f = TeichForm(U, (0, 0, 1), 0.3)
    assert abs(evaluate(f, 0.5) - 0.3) < 1e-15


def test_teichform_zero_is_singular():
    f = TeichForm(U, (0, 0, 1), 0.3)
    with pytest.raises(SingularPointError):
        evaluate(f, 0.0)


def test_rational_phase_unimodular():
    f = RationalPhase(U, 0.3, 1)
    z = np.array([0.5, 0.3j, -0.2 + 0.4j])
    np.testing.assert_allclose(np.abs(evaluate(f, z)), 0.3, atol=1e-15)
    np.testing.assert_allclose(evaluate(f, z), 0.3 * np.conj(z) / z, atol=1e-15)


def test_outside_domain_rejected():
    with pytest.raises(DomainError):
        evaluate(const(1.0), 1.5)


def test_ess_sup_constant(grid):
    assert ess_sup(const(0.3), grid) == 0.3


def test_ess_sup_zbar_is_max_node_radius():
    sups = []
    for n in (8, 32, 128):
        g = DiskGrid(n_rad=n, n_ang=16)
        s = ess_sup(zbar(), g)
        assert s == pytest.approx(float(g.radial[0].max()), abs=1e-15)
        assert s < 1
        sups.append(s)
    assert sups == sorted(sups)


def test_moment_laurent_inside_hole_rejected():
    f = MomentLaurent(U, (1.0,), 0.5)
    with pytest.raises(DomainError):
        evaluate(f, 0.1)


def test_piecewise_selects_piece_open_disk():
    inner = Disk(0.2, 0.3)
    f = Piecewise(U, const(1.0), ((inner, const(2.0)),))
    assert evaluate(f, 0.2) == 2.0
    assert evaluate(f, 0.5) == 1.0  # on the circle: background
    assert evaluate(f, -0.5) == 1.0


def test_piecewise_rejects_overlap_and_escape():
    with pytest.raises(FieldSpecError):
        Piecewise(U, const(1.0), ((Disk(0.0, 0.3), zero()), (Disk(0.2, 0.3), zero())))
    with pytest.raises(FieldSpecError):
        Piecewise(U, const(1.0), ((Disk(0.8, 0.3), zero()),))


def test_bad_documents():
    with pytest.raises(FieldSpecError):
        field_from_doc({"kind": "Nope", "domain": {"cx": 0, "cy": 0, "r": 1}})
    with pytest.raises(FieldSpecError):
        field_from_doc({"kind": "PolyZZbar", "domain": {"cx": 0, "cy": 0, "r": 1},
                        "coefficients": [[0, 1, 1]]})
    with pytest.raises(FieldSpecError):
        field_from_doc({"kind": "Constant"})
    with pytest.raises(FieldSpecError):
        TeichForm(U, (0, 1), 1.5)


def test_operators_build_combination():
    f = 2.0 * const(0.25) - const(0.5) + zbar()
    assert isinstance(f, Combination)
    assert evaluate(f, 0.3j) == pytest.approx(-0.3j)


def test_circles_and_depth():
    inner = Piecewise(Disk(0.1, 0.4), const(1.0), ((Disk(0.1, 0.1), zero()),))
    f = Piecewise(U, const(0.0), ((Disk(0.1, 0.4), inner),))
    assert len(circles(f)) == 2
    assert depth(f) >= 2


def test_adapted_grid_sees_small_piece():
    tiny = Disk(0.3, 1e-3)
    f = Piecewise(U, const(0.0), ((tiny, const(5.0)),))
    g = DiskGrid(n_rad=8, n_ang=16)
    assert ess_sup(f, adapted_grid(f, g)) == 5.0


_kinds = [
    const(0.3 - 0.1j),
    PolyZZbar(Disk(0.1j, 0.7), ((0, 1, 1.0), (2, 1, 0.2 - 0.3j))),
    MomentLaurent(U, (0.1, 0.2j, -0.05), 0.3),
    TeichForm(U, (0.1, 0, 1), 0.4),
    RationalPhase(U, 0.2, 2),
    Piecewise(U, zbar(), ((Disk(0.3, 0.2), const(1 / 3)),)),
    Combination(U, ((1.0, zbar()), (math.pi, const(0.1)))),
]


@pytest.mark.parametrize("f", _kinds, ids=lambda f: f.kind)
def test_document_round_trip_bit_exact(f):
    region = Annulus(0j, 0.35, 1.0) if isinstance(f, MomentLaurent) else f.domain
    g = DiskGrid.over(region, 16, 32, offset=0.1)
    doc = json_round(f.to_doc())
    f2 = field_from_doc(doc)
    a, b = f._values(g.nodes), f2._values(g.nodes)
    assert np.array_equal(a, b, equal_nan=True)


def json_round(doc):
    import json
    return json.loads(dumps(doc))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3),
                          st.complex_numbers(max_magnitude=10, allow_nan=False,
                                             allow_infinity=False)),
                min_size=1, max_size=5))
def test_polyzzbar_round_trip_property(coeffs):
    f = PolyZZbar(U, tuple(coeffs))
    f2 = field_from_doc(json_round(f.to_doc()))
    z = DiskGrid(n_rad=4, n_ang=8).nodes
    assert np.array_equal(f._values(z), f2._values(z))
