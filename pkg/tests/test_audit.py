from fractions import Fraction

import pytest

from conftest import make_world
from ppir.audit import (
    ClassBiasedServer,
    ClassTagServer,
    MUTANT_SERVERS,
    SideParityDropServer,
    audit_exact,
    audit_fsi_query_exact,
    audit_statistical,
    exact_audit_work,
)
from ppir.errors import EnumerationCapError, ParameterError
from ppir.model import InstanceParams, build_layout


def test_exact_audit_honest_mixed_branches():
    params, layout, store, _, _ = make_world((4, 2), (0, 1), seed=1)
    # 2 sides x 2 classes x 4 uncoded selections
    assert exact_audit_work(layout) == 16
    verdict = audit_exact(store)
    assert verdict.passed
    assert verdict.query_invariant
    assert verdict.answer_tv_distance == Fraction(0)


def test_exact_audit_honest_all_parity_deterministic():
    params, layout, store, _, _ = make_world((2, 2), (1, 1), seed=2)
    verdict = audit_exact(store)
    assert verdict.passed and verdict.answer_tv_distance == 0
    assert verdict.notes["work"] == 4 * 2  # |S| * Gamma, no selection freedom


def test_exact_audit_fails_every_mutant():
    params, layout, store, _, _ = make_world((4, 2), (0, 1), seed=3)
    for cls in MUTANT_SERVERS:
        verdict = audit_exact(store, server=cls())
        assert not verdict.passed, cls.name
        assert verdict.answer_tv_distance > 0, cls.name


def test_exact_audit_tv_values():
    params, layout, store, _, _ = make_world((4, 2), (0, 1), seed=4)
    assert audit_exact(store, server=ClassTagServer()).answer_tv_distance == 1
    drop = audit_exact(store, server=SideParityDropServer())
    assert drop.answer_tv_distance == 1  # row counts differ deterministically


def test_exact_audit_cap_points_to_statistical():
    params, layout, store, _, _ = make_world((5, 5), (1, 1), seed=5)
    with pytest.raises(EnumerationCapError, match="statistical"):
        audit_exact(store, cap=10)


def test_statistical_audit_honest_passes():
    params = InstanceParams((10, 10), (1, 0), msg_len=1, q=2)
    layout = build_layout(params, 6)
    verdict = audit_statistical(layout, 4_000, 7)
    assert verdict.passed
    assert verdict.mi_estimate < verdict.mi_threshold
    assert verdict.query_invariant


def test_statistical_audit_catches_leaks():
    params = InstanceParams((10, 10), (1, 0), msg_len=1, q=2)
    layout = build_layout(params, 8)
    tag = audit_statistical(layout, 4_000, 9, server=ClassTagServer())
    assert not tag.passed
    assert tag.mi_estimate > 0.5  # roughly one leaked bit of the class index
    biased = audit_statistical(layout, 4_000, 10, server=ClassBiasedServer())
    assert not biased.passed


def test_statistical_audit_catches_parity_drop():
    # needs a parity class: (10,10)/(8,0) sends 2 parity rows for class 0
    params = InstanceParams((10, 10), (8, 0), msg_len=1, q=13)
    layout = build_layout(params, 11)
    verdict = audit_statistical(layout, 4_000, 12, server=SideParityDropServer())
    assert not verdict.passed
    honest = audit_statistical(layout, 4_000, 13)
    assert honest.passed


def test_statistical_audit_requires_trials():
    params = InstanceParams((4, 4), (1, 1), q=7)
    layout = build_layout(params, 1)
    with pytest.raises(ParameterError):
        audit_statistical(layout, 0, 1)


def test_verdict_serialization():
    params, layout, store, _, _ = make_world((2, 2), (1, 1), seed=9)
    doc = audit_exact(store).to_json()
    assert doc["mode"] == "exact" and doc["verdict"] == "pass"
    assert doc["answer_tv_distance"] == {"num": 0, "den": 1}
    params2 = InstanceParams((6, 6), (1, 1), q=3)
    layout2 = build_layout(params2, 2)
    doc2 = audit_statistical(layout2, 500, 3).to_json()
    assert doc2["mode"] == "statistical" and "mi_estimate" in doc2


def test_fsi_query_marginal_v_invariance():
    for class_sizes, side_counts in [
        ((2, 2), (1, 1)),
        ((2, 2, 2), (1, 1, 0)),
        ((3, 2), (1, 0)),
        ((3, 3), (0, 0)),
    ]:
        params, layout, _, _, _ = make_world(class_sizes, side_counts, seed=13, q=13)
        verdict = audit_fsi_query_exact(layout)
        assert verdict.passed, (class_sizes, side_counts)
        assert verdict.answer_tv_distance == 0
