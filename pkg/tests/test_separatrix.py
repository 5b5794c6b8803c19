import pytest

from builders import generated, step_point, trace_blow_up
from folires.complex import ComplexError, declare_trace, new_ambient, preimage_components
from folires.index import set_index_raw
from folires.scalar import ZERO, Scalar
from folires.scenarios import darboux_jouanolou
from folires.separatrix import (
    SeparatrixIndexError,
    audit_completeness,
    audit_separatrix_indices,
    curves_at,
    image_at,
    incomplete_points,
    is_complete_at,
    partial_separatrices,
    points_of,
    separatrix_index,
)


def joined_traces(i1, i5):
    """T1 and T5 in E1, joined through T2 in E2 into one separatrix."""
    cx = trace_blow_up(extra_trace=True)
    cx = declare_trace(cx, "T2", "E2", "P(E1,E2,T5)")
    cx = set_index_raw(cx, "T1", "E1", i1)
    return set_index_raw(cx, "T5", "E1", i5)


@pytest.mark.parametrize("m, count", [(1, 6), (2, 14), (3, 26)])
def test_dj_counts(m, count):
    seps = partial_separatrices(darboux_jouanolou(m))
    assert len(seps) == count == 2 * (m * m + m + 1)
    assert all(not s.complete for s in seps)
    assert all(len(s.members) == 1 and s.compact_part[0] == "point" for s in seps)


def test_no_traces_no_separatrices():
    cx = step_point(new_ambient("t"), "O")
    assert partial_separatrices(cx) == []


def test_dj_completeness_by_level():
    cx = darboux_jouanolou(1)
    seps = partial_separatrices(cx)
    # at the origin every separatrix is incomplete
    assert incomplete_points(cx, 0) == {("O", s.id) for s in seps}
    # each p_i is the base of a curve center, so complete from level 1 on
    for k in range(1, cx.N + 1):
        assert incomplete_points(cx, k) == set()
    for s in seps:
        (p,) = points_of(cx, s, 1)
        assert preimage_components(cx, 1, p) == set()
        assert is_complete_at(cx, s, 1, p)


def test_is_complete_at_requires_a_point_of_the_projection():
    cx = darboux_jouanolou(1)
    c1 = partial_separatrices(cx)[0]
    with pytest.raises(ComplexError):
        is_complete_at(cx, c1, cx.N, "P(E1,E3,T3)")


def test_projection_is_coherent_across_levels():
    for seed in range(1, 41):
        cx = generated(seed)
        for s in partial_separatrices(cx):
            for k in range(cx.N):
                down = set()
                for c in curves_at(cx, s, k + 1):
                    down.add(image_at(cx, k + 1, k, c))
                want = {("curve", c) for c in curves_at(cx, s, k)}
                assert {d for d in down if d[0] == "curve"} == want


def test_final_level_has_no_incomplete_points():
    for seed in range(1, 101):
        cx = generated(seed, "all_incomplete")
        assert incomplete_points(cx, cx.N) == set()


def test_compact_part_is_nonempty():
    for seed in range(1, 41):
        for s in partial_separatrices(generated(seed)):
            assert s.compact_part[1]


def test_separatrix_index_empty_single_and_unequal():
    cx = darboux_jouanolou(1)
    c1 = partial_separatrices(cx)[0]
    # E1 is dicritical, so it carries no separatrix index
    with pytest.raises(ComplexError):
        separatrix_index(cx, c1, "E1")

    sq2 = Scalar.sqrt2()
    cx = joined_traces(sq2, sq2)
    (sep,) = [s for s in partial_separatrices(cx) if "T1" in s.members]
    assert set(sep.members) == {"T1", "T2", "T5"}
    assert separatrix_index(cx, sep, "E1") == sq2

    other = [s for s in partial_separatrices(cx) if "T3" in s.members][0]
    assert separatrix_index(cx, other, "E2") == ZERO

    bad = joined_traces(sq2, Scalar(-3))
    (sep,) = [s for s in partial_separatrices(bad) if "T1" in s.members]
    with pytest.raises(SeparatrixIndexError):
        separatrix_index(bad, sep, "E1")
    assert any(v.entity.endswith("/E1") for v in audit_separatrix_indices(bad))


def test_generated_separatrix_indices_are_well_defined():
    for seed in range(1, 101):
        assert audit_separatrix_indices(generated(seed)) == []


def test_completeness_audits_on_dj_and_generated():
    for m in (1, 2):
        assert audit_completeness(darboux_jouanolou(m)) == []
    for seed in range(1, 41):
        assert audit_completeness(generated(seed)) == []
        assert audit_completeness(generated(seed, "all_incomplete")) == []


def test_dicritical_blow_up_at_a_complete_point_is_flagged():
    cx = step_point(trace_blow_up(), "P(E1,E2,T1)", dicritical=True)
    # nothing wrong yet: both traces still cross the dicritical E3
    assert not any(v.audit == "dicritical-at-complete-point" for v in audit_completeness(cx))
    # move the traces off E3, so the dicritical center becomes a complete point
    cx = step_point(step_point(cx, "P(E1,E3,T1)"), "P(E2,E3,T2)")
    found = audit_completeness(cx)
    assert {v.entity for v in found if v.audit == "dicritical-at-complete-point"} == {"C1@P(E1,E2,T1)", "C2@P(E1,E2,T1)"}
    assert any(v.audit == "complete-point-off-dicritical" for v in found)


def test_flag_is_checked():
    from folires.complex import set_flag

    cx = set_flag(generated(1), "all_separatrices_incomplete", True)
    if any(s.complete for s in partial_separatrices(cx)):
        assert any(v.audit == "flag" for v in audit_completeness(cx))
