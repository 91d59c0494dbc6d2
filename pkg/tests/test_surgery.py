import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperfill.errors import ConstraintViolated, DomainError, InputError, NotPrimitive
from hyperfill.surgery import (
    X_13, X_24, AnnulusTwist, CuspState, DiskTwist, FillingSpec,
    GeneralizedSlope, Slope, Unfilled, apply_twist, branched_cover_components,
    dump_move_script, expected_slopeseqn, format_filling, intersection,
    inverse, load_bundled_script, load_move_script, normalize, parse_filling,
    reproduce_slopeseqn, riemann_hurwitz_genus, sheet_orbits,
    triangle_orbifold_geometry,
)

ints = st.integers(-50, 50)
pairs = st.tuples(ints, ints).filter(lambda t: math.gcd(*t) == 1)
TEN_CUSP = "M((3,-2),(1,-3),(-1,2),(1,3),(1,4),(1,5),(1,-5),(1,-5),(1,6),∞)"


def as_tuples(spec):
    return [None if e is Unfilled else e.pair for e in spec.entries]


# --- slopes -------------------------------------------------------------------

def test_normalize_examples():
    assert normalize(-3, 2) == Slope(3, -2)
    assert normalize(0, -1) == Slope(0, 1)
    with pytest.raises(NotPrimitive):
        normalize(2, 4)
    assert normalize(2, 4, strict=False) == Slope(1, 2)
    with pytest.raises(InputError):
        normalize(0, 0)


@given(pairs)
def test_normalize_idempotent(pq):
    s = normalize(*pq)
    assert normalize(s.p, s.q) == s
    assert normalize(-pq[0], -pq[1]) == s


@given(st.tuples(ints, ints), st.tuples(ints, ints))
def test_intersection_antisymmetric(a, b):
    assert intersection(a, b) == -intersection(b, a)
    assert intersection(a, a) == 0


def test_intersection_examples():
    assert intersection((1, 0), (0, 1)) == 1
    assert intersection((1, -1), (1, 0)) == 1


def test_generalized_slope():
    g = GeneralizedSlope.from_pair(6, -4)
    assert (g.d, g.p, g.q) == (2, 3, -2)
    assert GeneralizedSlope(1, -1, 2).normalized().pair == (1, -2)
    with pytest.raises(InputError):
        GeneralizedSlope(0, 1, 0)


# --- twists -------------------------------------------------------------------

def test_twist_examples():
    s = CuspState.standard(5)
    t = apply_twist(s, AnnulusTwist(0, 2, X_13, X_13, 7))
    assert t.meridians[0] == (8, -7) and t.meridians[2] == (-6, 7)
    t = apply_twist(s, AnnulusTwist(1, 3, X_24, X_24, 4))
    assert t.meridians[1] == (1, -4) and t.meridians[3] == (1, 4)
    t = apply_twist(s, DiskTwist(4, 9))
    assert t.meridians[4] == (1, 9)


def test_twist_index_checked():
    with pytest.raises(InputError):
        apply_twist(CuspState.standard(2), DiskTwist(2, 1))
    with pytest.raises(InputError):
        AnnulusTwist(1, 1, (1, 0), (1, 0), 1)
    with pytest.raises(NotPrimitive):
        AnnulusTwist(0, 1, (2, 0), (1, 0), 1)


moves = st.one_of(
    st.builds(AnnulusTwist, st.integers(0, 2), st.integers(3, 5), pairs, pairs, ints),
    st.builds(DiskTwist, st.integers(0, 5), ints),
)


@given(st.lists(moves, max_size=6), moves)
def test_twist_inverse_restores_state(prefix, mv):
    s = CuspState.standard(6)
    for m in prefix:
        s = apply_twist(s, m)
    assert apply_twist(apply_twist(s, mv), inverse(mv)) == s


@given(st.integers(-20, 20), st.integers(-20, 20), pairs, pairs)
def test_disjoint_moves_commute(r, q, x, y):
    a = AnnulusTwist(0, 1, x, y, r)
    b = DiskTwist(2, q)
    s = CuspState.standard(3)
    assert apply_twist(apply_twist(s, a), b) == apply_twist(apply_twist(s, b), a)
    c = AnnulusTwist(2, 3, y, x, q)
    s = CuspState.standard(4)
    assert apply_twist(apply_twist(s, a), c) == apply_twist(apply_twist(s, c), a)


def test_standard_state_is_basis():
    assert CuspState.standard(4).is_basis()


# --- the ten-cusp example -------------------------------------------------------

def test_reproduce_example_tuple():
    spec = reproduce_slopeseqn(2, 3, 4, 5, 6, -5)
    assert format_filling(spec) == TEN_CUSP
    assert spec.entries[2].pair == (-1, 2)
    assert spec.normalized().entries[2].pair == (1, -2)


def test_reproduce_trivial():
    spec = reproduce_slopeseqn(0, 0, 0, 0, 0, -1)
    # r = -r3 - 1 forces one nontrivial disk twist
    assert as_tuples(spec)[:6] == [(1, 0)] * 6
    assert as_tuples(spec)[6] == (1, -1)


def test_reproduce_constraint():
    with pytest.raises(ConstraintViolated):
        reproduce_slopeseqn(2, 3, 4, 5, 6, 0)


def test_bundled_script_matches_literal_tuple_for_random_parameters():
    script = load_bundled_script()
    rng = np.random.default_rng(0)
    for _ in range(100):
        r1, r2, r3, r4, r5 = (int(x) for x in rng.integers(-10 ** 6, 10 ** 6, size=5))
        spec = script.with_params(r1=r1, r2=r2, r3=r3, r4=r4, r5=r5, r=-r3 - 1).run()
        assert as_tuples(spec) == expected_slopeseqn(r1, r2, r3, r4, r5)
        assert as_tuples(spec) == as_tuples(reproduce_slopeseqn(r1, r2, r3, r4, r5, -r3 - 1))


def test_bundled_script_constraint():
    with pytest.raises(ConstraintViolated):
        load_bundled_script().with_params(r=0).run()
    with pytest.raises(InputError):
        load_bundled_script().with_params(r7=1)


def test_big_integers():
    big = 10 ** 40
    spec = reproduce_slopeseqn(big, 1, big, 1, 1, -big - 1)
    assert spec.entries[0].pair == (1 + big, -big)


# --- notation and scripts -------------------------------------------------------

def test_format_examples():
    assert format_filling(FillingSpec([GeneralizedSlope(3, 1, 0)])) == "M(3,0)"
    assert format_filling(FillingSpec([Unfilled])) == "M(∞)"
    assert format_filling(FillingSpec([Unfilled, GeneralizedSlope(1, 1, 2)])) == "M(∞,(1,2))"


@pytest.mark.parametrize("text", [TEN_CUSP, "M(3,0)", "M(∞)", "N((1,0),inf,(2,-4))"])
def test_parse_round_trip(text):
    spec = parse_filling(text)
    again = parse_filling(format_filling(spec))
    assert as_tuples(again) == as_tuples(spec)


def test_parse_rejects_garbage():
    with pytest.raises(InputError):
        parse_filling("M[(1,0)]")
    with pytest.raises(InputError):
        parse_filling("M((1,0),x)")


def test_empty_script_is_all_meridians():
    spec = load_move_script({"cusps": 3, "moves": []}).run()
    assert as_tuples(spec) == [(1, 0)] * 3


def test_script_text_and_path(tmp_path):
    obj = {"cusps": 2, "moves": [{"kind": "disk", "i": 1, "r": 4}], "filled": [1]}
    p = tmp_path / "s.json"
    p.write_text(json.dumps(obj))
    for src in (obj, json.dumps(obj), str(p)):
        assert as_tuples(load_move_script(src).run()) == [None, (1, 4)]


def test_script_dump_round_trip():
    s = load_bundled_script()
    again = load_move_script(dump_move_script(s))
    assert as_tuples(again.run()) == as_tuples(s.run())


@pytest.mark.parametrize("bad", [
    {"moves": []},
    {"cusps": 2, "moves": [{"kind": "twirl", "i": 0, "r": 1}]},
    {"cusps": 2, "moves": [{"kind": "disk", "i": 5, "r": 1}]},
    {"cusps": 2, "moves": [{"kind": "disk", "i": 0, "r": 1.5}]},
    {"cusps": 2, "moves": [], "extra": 1},
    {"cusps": 2, "moves": [{"kind": "disk", "i": 0, "r": "k"}]},
    "{not json",
])
def test_script_schema_violations(bad):
    with pytest.raises(InputError):
        load_move_script(bad).run()


# --- covers and orbifolds ---------------------------------------------------------

def test_component_examples():
    assert branched_cover_components(3, 2) == 1
    assert branched_cover_components(2, 2) == 2
    assert branched_cover_components(5, 1) == 1


def test_components_match_orbit_count():
    for p in range(2, 31):
        for lk in range(-30, 31):
            assert branched_cover_components(p, lk) == sheet_orbits(p, lk)


def test_genus_examples():
    assert riemann_hurwitz_genus(7, 1, 2) == 7
    assert riemann_hurwitz_genus(7, 0, 4) == 6
    assert riemann_hurwitz_genus(2, 0, 2) == 0
    with pytest.raises(DomainError):
        riemann_hurwitz_genus(2, 0, 1)


@given(st.integers(1, 4), st.integers(1, 6), st.integers(2, 40))
def test_genus_monotone_in_p(g, b, p):
    try:
        a = riemann_hurwitz_genus(p, g, b)
        c = riemann_hurwitz_genus(p + 2, g, b)
    except DomainError:
        return   # odd branching data
    assert c >= a


@pytest.mark.parametrize("orders,geom", [
    ((2, 3, math.inf), "hyperbolic"),
    ((3, 3, "inf"), "hyperbolic"),
    ((2, 2, "∞"), "euclidean"),
    ((2, 3, 6), "euclidean"),
    ((2, 3, 7), "hyperbolic"),
    ((2, 3, 5), "spherical"),
    ((2, 2, 100), "spherical"),
])
def test_triangle(orders, geom):
    assert triangle_orbifold_geometry(*orders) == geom
