import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gemini.errors import GeminiError, InternalError, KindError, OccursError, TypeMismatch
from gemini.infer import unify
from gemini.stdlib import signature
from gemini.types import (
    BIT, HARDWARE, INT, MODULE, REAL, SOFTWARE, STRING, UNKNOWN, Array, Arrow, HRecord, ListT,
    Meta, Module, Ref, SRecord, SubstEnv, Sw, alpha_equivalent, fresh_meta, kind_of, render,
    substitute,
)


def test_fresh_metas_are_distinct():
    assert fresh_meta(SOFTWARE).id != fresh_meta(SOFTWARE).id


def test_many_fresh_ids():
    ids = {fresh_meta().id for _ in range(100_000)}
    assert len(ids) == 100_000


def test_unknown_meta_resolves_to_either_kind():
    for target in (INT, BIT):
        m = fresh_meta(UNKNOWN)
        sigma = SubstEnv()
        unify(m, target, sigma)
        assert sigma.zonk(m) == target


@pytest.mark.parametrize("t, kind", [
    (INT, SOFTWARE), (Array(BIT, 8), HARDWARE), (Module(BIT, BIT), MODULE),
    (fresh_meta(UNKNOWN), UNKNOWN), (Sw(BIT), SOFTWARE),
])
def test_kind_of(t, kind):
    assert kind_of(t) == kind


def test_array_equality_is_size_sensitive():
    assert Array(BIT, 8) != Array(BIT, 16)
    assert Array(BIT, 8) == Array(BIT, 8)
    with pytest.raises(TypeMismatch, match="8 vs 16"):
        unify(Array(BIT, 8), Array(BIT, 16), SubstEnv())


def test_element_types_distinguish_arrays():
    pair = HRecord((("1", BIT), ("2", BIT)))
    with pytest.raises(TypeMismatch):
        unify(Array(BIT, 8), Array(pair, 8), SubstEnv())


def test_rebinding_a_meta_is_an_internal_error():
    sigma = SubstEnv()
    m = fresh_meta(SOFTWARE)
    sigma.bind(m, INT)
    with pytest.raises(InternalError):
        sigma.bind(m, REAL)


def test_occurs_check():
    m = fresh_meta(SOFTWARE)
    with pytest.raises(OccursError):
        unify(m, ListT(m), SubstEnv())


def test_software_meta_rejects_hardware_type():
    with pytest.raises(KindError):
        unify(fresh_meta(SOFTWARE), BIT, SubstEnv())


@pytest.mark.parametrize("text", [
    "bit[8]", "'a -> 'a list", "int ref", "bit sw", "(int * string) list", "'a -> 'b -> 'a",
])
def test_render_round_trips_through_signatures(text):
    t = signature(text)
    assert render(t) == text


def test_substitution_reaches_fixed_point_through_chains():
    sigma = SubstEnv()
    ms = [fresh_meta(SOFTWARE) for _ in range(50)]
    for a, b in zip(ms, ms[1:]):
        sigma.bind(a, ListT(b))
    sigma.bind(ms[-1], INT)
    env, passes = substitute(sigma, {"x": ms[0]})
    assert passes == 50
    assert render(env["x"]) == "int" + " list" * 49


def test_substitution_cap_is_reported():
    sigma = SubstEnv()
    ms = [fresh_meta(SOFTWARE) for _ in range(20)]
    for a, b in zip(ms, ms[1:]):
        sigma.bind(a, b)
    with pytest.raises(InternalError, match="fixed point"):
        substitute(sigma, {"x": ms[0]}, max_iters=5)


_POOL_S = [Meta(10_000_000 + i, SOFTWARE) for i in range(3)]
_POOL_H = [Meta(10_000_100 + i, HARDWARE) for i in range(2)]


def hw_types():
    return st.recursive(
        st.sampled_from([BIT, *_POOL_H]),
        lambda inner: st.one_of(
            st.builds(Array, inner, st.integers(1, 3)),
            st.builds(lambda a, b: HRecord((("1", a), ("2", b))), inner, inner),
        ),
        max_leaves=5,
    )


def sw_types():
    return st.recursive(
        st.one_of(st.sampled_from([INT, REAL, STRING, *_POOL_S]), st.builds(Sw, hw_types())),
        lambda inner: st.one_of(
            st.builds(ListT, inner),
            st.builds(Ref, inner),
            st.builds(Arrow, inner, inner),
            st.builds(lambda a, b: SRecord((("x", a), ("y", b))), inner, inner),
        ),
        max_leaves=6,
    )


def _kinds_respected(sigma: SubstEnv) -> bool:
    for pool in (_POOL_S, _POOL_H):
        for m in pool:
            if m.id in sigma:
                k = kind_of(sigma.zonk(m))
                if k not in (m.kind, UNKNOWN):
                    return False
    return True


@settings(max_examples=400)
@given(sw_types(), sw_types())
def test_unifier_is_sound(a, b):
    sigma = SubstEnv()
    try:
        unify(a, b, sigma)
    except GeminiError:
        return
    assert sigma.zonk(a) == sigma.zonk(b)
    assert _kinds_respected(sigma)
    for mid, t in sigma.map.items():
        assert mid not in sigma.free_metas(t)


@settings(max_examples=300)
@given(sw_types(), sw_types())
def test_unification_success_is_symmetric(a, b):
    def ok(x, y):
        try:
            unify(x, y, SubstEnv())
            return True
        except GeminiError:
            return False
    assert ok(a, b) == ok(b, a)


@settings(max_examples=300)
@given(sw_types())
def test_type_unifies_with_itself_without_bindings(t):
    assert unify(t, t, SubstEnv()) == {}


@given(sw_types())
def test_alpha_equivalence_is_reflexive(t):
    assert alpha_equivalent(t, t)
