import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import box_formulas, diamond_formulas, formulas
from modalwb.formula import (
    Box,
    Convention,
    Dia,
    FormulaSyntaxError,
    Impl,
    Meta,
    Neg,
    UnknownSymbol,
    Var,
    apply_substitution,
    chagrov_sigma,
    compose,
    expand,
    instantiate,
    is_core,
    is_subformula_closed,
    missing_subformulas,
    modal_depth,
    parse,
    parse_core,
    pretty,
    pretty_sugared,
    size,
    sub_minus_plus,
    subformulas,
)

B, D, X = Convention.BOX, Convention.DIAMOND, Convention.BOTH
p, q, r = Var("p"), Var("q"), Var("r")


def texts(fs):
    return {pretty(f) for f in fs}


class TestParse:
    def test_atom(self):
        assert parse("p") == p

    def test_surface_keeps_both_operators(self):
        assert parse("dia box p") == Dia(Box(p))

    def test_iff_becomes_conjunction_of_implications(self):
        f = parse("box p <-> ~dia ~p")
        a, b = Box(p), Neg(Dia(Neg(p)))
        assert f == Neg(Impl(Impl(a, b), Neg(Impl(b, a))))

    @pytest.mark.parametrize(
        "text, expected",
        [
            ("true", "p0 -> p0"),
            ("p | q", "~p -> q"),
            ("p & q", "~(p -> ~q)"),
            ("[]p -> <>p", "~dia ~p -> dia p"),
            ("p -> q -> r", "p -> q -> r"),
        ],
    )
    def test_sugar_and_aliases(self, text, expected):
        assert pretty(parse_core(text)) == expected

    def test_implication_is_right_associative(self):
        assert parse("p -> q -> r") == Impl(p, Impl(q, r))

    def test_and_binds_tighter_than_or_and_implication(self):
        assert parse("p & q -> r") == parse("(p & q) -> r")
        assert parse("p | q & r") == parse("p | (q & r)")
        assert parse("p -> q <-> r") == parse("(p -> q) <-> r")

    @pytest.mark.parametrize("text, pos", [("p ->", 4), ("(p", 2)])
    def test_syntax_error_position(self, text, pos):
        with pytest.raises(FormulaSyntaxError) as exc:
            parse(text)
        assert exc.value.position == pos

    @pytest.mark.parametrize("text", ["p $ q", "P", "p # q"])
    def test_unknown_symbol(self, text):
        with pytest.raises(UnknownSymbol):
            parse(text)

    def test_metavariables_only_on_request(self):
        with pytest.raises(FormulaSyntaxError):
            parse("A -> A")
        assert parse("A -> A", allow_meta=True) == Impl(Meta("A"), Meta("A"))


class TestExpand:
    def test_box_under_diamond(self):
        assert expand(Box(p), D) == Neg(Dia(Neg(p)))

    def test_dia_box_under_box(self):
        assert expand(Dia(Box(q)), B) == Neg(Box(Neg(Box(q))))

    def test_dia_is_primitive_under_diamond(self):
        assert expand(Dia(p), D) == Dia(p)

    def test_both_keeps_modal_nodes(self):
        assert expand(Dia(Box(p)), X) == Dia(Box(p))

    @given(formulas(), st.sampled_from(list(Convention)))
    def test_idempotent(self, f, conv):
        once = expand(f, conv)
        assert expand(once, conv) == once
        assert is_core(once, conv)

    @given(formulas(), st.sampled_from(list(Convention)))
    def test_pretty_round_trip(self, f, conv):
        core = expand(f, conv)
        assert parse_core(pretty(core), conv) == core

    @given(formulas(), st.sampled_from(list(Convention)))
    def test_sugared_round_trip(self, f, conv):
        core = expand(f, conv)
        assert parse_core(pretty_sugared(core, conv), conv) == core


class TestSubformulas:
    def test_dia_box_under_box_convention(self):
        f = parse_core("dia box q", B)
        assert texts(subformulas(f)) == {"~box ~box q", "box ~box q", "~box q", "box q", "q"}

    def test_box_under_diamond_convention(self):
        assert texts(subformulas(parse_core("box p"))) == {"~dia ~p", "dia ~p", "~p", "p"}

    def test_atom(self):
        assert list(subformulas(p)) == [p]

    def test_sub_minus_plus_atom(self):
        minus, plus = sub_minus_plus(p)
        assert set(minus) == {Neg(p)}
        assert set(plus) == {p, Neg(p)}

    def test_sub_minus_plus_negation(self):
        minus, plus = sub_minus_plus(Neg(p))
        assert set(minus) == {Neg(Neg(p)), Neg(p)}
        assert set(plus) == {Neg(p), p, Neg(Neg(p))}

    @given(formulas())
    def test_sub_plus_bound(self, f):
        assert len(sub_minus_plus(f)[1]) <= 2 * len(subformulas(f))

    @given(formulas(), st.sampled_from(list(Convention)))
    def test_sub_is_closed_and_contains_seed(self, f, conv):
        core = expand(f, conv)
        sub = subformulas(core)
        assert core in sub
        assert is_subformula_closed(sub, conv).closed

    def test_atoms_closed(self):
        assert is_subformula_closed([p, q]).closed

    def test_size_and_depth(self):
        f = parse_core("box (p -> dia q)")
        assert modal_depth(f) == 2
        assert size(f) == 7


class TestChagrovSigma:
    def test_box_p(self):
        sigma = chagrov_sigma(parse_core("box p", B))
        assert texts(sigma) == {"box p", "p", "~box ~box p"}

    def test_atom_has_no_extra_members(self):
        assert list(chagrov_sigma(p)) == [p]

    def test_not_closed_with_the_missing_pair(self):
        sigma = chagrov_sigma(parse_core("box p", B))
        check = is_subformula_closed(sigma, B)
        assert not check.closed
        member, missing = check.witness
        assert member in sigma and missing not in sigma
        assert texts(missing_subformulas(sigma, B)) == {"box ~box p", "~box p"}


class TestSubstitution:
    def test_simultaneous(self):
        f = apply_substitution(Impl(p, q), {"p": Dia(r), "q": p})
        assert f == Impl(Dia(r), p)

    def test_commutes_with_dia(self):
        assert apply_substitution(Dia(p), {"p": Neg(p)}) == Dia(Neg(p))

    @given(formulas())
    def test_identity(self, f):
        assert apply_substitution(f, {}) == f
        assert apply_substitution(f, {"p": p, "q": q}) == f

    @given(
        diamond_formulas(max_leaves=4),
        st.dictionaries(st.sampled_from("pq"), diamond_formulas(max_leaves=3), max_size=2),
        st.dictionaries(st.sampled_from("pq"), diamond_formulas(max_leaves=3), max_size=2),
    )
    def test_composition(self, f, sigma, tau):
        twice = apply_substitution(apply_substitution(f, sigma), tau)
        assert twice == apply_substitution(f, compose(sigma, tau))

    @given(box_formulas(max_leaves=4), st.dictionaries(st.sampled_from("pq"), box_formulas(max_leaves=3)))
    def test_preserves_core(self, f, sigma):
        assert is_core(apply_substitution(f, sigma), B)

    def test_instantiate_needs_every_meta(self):
        pattern = parse("A -> B", allow_meta=True)
        assert instantiate(pattern, {"A": p, "B": q}) == Impl(p, q)
        with pytest.raises(KeyError):
            instantiate(pattern, {"A": p})
