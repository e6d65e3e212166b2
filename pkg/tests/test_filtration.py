import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from conftest import box_formulas, diamond_formulas, models
from modalwb.filtration import (
    K5_REWRITES,
    MODALITY_WORDS,
    NotClosed,
    NotEuclidean,
    NotFalsified,
    audit_filtration,
    canonical_formula,
    check_filtration_theorem,
    equivalence_classes,
    filtration_from_relation,
    finite_base_check,
    k5_closure,
    k5_fmp_countermodel,
    largest_filtration,
    normal_form,
    popkorn_gamma_star,
    reduce_word,
    size_bound,
    smallest_filtration,
)
from modalwb.formula import Box, Convention, Dia, Var, box, expand, is_subformula_closed, parse_core, pretty, subformulas
from modalwb.semantics import FrameClass, KripkeModel, extension, frame_has_property, iter_models, valid_up_to

B, D, X = Convention.BOX, Convention.DIAMOND, Convention.BOTH
p = Var("p")


def model(worlds, rel, **val):
    return KripkeModel(tuple(worlds), frozenset(rel), {k: frozenset(v) for k, v in val.items()})


def relations_above(k, base):
    free = [(a, b) for a in range(k) for b in range(k) if (a, b) not in base]
    for bits in itertools.product((False, True), repeat=len(free)):
        yield set(base) | {pr for pr, on in zip(free, bits) if on}


def class_pairs(filtered):
    idx = {name: i for i, name in enumerate(filtered.model.worlds)}
    return {(idx[a], idx[b]) for a, b in filtered.model.rel}


class TestClasses:
    def test_two_classes(self):
        m = model("abc", [], p="ab")
        assert equivalence_classes(m, [p]).classes == (("a", "b"), ("c",))

    def test_empty_sigma(self):
        m = model("abc", [("a", "b")], p="a")
        assert len(equivalence_classes(m, []).classes) == 1

    @given(models(), diamond_formulas(max_leaves=4))
    def test_count_bound(self, m, f):
        sigma = subformulas(f)
        part = equivalence_classes(m, sigma)
        assert len(part.classes) <= 2 ** len(sigma)
        assert sorted(w for c in part.classes for w in c) == sorted(m.worlds)


class TestSmallestLargest:
    def test_one_world_no_edges(self):
        f = smallest_filtration(model("w", [], p=""), subformulas(p))
        assert len(f.model.worlds) == 1 and not f.model.rel

    def test_two_world_chain(self):
        m = model("wu", [("w", "u")], p="u")
        f = smallest_filtration(m, subformulas(Dia(p)))
        assert f.model.worlds == ("|w|", "|u|")
        assert f.model.rel == {("|w|", "|u|")}

    def test_rejects_non_closed(self):
        m = model("wu", [("w", "u")], p="u")
        with pytest.raises(NotClosed) as exc:
            smallest_filtration(m, [Dia(p)])
        assert exc.value.witness == (Dia(p), p)
        with pytest.raises(NotClosed):
            largest_filtration(m, [Dia(p)])

    def test_largest_total_without_dia_under_diamond(self):
        m = model("abc", [("a", "b")], p="a", q="b")
        f = largest_filtration(m, subformulas(parse_core("p -> q")), D)
        n = len(f.model.worlds)
        assert len(f.model.rel) == n * n

    def test_largest_total_without_box_under_box(self):
        m = model("abc", [("a", "b")], p="a", q="b")
        f = largest_filtration(m, subformulas(parse_core("p -> ~q", B)), B)
        n = len(f.model.worlds)
        assert len(f.model.rel) == n * n

    @given(models(max_worlds=4), st.sampled_from(["box dia p", "dia (p -> box q)", "box p -> dia q", "dia box p"]))
    def test_both_is_intersection(self, m, text):
        # Sub(f) under both conventions is not closed under either single
        # convention, so the two clauses are evaluated directly on it
        sigma = subformulas(parse_core(text, X))
        part = equivalence_classes(m, sigma)
        dias = [f.arg for f in sigma if isinstance(f, Dia)]
        boxes = [f.arg for f in sigma if isinstance(f, Box)]

        def ext(f):
            return extension(m, f)

        def rep(i):
            return part.classes[i][0]

        k = range(len(part.classes))
        clause2 = {(i, j) for i in k for j in k
                   if all(rep(i) in ext(Dia(d)) for d in dias if rep(j) in ext(d))}
        clause2p = {(i, j) for i in k for j in k
                    if all(rep(j) in ext(b) for b in boxes if rep(i) in ext(Box(b)))}
        both = class_pairs(largest_filtration(m, sigma, X))
        assert both == clause2 & clause2p
        assert both <= clause2 and both <= clause2p

    @given(models(), diamond_formulas(max_leaves=5), st.sampled_from(["smallest", "largest"]))
    def test_audit_passes(self, m, f, kind):
        sigma = subformulas(f)
        build = smallest_filtration if kind == "smallest" else largest_filtration
        report = audit_filtration(m, build(m, sigma, D), sigma, D)
        assert report.ok, report.lines()

    def test_audit_catches_missing_pair(self):
        m = model("wu", [("w", "u")], p="u")
        sigma = subformulas(Dia(p))
        report = audit_filtration(m, filtration_from_relation(m, sigma, []), sigma, D)
        assert not report.passed("(2)")
        assert "CLAUSE (2) FAIL w=w u=u" in report.lines()


class TestSandwich:
    @settings(max_examples=30)
    @given(models(max_worlds=3, atoms=("p",)), st.sampled_from(["dia p", "box dia p", "dia ~dia p", "dia p -> p"]),
           st.sampled_from([B, D, X]))
    def test_every_admissible_relation_is_between(self, m, text, conv):
        sigma = subformulas(parse_core(text, conv))
        small = class_pairs(smallest_filtration(m, sigma, conv))
        large = class_pairs(largest_filtration(m, sigma, conv))
        k = len(equivalence_classes(m, sigma).classes)
        for pairs in relations_above(k, small):
            if audit_filtration(m, filtration_from_relation(m, sigma, pairs), sigma, conv).ok:
                assert small <= pairs <= large


class TestFiltrationTheorem:
    @given(models(max_worlds=5), st.sampled_from([B, D]), st.data())
    def test_no_violations(self, m, conv, data):
        f = data.draw(box_formulas(max_leaves=6) if conv is B else diamond_formulas(max_leaves=6))
        sigma = subformulas(f)
        for build in (smallest_filtration, largest_filtration):
            assert check_filtration_theorem(m, build(m, sigma, conv), sigma) == []

    def test_non_closed_sigma_breaks_it(self):
        # first hit of scripts/search_nonclosed.py
        m = model(["w0"], [("w0", "w0")], p=["w0"])
        sigma = [Dia(p)]
        filtered = filtration_from_relation(m, sigma, [(0, 0)])
        assert audit_filtration(m, filtered, sigma, D).ok
        violations = check_filtration_theorem(m, filtered, sigma)
        assert [(v.world, v.formula, v.in_model, v.in_filtration) for v in violations] == [
            ("w0", Dia(p), True, False)
        ]


class TestClauseAsymmetry:
    @settings(max_examples=40)
    @given(models(max_worlds=3, atoms=("p",)), st.sampled_from(["dia p", "box p", "box dia p", "dia box p"]))
    def test_three_implies_three_prime(self, m, text):
        sigma = subformulas(parse_core(text))
        small = class_pairs(smallest_filtration(m, sigma))
        k = len(equivalence_classes(m, sigma).classes)
        for pairs in relations_above(k, small):
            report = audit_filtration(m, filtration_from_relation(m, sigma, pairs), sigma, D)
            if report.passed("(3)"):
                assert report.passed("(3')")

    def test_pinned_converse_failure(self):
        # found by scripts/search_clause_asymmetry.py: (3') holds, (3) fails
        m = model(["w0", "w1"], [("w0", "w0")], p=["w0"])
        sigma = subformulas(parse_core("box dia p"))
        filtered = filtration_from_relation(m, sigma, [(0, 0), (1, 0)])
        report = audit_filtration(m, filtered, sigma, D)
        assert report.passed("(3')")
        assert not report.passed("(3)")
        assert report.result("(3)").witness == "w=w1 u=w0 phi=dia p"
        assert report.normative == "(3)" and not report.ok


class TestK5Closure:
    @pytest.mark.parametrize("lhs, rhs", sorted(K5_REWRITES.items()))
    def test_rewrite_valid_on_euclidean_frames(self, lhs, rhs):
        f = canonical_formula(normal_form(p)._replace(word=lhs))
        g = canonical_formula(normal_form(p)._replace(word=rhs))
        eq = parse_core(f"({pretty(f)}) <-> ({pretty(g)})")
        assert valid_up_to(eq, 4, FrameClass.EUCLIDEAN).holds
        res = valid_up_to(eq, 3)
        assert not res.holds
        assert not frame_has_property(res.countermodel, FrameClass.EUCLIDEAN).holds

    @given(st.text("BD", max_size=8))
    def test_reduced_words_are_short(self, word):
        assert reduce_word(word) in MODALITY_WORDS

    def test_atomic_seed(self):
        closure = k5_closure(p)
        reps = {(nf.word, nf.negated) for nf in closure.representatives}
        assert all(nf.kernel == p for nf in closure.representatives)
        assert reps == {(w, s) for w in MODALITY_WORDS for s in (False, True)}

    def test_representatives_are_pairwise_distinct(self):
        # independent oracle: the 14 representatives of k5_closure(p) have
        # distinct truth tables across Euclidean models with <= 3 worlds
        reps = [canonical_formula(nf) for nf in k5_closure(p).representatives]
        signatures = {f: [] for f in reps}
        for n in range(1, 4):
            for worlds, rel, val in oracle.models(n, ["p"], oracle.euclidean):
                for f in reps:
                    signatures[f].append(tuple(oracle.holds(worlds, rel, val, w, f) for w in worlds))
        assert len({tuple(s) for s in signatures.values()}) == 14

    @pytest.mark.parametrize("text", ["p", "dia p -> box p", "box (p -> dia q)"])
    def test_base_size_bound(self, text):
        f = parse_core(text)
        closure = k5_closure(f)
        assert len(closure.representatives) <= 14 * len(subformulas(f))
        assert size_bound(closure) == 2 ** len(closure.representatives)

    def test_every_generator_equivalent_on_small_euclidean_models(self):
        closure = k5_closure(parse_core("dia p -> box dia p"))
        for m, _ in iter_models(3, ["p"], FrameClass.EUCLIDEAN):
            assert finite_base_check(closure, m).ok

    @given(models(max_worlds=5, euclidean=True), diamond_formulas(max_leaves=4))
    def test_finite_base_on_euclidean_models(self, m, f):
        assert finite_base_check(k5_closure(f), m).ok

    def test_finite_base_fails_on_a_chain(self):
        chain = model("abcd", [("a", "b"), ("b", "c"), ("c", "d")], p="d")
        check = finite_base_check(k5_closure(p), chain)
        assert not check.ok and check.failures

    def test_closure_is_subformula_closed_in_members(self):
        closure = k5_closure(parse_core("dia p -> box q"))
        assert is_subformula_closed(closure.members, D).closed


class TestK5Pipeline:
    def test_p_and_dia_not_p(self):
        m = model("abc", [("a", "b"), ("a", "c"), ("b", "b"), ("b", "c"), ("c", "b"), ("c", "c")], p="ab")
        phi = expand(parse_core("~(p & dia ~p)"))
        filtered = k5_fmp_countermodel(m, phi)
        assert frame_has_property(filtered.model, FrameClass.EUCLIDEAN).holds
        assert filtered.image("a") not in extension(filtered.model, phi)
        base = k5_closure(phi).representatives
        assert len(filtered.model.worlds) <= 2 ** len(base)

    @given(models(max_worlds=5, euclidean=True), diamond_formulas(max_leaves=5))
    def test_output_is_euclidean_and_refutes(self, m, f):
        if extension(m, f) == frozenset(m.worlds):
            with pytest.raises(NotFalsified):
                k5_fmp_countermodel(m, f)
            return
        filtered = k5_fmp_countermodel(m, f)
        closure = k5_closure(f)
        assert frame_has_property(filtered.model, FrameClass.EUCLIDEAN).holds
        assert audit_filtration(m, filtered, closure, D).ok
        falsified = extension(filtered.model, f)
        assert all(filtered.image(w) not in falsified for w in m.worlds if w not in extension(m, f))
        assert check_filtration_theorem(m, filtered, closure.base()) == []

    def test_requires_euclidean(self):
        with pytest.raises(NotEuclidean):
            k5_fmp_countermodel(model("ab", [("a", "b")], p=""), p)


class TestGammaStar:
    def test_not_closed_under_box(self):
        gamma = popkorn_gamma_star(parse_core("dia p", B), 2, B)
        check = is_subformula_closed(gamma, B)
        assert not check.closed
        assert check.witness[0] in gamma and check.witness[1] not in gamma

    def test_closed_under_both(self):
        assert is_subformula_closed(popkorn_gamma_star(p, 2, X), X).closed

    @pytest.mark.parametrize("conv", [B, X])
    def test_monotone(self, conv):
        levels = [set(popkorn_gamma_star(parse_core("dia p", conv), k, conv)) for k in range(3)]
        assert levels[0] == set(subformulas(parse_core("dia p", conv)))
        assert levels[0] <= levels[1] <= levels[2]

    def test_first_level(self):
        gamma = popkorn_gamma_star(p, 1, X)
        assert set(gamma) == {p, box(p, X), Dia(p)}
