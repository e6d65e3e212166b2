import json

import pytest
from hypothesis import given

import oracle
from conftest import diamond_formulas, formulas, models
from modalwb.formula import Convention, Dia, Neg, Var, box, parse_core, variables
from modalwb.semantics import (
    Budget,
    FrameClass,
    KripkeModel,
    ModelError,
    ResourceLimit,
    Semantics,
    UnknownWorld,
    consequence_check,
    extension,
    frame_count,
    frame_has_property,
    frames,
    globally_true,
    iter_models,
    load_model,
    model_count,
    satisfies,
    satisfies_nonstandard,
    valid_up_to,
)

p, q = Var("p"), Var("q")
LOOP = KripkeModel(("w",), frozenset({("w", "w")}), {"p": frozenset({"w"})})


def oracle_args(m):
    return m.worlds, set(m.rel), {k: set(v) for k, v in m.val.items()}


class TestSatisfaction:
    def test_reflexive_point(self):
        assert satisfies(LOOP, "w", Dia(p))
        assert satisfies(LOOP, "w", parse_core("~box ~p"))

    def test_vacuous_box(self):
        m = KripkeModel(("w",), frozenset(), {})
        assert satisfies(m, "w", parse_core("box q"))

    def test_unknown_world(self):
        with pytest.raises(UnknownWorld):
            satisfies(LOOP, "u", p)

    def test_nonstandard_counter_model(self):
        assert not satisfies_nonstandard(LOOP, "w", Dia(p))
        assert satisfies_nonstandard(LOOP, "w", parse_core("~box ~p"))
        assert not satisfies_nonstandard(LOOP, "w", Dia(Neg(p)))

    def test_nonstandard_refuses_box_primitive(self):
        with pytest.raises(ValueError):
            satisfies_nonstandard(LOOP, "w", box(p, Convention.BOX), Convention.BOX)

    @given(models(), diamond_formulas())
    def test_matches_oracle(self, m, f):
        args = oracle_args(m)
        for w in m.worlds:
            assert satisfies(m, w, f) == oracle.holds(*args, w, f)
            assert satisfies_nonstandard(m, w, f) == oracle.holds(*args, w, f, nonstandard=True)

    @given(models(), formulas(modal=(), max_leaves=4))
    def test_nonstandard_agrees_on_negated_dia(self, m, f):
        g = Dia(Neg(f))
        assert extension(m, g, Semantics.NONSTANDARD) == extension(m, g)

    @given(models(), diamond_formulas(max_leaves=4))
    def test_negated_dia_clause_is_existential(self, m, f):
        # with nested dia the two semantics disagree on f itself, so the
        # clause is compared against the nonstandard truth of f
        inner = extension(m, f, Semantics.NONSTANDARD)
        outer = extension(m, Dia(Neg(f)), Semantics.NONSTANDARD)
        for w in m.worlds:
            assert (w in outer) == any(u not in inner for u in m.successors(w))

    @given(models(), formulas(modal=()))
    def test_semantics_agree_without_dia(self, m, f):
        assert extension(m, f, Semantics.NONSTANDARD) == extension(m, f)

    @given(models(), diamond_formulas())
    def test_necessitation_preserves_global_truth(self, m, f):
        if globally_true(m, f):
            assert globally_true(m, box(f))


class TestGlobalTruth:
    def test_everywhere_true(self):
        m = KripkeModel(("a", "b"), frozenset(), {"p": frozenset({"a", "b"})})
        assert globally_true(m, p)

    def test_tautology(self):
        assert globally_true(LOOP, parse_core("p -> p"))

    def test_falsified_somewhere(self):
        m = KripkeModel(("a", "b"), frozenset(), {"p": frozenset({"a"})})
        assert not globally_true(m, p)


class TestFrames:
    def test_complete_graph_is_euclidean(self):
        w = ("a", "b", "c")
        m = KripkeModel(w, frozenset((x, y) for x in w for y in w), {})
        assert frame_has_property(m, FrameClass.EUCLIDEAN).holds

    def test_chain_is_not_euclidean(self):
        m = KripkeModel(("w", "u"), frozenset({("w", "u")}), {})
        check = frame_has_property(m, FrameClass.EUCLIDEAN)
        assert not check.holds
        assert check.witness == ("w", "u", "u")

    def test_empty_relation_is_ti(self):
        m = KripkeModel(("w", "u"), frozenset(), {})
        assert frame_has_property(m, FrameClass.TRANSITIVE_IRREFLEXIVE).holds

    @given(models(max_worlds=4, atoms=()))
    def test_matches_oracle(self, m):
        args = oracle_args(m)[:2]
        assert frame_has_property(m, FrameClass.EUCLIDEAN).holds == oracle.euclidean(*args)
        assert frame_has_property(m, FrameClass.TRANSITIVE_IRREFLEXIVE).holds == oracle.transitive_irreflexive(*args)

    @pytest.mark.parametrize("fc", list(FrameClass))
    def test_model_count_matches_enumeration(self, fc):
        assert model_count(3, 1, fc) == sum(1 for _ in iter_models(3, ["p"], fc))

    @pytest.mark.parametrize("fc", list(FrameClass))
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_frame_count_table(self, fc, n):
        assert frame_count(n, fc) == len(frames(n, fc))

    def test_model_counts(self):
        # 2 + 16 frames, each with 2^n valuations of one variable
        assert model_count(2, 1, FrameClass.ALL) == 68


class TestValidity:
    def test_k_axiom(self):
        assert valid_up_to(parse_core("box (p -> q) -> box p -> box q"), 3).holds

    def test_dual_fails_nonstandard_on_the_loop(self):
        res = valid_up_to(parse_core("dia p <-> ~box ~p"), 1, semantics=Semantics.NONSTANDARD)
        assert not res.holds
        assert res.countermodel == KripkeModel(("w0",), frozenset({("w0", "w0")}), {"p": frozenset({"w0"})})

    def test_p_implies_box_p(self):
        # frozen from the oracle: smallest counter-model has two worlds
        res = valid_up_to(parse_core("p -> box p"), 2)
        assert not res.holds
        assert len(res.countermodel.worlds) == 2
        assert not satisfies(res.countermodel, res.world, parse_core("p -> box p"))
        assert oracle.valid(parse_core("p -> box p"), 1)
        assert not oracle.valid(parse_core("p -> box p"), 2)

    @pytest.mark.parametrize(
        "text, fc, n",
        [
            ("dia p -> box dia p", FrameClass.EUCLIDEAN, 3),
            ("dia p -> box dia p", FrameClass.ALL, 2),
            ("box (box p -> p) -> box p", FrameClass.TRANSITIVE_IRREFLEXIVE, 3),
            ("box p -> box box p", FrameClass.ALL, 3),
            ("dia box p -> box p", FrameClass.EUCLIDEAN, 3),
        ],
    )
    def test_matches_oracle(self, text, fc, n):
        frame = {FrameClass.ALL: None, FrameClass.EUCLIDEAN: oracle.euclidean,
                 FrameClass.TRANSITIVE_IRREFLEXIVE: oracle.transitive_irreflexive}[fc]
        f = parse_core(text)
        assert valid_up_to(f, n, fc).holds == oracle.valid(f, n, frame)

    @given(diamond_formulas(atoms=("p",), max_leaves=4))
    def test_antitone(self, f):
        if valid_up_to(f, 3).holds:
            assert valid_up_to(f, 2).holds and valid_up_to(f, 1).holds

    @given(diamond_formulas(atoms=("p",), max_leaves=4))
    def test_countermodel_really_refutes(self, f):
        res = valid_up_to(f, 2)
        if not res.holds:
            assert not satisfies(res.countermodel, res.world, f)

    def test_budget(self):
        with pytest.raises(ResourceLimit):
            valid_up_to(parse_core("dia p"), 4, budget=Budget(max_models=10))
        with pytest.raises(ResourceLimit):
            valid_up_to(parse_core("dia p"), 5, budget=Budget(max_worlds=4))

    def test_budget_from_env(self, monkeypatch):
        monkeypatch.setenv("MODAL_BUDGET", "123")
        assert Budget.from_env().max_models == 123


class TestConsequence:
    def test_necessitation_is_not_local(self):
        res = consequence_check([p], box(p), "local", 3)
        assert not res.holds
        m, w = res.countermodel, res.world
        assert satisfies(m, w, p) and not satisfies(m, w, box(p))

    def test_necessitation_is_global(self):
        assert consequence_check([p], box(p), "global", 3).holds

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_modus_ponens_local(self, n):
        assert consequence_check([p, parse_core("p -> q")], q, "local", n).holds


class TestModelFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(LOOP.to_json()))
        assert load_model(path) == LOOP

    @pytest.mark.parametrize(
        "data",
        [
            {"worlds": ["w"], "rel": [["w", "w"], ["w", "w"]], "val": {}},
            {"worlds": ["w"], "rel": [["w", "x"]], "val": {}},
            {"worlds": [], "rel": [], "val": {}},
            {"worlds": ["w"], "rel": [], "val": {"p": ["u"]}},
        ],
    )
    def test_rejects_malformed(self, data):
        with pytest.raises(ModelError):
            KripkeModel.from_json(data)

    def test_variables_helper(self):
        assert variables(parse_core("q -> dia p")) == ("p", "q")
