import os
import sys

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from modalwb.formula import Box, Dia, Impl, Neg, Var
from modalwb.semantics import KripkeModel

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ATOMS = ("p", "q")


def formulas(atoms=ATOMS, modal=(Dia, Box), max_leaves=6):
    """Core formulas built from the given modal constructors."""
    leaf = st.sampled_from([Var(a) for a in atoms])

    def extend(children):
        unary = [st.builds(Neg, children)] + [st.builds(m, children) for m in modal]
        return st.one_of(*unary, st.builds(Impl, children, children))

    return st.recursive(leaf, extend, max_leaves=max_leaves)


def diamond_formulas(**kw):
    return formulas(modal=(Dia,), **kw)


def box_formulas(**kw):
    return formulas(modal=(Box,), **kw)


@st.composite
def models(draw, max_worlds=4, atoms=ATOMS, euclidean=False):
    n = draw(st.integers(1, max_worlds))
    worlds = tuple(f"w{i}" for i in range(n))
    rel = {(a, b) for a in worlds for b in worlds if draw(st.booleans())}
    if euclidean:
        # close under the Euclidean rule
        changed = True
        while changed:
            extra = {(y, z) for (x, y) in rel for (x2, z) in rel if x == x2} - rel
            rel |= extra
            changed = bool(extra)
    val = {p: frozenset(w for w in worlds if draw(st.booleans())) for p in atoms}
    return KripkeModel(worlds, frozenset(rel), val)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in sorted(results):
            terminalreporter.write_line(line)
