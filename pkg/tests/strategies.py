"""Hypothesis strategies shared by the test modules."""
from hypothesis import strategies as st

from impobj.harness import GenConfig, closed_universe, gen_well_typed
from impobj.harness.generate import GenerationFailed
from impobj.syntax.ast import BOT, TOP, Arrow, Mu, ObjV, TVar

UNIVERSE = closed_universe()

universe_types = st.sampled_from(UNIVERSE)


@st.composite
def well_typed(draw, depth=4, mode="variance"):
    seed = draw(st.integers(0, 2**31 - 1))
    try:
        return gen_well_typed(GenConfig(max_term_depth=depth, seed=seed, mode=mode))
    except GenerationFailed:
        from hypothesis import assume

        assume(False)


def _types(var_pool):
    leaves = [st.just(TOP), st.just(BOT)] + [st.just(TVar(v)) for v in var_pool]
    return st.recursive(
        st.one_of(leaves),
        lambda inner: st.one_of(
            st.builds(Arrow, inner, inner),
            st.lists(st.tuples(st.sampled_from("mnp"), st.sampled_from(["inv", "cov", "con"]), inner), max_size=3, unique_by=lambda m: m[0]).map(
                lambda ms: ObjV(tuple(sorted(ms)))
            ),
        ),
        max_leaves=5,
    )


closed_types = _types(())
mu_types = _types(("X",)).map(lambda body: Mu("X", body))
