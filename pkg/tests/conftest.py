import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from bostconnes import bcdata
from bostconnes.bcdata import Datum

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

QZ = bcdata.QmodZ


def all_data():
    return [
        Datum("qmodz"),
        Datum("weil_zero", 4),
        Datum("weil", 4),
        Datum("weil", 2),
        Datum("weil_hat", 4),
        Datum("alg_num_model", generators=(2, 3)),
        Datum("pair_switch"),
        Datum("rank_two"),
        Datum("germ_alpha_one"),
    ]


def concrete_data():
    return [d for d in all_data() if d.concrete]


@pytest.fixture(params=all_data(), ids=str)
def datum(request):
    return request.param


@pytest.fixture(params=concrete_data(), ids=str)
def concrete(request):
    return request.param


def roots(level: int = 24):
    return st.integers(0, level - 1).map(lambda a: QZ(Fraction(a, level)))


def elements(d: Datum, level: int = 24):
    """Hypothesis strategy for elements of the datum with roots at the given level."""
    k = d.kind
    if k in ("qmodz", "weil_zero"):
        return roots(level)
    if k in ("pair_switch", "rank_two"):
        return st.builds(bcdata.PairElem, roots(level), roots(level))
    if k == "weil":
        return st.builds(bcdata.WeilCycElem, roots(level), st.integers(-6, 6), st.just(d.q))
    if k == "weil_hat":
        half = st.integers(0, 2 * level - 1).map(lambda a: bcdata.HalfIntQmod2Z(Fraction(a, level)))
        return st.builds(bcdata.WeilHatElem, roots(level), half, st.just(d.q))
    if k == "alg_num_model":
        ex = st.tuples(*[st.fractions(-6, 6, max_denominator=3) for _ in d.generators])
        return st.builds(bcdata.AlgNumModelElem, roots(level), ex)
    return st.fractions(-20, 20, max_denominator=12).map(bcdata.GermElem)
