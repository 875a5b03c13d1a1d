from __future__ import annotations

import os
from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from punq.amplitude import Amplitude
from punq.syntax import parse_program
from punq.types import B, Forall, Imp, Lin, Par, Prod, Sharp, TVar

settings.register_profile(
    "punq",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "punq"))


small_fracs = st.fractions(min_value=-4, max_value=4, max_denominator=6)


@st.composite
def amplitudes(draw, nonzero: bool = False):
    parts = [draw(small_fracs) for _ in range(4)]
    a = Amplitude(*parts)
    if nonzero and a.is_zero():
        a = Amplitude(Fraction(1))
    return a


ground_types = st.recursive(
    st.just(B),
    lambda inner: st.one_of(
        inner.map(Sharp),
        inner.map(Par),
        st.tuples(inner, inner).map(lambda p: Prod(*p)),
    ),
    max_leaves=4,
)


def _types(inner):
    return st.one_of(
        ground_types,
        st.tuples(inner, inner).map(lambda p: Lin(*p)),
        st.tuples(inner, inner).map(lambda p: Imp(*p)),
        st.tuples(inner, inner).map(lambda p: Prod(*p)),
        inner.map(Par),
        inner.map(lambda t: Forall("Y", t)),
    )


types = st.recursive(st.one_of(st.just(B), st.just(TVar("X"))), _types, max_leaves=5)
closed_types = st.recursive(st.just(B), _types, max_leaves=5)


def program(text: str):
    return parse_program(text)


CRITERIA = {
    1: "corpus typing",
    2: "concrete traces",
    3: "unitarity",
    4: "completeness round trip",
    5: "subject reduction and norm",
    6: "polytime behavior",
    7: "fragment inclusion",
    8: "uninhabitation probes",
    9: "algebra suite",
}
_outcomes: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    outcome = "passed" if call.excinfo is None else "failed"
    if call.excinfo is not None and item.get_closest_marker("xfail"):
        outcome = "xfailed"
    _outcomes.setdefault(mark.args[0], []).append(outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        got = _outcomes.get(n)
        if not got:
            continue
        if "failed" in got:
            verdict = "FAIL"
        elif "xfailed" in got:
            verdict = f"FAIL (xfail strict, {got.count('xfailed')} documented)"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {n} {title}: {verdict} [{got.count('passed')}/{len(got)} tests passed]")
