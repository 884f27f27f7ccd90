from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from qsminimal.construction import normalize_params
from qsminimal.numerics import format_rational

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def level_rows(draw):
    """(n, c, gaps) with sum(gaps) + n c == 1 exactly."""
    n = draw(st.integers(2, 4))
    den = draw(st.integers(n + 1, 40))
    num = draw(st.integers(1, den // n))
    c = Fraction(num, den)
    rest = 1 - n * c
    weights = draw(st.lists(st.integers(0, 6), min_size=n + 1, max_size=n + 1))
    total = sum(weights)
    if total == 0 or rest == 0:
        gaps = [Fraction(0)] * (n + 1)
        gaps[n // 2] = rest
    else:
        gaps = [rest * w / total for w in weights]
    return n, c, gaps


@st.composite
def param_docs(draw, min_depth=1, max_depth=5):
    rows = draw(st.lists(level_rows(), min_size=min_depth, max_size=max_depth))
    return {
        "branching": [n for n, _, _ in rows],
        "ratio": [format_rational(c) for _, c, _ in rows],
        "gaps": [[format_rational(g) for g in gaps] for _, _, gaps in rows],
    }


@st.composite
def param_specs(draw, min_depth=1, max_depth=5):
    return normalize_params(draw(param_docs(min_depth, max_depth)))


@pytest.fixture
def middle_thirds_doc():
    return {"branching": [2], "ratio": ["1/3"], "gaps": [["0", "1/3", "0"]],
            "tail": "periodic"}
