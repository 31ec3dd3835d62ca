import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import finite_problems
from mixlab.diagnostics import diagnose, eta_star_on_g
from mixlab.errors import ConfigurationError
from mixlab.mixability import eta_root
from mixlab.problem import ExcessLossRV, constant_problem


def test_absolute_loss_two_minimizers(abs_bern50):
    rep = diagnose(abs_bern50, [0.5])
    row = rep.rows[0]
    assert row.size == 2 and not row.mixable and row.eta_star == 0.0
    assert row.minimizer_multiplicity == 2 and row.min_excess_risk_on_far_set == 0.0
    assert rep.verdict == "non_unique_minimizers" and rep.consistent


def test_squared_loss_unique(bern75):
    root = eta_root(ExcessLossRV.from_atoms([(-1, 0.25), (1, 0.75)], 1.0)).eta
    rep = diagnose(bern75, [0.1, 0.5, 1.0])
    for row in rep.rows:
        assert row.mixable and row.minimizer_multiplicity == 1
        assert row.eta_star == pytest.approx(root, abs=1e-12)
        assert row.eta_star == pytest.approx(math.log(3), abs=1e-9)
    assert rep.verdict == "effectively_unique"


def test_singleton_class():
    rep = diagnose(constant_problem([0, 1], [0.5, 0.5], {"h": 0.5}), [0.1])
    row = rep.rows[0]
    assert row.mixable and row.minimizer_multiplicity == 1 and row.min_excess_risk_on_far_set is None


def test_far_set_excludes_close_hypotheses():
    p = constant_problem([0, 1], [0.5, 0.5], {"half": 0.5, "near": 0.55, "far": 0.9})
    rows = diagnose(p, [0.1, 0.5]).rows
    assert rows[0].size == 2 and rows[0].min_excess_risk_on_far_set == pytest.approx(0.16)
    assert rows[1].size == 1


def test_grid_validation(bern75):
    with pytest.raises(ConfigurationError):
        diagnose(bern75, [])
    with pytest.raises(ConfigurationError):
        diagnose(bern75, [0.1, 0.0])


@settings(max_examples=150, deadline=None)
@given(finite_problems(max_hyps=5, loss="absolute"))
def test_nonmixable_zero_excess_means_two_minimizers(problem):
    rep = diagnose(problem, [0.05, 0.2, 0.5])
    assert rep.consistent
    for row in rep.rows:
        if not row.mixable and row.min_excess_risk_on_far_set == 0:
            assert row.minimizer_multiplicity >= 2


@settings(max_examples=150, deadline=None)
@given(finite_problems(max_hyps=5), st.lists(st.floats(0.01, 1.0), min_size=2, max_size=5))
def test_eta_star_on_g_monotone(problem, eps):
    eps = sorted(eps)
    vals = [eta_star_on_g(problem, e) for e in eps]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
