import json
import math

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import finite_problems
from mixlab.errors import ConfigurationError
from mixlab.problem import (
    Atom,
    ExcessLossRV,
    Hypothesis,
    LearningProblem,
    Loss,
    constant_problem,
    excess_loss,
    excess_risks,
    f_star,
    g_epsilon,
    load_problem,
    minimizers,
    problem_from_dict,
    problem_to_dict,
    risk,
    sample,
    subclass_at_least,
    subclass_at_most,
)


def test_risk_fair_coin():
    p = constant_problem([0, 1], [0.5, 0.5], {"zero": 0.0, "half": 0.5})
    assert risk(p, p.hypothesis("zero")) == pytest.approx(0.5, abs=1e-15)
    assert risk(p, p.hypothesis("half")) == pytest.approx(0.25, abs=1e-15)


def test_risk_bern75(bern75):
    assert risk(bern75, bern75.hypothesis("f1")) == pytest.approx(0.25, abs=1e-15)


def test_undefined_label_is_named():
    atoms = (Atom("a", 0.0, 0.5), Atom("b", 1.0, 0.5))
    with pytest.raises(ConfigurationError, match="'b'"):
        LearningProblem(atoms, Loss(), (Hypothesis("h", {"a": 0.0}),), 1.0)


def test_loss_bound_enforced():
    with pytest.raises(ConfigurationError, match="V"):
        constant_problem([0, 1], [0.5, 0.5], {"far": 2.0})


def test_probabilities_must_sum_to_one():
    with pytest.raises(ConfigurationError):
        LearningProblem((Atom("x", 0.0, 0.5),), Loss(), (Hypothesis("h", {"x": 0.0}),), 1.0)


def test_duplicate_names_rejected():
    with pytest.raises(ConfigurationError):
        LearningProblem(
            (Atom("x", 0.0, 1.0),), Loss(),
            (Hypothesis("h", {"x": 0.0}), Hypothesis("h", {"x": 1.0})), 1.0,
        )


@pytest.mark.parametrize("kind,y,q,expected", [
    ("squared", 1.0, 0.25, 0.5625),
    ("absolute", 0.0, 0.75, 0.75),
    ("zero_one", 1.0, 0.0, 1.0),
    ("zero_one", 1.0, 1.0, 0.0),
    ("log", 1.0, 0.5, math.log(2)),
    ("log", 0.0, 0.5, math.log(2)),
])
def test_loss_values(kind, y, q, expected):
    assert float(Loss(kind)(y, q)) == pytest.approx(expected, rel=1e-14)


def test_p_loss_and_exponent_validation():
    assert float(Loss("p_loss", 3.0)(1.0, 0.5)) == pytest.approx(0.125)
    with pytest.raises(ConfigurationError):
        Loss("p_loss")
    with pytest.raises(ConfigurationError):
        Loss("squared", 2.0)
    with pytest.raises(ConfigurationError):
        Loss("hinge")


def test_log_loss_rejects_zero_prediction():
    with pytest.raises(ConfigurationError):
        Loss("log")(1.0, 0.0)


def test_minimizers_singleton():
    p = constant_problem([0], [1.0], {"only": 0.3})
    mins = minimizers(p)
    assert [h.name for h in mins] == ["only"] and mins.unique


def test_minimizers_absolute_tie(abs_bern50):
    mins = minimizers(abs_bern50, 0.0)
    assert [h.name for h in mins] == ["f0", "f1"]
    assert not mins.unique and mins.multiplicity == 2


def test_minimizers_bern75(bern75):
    mins = minimizers(bern75, 0.0)
    assert [h.name for h in mins] == ["f1"]


def test_loss_equivalent_minimizers_count_once():
    atoms = (Atom("a", 1.0, 1.0), Atom("b", 0.0, 0.0))
    hyps = (Hypothesis("u", {"a": 1.0, "b": 0.0}), Hypothesis("v", {"a": 1.0, "b": 1.0}))
    mins = minimizers(LearningProblem(atoms, Loss(), hyps, 1.0))
    assert len(mins) == 2 and mins.unique and mins.multiplicity == 1


def test_excess_loss_examples(bern75, abs_bern50):
    f1 = bern75.hypothesis("f1")
    assert excess_loss(bern75, f1, f1).atoms == [(0.0, 1.0)]
    # Z = 2Y - 1: the value -1 comes from Y = 0, which has probability 0.25
    z = excess_loss(bern75, bern75.hypothesis("f0"), f1)
    assert z.atoms == [(-1.0, 0.25), (1.0, 0.75)]
    assert z.mean == 0.5
    z = excess_loss(abs_bern50, abs_bern50.hypothesis("f1"), abs_bern50.hypothesis("f0"))
    assert z.atoms == [(-1.0, 0.5), (1.0, 0.5)]


def test_excess_loss_merges_equal_values():
    rv = ExcessLossRV.from_atoms([(0.5, 0.25), (0.5, 0.25), (-0.5, 0.5), (1.0, 0.0)], 1.0)
    assert rv.atoms == [(-0.5, 0.5), (0.5, 0.5)]


def test_excess_loss_support_bound():
    with pytest.raises(ConfigurationError):
        ExcessLossRV.from_atoms([(2.0, 1.0)], 1.0)


def test_subclass_examples(bern75):
    assert len(subclass_at_least(bern75, 0.0)) == 2
    assert [h.name for h in subclass_at_least(bern75, 0.5)] == ["f0"]
    assert subclass_at_least(bern75, 1.5) == []
    # f0 sits exactly on the boundary and lands in both halves
    assert [h.name for h in subclass_at_most(bern75, 0.5)] == ["f1", "f0"]


def test_g_epsilon_examples(bern75):
    assert [h.name for h in g_epsilon(bern75, 0.5)] == ["f1", "f0"]
    assert [h.name for h in g_epsilon(bern75, 2.0)] == ["f1"]
    assert len(g_epsilon(bern75, 5e-324)) == 2


def test_g_epsilon_drops_exact_duplicates():
    p = constant_problem([0, 1], [0.25, 0.75], {"a": 1.0, "b": 1.0, "c": 0.0})
    assert [h.name for h in g_epsilon(p, 5e-324)] == ["a", "c"]


def test_sample_degenerate_and_deterministic(bern75):
    p = constant_problem([1], [1.0], {"h": 1.0})
    assert sample(p, 5, seed=3) == [("x0", 1.0)] * 5
    assert sample(bern75, 50, seed=11) == sample(bern75, 50, seed=11)


def test_sample_frequency(bern75):
    s = sample(bern75, 100_000, seed=7)
    freq = sum(1 for _, y in s if y == 1.0) / len(s)
    assert abs(freq - 0.75) < 0.01


def test_json_roundtrip(tmp_path, bern75):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(problem_to_dict(bern75)))
    again = load_problem(path)
    assert again.names == bern75.names
    np.testing.assert_array_equal(again.loss_matrix, bern75.loss_matrix)


def test_loader_tolerance():
    spec = problem_to_dict(constant_problem([0, 1], [0.25, 0.75], {"a": 1.0}))
    spec["atoms"][0]["p"] += 5e-10
    prob = problem_from_dict(spec)
    assert math.fsum(prob.probs) == pytest.approx(1.0, abs=1e-15)
    spec["atoms"][0]["p"] += 1e-6
    with pytest.raises(ConfigurationError, match="1e-9"):
        problem_from_dict(spec)


def test_loader_reports_missing_fields(tmp_path):
    with pytest.raises(ConfigurationError, match="hypotheses"):
        problem_from_dict({"atoms": [], "loss": {"kind": "squared"}, "loss_bound": 1})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError):
        load_problem(bad)


@settings(max_examples=100, deadline=None)
@given(finite_problems())
def test_excess_loss_mean_matches_risk_gap(problem):
    fs = f_star(problem)
    ex = excess_risks(problem, fs)
    assert np.all(ex >= 0)
    for h, e in zip(problem.hypotheses, ex):
        rv = excess_loss(problem, h, fs)
        assert rv.mean == pytest.approx(e, abs=1e-14)
        assert np.all(np.abs(rv.z) <= problem.loss_bound)


@settings(max_examples=100, deadline=None)
@given(finite_problems())
def test_subclass_partition(problem):
    ex = excess_risks(problem)
    for eps in sorted(set(ex)) + [0.01, 0.2]:
        hi = subclass_at_least(problem, eps)
        lo = subclass_at_most(problem, eps)
        assert {h.name for h in hi} | {h.name for h in lo} == set(problem.names)
        both = {h.name for h in hi} & {h.name for h in lo}
        assert all(ex[problem.index(n)] == eps for n in both) or eps == 0


@settings(max_examples=100, deadline=None)
@given(finite_problems())
def test_g_epsilon_monotone(problem):
    grid = [0.01, 0.05, 0.1, 0.3, 0.6]
    sets = [{h.name for h in g_epsilon(problem, e)} for e in grid]
    for small, big in zip(sets, sets[1:]):
        assert big <= small
