import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from conftest import finite_problems
from mixlab.errors import ConfigurationError, NonUniqueMinimizerError, UnboundedBernsteinError
from mixlab.mixability import (
    HYPER,
    NEGATIVE_MEAN,
    ROOT,
    ZERO_MEAN,
    bernstein_constant,
    cgf,
    check_weak_mixability,
    eta_root,
    eta_star,
    hyper_perturb,
)
from mixlab.problem import Atom, ExcessLossRV, Hypothesis, LearningProblem, Loss, constant_problem


def rv(*atoms, V=1.0):
    return ExcessLossRV.from_atoms(atoms, V)


LN3_RV = rv((-1, 0.25), (1, 0.75))


@st.composite
def excess_rvs(draw, min_atoms=1, max_atoms=5):
    k = draw(st.integers(min_atoms, max_atoms))
    zs = draw(st.lists(st.integers(-20, 20), min_size=k, max_size=k, unique=True))
    ws = draw(st.lists(st.integers(1, 30), min_size=k, max_size=k))
    total = sum(ws)
    return rv(*[(z / 20, w / total) for z, w in zip(zs, ws)])


def test_cgf_examples():
    assert cgf(rv((0.0, 1.0)), 7.0) == 0.0
    assert abs(cgf(LN3_RV, math.log(3))) < 1e-15
    assert cgf(rv((-1, 0.5), (1, 0.5)), 1.0) == pytest.approx(math.log(math.cosh(1.0)), rel=1e-14)
    assert cgf(LN3_RV, 0.0) == 0.0


def test_cgf_large_eta_stays_finite():
    assert cgf(LN3_RV, 1e6) == pytest.approx(1e6 + math.log(0.25), rel=1e-12)


def test_eta_root_ln3():
    res = eta_root(LN3_RV)
    assert res.status == ROOT
    assert res.eta == pytest.approx(math.log(3), abs=1e-9)


def test_eta_root_matches_independent_bisection():
    # oracle: bracketed root of the raw moment equation
    oracle = brentq(lambda e: 0.2 * math.exp(e) + 0.8 * math.exp(-0.3 * e) - 1, 0.01, 10, xtol=1e-15)
    res = eta_root(rv((-1, 0.2), (0.3, 0.8)))
    assert res.status == ROOT
    assert res.eta == pytest.approx(oracle, abs=1e-10)
    assert res.eta == pytest.approx(0.276052485819946, abs=1e-12)


def test_eta_root_statuses():
    hyper = eta_root(rv((0, 0.5), (1, 0.5)))
    assert hyper.status == HYPER and hyper.limit == 0.5 and hyper.constraint == math.inf
    assert eta_root(rv((-1, 0.5), (1, 0.5))).status == ZERO_MEAN
    assert eta_root(rv((-1, 0.75), (1, 0.25))).status == NEGATIVE_MEAN
    assert eta_root(rv((-1, 0.5), (1, 0.5))).constraint == 0.0


def _two_root_problem():
    # excess losses {(-1,.25),(1,.75)} and {(-1,.2),(.3,.8)} against f*
    atoms = (Atom("a", 0.0, 0.2), Atom("b", 0.0, 0.05), Atom("c", 0.0, 0.75))
    hyps = (
        Hypothesis("star", {"a": 1.0, "b": 1.0, "c": 0.7}),
        Hypothesis("f1", {"a": 0.0, "b": 0.0, "c": 1.7}),
        Hypothesis("f2", {"a": 0.0, "b": 1.3, "c": 1.0}),
    )
    return LearningProblem(atoms, Loss("absolute"), hyps, 2.0)


def test_eta_star_is_min_root():
    prof = eta_star(_two_root_problem())
    assert prof.f_star == "star"
    assert prof.per_function["f1"].eta == pytest.approx(math.log(3), abs=1e-9)
    assert prof.eta_star == pytest.approx(0.276052485819946, abs=1e-10)
    assert prof.binding == "f2" and prof.mixable


def test_eta_star_singleton_is_infinite():
    prof = eta_star(constant_problem([0, 1], [0.5, 0.5], {"h": 0.5}))
    assert prof.eta_star == math.inf and prof.mixable


def test_eta_star_non_unique(abs_bern50):
    with pytest.raises(NonUniqueMinimizerError) as info:
        eta_star(abs_bern50)
    assert [h.name for h in info.value.minimizers] == ["f0", "f1"]


def test_weak_mixability_examples(bern75):
    ln3 = math.log(3)
    assert check_weak_mixability(bern75, 1.0, ln3 - 1e-6).holds
    assert not check_weak_mixability(bern75, 1.0, ln3 + 1e-6).holds
    res = check_weak_mixability(bern75, 0.5, 1e6)
    assert not res and res.witness[0] == "f0" and res.witness[3] > 0
    # excess risk level 0.5, eta_eps = eta0 * 0.5**0.5 below ln 3
    assert check_weak_mixability(bern75, 0.5, 1.5).holds


def test_weak_mixability_ranges(bern75):
    with pytest.raises(ConfigurationError):
        check_weak_mixability(bern75, 1.5, 1.0)
    with pytest.raises(ConfigurationError):
        check_weak_mixability(bern75, 0.5, 0.0)


def test_bernstein_examples(bern75):
    assert bernstein_constant(bern75, 1.0).B == pytest.approx(2.0, rel=1e-15)
    assert bernstein_constant(bern75, 0.5).B == pytest.approx(math.sqrt(2), rel=1e-15)
    single = constant_problem([0, 1], [0.5, 0.5], {"h": 0.5})
    assert bernstein_constant(single, 1.0).B == 0.0


def test_bernstein_unbounded(abs_bern50):
    with pytest.raises(UnboundedBernsteinError):
        bernstein_constant(abs_bern50, 1.0)


def test_hyper_perturb_example():
    res = hyper_perturb(rv((0, 0.5), (1, 0.5)), 0.01)
    np.testing.assert_allclose(np.array(res.perturbed.atoms), [(-1, 0.005), (0, 0.5), (1, 0.495)], atol=1e-15)
    assert res.perturbed.mean == pytest.approx(0.49, abs=1e-15)
    assert res.eta == pytest.approx(math.log(99), abs=1e-9)
    assert hyper_perturb(rv((0, 0.5), (1, 0.5)), 0.1).eta == pytest.approx(math.log(9), abs=1e-9)


def test_hyper_perturb_small_eps_keeps_mean():
    z = rv((0, 0.5), (1, 0.5))
    assert hyper_perturb(z, 1e-9).perturbed.mean == pytest.approx(z.mean, abs=1e-8)


def test_hyper_perturb_rejects_sign_mixed():
    with pytest.raises(ConfigurationError):
        hyper_perturb(LN3_RV, 0.1)


@settings(max_examples=200, deadline=None)
@given(excess_rvs())
def test_cgf_convex(z):
    etas = np.linspace(0, 20, 201)
    vals = np.array([cgf(z, e) for e in etas])
    assert np.all(vals[:-2] - 2 * vals[1:-1] + vals[2:] >= -1e-9)


@settings(max_examples=200, deadline=None)
@given(excess_rvs(min_atoms=2), st.floats(0.1, 5.0))
def test_eta_root_scaling(z, c):
    res = eta_root(z)
    assume(res.status == ROOT)
    scaled = eta_root(z.scaled(c))
    assert scaled.status == ROOT
    assert scaled.eta == pytest.approx(res.eta / c, rel=1e-10)


@settings(max_examples=300, deadline=None)
@given(excess_rvs(min_atoms=2))
def test_root_residual(z):
    res = eta_root(z)
    assume(res.status == ROOT)
    assert abs(cgf(z, res.eta)) <= 1e-10
    assert cgf(z, res.eta + 0.01) > 0


@settings(max_examples=200, deadline=None)
@given(excess_rvs(), st.floats(0.001, 0.49))
def test_hyper_perturb_properties(z, eps):
    assume(z.min_value >= 0 and z.mean > 0)
    res = hyper_perturb(z, eps)
    zp = res.perturbed
    moment = math.fsum(p * math.exp(-res.eta * v) for v, p in zp.atoms)
    assert moment == pytest.approx(1.0, abs=1e-10)
    assert all(after <= before for before, after, _ in res.coupling)
    assert abs(zp.mean - z.mean) <= 2 * eps * z.support_bound + 1e-15
    # the coupling's marginals are Z and Z'
    first = rv(*[(b, p) for b, _, p in res.coupling])
    second = rv(*[(a, p) for _, a, p in res.coupling])
    np.testing.assert_allclose(np.array(first.atoms), np.array(z.atoms), atol=1e-15)
    np.testing.assert_allclose(np.array(second.atoms), np.array(zp.atoms), atol=1e-15)


@settings(max_examples=150, deadline=None)
@given(finite_problems(max_hyps=5), st.data())
def test_eta_star_subclass_monotone(problem, data):
    try:
        full = eta_star(problem)
    except NonUniqueMinimizerError:
        assume(False)
    keep = data.draw(st.lists(st.sampled_from(problem.names), unique=True))
    names = sorted(set(keep) | {full.f_star}, key=problem.index)
    sub = eta_star(problem.restrict(names), f_star=problem.hypothesis(full.f_star))
    assert sub.eta_star >= full.eta_star


@settings(max_examples=500, deadline=None)
@given(finite_problems(max_hyps=4))
def test_finite_bernstein_implies_mixable(problem):
    try:
        bernstein_constant(problem, 1.0)
    except UnboundedBernsteinError:
        assume(False)
    assert eta_star(problem).eta_star > 0


@settings(max_examples=100, deadline=None)
@given(finite_problems(max_hyps=4))
def test_bernstein_inequality_holds(problem):
    try:
        fit = bernstein_constant(problem, 0.5)
    except UnboundedBernsteinError:
        assume(False)
    from mixlab.problem import excess_loss, f_star
    fs = f_star(problem)
    for h in problem.hypotheses:
        z = excess_loss(problem, h, fs)
        if z.mean > 0:
            assert z.second_moment <= fit.B * z.mean**0.5 * (1 + 1e-12)
