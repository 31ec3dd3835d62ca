"""Cumulant generating functions and stochastic mixability constants.

For an excess loss ``Z`` the relevant CGF is that of ``-Z``::

    cgf(Z, eta) = log E exp(-eta Z)

It is convex with ``cgf(0) = 0`` and slope ``-E Z`` at 0, so for a positive-mean
``Z`` with some negative support it has exactly one positive root, and the
mixability condition ``cgf(Z, eta) <= 0`` holds precisely on ``[0, root]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, NonUniqueMinimizerError, UnboundedBernsteinError
from .problem import (
    MINIMIZER_TOL,
    ExcessLossRV,
    Hypothesis,
    LearningProblem,
    excess_loss,
    excess_risks,
    minimizers,
)

ROOT_TOL = 1e-12
RESIDUAL_TOL = 1e-10
BRACKET_START = 1.0
# |E Z| below this (relative to the support bound) counts as zero mean.
MEAN_TOL = 1e-14

ROOT = "root"
HYPER = "hyper_concentrated"
ZERO_MEAN = "zero_mean"
NEGATIVE_MEAN = "negative_mean"


def cgf(rv: ExcessLossRV, eta: float) -> float:
    """``log E exp(-eta Z)``, evaluated without overflow."""
    if eta < 0:
        raise ConfigurationError("eta must be nonnegative")
    if eta == 0:
        return 0.0
    expo = -eta * rv.z
    top = expo.max()
    if top < 1.0:
        # log1p keeps the small-eta regime accurate where E exp(-eta Z) ~ 1
        s = float(np.dot(rv.p, np.expm1(expo)))
        if s > -0.5:
            return math.log1p(s)
    return float(top + math.log(np.dot(rv.p, np.exp(expo - top))))


@dataclass(frozen=True)
class EtaResult:
    """Outcome of solving ``E exp(-eta Z) = 1`` for the largest ``eta``.

    ``status`` is one of ``root``, ``hyper_concentrated``, ``zero_mean`` or
    ``negative_mean``; ``eta`` is set for ``root`` and ``limit`` (the value of
    ``lim E exp(-eta Z)``) for ``hyper_concentrated``.
    """

    status: str
    eta: float | None = None
    limit: float | None = None

    @property
    def constraint(self) -> float:
        """Largest eta for which the mixability inequality holds for this variable."""
        if self.status == ROOT:
            return self.eta
        if self.status == HYPER:
            return math.inf
        return 0.0


def _mean_status(rv: ExcessLossRV) -> str | None:
    mu = rv.mean
    scale = max(1.0, rv.support_bound)
    if abs(mu) <= MEAN_TOL * scale:
        return ZERO_MEAN
    if mu < 0:
        return NEGATIVE_MEAN
    return None


def eta_root(rv: ExcessLossRV) -> EtaResult:
    status = _mean_status(rv)
    if status is not None:
        return EtaResult(status)
    if rv.min_value >= 0:
        limit = math.fsum(p for z, p in rv.atoms if z == 0.0)
        return EtaResult(HYPER, limit=limit)

    # a negative atom makes cgf -> +inf, so geometric expansion terminates
    hi = BRACKET_START
    while cgf(rv, hi) <= 0:
        hi *= 2.0
    lo = 0.0
    while hi - lo > ROOT_TOL * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if cgf(rv, mid) <= 0:
            lo = mid
        else:
            hi = mid
    eta = 0.5 * (lo + hi)
    return EtaResult(ROOT, eta=eta)


@dataclass(frozen=True)
class MixabilityProfile:
    per_function: dict[str, EtaResult]
    eta_star: float
    f_star: str
    # hypothesis attaining eta_star (None when eta_star is +inf)
    binding: str | None

    @property
    def mixable(self) -> bool:
        return self.eta_star > 0


def eta_star(problem: LearningProblem, f_star: Hypothesis | None = None) -> MixabilityProfile:
    """Largest eta for which the problem is eta-stochastically mixable.

    With ``f_star=None`` the first minimizer is used and a non-unique minimizer
    raises :class:`NonUniqueMinimizerError`.  Passing ``f_star`` explicitly skips
    that check; a zero- or negative-mean excess loss then yields ``eta_star = 0``.
    """
    if f_star is None:
        mins = minimizers(problem, MINIMIZER_TOL)
        if not mins.unique:
            raise NonUniqueMinimizerError(mins.hypotheses)
        f_star = mins.first
    per: dict[str, EtaResult] = {}
    best, binding = math.inf, None
    for h in problem.hypotheses:
        if h is f_star:
            continue
        rv = excess_loss(problem, h, f_star)
        if rv.is_zero:
            # loss-equivalent to f*, imposes no constraint
            res = EtaResult(HYPER, limit=1.0)
        else:
            res = eta_root(rv)
        per[h.name] = res
        c = res.constraint
        if c < best or (c == best and binding is not None and h.name < binding):
            best, binding = c, h.name
    if best == math.inf:
        binding = None
    return MixabilityProfile(per, best, f_star.name, binding)


class WeakMixabilityResult(NamedTuple):
    holds: bool
    # (hypothesis name, eps level, eta_eps, cgf value) of the first violation
    witness: tuple[str, float, float, float] | None

    def __bool__(self):
        return self.holds


def check_weak_mixability(problem: LearningProblem, kappa: float, eta0: float) -> WeakMixabilityResult:
    """Check ``cgf(Z_f, eta0 * eps**(1-kappa)) <= 0`` for all ``f`` with excess risk ``>= eps``.

    Only the achieved positive excess-risk levels are checked: the class
    ``{f : excess >= eps}`` is constant between consecutive levels and ``eta_eps``
    grows with ``eps``, so each level's left endpoint is the binding one.
    """
    if not 0 <= kappa <= 1:
        raise ConfigurationError("kappa must lie in [0, 1]")
    if not eta0 > 0:
        raise ConfigurationError("eta0 must be positive")
    mins = minimizers(problem, MINIMIZER_TOL)
    fs = mins.first
    ex = excess_risks(problem, fs)
    levels = sorted({float(e) for e in ex if e > MINIMIZER_TOL})
    cache: dict[str, ExcessLossRV] = {}
    for eps in levels:
        eta_eps = eta0 * eps ** (1.0 - kappa)
        for h, e in zip(problem.hypotheses, ex):
            if h is fs or e < eps:
                continue
            rv = cache.get(h.name)
            if rv is None:
                rv = cache[h.name] = excess_loss(problem, h, fs)
            value = cgf(rv, eta_eps)
            if value > 0:
                return WeakMixabilityResult(False, (h.name, eps, eta_eps, value))
    return WeakMixabilityResult(True, None)


@dataclass(frozen=True)
class BernsteinFit:
    beta: float
    B: float
    # hypothesis attaining the max (None for the vacuous B = 0)
    binding: str | None = None


def bernstein_constant(problem: LearningProblem, beta: float) -> BernsteinFit:
    """Smallest ``B`` with ``E Z_f**2 <= B (E Z_f)**beta`` for every ``f``.

    ``B = 0`` when no hypothesis differs from ``f*`` (empty maximum).
    """
    if not 0 < beta <= 1:
        raise ConfigurationError("beta must lie in (0, 1]")
    fs = minimizers(problem, MINIMIZER_TOL).first
    B, binding = 0.0, None
    for h in problem.hypotheses:
        if h is fs:
            continue
        rv = excess_loss(problem, h, fs)
        if rv.is_zero:
            continue
        mu = rv.mean
        if mu <= MEAN_TOL * max(1.0, rv.support_bound):
            raise UnboundedBernsteinError(h)
        ratio = rv.second_moment / mu**beta
        if ratio > B:
            B, binding = ratio, h.name
    return BernsteinFit(beta, B, binding)


class HyperPerturbation(NamedTuple):
    perturbed: ExcessLossRV
    eta: float
    # (value under Z, value under Z', probability mass moved along this pair)
    coupling: tuple[tuple[float, float, float], ...]


def hyper_perturb(rv: ExcessLossRV, epsilon: float, V: float | None = None) -> HyperPerturbation:
    """Perturb a hyper-concentrated ``Z`` into a dominated ``Z'`` with a finite root.

    Mass on ``[mu, V]`` is scaled by ``1 - epsilon`` and the removed fraction is
    reflected to ``-z``.  The coupling sends each atom ``z`` either to itself or
    to ``-z <= z``, so ``Z' <= Z`` pointwise.
    """
    V = rv.support_bound if V is None else float(V)
    if not 0 < epsilon < 1:
        raise ConfigurationError("epsilon must lie in (0, 1)")
    if eta_root(rv).status != HYPER:
        raise ConfigurationError("hyper_perturb needs a hyper-concentrated variable (Z >= 0, E Z > 0)")
    mu = rv.mean
    new_atoms, coupling = [], []
    for z, p in rv.atoms:
        if mu <= z <= V:
            new_atoms += [(z, (1 - epsilon) * p), (-z, epsilon * p)]
            coupling += [(z, z, (1 - epsilon) * p), (z, -z, epsilon * p)]
        else:
            new_atoms.append((z, p))
            coupling.append((z, z, p))
    perturbed = ExcessLossRV.from_atoms(new_atoms, V)
    res = eta_root(perturbed)
    if res.status != ROOT:
        raise ConfigurationError(f"perturbed variable has no finite root (status {res.status})")
    return HyperPerturbation(perturbed, res.eta, tuple(coupling))
