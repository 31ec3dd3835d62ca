"""The two-moment problem behind the mixability concentration bound.

Over probability measures on ``[-V, V]`` with

    E X = mean            (mean = -a/n <= 0)
    E exp(eta X) = 1

extremize ``E exp(eta X / 2)``.  On a uniform grid this is an LP with three
equality rows (two moments plus normalization), so an optimal basic solution
uses at most three grid points.

The lifted grid points ``(x, exp(eta x), exp(eta x / 2))`` lie on a curve that
any plane cuts at most three times, so their convex hull is combinatorially a
cyclic 3-polytope.  Its facets are the triples ``{0, i, i+1}`` and
``{i, i+1, m-1}`` (Gale evenness), and the LP optimum is the upper-hull facet
above the target moment vector.  :func:`grid_lp_solve` therefore enumerates
only those ``2(m - 2)`` candidate bases; ``method="brute"`` enumerates every
triple and serves as the oracle for small grids.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryCaseError, ConfigurationError
from .simplex import OPTIMAL, linprog_max

FEAS_TOL = 1e-9
CLAMP_TOL = 1e-12
BOUNDARY_TOL = 1e-12

# dual certificate constants (small-eta c2 is the rounded-up threshold)
C2_SMALL_ETA = 0.32
ALPHA = 0.5 * (math.sqrt(math.e) - 1.0) ** 2
MGF_CAP_SMALL_ETA = 0.18
MGF_CAP_LARGE_ETA = 0.21

MAX_MGF = "max_mgf"
MIN_H = "min_h"
SENSES = (MAX_MGF, MIN_H)


@dataclass(frozen=True)
class MomentInstance:
    eta: float
    mean: float
    support_bound: float = 1.0

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigurationError("eta must be positive")
        if not self.support_bound > 0:
            raise ConfigurationError("support bound V must be positive")
        if not abs(self.mean) <= self.support_bound:
            raise ConfigurationError("|mean| must not exceed the support bound V")

    @property
    def a_over_n(self) -> float:
        return -self.mean


@dataclass(frozen=True)
class GridSolution:
    status: str
    value: float | None
    support: tuple[tuple[float, float], ...]
    grid_size: int
    sense: str = MAX_MGF

    @property
    def feasible(self) -> bool:
        return self.status == "optimal"


def feasible_mean_bound(eta: float) -> float:
    """Largest ``a/n`` for which ``(-a/n, 1)`` is an attainable moment pair on ``[-1, 1]``.

    Equals ``(cosh eta - 1) / sinh eta``, computed as ``tanh(eta / 2)``.
    """
    if not eta > 0:
        raise ConfigurationError("eta must be positive")
    return math.tanh(0.5 * eta)


def grid(instance: MomentInstance, m: int) -> np.ndarray:
    return np.linspace(-instance.support_bound, instance.support_bound, m)


def _facet_triples(m: int) -> np.ndarray:
    i = np.arange(1, m - 1)
    left = np.column_stack([np.zeros_like(i), i, i + 1])
    j = np.arange(0, m - 2)
    right = np.column_stack([j, j + 1, np.full_like(j, m - 1)])
    return np.vstack([left, right])


def _brute_triples(m: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(m), 3)), dtype=int)


def _solve_bases(x, g, triples, mean):
    """Weights of every candidate basis by Cramer's rule on the 3x3 moment system."""
    xa, xb, xc = (x[triples[:, k]] for k in range(3))
    ga, gb, gc = (g[triples[:, k]] for k in range(3))
    # rows: [1 1 1], [x], [g]; rhs (1, mean, 1)
    det = (xb * gc - xc * gb) - (xa * gc - xc * ga) + (xa * gb - xb * ga)
    ok = np.abs(det) > 1e-300
    det = np.where(ok, det, 1.0)
    pa = ((xb * gc - xc * gb) - (mean * gc - xc) + (mean * gb - xb)) / det
    pb = ((mean * gc - xc) - (xa * gc - xc * ga) + (xa - mean * ga)) / det
    pc = ((xb - mean * gb) - (xa - mean * ga) + (xa * gb - xb * ga)) / det
    P = np.column_stack([pa, pb, pc])
    P[~ok] = np.nan
    return P


def grid_lp_solve(
    instance: MomentInstance, m: int, sense: str = MAX_MGF, method: str = "facets"
) -> GridSolution:
    """Exact optimum of the grid LP on ``m`` uniform points of ``[-V, V]``.

    ``max_mgf`` reports ``max E exp(eta X / 2)``; ``min_h`` reports the same
    optimizer with value ``min E[-exp(eta X / 2)]``.  An unattainable moment
    target gives ``status="infeasible"`` rather than an exception.
    """
    if m < 3:
        raise ConfigurationError("grid needs at least 3 points")
    if sense not in SENSES:
        raise ConfigurationError(f"sense must be one of {SENSES}")
    eta, mean, V = instance.eta, instance.mean, instance.support_bound
    sign = 1.0 if sense == MAX_MGF else -1.0

    # on the boundary the only feasible measure sits on the two endpoints
    if abs(-mean / V - feasible_mean_bound(eta * V)) <= BOUNDARY_TOL:
        p_hi = 0.5 * (1.0 + mean / V)
        support = ((-V, 1.0 - p_hi), (V, p_hi))
        value = (1.0 - p_hi) * math.exp(-0.5 * eta * V) + p_hi * math.exp(0.5 * eta * V)
        return GridSolution("optimal", sign * value, support, m, sense)

    x = grid(instance, m)
    g = np.exp(eta * x)
    h = np.exp(0.5 * eta * x)
    if method == "facets":
        triples = _facet_triples(m)
    elif method == "brute":
        triples = _brute_triples(m)
    else:
        raise ConfigurationError("method must be 'facets' or 'brute'")

    P = _solve_bases(x, g, triples, mean)
    feasible = np.all(P >= -CLAMP_TOL, axis=1)
    P = np.clip(np.nan_to_num(P, nan=-1.0), 0.0, None)
    res1 = np.abs(P.sum(axis=1) - 1.0)
    res2 = np.abs((P * x[triples]).sum(axis=1) - mean)
    res3 = np.abs((P * g[triples]).sum(axis=1) - 1.0)
    feasible &= (res1 <= FEAS_TOL) & (res2 <= FEAS_TOL) & (res3 <= FEAS_TOL)
    if not feasible.any():
        return GridSolution("infeasible", None, (), m, sense)

    values = (P * h[triples]).sum(axis=1)
    values[~feasible] = -np.inf
    best = values.max()
    # ties: lexicographically smallest support
    tied = np.flatnonzero(values >= best)
    k = min(tied, key=lambda t: tuple(triples[t]))
    support = tuple(
        (float(x[j]), float(p)) for j, p in zip(triples[k], P[k]) if p > CLAMP_TOL
    )
    return GridSolution("optimal", sign * float(values[k]), support, m, sense)


def grid_lp_simplex(instance: MomentInstance, m: int, sense: str = MAX_MGF) -> GridSolution:
    """Same grid LP through the dense tableau simplex (cross-check path)."""
    if sense not in SENSES:
        raise ConfigurationError(f"sense must be one of {SENSES}")
    x = grid(instance, m)
    eta = instance.eta
    A = np.vstack([np.ones(m), x, np.exp(eta * x)])
    b = np.array([1.0, instance.mean, 1.0])
    res = linprog_max(np.exp(0.5 * eta * x), A, b)
    sign = 1.0 if sense == MAX_MGF else -1.0
    if res.status != OPTIMAL:
        return GridSolution("infeasible", None, (), m, sense)
    support = tuple((float(x[j]), float(res.x[j])) for j in np.flatnonzero(res.x > CLAMP_TOL))
    return GridSolution("optimal", sign * res.value, support, m, sense)


@dataclass(frozen=True)
class DualCertificate:
    """Coefficients of ``u(x) = c0 + c2 exp(eta x) - exp(eta x / 2) + eta c1 x``.

    ``u >= 0`` on ``[-1, 1]`` makes ``(d0, d1, d2) = (-c0, -eta c1, -c2)`` dual
    feasible, which caps ``E exp(eta X / 2)`` by ``1 - eta c1 a/n``.
    """

    c0: float
    c1: float
    c2: float
    eta: float

    def u(self, x):
        x = np.asarray(x, dtype=float)
        t = self.eta * x
        with np.errstate(over="ignore", invalid="ignore"):
            # expm1 form is accurate near 0; factored form avoids inf - inf
            small = self.c2 * np.expm1(t) - np.expm1(0.5 * t) + self.eta * self.c1 * x
            e = np.exp(0.5 * t)
            large = e * (self.c2 * e - 1.0) + self.c0 + self.eta * self.c1 * x
        return np.where(t <= 700.0, small, large)

    @property
    def d(self) -> tuple[float, float, float]:
        return (-self.c0, -self.eta * self.c1, -self.c2)

    def dual_objective(self, a_over_n: float) -> float:
        d0, d1, d2 = self.d
        return d0 - a_over_n * d1 + d2

    def mgf_upper_bound(self, a_over_n: float) -> float:
        """Weak-duality cap on ``max E exp(eta X / 2)`` for ``V = 1`` instances."""
        return -self.dual_objective(a_over_n)


def dual_certificate(eta: float) -> DualCertificate:
    if not eta > 0:
        raise ConfigurationError("eta must be positive")
    if eta <= 1:
        c2 = C2_SMALL_ETA
        c1 = 0.5 - c2
    else:
        c1 = ALPHA / eta
        c2 = 0.5 - c1
    return DualCertificate(1.0 - c2, c1, c2, float(eta))


@dataclass(frozen=True)
class CertificateCheck:
    min_value: float
    argmin: float
    u_at_minus_1: float
    u_at_0: float
    du_at_0: float
    d2u_at_0: float

    @property
    def valid(self) -> bool:
        return self.min_value >= -FEAS_TOL and self.u_at_minus_1 >= -FEAS_TOL and self.d2u_at_0 >= 0


def verify_certificate(cert: DualCertificate, eta: float | None = None, grid_m: int = 10_000) -> CertificateCheck:
    """Grid check of ``u >= 0`` on ``[-1, 1]`` plus the local-minimum conditions at 0."""
    eta = cert.eta if eta is None else float(eta)
    if eta != cert.eta:
        cert = DualCertificate(cert.c0, cert.c1, cert.c2, eta)
    if grid_m < 1000:
        raise ConfigurationError("certificate check needs at least 1000 grid points")
    xs = np.concatenate([np.linspace(-1.0, 1.0, grid_m), [0.0]])
    us = cert.u(xs)
    k = int(np.argmin(us))
    du0 = eta * (cert.c2 - 0.5 + cert.c1)
    d2u0 = eta**2 * (cert.c2 - 0.25)
    return CertificateCheck(
        float(us[k]), float(xs[k]), float(cert.u(-1.0)), float(cert.u(0.0)), du0, d2u0
    )


@dataclass(frozen=True)
class CertificateBound:
    value: float
    combined: float
    large_eta: float | None


def certificate_bound(eta: float, a_over_n: float) -> CertificateBound:
    """Upper bound on ``E exp((eta/2)(-Z))`` for ``Z`` in ``[-1, 1]`` with mean ``a/n``.

    ``combined`` is ``1 - 0.18 min(eta, 1) a/n``; for ``eta > 1`` the sharper
    ``1 - 0.21 a/n`` is reported too and used as ``value``.
    """
    bound = feasible_mean_bound(eta)
    if not 0 < a_over_n < bound - BOUNDARY_TOL:
        raise BoundaryCaseError(
            f"a/n = {a_over_n!r} must lie strictly inside (0, {bound!r}) "
            "(interior condition of the feasible-moments region)"
        )
    combined = 1.0 - MGF_CAP_SMALL_ETA * min(eta, 1.0) * a_over_n
    large = 1.0 - MGF_CAP_LARGE_ETA * a_over_n if eta > 1 else None
    return CertificateBound(large if large is not None else combined, combined, large)


def scale_instance(instance: MomentInstance) -> MomentInstance:
    """Equivalent instance on ``[-1, 1]``: ``(eta V, mean / V, 1)``."""
    V = instance.support_bound
    return MomentInstance(instance.eta * V, instance.mean / V, 1.0)


def unscale_instance(instance: MomentInstance, V: float) -> MomentInstance:
    if instance.support_bound != 1.0:
        raise ConfigurationError("unscale_instance expects a unit-support instance")
    return MomentInstance(instance.eta / V, instance.mean * V, float(V))


def alpha_margin(eta: float, alpha: float = ALPHA) -> float:
    """``u(-1)`` of the large-eta certificate written as a function of ``alpha``."""
    return (0.5 * (1 + math.exp(-eta)) - math.exp(-0.5 * eta)) + alpha * (
        -1.0 + (1.0 - math.exp(-eta)) / eta
    )
