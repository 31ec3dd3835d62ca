"""Closed-form excess-risk bounds and greedy proper epsilon-nets.

Every numeric constant lives in :data:`CONSTANTS`; the evaluators read from
it so a transcription slip can only happen in one place.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, PreconditionError
from .problem import Hypothesis, LearningProblem

CONSTANTS = {
    # finite class oracle inequality: leading factor
    "finite_factor": 6.0,
    # weak mixability intermediate rate: leading factor
    "weak_factor": 6.0,
    # VC-type oracle inequality, mixability branch
    "vc_mix_factor": 8.0,
    # localization term (union over the 1/n-net)
    "loc_entropy": 1080.0,
    "loc_cross": 90.0,
    # local analysis of a 1/n-ball of the class
    "local_entropy": 990.0,
    "local_variance": 3960.0,
    # expected supremum via chaining
    "esup_entropy": 990.0,
}


def _check(cond: bool, message: str):
    if not cond:
        raise PreconditionError(message)


def _mix_scale(V: float, eta_star: float) -> float:
    return max(V, 1.0 / eta_star)


def finite_class_bound(V: float, eta_star: float, N: int, delta: float, n: int) -> float:
    """``6 max(V, 1/eta*) (log 1/delta + log N) / n``."""
    _check(V > 0, "finite-class oracle inequality: V must be positive")
    _check(eta_star > 0, "finite-class oracle inequality: eta* must be positive (stochastic mixability)")
    _check(N >= 1, "finite-class oracle inequality: N must be at least 1")
    _check(0 < delta <= 1, "finite-class oracle inequality: delta must lie in (0, 1]")
    _check(n >= 1, "finite-class oracle inequality: n must be at least 1")
    return CONSTANTS["finite_factor"] * _mix_scale(V, eta_star) * (math.log(1 / delta) + math.log(N)) / n


def weak_mix_min_n(kappa: float, eta0: float, V: float) -> float:
    return V ** ((1 - kappa) / (2 - kappa)) / eta0


def weak_mix_bound(kappa: float, eta0: float, N: int, delta: float, n: int, V: float = 1.0) -> float:
    """``6 (log 1/delta + log N) / (eta0 n) ** (1 / (2 - kappa))``."""
    _check(0 <= kappa <= 1, "weak-mixability rate: kappa must lie in [0, 1]")
    _check(eta0 > 0, "weak-mixability rate: eta0 must be positive")
    _check(N >= 1, "weak-mixability rate: N must be at least 1")
    _check(0 < delta <= 1, "weak-mixability rate: delta must lie in (0, 1]")
    n_min = weak_mix_min_n(kappa, eta0, V)
    _check(n >= n_min, f"weak-mixability rate needs n >= V^((1-kappa)/(2-kappa)) / eta0 = {n_min:.6g}")
    rate = (eta0 * n) ** (1.0 / (2.0 - kappa))
    return CONSTANTS["weak_factor"] * (math.log(1 / delta) + math.log(N)) / rate


def _loc_core(C: float, K: float, n: float, log_inv_delta: float) -> float:
    ent = C * math.log(2 * K * n)
    return (
        CONSTANTS["loc_entropy"] * ent
        + CONSTANTS["loc_cross"] * math.sqrt(log_inv_delta * ent)
        + 1.0 + log_inv_delta  # log(e / delta)
    )


@dataclass(frozen=True)
class VCBound:
    value: float
    branch: str  # "mixability" or "localization"
    mixability_term: float
    localization_term: float


def vc_type_bound(V: float, eta_star: float, C: float, K: float, delta: float, n: int) -> VCBound:
    """Max of the mixability and localization terms over ``n``, plus ``1/n``.

    The two branches use ``log(K n)`` and ``log(2 K n)`` respectively, exactly
    as printed; the asymmetry is kept.
    """
    _check(n >= 5, "VC-type oracle inequality needs n >= 5")
    _check(0 < delta <= 0.5, "VC-type oracle inequality needs delta in (0, 1/2]")
    _check(V >= 1, "VC-type oracle inequality needs V >= 1")
    _check(K >= 1, "VC-type oracle inequality needs K >= 1")
    _check(C >= 1, "VC-type oracle inequality needs C >= 1")
    _check(eta_star > 0, "VC-type oracle inequality needs eta* > 0")
    log2d = math.log(2 / delta)
    mix = CONSTANTS["vc_mix_factor"] * _mix_scale(V, eta_star) * (C * math.log(K * n) + log2d)
    loc = 2 * V * _loc_core(C, K, n, log2d)
    branch = "mixability" if mix >= loc else "localization"
    return VCBound(max(mix, loc) / n + 1 / n, branch, mix / n, loc / n)


def localization_bound(C: float, K: float, delta: float, n: int, V: float = 1.0) -> float:
    """Deviation allowed between ``P_n f`` and ``P_n pi(f)`` over a ``1/n``-net, at confidence ``delta``."""
    _check(0 < delta <= 0.5, "localization bound needs delta in (0, 1/2]")
    _check(n >= 4, "localization bound needs n >= 4")
    _check(C >= 1 and K >= 1, "localization bound needs C >= 1 and K >= 1")
    _check(V > 0, "localization bound needs V > 0")
    return V / n * _loc_core(C, K, n, math.log(1 / delta))


def local_analysis_bound(C: float, K: float, y: float, n: int) -> float:
    """High-probability cap on ``sup P_n f`` over a ``1/n``-ball, failure prob ``exp(-y)``."""
    _check(n >= 4, "local analysis bound needs n >= 4")
    _check(y > 0, "local analysis bound needs y > 0")
    _check(C >= 1 and K >= 1, "local analysis bound needs C >= 1 and K >= 1")
    ent = C * math.log(2 * K * n)
    return (
        CONSTANTS["local_entropy"] * ent
        + math.sqrt(2 * y * (1 + CONSTANTS["local_variance"] * ent))
        + 2 * y / 3
        + 1
    ) / n


def esup_bound(C: float, K: float, V: float, n: int) -> float:
    """Chaining bound on ``E sup (P_n - P) f``."""
    _check(n >= 4, "expected-supremum bound needs n >= 4")
    _check(V >= 1, "expected-supremum bound needs V >= 1")
    _check(C >= 1 and K >= 1, "expected-supremum bound needs C >= 1 and K >= 1")
    return CONSTANTS["esup_entropy"] * C * V * math.log(2 * K * n) / n


# -- epsilon nets -------------------------------------------------------------

METRICS = ("L2_P", "L2_Pn")


@dataclass(frozen=True)
class EpsilonNet:
    net: list[Hypothesis]
    projection: dict[str, Hypothesis]
    distances: np.ndarray  # pairwise, in hypothesis order
    eps: float

    def __len__(self):
        return len(self.net)


def distance_matrix(
    problem: LearningProblem, metric: str = "L2_P", sample: Sequence | None = None,
    functions: str = "predictions",
) -> np.ndarray:
    """Pairwise ``L2`` distances between hypotheses (or their loss functions)."""
    if metric not in METRICS:
        raise ConfigurationError(f"metric must be one of {METRICS}")
    if functions not in ("predictions", "losses"):
        raise ConfigurationError("functions must be 'predictions' or 'losses'")
    hyps = problem.hypotheses
    if metric == "L2_P":
        if functions == "predictions":
            marg = problem.input_marginal
            xs = list(marg)
            w = np.array([marg[x] for x in xs])
            F = np.array([[h(x) for x in xs] for h in hyps], dtype=float)
        else:
            w = problem.probs
            F = problem.loss_matrix
    else:
        if not sample:
            raise ConfigurationError("L2_Pn needs a nonempty sample")
        w = np.full(len(sample), 1.0 / len(sample))
        preds = np.array([[h(x) for x, _ in sample] for h in hyps], dtype=float)
        if functions == "predictions":
            F = preds
        else:
            ys = np.array([y for _, y in sample], dtype=float)
            F = problem.loss(ys[None, :], preds)
    diff = F[:, None, :] - F[None, :, :]
    return np.sqrt(np.einsum("ijk,k->ij", diff**2, w))


def epsilon_net(
    problem: LearningProblem, eps: float, metric: str = "L2_P", sample: Sequence | None = None,
    functions: str = "predictions",
) -> EpsilonNet:
    """Greedy farthest-point proper cover of the class at radius ``eps``.

    Starts from the first hypothesis and keeps adding the point farthest from
    the current centers until every hypothesis is within ``eps``.  Each
    hypothesis is projected to its nearest center (earliest center on ties).
    """
    if not eps > 0:
        raise ConfigurationError("eps must be positive")
    D = distance_matrix(problem, metric, sample, functions)
    centers = [0]
    nearest = D[0].copy()
    while nearest.max() > eps:
        k = int(np.argmax(nearest))
        centers.append(k)
        nearest = np.minimum(nearest, D[k])
    hyps = problem.hypotheses
    sub = D[:, centers]
    proj = {h.name: hyps[centers[int(np.argmin(sub[i]))]] for i, h in enumerate(hyps)}
    return EpsilonNet([hyps[c] for c in centers], proj, D, float(eps))
