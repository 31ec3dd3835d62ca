"""Empirical risk minimization over a finite class, and Monte Carlo around it.

:class:`EmpiricalRiskMinimizer` is a scikit-learn compatible estimator, so a
finite hypothesis class can be dropped into pipelines and model selection
tools.  The simulation helpers use the same selection rule but work from
multinomial atom counts, which are a sufficient statistic for ERM on a finite
distribution.

Trial ``i`` at sample size ``n`` draws from a Philox stream keyed by
``SeedSequence(seed, spawn_key=(n, i))``, so results do not depend on how trials
are split across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .bounds import finite_class_bound, weak_mix_bound
from .errors import ConfigurationError, DiagnosticError, PreconditionError
from .mixability import check_weak_mixability, cgf, eta_star
from .problem import (
    ExcessLossRV,
    Hypothesis,
    LearningProblem,
    Loss,
    excess_risks,
    f_star,
)

TIEBREAKS = ("first_by_name", "lowest_risk", "worst_risk")
# empirical risks this close to the minimum count as tied
TIE_TOL = 1e-12


def _select(emp: np.ndarray, names: Sequence[str], tiebreak: str, true_risks=None) -> int:
    best = emp.min()
    tied = np.flatnonzero(emp <= best + TIE_TOL)
    if tied.size == 1:
        return int(tied[0])
    if tiebreak == "first_by_name":
        return int(min(tied, key=lambda i: names[i]))
    if true_risks is None:
        raise ConfigurationError(f"tiebreak {tiebreak!r} needs the true risks of the hypotheses")
    if tiebreak == "lowest_risk":
        return int(min(tied, key=lambda i: (true_risks[i], names[i])))
    return int(min(tied, key=lambda i: (-true_risks[i], names[i])))


class EmpiricalRiskMinimizer(BaseEstimator):
    """Select the hypothesis with the smallest empirical risk.

    Parameters
    ----------
    hypotheses : sequence of Hypothesis
        The finite class, each a map from input label to prediction.
    loss : Loss or str, default="squared"
    tiebreak : {"first_by_name", "lowest_risk", "worst_risk"}
        Rule among empirical minimizers.  ``lowest_risk`` and ``worst_risk``
        pick by true risk and need ``true_risks``; ``worst_risk`` is the
        adversarial choice for stress-testing bounds.
    true_risks : sequence of float, optional
        Population risks aligned with ``hypotheses``.

    Attributes
    ----------
    selected_ : Hypothesis
    selected_index_ : int
    empirical_risks_ : ndarray of shape (n_hypotheses,)
    """

    def __init__(self, hypotheses=(), loss="squared", tiebreak="first_by_name", true_risks=None):
        self.hypotheses = hypotheses
        self.loss = loss
        self.tiebreak = tiebreak
        self.true_risks = true_risks

    def _loss(self) -> Loss:
        return Loss(self.loss) if isinstance(self.loss, str) else self.loss

    def _predict_all(self, labels) -> np.ndarray:
        return np.array([[h(x) for x in labels] for h in self.hypotheses], dtype=float)

    @staticmethod
    def _labels(X):
        X = np.asarray(X, dtype=object)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError("X must hold a single column of input labels")
            X = X[:, 0]
        return [str(x) for x in X]

    def fit(self, X, y):
        if self.tiebreak not in TIEBREAKS:
            raise ConfigurationError(f"tiebreak must be one of {TIEBREAKS}")
        if len(self.hypotheses) == 0:
            raise ConfigurationError("hypothesis class is empty")
        X, y = check_X_y(X, y, dtype=None, ensure_2d=False, y_numeric=True)
        labels = self._labels(X)
        losses = self._loss()(y[None, :], self._predict_all(labels))
        self.empirical_risks_ = losses.mean(axis=1)
        names = [h.name for h in self.hypotheses]
        self.selected_index_ = _select(self.empirical_risks_, names, self.tiebreak, self.true_risks)
        self.selected_ = self.hypotheses[self.selected_index_]
        self.n_samples_seen_ = len(labels)
        return self

    def predict(self, X):
        check_is_fitted(self, "selected_")
        X = check_array(X, dtype=None, ensure_2d=False)
        return np.array([self.selected_(x) for x in self._labels(X)], dtype=float)

    def score(self, X, y):
        """Negative empirical risk of the selected hypothesis (higher is better)."""
        check_is_fitted(self, "selected_")
        X, y = check_X_y(X, y, dtype=None, ensure_2d=False, y_numeric=True)
        return -float(np.mean(self._loss()(y, self.predict(X))))


def erm_select(sample, problem: LearningProblem, tiebreak: str = "first_by_name") -> Hypothesis:
    """ERM choice on a list of ``(x, y)`` pairs."""
    if len(sample) == 0:
        raise ConfigurationError("ERM needs a nonempty sample")
    xs = [s[0] for s in sample]
    ys = [s[1] for s in sample]
    est = EmpiricalRiskMinimizer(problem.hypotheses, problem.loss, tiebreak, problem.risks)
    return est.fit(xs, ys).selected_


def chernoff_tail(rv: ExcessLossRV, eta: float, t: float, n: int) -> float:
    """``exp(eta t + n cgf(eta))``, capped at 1: bound on ``P(P_n Z <= t)``."""
    if not eta > 0:
        raise ConfigurationError("eta must be positive")
    if not t < rv.mean:
        raise PreconditionError(
            f"t = {t!r} must be below E Z = {rv.mean!r}; the Chernoff bound is trivial otherwise"
        )
    return min(1.0, math.exp(eta * t + n * cgf(rv, eta)))


@dataclass(frozen=True)
class SimConfig:
    n_values: tuple[int, ...]
    trials: int = 1000
    seed: int = 0
    tiebreak: str = "first_by_name"
    delta: float = 0.05
    # fixed epsilon for the epsilon-good rate; None uses the finite-class bound at each n
    epsilon: float | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigurationError("n_values must be a nonempty list of positive sizes")
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise ConfigurationError("n_values must be strictly increasing")
        if self.trials < 1:
            raise ConfigurationError("trials must be at least 1")
        if self.tiebreak not in TIEBREAKS:
            raise ConfigurationError(f"tiebreak must be one of {TIEBREAKS}")
        if not 0 < self.delta < 1:
            raise ConfigurationError("delta must lie in (0, 1)")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")


def trial_rng(seed: int, n: int, i: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(n), int(i)))
    return np.random.Generator(np.random.Philox(ss))


def _trial_chunk(problem: LearningProblem, n: int, start: int, stop: int, seed: int, tiebreak: str):
    L = problem.loss_matrix
    probs = problem.probs
    names = problem.names
    risks = problem.risks
    out = np.empty(stop - start, dtype=np.int64)
    for k, i in enumerate(range(start, stop)):
        counts = trial_rng(seed, n, i).multinomial(n, probs)
        emp = (L @ counts) / n
        out[k] = _select(emp, names, tiebreak, risks)
    return out


def run_trials(
    problem: LearningProblem, n: int, trials: int, seed: int,
    tiebreak: str = "first_by_name", workers: int = 1,
) -> np.ndarray:
    """Indices of the ERM-selected hypothesis for ``trials`` replications at size ``n``."""
    if workers <= 1 or trials < 2 * workers:
        return _trial_chunk(problem, n, 0, trials, seed, tiebreak)
    edges = np.linspace(0, trials, workers + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(
            _trial_chunk,
            [problem] * workers, [n] * workers, edges[:-1], edges[1:],
            [seed] * workers, [tiebreak] * workers,
        )
        return np.concatenate(list(parts))


@dataclass(frozen=True)
class RateFit:
    slope: float | None
    intercept: float | None
    r2: float | None
    n_points: int
    status: str = "ok"


@dataclass(frozen=True)
class NStats:
    n: int
    mean_excess_risk: float
    q50: float
    q90: float
    q_1_minus_delta: float
    epsilon_good_rate: float
    epsilon: float
    error_rate: float


@dataclass
class SimReport:
    config: SimConfig
    f_star: str
    per_n: list[NStats]
    rate_fit: RateFit
    # raw per-trial excess risks, keyed by n
    excess: dict[int, np.ndarray] = field(repr=False, default_factory=dict)

    def row(self, n: int) -> NStats:
        for r in self.per_n:
            if r.n == n:
                return r
        raise KeyError(n)


def fit_power_law(ns, values) -> RateFit:
    """OLS of ``log value`` on ``log n`` over points with positive value."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    if keep.sum() < 3:
        return RateFit(None, None, None, int(keep.sum()), "unavailable")
    res = stats.linregress(np.log(ns[keep]), np.log(values[keep]))
    return RateFit(float(res.slope), float(res.intercept), float(res.rvalue**2), int(keep.sum()))


def fit_rate(report: SimReport) -> RateFit:
    return fit_power_law([r.n for r in report.per_n], [r.mean_excess_risk for r in report.per_n])


def simulate(problem: LearningProblem, config: SimConfig) -> SimReport:
    """Seeded ERM replications at every sample size in ``config.n_values``."""
    profile = eta_star(problem)  # raises on non-unique minimizers
    fs = problem.hypothesis(profile.f_star)
    ex = excess_risks(problem, fs)
    # excess risks are >= 0 up to float noise among loss-equivalent minimizers
    ex = np.where(ex < 0, 0.0, ex)
    rows, raw = [], {}
    for n in config.n_values:
        idx = run_trials(problem, n, config.trials, config.seed, config.tiebreak, config.workers)
        e = ex[idx]
        raw[n] = e
        eps = config.epsilon
        if eps is None:
            eps = finite_class_bound(problem.loss_bound, profile.eta_star, problem.n_hypotheses, config.delta, n)
        q50, q90, qd = np.quantile(e, [0.5, 0.9, 1 - config.delta], method="inverted_cdf")
        rows.append(NStats(
            n, float(e.mean()), float(q50), float(q90), float(qd),
            float(np.mean(e <= eps)), float(eps), float(np.mean(e > 0)),
        ))
    fit = fit_power_law([r.n for r in rows], [r.mean_excess_risk for r in rows])
    return SimReport(config, fs.name, rows, fit, raw)


@dataclass(frozen=True)
class ViolationReport:
    rate: float
    bound: float
    delta: float
    trials: int
    three_sigma: float

    @property
    def within_contract(self) -> bool:
        return self.rate <= self.delta + self.three_sigma


BOUND_KINDS = ("finite_thm4", "weak_cor1")


def bound_violation_rate(
    problem: LearningProblem, n: int, delta: float, trials: int,
    bound_kind: str = "finite_thm4", *, seed: int = 0, tiebreak: str = "first_by_name",
    kappa: float | None = None, eta0: float | None = None, workers: int = 1,
) -> ViolationReport:
    """Fraction of ERM replications whose excess risk strictly exceeds the bound."""
    if bound_kind not in BOUND_KINDS:
        raise ConfigurationError(f"bound_kind must be one of {BOUND_KINDS}")
    if not 0 < delta <= 1:
        raise ConfigurationError("delta must lie in (0, 1]")
    N, V = problem.n_hypotheses, problem.loss_bound
    if bound_kind == "finite_thm4":
        profile = eta_star(problem)
        if not profile.mixable:
            raise DiagnosticError("finite-class oracle inequality needs eta* > 0 (stochastic mixability)")
        bound = finite_class_bound(V, profile.eta_star, N, delta, n)
    else:
        if kappa is None or eta0 is None:
            raise ConfigurationError("weak_cor1 needs kappa and eta0")
        check = check_weak_mixability(problem, kappa, eta0)
        if not check:
            raise DiagnosticError(
                f"problem is not ({kappa}, {eta0})-weakly stochastically mixable; "
                f"violated at {check.witness}"
            )
        bound = weak_mix_bound(kappa, eta0, N, delta, n, V=V)
    fs = f_star(problem)
    ex = excess_risks(problem, fs)
    idx = run_trials(problem, n, trials, seed, tiebreak, workers)
    rate = float(np.mean(ex[idx] > bound))
    return ViolationReport(rate, bound, delta, trials, 3 * math.sqrt(delta * (1 - delta) / trials))
