"""Finite discrete learning problems.

A :class:`LearningProblem` bundles a finite joint distribution over
``(x, y)`` atoms, a nonnegative loss, a finite hypothesis class and a bound
``V`` on the loss.  Everything downstream (excess-loss variables, mixability
constants, ERM simulation) is computed exactly from the atoms.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy.special import xlogy

from .errors import ConfigurationError

PROB_SUM_TOL = 1e-12
LOAD_PROB_SUM_TOL = 1e-9
# Risks within this of the minimum count as minimizers when picking f*.
MINIMIZER_TOL = 1e-12

LOSS_KINDS = ("squared", "absolute", "p_loss", "zero_one", "log")


@dataclass(frozen=True)
class Atom:
    x: str
    y: float
    p: float


@dataclass(frozen=True)
class Loss:
    """Nonnegative loss ``l(y, prediction)``.

    ``exponent`` is only meaningful for ``kind="p_loss"``, i.e.
    ``|y - prediction| ** exponent`` with ``exponent >= 1``.  The ``log`` kind is
    binary cross-entropy for targets in ``[0, 1]`` and predictions in ``(0, 1]``.
    """

    kind: str = "squared"
    exponent: float | None = None

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ConfigurationError(f"unknown loss kind {self.kind!r}; expected one of {LOSS_KINDS}")
        if self.kind == "p_loss":
            if self.exponent is None or not self.exponent >= 1:
                raise ConfigurationError("p_loss requires exponent >= 1")
        elif self.exponent is not None:
            raise ConfigurationError(f"exponent is only accepted for p_loss, not {self.kind!r}")

    def __call__(self, y, prediction):
        y = np.asarray(y, dtype=float)
        q = np.asarray(prediction, dtype=float)
        if self.kind == "squared":
            return (y - q) ** 2
        if self.kind == "absolute":
            return np.abs(y - q)
        if self.kind == "p_loss":
            return np.abs(y - q) ** self.exponent
        if self.kind == "zero_one":
            return (y != q).astype(float)
        # log loss
        if np.any((q <= 0) | (q > 1)):
            raise ConfigurationError("log loss requires predictions in (0, 1]")
        if np.any((y < 0) | (y > 1)):
            raise ConfigurationError("log loss requires targets in [0, 1]")
        with np.errstate(divide="ignore"):
            return -(xlogy(y, q) + xlogy(1.0 - y, 1.0 - q))


@dataclass(frozen=True, eq=False)
class Hypothesis:
    name: str
    values: Mapping[str, float]

    def __call__(self, x: str) -> float:
        try:
            return self.values[x]
        except KeyError:
            raise ConfigurationError(
                f"hypothesis {self.name!r} is undefined on input label {x!r}"
            ) from None

    def __repr__(self):
        return f"Hypothesis({self.name!r})"


@dataclass(frozen=True)
class ExcessLossRV:
    """Finite random variable given by merged ``(value, probability)`` atoms.

    Atoms are sorted by value; zero-probability atoms are dropped and atoms
    with exactly equal values are merged.
    """

    values: tuple[float, ...]
    probs: tuple[float, ...]
    support_bound: float

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise ConfigurationError("excess loss needs a nonempty, aligned list of atoms")
        if any(p < 0 for p in self.probs):
            raise ConfigurationError("negative probability in excess loss atoms")
        if abs(math.fsum(self.probs) - 1.0) > 1e-9:
            raise ConfigurationError("excess loss probabilities must sum to 1")
        if any(abs(z) > self.support_bound for z in self.values):
            raise ConfigurationError(
                f"excess loss value outside [-V, V] with V = {self.support_bound}"
            )

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[float, float]], support_bound: float) -> "ExcessLossRV":
        merged: dict[float, list[float]] = {}
        for z, p in atoms:
            if p > 0:
                merged.setdefault(float(z), []).append(float(p))
        values = tuple(sorted(merged))
        probs = tuple(math.fsum(merged[z]) for z in values)
        return cls(values, probs, float(support_bound))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values, self.probs))

    @cached_property
    def z(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @cached_property
    def p(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    @cached_property
    def mean(self) -> float:
        return math.fsum(z * p for z, p in zip(self.values, self.probs))

    @cached_property
    def second_moment(self) -> float:
        return math.fsum(z * z * p for z, p in zip(self.values, self.probs))

    @property
    def min_value(self) -> float:
        return self.values[0]

    @property
    def is_zero(self) -> bool:
        """True when the variable is 0 almost surely."""
        return self.values == (0.0,)

    def scaled(self, c: float) -> "ExcessLossRV":
        if not c > 0:
            raise ConfigurationError("scale factor must be positive")
        return ExcessLossRV.from_atoms(
            ((c * z, p) for z, p in self.atoms), c * self.support_bound
        )


@dataclass(frozen=True)
class LearningProblem:
    atoms: tuple[Atom, ...]
    loss: Loss
    hypotheses: tuple[Hypothesis, ...]
    loss_bound: float

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        if not self.atoms:
            raise ConfigurationError("a learning problem needs at least one atom")
        if not self.hypotheses:
            raise ConfigurationError("a learning problem needs at least one hypothesis")
        if not self.loss_bound > 0:
            raise ConfigurationError("loss_bound V must be positive")
        if any(not a.p >= 0 for a in self.atoms):
            raise ConfigurationError("atom probabilities must be nonnegative")
        total = math.fsum(a.p for a in self.atoms)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ConfigurationError(f"atom probabilities sum to {total!r}, not 1")
        names = [h.name for h in self.hypotheses]
        if len(set(names)) != len(names):
            raise ConfigurationError("hypothesis names must be unique")
        L = self.loss_matrix
        if np.any(L < 0) or np.any(np.isnan(L)):
            raise ConfigurationError("loss must be nonnegative on every atom")
        bad = np.argwhere(L > self.loss_bound)
        if bad.size:
            i, j = bad[0]
            raise ConfigurationError(
                f"loss of {self.hypotheses[i].name!r} on atom {j} is {L[i, j]!r} > V = "
                f"{self.loss_bound}; the oracle inequalities need losses bounded by V"
            )

    @property
    def n_hypotheses(self) -> int:
        return len(self.hypotheses)

    @cached_property
    def probs(self) -> np.ndarray:
        return np.array([a.p for a in self.atoms], dtype=float)

    @cached_property
    def ys(self) -> np.ndarray:
        return np.array([a.y for a in self.atoms], dtype=float)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(h.name for h in self.hypotheses)

    def losses_of(self, f: Hypothesis) -> np.ndarray:
        """Loss of ``f`` on every atom, in atom order."""
        preds = np.array([f(a.x) for a in self.atoms], dtype=float)
        return self.loss(self.ys, preds)

    @cached_property
    def loss_matrix(self) -> np.ndarray:
        """``(N, n_atoms)`` array of losses."""
        return np.vstack([self.losses_of(h) for h in self.hypotheses])

    @cached_property
    def risks(self) -> np.ndarray:
        return np.array([_expect(row, self.probs) for row in self.loss_matrix])

    @cached_property
    def input_marginal(self) -> dict[str, float]:
        marg: dict[str, list[float]] = {}
        for a in self.atoms:
            marg.setdefault(a.x, []).append(a.p)
        return {x: math.fsum(ps) for x, ps in marg.items()}

    def index(self, f: Hypothesis | str) -> int:
        name = f if isinstance(f, str) else f.name
        try:
            return self.names.index(name)
        except ValueError:
            raise ConfigurationError(f"no hypothesis named {name!r} in the problem") from None

    def hypothesis(self, name: str) -> Hypothesis:
        return self.hypotheses[self.index(name)]

    def restrict(self, hypotheses: Iterable[Hypothesis | str]) -> "LearningProblem":
        """Same distribution and loss over a subclass (kept in original order)."""
        keep = {self.index(h) for h in hypotheses}
        return LearningProblem(
            self.atoms, self.loss, tuple(h for i, h in enumerate(self.hypotheses) if i in keep),
            self.loss_bound,
        )


def _expect(values, probs) -> float:
    return math.fsum(float(v) * float(p) for v, p in zip(values, probs))


def risk(problem: LearningProblem, f: Hypothesis) -> float:
    """Expected loss ``E l(Y, f(X))`` under the problem's distribution."""
    return _expect(problem.losses_of(f), problem.probs)


@dataclass(frozen=True)
class MinimizerSet:
    """Risk minimizers in input order, plus the loss-uniqueness flag."""

    hypotheses: tuple[Hypothesis, ...]
    min_risk: float
    unique: bool
    # number of loss-equivalence classes among the minimizers
    multiplicity: int = field(default=1)

    def __iter__(self) -> Iterator[Hypothesis]:
        return iter(self.hypotheses)

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __getitem__(self, i):
        return self.hypotheses[i]

    @property
    def first(self) -> Hypothesis:
        return self.hypotheses[0]


def minimizers(problem: LearningProblem, tol: float = 0.0) -> MinimizerSet:
    """All hypotheses with risk at most ``min risk + tol``.

    ``unique`` is False when two returned minimizers have different losses on
    some atom of positive probability.
    """
    if tol < 0:
        raise ConfigurationError("tol must be nonnegative")
    risks = problem.risks
    best = float(risks.min())
    idx = [i for i, r in enumerate(risks) if r <= best + tol]
    support = problem.probs > 0
    classes: list[np.ndarray] = []
    for i in idx:
        row = problem.loss_matrix[i, support]
        if not any(np.array_equal(row, c) for c in classes):
            classes.append(row)
    return MinimizerSet(
        tuple(problem.hypotheses[i] for i in idx), best, len(classes) == 1, len(classes)
    )


def f_star(problem: LearningProblem) -> Hypothesis:
    """The designated risk minimizer: first minimizer in input order."""
    return minimizers(problem, MINIMIZER_TOL).first


def excess_loss(problem: LearningProblem, f: Hypothesis, f_star: Hypothesis) -> ExcessLossRV:
    """Excess loss ``l(Y, f(X)) - l(Y, f*(X))`` as merged atoms."""
    z = problem.losses_of(f) - problem.losses_of(f_star)
    return ExcessLossRV.from_atoms(zip(z, problem.probs), problem.loss_bound)


def excess_risks(problem: LearningProblem, f_star_: Hypothesis | None = None) -> np.ndarray:
    """``risk(f) - risk(f*)`` for every hypothesis, in input order."""
    ref = f_star_ if f_star_ is not None else f_star(problem)
    return problem.risks - problem.risks[problem.index(ref)]


def subclass_at_least(problem: LearningProblem, eps: float) -> list[Hypothesis]:
    """Hypotheses with excess risk ``>= eps``."""
    if eps < 0:
        raise ConfigurationError("eps must be nonnegative")
    ex = excess_risks(problem)
    if eps == 0:
        # every hypothesis has nonnegative excess risk by optimality of f*
        return list(problem.hypotheses)
    return [h for h, e in zip(problem.hypotheses, ex) if e >= eps]


def subclass_at_most(problem: LearningProblem, eps: float) -> list[Hypothesis]:
    """Hypotheses with excess risk ``<= eps``."""
    if eps < 0:
        raise ConfigurationError("eps must be nonnegative")
    ex = excess_risks(problem)
    return [h for h, e in zip(problem.hypotheses, ex) if e <= eps]


def l1_distance(problem: LearningProblem, f: Hypothesis, g: Hypothesis) -> float:
    """``||f - g||`` in ``L1`` of the input marginal."""
    return math.fsum(p * abs(f(x) - g(x)) for x, p in problem.input_marginal.items())


def g_epsilon(problem: LearningProblem, eps: float) -> list[Hypothesis]:
    """``f*`` together with every hypothesis at ``L1(P_X)`` distance ``>= eps`` from it."""
    if not eps > 0:
        raise ConfigurationError("eps must be positive")
    fs = f_star(problem)
    return [h for h in problem.hypotheses if h is fs or l1_distance(problem, h, fs) >= eps]


def sample_indices(problem: LearningProblem, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` iid atom indices."""
    return rng.choice(len(problem.atoms), size=n, p=problem.probs)


def sample(problem: LearningProblem, n: int, seed=None) -> list[tuple[str, float]]:
    """``n`` iid ``(x, y)`` draws; deterministic given ``seed``."""
    if n < 1:
        raise ConfigurationError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    idx = sample_indices(problem, n, rng)
    return [(problem.atoms[i].x, problem.atoms[i].y) for i in idx]


# -- problem-spec JSON -------------------------------------------------------

def problem_from_dict(spec: Mapping) -> LearningProblem:
    try:
        raw_atoms = spec["atoms"]
        loss_spec = spec["loss"]
        raw_hyps = spec["hypotheses"]
        bound = float(spec["loss_bound"])
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"problem spec is missing field {exc}") from None
    try:
        atoms = [Atom(str(a["x"]), float(a["y"]), float(a["p"])) for a in raw_atoms]
        hyps = [
            Hypothesis(str(h["name"]), {str(k): float(v) for k, v in h["values"].items()})
            for h in raw_hyps
        ]
        exponent = loss_spec.get("exponent")
        loss = Loss(str(loss_spec["kind"]), None if exponent is None else float(exponent))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"malformed problem spec: {exc!r}") from None
    total = math.fsum(a.p for a in atoms)
    if abs(total - 1.0) > LOAD_PROB_SUM_TOL:
        raise ConfigurationError(f"atom probabilities sum to {total!r}, expected 1 +- 1e-9")
    if total != 1.0:
        atoms = [Atom(a.x, a.y, a.p / total) for a in atoms]
    return LearningProblem(tuple(atoms), loss, tuple(hyps), bound)


def problem_to_dict(problem: LearningProblem) -> dict:
    loss = {"kind": problem.loss.kind}
    if problem.loss.exponent is not None:
        loss["exponent"] = problem.loss.exponent
    return {
        "atoms": [{"x": a.x, "y": a.y, "p": a.p} for a in problem.atoms],
        "loss": loss,
        "hypotheses": [{"name": h.name, "values": dict(h.values)} for h in problem.hypotheses],
        "loss_bound": problem.loss_bound,
    }


def load_problem(path: str | Path) -> LearningProblem:
    try:
        spec = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read problem file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"problem file {path} is not valid JSON: {exc}") from None
    return problem_from_dict(spec)


def constant_problem(
    ys: Sequence[float], ps: Sequence[float], constants: Mapping[str, float],
    loss: Loss | str = "squared", loss_bound: float = 1.0,
) -> LearningProblem:
    """Single-input problem whose hypotheses are constant predictors."""
    loss = Loss(loss) if isinstance(loss, str) else loss
    atoms = tuple(Atom("x0", float(y), float(p)) for y, p in zip(ys, ps))
    hyps = tuple(Hypothesis(name, {"x0": float(c)}) for name, c in constants.items())
    return LearningProblem(atoms, loss, hyps, loss_bound)
