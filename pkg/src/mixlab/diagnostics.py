"""Effective-convexity diagnostic for finite classes.

For each radius ``eps`` the class ``G_eps`` keeps ``f*`` and every hypothesis at
``L1(P_X)`` distance at least ``eps`` from it.  If some ``G_eps`` fails to be
stochastically mixable, the problem has two minimizers whose losses differ
with positive probability; for a finite class this is checked directly
instead of through a compactness argument.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError
from .mixability import eta_star
from .problem import MINIMIZER_TOL, LearningProblem, excess_risks, f_star, g_epsilon, minimizers


@dataclass(frozen=True)
class DiagnosisRow:
    eps: float
    size: int
    mixable: bool
    eta_star: float
    minimizer_multiplicity: int
    # None when G_eps is {f*} alone
    min_excess_risk_on_far_set: float | None
    binding: str | None


@dataclass(frozen=True)
class DiagnosisReport:
    f_star: str
    rows: list[DiagnosisRow]

    @property
    def all_mixable(self) -> bool:
        return all(r.mixable for r in self.rows)

    @property
    def verdict(self) -> str:
        if self.all_mixable:
            return "effectively_unique"
        return "non_unique_minimizers"

    @property
    def consistent(self) -> bool:
        """Non-mixability with a zero-excess far point always comes with >= 2 minimizers."""
        return all(
            r.mixable or r.min_excess_risk_on_far_set != 0 or r.minimizer_multiplicity >= 2
            for r in self.rows
        )


def diagnose(problem: LearningProblem, eps_grid) -> DiagnosisReport:
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid or any(not e > 0 for e in eps_grid):
        raise ConfigurationError("eps grid must be a nonempty list of positive values")
    fs = f_star(problem)
    ex = dict(zip(problem.names, excess_risks(problem, fs)))
    rows = []
    for eps in eps_grid:
        G = g_epsilon(problem, eps)
        sub = problem.restrict(G)
        profile = eta_star(sub, f_star=fs)
        far = [ex[h.name] for h in G if h is not fs]
        # minimizers of the full risk that survive in G_eps
        global_min = problem.risks.min()
        mins = minimizers(sub, MINIMIZER_TOL)
        mult = mins.multiplicity if mins.min_risk <= global_min + MINIMIZER_TOL else 0
        rows.append(DiagnosisRow(
            eps, len(G), profile.mixable, profile.eta_star, mult,
            max(0.0, float(min(far))) if far else None, profile.binding,
        ))
    return DiagnosisReport(fs.name, rows)


def eta_star_on_g(problem: LearningProblem, eps: float) -> float:
    """``eta*`` of ``G_eps`` with the full problem's ``f*`` as reference."""
    fs = f_star(problem)
    return eta_star(problem.restrict(g_epsilon(problem, eps)), f_star=fs).eta_star

