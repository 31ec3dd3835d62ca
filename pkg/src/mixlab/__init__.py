"""Stochastic mixability, moment-problem certificates and ERM fast rates on finite problems."""
from .bounds import (
    epsilon_net,
    esup_bound,
    finite_class_bound,
    local_analysis_bound,
    localization_bound,
    vc_type_bound,
    weak_mix_bound,
)
from .diagnostics import diagnose
from .erm import (
    EmpiricalRiskMinimizer,
    SimConfig,
    bound_violation_rate,
    chernoff_tail,
    erm_select,
    fit_rate,
    simulate,
)
from .mixability import (
    bernstein_constant,
    cgf,
    check_weak_mixability,
    eta_root,
    eta_star,
    hyper_perturb,
)
from .moment import (
    MomentInstance,
    certificate_bound,
    dual_certificate,
    feasible_mean_bound,
    grid_lp_solve,
    scale_instance,
    verify_certificate,
)
from .problem import (
    Atom,
    ExcessLossRV,
    Hypothesis,
    LearningProblem,
    Loss,
    constant_problem,
    excess_loss,
    g_epsilon,
    load_problem,
    minimizers,
    risk,
    sample,
    subclass_at_least,
    subclass_at_most,
)

__version__ = "0.1.0"
