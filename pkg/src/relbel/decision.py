"""Prior-based loss functions, exact Bayes rules, and risk accounting.

All losses here are two-valued: zero on a correct decision, and on an
error either constant (``map``), the reciprocal of the true value's prior
mass (``rb``), or that reciprocal capped at ``1/eta`` (``rb-eta``). The
capped loss applied to grid-cell masses is the same construction and is
exposed as the ``rb-lambda-eta`` kind for discretized problems.

Bayes rules are computed by per-outcome posterior-risk minimization;
:func:`brute_force_bayes` independently scores every deterministic rule
from the joint distribution and serves as an oracle for that shortcut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .errors import (
    BadEtaError,
    BadGammaError,
    ImpossibleObservationError,
    RelBelError,
    RuleSpaceTooLargeError,
    ValidationError,
    ZeroPriorMassError,
)
from .evidence import RegionReport
from .model import FiniteModel, PsiMap, marginalize, posterior, prior_predictive, psi_marginal

LOSS_KINDS = ("map", "rb", "rb-eta", "rb-lambda-eta")
RULE_CAP = 10**6


@dataclass(frozen=True, eq=False)
class LossMatrix:
    """Loss ``values[true, action]`` over a finite action set; diagonal 0."""

    kind: str
    values: np.ndarray
    eta: float | None = None

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class DecisionRule:
    """One action index per outcome index, with argmin tie flags."""

    action_per_x: tuple
    ties: tuple


@dataclass(frozen=True, eq=False)
class RiskReport:
    prior_risk: float
    posterior_risk_per_x: np.ndarray
    # per-outcome (sum of rb, rb at the action) for reciprocal-prior losses
    decomposition: tuple | None = None


def make_loss(kind: str, prior, eta: float | None = None) -> LossMatrix:
    """Build a loss matrix from the prior masses over the quantity of interest."""
    if kind not in LOSS_KINDS:
        raise ValidationError(f"loss kind must be one of {LOSS_KINDS}, got {kind!r}")
    prior = np.asarray(prior, dtype=float)
    if prior.ndim != 1 or len(prior) == 0:
        raise ValidationError("prior must be a nonempty 1-D array")
    n = len(prior)
    if kind == "map":
        weights = np.ones(n)
    elif kind == "rb":
        if np.any(prior <= 0.0):
            raise ZeroPriorMassError("reciprocal-prior loss needs all prior masses > 0")
        weights = 1.0 / prior
    else:
        if eta is None or not eta > 0.0:
            raise BadEtaError(f"eta must be > 0, got {eta}")
        weights = 1.0 / np.maximum(eta, prior)
    values = np.where(np.eye(n, dtype=bool), 0.0, weights[:, None] * np.ones((1, n)))
    values.setflags(write=False)
    return LossMatrix(kind=kind, values=values, eta=eta)


def posterior_risk(loss: LossMatrix, posterior_masses, action: int) -> float:
    """Expected loss of ``action`` under the posterior over true values."""
    post = np.asarray(posterior_masses, dtype=float)
    if post.shape != (loss.n,):
        raise ValidationError(f"posterior length {post.shape} != loss size {loss.n}")
    if not 0 <= action < loss.n:
        raise ValidationError(f"action index {action} not in [0, {loss.n})")
    return float(post @ loss.values[:, action])


def rb_decomposition(loss: LossMatrix, posterior_masses, action: int) -> tuple[float, float]:
    """(sum of capped rb over values, capped rb at the action).

    The posterior risk of a reciprocal-prior loss equals the difference of
    these two terms; only the second depends on the action.
    """
    if loss.kind == "map":
        raise ValidationError("decomposition applies to reciprocal-prior losses only")
    post = np.asarray(posterior_masses, dtype=float)
    # row maxima recover each true value's error weight (diagonal is 0)
    recip = loss.values.max(axis=1)
    ratios = post * recip
    return float(math.fsum(ratios.tolist())), float(ratios[action])


def _argmin_tie(values: np.ndarray) -> tuple[int, bool]:
    best = int(np.argmin(values))
    return best, int(np.count_nonzero(values == values[best])) > 1


def bayes_rule(model: FiniteModel, psi: PsiMap, loss: LossMatrix) -> tuple[DecisionRule, RiskReport]:
    """Per-outcome posterior-risk minimizer and its risk accounting."""
    if loss.n != psi.n_psi:
        raise ValidationError(f"loss size {loss.n} != {psi.n_psi} psi values")
    m = prior_predictive(model)
    if np.any(m <= 0.0):
        x = int(np.argmin(m))
        raise ImpossibleObservationError(
            f"outcome {model.x_labels[x]!r} has zero prior-predictive mass"
        )
    actions, ties, risks, decomp = [], [], [], []
    for x in range(model.n_x):
        post_psi = psi_marginal(posterior(model, x).posterior, psi)
        per_action = post_psi @ loss.values
        a, tie = _argmin_tie(per_action)
        actions.append(a)
        ties.append(tie)
        risks.append(float(per_action[a]))
        if loss.kind != "map":
            decomp.append(rb_decomposition(loss, post_psi, a))
    prior_risk_value = float(math.fsum((m * np.asarray(risks)).tolist()))
    return (
        DecisionRule(action_per_x=tuple(actions), ties=tuple(ties)),
        RiskReport(
            prior_risk=prior_risk_value,
            posterior_risk_per_x=np.asarray(risks),
            decomposition=tuple(decomp) if decomp else None,
        ),
    )


def conditional_error_probs(model: FiniteModel, psi: PsiMap, rule: DecisionRule) -> np.ndarray:
    """Per-value error probabilities ``M(rule != psi | psi)``."""
    _, cond = marginalize(model, psi)
    acts = np.asarray(rule.action_per_x)
    err = np.empty(psi.n_psi)
    for j in range(psi.n_psi):
        wrong = acts != j
        err[j] = math.fsum(cond[j][wrong].tolist())
    return err


def prior_risk(model: FiniteModel, psi: PsiMap, loss: LossMatrix, rule: DecisionRule) -> float:
    """Expected loss of the rule under the joint distribution.

    Computed directly in theta-space; for the uncapped reciprocal-prior and
    constant losses the closed forms (sum of conditional error
    probabilities, plain or prior-weighted) are cross-checked to 1e-9.
    """
    acts = np.asarray(rule.action_per_x)
    if acts.shape != (model.n_x,):
        raise ValidationError(f"rule covers {acts.shape} outcomes, model has {model.n_x}")
    psi_of_theta = np.asarray(psi.assignment)
    joint = model.prior[:, None] * model.likelihood
    losses = loss.values[psi_of_theta[:, None], acts[None, :]]
    direct = float(math.fsum((joint * losses).ravel().tolist()))
    if loss.kind in ("rb", "map"):
        errs = conditional_error_probs(model, psi, rule)
        if loss.kind == "rb":
            closed = float(math.fsum(errs.tolist()))
        else:
            pi_psi = psi_marginal(model.prior, psi)
            closed = float(math.fsum((errs * pi_psi).tolist()))
        if abs(direct - closed) > 1e-9:
            raise RelBelError(
                f"risk cross-check failed: direct {direct!r} vs closed form {closed!r}"
            )
    return direct


def lpl_region(loss: LossMatrix, posterior_masses, gamma: float, prior=None) -> RegionReport:
    """Lowest-posterior-loss region with posterior content at least gamma.

    The cutoff is the smallest posterior-risk level whose sublevel set
    reaches content gamma; members satisfy ``risk <= cutoff``.

    Risks are computed literally from the loss matrix. For reciprocal
    losses this keeps the construction independent of the ratio-based
    credible region, at a resolution cost: ratio gaps below one ulp of the
    total risk magnitude (reciprocals of the smallest prior masses) merge
    into one risk level. With mass ratios up to about 1e10 the affected
    levels sit far below any realistic cutoff.
    """
    if not 0.0 <= gamma <= 1.0:
        raise BadGammaError(f"gamma must be in [0, 1], got {gamma}")
    post = np.asarray(posterior_masses, dtype=float)
    risks = post @ loss.values
    # stable risk-ascending order is the same element sequence as the
    # evidence table's rb-descending order, so cumulative contents match
    # the credible-region levels bitwise
    order = np.argsort(risks, kind="stable")
    sorted_r = risks[order]
    cum = np.cumsum(post[order])
    ends = np.append(np.flatnonzero(np.diff(sorted_r)), len(sorted_r) - 1)
    levels, content = sorted_r[ends], cum[ends]
    hit = np.flatnonzero(content >= gamma)
    cutoff = float(levels[hit[0]] if len(hit) else levels[-1])
    members = np.flatnonzero(risks <= cutoff)
    prior_content = None
    if prior is not None:
        prior = np.asarray(prior, dtype=float)
        prior_content = float(math.fsum(prior[members].tolist()))
    return RegionReport(
        member_indices=frozenset(int(i) for i in members),
        cutoff=cutoff,
        posterior_content=float(math.fsum(post[members].tolist())),
        prior_content=prior_content,
    )


def unbiasedness_gap(model: FiniteModel, psi: PsiMap, h, rule: DecisionRule) -> float:
    """Average excess posterior-over-prior mass at the rule's actions.

    ``sum_x m(x) h(a_x) [pi_psi(a_x | x) - pi_psi(a_x)]``; the rule is
    Bayesian unbiased under the h-weighted two-valued loss iff this is >= 0.
    """
    h = np.asarray(h, dtype=float)
    if h.shape != (psi.n_psi,):
        raise ValidationError(f"h length {h.shape} != {psi.n_psi} psi values")
    if np.any(h < 0):
        raise ValidationError("h weights must be nonnegative")
    pi_psi = psi_marginal(model.prior, psi)
    m = prior_predictive(model)
    terms = []
    for x, a in enumerate(rule.action_per_x):
        post_psi = psi_marginal(posterior(model, x).posterior, psi)
        terms.append(m[x] * h[a] * (post_psi[a] - pi_psi[a]))
    return float(math.fsum(terms))


def brute_force_bayes(
    model: FiniteModel, psi: PsiMap, loss: LossMatrix, cap: int = RULE_CAP
) -> tuple[tuple, float]:
    """Exhaustively score every deterministic rule; return the best.

    Scores come from the joint theta-space expectation, independent of the
    per-outcome minimization in :func:`bayes_rule`. Guarded by ``cap`` on
    the number of rules.
    """
    n_rules = psi.n_psi**model.n_x
    if n_rules > cap:
        raise RuleSpaceTooLargeError(
            f"{psi.n_psi}^{model.n_x} = {n_rules} rules exceeds the cap {cap}"
        )
    psi_of_theta = np.asarray(psi.assignment)
    joint = model.prior[:, None] * model.likelihood
    # W[x, a] = joint expectation of the loss when outcome x gets action a
    W = joint.T @ loss.values[psi_of_theta]
    rules = np.indices((psi.n_psi,) * model.n_x).reshape(model.n_x, -1)
    risks = W[np.arange(model.n_x)[:, None], rules].sum(axis=0)
    best = int(np.argmin(risks))
    return tuple(int(a) for a in rules[:, best]), float(risks[best])


def all_rules(n_psi: int, n_x: int, cap: int = RULE_CAP) -> np.ndarray:
    """Every deterministic rule as an ``(n_rules, n_x)`` action array."""
    n_rules = n_psi**n_x
    if n_rules > cap:
        raise RuleSpaceTooLargeError(f"{n_psi}^{n_x} = {n_rules} rules exceeds the cap {cap}")
    return np.indices((n_psi,) * n_x).reshape(n_x, -1).T
