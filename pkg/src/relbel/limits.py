"""Desk-scale experiments on limits of Bayes rules and regions.

Each experiment runs a decreasing ladder of a control parameter (the loss
cap eta, or the cell width of a discretization) and traces how the Bayes
action or credible region moves toward its evidence-based limit:

* :func:`eta_limit` - on a finite or truncated-countable table, the Bayes
  action under the capped reciprocal-prior loss must lock onto the
  evidence maximizer once eta drops below that value's prior mass.
* :func:`lambda_limit` - on a shrinking grid with the cap tied to the
  current best cell's prior mass, the Bayes action converges to the
  continuous evidence maximizer.
* :func:`map_limit_contrast` - same ladder under the plain cell-membership
  loss, which converges to the posterior density mode instead.
* :func:`region_limit` - credible regions of the discretized problem
  against a much finer reference standing in for the continuous region.
* :func:`lpl_sandwich` - lowest-posterior-loss regions squeezed between
  credible regions at the attained content and the next attainable one.
* :func:`invariance_demo` - a monotone change of variable moves the
  density-mode cell but not the evidence-maximizing cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .decision import lpl_region, make_loss
from .errors import (
    NoAttainableGammaError,
    SeparationViolatedError,
    TieAtMaximizerError,
    ValidationError,
)
from .evidence import (
    EvidenceTable,
    attainable_gammas,
    credible_region,
    rb_estimate,
    rb_table,
    table_from_gridded,
)
from .grids import Grid1D, GriddedDistribution, discretize, masses_from_cdf, refine
from .model import FiniteModel, PsiMap, posterior, psi_marginal

FLAT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LimitTrace:
    """One ladder run: parameter values, per-step results, limit target."""

    parameter_values: tuple
    actions_or_regions: tuple
    target: object
    discrepancies: tuple


def default_eta_ladder(prior, steps: int = 8) -> tuple[float, ...]:
    """Geometric ladder eta_k = max prior mass / 2^k."""
    top = float(np.max(np.asarray(prior, dtype=float)))
    if top <= 0:
        raise ValidationError("prior has no positive mass")
    if steps < 1:
        raise ValidationError("need at least one ladder step")
    return tuple(top * 0.5**k for k in range(steps))


def grid_ladder(base: Grid1D, steps: int = 4, factor: int = 2) -> list[Grid1D]:
    """Successively ``factor``-refined grids starting from ``base``."""
    grids = [base]
    for _ in range(steps - 1):
        grids.append(refine(grids[-1], factor))
    return grids


def _table_from_source(source, x=None, psi: PsiMap | None = None) -> EvidenceTable:
    if isinstance(source, EvidenceTable):
        return source
    if isinstance(source, FiniteModel):
        if x is None:
            raise ValidationError("an outcome index is required with a model source")
        if psi is None:
            from .model import identity_psi

            psi = identity_psi(source)
        prior = psi_marginal(source.prior, psi)
        post = psi_marginal(posterior(source, x).posterior, psi)
        return rb_table(prior, post, labels=psi.psi_labels)
    raise ValidationError(f"unsupported source type {type(source).__name__}")


def eta_limit(source, x=None, psi: PsiMap | None = None, eta_ladder=None) -> LimitTrace:
    """Bayes actions under the capped reciprocal-prior loss along an eta ladder.

    The per-step action maximizes ``posterior / max(eta, prior)``; the trace
    target is the evidence maximizer, which must be unique. Discrepancy is
    the index distance to the target.
    """
    t = _table_from_source(source, x=x, psi=psi)
    est = rb_estimate(t)
    if est.tie:
        raise TieAtMaximizerError("evidence maximizer is not unique")
    if eta_ladder is None:
        eta_ladder = default_eta_ladder(t.prior)
    eta_ladder = tuple(float(e) for e in eta_ladder)
    if any(e <= 0 for e in eta_ladder) or any(
        a <= b for a, b in zip(eta_ladder, eta_ladder[1:])
    ):
        raise ValidationError("eta ladder must be strictly decreasing and positive")
    actions = []
    for eta in eta_ladder:
        actions.append(int(np.argmax(t.posterior / np.maximum(eta, t.prior))))
    return LimitTrace(
        parameter_values=eta_ladder,
        actions_or_regions=tuple(actions),
        target=est.index,
        discrepancies=tuple(float(abs(a - est.index)) for a in actions),
    )


def _gridded_pair(
    prior_density: Callable,
    likelihood_at_x: Callable,
    grid: Grid1D,
    quadrature_points: int = 8,
) -> tuple[GriddedDistribution, GriddedDistribution]:
    prior_gd = discretize(prior_density, grid, quadrature_points)
    post_gd = discretize(
        lambda p: np.asarray(prior_density(p)) * np.asarray(likelihood_at_x(p)),
        grid,
        quadrature_points,
        warn_tail=None,
    )
    return prior_gd, post_gd


def _checked_argmax(values: np.ndarray, what: str) -> int:
    hi, lo = float(np.max(values)), float(np.min(values))
    if hi - lo <= FLAT_TOL * max(hi, 1.0):
        raise SeparationViolatedError(f"{what} is flat across the grid")
    peaks = np.flatnonzero(values == hi)
    if len(peaks) > 1 and (np.diff(peaks) > 1).any():
        raise SeparationViolatedError(f"{what} has separated equal peaks")
    return int(peaks[0])


def half_best_cell_mass(prior_masses: np.ndarray, best: int) -> float:
    """Default cap rule: half the prior mass of the best evidence cell.

    Strictly between zero and that cell's mass, hence small enough for the
    action to converge, without needing the continuous maximizer.
    """
    return 0.5 * float(prior_masses[best])


def lambda_limit(
    prior_density: Callable,
    likelihood_at_x: Callable,
    grids: Sequence[Grid1D],
    target: float | None = None,
    eta_rule: Callable[[np.ndarray, int], float] = half_best_cell_mass,
    quadrature_points: int = 8,
) -> LimitTrace:
    """Bayes actions of the discretized problem along a grid ladder.

    Per grid, ``eta_rule(prior_masses, best_cell)`` sets the loss cap
    (default: half the best evidence cell's prior mass) and the action is
    that ladder's Bayes cell midpoint. ``target`` defaults to the finest
    grid's own evidence argmax when no analytic value is supplied.
    """
    actions = []
    widths = []
    for grid in grids:
        prior_gd, post_gd = _gridded_pair(prior_density, likelihood_at_x, grid, quadrature_points)
        t = table_from_gridded(prior_gd, post_gd)
        best = _checked_argmax(t.rb, "relative belief ratio")
        eta = float(eta_rule(t.prior, best))
        if not 0.0 < eta < float(t.prior[best]) or not math.isfinite(eta):
            raise ValidationError(
                f"eta rule returned {eta!r}, outside (0, best cell mass)"
            )
        action = int(np.argmax(t.posterior / np.maximum(eta, t.prior)))
        actions.append(float(t.labels[action]))
        widths.append(grid.cell_width)
    if target is None:
        target = actions[-1]
    return LimitTrace(
        parameter_values=tuple(widths),
        actions_or_regions=tuple(actions),
        target=float(target),
        discrepancies=tuple(abs(a - float(target)) for a in actions),
    )


def map_limit_contrast(
    prior_density: Callable,
    likelihood_at_x: Callable,
    grids: Sequence[Grid1D],
    target: float | None = None,
    quadrature_points: int = 8,
) -> LimitTrace:
    """Bayes actions under the plain cell-membership loss (posterior mode)."""
    actions = []
    widths = []
    for grid in grids:
        _, post_gd = _gridded_pair(prior_density, likelihood_at_x, grid, quadrature_points)
        best = _checked_argmax(post_gd.masses, "posterior cell mass")
        actions.append(float(grid.midpoints[best]))
        widths.append(grid.cell_width)
    if target is None:
        target = actions[-1]
    return LimitTrace(
        parameter_values=tuple(widths),
        actions_or_regions=tuple(actions),
        target=float(target),
        discrepancies=tuple(abs(a - float(target)) for a in actions),
    )


def region_limit(
    prior_density: Callable,
    likelihood_at_x: Callable,
    gamma: float,
    grids: Sequence[Grid1D],
    refine_factor: int = 16,
    quadrature_points: int = 8,
) -> LimitTrace:
    """Credible regions along a grid ladder against a finer reference.

    The reference region lives on a ``refine_factor`` times finer grid than
    the finest ladder step; discrepancy is the reference-posterior mass of
    the symmetric difference after expanding ladder cells to reference
    cells.
    """
    ref_grid = refine(grids[-1], refine_factor)
    for g in grids:
        if ref_grid.n_cells % g.n_cells or g.lo != ref_grid.lo or g.hi != ref_grid.hi:
            raise ValidationError("ladder grids must nest into the reference grid")
    prior_ref, post_ref = _gridded_pair(prior_density, likelihood_at_x, ref_grid, quadrature_points)
    t_ref = table_from_gridded(prior_ref, post_ref)
    ref_region = credible_region(t_ref, gamma, "sup-geq")
    ref_mask = np.zeros(ref_grid.n_cells, dtype=bool)
    ref_mask[list(t_ref.original_indices(ref_region.member_indices))] = True
    ref_post = np.zeros(ref_grid.n_cells)
    ref_post[list(t_ref.kept_indices)] = t_ref.posterior

    widths, regions, discrepancies = [], [], []
    for grid in grids:
        prior_gd, post_gd = _gridded_pair(prior_density, likelihood_at_x, grid, quadrature_points)
        t = table_from_gridded(prior_gd, post_gd)
        reg = credible_region(t, gamma, "sup-geq")
        cells = t.original_indices(reg.member_indices)
        factor = ref_grid.n_cells // grid.n_cells
        mask = np.zeros(ref_grid.n_cells, dtype=bool)
        for i in cells:
            mask[i * factor : (i + 1) * factor] = True
        discrepancies.append(float(math.fsum(ref_post[mask ^ ref_mask].tolist())))
        widths.append(grid.cell_width)
        regions.append(frozenset(cells))
    return LimitTrace(
        parameter_values=tuple(widths),
        actions_or_regions=tuple(regions),
        target=frozenset(int(i) for i in np.flatnonzero(ref_mask)),
        discrepancies=tuple(discrepancies),
    )


@dataclass(frozen=True, eq=False)
class SandwichReport:
    """Lowest-posterior-loss regions squeezed between credible regions."""

    gamma_requested: float
    gamma_used: float
    gamma_next: float | None
    eta_values: tuple
    lower_region: frozenset
    upper_region: frozenset
    d_regions: tuple
    lower_holds: tuple
    upper_holds: tuple

    @property
    def holds_from(self) -> int | None:
        """First ladder index from which both inclusions hold onward."""
        ok = [lo and up for lo, up in zip(self.lower_holds, self.upper_holds)]
        idx = None
        for i in range(len(ok) - 1, -1, -1):
            if not ok[i]:
                break
            idx = i
        return idx


def lpl_sandwich(prior, posterior_masses, gamma: float, eta_ladder=None) -> SandwichReport:
    """Check the region sandwich on one finite (or truncated) table.

    Uses the smallest attainable posterior content at or above ``gamma``
    for the lower credible region (reported), and the next attainable
    content for the upper one; the lowest-posterior-loss region under the
    capped loss must contain the former and sit inside the latter once the
    cap is small.
    """
    if not 0.0 <= gamma <= 1.0:
        raise NoAttainableGammaError(f"gamma must be in [0, 1], got {gamma}")
    t = rb_table(prior, posterior_masses)
    levels = attainable_gammas(t)
    at_or_above = levels[levels >= gamma]
    gamma_used = float(at_or_above[0]) if len(at_or_above) else float(levels[-1])
    above = levels[levels > gamma_used]
    gamma_next = float(above[0]) if len(above) else None

    lower = credible_region(t, gamma_used, "sup-geq").member_indices
    if gamma_next is None:
        upper = frozenset(range(len(t)))
    else:
        upper = credible_region(t, gamma_next, "sup-geq").member_indices

    if eta_ladder is None:
        eta_ladder = default_eta_ladder(t.prior)
    eta_ladder = tuple(float(e) for e in eta_ladder)
    d_regions, lower_holds, upper_holds = [], [], []
    for eta in eta_ladder:
        loss = make_loss("rb-eta", t.prior, eta=eta)
        d = lpl_region(loss, t.posterior, gamma_used, prior=t.prior).member_indices
        d_regions.append(d)
        lower_holds.append(lower <= d)
        upper_holds.append(d <= upper)
    return SandwichReport(
        gamma_requested=gamma,
        gamma_used=gamma_used,
        gamma_next=gamma_next,
        eta_values=eta_ladder,
        lower_region=lower,
        upper_region=upper,
        d_regions=tuple(d_regions),
        lower_holds=tuple(lower_holds),
        upper_holds=tuple(upper_holds),
    )


def sandwich_double_limit(
    prior_density: Callable,
    likelihood_at_x: Callable,
    gamma: float,
    grids: Sequence[Grid1D],
    eta_steps: int = 8,
    quadrature_points: int = 8,
) -> list[tuple[float, SandwichReport]]:
    """Run the sandwich per ladder grid (outer cells, inner caps)."""
    out = []
    for grid in grids:
        prior_gd, post_gd = _gridded_pair(prior_density, likelihood_at_x, grid, quadrature_points)
        t = table_from_gridded(prior_gd, post_gd)
        ladder = default_eta_ladder(t.prior, eta_steps)
        out.append((grid.cell_width, lpl_sandwich(t.prior, t.posterior, gamma, ladder)))
    return out


@dataclass(frozen=True, eq=False)
class InvarianceReport:
    """Cell-level evidence argmax versus density-mode argmax under a
    monotone change of variable applied to the same grid."""

    rb_index: int
    rb_index_image: int
    rb_max_abs_diff: float
    map_index: int
    map_index_image: int
    map_shift_cells: int


def invariance_demo(
    prior_cdf: Callable,
    post_cdf: Callable,
    prior_cdf_image: Callable,
    post_cdf_image: Callable,
    transform: Callable,
    grid: Grid1D,
) -> InvarianceReport:
    """Compare evidence and density-mode argmax cells across a transform.

    The image cells are the transform of the grid cells (non-uniform
    widths). Masses on the image scale are computed from the image-scale
    CDFs, independently of the original scale, so equality of the ratio
    tables is a genuine check of transport, not bookkeeping.
    """
    edges = grid.edges
    image_edges = np.asarray(transform(edges), dtype=float)
    if np.any(np.diff(image_edges) <= 0):
        raise ValidationError("transform must be strictly increasing on the grid")

    def unit(v: np.ndarray) -> np.ndarray:
        return v / math.fsum(v.tolist())

    prior_m = unit(masses_from_cdf(prior_cdf, edges))
    post_m = unit(masses_from_cdf(post_cdf, edges))
    prior_mi = unit(masses_from_cdf(prior_cdf_image, image_edges))
    post_mi = unit(masses_from_cdf(post_cdf_image, image_edges))

    t = rb_table(prior_m, post_m)
    ti = rb_table(prior_mi, post_mi)
    common = sorted(set(t.kept_indices) & set(ti.kept_indices))
    pos = {k: i for i, k in enumerate(t.kept_indices)}
    pos_i = {k: i for i, k in enumerate(ti.kept_indices)}
    diffs = [abs(t.rb[pos[k]] - ti.rb[pos_i[k]]) for k in common]

    rb_idx = t.kept_indices[rb_estimate(t).index]
    rb_idx_image = ti.kept_indices[rb_estimate(ti).index]

    # density-level mode: mass over cell width (uniform widths originally)
    map_idx = int(np.argmax(post_m))
    image_widths = np.diff(image_edges)
    map_idx_image = int(np.argmax(post_mi / image_widths))

    return InvarianceReport(
        rb_index=int(rb_idx),
        rb_index_image=int(rb_idx_image),
        rb_max_abs_diff=float(max(diffs) if diffs else math.inf),
        map_index=map_idx,
        map_index_image=map_idx_image,
        map_shift_cells=abs(map_idx_image - map_idx),
    )


def gaussian_location_likelihood(x: float, sigma2: float = 1.0) -> Callable:
    """Likelihood of one Gaussian observation as a function of its mean."""
    if sigma2 <= 0:
        raise ValidationError("sigma2 must be > 0")

    def lik(psi):
        psi = np.asarray(psi, dtype=float)
        return np.exp(-0.5 * (x - psi) ** 2 / sigma2)

    return lik


def gaussian_log_location_likelihood(x: float, sigma2: float = 1.0) -> Callable:
    """Same observation model on the exp scale (mean is log of the input)."""
    if sigma2 <= 0:
        raise ValidationError("sigma2 must be > 0")

    def lik(tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros_like(tau)
        ok = tau > 0
        out[ok] = np.exp(-0.5 * (x - np.log(tau[ok])) ** 2 / sigma2)
        return out

    return lik
