"""Generalized power function, fill distance, and convergence studies.

The power function of order m at a point x is the minimal sequence-space
distance (exponent m) from the base-kernel section at x to the span of the
sections at the data nodes.  In the truncated feature basis it is the
convex minimization

    P_m(x)^m = min_theta sum_k ( phi_k(x) - sum_i theta_i phi_k(x_i) )^m,

solved here by the same damped-Newton machinery as the interpolation
system.  For m = 2 the classical closed form
``P_2(x)^2 = Phi2(x, x) - B_2(x)^T A_2^{-1} B_2(x)`` is available as an
independent cross-check.  The pointwise interpolation error of any target
with known norm is bounded by ``2 ||f|| P_m(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _cartesian

import numpy as np

from .exceptions import SingularGram
from .features import Domain, FeatureModel, eval_features, eval_kernel2, require_even_order
from .interpolant import NodeSet, banach_norm_direct, evaluate_many, fit
from .solver import SolverOptions
from .tensors import FeatureGram

_MAX_BACKTRACKS = 60


def _power_objective(Vt, b, theta, m):
    r = b - Vt @ theta
    return float(np.sum(r ** m)), r


def power_function(model: FeatureModel, nodes: NodeSet, m: int, x,
                   opts: SolverOptions | None = None) -> float:
    """Order-m power function at x via convex minimization in feature space.

    Returns ``q*^{1/m}`` where ``q*`` is the minimum of the even-power
    objective above; zero (up to solver tolerance) whenever x is a node or
    the features are exactly representable on the nodes.
    """
    require_even_order(m)
    opts = opts or SolverOptions()
    V = FeatureGram.from_model(model, nodes.points).V  # n x K
    Vt = V.T  # K x n
    b = eval_features(model, x)

    # l2 minimizer: exact for m = 2 and a scale-correct warm start otherwise.
    theta, *_ = np.linalg.lstsq(Vt, b, rcond=None)
    q, r = _power_objective(Vt, b, theta, m)
    if m == 2:
        return float(max(q, 0.0) ** 0.5)

    n = nodes.n
    for _ in range(opts.max_iterations):
        grad = -m * V @ (r ** (m - 1))
        if float(np.linalg.norm(grad)) <= 1e-13 * (1.0 + q):
            break
        H = m * (m - 1) * (V * r ** (m - 2)) @ V.T
        ridge = opts.ridge_floor * max(1.0, np.trace(H) / n)
        step = None
        for _ in range(20):
            try:
                step = -np.linalg.solve(H + ridge * np.eye(n), grad)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and grad @ step < 0:
                break
            ridge *= 100.0
        if step is None or grad @ step >= 0:
            step = -grad
        slope = float(grad @ step)
        noise = 1e-15 * (1.0 + abs(q))
        eta = 1.0
        improved = False
        for _ in range(_MAX_BACKTRACKS):
            cand = theta + eta * step
            cand_q, cand_r = _power_objective(Vt, b, cand, m)
            if cand_q <= q + opts.armijo_constant * eta * slope + noise:
                improved = True
                break
            eta *= opts.line_search_shrink
        if not improved:
            break
        stalled = q - cand_q <= 1e-16 * (1.0 + abs(q))
        theta, q, r = cand, cand_q, cand_r
        if stalled:
            break
    return float(max(q, 0.0) ** (1.0 / m))


def power_function_p2_closed(model: FeatureModel, nodes: NodeSet, x) -> float:
    """Classical power function from the Gram matrix closed form."""
    V = FeatureGram.from_model(model, nodes.points).V
    A2 = V @ V.T
    b2 = np.array([eval_kernel2(model, x, xi) for xi in nodes.points])
    try:
        weights = np.linalg.solve(A2, b2)
    except np.linalg.LinAlgError as err:
        raise SingularGram("Gram matrix A_2 is singular") from err
    value = eval_kernel2(model, x, x) - float(b2 @ weights)
    return float(max(value, 0.0) ** 0.5)


def power_function_dense_oracle(model: FeatureModel, nodes: NodeSet, m: int, x,
                                grid: int = 41, rounds: int = 6,
                                half_width: float = 2.0) -> float:
    """Brute-force P_m for n <= 2 nodes: zoomed grid search over theta.

    Test oracle only; scans an (n-dimensional) grid around the l2 warm
    start and refines it `rounds` times.
    """
    V = FeatureGram.from_model(model, nodes.points).V
    Vt = V.T
    b = eval_features(model, x)
    center, *_ = np.linalg.lstsq(Vt, b, rcond=None)
    width = half_width
    best = None
    for _ in range(rounds):
        axes = [np.linspace(center[i] - width, center[i] + width, grid)
                for i in range(nodes.n)]
        best = None
        for combo in _cartesian(*axes):
            theta = np.asarray(combo)
            q, _ = _power_objective(Vt, b, theta, m)
            if best is None or q < best[0]:
                best = (q, theta)
        center = best[1]
        width *= 2.0 / (grid - 1)
    return float(max(best[0], 0.0) ** (1.0 / m))


def domain_grid(domain: Domain, per_dim: int) -> np.ndarray:
    """Uniform tensor grid over the box, endpoints included, row-major."""
    if per_dim < 2:
        raise ValueError("per_dim must be at least 2")
    axes = [np.linspace(domain.lower[j], domain.upper[j], per_dim)
            for j in range(domain.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def grid_spacing(domain: Domain, per_dim: int) -> float:
    """Spacing of :func:`domain_grid`; the uncertainty of the reported sup."""
    widths = (domain.upper - domain.lower) / (per_dim - 1)
    return float(np.linalg.norm(widths))


def fill_distance(nodes: NodeSet, domain: Domain, grid_per_dim: int) -> float:
    """Grid approximation of ``sup_x min_i ||x - x_i||_2``.

    The sup is taken over a uniform tensor grid, so the result is accurate
    to the grid spacing (see :func:`grid_spacing`).
    """
    grid = domain_grid(domain, grid_per_dim)
    diffs = grid[:, None, :] - nodes.points[None, :, :]
    dist = np.sqrt(np.sum(diffs ** 2, axis=2))
    return float(dist.min(axis=1).max())


def error_bound(f_norm: float, p_m: float) -> float:
    """Pointwise bound ``2 ||f|| P_m(x)`` on the interpolation error."""
    if f_norm < 0 or p_m < 0:
        raise ValueError("f_norm and p_m must be nonnegative")
    return 2.0 * f_norm * p_m


@dataclass(frozen=True)
class PowerReport:
    """Pointwise power-function values and error bounds on a grid."""

    eval_points: np.ndarray
    p_m: np.ndarray
    p_2: np.ndarray
    bound: np.ndarray
    fill_distance: float
    order: int


def power_report(model: FeatureModel, nodes: NodeSet, m: int, eval_points,
                 f_norm: float = 1.0, opts: SolverOptions | None = None,
                 grid_per_dim: int = 101) -> PowerReport:
    """Evaluate P_m, the classical P_2, and the error bound at each point."""
    eval_points = np.atleast_2d(np.asarray(eval_points, dtype=float))
    p_m = np.array([power_function(model, nodes, m, x, opts) for x in eval_points])
    try:
        p_2 = np.array([power_function_p2_closed(model, nodes, x) for x in eval_points])
    except SingularGram:
        p_2 = np.array([power_function(model, nodes, 2, x, opts) for x in eval_points])
    bound = 2.0 * f_norm * p_m
    h = fill_distance(nodes, model.domain, grid_per_dim)
    return PowerReport(eval_points, p_m, p_2, bound, h, m)


@dataclass(frozen=True)
class StudyRow:
    n: int
    h: float
    max_error: float
    max_bound: float


@dataclass(frozen=True)
class StudyResult:
    rows: list
    slope: float | None  # log-log slope of max_error against h

    def bound_dominates(self, slack: float) -> bool:
        return all(row.max_error <= row.max_bound + slack for row in self.rows)


def _equispaced_nodes(domain: Domain, n: int) -> np.ndarray:
    # cell midpoints: quasi-uniform, and avoids coincident feature rows at
    # the two endpoints for periodic families
    if domain.dim != 1:
        raise ValueError("default node placement is 1-d; pass node_generator")
    lo, hi = domain.lower[0], domain.upper[0]
    return (lo + (np.arange(n) + 0.5) * (hi - lo) / n)[:, None]


def convergence_study(model: FeatureModel, f_alpha, m: int, node_counts,
                      eval_grid, opts: SolverOptions | None = None,
                      grid_per_dim: int = 201,
                      node_generator=None) -> StudyResult:
    """Fill-distance refinement study for a target in the truncated span.

    The target is ``f = sum_k f_alpha[k] phi_k``, whose norm with exponent
    m/(m-1) is exact from its coefficients.  Each row fits the order-m
    interpolant on `n` nodes (equispaced for 1-d domains unless a
    `node_generator(n)` is supplied) and records the fill distance, the
    worst error over `eval_grid`, and the worst pointwise bound
    ``2 ||f|| P_m``.
    """
    require_even_order(m)
    f_alpha = np.asarray(f_alpha, dtype=float)
    eval_grid = np.atleast_2d(np.asarray(eval_grid, dtype=float))
    f_norm = banach_norm_direct(f_alpha, m / (m - 1))
    rows = []
    for n in node_counts:
        pts = node_generator(n) if node_generator else _equispaced_nodes(model.domain, n)
        V = FeatureGram.from_model(model, pts).V
        nodes = NodeSet(pts, V @ f_alpha)
        s = fit(model, nodes, m, opts)
        f_vals = np.array([float(f_alpha @ eval_features(model, x)) for x in eval_grid])
        errors = np.abs(f_vals - evaluate_many(s, eval_grid))
        bounds = np.array(
            [error_bound(f_norm, power_function(model, nodes, m, x, opts))
             for x in eval_grid]
        )
        rows.append(StudyRow(
            n=int(n),
            h=fill_distance(nodes, model.domain, grid_per_dim),
            max_error=float(errors.max()),
            max_bound=float(bounds.max()),
        ))
    slope = None
    if len(rows) >= 2 and all(r.max_error > 0 for r in rows):
        hs = np.log([r.h for r in rows])
        es = np.log([r.max_error for r in rows])
        slope = float(np.polyfit(hs, es, 1)[0])
    return StudyResult(rows=rows, slope=slope)
