"""Truncated feature expansions and the multi-kernels built from them.

A feature model holds a finite sequence of continuous functions
``phi_1, ..., phi_K`` on a compact box, each of the form
``phi_k(x) = sqrt(w_k) * b_k(x)`` with positive weights ``w_k``.  The base
kernel is ``Phi2(z1, z2) = sum_k phi_k(z1) phi_k(z2)`` and the order-m
multi-kernel is ``Phi_m(z1, ..., zm) = sum_k prod_i phi_k(z_i)``.

Two built-in families are provided:

* ``power``: monomials ``x^alpha`` over graded-lexicographic multi-indices
  (within each total degree, indices are ordered by decreasing leading
  exponents), default weights ``decay**|alpha|``.
* ``trig``: tensor products of ``1, cos(pi j x), sin(pi j x)`` per
  coordinate, enumerated by increasing total frequency (cosine before sine
  within a frequency), default weights ``decay**degree``.

A third family, ``custom``, tabulates feature values at a fixed point set
and can only be evaluated there; its JSON schema is
``{"points": [[...], ...], "features": [[...], ...]}`` with optional
``"weights"`` and ``"domain": {"lower": [...], "upper": [...]}`` keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product as _cartesian

import numpy as np

from .exceptions import (
    DimensionMismatch,
    OddOrderUnsupported,
    PointOutsideDomain,
    UntabulatedPoint,
)

# Points within this distance of a face are clamped onto it.
FACE_TOLERANCE = 1e-12

# Matching tolerance for custom-table point lookup.
TABLE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Domain:
    """Compact box ``[lower_1, upper_1] x ... x [lower_d, upper_d]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("domain bounds must be vectors of equal length")
        if not np.all(lower < upper):
            raise ValueError("domain box must have nonempty interior")

    @property
    def dim(self) -> int:
        return self.lower.size

    def project(self, x) -> np.ndarray:
        """Validate membership and clamp coordinates near a face onto it."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != self.lower.shape:
            raise PointOutsideDomain(
                f"point has dimension {x.size}, domain has dimension {self.dim}"
            )
        if np.any(x < self.lower - FACE_TOLERANCE) or np.any(
            x > self.upper + FACE_TOLERANCE
        ):
            raise PointOutsideDomain(f"point {x.tolist()} outside the domain box")
        return np.clip(x, self.lower, self.upper)


def _compositions(total, parts):
    """Weak compositions of `total` into `parts`, decreasing-lex order."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def graded_multi_indices(dim: int, count: int) -> np.ndarray:
    """First `count` multi-indices in graded lexicographic order."""
    out = []
    degree = 0
    while len(out) < count:
        for alpha in _compositions(degree, dim):
            out.append(alpha)
            if len(out) == count:
                break
        degree += 1
    return np.asarray(out, dtype=int)


def _trig_indices(dim, count):
    """Frequency/kind tables for the tensorized trigonometric family.

    Kinds: 0 = constant, 1 = cos(pi*j*x), 2 = sin(pi*j*x).
    """
    freqs, kinds = [], []
    degree = 0
    while len(freqs) < count:
        for degs in _compositions(degree, dim):
            per_dim = []
            for dj in degs:
                per_dim.append([(dj, 1), (dj, 2)] if dj > 0 else [(0, 0)])
            for combo in _cartesian(*per_dim):
                freqs.append([f for f, _ in combo])
                kinds.append([k for _, k in combo])
                if len(freqs) == count:
                    return np.asarray(freqs, int), np.asarray(kinds, int)
        degree += 1
    return np.asarray(freqs, int), np.asarray(kinds, int)


@dataclass(frozen=True)
class FeatureModel:
    """Immutable truncated feature sequence on a compact box."""

    domain: Domain
    family: str
    truncation: int
    weights: np.ndarray
    exponents: np.ndarray | None = None  # power: (K, d) integer multi-indices
    frequencies: np.ndarray | None = None  # trig: (K, d)
    trig_kinds: np.ndarray | None = None  # trig: (K, d) in {0, 1, 2}
    table_points: np.ndarray | None = None  # custom: (P, d)
    table_features: np.ndarray | None = None  # custom: (P, K)

    def __post_init__(self):
        if self.truncation < 1:
            raise ValueError("truncation K must be at least 1")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.truncation,) or np.any(w <= 0):
            raise ValueError("weights must be K positive reals")
        object.__setattr__(self, "weights", w)

    @classmethod
    def power_series(cls, domain: Domain, truncation: int, decay: float = 0.5,
                     weights=None) -> "FeatureModel":
        """Monomial features over graded multi-indices on the box."""
        exponents = graded_multi_indices(domain.dim, truncation)
        if weights is None:
            weights = decay ** exponents.sum(axis=1)
        return cls(domain, "power", truncation, np.asarray(weights, float),
                   exponents=exponents)

    @classmethod
    def trigonometric(cls, domain: Domain, truncation: int, decay: float = 0.5,
                      weights=None) -> "FeatureModel":
        """Tensorized Fourier features with decaying weights."""
        freqs, kinds = _trig_indices(domain.dim, truncation)
        if weights is None:
            weights = decay ** freqs.sum(axis=1).astype(float)
        return cls(domain, "trig", truncation, np.asarray(weights, float),
                   frequencies=freqs, trig_kinds=kinds)

    @classmethod
    def custom_table(cls, points, features, weights=None,
                     domain: Domain | None = None) -> "FeatureModel":
        """Feature values tabulated at a fixed point set."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        features = np.atleast_2d(np.asarray(features, dtype=float))
        if points.shape[0] != features.shape[0]:
            raise DimensionMismatch("points and features row counts differ")
        if domain is None:
            lo, hi = points.min(axis=0), points.max(axis=0)
            flat = hi - lo <= 0
            lo = np.where(flat, lo - 0.5, lo)
            hi = np.where(flat, hi + 0.5, hi)
            domain = Domain(lo, hi)
        K = features.shape[1]
        if weights is None:
            weights = np.ones(K)
        return cls(domain, "custom", K, np.asarray(weights, float),
                   table_points=points, table_features=features)

    @classmethod
    def custom_table_from_json(cls, source) -> "FeatureModel":
        """Load a custom table from a JSON file path or parsed document."""
        if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
            with open(source, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        else:
            doc = source
        domain = None
        if "domain" in doc:
            domain = Domain(doc["domain"]["lower"], doc["domain"]["upper"])
        return cls.custom_table(doc["points"], doc["features"],
                                weights=doc.get("weights"), domain=domain)


def eval_features(model: FeatureModel, x) -> np.ndarray:
    """Evaluate ``(phi_1(x), ..., phi_K(x))`` at a point in the domain."""
    x = model.domain.project(x)
    scale = np.sqrt(model.weights)
    if model.family == "power":
        return scale * np.prod(x[None, :] ** model.exponents, axis=1)
    if model.family == "trig":
        arg = np.pi * model.frequencies * x[None, :]
        vals = np.where(
            model.trig_kinds == 1, np.cos(arg),
            np.where(model.trig_kinds == 2, np.sin(arg), 1.0),
        )
        return scale * np.prod(vals, axis=1)
    # custom table: exact lookup only
    hits = np.where(
        np.all(np.abs(model.table_points - x[None, :]) <= TABLE_TOLERANCE, axis=1)
    )[0]
    if hits.size == 0:
        raise UntabulatedPoint(f"point {x.tolist()} is not tabulated")
    return scale * model.table_features[hits[0]]


def eval_kernel2(model: FeatureModel, z1, z2) -> float:
    """Base kernel ``Phi2(z1, z2) = sum_k phi_k(z1) phi_k(z2)``.

    Uses the same reduction order as :func:`eval_multikernel` so the two
    agree exactly at m = 2.
    """
    return float(np.sum(eval_features(model, z1) * eval_features(model, z2)))


def require_even_order(m: int) -> None:
    if m < 2 or m % 2 != 0:
        raise OddOrderUnsupported(f"order m must be even and >= 2, got {m}")


def eval_multikernel(model: FeatureModel, m: int, points) -> float:
    """Order-m multi-kernel ``sum_k prod_i phi_k(z_i)``.

    Symmetric under any permutation of the m arguments; reduces to
    ``eval_kernel2`` at m = 2.
    """
    require_even_order(m)
    points = list(points)
    if len(points) != m:
        raise DimensionMismatch(f"expected {m} points, got {len(points)}")
    feats = np.stack([eval_features(model, z) for z in points])
    return float(np.sum(np.prod(feats, axis=0)))


@dataclass(frozen=True)
class SummabilityReport:
    max_abs_sum: float
    tail_ratio: float


def check_summability(model: FeatureModel, grid) -> SummabilityReport:
    """Diagnose how faithful the truncation is on a sample grid.

    ``max_abs_sum`` is the grid maximum of ``sum_k |phi_k(x)|``;
    ``tail_ratio`` is the worst ratio of the second-half tail to the whole
    sum (0 for a single feature).  Small tail ratios indicate the retained
    features dominate the discarded ones.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("grid must be nonempty")
    K = model.truncation
    max_abs_sum = 0.0
    tail_ratio = 0.0
    for x in grid:
        a = np.abs(eval_features(model, x))
        total = float(a.sum())
        max_abs_sum = max(max_abs_sum, total)
        if K > 1 and total > 0:
            tail_ratio = max(tail_ratio, float(a[K // 2:].sum()) / total)
    return SummabilityReport(max_abs_sum=max_abs_sum, tail_ratio=tail_ratio)
