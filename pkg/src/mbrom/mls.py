"""Moving least squares interpolation and the near-boundary correction step.

A locally weighted polynomial is fitted over trusted neighbor nodes and
evaluated at a target node.  The basis is centered at the target and scaled
by the support radius, so the moment matrix stays well conditioned and the
fitted value is simply the first coefficient.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .data import FMT, SpatialGrid, _poly_matrix, _poly_terms

__all__ = [
    "MlsConfig",
    "CorrectionReport",
    "wendland_c2",
    "mls_fit",
    "mls_value",
    "correct_field",
]


def wendland_c2(q: np.ndarray) -> np.ndarray:
    """Compactly supported C2 weight (1-q)^4 (4q+1) on [0, 1)."""
    q = np.asarray(q, dtype=float)
    return np.where(q < 1.0, (1.0 - q) ** 4 * (4.0 * q + 1.0), 0.0)


@dataclass(frozen=True)
class MlsConfig:
    """Polynomial degree, support radius and neighbor requirements.

    ``kernel_len`` of None lets ``correct_field`` seed the radius from the
    grid spacing.  ``min_neighbor_factor`` times the number of polynomial
    terms is the neighbor count required before a fit is attempted; the
    radius grows by 1.5x up to ``max_growths`` times to reach it.
    """

    order: int = 3
    kernel_len: float | None = None
    weight: Callable[[np.ndarray], np.ndarray] = wendland_c2
    min_neighbor_factor: float = 6.0
    max_growths: int = 8

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("polynomial order must be >= 0")
        if self.kernel_len is not None and self.kernel_len <= 0:
            raise ValueError("kernel length must be positive")
        if self.min_neighbor_factor < 1:
            raise ValueError("min_neighbor_factor must be >= 1")
        q = np.linspace(0.0, 0.999, 40)
        w = np.asarray(self.weight(q), dtype=float)
        if np.any(w <= 0) or np.any(np.diff(w) > 1e-12):
            raise ValueError("weight must be positive and nonincreasing on [0,1)")
        if np.any(np.asarray(self.weight(np.array([1.0, 1.3]))) != 0.0):
            raise ValueError("weight must vanish for q >= 1")

    def n_terms(self, dim: int) -> int:
        return len(_poly_terms(dim, self.order))

    def required_neighbors(self, dim: int) -> int:
        return int(np.ceil(self.min_neighbor_factor * self.n_terms(dim)))


def _term_name(e: tuple[int, ...]) -> str:
    axes = "xy"
    parts = [
        axes[d] if p == 1 else f"{axes[d]}^{p}"
        for d, p in enumerate(e)
        if p > 0
    ]
    return "*".join(parts) if parts else "1"


def mls_fit(
    xp: np.ndarray,
    points: np.ndarray,
    values: np.ndarray,
    cfg: MlsConfig,
    h: float | None = None,
) -> np.ndarray:
    """Weighted least-squares polynomial coefficients around ``xp``.

    Neighbors must lie within the support radius ``h`` (``cfg.kernel_len``
    when not given).  Returns the coefficient vector in the centered,
    h-scaled monomial basis; its first entry is the fitted value at ``xp``.
    """
    xp = np.atleast_1d(np.asarray(xp, dtype=float)).ravel()
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != xp.shape[0]:
        points = points.T
    values = np.asarray(values, dtype=float).ravel()
    dim = xp.shape[0]
    h = cfg.kernel_len if h is None else h
    if h is None or h <= 0:
        raise ValueError("a positive support radius is required")
    terms = _poly_terms(dim, cfg.order)
    need = cfg.required_neighbors(dim)
    if points.shape[0] < need:
        raise ValueError(
            f"{points.shape[0]} neighbors, need at least {need} "
            f"({cfg.min_neighbor_factor} x {len(terms)} terms)"
        )
    d = np.sqrt(np.sum((points - xp) ** 2, axis=1))
    if np.any(d >= h):
        raise ValueError("neighbor outside the support radius")
    w = np.asarray(cfg.weight(d / h), dtype=float)
    P = _poly_matrix((points - xp) / h, terms)
    Pauw = P * w[:, None]
    mm = Pauw.T @ P
    rhs = Pauw.T @ values
    try:
        c, low = cho_factor(mm, lower=True)
        diag = np.diag(c)
        if diag.min() ** 2 <= 1e-12 * diag.max() ** 2:
            raise np.linalg.LinAlgError("pivot below tolerance")
        return cho_solve((c, low), rhs)
    except (np.linalg.LinAlgError, ValueError):
        evals, evecs = np.linalg.eigh(mm)
        worst = np.argmax(np.abs(evecs[:, 0]))
        raise ValueError(
            f"rank-deficient moment matrix: neighbors do not resolve the "
            f"{_term_name(terms[worst])} direction"
        ) from None


def mls_value(
    xp: np.ndarray,
    points: np.ndarray,
    values: np.ndarray,
    cfg: MlsConfig,
    h: float | None = None,
) -> float:
    """Fitted field value at ``xp`` (first coefficient of the centered fit)."""
    return float(mls_fit(xp, points, values, cfg, h)[0])


@dataclass
class CorrectionReport:
    """Per-node record of what the correction step did."""

    rows: list[tuple[int, float, float, float]] = field(default_factory=list)
    uncorrected: list[int] = field(default_factory=list)

    def corrected_nodes(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows], dtype=int)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node", "h", "before", "after"])
            for node, h, before, after in self.rows:
                writer.writerow([node, FMT % h, FMT % before, FMT % after])


def correct_field(
    field_values: np.ndarray,
    exposed: np.ndarray,
    fluid_history: np.ndarray,
    grid: SpatialGrid,
    cfg: MlsConfig,
) -> tuple[np.ndarray, CorrectionReport]:
    """Replace values at newly exposed nodes by MLS fits over trusted nodes.

    ``exposed`` holds indices (or a boolean mask) of nodes whose values came
    from filled data; ``fluid_history`` flags nodes that carried real data
    throughout the window and remain in the fluid at the query time.  The
    support radius starts at the configured kernel length (default 3x grid
    spacing) and grows by 1.5x per attempt; nodes still short of neighbors
    at the growth cap are left untouched and reported.
    """
    field_values = np.asarray(field_values, dtype=float)
    fluid_history = np.asarray(fluid_history, dtype=bool).ravel()
    exposed = np.asarray(exposed)
    if exposed.dtype == bool:
        exposed = np.flatnonzero(exposed)
    exposed = exposed.astype(int).ravel()
    if fluid_history.shape[0] != grid.n_nodes:
        raise ValueError("fluid_history length does not match grid")
    if np.any(fluid_history[exposed]):
        raise ValueError("exposed set overlaps fluid-history set")

    corrected = field_values.copy()
    report = CorrectionReport()
    if exposed.size == 0:
        return corrected, report

    h0 = cfg.kernel_len if cfg.kernel_len is not None else 3.0 * grid.spacing()
    need = cfg.required_neighbors(grid.dim)
    hist_idx = np.flatnonzero(fluid_history)
    hist_pts = grid.coords[hist_idx]

    for j in exposed:
        xp = grid.coords[j]
        d = np.sqrt(np.sum((hist_pts - xp) ** 2, axis=1))
        h = h0
        for _ in range(cfg.max_growths + 1):
            inside = d < h
            if inside.sum() >= need:
                break
            h *= 1.5
        else:
            report.uncorrected.append(int(j))
            continue
        sel = hist_idx[inside]
        new_val = mls_value(xp, grid.coords[sel], corrected[sel],
                            cfg, h)
        report.rows.append((int(j), float(h), float(field_values[j]), new_val))
        corrected[j] = new_val
    return corrected, report
