"""Correlation-based proper orthogonal decomposition.

The M x M snapshot correlation matrix lives under the grid inner product;
its spectral decomposition (computed stably from the weighted snapshots
themselves) yields orthonormal spatial modes with energy-ranked
eigenvalues.  Truncation keeps the smallest mode count whose relative
root-mean-square tail falls below a threshold.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .data import FMT, SnapshotSet, inner_product

__all__ = [
    "PodBasis",
    "PodThresholds",
    "PodHorizon",
    "correlation_matrix",
    "decompose",
    "truncate",
    "project",
    "reconstruct",
    "reconstruction_error",
    "ric",
    "pod_horizon",
    "save_pod_basis",
    "load_pod_basis",
]

# symmetry slack for a user-supplied correlation matrix, relative to its scale
NEG_TOL = 1e-10


@dataclass(frozen=True)
class PodThresholds:
    """Truncation threshold and the eigenvalue-decay forecast tolerance."""

    alpha_pod: float = 0.01
    beta_pod: float = 0.3

    def __post_init__(self):
        if not (0.0 < self.alpha_pod < 1.0):
            raise ValueError(f"alpha_pod must lie in (0,1), got {self.alpha_pod}")
        if not (0.0 < self.beta_pod < 1.0):
            raise ValueError(f"beta_pod must lie in (0,1), got {self.beta_pod}")


@dataclass(frozen=True)
class PodBasis:
    """Eigenvalues, orthonormal modes and temporal coefficients.

    ``modes`` is (R, N); ``coeffs`` is (M, R) with column k holding the
    trajectory of mode k; ``eigenvalues`` keeps the full length-M spectrum so
    tail sums survive truncation.
    """

    eigenvalues: np.ndarray
    modes: np.ndarray
    retained: int
    coeffs: np.ndarray
    rrms_tail: float

    @property
    def ric(self) -> np.ndarray:
        return ric(self)

    def tail_energy(self, r: int | None = None) -> float:
        r = self.retained if r is None else r
        return float(np.sum(self.eigenvalues[r:]))


def correlation_matrix(s: SnapshotSet) -> np.ndarray:
    """Snapshot correlation matrix A_ij = (fluct_i, fluct_j); symmetrized."""
    wf = s.fluct * s.grid.quad_weights
    A = wf @ s.fluct.T
    return 0.5 * (A + A.T)


def decompose(A: np.ndarray, s: SnapshotSet) -> PodBasis:
    """Spectral decomposition of the snapshot correlation with all M modes.

    The eigenpairs of ``A`` are obtained from the singular value
    decomposition of the weight-scaled fluctuation matrix (whose Gram matrix
    ``A`` is), which keeps the modes orthonormal and the tail-energy
    identities exact even for eigenvalues near round-off.  Only modes with
    an exactly zero singular value are excluded from the orthonormal set:
    their rows in ``modes`` and columns in ``coeffs`` are zero.
    """
    A = np.asarray(A, dtype=float)
    M = s.n_snapshots
    if A.shape != (M, M):
        raise ValueError(f"correlation matrix shape {A.shape} != ({M},{M})")
    if np.abs(A - A.T).max() > NEG_TOL * max(np.abs(A).max(), 1e-300):
        raise ValueError("correlation matrix is not symmetric")
    sqw = np.sqrt(s.grid.quad_weights)
    U, sing, Vt = np.linalg.svd(s.fluct * sqw, full_matrices=False)
    lam = np.zeros(M)
    lam[: sing.shape[0]] = sing**2
    if lam[0] <= 0.0:
        raise ValueError("degenerate input: snapshots carry no fluctuation energy")

    modes = np.zeros((M, s.n_nodes))
    coeffs = np.zeros((M, M))
    for k in np.flatnonzero(sing > 0.0):
        modes[k] = Vt[k] / sqw
        coeffs[:, k] = sing[k] * U[:, k]
    return PodBasis(
        eigenvalues=lam, modes=modes, retained=M, coeffs=coeffs, rrms_tail=0.0
    )


def truncate(b: PodBasis, alpha_pod: float) -> PodBasis:
    """Keep the smallest R with RRMS tail error below ``alpha_pod``."""
    if not (0.0 < alpha_pod < 1.0):
        raise ValueError(f"alpha_pod must lie in (0,1), got {alpha_pod}")
    lam = b.eigenvalues
    total = lam.sum()
    M = lam.shape[0]
    for R in range(1, M + 1):
        rrms = np.sqrt(lam[R:].sum() / total)
        if rrms < alpha_pod:
            return replace(
                b,
                modes=b.modes[:R],
                coeffs=b.coeffs[:, :R],
                retained=R,
                rrms_tail=float(rrms),
            )
    # unreachable: R = M always gives zero tail
    return b


def project(s: SnapshotSet, b: PodBasis) -> np.ndarray:
    """Coefficients a_k(t_i) = (fluct_i, mode_k) under the grid inner product."""
    if b.modes.shape[1] != s.n_nodes:
        raise ValueError(
            f"modes have {b.modes.shape[1]} nodes, snapshots have {s.n_nodes}"
        )
    return (s.fluct * s.grid.quad_weights) @ b.modes[: b.retained].T


def reconstruct(b: PodBasis, mean: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Field mean + sum_k a_k mode_k for one coefficient vector."""
    coeffs = np.asarray(coeffs, dtype=float).ravel()
    if coeffs.shape[0] != b.retained:
        raise ValueError(f"{coeffs.shape[0]} coefficients for {b.retained} modes")
    return np.asarray(mean, dtype=float) + coeffs @ b.modes[: b.retained]


def reconstruction_error(s: SnapshotSet, b: PodBasis, r: int) -> float:
    """Aggregate L2 truncation error over all snapshots at mode count ``r``.

    Equals sqrt(sum of the tail eigenvalues) exactly; computed here by direct
    reconstruction so the identity can be tested against the spectrum.
    """
    total = 0.0
    for i in range(s.n_snapshots):
        resid = s.fluct[i] - b.coeffs[i, :r] @ b.modes[:r]
        total += inner_product(resid, resid, s.grid)
    return float(np.sqrt(total))


def ric(b: PodBasis) -> np.ndarray:
    """Relative information content per mode, in percent."""
    total = b.eigenvalues.sum()
    if total <= 0.0:
        raise ValueError("degenerate spectrum: all eigenvalues zero")
    return 100.0 * b.eigenvalues / total


@dataclass(frozen=True)
class PodHorizon:
    """Furthest forecast time allowed by the eigenvalue decay rate."""

    t_star: float
    unbounded: bool = False


def pod_horizon(b: PodBasis, t1: float, tM: float, beta_pod: float) -> PodHorizon:
    """Forecast-time bound from the decay rate of the dominant eigenvalues.

    t* = tM + (tM - t1) * beta * (ln lambda_2 - ln lambda_{R+2}) / R, with
    eigenvalues indexed from 1.  When the spectrum is too short or the
    (R+2)-th eigenvalue has hit round-off, the bound is reported as
    unbounded rather than extrapolating the spectrum.
    """
    lam = b.eigenvalues
    R = b.retained
    M = lam.shape[0]
    if R + 2 > M or lam[R + 1] <= 1e-14 * lam[0]:
        warnings.warn(
            "eigenvalue decay rate undefined (R+2 exceeds spectrum or "
            "lambda_{R+2} at round-off); POD poses no forecast bound",
            stacklevel=2,
        )
        return PodHorizon(t_star=np.inf, unbounded=True)
    decay = (np.log(lam[1]) - np.log(lam[R + 1])) / R
    return PodHorizon(t_star=float(tM + (tM - t1) * beta_pod * decay))


def save_pod_basis(b: PodBasis, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "eigenvalues.csv", b.eigenvalues[:, None], fmt=FMT, delimiter=",")
    np.savetxt(out / "modes.csv", b.modes[: b.retained], fmt=FMT, delimiter=",")
    np.savetxt(out / "coeffs.csv", b.coeffs[:, : b.retained], fmt=FMT, delimiter=",")
    with open(out / "pod.json", "w") as fh:
        json.dump(
            {"retained": b.retained, "rrms_tail": b.rrms_tail},
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")


def load_pod_basis(in_dir: str | Path) -> PodBasis:
    src = Path(in_dir)
    with open(src / "pod.json") as fh:
        meta = json.load(fh)
    lam = np.loadtxt(src / "eigenvalues.csv", delimiter=",").ravel()
    modes = np.atleast_2d(np.loadtxt(src / "modes.csv", delimiter=","))
    coeffs = np.atleast_2d(np.loadtxt(src / "coeffs.csv", delimiter=","))
    R = int(meta["retained"])
    if modes.shape[0] != R and modes.shape[1] == R:
        modes = modes.T
    if coeffs.shape[1] != R and coeffs.shape[0] == R:
        coeffs = coeffs.T
    return PodBasis(
        eigenvalues=lam,
        modes=modes,
        retained=R,
        coeffs=coeffs,
        rrms_tail=float(meta["rrms_tail"]),
    )
