"""Gaussian process regression of scalar time series.

Squared-exponential kernel, exact Cholesky posterior, and marginal-likelihood
training by L-BFGS-B over log-parameters.  Training standardizes inputs and
outputs internally; predictions are returned in the original units.  The two
horizon scans turn posterior uncertainty into a furthest defensible forecast
time for the mode coefficients and for the boundary parameters.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize

__all__ = [
    "Kernel",
    "GprTolerances",
    "GprModel",
    "GprHorizon",
    "BoundaryHorizon",
    "kernel_matrix",
    "nlml",
    "train",
    "weighted_sigma",
    "gpr_horizon_modes",
    "gpr_horizon_boundary",
    "save_gpr_model",
    "load_gpr_model",
]

JITTER0 = 1e-10
JITTER_MAX = 1e-4
LOG_BOUNDS = ((-6.0, 6.0), (-6.0, 6.0), (-12.0, 2.0))  # log tf, log tl, log sigma


@dataclass(frozen=True)
class Kernel:
    """Squared-exponential kernel: theta_f^2 exp(-theta_l^2 dt^2 / 2).

    ``theta_l`` is an inverse length scale (1/time).
    """

    theta_f: float
    theta_l: float

    def __post_init__(self):
        if self.theta_f <= 0 or self.theta_l <= 0:
            raise ValueError("kernel scales must be positive")


@dataclass(frozen=True)
class GprTolerances:
    """Uncertainty tolerances for the two GPR forecast-horizon criteria."""

    beta_gpr_a: float = 0.1
    beta_gpr_gamma: float = 0.1

    def __post_init__(self):
        if self.beta_gpr_a <= 0 or self.beta_gpr_gamma <= 0:
            raise ValueError("GPR tolerances must be positive")


def kernel_matrix(k: Kernel, t: np.ndarray, tp: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float).ravel()
    tp = np.asarray(tp, dtype=float).ravel()
    d = t[:, None] - tp[None, :]
    return k.theta_f**2 * np.exp(-0.5 * k.theta_l**2 * d * d)


def _chol_with_jitter(C: np.ndarray, tf2: float) -> tuple[np.ndarray, float]:
    """Cholesky of C + jitter*I, escalating jitter tenfold on failure."""
    jit = JITTER0 * tf2
    n = C.shape[0]
    while jit <= JITTER_MAX * tf2 * (1 + 1e-12):
        try:
            return np.linalg.cholesky(C + jit * np.eye(n)), jit
        except np.linalg.LinAlgError:
            jit *= 10.0
    raise np.linalg.LinAlgError(
        f"Cholesky failed even with jitter {JITTER_MAX:g}*theta_f^2"
    )


def nlml(
    k: Kernel, noise_var: float, t: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray]:
    """Negative log marginal likelihood and its gradient.

    ``y`` is taken as-is (already mean-adjusted).  The gradient is with
    respect to (log theta_f, log theta_l, log sigma), computed from the
    standard trace identity.
    """
    t = np.asarray(t, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    M = t.shape[0]
    K = kernel_matrix(k, t, t)
    C = K + noise_var * np.eye(M)
    L, _ = _chol_with_jitter(C, k.theta_f**2)
    alpha = cho_solve((L, True), y)
    value = float(
        0.5 * y @ alpha + np.sum(np.log(np.diag(L))) + 0.5 * M * np.log(2 * np.pi)
    )
    Cinv = cho_solve((L, True), np.eye(M))
    W = Cinv - np.outer(alpha, alpha)
    d = t[:, None] - t[None, :]
    g_tf = 0.5 * np.sum(W * (2.0 * K))
    g_tl = 0.5 * np.sum(W * (-(k.theta_l**2) * d * d * K))
    g_sig = 0.5 * np.trace(W) * 2.0 * noise_var
    return value, np.array([g_tf, g_tl, g_sig])


class GprModel:
    """Trained (or directly constructed) GP over a scalar time series.

    The kernel and noise live in internal standardized units; predictions are
    de-standardized.  The prior mean is the constant sample mean of the
    training outputs.
    """

    def __init__(
        self,
        kernel: Kernel,
        noise_var: float,
        train_t: np.ndarray,
        train_y: np.ndarray,
        t_mean: float = 0.0,
        t_scale: float = 1.0,
        y_scale: float = 1.0,
        used_fallback: bool = False,
    ):
        if noise_var < 0:
            raise ValueError("noise variance must be nonnegative")
        self.kernel = kernel
        self.noise_var = float(noise_var)
        self.train_t = np.asarray(train_t, dtype=float).ravel()
        self.train_y = np.asarray(train_y, dtype=float).ravel()
        if self.train_t.shape != self.train_y.shape:
            raise ValueError("training inputs and outputs differ in length")
        self.t_mean = float(t_mean)
        self.t_scale = float(t_scale)
        self.y_scale = float(y_scale)
        self.y_mean = float(self.train_y.mean())
        self.used_fallback = used_fallback

        self._ts = (self.train_t - self.t_mean) / self.t_scale
        self._ys = (self.train_y - self.y_mean) / self.y_scale
        C = kernel_matrix(kernel, self._ts, self._ts) + self.noise_var * np.eye(
            self._ts.shape[0]
        )
        self.factor, self.jitter = _chol_with_jitter(C, kernel.theta_f**2)
        self.alpha = cho_solve((self.factor, True), self._ys)

    # raw-unit hyperparameter views
    @property
    def theta_f(self) -> float:
        return self.kernel.theta_f * self.y_scale

    @property
    def theta_l(self) -> float:
        return self.kernel.theta_l / self.t_scale

    @property
    def noise_std(self) -> float:
        return float(np.sqrt(self.noise_var)) * self.y_scale

    def predict(self, t_query) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and standard deviation at the query times."""
        tq = np.atleast_1d(np.asarray(t_query, dtype=float)).ravel()
        ts = (tq - self.t_mean) / self.t_scale
        ks = kernel_matrix(self.kernel, ts, self._ts)
        mu = ks @ self.alpha
        v = solve_triangular(self.factor, ks.T, lower=True)
        var = self.kernel.theta_f**2 - np.sum(v * v, axis=0)
        var = np.clip(var, 0.0, None)
        return mu * self.y_scale + self.y_mean, np.sqrt(var) * self.y_scale


def _median_heuristic(ts: np.ndarray) -> float:
    d = np.abs(ts[:, None] - ts[None, :])[np.triu_indices(ts.shape[0], 1)]
    d = d[d > 0]
    return float(np.median(d)) if d.size else 1.0


def train(t: np.ndarray, y: np.ndarray, seed: int = 0, n_starts: int = 15) -> GprModel:
    """Fit kernel scales and noise by minimizing the marginal likelihood.

    Runs L-BFGS-B from a deterministic lattice of starting points (length
    scales around the median pairwise distance crossed with three noise
    levels); extra randomized starts are added only when ``n_starts``
    exceeds the lattice size.  If every start fails, falls back to the
    median-heuristic hyperparameters with a warning.
    """
    t = np.asarray(t, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if t.shape[0] < 2:
        raise ValueError("need at least 2 training points")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
        raise ValueError("training data must be finite")

    t_mean, t_scale = float(t.mean()), float(t.std())
    t_scale = t_scale if t_scale > 0 else 1.0
    y_mean = float(y.mean())
    y_scale = float((y - y_mean).std())
    y_scale = y_scale if y_scale > 0 else 1.0
    ts = (t - t_mean) / t_scale
    ys = (y - y_mean) / y_scale

    ltl0 = np.log(1.0 / _median_heuristic(ts))
    lo = np.array([b[0] for b in LOG_BOUNDS])
    hi = np.array([b[1] for b in LOG_BOUNDS])
    starts = [
        np.clip(np.array([0.0, ltl0 + dl, lsig]), lo, hi)
        for dl in (np.log(0.25), np.log(0.5), 0.0, np.log(2.0), np.log(4.0))
        for lsig in (np.log(1e-6), np.log(1e-4), np.log(1e-2))
    ]
    if n_starts > len(starts):
        rng = np.random.default_rng(seed)
        for _ in range(n_starts - len(starts)):
            starts.append(np.clip(
                np.array([0.0, ltl0, np.log(1e-4)]) + rng.uniform(-2, 2, 3), lo, hi
            ))

    def objective(p):
        tf, tl, sig = np.exp(p)
        try:
            return nlml(Kernel(tf, tl), sig**2, ts, ys)
        except np.linalg.LinAlgError:
            return 1e25, np.zeros(3)

    best = None
    for p0 in starts[:max(n_starts, 1)]:
        res = minimize(
            objective,
            p0,
            jac=True,
            method="L-BFGS-B",
            bounds=LOG_BOUNDS,
            options={"maxiter": 200},
        )
        if np.isfinite(res.fun) and res.fun < 1e24 and (best is None or res.fun < best.fun):
            best = res

    if best is None:
        warnings.warn(
            "all L-BFGS restarts diverged; using median-heuristic hyperparameters",
            stacklevel=2,
        )
        kernel = Kernel(1.0, float(np.exp(ltl0)))
        return GprModel(
            kernel, 1e-4, t, y,
            t_mean=t_mean, t_scale=t_scale, y_scale=y_scale, used_fallback=True,
        )

    ltf, ltl, lsig = best.x
    kernel = Kernel(float(np.exp(ltf)), float(np.exp(ltl)))
    return GprModel(
        kernel, float(np.exp(2 * lsig)), t, y,
        t_mean=t_mean, t_scale=t_scale, y_scale=y_scale,
    )


def weighted_sigma(models: list[GprModel], lambdas: np.ndarray, t_query: float) -> float:
    """Energy-weighted posterior deviation: sum_k lam_k s_k / sum_all lam."""
    lam = np.asarray(lambdas, dtype=float).ravel()
    R = len(models)
    sigs = np.array([m.predict(t_query)[1][0] for m in models])
    return float((lam[:R] * sigs).sum() / lam.sum())


@dataclass(frozen=True)
class GprHorizon:
    """Scan result: furthest time where the uncertainty ratio stays in tolerance."""

    t_star: float
    sigma_weighted: float
    at_data_end: bool = False
    capped: bool = False


def gpr_horizon_modes(
    models: list[GprModel],
    lambdas: np.ndarray,
    tM: float,
    beta: float,
    scan_step: float,
    max_steps: int = 1000,
) -> GprHorizon:
    """Largest grid time where the weighted sigma/|mu| ratio stays <= beta.

    The ratio weights each mode's posterior deviation and |mean| by its
    eigenvalue; the scan stops at the first violating step.  A sign change
    driving the denominator to zero counts as a violation.
    """
    if scan_step <= 0:
        raise ValueError("scan_step must be positive")
    lam = np.asarray(lambdas, dtype=float).ravel()
    R = len(models)
    t_star = tM
    for n in range(1, max_steps + 1):
        tq = tM + n * scan_step
        mus = np.empty(R)
        sigs = np.empty(R)
        for k, m in enumerate(models):
            mu, sg = m.predict(tq)
            mus[k], sigs[k] = mu[0], sg[0]
        den = float((lam[:R] * np.abs(mus)).sum())
        num = float((lam[:R] * sigs).sum())
        if den <= 0.0 or num / den > beta:
            if n == 1:
                warnings.warn(
                    "GPR mode criterion violated at the first scan step; "
                    "no extrapolation permitted",
                    stacklevel=2,
                )
                return GprHorizon(tM, weighted_sigma(models, lam, tM), at_data_end=True)
            return GprHorizon(t_star, weighted_sigma(models, lam, t_star))
        t_star = tq
    return GprHorizon(t_star, weighted_sigma(models, lam, t_star), capped=True)


@dataclass(frozen=True)
class BoundaryHorizon:
    """Per-parameter horizons and their minimum."""

    t_star: float
    per_param: tuple[float, ...]
    at_data_end: bool = False
    capped: bool = False


def gpr_horizon_boundary(
    track_models: list[GprModel],
    tM: float,
    beta: float,
    scan_step: float,
    max_steps: int = 1000,
) -> BoundaryHorizon:
    """Per-parameter sigma/|mu| horizon; the overall bound is the minimum."""
    if scan_step <= 0:
        raise ValueError("scan_step must be positive")
    stars = []
    any_end = False
    any_cap = False
    for m in track_models:
        t_star = tM
        capped = True
        for n in range(1, max_steps + 1):
            tq = tM + n * scan_step
            mu, sg = m.predict(tq)
            if abs(mu[0]) < 1e-12 or sg[0] / abs(mu[0]) > beta:
                capped = False
                if n == 1:
                    any_end = True
                break
            t_star = tq
        any_cap |= capped
        stars.append(t_star)
    if any_end:
        warnings.warn(
            "a boundary-parameter criterion is violated at the first scan "
            "step; no extrapolation permitted",
            stacklevel=2,
        )
    return BoundaryHorizon(
        t_star=float(min(stars)),
        per_param=tuple(stars),
        at_data_end=any_end,
        capped=any_cap,
    )


def save_gpr_model(m: GprModel, path: str | Path) -> None:
    payload = {
        "theta_f": m.kernel.theta_f,
        "theta_l": m.kernel.theta_l,
        "noise_var": m.noise_var,
        "t_mean": m.t_mean,
        "t_scale": m.t_scale,
        "y_scale": m.y_scale,
        "train_t": m.train_t.tolist(),
        "train_y": m.train_y.tolist(),
        "used_fallback": m.used_fallback,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_gpr_model(path: str | Path) -> GprModel:
    with open(path) as fh:
        p = json.load(fh)
    return GprModel(
        Kernel(p["theta_f"], p["theta_l"]),
        p["noise_var"],
        np.asarray(p["train_t"]),
        np.asarray(p["train_y"]),
        t_mean=p["t_mean"],
        t_scale=p["t_scale"],
        y_scale=p["y_scale"],
        used_fallback=p.get("used_fallback", False),
    )
