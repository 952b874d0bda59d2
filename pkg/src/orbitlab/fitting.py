"""Least-squares helpers: power-law fits with confidence bounds, model fits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import IllConditioned


@dataclass
class SeriesFit:
    """A (parameter, value) series with fitted model coefficients."""

    params: np.ndarray
    values: np.ndarray
    coeffs: dict = field(default_factory=dict)
    residuals: np.ndarray | None = None
    degenerate: bool = False
    meta: dict = field(default_factory=dict)


def linear_fit(design: np.ndarray, y: np.ndarray, cond_limit: float = 1e10):
    """Solve min ||design @ c - y||; raises IllConditioned past cond_limit."""
    cond = np.linalg.cond(design)
    if not np.isfinite(cond) or cond > cond_limit:
        raise IllConditioned(f"design matrix condition number {cond:.3g}")
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coeffs
    return coeffs, resid


def power_law_fit(x, y, floor: float = 0.0) -> SeriesFit:
    """Fit |y| ~ C * x^p by least squares on log|y| vs log x.

    Returns coeffs exponent/intercept plus a 95% confidence interval on the
    exponent.  Values with |y| <= floor are dropped; if fewer than two points
    survive the fit is flagged degenerate.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = np.abs(y) > floor
    xs, ys = x[mask], np.abs(y[mask])
    fit = SeriesFit(params=x, values=y)
    if xs.size < 2:
        fit.degenerate = True
        fit.coeffs = {"exponent": 0.0, "intercept": 0.0,
                      "exponent_stderr": np.inf, "exponent_ci95": (-np.inf, np.inf)}
        return fit
    lx, ly = np.log(xs), np.log(ys)
    n = lx.size
    design = np.column_stack([lx, np.ones(n)])
    coeffs, resid = np.linalg.lstsq(design, ly, rcond=None)[:2][0], None
    pred = design @ coeffs
    resid = ly - pred
    slope, intercept = float(coeffs[0]), float(coeffs[1])
    if n > 2:
        s2 = float(resid @ resid) / (n - 2)
        sxx = float(np.sum((lx - lx.mean()) ** 2))
        stderr = np.sqrt(s2 / sxx) if sxx > 0 else np.inf
        tcrit = stats.t.ppf(0.975, n - 2)
        ci = (slope - tcrit * stderr, slope + tcrit * stderr)
    else:
        stderr, ci = np.inf, (-np.inf, np.inf)
    fit.coeffs = {"exponent": slope, "intercept": intercept,
                  "exponent_stderr": float(stderr), "exponent_ci95": ci}
    fit.residuals = resid
    return fit


def fit_t_logt_model(T, N, cond_limit: float = 1e10) -> SeriesFit:
    """Fit N(T) ~ c1*T*log(T) + c2*T and report relative residuals."""
    T = np.asarray(T, dtype=float)
    N = np.asarray(N, dtype=float)
    design = np.column_stack([T * np.log(T), T])
    coeffs, resid = linear_fit(design, N, cond_limit)
    rel = resid / np.maximum(np.abs(N), 1e-300)
    fit = SeriesFit(params=T, values=N,
                    coeffs={"c1": float(coeffs[0]), "c2": float(coeffs[1])},
                    residuals=resid)
    fit.meta["relative_residuals"] = rel
    # decay exponent of |residual| against T, for the remainder diagnostics
    if np.all(np.abs(resid) > 0) and T.size > 2:
        tail = power_law_fit(T, resid)
        fit.meta["residual_exponent"] = tail.coeffs["exponent"]
    return fit
