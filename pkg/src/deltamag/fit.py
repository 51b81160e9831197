"""Least-squares machinery and the transport inverse problems.

The generic pieces are ``linear_fit`` (ordinary least squares with
intercept) and ``levmar`` (Levenberg-Marquardt with box projection). On top
of them sit the three model inversions: the two-parameter weak-localization
difference fit, the coherence-length power law, and the interaction-slope
fit that yields the Coulomb parameter F.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .constants import E_CHARGE, G0, HBAR
from .models import elastic_field, thickness_from_gamma, wl_perp_shape


class Measured(NamedTuple):
    """A value with its one-sigma standard error."""

    value: float
    stderr: float


@dataclass
class LinearFit:
    """Slope/intercept fit with covariance (order: slope, intercept)."""

    slope: float
    intercept: float
    cov: np.ndarray


def linear_fit(x, y) -> LinearFit:
    """Ordinary least squares of y on x with an intercept.

    The covariance is (X^T X)^-1 scaled by chi^2 / dof with dof = n - 2,
    so exact data yields a zero covariance. Two points are allowed (exact
    line, dof clamped to 1).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    n = x.size
    if n < 2:
        raise ValueError("need at least 2 points")
    xm = x.mean()
    dx = x - xm
    sxx = float(dx @ dx)
    if sxx <= 0.0:
        raise ValueError("x values are all identical")
    slope = float(dx @ y) / sxx
    intercept = float(y.mean() - slope * xm)
    resid = y - (slope * x + intercept)
    chi2 = float(resid @ resid)
    dof = max(n - 2, 1)
    s2 = chi2 / dof
    # cov in the centered basis, then shift the intercept back to x = 0
    cov = s2 * np.array(
        [[1.0 / sxx, -xm / sxx], [-xm / sxx, 1.0 / n + xm * xm / sxx]]
    )
    return LinearFit(slope, intercept, cov)


@dataclass
class Residual:
    """Residual mapping for ``levmar``.

    ``evaluate`` maps a parameter vector to the residual vector; ``jacobian``
    is optional and defaults to central finite differences.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass
class FitResult:
    params: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    bounds_active: np.ndarray


class ResidualError(RuntimeError):
    """Raised when a residual evaluation turns non-finite mid-iteration.

    Carries the last finite state so callers can inspect where the
    optimizer was before the failure.
    """

    def __init__(self, message, last_params=None, last_residual=None):
        super().__init__(message)
        self.last_params = last_params
        self.last_residual = last_residual


def finite_difference_jacobian(fun, p, *, bounds=None, x_scale=None, rel_step=1e-6):
    """Central-difference Jacobian with steps 1e-6 * scale, respecting bounds.

    Probe points are clipped into the box and the difference is divided by
    the actual span, so parameters sitting on a bound degrade gracefully to
    one-sided differences.
    """
    p = np.asarray(p, dtype=float)
    k = p.size
    if bounds is None:
        lo = np.full(k, -np.inf)
        hi = np.full(k, np.inf)
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    scale = _default_scale(p) if x_scale is None else np.asarray(x_scale, dtype=float)
    f0 = np.asarray(fun(p), dtype=float)
    J = np.empty((f0.size, k))
    for i in range(k):
        h = rel_step * scale[i]
        a = max(p[i] - h, lo[i])
        b = min(p[i] + h, hi[i])
        if b <= a:
            raise ValueError(f"bounds leave no room to differentiate parameter {i}")
        pa = p.copy()
        pa[i] = a
        pb = p.copy()
        pb[i] = b
        J[:, i] = (np.asarray(fun(pb), float) - np.asarray(fun(pa), float)) / (b - a)
    return J


def _default_scale(p):
    a = np.abs(np.asarray(p, dtype=float))
    return np.where(a > 0.0, a, 1.0)


def _sandwich_covariance(fun, p, bounds, x_scale):
    """Heteroscedasticity-consistent covariance from squared residuals.

    (J'J)^-1 J' diag(r^2) J (J'J)^-1 with the m/(m-k) small-sample
    correction; reduces to the usual estimate when the residual variance is
    uniform.
    """
    r = np.asarray(fun(p), dtype=float)
    J = finite_difference_jacobian(fun, p, bounds=bounds, x_scale=x_scale)
    J = J * np.asarray(x_scale, dtype=float)[None, :]  # dimensionless params
    m, k = J.shape
    bread = np.linalg.pinv(J.T @ J, hermitian=True)
    meat = J.T @ (J * (r * r)[:, None])
    cov_u = bread @ meat @ bread * (m / max(m - k, 1))
    S = np.outer(x_scale, x_scale)
    cov = cov_u * S
    return 0.5 * (cov + cov.T)


def levmar(
    residual,
    init,
    bounds=None,
    *,
    x_scale=None,
    gtol=1e-10,
    xtol=1e-12,
    max_iter=200,
) -> FitResult:
    """Levenberg-Marquardt least squares with box projection.

    Starts with undamped Gauss-Newton steps (so linear problems finish in
    one accepted step) and raises the damping only when a step fails.
    Candidate steps are projected onto the box; convergence is declared on
    the projected gradient, scaled per parameter, or on step size.

    Parameters
    ----------
    residual : Residual or callable
        Residual mapping; a bare callable is wrapped with finite-difference
        Jacobians.
    init : array_like
        Start point, must lie inside the bounds.
    bounds : (lo, hi) pair of arrays, optional
    x_scale : array_like, optional
        Characteristic parameter magnitudes, used for gradient scaling and
        difference steps. Defaults to |init| (1 for zero entries).

    Returns
    -------
    FitResult
        With covariance (J^T J)^-1 scaled by the reduced chi-square at the
        optimum. ``converged`` is False if 200 iterations pass without
        meeting a tolerance.
    """
    if not isinstance(residual, Residual):
        residual = Residual(evaluate=residual)
    p = np.asarray(init, dtype=float).copy()
    k = p.size
    if bounds is None:
        lo = np.full(k, -np.inf)
        hi = np.full(k, np.inf)
    else:
        lo, hi = (np.asarray(b, dtype=float).copy() for b in bounds)
    if np.any(lo > hi):
        raise ValueError("lower bound exceeds upper bound")
    if np.any(p < lo) or np.any(p > hi):
        raise ValueError("init lies outside the bounds")
    scale = _default_scale(p) if x_scale is None else np.asarray(x_scale, dtype=float)

    def evaluate(q, last_p, last_r):
        r = np.asarray(residual.evaluate(q), dtype=float)
        if not np.all(np.isfinite(r)):
            raise ResidualError(
                "residual became non-finite during iteration",
                last_params=None if last_p is None else last_p.copy(),
                last_residual=None if last_r is None else last_r.copy(),
            )
        return r

    if residual.jacobian is not None:
        jac = residual.jacobian
    else:
        def jac(q):
            return finite_difference_jacobian(
                lambda v: evaluate(v, p, r), q, bounds=(lo, hi), x_scale=scale
            )

    r = evaluate(p, None, None)
    m = r.size
    if m < k:
        raise ValueError("residual must have at least as many entries as parameters")
    cost = 0.5 * float(r @ r)
    J = np.asarray(jac(p), dtype=float)
    g = J.T @ r

    lam = 0.0
    iterations = 0
    converged = False
    while iterations < max_iter:
        g_proj = g.copy()
        at_lo = (p - lo) <= 1e-8 * scale
        at_hi = (hi - p) <= 1e-8 * scale
        g_proj[at_lo & (g_proj > 0.0)] = 0.0
        g_proj[at_hi & (g_proj < 0.0)] = 0.0
        if np.max(np.abs(g_proj * scale), initial=0.0) < gtol * max(1.0, cost):
            converged = True
            break

        iterations += 1
        # solve in units of x_scale; raw parameter magnitudes can differ by
        # many orders and would wreck the conditioning of J'J. Coordinates
        # pressed against a bound by the gradient are frozen for this step,
        # otherwise the clipped step keeps fighting the box instead of
        # optimizing the free directions.
        free = ~((at_lo & (g > 0.0)) | (at_hi & (g < 0.0)))
        A_s = (J.T @ J) * np.outer(scale, scale)
        g_s = g * scale
        A_f = A_s[np.ix_(free, free)]
        D = np.clip(np.diag(A_f), 1e-32, None)
        try:
            du_f = np.linalg.solve(A_f + lam * np.diag(D), -g_s[free])
        except np.linalg.LinAlgError:
            lam = 1e-3 if lam == 0.0 else 10.0 * lam
            if lam > 1e32:
                break
            continue
        du = np.zeros(k)
        du[free] = du_f
        dp = du * scale
        p_new = np.clip(p + dp, lo, hi)
        step = p_new - p
        if not np.any(step):
            # damping has already shrunk the step below float resolution;
            # raising it further cannot reopen a direction, so this is the
            # step-size criterion met in the hardest possible way
            converged = True
            break
        # an undamped full Gauss-Newton step whose own model predicts no
        # meaningful decrease means we are at the optimum up to Jacobian
        # noise; a box-clipped step says nothing of the sort
        if lam == 0.0 and np.array_equal(step, dp):
            step_s = step / scale
            predicted = -(g_s @ step_s + 0.5 * step_s @ (A_s @ step_s))
            if predicted <= 1e-12 * max(cost, 1e-300):
                converged = True
                break
        r_new = evaluate(p_new, p, r)
        cost_new = 0.5 * float(r_new @ r_new)
        if cost_new <= cost:
            p, r, cost = p_new, r_new, cost_new
            J = np.asarray(jac(p), dtype=float)
            g = J.T @ r
            if np.max(np.abs(step) / scale) < xtol:
                converged = True
                break
            lam = 0.0 if lam < 1e-12 else lam / 3.0
        else:
            # the damping has shrunk the trial step below xtol and it still
            # does not decrease the cost: we are at the attainable minimum
            # (typically the noise floor), which is convergence, not failure
            if np.max(np.abs(step) / scale) < xtol:
                converged = True
                break
            # no upper cap on lam short of float overflow: every tenfold
            # raise shrinks the trial step tenfold, so one of the step-size
            # exits above is reached in a bounded number of rejections
            lam = 1e-3 if lam == 0.0 else 10.0 * lam
            if lam > 1e32:
                break

    dof = max(m - k, 1)
    chi2_red = 2.0 * cost / dof
    cov_u = np.linalg.pinv((J.T @ J) * np.outer(scale, scale), hermitian=True)
    cov = cov_u * np.outer(scale, scale) * chi2_red
    cov = 0.5 * (cov + cov.T)
    bounds_active = ((p - lo) <= 1e-8 * scale) | ((hi - p) <= 1e-8 * scale)
    return FitResult(
        params=p,
        covariance=cov,
        residual_norm=math.sqrt(2.0 * cost),
        iterations=iterations,
        converged=converged,
        bounds_active=bounds_active,
    )


@dataclass
class WlDifferenceFit:
    """Result of the two-parameter weak-localization difference fit."""

    l_phi: Measured
    gamma: Measured
    delta: Measured
    covariance: np.ndarray  # (l_phi, gamma)
    fit: FitResult


def fit_wl_difference(
    B,
    d_sigma,
    l_mfp: float,
    n_2d: float,
    *,
    sigma=None,
    l_phi_max: float = 10e-6,
) -> WlDifferenceFit:
    """Fit the perpendicular-minus-in-plane conductance difference.

    The model is wl_perp(B; l_phi, l) - wl_inplane(B; gamma) with the mean
    free path held fixed at its Hall value, so exactly two parameters are
    free: l_phi and gamma. No prefactor multiplies the digamma lineshape.
    The fitted gamma is converted to the layer thickness delta.

    Parameters
    ----------
    B : array_like
        Fields, T; signs are folded with |B|.
    d_sigma : array_like
        Measured difference curve, S per square.
    l_mfp : float
        Mean free path from the Hall analysis, m.
    n_2d : float
        Sheet density, m^-2 (needed for the gamma -> delta conversion).
    sigma : array_like, optional
        Per-point uncertainties used as weights; unit weights if omitted.
    l_phi_max : float
        Upper bound of the coherence-length search window (default 10 um).
    """
    B = np.abs(np.asarray(B, dtype=float))
    y = np.asarray(d_sigma, dtype=float)
    if B.shape != y.shape or B.ndim != 1:
        raise ValueError("B and d_sigma must be 1-d arrays of equal length")
    if B.size < 5:
        raise ValueError("need at least 5 points for a 2-parameter fit")
    if B.size < 10:
        warnings.warn("fewer than 10 field points; fit may be poorly constrained")

    unit = G0 / math.pi
    yn = y / unit
    wn = None if sigma is None else np.asarray(sigma, dtype=float) / unit

    def model(p):
        lphi, gam = p
        return wl_perp_shape(B, lphi, l_mfp) - np.log1p(gam * B * B)

    def resid(p):
        r = model(p) - yn
        return r if wn is None else r / wn

    # Low-field curvature start for l_phi: for small B the difference curve
    # is quadratic, yn/B^2 ~ 1/(24 B_phi^2) - 1/(24 B_l^2) - gamma.
    b_l = elastic_field(l_mfp)
    pos = np.flatnonzero(B > 0.0)
    if pos.size == 0:
        raise ValueError("all field values are zero")
    k_small = pos[np.argsort(B[pos])][: max(3, B.size // 10)]
    curv = float(np.median(yn[k_small] / B[k_small] ** 2))
    c = curv + 1.0 / (24.0 * b_l**2)
    if c > 0.0:
        b_phi0 = math.sqrt(1.0 / (24.0 * c))
        l_phi0 = math.sqrt(HBAR / (4.0 * E_CHARGE * b_phi0))
    else:
        l_phi0 = 5.0 * l_mfp
    l_phi0 = min(max(l_phi0, 1.000001 * l_mfp), 0.999999 * l_phi_max)
    gamma0 = 1e-4

    lo = np.array([l_mfp, 0.0])
    hi = np.array([l_phi_max, 1.0])
    x_scale = np.array([l_phi0, 1e-4])
    result = levmar(
        Residual(evaluate=resid),
        np.array([l_phi0, gamma0]),
        bounds=(lo, hi),
        x_scale=x_scale,
    )
    l_phi_hat, gamma_hat = result.params

    if wn is None:
        # Without per-point errors the noise scale must come from the
        # residuals themselves, and measured curves are usually noisier
        # where the signal is larger; the sandwich estimator stays honest
        # under that heteroscedasticity where the plain chi-square
        # covariance does not.
        cov = _sandwich_covariance(resid, result.params, (lo, hi), x_scale)
    else:
        cov = result.covariance
    l_phi_se = math.sqrt(max(cov[0, 0], 0.0))
    gamma_se = math.sqrt(max(cov[1, 1], 0.0))

    if gamma_hat > 0.0:
        delta_hat = thickness_from_gamma(gamma_hat, n_2d, l_phi_hat, l_mfp)
        jac_d = np.array([-delta_hat / l_phi_hat, delta_hat / (2.0 * gamma_hat)])
        var_d = float(jac_d @ cov @ jac_d)
        delta_se = math.sqrt(max(var_d, 0.0))
    else:
        delta_hat = 0.0
        # slope of sqrt at 0 is infinite; quote the thickness a 1-sigma
        # gamma would imply instead
        delta_se = (
            thickness_from_gamma(gamma_se, n_2d, l_phi_hat, l_mfp)
            if gamma_se > 0.0
            else 0.0
        )

    return WlDifferenceFit(
        l_phi=Measured(float(l_phi_hat), l_phi_se),
        gamma=Measured(float(gamma_hat), gamma_se),
        delta=Measured(float(delta_hat), delta_se),
        covariance=cov,
        fit=result,
    )


@dataclass
class PowerLawFit:
    """Power-law fit l_phi = amplitude * T^exponent."""

    exponent: Measured
    amplitude: Measured  # meters at 1 K
    cov: np.ndarray  # (exponent, ln amplitude)


def fit_coherence_power_law(T, l_phi) -> PowerLawFit:
    """Fit l_phi(T) = A T^x by linear regression in log-log space.

    Callers are expected to pass only temperatures above the saturation
    floor; nothing here filters them.
    """
    T = np.asarray(T, dtype=float)
    lp = np.asarray(l_phi, dtype=float)
    if T.shape != lp.shape or T.ndim != 1:
        raise ValueError("T and l_phi must be 1-d arrays of equal length")
    if T.size < 3:
        raise ValueError("need at least 3 temperatures")
    if np.any(T <= 0.0):
        raise ValueError("temperatures must be positive")
    if np.any(lp <= 0.0):
        raise ValueError("coherence lengths must be positive")
    res = linear_fit(np.log(T), np.log(lp))
    amp = math.exp(res.intercept)
    return PowerLawFit(
        exponent=Measured(res.slope, math.sqrt(max(res.cov[0, 0], 0.0))),
        amplitude=Measured(amp, amp * math.sqrt(max(res.cov[1, 1], 0.0))),
        cov=res.cov,
    )


@dataclass
class AaSlopeFit:
    """Interaction slope fit on the asymptotic log branch."""

    F: Measured
    intercept_check: float  # implied reference constant, expected 1.3
    cov: np.ndarray  # (slope, intercept) of d_sigma vs ln h
    n_points: int


def fit_aa_slope(h, d_sigma, h_min: float = 3.0) -> AaSlopeFit:
    """Extract the Coulomb parameter F from Delta sigma vs ln h.

    Only points with h >= h_min enter (the log form holds for h >> 1);
    F = -slope * 2 pi / G0. The fitted intercept implies a reference
    constant exp(-intercept/slope), reported as a consistency check
    against the expected 1.3.
    """
    h = np.asarray(h, dtype=float)
    y = np.asarray(d_sigma, dtype=float)
    if h.shape != y.shape or h.ndim != 1:
        raise ValueError("h and d_sigma must be 1-d arrays of equal length")
    keep = h >= h_min
    if int(keep.sum()) < 3:
        raise ValueError(f"need at least 3 points with h >= {h_min:g}")
    res = linear_fit(np.log(h[keep]), y[keep])
    f_val = -res.slope * 2.0 * math.pi / G0
    f_se = 2.0 * math.pi / G0 * math.sqrt(max(res.cov[0, 0], 0.0))
    if res.slope != 0.0:
        ref = math.exp(-res.intercept / res.slope)
    else:
        ref = math.nan
    return AaSlopeFit(
        F=Measured(f_val, f_se),
        intercept_check=ref,
        cov=res.cov,
        n_points=int(keep.sum()),
    )
