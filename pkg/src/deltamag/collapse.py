"""Interaction-channel isolation and the B/T scaling collapse.

The measured magnetoconductance is WL plus an isotropic Zeeman interaction
term. Subtracting the fitted WL model per orientation leaves the
interaction residue; plotted against ln h with h = g mu_B B / (k_B T) the
residues of all temperatures should fall on one curve. At low bath
temperature they only do so once the electron temperature is allowed to
float, which is how T_eff is measured: minimize the scatter of the pooled
points around a monotone master curve over the per-temperature T_eff, with
one anchor temperature pinned to its bath value to fix the overall scale
(h only constrains ratios of temperatures).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .fit import Measured, fit_aa_slope
from .models import reduced_field, wl_inplane, wl_perp_shape, InPlaneParams
from .constants import G0

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class OrientedCurve:
    """Measured conductivity correction vs field at one (T_bath, theta)."""

    T_bath: float
    theta_deg: float
    B: np.ndarray
    delta_sigma: np.ndarray

    def __post_init__(self):
        self.B = np.asarray(self.B, dtype=float)
        self.delta_sigma = np.asarray(self.delta_sigma, dtype=float)
        if self.B.shape != self.delta_sigma.shape or self.B.ndim != 1:
            raise ValueError("B and delta_sigma must be 1-d arrays of equal length")
        if self.theta_deg not in (0.0, 90.0):
            raise ValueError("theta_deg must be 0 or 90")
        if not self.T_bath > 0.0:
            raise ValueError("T_bath must be positive")


@dataclass
class AaCurve:
    """Interaction residue vs field at one bath temperature.

    ``T_eff`` is filled by the collapse; until then the bath value is the
    best guess.
    """

    T_bath: float
    B: np.ndarray
    delta_sigma: np.ndarray
    T_eff: Optional[float] = None

    def __post_init__(self):
        self.B = np.asarray(self.B, dtype=float)
        self.delta_sigma = np.asarray(self.delta_sigma, dtype=float)
        if self.B.shape != self.delta_sigma.shape or self.B.ndim != 1:
            raise ValueError("B and delta_sigma must be 1-d arrays of equal length")
        if not self.T_bath > 0.0:
            raise ValueError("T_bath must be positive")
        order = np.argsort(self.B, kind="stable")
        self.B = self.B[order]
        self.delta_sigma = self.delta_sigma[order]


@dataclass
class WlFitTable:
    """Fitted WL parameters per temperature, interpolable in T.

    l_phi is interpolated linearly in log-log (power-law behavior between
    nodes); gamma likewise, since gamma scales as l_phi^2 at fixed layer
    geometry. Temperatures outside the node range raise unless
    ``extrapolate`` is set, in which case the edge slope is extended.
    """

    T: np.ndarray
    l_phi: np.ndarray
    gamma: np.ndarray
    l_mfp: float

    def __post_init__(self):
        self.T = np.asarray(self.T, dtype=float)
        self.l_phi = np.asarray(self.l_phi, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        if not (self.T.shape == self.l_phi.shape == self.gamma.shape) or self.T.ndim != 1:
            raise ValueError("T, l_phi, gamma must be 1-d arrays of equal length")
        if self.T.size == 0:
            raise ValueError("empty fit table")
        if np.any(self.T <= 0.0) or np.any(self.l_phi <= 0.0) or np.any(self.gamma < 0.0):
            raise ValueError("T and l_phi must be positive, gamma nonnegative")
        order = np.argsort(self.T)
        self.T = self.T[order]
        self.l_phi = self.l_phi[order]
        self.gamma = self.gamma[order]

    def params_at(self, T: float, extrapolate: bool = False):
        """Interpolated (l_phi, gamma) at temperature T."""
        if not T > 0.0:
            raise ValueError("T must be positive")
        x = math.log(T)
        xs = np.log(self.T)
        if (x < xs[0] - 1e-12 or x > xs[-1] + 1e-12) and not extrapolate:
            raise ValueError(
                f"T = {T:g} K outside the fitted range "
                f"[{self.T[0]:g}, {self.T[-1]:g}] K; pass extrapolate=True to extend"
            )
        l_phi = math.exp(_interp_line(x, xs, np.log(self.l_phi)))
        if np.all(self.gamma > 0.0):
            gamma = math.exp(_interp_line(x, xs, np.log(self.gamma)))
        else:
            gamma = max(_interp_line(x, xs, self.gamma), 0.0)
        return l_phi, gamma


def _interp_line(x, xs, ys):
    """np.interp with linear extension beyond the end nodes."""
    if xs.size == 1:
        return float(ys[0])
    if x < xs[0]:
        s = (ys[1] - ys[0]) / (xs[1] - xs[0])
        return float(ys[0] + s * (x - xs[0]))
    if x > xs[-1]:
        s = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        return float(ys[-1] + s * (x - xs[-1]))
    return float(np.interp(x, xs, ys))


def isolate_aa(
    curves: Sequence[OrientedCurve],
    table: WlFitTable,
    *,
    extrapolate: bool = False,
    merge: bool = True,
):
    """Subtract the fitted WL model from measured curves, leaving the residue.

    Perpendicular curves lose the digamma WL term, in-plane curves the
    log-quadratic orbital term; what remains is the isotropic interaction
    correction in both cases, so both orientations at one bath temperature
    merge into a single AaCurve (set ``merge=False`` to keep one AaCurve
    per input curve, e.g. for isotropy checks).

    Returns AaCurve list sorted by T_bath.
    """
    residues = []
    for c in curves:
        l_phi, gamma = table.params_at(c.T_bath, extrapolate)
        if c.theta_deg == 0.0:
            model = (G0 / math.pi) * wl_perp_shape(np.abs(c.B), l_phi, table.l_mfp)
        else:
            model = wl_inplane(c.B, InPlaneParams(gamma))
        residues.append((c.T_bath, c.B, c.delta_sigma - model))

    if not merge:
        return [AaCurve(T, B, r) for T, B, r in residues]

    groups = {}
    for T, B, r in residues:
        key = round(T, 9)
        if key in groups:
            B0, r0 = groups[key]
            groups[key] = (np.concatenate([B0, B]), np.concatenate([r0, r]))
        else:
            groups[key] = (B, r)
    out = [AaCurve(T, B, r) for T, (B, r) in groups.items()]
    out.sort(key=lambda c: c.T_bath)
    return out


def _pooled_points(curves, t_eff, g_factor):
    xs, ys, ids = [], [], []
    for i, c in enumerate(curves):
        absB = np.abs(c.B)
        keep = absB > 0.0
        if not keep.any():
            continue
        h = reduced_field(absB[keep], t_eff[i], g_factor)
        xs.append(np.log(h))
        ys.append(c.delta_sigma[keep])
        ids.append(np.full(int(keep.sum()), i))
    if len(xs) < 2:
        raise ValueError("need at least 2 curves with nonzero-field points")
    return np.concatenate(xs), np.concatenate(ys), np.concatenate(ids)


def _pava_sse(means, weights, increasing):
    """Weighted isotonic regression by pool-adjacent-violators; returns SSE."""
    y = means if increasing else -means
    sums = []   # sum of w*y per block
    wts = []    # sum of w per block
    lens = []   # tied-point count per block
    for v, w in zip(y, weights):
        s, ww, ln = v * w, w, 1
        while sums and sums[-1] * ww >= s * wts[-1]:
            s += sums.pop()
            ww += wts.pop()
            ln += lens.pop()
        sums.append(s)
        wts.append(ww)
        lens.append(ln)
    fitted = np.repeat(
        np.array(sums) / np.array(wts), np.array(lens, dtype=int)
    )
    return float(np.sum(weights * (y - fitted) ** 2))


def dispersion(
    curves: Sequence[AaCurve],
    t_eff=None,
    *,
    g_factor: float = 2.0,
    n_bins: int = 40,
    min_shared_bins: int = 3,
) -> float:
    """Mean squared deviation of pooled points from one monotone master curve.

    Points from all curves are placed at x = ln h using each curve's
    candidate T_eff (its T_bath by default), pooled, and fit by exact
    isotonic regression; ties in x are forced to share a fitted value, so
    the result is zero exactly when all points lie on a single monotone
    curve. Both monotone directions are tried and the smaller deviation
    kept. Deterministic and invariant under curve reordering.
    """
    if t_eff is None:
        t_eff = [c.T_eff if c.T_eff is not None else c.T_bath for c in curves]
    t_eff = np.asarray(t_eff, dtype=float)
    if t_eff.shape != (len(curves),):
        raise ValueError("t_eff must provide one temperature per curve")
    x, y, ids = _pooled_points(curves, t_eff, g_factor)

    span = float(x.max() - x.min())
    if span <= 0.0:
        raise ValueError("all points share one h value; no curve to collapse onto")
    edges = np.linspace(x.min(), x.max(), n_bins + 1)
    bin_idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, n_bins - 1)
    shared = 0
    for b in range(n_bins):
        members = ids[bin_idx == b]
        if members.size and np.unique(members).size >= 2:
            shared += 1
    if shared < min_shared_bins:
        raise ValueError(
            f"curves overlap in only {shared} of {n_bins} bins "
            f"(need {min_shared_bins}); no collapse constraint exists"
        )

    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    ux, inv = np.unique(xs, return_inverse=True)
    counts = np.bincount(inv).astype(float)
    tie_means = np.bincount(inv, weights=ys) / counts
    within = float(np.sum((ys - tie_means[inv]) ** 2))
    between = min(
        _pava_sse(tie_means, counts, increasing=True),
        _pava_sse(tie_means, counts, increasing=False),
    )
    return (within + between) / x.size


@dataclass
class CollapseResult:
    """Collapse output: effective temperatures, master curve, F."""

    t_bath: np.ndarray
    t_eff: np.ndarray
    anchor: int
    dispersion: float
    master_curve: np.ndarray  # rows of (ln h, delta_sigma)
    F: Measured
    intercept_check: float


def _golden_min(f, a, b, tol):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def collapse_teff(
    curves: Sequence[AaCurve],
    anchor: Optional[int] = None,
    *,
    g_factor: float = 2.0,
    h_min: float = 3.0,
    n_bins: int = 40,
    rounds: int = 3,
    tol: float = 1e-4,
) -> CollapseResult:
    """Find per-temperature T_eff by minimizing the collapse dispersion.

    The anchor curve (highest bath temperature by default) keeps
    T_eff = T_bath; rescaling every T_eff by a common factor only shifts
    all curves rigidly in ln h, so without the anchor the solution would be
    defined up to that factor. The remaining temperatures are optimized by
    coordinate descent in ln T_eff with a golden-section line search over
    [0.75 T_bath, 30 T_bath], the whole descent restarted twice.

    Returns a CollapseResult; F comes from the slope of the binned master
    curve on h >= h_min (NaN if too few bins reach that regime).
    """
    if len(curves) < 3:
        raise ValueError("need at least 3 temperatures to collapse")
    t_bath = np.array([c.T_bath for c in curves], dtype=float)
    if anchor is None:
        anchor = int(np.argmax(t_bath))
    if not 0 <= anchor < len(curves):
        raise ValueError("anchor index out of range")

    t_eff = t_bath.copy()
    # raises early if the curves share no h support
    best = dispersion(curves, t_eff, g_factor=g_factor, n_bins=n_bins)

    # Exactly collapsible data sits in a flat valley whose depth is set by
    # float cancellation; below this floor there is nothing left to
    # optimize, so clamp to zero rather than chase rounding dust.
    _, y0, _ = _pooled_points(curves, t_eff, g_factor)
    floor = 1e-16 * float(np.mean(y0 * y0))
    if best <= floor:
        best = 0.0

    def objective(vec):
        try:
            d = dispersion(curves, vec, g_factor=g_factor, n_bins=n_bins)
        except ValueError:
            return math.inf
        return d if d > floor else 0.0

    coords = [i for i in np.argsort(-t_bath) if i != anchor]
    for _ in range(rounds):
        for _sweep in range(10):
            moved = 0.0
            for i in coords:
                lo = math.log(0.75 * t_bath[i])
                hi = math.log(30.0 * t_bath[i])

                def f_i(u, i=i):
                    trial = t_eff.copy()
                    trial[i] = math.exp(u)
                    return objective(trial)

                u_star = _golden_min(f_i, lo, hi, tol)
                f_star = f_i(u_star)
                # moves below the line-search resolution are noise, not signal
                if f_star < best and abs(math.log(t_eff[i]) - u_star) > tol:
                    moved = max(moved, abs(math.log(t_eff[i]) - u_star))
                    t_eff[i] = math.exp(u_star)
                    best = f_star
            if moved < tol:
                break

    for c, t in zip(curves, t_eff):
        c.T_eff = float(t)

    x, y, _ = _pooled_points(curves, t_eff, g_factor)
    edges = np.linspace(x.min(), x.max(), n_bins + 1)
    bin_idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, n_bins - 1)
    counts = np.bincount(bin_idx, minlength=n_bins)
    # bin means in both coordinates; using the mean x rather than the bin
    # center keeps the slope of linear data exact
    x_sums = np.bincount(bin_idx, weights=x, minlength=n_bins)
    y_sums = np.bincount(bin_idx, weights=y, minlength=n_bins)
    filled = counts > 0
    master = np.column_stack(
        [x_sums[filled] / counts[filled], y_sums[filled] / counts[filled]]
    )

    try:
        slope_fit = fit_aa_slope(np.exp(master[:, 0]), master[:, 1], h_min)
        F = slope_fit.F
        ref = slope_fit.intercept_check
    except ValueError:
        warnings.warn("too few master-curve bins above h_min; F not extracted")
        F = Measured(math.nan, math.nan)
        ref = math.nan

    return CollapseResult(
        t_bath=t_bath,
        t_eff=t_eff,
        anchor=anchor,
        dispersion=best,
        master_curve=master,
        F=F,
        intercept_check=ref,
    )
