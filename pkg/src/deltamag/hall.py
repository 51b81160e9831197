"""Carrier density, mobility and derived sample parameters from Hall sweeps.

A single high-temperature sweep with both resistance components determines
everything in the first block of the sample table: the Hall slope gives the
sheet density, the zero-field longitudinal resistance gives the sheet
conductivity, and the rest (mobility, Fermi wavevector, mean free path,
k_F l, r_s) follows algebraically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import E_CHARGE, HBAR
from .fit import Measured, linear_fit

# Interaction-strength constant kappa = g_v / a_B for these layers, m^-1.
# Single configurable number; the default maps the density range of the
# reference samples onto r_s = 1.4 to 5.5.
KAPPA_DEFAULT = 3.37e9


@dataclass(frozen=True)
class Geometry:
    """Hall-bar geometry: length and width of the current path, m."""

    L: float
    W: float

    def __post_init__(self):
        if not (self.L > self.W > 0.0):
            raise ValueError("expected a Hall bar with L > W > 0")

    @property
    def squares(self) -> float:
        return self.L / self.W


@dataclass
class HallSweep:
    """One magnetic-field sweep with transverse and longitudinal resistance."""

    B: np.ndarray
    R_xy: np.ndarray
    R_xx: np.ndarray
    T_bath: float
    geometry: Geometry

    def __post_init__(self):
        self.B = np.asarray(self.B, dtype=float)
        self.R_xy = np.asarray(self.R_xy, dtype=float)
        self.R_xx = np.asarray(self.R_xx, dtype=float)
        if not (len(self.B) == len(self.R_xy) == len(self.R_xx)):
            raise ValueError("B, R_xy and R_xx must have equal length")
        dB = np.diff(self.B)
        if len(dB) and not (np.all(dB > 0.0) or np.all(dB < 0.0)):
            raise ValueError("B must be strictly monotone")
        if not self.T_bath > 0.0:
            raise ValueError("T_bath must be positive")


@dataclass
class SamplePhysics:
    """Physical parameters of one electron layer, all in SI.

    ``delta`` and ``l_phi`` stay None until a weak-localization fit has
    filled them in.
    """

    n_2d: float
    mu: float
    sigma_xx: float
    l_mfp: float
    k_f: float
    kf_l: float
    r_s: float
    delta: Optional[float] = None
    l_phi: Optional[float] = None

    def __post_init__(self):
        sigma_def = self.n_2d * E_CHARGE * self.mu
        if abs(self.sigma_xx - sigma_def) > 1e-12 * abs(sigma_def):
            raise ValueError("sigma_xx inconsistent with n_2d * e * mu")
        if abs(self.kf_l - self.k_f * self.l_mfp) > 1e-12 * abs(self.kf_l):
            raise ValueError("kf_l inconsistent with k_f * l_mfp")


def density_from_hall(sweep: HallSweep) -> Measured:
    """Sheet density from the linear Hall slope, with standard error.

    Ordinary least squares of R_xy on B with an intercept; the intercept
    absorbs any contact offset, so adding a constant to R_xy leaves the
    density unchanged. n = 1 / (e * dR_xy/dB).
    """
    if len(sweep.B) < 3:
        raise ValueError("need at least 3 field points")
    span = float(np.max(sweep.B) - np.min(sweep.B))
    if span < 0.5:
        raise ValueError(f"field span {span:.3g} T is below the required 0.5 T")
    if np.any(~np.isfinite(sweep.R_xy)):
        raise ValueError("R_xy contains non-finite values")
    res = linear_fit(sweep.B, sweep.R_xy)
    slope = res.slope
    if slope <= 0.0:
        raise ValueError(
            "non-positive Hall slope: carrier sign does not match the expected electrons"
        )
    n = 1.0 / (E_CHARGE * slope)
    slope_se = math.sqrt(max(res.cov[0, 0], 0.0))
    return Measured(n, n * slope_se / slope)


def sheet_conductivity(R_xx: float, L: float, W: float) -> float:
    """Sheet conductivity per square, sigma = (1/R_xx)(L/W)."""
    if not (R_xx > 0.0 and L > 0.0 and W > 0.0):
        raise ValueError("R_xx, L and W must be positive")
    return (1.0 / R_xx) * (L / W)


def mobility(n_2d: float, sigma_xx: float) -> float:
    """Drude mobility mu = sigma / (n e), m^2/(V s)."""
    if not (n_2d > 0.0 and sigma_xx > 0.0):
        raise ValueError("n_2d and sigma_xx must be positive")
    return sigma_xx / (n_2d * E_CHARGE)


def fermi_wavevector(n_2d: float) -> float:
    """k_F = sqrt(2 pi n), the spin-degenerate single-valley convention.

    This is the convention under which k_F l reproduces the reference table
    from its density and mean-free-path columns.
    """
    if not n_2d > 0.0:
        raise ValueError("n_2d must be positive")
    return math.sqrt(2.0 * math.pi * n_2d)


def mean_free_path(n_2d: float, mu: float) -> float:
    """Elastic mean free path l = hbar k_F mu / e, m."""
    if not (n_2d > 0.0 and mu > 0.0):
        raise ValueError("n_2d and mu must be positive")
    return HBAR * fermi_wavevector(n_2d) * mu / E_CHARGE


def interaction_rs(n_2d: float, kappa: float = KAPPA_DEFAULT) -> float:
    """Interaction strength r_s = kappa / sqrt(pi n), dimensionless."""
    if not (n_2d > 0.0 and kappa > 0.0):
        raise ValueError("n_2d and kappa must be positive")
    return kappa / math.sqrt(math.pi * n_2d)


def characterize(n_2d: float, sigma_xx: float, kappa: float = KAPPA_DEFAULT) -> SamplePhysics:
    """Assemble a SamplePhysics record from measured density and conductivity."""
    mu = mobility(n_2d, sigma_xx)
    k_f = fermi_wavevector(n_2d)
    l_mfp = mean_free_path(n_2d, mu)
    return SamplePhysics(
        n_2d=n_2d,
        mu=mu,
        sigma_xx=n_2d * E_CHARGE * mu,
        l_mfp=l_mfp,
        k_f=k_f,
        kf_l=k_f * l_mfp,
        r_s=interaction_rs(n_2d, kappa),
    )
