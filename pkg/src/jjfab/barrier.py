"""Tunnel-barrier growth during oxidation.

Barrier thickness grows logarithmically with the oxygen exposure E = P * t;
critical-current density follows a power law in E. Static oxidation at low
pressure adds a leak-driven relative spread; bottom-electrode roughness adds
barrier-thickness dispersion through grain-boundary grooving.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, FitError

STATIC = "static"
DYNAMIC = "dynamic"


@dataclass(frozen=True)
class OxidationSpec:
    pressure_mbar: float = 0.05
    time_s: float = 600.0
    method: str = DYNAMIC

    def __post_init__(self):
        if not 1e-4 <= self.pressure_mbar <= 100:
            raise ConfigError("pressure_mbar must lie in [1e-4, 100]")
        if not self.time_s > 0:
            raise ConfigError("time_s must be > 0")
        if self.method not in (STATIC, DYNAMIC):
            raise ConfigError(f"oxidation method must be 'static' or 'dynamic', got {self.method!r}")

    @property
    def exposure_mbar_s(self):
        return self.pressure_mbar * self.time_s


@dataclass(frozen=True)
class BarrierModel:
    d0_nm: float = 0.5
    c_nm: float = 0.25
    e0_mbar_s: float = 0.1
    lambda_nm: float = 0.069
    jc_prefactor: float = 1.2e-4        # A / um^2 of active area
    jc_exponent: float = 0.5
    leak_coeff_mbar: float = 1e-3
    active_area_fraction: float = 0.10
    kappa_groove: float = 0.00077      # fitted to the two-scheme spread pair
    rho0_ohm_um2: float | None = None   # set by electrical.with_consistent_rho0

    def __post_init__(self):
        if not self.lambda_nm > 0:
            raise ConfigError("lambda_nm must be > 0")
        if not 0 < self.active_area_fraction <= 1:
            raise ConfigError("active_area_fraction must lie in (0, 1]")
        if not self.jc_exponent > 0:
            raise ConfigError("jc_exponent must be > 0")
        if self.e0_mbar_s <= 0 or self.jc_prefactor <= 0:
            raise ConfigError("e0_mbar_s and jc_prefactor must be > 0")
        if self.kappa_groove < 0 or self.leak_coeff_mbar < 0:
            raise ConfigError("kappa_groove and leak_coeff_mbar must be >= 0")


@dataclass(frozen=True)
class BarrierSample:
    mean_d_nm: float
    sigma_d_nm: float
    sigma_leak_rel: float

    def __post_init__(self):
        if not self.mean_d_nm > 0 or self.sigma_d_nm < 0 or self.sigma_leak_rel < 0:
            raise DomainError("invalid barrier sample")


@dataclass(frozen=True)
class OxidationFit:
    jc_prefactor: float
    jc_exponent: float
    residuals_log: tuple
    rms_residual_log: float


def barrier_thickness(spec: OxidationSpec, model: BarrierModel) -> float:
    """d = d0 + c * ln(1 + E / E0), in nm."""
    return model.d0_nm + model.c_nm * math.log1p(spec.exposure_mbar_s / model.e0_mbar_s)


def critical_current_density(spec: OxidationSpec, model: BarrierModel) -> float:
    """jc = prefactor * (E / E0) ** -exponent, in A per um^2 of active area."""
    e = spec.exposure_mbar_s
    if not e > 0:
        raise DomainError("zero oxygen exposure")
    return model.jc_prefactor * (e / model.e0_mbar_s) ** (-model.jc_exponent)


def calibrate_oxidation(points, e0_mbar_s=0.1) -> OxidationFit:
    """Least-squares fit of ln jc = ln A - b ln(E / E0) to (exposure, jc) pairs."""
    pts = [(float(e), float(j)) for e, j in points]
    if len(pts) < 2:
        raise FitError("need at least 2 calibration points")
    e = np.array([p[0] for p in pts])
    jc = np.array([p[1] for p in pts])
    if np.any(e <= 0) or np.any(jc <= 0):
        raise FitError("exposures and jc values must be positive")
    if np.unique(e).size < 2:
        raise FitError("need at least 2 distinct exposures")
    x = np.log(e / e0_mbar_s)
    design = np.column_stack([np.ones_like(x), -x])
    coef, *_ = np.linalg.lstsq(design, np.log(jc), rcond=None)
    resid = np.log(jc) - design @ coef
    return OxidationFit(
        jc_prefactor=float(math.exp(coef[0])),
        jc_exponent=float(coef[1]),
        residuals_log=tuple(float(r) for r in resid),
        rms_residual_log=float(np.sqrt(np.mean(resid ** 2))),
    )


def leak_sigma_rel(spec: OxidationSpec, model: BarrierModel) -> float:
    if spec.method == STATIC:
        return model.leak_coeff_mbar / spec.pressure_mbar
    return 0.0


def barrier_dispersion(rms_bottom_nm, spec: OxidationSpec, model: BarrierModel) -> BarrierSample:
    if rms_bottom_nm < 0:
        raise DomainError("roughness must be >= 0")
    return BarrierSample(
        mean_d_nm=barrier_thickness(spec, model),
        sigma_d_nm=model.kappa_groove * rms_bottom_nm,
        sigma_leak_rel=leak_sigma_rel(spec, model),
    )


def read_calibration_csv(text):
    """Parse ``exposure_mbar_s,jc_a_per_um2`` rows."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["exposure_mbar_s", "jc_a_per_um2"]:
        raise FitError("calibration CSV header must be 'exposure_mbar_s,jc_a_per_um2'")
    pts = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            pts.append((float(row[0]), float(row[1])))
        except (ValueError, IndexError) as exc:
            raise FitError(f"line {lineno}: bad calibration row {row!r}") from exc
    return pts
