"""Junction electrics: barrier -> Rn -> Ic (Ambegaokar-Baratoff) -> transmon f01,
and the inverse chain from a target frequency to the required Rn.

Functions accept scalars or numpy arrays where noted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants as sc

from .barrier import BarrierModel, OxidationSpec, barrier_thickness, critical_current_density
from .errors import ConfigError, DomainError

TRANSMON_MIN_RATIO = 20.0


@dataclass(frozen=True)
class PhysicalConstants:
    gap_delta_ueV: float = 180.0
    electron_charge: float = sc.e
    planck_h: float = sc.h
    boltzmann_k: float = sc.k

    def __post_init__(self):
        if not self.gap_delta_ueV > 0:
            raise ConfigError("gap_delta_ueV must be > 0")

    @property
    def flux_quantum(self):
        return self.planck_h / (2 * self.electron_charge)

    @property
    def gap_joule(self):
        return self.gap_delta_ueV * 1e-6 * self.electron_charge


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class TransmonParams:
    ec_over_h_mhz: float = 250.0
    ej_over_h_ghz: float = 10.35

    def __post_init__(self):
        if not (self.ec_over_h_mhz > 0 and self.ej_over_h_ghz > 0):
            raise DomainError("EJ and EC must be > 0")

    @property
    def ej_over_ec(self):
        return self.ej_over_h_ghz * 1e3 / self.ec_over_h_mhz


@dataclass(frozen=True)
class JunctionElectrics:
    rn_ohm: float
    ic_na: float
    jc_a_per_um2: float
    area_um2: float
    active_area_fraction: float = 0.10

    def __post_init__(self):
        if min(self.rn_ohm, self.ic_na, self.jc_a_per_um2, self.area_um2) <= 0:
            raise DomainError("junction electrics must be positive")
        expected = self.ic_na * 1e-9 / (self.active_area_fraction * self.area_um2)
        if abs(self.jc_a_per_um2 - expected) > 1e-9 * expected:
            raise DomainError("jc inconsistent with Ic and active area")


def wkb_attenuation_length_nm(barrier_height_ev=2.0):
    """Tunnelling attenuation length hbar / (2 sqrt(2 m phi)), nm; 2 eV gives 0.069 nm."""
    phi = barrier_height_ev * sc.e
    return sc.hbar / (2 * math.sqrt(2 * sc.m_e * phi)) * 1e9


def ic_rn_product_volts(constants=DEFAULT_CONSTANTS, temperature_K=0.0):
    """Ambegaokar-Baratoff product (pi Delta / 2e) tanh(Delta / 2 kB T)."""
    if temperature_K < 0:
        raise DomainError("temperature must be >= 0")
    delta = constants.gap_joule
    th = 1.0 if temperature_K == 0 else math.tanh(delta / (2 * constants.boltzmann_k * temperature_K))
    return math.pi * delta / (2 * constants.electron_charge) * th


def ic_from_rn(rn_ohm, constants=DEFAULT_CONSTANTS, temperature_K=0.0):
    """Critical current (nA) from normal-state resistance (ohm)."""
    rn = np.asarray(rn_ohm, dtype=float)
    if np.any(~(rn > 0)):
        raise DomainError("normal-state resistance must be > 0")
    ic = ic_rn_product_volts(constants, temperature_K) / rn * 1e9
    return float(ic) if ic.ndim == 0 else ic


def rn_from_ic(ic_na, constants=DEFAULT_CONSTANTS, temperature_K=0.0):
    ic = np.asarray(ic_na, dtype=float)
    if np.any(~(ic > 0)):
        raise DomainError("critical current must be > 0")
    rn = ic_rn_product_volts(constants, temperature_K) / (ic * 1e-9)
    return float(rn) if rn.ndim == 0 else rn


def ej_ghz_from_ic(ic_na, constants=DEFAULT_CONSTANTS):
    """Josephson energy EJ/h = Phi0 Ic / (2 pi h), in GHz."""
    return np.asarray(ic_na, dtype=float) * 1e-9 * constants.flux_quantum / (2 * math.pi * constants.planck_h) / 1e9


def ic_from_ej_ghz(ej_ghz, constants=DEFAULT_CONSTANTS):
    return np.asarray(ej_ghz, dtype=float) * 1e9 * 2 * math.pi * constants.planck_h / constants.flux_quantum * 1e9


def f01_ghz(ej_ghz, ec_mhz):
    """Vectorised transmon f01 = sqrt(8 EJ EC) - EC (GHz)."""
    ec = np.asarray(ec_mhz, dtype=float) / 1e3
    return np.sqrt(8 * np.asarray(ej_ghz, dtype=float) * ec) - ec


def transmon_f01(params: TransmonParams) -> float:
    if params.ej_over_ec < TRANSMON_MIN_RATIO:
        warnings.warn(f"EJ/EC = {params.ej_over_ec:.1f} is below the transmon regime "
                      f"({TRANSMON_MIN_RATIO:g})", stacklevel=2)
    return float(f01_ghz(params.ej_over_h_ghz, params.ec_over_h_mhz))


def target_rn_for_frequency(f01_target_ghz, ec_over_h_mhz, constants=DEFAULT_CONSTANTS,
                            temperature_K=0.0):
    """Normal-state resistance (ohm) that puts a transmon at ``f01_target_ghz``."""
    return frequency_chain(f01_target_ghz, ec_over_h_mhz, constants, temperature_K)["rn_ohm"]


def frequency_chain(f01_target_ghz, ec_over_h_mhz, constants=DEFAULT_CONSTANTS, temperature_K=0.0):
    """Inverse chain f01 -> EJ -> Ic -> Rn, returned as a dict."""
    if not f01_target_ghz > 0 or not ec_over_h_mhz > 0:
        raise DomainError("f01 and EC must be > 0")
    ec = ec_over_h_mhz / 1e3
    ej = (f01_target_ghz + ec) ** 2 / (8 * ec)
    ic = float(ic_from_ej_ghz(ej, constants))
    return {
        "f01_ghz": f01_target_ghz,
        "ec_over_h_mhz": ec_over_h_mhz,
        "ej_over_h_ghz": ej,
        "ej_over_ec": ej / ec,
        "ic_na": ic,
        "rn_ohm": rn_from_ic(ic, constants, temperature_K),
        "gap_delta_ueV": constants.gap_delta_ueV,
        "temperature_K": temperature_K,
    }


def f01_from_rn(rn_ohm, ec_over_h_mhz, constants=DEFAULT_CONSTANTS, temperature_K=0.0):
    ic = ic_from_rn(rn_ohm, constants, temperature_K)
    return f01_ghz(ej_ghz_from_ic(ic, constants), ec_over_h_mhz)


def consistent_rho0(spec: OxidationSpec, model: BarrierModel, constants=DEFAULT_CONSTANTS):
    """Specific resistance prefactor (ohm um^2) that makes the exponential
    barrier law reproduce the jc power law at the exposure of ``spec``."""
    jc = critical_current_density(spec, model)
    rn_times_active_area = ic_rn_product_volts(constants) / jc
    return rn_times_active_area / math.exp(barrier_thickness(spec, model) / model.lambda_nm)


def with_consistent_rho0(model: BarrierModel, spec: OxidationSpec, constants=DEFAULT_CONSTANTS):
    return replace(model, rho0_ohm_um2=consistent_rho0(spec, model, constants))


def rn_from_barrier(d_nm, area_um2, model: BarrierModel):
    """Rn = rho0 exp(d / lambda) / (active_fraction * area); arrays allowed."""
    if model.rho0_ohm_um2 is None:
        raise ConfigError("barrier model has no rho0; use with_consistent_rho0 first")
    d = np.asarray(d_nm, dtype=float)
    a = np.asarray(area_um2, dtype=float)
    if np.any(~(d > 0)) or np.any(~(a > 0)):
        raise DomainError("barrier thickness and area must be > 0")
    rn = model.rho0_ohm_um2 * np.exp(d / model.lambda_nm) / (model.active_area_fraction * a)
    return float(rn) if rn.ndim == 0 else rn


def junction_electrics(d_nm, area_um2, model: BarrierModel, constants=DEFAULT_CONSTANTS,
                       temperature_K=0.0) -> JunctionElectrics:
    rn = rn_from_barrier(d_nm, area_um2, model)
    ic = ic_from_rn(rn, constants, temperature_K)
    return JunctionElectrics(
        rn_ohm=rn,
        ic_na=ic,
        jc_a_per_um2=ic * 1e-9 / (model.active_area_fraction * area_um2),
        area_um2=area_um2,
        active_area_fraction=model.active_area_fraction,
    )
