"""Evaporation geometry: point-source flux over a tilted wafer and the
resulting thickness maps, Dolan-bridge linewidth shifts and junction areas.

Lab frame: the crucible sits at ``(ox, oy, 0)`` emitting a cos^n lobe along
+z; the wafer centre is at ``(0, 0, L)``. The wafer is rotated by the tilt
angle about the lab y axis, so in-plane coordinates ``(u, v)`` map to
``P = (u cos a, v, L - u sin a)``. ``u`` is the tilt direction; evaporation
shadows shift features along ``u``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CalibrationError, ConfigError, DomainError, ShadowedPointError, ZeroAreaError

THROW_BRACKET_MM = (100.0, 10000.0)


@dataclass(frozen=True)
class SourceGeometry:
    throw_distance_mm: float = 1200.0
    emission_exponent: float = 1.0
    tilt_alpha_deg: float = 0.0
    source_offset_mm: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.throw_distance_mm > 0:
            raise ConfigError("throw_distance_mm must be > 0")
        if not 0.0 <= self.tilt_alpha_deg < 90.0:
            raise ConfigError("tilt_alpha_deg must lie in [0, 90)")
        if not self.emission_exponent >= 0:
            raise ConfigError("emission_exponent must be >= 0")
        if len(self.source_offset_mm) != 2:
            raise ConfigError("source_offset_mm must be a 2-vector")


@dataclass(frozen=True)
class WaferLayout:
    radius_mm: float = 50.0
    die_pitch_mm: float = 4.0
    grid_dims: tuple = (5, 5)
    chip_positions: tuple = ((0.0, 0.0),)

    def __post_init__(self):
        if not self.radius_mm > 0:
            raise ConfigError("radius_mm must be > 0")
        if self.die_pitch_mm <= 0 or min(self.grid_dims) < 1:
            raise ConfigError("die grid must have positive pitch and dimensions")
        for p in self.chip_positions:
            if math.hypot(*p) > self.radius_mm:
                raise ConfigError(f"chip position {tuple(p)} lies outside the wafer")

    def die_centers(self, chip=(0.0, 0.0)):
        """Die centre coordinates (mm) of a ``grid_dims`` die grid around ``chip``."""
        nr, nc = self.grid_dims
        rows = (np.arange(nr) - (nr - 1) / 2) * self.die_pitch_mm
        cols = (np.arange(nc) - (nc - 1) / 2) * self.die_pitch_mm
        out = [(chip[0] + c, chip[1] + r) for r in rows for c in cols]
        for p in out:
            if math.hypot(*p) > self.radius_mm:
                raise ConfigError(f"die at {p} lies outside the wafer")
        return out


@dataclass(frozen=True)
class MaskStack:
    copolymer_height_nm: float = 500.0
    imaging_resist_height_nm: float = 100.0
    bridge_width_nm: float = 150.0
    undercut_nm: float = 300.0

    def __post_init__(self):
        if min(self.copolymer_height_nm, self.imaging_resist_height_nm) <= 0:
            raise ConfigError("resist heights must be > 0")
        if self.bridge_width_nm <= 0:
            raise ConfigError("bridge_width_nm must be > 0")
        if self.undercut_nm < 0:
            raise ConfigError("undercut_nm must be >= 0")

    @property
    def total_height_nm(self):
        return self.copolymer_height_nm + self.imaging_resist_height_nm

    def undercut_covers(self, shift_nm):
        """True when the lateral shift stays inside the undercut (width model valid)."""
        return abs(shift_nm) <= self.undercut_nm


@dataclass(frozen=True)
class JunctionDesign:
    """Nominal electrode widths: bottom electrode ``width_nm``, top ``length_nm``."""

    width_nm: float
    length_nm: float
    bottom_angle_deg: float = 0.0
    top_angle_deg: float = 0.0

    def __post_init__(self):
        if self.width_nm <= 0 or self.length_nm <= 0:
            raise ConfigError("junction dimensions must be > 0")

    @property
    def name(self):
        return f"{self.width_nm:g}x{self.length_nm:g}"

    @property
    def area_nm2(self):
        return self.width_nm * self.length_nm


@dataclass(frozen=True)
class FluxSample:
    incidence_angle_deg: float
    relative_rate: float
    # signed incidence angle projected into the plane of the tilt (u, normal)
    projected_angle_deg: float | None = None

    def __post_init__(self):
        if not self.relative_rate > 0:
            raise DomainError("relative_rate must be > 0")
        if not 0.0 <= self.incidence_angle_deg < 90.0:
            raise DomainError("incidence angle must lie in [0, 90)")

    @property
    def shadow_angle_deg(self):
        if self.projected_angle_deg is None:
            return self.incidence_angle_deg
        return self.projected_angle_deg


@dataclass
class ScalarField:
    """Values sampled at wafer coordinates (mm)."""

    x_mm: np.ndarray
    y_mm: np.ndarray
    values: np.ndarray
    step_mm: float = 0.0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    def to_csv(self, value_name="value"):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x_mm", "y_mm", value_name])
        for x, y, v in zip(self.x_mm.tolist(), self.y_mm.tolist(), self.values.tolist()):
            w.writerow([f"{x:.6g}", f"{y:.6g}", f"{v:.9g}"])
        return buf.getvalue()


def _ray(src: SourceGeometry, u, v):
    """Unnormalised flux and ray components at wafer coordinates (arrays)."""
    a = math.radians(src.tilt_alpha_deg)
    L = src.throw_distance_mm
    ox, oy = src.source_offset_mm
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    sa, ca = math.sin(a), math.cos(a)
    along = ox * ca + L * sa - u            # source direction component along u
    across = oy - v                         # component along v
    normal = L * ca - ox * sa + 0.0 * u     # distance of the source to the wafer plane
    r = np.sqrt(along ** 2 + across ** 2 + normal ** 2)
    cos_emit = (L - u * sa) / r
    cos_inc = normal / r
    return along, normal, r, cos_emit, cos_inc


def _raw_rate(src, u, v):
    along, normal, r, cos_emit, cos_inc = _ray(src, u, v)
    if np.any(cos_inc <= 0) or np.any(cos_emit <= 0):
        raise ShadowedPointError("evaporation ray reaches the wafer from behind its plane")
    return cos_emit ** src.emission_exponent * cos_inc / r ** 2, along, normal, cos_inc


def local_flux(src: SourceGeometry, point_mm, radius_mm=50.0) -> FluxSample:
    """Incidence angle and deposition rate (1.0 at wafer centre) at a point."""
    u, v = map(float, point_mm)
    if math.hypot(u, v) > radius_mm * (1 + 1e-12):
        raise DomainError(f"point {point_mm} lies outside the {radius_mm} mm wafer")
    rate, along, normal, cos_inc = _raw_rate(src, u, v)
    center, *_ = _raw_rate(src, 0.0, 0.0)
    inc = math.degrees(math.acos(min(1.0, float(cos_inc))))
    proj = math.degrees(math.atan2(float(along), float(normal)))
    return FluxSample(incidence_angle_deg=inc, relative_rate=float(rate / center),
                      projected_angle_deg=proj)


def wafer_grid(radius_mm, grid_step_mm):
    """Grid points ``k * step`` (k integer) inside the wafer; symmetric under
    90 degree rotation by construction."""
    if not grid_step_mm > 0:
        raise ConfigError("grid_step_mm must be > 0")
    n = int(math.floor(radius_mm / grid_step_mm + 1e-9))
    ks = np.arange(-n, n + 1) * grid_step_mm
    xx, yy = np.meshgrid(ks, ks)
    inside = np.hypot(xx, yy) <= radius_mm + 1e-9
    x, y = xx[inside], yy[inside]
    if x.size < 2:
        raise ConfigError(f"grid step {grid_step_mm} mm leaves no usable points on the wafer")
    return x, y


def thickness_map(src: SourceGeometry, wafer: WaferLayout, grid_step_mm=1.0) -> ScalarField:
    """Relative film thickness (wafer centre = 1) over the wafer."""
    x, y = wafer_grid(wafer.radius_mm, grid_step_mm)
    rate, *_ = _raw_rate(src, x, y)
    center, *_ = _raw_rate(src, 0.0, 0.0)
    return ScalarField(x, y, rate / center, grid_step_mm,
                       meta={"quantity": "relative_thickness", "tilt_alpha_deg": src.tilt_alpha_deg})


def nonuniformity(values) -> float:
    """(max - min) / (max + min) of a positive field."""
    vals = values.values if isinstance(values, ScalarField) else np.asarray(values, dtype=float)
    if vals.size == 0:
        raise DomainError("empty field")
    if np.any(vals <= 0):
        raise DomainError("nonuniformity needs strictly positive values")
    hi, lo = float(vals.max()), float(vals.min())
    return (hi - lo) / (hi + lo)


def dolan_linewidth(nominal_w_nm, mask: MaskStack, local_angle_deg, design_angle_deg):
    """Effective electrode width after the shadow shift.

    Returns ``(width_nm, fully_shadowed)``; the width is clamped at 0.
    """
    if not nominal_w_nm > 0:
        raise DomainError("nominal width must be > 0")
    shift = mask.total_height_nm * abs(
        math.tan(math.radians(local_angle_deg)) - math.tan(math.radians(design_angle_deg))
    )
    w = nominal_w_nm - shift
    if w <= 0:
        return 0.0, True
    return w, False


def linewidth_shift_nm(mask: MaskStack, local_angle_deg, design_angle_deg):
    """Vectorised shadow shift ``h * |tan(local) - tan(design)|``."""
    return mask.total_height_nm * np.abs(
        np.tan(np.radians(local_angle_deg)) - math.tan(math.radians(design_angle_deg))
    )


def projected_angles(src: SourceGeometry, x_mm, y_mm):
    """Signed incidence angle (deg) in the tilt plane at many points."""
    along, normal, *_ = _ray(src, x_mm, y_mm)
    return np.degrees(np.arctan2(along, normal))


def linewidth_map(src: SourceGeometry, wafer: WaferLayout, nominal_w_nm, mask: MaskStack,
                  grid_step_mm=1.0) -> ScalarField:
    """Effective width of a nominal line over the wafer; the design angle is
    the tilt (the angle seen at the wafer centre)."""
    x, y = wafer_grid(wafer.radius_mm, grid_step_mm)
    _raw_rate(src, x, y)  # validates illumination
    shift = linewidth_shift_nm(mask, projected_angles(src, x, y), src.tilt_alpha_deg)
    w = np.clip(nominal_w_nm - shift, 0.0, None)
    return ScalarField(x, y, w, grid_step_mm,
                       meta={"quantity": "linewidth_nm", "nominal_nm": nominal_w_nm})


def junction_area(design: JunctionDesign, bottom_flux: FluxSample, top_flux: FluxSample,
                  mask: MaskStack) -> float:
    """Rectangular overlap area (nm^2) of the shifted bottom and top electrodes."""
    wb, dead_b = dolan_linewidth(design.width_nm, mask, bottom_flux.shadow_angle_deg,
                                 design.bottom_angle_deg)
    wt, dead_t = dolan_linewidth(design.length_nm, mask, top_flux.shadow_angle_deg,
                                 design.top_angle_deg)
    if dead_b or dead_t:
        raise ZeroAreaError(f"junction {design.name} is fully shadowed")
    return wb * wt


def calibrate_throw(target_nonuniformity, tilt_deg, src: SourceGeometry | None = None,
                    wafer: WaferLayout | None = None, grid_step_mm=1.0,
                    bracket=THROW_BRACKET_MM, tol=1e-6):
    """Throw distance (mm) giving ``target_nonuniformity`` at ``tilt_deg``.

    Bisection over ``bracket``; nonuniformity falls monotonically with throw.
    """
    if not 0 < target_nonuniformity < 1:
        raise CalibrationError(f"target nonuniformity {target_nonuniformity} outside (0, 1)")
    if not 0 <= tilt_deg < 90:
        raise CalibrationError("tilt must lie in [0, 90)")
    src = src or SourceGeometry()
    wafer = wafer or WaferLayout()

    def nu(L):
        s = SourceGeometry(L, src.emission_exponent, tilt_deg, src.source_offset_mm)
        try:
            return nonuniformity(thickness_map(s, wafer, grid_step_mm))
        except ShadowedPointError:
            return 1.0

    lo, hi = bracket
    nu_lo, nu_hi = nu(lo), nu(hi)
    if not nu_hi <= target_nonuniformity <= nu_lo:
        raise CalibrationError(
            f"nonuniformity {target_nonuniformity} unreachable at {tilt_deg} deg; "
            f"throw bracket {lo:g}-{hi:g} mm spans {nu_hi:.4g}-{nu_lo:.4g}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if nu(mid) > target_nonuniformity:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * mid:
            break
    return 0.5 * (lo + hi)


def calibrate_linewidth_throw(target_reduction, nominal_w_nm, mask: MaskStack,
                              radius_mm=50.0, tilt_deg=0.0):
    """Throw distance (mm) at which a line at the wafer edge (along the tilt
    direction) loses ``target_reduction`` of its nominal width.

    Closed form: the shadow-angle tangent changes by ``u / (L cos a)`` across
    the wafer, so ``L = R / (cos a * shift / h)``.
    """
    if not 0 < target_reduction < 1:
        raise CalibrationError("target reduction must lie in (0, 1)")
    tan_delta = target_reduction * nominal_w_nm / mask.total_height_nm
    return radius_mm / (math.cos(math.radians(tilt_deg)) * tan_delta)
