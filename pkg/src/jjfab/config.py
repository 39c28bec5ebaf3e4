"""TOML run configuration.

Every key carries its unit in the name. Unknown blocks or keys are errors,
so a typo can never fall back to a silent default.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import electrical as el
from .barrier import BarrierModel, OxidationSpec
from .errors import ConfigError
from .geometry import MaskStack, SourceGeometry, WaferLayout
from .variability import (
    SWEEP_AXES,
    ElectrodeProcess,
    GrowthSettings,
    ProcessScenario,
    RoughnessOverride,
)

_D_SRC = SourceGeometry()
_D_WAF = WaferLayout()
_D_MASK = MaskStack()
_D_OX = OxidationSpec()
_D_BAR = BarrierModel()
_D_GROW = GrowthSettings()
_D_SC = ProcessScenario()


def _pair(v):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise TypeError("expected a 2-element array")
    return (float(v[0]), float(v[1]))


def _pairs(v):
    if not isinstance(v, (list, tuple)) or not v:
        raise TypeError("expected a non-empty array of 2-element arrays")
    return tuple(_pair(p) for p in v)


def _int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError("expected an integer")
    return v


def _float(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError("expected a number")
    return float(v)


def _bool(v):
    if not isinstance(v, bool):
        raise TypeError("expected true or false")
    return v


def _str(v):
    if not isinstance(v, str):
        raise TypeError("expected a string")
    return v


def _floats(v):
    if not isinstance(v, (list, tuple)) or not v:
        raise TypeError("expected a non-empty array of numbers")
    return tuple(_float(x) for x in v)


def _bounds(v):
    if not isinstance(v, dict) or not v:
        raise TypeError("expected a table of axis = [lo, hi]")
    return {str(k): _pair(b) for k, b in v.items()}


# block -> key -> (parser, default)
SCHEMA = {
    "": {
        "seed": (_int, None),
    },
    "output": {
        "dir": (_str, "out"),
        "format": (_str, "csv"),
    },
    "geometry": {
        "throw_distance_mm": (_float, _D_SRC.throw_distance_mm),
        "tilt_alpha_deg": (_float, _D_SRC.tilt_alpha_deg),
        "emission_exponent": (_float, _D_SRC.emission_exponent),
        "source_offset_mm": (_pair, _D_SRC.source_offset_mm),
        "wafer_radius_mm": (_float, _D_WAF.radius_mm),
        "die_pitch_mm": (_float, _D_WAF.die_pitch_mm),
        "die_grid": (_pair, _D_WAF.grid_dims),
        "copolymer_height_nm": (_float, _D_MASK.copolymer_height_nm),
        "imaging_resist_height_nm": (_float, _D_MASK.imaging_resist_height_nm),
        "bridge_width_nm": (_float, _D_MASK.bridge_width_nm),
        "undercut_nm": (_float, _D_MASK.undercut_nm),
        "grid_step_mm": (_float, 1.0),
        "nominal_linewidth_nm": (_float, 100.0),
    },
    "growth": {
        "rms_width_sites": (_int, _D_GROW.rms_width_sites),
        "ler_width_sites": (_int, _D_GROW.ler_width_sites),
        "seeds": (_int, _D_GROW.seeds),
        "base_seed": (_int, _D_GROW.base_seed),
        "edge_mask_height_ml": (_float, _D_GROW.edge_mask_height_ml),
        "monolayer_nm": (_float, _D_GROW.monolayer_nm),
        "contamination_const": (_float, _D_GROW.contamination_const),
        "diffusion_const": (_float, _D_GROW.diffusion_const),
        "mode": (_str, _D_GROW.mode),
        "bottom_rms_nm": (_float, None),
        "bottom_ler_nm": (_float, None),
        "top_ler_nm": (_float, None),
    },
    "oxidation": {
        "pressure_mbar": (_float, _D_OX.pressure_mbar),
        "time_s": (_float, _D_OX.time_s),
        "method": (_str, _D_OX.method),
        "d0_nm": (_float, _D_BAR.d0_nm),
        "c_nm": (_float, _D_BAR.c_nm),
        "e0_mbar_s": (_float, _D_BAR.e0_mbar_s),
        "lambda_nm": (_float, _D_BAR.lambda_nm),
        "jc_prefactor_a_per_um2": (_float, _D_BAR.jc_prefactor),
        "jc_exponent": (_float, _D_BAR.jc_exponent),
        "leak_coeff_mbar": (_float, _D_BAR.leak_coeff_mbar),
        "active_area_fraction": (_float, _D_BAR.active_area_fraction),
        "kappa_groove": (_float, _D_BAR.kappa_groove),
    },
    "electrical": {
        "gap_delta_ueV": (_float, el.DEFAULT_CONSTANTS.gap_delta_ueV),
        "ec_over_h_mhz": (_float, _D_SC.ec_over_h_mhz),
        "temperature_K": (_float, _D_SC.temperature_K),
    },
    "scenario": {
        "bottom_thickness_nm": (_float, _D_SC.bottom.thickness_nm),
        "bottom_angle_deg": (_float, _D_SC.bottom.angle_deg),
        "bottom_rate_nm_per_s": (_float, _D_SC.bottom.rate_nm_per_s),
        "top_thickness_nm": (_float, _D_SC.top.thickness_nm),
        "top_angle_deg": (_float, _D_SC.top.angle_deg),
        "top_rate_nm_per_s": (_float, _D_SC.top.rate_nm_per_s),
        "designs_nm": (_pairs, _D_SC.designs),
        "chips_mm": (_pairs, _D_SC.chips),
        "sample_count": (_int, _D_SC.sample_count),
        "include_geometry": (_bool, _D_SC.include_geometry),
        "grouping": (_str, "design"),
    },
    "sweep": {
        "axis": (_str, None),
        "values": (_floats, None),
    },
    "optimize": {
        "bounds": (_bounds, None),
        "design": (_str, None),
        "points_per_axis": (_int, 7),
        "refinements": (_int, 2),
    },
}


@dataclass
class RunConfig:
    blocks: dict = field(default_factory=dict)
    path: str = ""

    def get(self, block, key):
        return self.blocks[block][key]

    @property
    def seed(self):
        return self.blocks[""]["seed"]

    @property
    def output_dir(self):
        return self.blocks["output"]["dir"]

    @property
    def output_format(self):
        return self.blocks["output"]["format"]

    def with_seed(self, seed):
        blocks = {k: dict(v) for k, v in self.blocks.items()}
        blocks[""]["seed"] = seed
        return RunConfig(blocks, self.path)

    def source(self):
        g = self.blocks["geometry"]
        return SourceGeometry(g["throw_distance_mm"], g["emission_exponent"], g["tilt_alpha_deg"],
                              g["source_offset_mm"])

    def wafer(self):
        g = self.blocks["geometry"]
        return WaferLayout(g["wafer_radius_mm"], g["die_pitch_mm"],
                           (int(g["die_grid"][0]), int(g["die_grid"][1])),
                           self.blocks["scenario"]["chips_mm"])

    def mask(self):
        g = self.blocks["geometry"]
        return MaskStack(g["copolymer_height_nm"], g["imaging_resist_height_nm"],
                         g["bridge_width_nm"], g["undercut_nm"])

    def scenario(self) -> ProcessScenario:
        if self.seed is None:
            raise ConfigError("a seed is required (set 'seed' in the config or pass --seed)")
        o, gr, e, s = (self.blocks[b] for b in ("oxidation", "growth", "electrical", "scenario"))
        override = None
        rough = [gr[k] for k in ("bottom_rms_nm", "bottom_ler_nm", "top_ler_nm")]
        if any(r is not None for r in rough):
            override = RoughnessOverride(*(r or 0.0 for r in rough))
        return ProcessScenario(
            source=self.source(),
            wafer=self.wafer(),
            mask=self.mask(),
            bottom=ElectrodeProcess(s["bottom_thickness_nm"], s["bottom_angle_deg"], s["bottom_rate_nm_per_s"]),
            top=ElectrodeProcess(s["top_thickness_nm"], s["top_angle_deg"], s["top_rate_nm_per_s"]),
            oxidation=OxidationSpec(o["pressure_mbar"], o["time_s"], o["method"]),
            barrier=BarrierModel(
                d0_nm=o["d0_nm"], c_nm=o["c_nm"], e0_mbar_s=o["e0_mbar_s"], lambda_nm=o["lambda_nm"],
                jc_prefactor=o["jc_prefactor_a_per_um2"], jc_exponent=o["jc_exponent"],
                leak_coeff_mbar=o["leak_coeff_mbar"], active_area_fraction=o["active_area_fraction"],
                kappa_groove=o["kappa_groove"],
            ),
            constants=el.PhysicalConstants(gap_delta_ueV=e["gap_delta_ueV"]),
            ec_over_h_mhz=e["ec_over_h_mhz"],
            designs=s["designs_nm"],
            chips=s["chips_mm"],
            sample_count=s["sample_count"],
            rng_seed=self.seed,
            growth=GrowthSettings(
                rms_width_sites=gr["rms_width_sites"], ler_width_sites=gr["ler_width_sites"],
                seeds=gr["seeds"], base_seed=gr["base_seed"],
                edge_mask_height_ml=gr["edge_mask_height_ml"], monolayer_nm=gr["monolayer_nm"],
                contamination_const=gr["contamination_const"], diffusion_const=gr["diffusion_const"],
                mode=gr["mode"],
            ),
            roughness=override,
            include_geometry=s["include_geometry"],
            temperature_K=e["temperature_K"],
        )


def parse_config(data: dict, path="<config>") -> RunConfig:
    blocks = {name: {k: d for k, (_, d) in keys.items()} for name, keys in SCHEMA.items()}
    for name, value in data.items():
        if isinstance(value, dict):
            if name not in SCHEMA or name == "":
                raise ConfigError(f"{path}: unknown block [{name}]; valid blocks: "
                                  f"{', '.join(b for b in SCHEMA if b)}")
            block, items = name, value
        else:
            block, items = "", {name: value}
        for key, raw in items.items():
            if key not in SCHEMA[block]:
                where = f"[{block}]" if block else "top level"
                raise ConfigError(f"{path}: unknown key '{key}' in {where}; valid keys: "
                                  f"{', '.join(SCHEMA[block])}")
            parser, _ = SCHEMA[block][key]
            try:
                blocks[block][key] = parser(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{path}: {block + '.' if block else ''}{key}: {exc}") from None
    cfg = RunConfig(blocks, path)
    if cfg.output_format not in ("csv", "json"):
        raise ConfigError(f"{path}: output.format must be 'csv' or 'json'")
    if cfg.blocks["scenario"]["grouping"] not in ("design", "chip"):
        raise ConfigError(f"{path}: scenario.grouping must be 'design' or 'chip'")
    axis = cfg.blocks["sweep"]["axis"]
    if axis is not None and axis not in SWEEP_AXES:
        raise ConfigError(f"{path}: unknown sweep axis {axis!r}; valid axes: {', '.join(sorted(SWEEP_AXES))}")
    return cfg


def load_config(path) -> RunConfig:
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    return parse_config(data, path)


def default_config(seed=None) -> RunConfig:
    cfg = parse_config({}, "<defaults>")
    return cfg if seed is None else cfg.with_seed(seed)


__all__ = ["RunConfig", "SCHEMA", "default_config", "load_config", "parse_config"]
