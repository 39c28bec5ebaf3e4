"""Monte Carlo propagation of process dispersions into Ic and f01 spreads,
with parameter sweeps and a bounded grid-search optimizer.

Per junction: electrode widths come from the die's shadow geometry plus
edge-roughness noise, the barrier thickness from the oxidation mean plus
grooving and leak noise; Rn, Ic and f01 follow from the electrical chain.
Roughness enters through growth-simulated (RMS, LER) cells that are
computed once per (thickness, angle, rate) and cached.
"""

from __future__ import annotations

import functools
import itertools
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import electrical as el
from .barrier import STATIC, BarrierModel, OxidationSpec, barrier_dispersion
from .errors import ConfigError, OptimizationError
from .filmgrowth import (
    BALLISTIC_SHADOWED,
    MONOLAYER_NM,
    GrowthConfig,
    RoughnessReport,
    grow_surface,
    line_edge_roughness,
    rate_to_mobility,
    rms_roughness,
    thickness_to_ml,
)
from .geometry import JunctionDesign, MaskStack, SourceGeometry, WaferLayout, linewidth_shift_nm, projected_angles

CHUNK = 8192


@dataclass(frozen=True)
class ElectrodeProcess:
    thickness_nm: float = 15.0
    angle_deg: float = 0.0
    rate_nm_per_s: float = 1.0

    def __post_init__(self):
        if self.thickness_nm <= 0 or self.rate_nm_per_s <= 0:
            raise ConfigError("electrode thickness and rate must be > 0")
        if not 0 <= self.angle_deg < 90:
            raise ConfigError("electrode angle must lie in [0, 90)")


@dataclass(frozen=True)
class GrowthSettings:
    """Lattice resolution used to derive roughness cells."""

    rms_width_sites: int = 512
    ler_width_sites: int = 64
    seeds: int = 5
    base_seed: int = 0
    edge_mask_height_ml: float = 16.0
    monolayer_nm: float = MONOLAYER_NM
    contamination_const: float = 0.004
    diffusion_const: float = 0.6
    mode: str = BALLISTIC_SHADOWED

    def __post_init__(self):
        if self.seeds < 1:
            raise ConfigError("growth seeds must be >= 1")


@dataclass(frozen=True)
class RoughnessOverride:
    """Fixed roughness values (nm) that bypass the growth simulation."""

    bottom_rms_nm: float = 0.0
    bottom_ler_nm: float = 0.0
    top_ler_nm: float = 0.0


@dataclass(frozen=True)
class ProcessScenario:
    source: SourceGeometry = field(default_factory=SourceGeometry)
    wafer: WaferLayout = field(default_factory=WaferLayout)
    mask: MaskStack = field(default_factory=MaskStack)
    bottom: ElectrodeProcess = field(default_factory=lambda: ElectrodeProcess(15.0, 0.0, 1.0))
    top: ElectrodeProcess = field(default_factory=lambda: ElectrodeProcess(40.0, 45.0, 1.0))
    oxidation: OxidationSpec = field(default_factory=OxidationSpec)
    barrier: BarrierModel = field(default_factory=BarrierModel)
    constants: el.PhysicalConstants = field(default_factory=el.PhysicalConstants)
    ec_over_h_mhz: float = 250.0
    designs: tuple = ((150.0, 200.0),)
    chips: tuple = ((0.0, 0.0),)
    sample_count: int = 10000
    rng_seed: int = 0
    growth: GrowthSettings = field(default_factory=GrowthSettings)
    roughness: RoughnessOverride | None = None
    include_geometry: bool = True
    temperature_K: float = 0.0

    def __post_init__(self):
        if self.sample_count < 1:
            raise ConfigError("sample_count must be >= 1")
        if not self.designs:
            raise ConfigError("at least one junction design is required")
        for d in self.designs:
            if len(d) != 2 or min(d) <= 0:
                raise ConfigError(f"bad junction design {d!r}")

    def junction_designs(self):
        return [JunctionDesign(float(w), float(l), self.bottom.angle_deg, self.top.angle_deg)
                for w, l in self.designs]

    def die_positions(self):
        """(chip index, x_mm, y_mm) for every die of every chip."""
        out = []
        for ci, chip in enumerate(self.chips):
            out.extend((ci, x, y) for x, y in self.wafer.die_centers(chip))
        return out


@dataclass(frozen=True)
class JunctionRealization:
    design: str
    index: int
    chip: int
    x_mm: float
    y_mm: float
    area_um2: float
    d_nm: float
    rn_ohm: float
    ic_na: float
    f01_ghz: float
    dead: bool


@dataclass
class Ensemble:
    """Column-oriented realizations of one scenario (all designs)."""

    design: np.ndarray
    index: np.ndarray
    chip: np.ndarray
    x_mm: np.ndarray
    y_mm: np.ndarray
    width_nm: np.ndarray
    length_nm: np.ndarray
    area_um2: np.ndarray
    d_nm: np.ndarray
    rn_ohm: np.ndarray
    ic_na: np.ndarray
    f01_ghz: np.ndarray
    dead: np.ndarray
    design_names: tuple
    roughness: dict

    def __len__(self):
        return len(self.index)

    def __getitem__(self, i):
        return JunctionRealization(
            design=self.design_names[self.design[i]], index=int(self.index[i]), chip=int(self.chip[i]),
            x_mm=float(self.x_mm[i]), y_mm=float(self.y_mm[i]), area_um2=float(self.area_um2[i]),
            d_nm=float(self.d_nm[i]), rn_ohm=float(self.rn_ohm[i]), ic_na=float(self.ic_na[i]),
            f01_ghz=float(self.f01_ghz[i]), dead=bool(self.dead[i]),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))


@dataclass(frozen=True)
class DistributionSummary:
    group: str
    design: str
    sample_count: int
    dead_count: int
    mean_ic_na: float
    sigma_over_mean_ic: float
    mean_f01_ghz: float
    sigma_over_mean_f01: float
    mean_rn_ohm: float
    sigma_over_mean_rn: float

    def as_row(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _threads():
    try:
        return max(1, int(os.environ.get("JJFAB_THREADS", "1")))
    except ValueError:
        raise ConfigError("JJFAB_THREADS must be an integer") from None


def _pmap(fn, items):
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@functools.lru_cache(maxsize=4096)
def roughness_cell(thickness_nm, angle_deg, rate_nm_per_s, settings: GrowthSettings = GrowthSettings()):
    """Ensemble-median RMS (1+1D) and LER (2+1D) for one process cell."""
    steps, contamination = rate_to_mobility(rate_nm_per_s, settings.contamination_const,
                                            settings.diffusion_const)
    height = thickness_to_ml(thickness_nm, settings.monolayer_nm)
    seeds = [settings.base_seed + s for s in range(settings.seeds)]

    def rms(seed):
        cfg = GrowthConfig(settings.rms_width_sites, height, angle_deg, steps, contamination, seed,
                           settings.mode)
        return rms_roughness(grow_surface(cfg), settings.monolayer_nm)

    def ler(seed):
        cfg = GrowthConfig(settings.ler_width_sites, height, angle_deg, steps, contamination, seed,
                           settings.mode)
        return line_edge_roughness(cfg, settings.edge_mask_height_ml, settings.monolayer_nm)

    return RoughnessReport(
        rms_nm=float(np.median(_pmap(rms, seeds))),
        ler_nm=float(np.median(_pmap(ler, seeds))),
        monolayer_nm=settings.monolayer_nm,
    )


def scenario_roughness(scenario: ProcessScenario):
    """(bottom RMS, bottom LER, top LER) in nm."""
    if scenario.roughness is not None:
        r = scenario.roughness
        return r.bottom_rms_nm, r.bottom_ler_nm, r.top_ler_nm
    b, t = scenario.bottom, scenario.top
    rb = roughness_cell(b.thickness_nm, b.angle_deg, b.rate_nm_per_s, scenario.growth)
    rt = roughness_cell(t.thickness_nm, t.angle_deg, t.rate_nm_per_s, scenario.growth)
    return rb.rms_nm, rb.ler_nm, rt.ler_nm


def _model(scenario):
    model = scenario.barrier
    if model.rho0_ohm_um2 is None:
        model = el.with_consistent_rho0(model, scenario.oxidation, scenario.constants)
    return model


def _die_widths(scenario, design, positions):
    """Nominal widths per die after the deterministic shadow shift."""
    xs = np.array([p[1] for p in positions])
    ys = np.array([p[2] for p in positions])
    if not scenario.include_geometry:
        return np.full(xs.size, design.width_nm), np.full(xs.size, design.length_nm)
    src = scenario.source
    sb = replace(src, tilt_alpha_deg=scenario.bottom.angle_deg)
    st = replace(src, tilt_alpha_deg=scenario.top.angle_deg)
    wb = design.width_nm - linewidth_shift_nm(scenario.mask, projected_angles(sb, xs, ys),
                                              scenario.bottom.angle_deg)
    wt = design.length_nm - linewidth_shift_nm(scenario.mask, projected_angles(st, xs, ys),
                                               scenario.top.angle_deg)
    return wb, wt


def _normals(seed, design_idx, n):
    """Four standard-normal streams for realizations 0..n-1 of one design.

    Chunk c of CHUNK realizations uses its own stream keyed by
    (seed, design, c), so any realization is reproducible on its own."""
    out = np.empty((4, n))
    for c, lo in enumerate(range(0, n, CHUNK)):
        m = min(CHUNK, n - lo)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, design_idx, c])))
        out[:, lo:lo + m] = rng.standard_normal((4, CHUNK))[:, :m]
    return out


def sample_ensemble(scenario: ProcessScenario) -> Ensemble:
    model = _model(scenario)
    rms_b, ler_b, ler_t = scenario_roughness(scenario)
    bsample = barrier_dispersion(rms_b, scenario.oxidation, model)
    positions = scenario.die_positions()
    n = scenario.sample_count
    idx = np.arange(n)
    die = idx % len(positions)
    chip_of = np.array([p[0] for p in positions])
    x_of = np.array([p[1] for p in positions])
    y_of = np.array([p[2] for p in positions])

    cols = {k: [] for k in ("design", "index", "chip", "x_mm", "y_mm", "width_nm", "length_nm",
                            "area_um2", "d_nm", "rn_ohm", "ic_na", "f01_ghz", "dead")}
    designs = scenario.junction_designs()
    for j, design in enumerate(designs):
        z = _normals(scenario.rng_seed, j, n)
        wb_die, wt_die = _die_widths(scenario, design, positions)
        wb = wb_die[die] + math.sqrt(2) * ler_b * z[0]
        wt = wt_die[die] + math.sqrt(2) * ler_t * z[1]
        d = bsample.mean_d_nm + bsample.sigma_d_nm * z[2] + model.lambda_nm * bsample.sigma_leak_rel * z[3]
        dead = (wb <= 0) | (wt <= 0) | (d <= 0)
        live = ~dead
        area = np.where(live, wb * wt * 1e-6, np.nan)
        rn = np.full(n, np.nan)
        ic = np.full(n, np.nan)
        f01 = np.full(n, np.nan)
        if live.any():
            rn[live] = el.rn_from_barrier(d[live], area[live], model)
            ic[live] = el.ic_from_rn(rn[live], scenario.constants, scenario.temperature_K)
            f01[live] = el.f01_ghz(el.ej_ghz_from_ic(ic[live], scenario.constants), scenario.ec_over_h_mhz)
        for key, val in (("design", np.full(n, j)), ("index", idx), ("chip", chip_of[die]),
                         ("x_mm", x_of[die]), ("y_mm", y_of[die]), ("width_nm", wb),
                         ("length_nm", wt), ("area_um2", area), ("d_nm", d), ("rn_ohm", rn),
                         ("ic_na", ic), ("f01_ghz", f01), ("dead", dead)):
            cols[key].append(val)
    merged = {k: np.concatenate(v) for k, v in cols.items()}
    return Ensemble(**merged, design_names=tuple(d.name for d in designs),
                    roughness={"bottom_rms_nm": rms_b, "bottom_ler_nm": ler_b, "top_ler_nm": ler_t,
                               "sigma_d_nm": bsample.sigma_d_nm, "sigma_leak_rel": bsample.sigma_leak_rel})


def _rel_sigma(x):
    m = float(np.mean(x))
    return m, float(np.std(x)) / m


def summarize(ens: Ensemble, grouping="design"):
    """Population mean and sigma/mean per group.

    Returns ``(summaries, skipped)`` where ``skipped`` lists groups with fewer
    than two live realizations.
    """
    if grouping == "design":
        keys = [(int(d),) for d in np.unique(ens.design)]
    elif grouping == "chip":
        keys = sorted({(int(d), int(c)) for d, c in zip(ens.design, ens.chip)})
    else:
        raise ConfigError("grouping must be 'design' or 'chip'")
    out, skipped = [], []
    for key in keys:
        sel = ens.design == key[0]
        label = ens.design_names[key[0]]
        if grouping == "chip":
            sel = sel & (ens.chip == key[1])
            label = f"chip{key[1]}:{label}"
        live = sel & ~ens.dead
        n_live = int(live.sum())
        n_dead = int((sel & ens.dead).sum())
        if n_live < 2:
            warnings.warn(f"group {label} has {n_live} live realizations; skipped", stacklevel=2)
            skipped.append({"group": label, "live": n_live, "dead": n_dead})
            continue
        mi, si = _rel_sigma(ens.ic_na[live])
        mf, sf = _rel_sigma(ens.f01_ghz[live])
        mr, sr = _rel_sigma(ens.rn_ohm[live])
        out.append(DistributionSummary(label, ens.design_names[key[0]], n_live, n_dead, mi, si, mf, sf, mr, sr))
    return out, skipped


def simulate(scenario: ProcessScenario, grouping="design"):
    ens = sample_ensemble(scenario)
    summaries, _ = summarize(ens, grouping)
    return summaries


SWEEP_AXES = {
    "bottom.thickness_nm": float,
    "bottom.angle_deg": float,
    "bottom.rate_nm_per_s": float,
    "top.thickness_nm": float,
    "top.angle_deg": float,
    "top.rate_nm_per_s": float,
    "oxidation.pressure_mbar": float,
    "oxidation.time_s": float,
    "oxidation.method": str,
    "barrier.kappa_groove": float,
    "barrier.leak_coeff_mbar": float,
    "source.throw_distance_mm": float,
    "ec_over_h_mhz": float,
    "sample_count": int,
}


def with_parameter(scenario: ProcessScenario, axis, value):
    """Copy of ``scenario`` with one recognised scalar parameter replaced."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; valid axes: {', '.join(sorted(SWEEP_AXES))}")
    value = SWEEP_AXES[axis](value)
    parts = axis.split(".")
    if len(parts) == 1:
        return replace(scenario, **{axis: value})
    block, name = parts
    updated = replace(getattr(scenario, block), **{name: value})
    if block == "barrier":
        updated = replace(updated, rho0_ohm_um2=scenario.barrier.rho0_ohm_um2)
    return replace(scenario, **{block: updated})


def sweep(template: ProcessScenario, axis, values, grouping="design"):
    """One summary list per value; every point reuses the template seed."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; valid axes: {', '.join(sorted(SWEEP_AXES))}")
    return [(v, simulate(with_parameter(template, axis, v), grouping)) for v in values]


@dataclass
class OptimizationResult:
    best_params: dict
    best_value: float
    trace: list


def grid_search(objective, bounds, points_per_axis=7, refinements=2):
    """Bounded grid search with successive zoom around the incumbent.

    ``bounds`` maps parameter name -> (lo, hi). Each round evaluates a full
    ``points_per_axis`` grid; the next round re-grids one cell either side of
    the best point, clipped to the original bounds.
    """
    names = list(bounds)
    if not 1 <= len(names) <= 3:
        raise ConfigError("grid search supports 1 to 3 free parameters")
    if points_per_axis < 2:
        raise ConfigError("points_per_axis must be >= 2")
    box = {}
    for k, (lo, hi) in bounds.items():
        lo, hi = float(lo), float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise ConfigError(f"bad bounds for {k}: {(lo, hi)}")
        box[k] = (lo, hi)
    orig = dict(box)
    trace = []
    best, best_val = None, math.inf
    seen = {}
    for rnd in range(refinements + 1):
        axes = [np.linspace(*box[k], points_per_axis) for k in names]
        for combo in itertools.product(*axes):
            params = {k: float(v) for k, v in zip(names, combo)}
            key = tuple(params.values())
            if key in seen:
                val = seen[key]
            else:
                val = float(objective(params))
                seen[key] = val
            trace.append({"round": rnd, **params, "objective": val})
            if math.isfinite(val) and val < best_val:
                best, best_val = params, val
        if best is None:
            raise OptimizationError("objective is non-finite at every grid point")
        for k, ax in zip(names, axes):
            step = ax[1] - ax[0]
            lo0, hi0 = orig[k]
            box[k] = (max(lo0, best[k] - step), min(hi0, best[k] + step))
    return OptimizationResult(best, best_val, trace)


def optimize(template: ProcessScenario, free, design=None, points_per_axis=7, refinements=2):
    """Minimise sigma/<Ic> of ``design`` (default: first design) over ``free``
    parameters, each a sweep axis mapped to (lo, hi)."""
    for axis in free:
        if axis not in SWEEP_AXES or SWEEP_AXES[axis] is str:
            raise ConfigError(f"cannot optimise over {axis!r}")
    names = [d.name for d in template.junction_designs()]
    target = names[0] if design is None else design
    if target not in names:
        raise ConfigError(f"design {target!r} not in scenario designs {names}")

    def objective(params):
        sc = template
        for k, v in params.items():
            sc = with_parameter(sc, k, v)
        for s in simulate(sc):
            if s.design == target:
                return s.sigma_over_mean_ic
        return math.nan

    return grid_search(objective, free, points_per_axis, refinements)


def calibrate_kappa(scenario_a: ProcessScenario, scenario_b: ProcessScenario, target_a, target_b,
                    design=None, bounds=(0.0, 0.05)):
    """Grooving coupling that best matches sigma/<Ic> targets of two schemes
    (least squares over both); returns (kappa, achieved_a, achieved_b)."""
    from scipy.optimize import minimize_scalar

    def spread(sc, kappa):
        sc = with_parameter(sc, "barrier.kappa_groove", kappa)
        sums = simulate(sc)
        name = design or sums[0].design
        return next(s.sigma_over_mean_ic for s in sums if s.design == name)

    def loss(kappa):
        return (spread(scenario_a, kappa) - target_a) ** 2 + (spread(scenario_b, kappa) - target_b) ** 2

    res = minimize_scalar(loss, bounds=bounds, method="bounded", options={"xatol": 1e-7})
    k = float(res.x)
    return k, spread(scenario_a, k), spread(scenario_b, k)


def scheme_scenarios(base: ProcessScenario | None = None, top_thickness_nm=40.0, rate_nm_per_s=1.0):
    """The two deposition schemes compared on the 20x20 mm test chips:
    25 nm bottom at 45 deg with an orthogonal top, and 15 nm bottom at 0 deg
    with a 45 deg top."""
    base = base or ProcessScenario()
    a = replace(base, bottom=ElectrodeProcess(25.0, 45.0, rate_nm_per_s),
                top=ElectrodeProcess(top_thickness_nm, 0.0, rate_nm_per_s))
    b = replace(base, bottom=ElectrodeProcess(15.0, 0.0, rate_nm_per_s),
                top=ElectrodeProcess(top_thickness_nm, 45.0, rate_nm_per_s))
    return a, b


def frequency_spread_from_ic(sigma_over_mean_ic, f01_target_ghz=4.3, ec_over_h_mhz=250.0,
                             constants=el.DEFAULT_CONSTANTS, n=100_000, seed=0):
    """Population sigma/mean of f01 when Ic scatters normally by
    ``sigma_over_mean_ic`` around the value that gives ``f01_target_ghz``."""
    ic0 = el.frequency_chain(f01_target_ghz, ec_over_h_mhz, constants)["ic_na"]
    z = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0, 0]))).standard_normal(n)
    ic = ic0 * (1 + sigma_over_mean_ic * z)
    ic = ic[ic > 0]
    f = el.f01_ghz(el.ej_ghz_from_ic(ic, constants), ec_over_h_mhz)
    return float(np.std(f) / np.mean(f))


def first_order_sigma(scenario: ProcessScenario, design_index=0):
    """Linear-propagation estimate sqrt((sA/A)^2 + (sd/lambda)^2 + s_leak^2)
    ignoring the die-to-die geometric term."""
    model = _model(scenario)
    rms_b, ler_b, ler_t = scenario_roughness(scenario)
    bs = barrier_dispersion(rms_b, scenario.oxidation, model)
    w, l = scenario.designs[design_index]
    sa = math.hypot(math.sqrt(2) * ler_b / w, math.sqrt(2) * ler_t / l)
    return math.sqrt(sa ** 2 + (bs.sigma_d_nm / model.lambda_nm) ** 2 + bs.sigma_leak_rel ** 2)


__all__ = [
    "STATIC",
    "CHUNK",
    "DistributionSummary",
    "ElectrodeProcess",
    "Ensemble",
    "GrowthSettings",
    "JunctionRealization",
    "OptimizationResult",
    "ProcessScenario",
    "RoughnessOverride",
    "SWEEP_AXES",
    "calibrate_kappa",
    "first_order_sigma",
    "frequency_spread_from_ic",
    "grid_search",
    "optimize",
    "roughness_cell",
    "sample_ensemble",
    "scenario_roughness",
    "scheme_scenarios",
    "simulate",
    "summarize",
    "sweep",
    "with_parameter",
]
