"""Solid-on-solid lattice model of oblique-incidence film growth.

Particles arrive along a straight ray tilted by the incidence angle inside the
x-z plane and stick to the first column whose top the ray reaches, so taller
columns capture flux that would otherwise land behind them. Each stuck
particle may then hop downhill to nearest neighbours; impurity sites block
those hops. Heights are in monolayers (ML); the lateral site size equals one
monolayer.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigError, DomainError
from . import kernels

MONOLAYER_NM = 0.286
RANDOM_DEPOSITION = "random_deposition"
BALLISTIC_SHADOWED = "ballistic_shadowed"
MODES = (RANDOM_DEPOSITION, BALLISTIC_SHADOWED)

# launches are drawn and fed to the kernel in blocks of this many monolayers
_CHUNK_LAYERS = 16
MAX_ANGLE_DEG = 85.0


@dataclass(frozen=True)
class GrowthConfig:
    lattice_width_sites: int = 256
    target_mean_height_ml: float = 50.0
    incidence_angle_deg: float = 0.0
    diffusion_steps_per_particle: int = 0
    contamination_per_site: float = 0.0
    rng_seed: int = 0
    mode: str = BALLISTIC_SHADOWED
    depth_sites: int = 1

    def __post_init__(self):
        if int(self.lattice_width_sites) != self.lattice_width_sites or self.lattice_width_sites < 16:
            raise ConfigError("lattice_width_sites must be an integer >= 16")
        if self.depth_sites < 1:
            raise ConfigError("depth_sites must be >= 1")
        # zero height is accepted as the degenerate "nothing deposited" run
        if not self.target_mean_height_ml >= 0:
            raise ConfigError("target_mean_height_ml must be >= 0")
        if not 0.0 <= self.incidence_angle_deg <= MAX_ANGLE_DEG:
            raise ConfigError(f"incidence_angle_deg must lie in [0, {MAX_ANGLE_DEG}]")
        if self.diffusion_steps_per_particle < 0:
            raise ConfigError("diffusion_steps_per_particle must be >= 0")
        if not 0.0 <= self.contamination_per_site <= 1.0:
            raise ConfigError("contamination_per_site must lie in [0, 1]")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass
class SurfaceRecord:
    """Final height field. With a wall, column 0 holds the wall and is not film."""

    heights: np.ndarray
    impurity_mask: np.ndarray
    config_echo: GrowthConfig
    deposited: int
    launched: int
    wall_height_ml: int | None = None

    @property
    def film(self):
        if self.wall_height_ml is None:
            return self.heights
        return self.heights[:, 1:]

    def to_csv(self):
        """Height field as CSV rows ``y,x,height_ml``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["y", "x", "height_ml"])
        for (y, x), v in np.ndenumerate(self.heights):
            w.writerow([y, x, int(v)])
        return buf.getvalue()


@dataclass(frozen=True)
class RoughnessReport:
    rms_nm: float
    ler_nm: float
    monolayer_nm: float = MONOLAYER_NM

    def __post_init__(self):
        if self.rms_nm < 0 or self.ler_nm < 0:
            raise DomainError("roughness values must be >= 0")


def thickness_to_ml(thickness_nm, monolayer_nm=MONOLAYER_NM):
    return thickness_nm / monolayer_nm


def rate_to_mobility(rate_nm_per_s, chamber_contamination_const=0.004, diffusion_const=0.6):
    """Map deposition rate to (diffusion hops per particle, contamination per site).

    Slow deposition gives adatoms more time to relax (``diffusion_const / rate``
    hops) but also lets more residual gas land per monolayer
    (``chamber_contamination_const / rate``).
    """
    if not rate_nm_per_s > 0:
        raise DomainError(f"deposition rate must be positive, got {rate_nm_per_s}")
    steps = int(round(diffusion_const / rate_nm_per_s))
    contamination = min(1.0, chamber_contamination_const / rate_nm_per_s)
    return steps, contamination


def grow_surface(cfg: GrowthConfig, wall_height_ml=None, backend=None) -> SurfaceRecord:
    """Run one growth simulation; deterministic for a fixed ``cfg.rng_seed``.

    ``wall_height_ml`` adds a blocking wall of that height at column 0 with
    the film opening downstream of it (used for line-edge roughness).
    """
    ny = cfg.depth_sites
    nx = cfg.lattice_width_sites
    wall = -1
    if wall_height_ml is not None:
        if wall_height_ml < 0:
            raise ConfigError("wall height must be >= 0")
        wall = int(round(wall_height_ml))
        nx += 1
    heights = np.zeros((ny, nx), dtype=np.int32)
    if wall >= 0:
        heights[:, 0] = wall
    impurity = np.zeros((ny, nx), dtype=np.uint8)

    per_layer = ny * nx
    total = int(round(cfg.target_mean_height_ml * per_layer))
    normal = cfg.mode == RANDOM_DEPOSITION or cfg.incidence_angle_deg == 0.0
    cot = 0.0 if normal else 1.0 / math.tan(math.radians(cfg.incidence_angle_deg))
    k = cfg.diffusion_steps_per_particle
    c = cfg.contamination_per_site

    rng = np.random.default_rng(cfg.rng_seed)
    deposited = 0
    chunk = _CHUNK_LAYERS * per_layer
    for lo in range(0, total, chunk):
        n = min(chunk, total - lo)
        xs = rng.integers(0, nx, n, dtype=np.int32)
        ys = rng.integers(0, ny, n, dtype=np.int32)
        phase = rng.random(n)
        ties = rng.integers(0, 256, (n, k), dtype=np.uint8)
        nlay = n // per_layer
        if c > 0 and nlay:
            layers = (rng.random((nlay, ny, nx)) < c).astype(np.uint8)
        else:
            layers = np.zeros((0, ny, nx), dtype=np.uint8)
        deposited += kernels.grow_lattice(
            heights, impurity, wall, xs, ys, phase, ties, layers,
            per_layer, cot, normal, backend=backend,
        )
    return SurfaceRecord(
        heights=heights,
        impurity_mask=impurity.astype(bool),
        config_echo=cfg,
        deposited=int(deposited),
        launched=total,
        wall_height_ml=None if wall < 0 else wall,
    )


def rms_roughness(surface: SurfaceRecord, monolayer_nm=MONOLAYER_NM) -> float:
    """Population standard deviation of film heights, in nm."""
    film = surface.film
    if film.size == 0:
        raise DomainError("empty surface")
    return float(np.std(film.astype(np.float64))) * monolayer_nm


def edge_positions(surface: SurfaceRecord, threshold_fraction=0.5):
    """Per-row distance (sites) from the wall to the first column whose film
    reaches ``threshold_fraction`` of the target mean height."""
    if surface.wall_height_ml is None:
        raise ConfigError("edge positions need a surface grown against a wall")
    film = surface.film
    level = threshold_fraction * surface.config_echo.target_mean_height_ml
    reached = film >= level
    first = np.where(reached.any(axis=1), reached.argmax(axis=1), film.shape[1])
    return first.astype(np.float64)


def line_edge_roughness(cfg: GrowthConfig, edge_mask_height_ml=32.0, monolayer_nm=MONOLAYER_NM,
                        threshold_fraction=0.5, backend=None) -> float:
    """LER in nm: standard deviation of the film edge position along a wall.

    Grows a square 2+1D lattice of ``cfg.lattice_width_sites`` per side next to
    a wall of ``edge_mask_height_ml``; the wall's geometric shadow must fit
    inside half the opening.
    """
    if edge_mask_height_ml < 0:
        raise ConfigError("edge mask height must be >= 0")
    width = cfg.lattice_width_sites
    shadow = edge_mask_height_ml * math.tan(math.radians(cfg.incidence_angle_deg))
    if shadow >= width / 2:
        raise ConfigError(
            f"wall shadow of {shadow:.1f} sites does not fit a {width}-site opening; "
            "lower the wall or widen the lattice"
        )
    cfg2 = cfg if cfg.depth_sites == width else replace(cfg, depth_sites=width)
    surface = grow_surface(cfg2, wall_height_ml=edge_mask_height_ml, backend=backend)
    pos = edge_positions(surface, threshold_fraction)
    return float(np.std(pos)) * monolayer_nm

