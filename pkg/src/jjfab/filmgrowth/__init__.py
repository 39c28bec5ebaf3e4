from .kernels import KERNEL
from .model import (
    BALLISTIC_SHADOWED,
    MONOLAYER_NM,
    RANDOM_DEPOSITION,
    GrowthConfig,
    RoughnessReport,
    SurfaceRecord,
    edge_positions,
    grow_surface,
    line_edge_roughness,
    rate_to_mobility,
    rms_roughness,
    thickness_to_ml,
)

__all__ = [
    "KERNEL",
    "BALLISTIC_SHADOWED",
    "MONOLAYER_NM",
    "RANDOM_DEPOSITION",
    "GrowthConfig",
    "RoughnessReport",
    "SurfaceRecord",
    "edge_positions",
    "grow_surface",
    "line_edge_roughness",
    "rate_to_mobility",
    "rms_roughness",
    "thickness_to_ml",
]
