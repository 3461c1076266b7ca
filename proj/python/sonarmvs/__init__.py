"""Plane-sweep front-depth reconstruction for forward-looking sonar.

Images are (range_bins, azimuth_bins) float64 arrays; front depth maps are
(rows, azimuth_bins) arrays whose rows span the elevation aperture.
"""

from ._sonarmvs import (
    ConfigError,
    DataError,
    Intrinsics,
    IoError,
    Pose,
    ReconstructParams,
    Scene,
    baseline,
    chamfer,
    depth_to_cloud,
    euclidean_to_spherical,
    evaluate,
    generate_sample,
    generate_views,
    raycast,
    read_ply,
    read_tensor,
    reconstruct,
    run_cli,
    spherical_to_euclidean,
    write_ply,
    write_tensor,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Intrinsics",
    "IoError",
    "Pose",
    "ReconstructParams",
    "Scene",
    "baseline",
    "chamfer",
    "depth_to_cloud",
    "euclidean_to_spherical",
    "evaluate",
    "generate_sample",
    "generate_views",
    "raycast",
    "read_ply",
    "read_tensor",
    "reconstruct",
    "run_cli",
    "spherical_to_euclidean",
    "write_ply",
    "write_tensor",
]
