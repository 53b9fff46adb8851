"""Predefined perspective cameras and voxel-center projection.

World is y-up with shapes normalized to [-0.8, 0.8]^3 around the origin.
Cameras sit on a sphere around the origin: azimuth rotates about +y
(0 degrees = +z axis), elevation lifts toward +y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np

from ..fields.types import cell_center_grid

DEFAULT_ELEVATION = 15.0
DEFAULT_DISTANCE = 2.5
DEFAULT_FOV_Y = 45.0
DEFAULT_IMAGE_SIZE = 224

VIEW_NAMES = ("left", "side-left", "front", "side-right", "right")
VIEW_AZIMUTHS = (-90.0, -45.0, 0.0, 45.0, 90.0)


@dataclass(frozen=True)
class CameraView:
    azimuth: float
    elevation: float = DEFAULT_ELEVATION
    distance: float = DEFAULT_DISTANCE
    fov_y: float = DEFAULT_FOV_Y
    image_size: int = DEFAULT_IMAGE_SIZE
    name: str = ""

    def __post_init__(self):
        if not (10.0 < self.fov_y < 120.0):
            raise ValueError(f"invalid-fov: {self.fov_y}")
        # Must stay outside the bounding sphere of [-0.8, 0.8]^3.
        if self.distance <= 0.8 * math.sqrt(3.0):
            raise ValueError(f"invalid-distance: {self.distance}")

    @property
    def position(self) -> np.ndarray:
        az = math.radians(self.azimuth)
        el = math.radians(self.elevation)
        return self.distance * np.array(
            [math.cos(el) * math.sin(az), math.sin(el), math.cos(el) * math.cos(az)]
        )

    def axes(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Right, up, forward unit vectors of the camera frame (looks at origin)."""
        pos = self.position
        forward = -pos / np.linalg.norm(pos)
        world_up = np.array([0.0, 1.0, 0.0])
        right = np.cross(forward, world_up)
        nr = np.linalg.norm(right)
        if nr < 1e-12:  # looking straight up/down
            right = np.array([1.0, 0.0, 0.0])
        else:
            right = right / nr
        up = np.cross(right, forward)
        return right, up, forward

    @property
    def focal_pixels(self) -> float:
        return (self.image_size / 2.0) / math.tan(math.radians(self.fov_y) / 2.0)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "azimuth": self.azimuth,
            "elevation": self.elevation,
            "distance": self.distance,
            "fov_y": self.fov_y,
            "image_size": self.image_size,
        }

    @staticmethod
    def from_dict(d: dict) -> "CameraView":
        return CameraView(
            azimuth=d["azimuth"],
            elevation=d.get("elevation", DEFAULT_ELEVATION),
            distance=d.get("distance", DEFAULT_DISTANCE),
            fov_y=d.get("fov_y", DEFAULT_FOV_Y),
            image_size=d.get("image_size", DEFAULT_IMAGE_SIZE),
            name=d.get("name", ""),
        )


def predefined_views(
    elevation: float = DEFAULT_ELEVATION,
    distance: float = DEFAULT_DISTANCE,
    fov_y: float = DEFAULT_FOV_Y,
    image_size: int = DEFAULT_IMAGE_SIZE,
) -> List[CameraView]:
    """The five user-selectable views: left, side-left, front, side-right, right."""
    return [
        CameraView(az, elevation, distance, fov_y, image_size, name=nm)
        for nm, az in zip(VIEW_NAMES, VIEW_AZIMUTHS)
    ]


def view_by_name(name: str) -> CameraView:
    for v in predefined_views():
        if v.name == name:
            return v
    raise KeyError(f"unknown-view: {name!r}; valid: {list(VIEW_NAMES)}")


def project_points(points: np.ndarray, view: CameraView):
    """Pinhole projection of world points to pixel coordinates.

    Returns (coords (N,2), valid (N,)). Pixel x grows right, y grows down,
    principal point at the image center. Points at or behind the camera
    plane are flagged invalid.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    right, up, forward = view.axes()
    rel = points - view.position
    x = rel @ right
    y = rel @ up
    z = rel @ forward
    valid = z > 1e-9
    zs = np.where(valid, z, 1.0)
    f = view.focal_pixels
    cx = cy = view.image_size / 2.0
    u = cx + f * x / zs
    v = cy - f * y / zs
    return np.stack([u, v], axis=1), valid


def project_voxel_centers(level_resolution: int, view: CameraView):
    """Project every cell center of the level grid (C-order flattening)."""
    if level_resolution < 1:
        raise ValueError(f"invalid-resolution: {level_resolution}")
    centers = cell_center_grid(level_resolution).reshape(-1, 3)
    return project_points(centers, view)


def perturbed(view: CameraView, d_azimuth: float, d_elevation: float) -> CameraView:
    return replace(view, azimuth=view.azimuth + d_azimuth,
                   elevation=view.elevation + d_elevation)
