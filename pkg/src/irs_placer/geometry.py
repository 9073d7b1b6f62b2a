"""Scene geometry and the discretized range-azimuth candidate grid.

The radar sits at the origin of a single global 2-D frame. Candidate IRS
locations live on a polar grid around it; every candidate carries the
angles and distances the channel model needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi

# Candidates closer to the target than this break path-loss reflectivity.
TARGET_EXCLUSION_M = 1e-6
# Below this IRS-target distance the geometry is degenerate.
COINCIDENT_EPS_M = 1e-9


@dataclass(frozen=True)
class Point2D:
    """Cartesian point in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("coordinates must be finite")

    def distance_to(self, other: "Point2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class GridSpec:
    """Polar discretization: ranges {step, 2*step, ...} x azimuths {step, 2*step, ...}."""

    range_count: int
    range_step: float
    azimuth_count: int
    azimuth_step: float

    def __post_init__(self):
        if self.range_count < 1 or self.azimuth_count < 1:
            raise ValueError("grid counts must be >= 1")
        if self.range_step <= 0 or self.azimuth_step <= 0:
            raise ValueError("grid steps must be > 0")
        # relative slack: azimuth_count * azimuth_step == 2*pi only up to rounding
        if self.azimuth_count * self.azimuth_step > TWO_PI * (1 + 1e-9):
            raise ValueError("azimuth set wraps onto itself (count * step > 2*pi)")

    @property
    def size(self) -> int:
        return self.range_count * self.azimuth_count


@dataclass(frozen=True)
class Scene:
    """Radar-target layout plus the signal-level scalars of one scenario.

    The radar is pinned at the origin; the target is placed from its polar
    coordinates (range in meters, azimuth in radians).
    """

    target_range: float
    target_azimuth: float
    noise_power: float = 1.0
    transmit_power: float = 1.0
    sample_count: int = 16
    radar_position: Point2D = field(init=False)
    target_position: Point2D = field(init=False)

    def __post_init__(self):
        if self.target_range <= 0:
            raise ValueError("target range must be > 0")
        if self.noise_power <= 0:
            raise ValueError("noise power must be > 0")
        if self.transmit_power <= 0:
            raise ValueError("transmit power must be > 0")
        if self.sample_count < 1:
            raise ValueError("sample count must be >= 1")
        object.__setattr__(self, "radar_position", Point2D(0.0, 0.0))
        object.__setattr__(
            self, "target_position", polar_to_cartesian(self.target_range, self.target_azimuth)
        )


@dataclass(frozen=True)
class Candidate:
    """One grid cell with its derived geometry.

    ``angle_from_radar`` / ``distance_from_radar`` describe the radar-IRS leg
    (equal to the cell's azimuth and range since the radar is at the origin);
    ``angle_to_target`` / ``distance_to_target`` describe the IRS-target leg.
    """

    index: int
    range_m: float
    azimuth_rad: float
    position: Point2D
    angle_from_radar: float
    angle_to_target: float
    distance_from_radar: float
    distance_to_target: float

    def __post_init__(self):
        if self.range_m <= 0:
            raise ValueError("candidate range must be > 0")
        if self.distance_to_target < 0:
            raise ValueError("distance to target must be >= 0")


class CandidateSet:
    """Ordered, uniquely indexed list of candidates (index == list position)."""

    def __init__(self, candidates):
        candidates = tuple(candidates)
        for pos, cand in enumerate(candidates):
            if cand.index != pos:
                raise ValueError("candidate indices must be consecutive from 0")
        self.candidates = candidates

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def __getitem__(self, index: int) -> Candidate:
        return self.candidates[index]


def polar_to_cartesian(r: float, theta: float) -> Point2D:
    """Map (range, azimuth) to Cartesian coordinates, radar at the origin."""
    if r < 0:
        raise ValueError("radius must be >= 0")
    return Point2D(r * math.cos(theta), r * math.sin(theta))


def cartesian_to_polar(p: Point2D) -> tuple[float, float]:
    """Inverse of :func:`polar_to_cartesian`; azimuth returned in [0, 2*pi)."""
    r = math.hypot(p.x, p.y)
    theta = math.atan2(p.y, p.x) % TWO_PI
    return r, theta


def scene_angles(position: Point2D, scene: Scene) -> tuple[float, float]:
    """Angle (global frame) and distance from an IRS position to the target.

    Raises ValueError when the position is numerically on top of the target.
    """
    dx = scene.target_position.x - position.x
    dy = scene.target_position.y - position.y
    d_ti = math.hypot(dx, dy)
    if d_ti < COINCIDENT_EPS_M:
        raise ValueError("IRS position coincides with the target")
    return math.atan2(dy, dx), d_ti


def build_candidate_grid(spec: GridSpec, scene: Scene) -> CandidateSet:
    """Enumerate the range-azimuth grid in row-major order (range outer, azimuth inner).

    Ranges are {step, ..., range_count*step}; azimuths {step, ..., azimuth_count*step}
    reduced mod 2*pi. Cells within ``TARGET_EXCLUSION_M`` of the target are dropped.
    """
    candidates = []
    index = 0
    for i in range(1, spec.range_count + 1):
        r = i * spec.range_step
        for k in range(1, spec.azimuth_count + 1):
            theta = (k * spec.azimuth_step) % TWO_PI
            position = polar_to_cartesian(r, theta)
            if position.distance_to(scene.target_position) < TARGET_EXCLUSION_M:
                continue
            angle_to_target, d_ti = scene_angles(position, scene)
            candidates.append(
                Candidate(
                    index=index,
                    range_m=r,
                    azimuth_rad=theta,
                    position=position,
                    angle_from_radar=theta,
                    angle_to_target=angle_to_target,
                    distance_from_radar=r,
                    distance_to_target=d_ti,
                )
            )
            index += 1
    return CandidateSet(candidates)
