"""NLoS channel synthesis for IRS-assisted MIMO radar.

Each IRS hop compresses algebraically to a rank-1 matrix: the radar-IRS and
IRS-target legs contribute a complex cascade gain ``c`` through the phase
profile, and the full two-way channel is ``alpha * c**2 * a_rx(theta) a_tx(theta)^T``
with theta the radar-IRS angle. The explicit five-factor hop product is kept
only as a test oracle; construction here uses the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import TWO_PI, Candidate


@dataclass(frozen=True)
class ArraySpec:
    """Element counts and spacings (spacings in fractions of the carrier wavelength)."""

    n_tx: int = 8
    n_rx: int = 8
    n_irs_elements: int = 16
    tx_spacing: float = 0.5
    irs_spacing: float = 0.125
    wavelength: float = 1.0

    def __post_init__(self):
        if min(self.n_tx, self.n_rx, self.n_irs_elements) < 1:
            raise ValueError("element counts must be >= 1")
        if self.tx_spacing <= 0 or self.irs_spacing <= 0:
            raise ValueError("spacings must be > 0")
        if self.irs_spacing > self.tx_spacing:
            raise ValueError("IRS spacing must be subwavelength relative to the radar array")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be > 0")


@dataclass(frozen=True)
class PhaseProfile:
    """Per-element phase shifts of one IRS, each in [0, 2*pi)."""

    phases: tuple

    def __init__(self, phases):
        arr = tuple(float(p) for p in phases)
        if any(p < 0.0 or p >= TWO_PI for p in arr):
            raise ValueError("phases must lie in [0, 2*pi)")
        object.__setattr__(self, "phases", arr)

    def __len__(self):
        return len(self.phases)


@dataclass(frozen=True)
class ChannelMatrix:
    """Rank-1 receive-by-transmit channel of one candidate (reflectivity folded in)."""

    entries: np.ndarray
    candidate_index: int


@dataclass(frozen=True)
class ReflectivityModel:
    """Target reflectivity per candidate.

    Variants: ``unit`` (alpha = 1), ``inverse-square-product``
    (alpha = 1 / (d_radar^2 * d_target^2), zero phase), and ``fixed-list``
    (explicit per-candidate complex values).
    """

    variant: str
    values: Optional[dict] = None

    _VARIANTS = ("unit", "inverse-square-product", "fixed-list")

    def __post_init__(self):
        if self.variant not in self._VARIANTS:
            raise ValueError(f"unknown reflectivity variant {self.variant!r}")
        if self.variant == "fixed-list" and not self.values:
            raise ValueError("fixed-list variant needs per-candidate values")

    @classmethod
    def unit(cls) -> "ReflectivityModel":
        return cls("unit")

    @classmethod
    def inverse_square_product(cls) -> "ReflectivityModel":
        return cls("inverse-square-product")

    @classmethod
    def fixed(cls, values: dict) -> "ReflectivityModel":
        return cls("fixed-list", dict(values))


def steering_vector(n: int, spacing: float, theta: float) -> np.ndarray:
    """ULA steering vector: entry k is exp(j*2*pi*spacing*k*sin(theta)), entry 0 is 1."""
    if n < 1:
        raise ValueError("element count must be >= 1")
    k = np.arange(n)
    return np.exp(1j * TWO_PI * spacing * k * np.sin(theta))


def random_phase_profile(n: int, rng: np.random.Generator) -> PhaseProfile:
    """Draw n independent phases uniform on [0, 2*pi)."""
    if n < 1:
        raise ValueError("element count must be >= 1")
    return PhaseProfile(rng.uniform(0.0, TWO_PI, size=n))


def cascade_gain(profile: PhaseProfile, theta_in: float, theta_out: float, spec: ArraySpec) -> complex:
    """Complex gain of one IRS hop, b(theta_in)^T Phi b(theta_out).

    Equals sum_k exp(j*phi_k) * exp(j*2*pi*d_irs*k*(sin(theta_in) + sin(theta_out)))
    and is symmetric in the two angles because Phi is diagonal.
    """
    if len(profile) != spec.n_irs_elements:
        raise ValueError("profile length does not match the IRS element count")
    k = np.arange(spec.n_irs_elements)
    phases = np.asarray(profile.phases)
    s = np.sin(theta_in) + np.sin(theta_out)
    return complex(np.sum(np.exp(1j * (phases + TWO_PI * spec.irs_spacing * k * s))))


def nlos_channel(
    candidate: Candidate, profile: PhaseProfile, spec: ArraySpec, alpha: complex
) -> ChannelMatrix:
    """Two-way channel through one candidate IRS, alpha * c^2 * a_rx a_tx^T."""
    c = cascade_gain(profile, candidate.angle_from_radar, candidate.angle_to_target, spec)
    a_rx = steering_vector(spec.n_rx, spec.tx_spacing, candidate.angle_from_radar)
    a_tx = steering_vector(spec.n_tx, spec.tx_spacing, candidate.angle_from_radar)
    entries = alpha * c**2 * np.outer(a_rx, a_tx)
    return ChannelMatrix(entries=entries, candidate_index=candidate.index)


def reflectivity(model: ReflectivityModel, candidate: Candidate) -> complex:
    """Target reflectivity for one candidate under the model's variant."""
    if model.variant == "unit":
        return 1.0 + 0.0j
    if model.variant == "inverse-square-product":
        return complex(1.0 / (candidate.distance_from_radar**2 * candidate.distance_to_target**2))
    try:
        return complex(model.values[candidate.index])
    except KeyError:
        raise ValueError(f"fixed-list reflectivity has no value for candidate {candidate.index}")


def simulate_snapshot(
    channels: list,
    excitation: np.ndarray,
    noise_power: float,
    rng: np.random.Generator,
    n_rx: Optional[int] = None,
) -> np.ndarray:
    """One received-signal snapshot Y = (sum of channels) @ X + W.

    W has i.i.d. circularly-symmetric complex Gaussian entries with variance
    ``noise_power``. ``n_rx`` is only needed when ``channels`` is empty.
    """
    excitation = np.asarray(excitation)
    if excitation.ndim != 2:
        raise ValueError("excitation must be a 2-D (n_tx x n_samples) matrix")
    n_tx, n_samples = excitation.shape
    if channels:
        shapes = {ch.entries.shape for ch in channels}
        if len(shapes) != 1:
            raise ValueError("channel matrices disagree in shape")
        (rows, cols) = shapes.pop()
        if cols != n_tx:
            raise ValueError("channel/excitation dimension mismatch")
        if n_rx is not None and n_rx != rows:
            raise ValueError("n_rx disagrees with the channel matrices")
        n_rx = rows
        total = np.sum([ch.entries for ch in channels], axis=0)
    else:
        if n_rx is None:
            raise ValueError("n_rx required when no channels are given")
        total = np.zeros((n_rx, n_tx), dtype=complex)
    scale = np.sqrt(noise_power / 2.0)
    noise = scale * (
        rng.standard_normal((n_rx, n_samples)) + 1j * rng.standard_normal((n_rx, n_samples))
    )
    return total @ excitation + noise
