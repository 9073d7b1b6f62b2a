"""Log-det mutual-information set function over candidate IRS locations.

For a selected set S the objective is f(S) = ln det(H_S H_S^H + I) where H_S
vertically stacks the per-candidate channels scaled by sqrt(P)/sigma. All
evaluations run on the transmit-side Gram matrix A_S = I + sum_u G_u, with
G_u = rho_u * v_u v_u^H rank-1 per candidate, so the cost is independent of
how many candidates are stacked. A Cholesky factor of A_S supports O(n_tx^2)
marginal-gain queries via one triangular solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .channel import (
    ArraySpec,
    PhaseProfile,
    ReflectivityModel,
    cascade_gain,
    nlos_channel,
    random_phase_profile,
    reflectivity,
    steering_vector,
)
from .errors import NumericalError
from .geometry import CandidateSet, Scene


@dataclass(frozen=True)
class ObjectiveContext:
    """Precomputed per-candidate quantities the set function is built from.

    ``channels[u]`` is the (n_rx x n_tx) channel with reflectivity folded in
    (unscaled by power/noise); ``gram_vectors[u]`` is the conjugated transmit
    steering vector v_u; ``rho[u] = (P/sigma^2) * n_rx * |alpha_u * c_u^2|^2``
    so that G_u = rho_u * v_u v_u^H.
    """

    candidates: CandidateSet
    scene: Scene
    array_spec: ArraySpec
    channels: np.ndarray
    gram_vectors: np.ndarray
    rho: np.ndarray

    @property
    def n_candidates(self) -> int:
        return len(self.candidates)

    @property
    def n_tx(self) -> int:
        return self.array_spec.n_tx

    def gram_increment(self, u: int) -> np.ndarray:
        v = self.gram_vectors[u]
        return self.rho[u] * np.outer(v, v.conj())


@dataclass(frozen=True)
class GramState:
    """Immutable snapshot of A_S = I + sum_{u in S} G_u with its Cholesky factor."""

    selected: tuple
    matrix: np.ndarray
    chol: np.ndarray
    value: float


def build_context(
    grid: CandidateSet,
    scene: Scene,
    array_spec: ArraySpec,
    reflectivity_model: Optional[ReflectivityModel] = None,
    phase_seed: int = 0,
    profiles: Optional[Sequence[PhaseProfile]] = None,
) -> ObjectiveContext:
    """Draw one phase profile per candidate and assemble the objective context.

    Profiles are fixed at construction so the objective is a deterministic set
    function during optimization; pass ``profiles`` explicitly to override the
    seeded draw.
    """
    model = reflectivity_model if reflectivity_model is not None else ReflectivityModel.unit()
    n = len(grid)
    if profiles is None:
        rng = np.random.default_rng(phase_seed)
        profiles = [random_phase_profile(array_spec.n_irs_elements, rng) for _ in range(n)]
    elif len(profiles) != n:
        raise ValueError("need exactly one phase profile per candidate")

    snr = scene.transmit_power / scene.noise_power
    channels = np.zeros((n, array_spec.n_rx, array_spec.n_tx), dtype=complex)
    gram_vectors = np.zeros((n, array_spec.n_tx), dtype=complex)
    rho = np.zeros(n)
    for u, cand in enumerate(grid):
        alpha = reflectivity(model, cand)
        channels[u] = nlos_channel(cand, profiles[u], array_spec, alpha).entries
        gain = cascade_gain(profiles[u], cand.angle_from_radar, cand.angle_to_target, array_spec)
        gram_vectors[u] = steering_vector(
            array_spec.n_tx, array_spec.tx_spacing, cand.angle_from_radar
        ).conj()
        rho[u] = snr * array_spec.n_rx * abs(alpha * gain**2) ** 2
    return ObjectiveContext(
        candidates=grid,
        scene=scene,
        array_spec=array_spec,
        channels=channels,
        gram_vectors=gram_vectors,
        rho=rho,
    )


def _check_indices(indices: Iterable[int], ctx: ObjectiveContext) -> list:
    members = list(indices)
    for u in members:
        if not 0 <= u < ctx.n_candidates:
            raise ValueError(f"unknown candidate index {u}")
    return members


def stacked_channel(indices: Iterable[int], ctx: ObjectiveContext) -> np.ndarray:
    """Vertical stack of the scaled channel blocks, in the iteration order given."""
    members = _check_indices(indices, ctx)
    scale = math.sqrt(ctx.scene.transmit_power / ctx.scene.noise_power)
    if not members:
        return np.zeros((0, ctx.n_tx), dtype=complex)
    return np.vstack([scale * ctx.channels[u] for u in members])


def gram_matrix(indices: Iterable[int], ctx: ObjectiveContext) -> np.ndarray:
    """A_S = I + sum of rank-1 increments over the given candidates."""
    members = _check_indices(indices, ctx)
    a = np.eye(ctx.n_tx, dtype=complex)
    if members:
        v = ctx.gram_vectors[members]
        a += (v.T * ctx.rho[members]) @ v.conj()
    return a


def _chol_logdet(a: np.ndarray) -> tuple:
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Gram factorization failed: {exc}") from exc
    return chol, 2.0 * float(np.sum(np.log(np.real(np.diag(chol)))))


def objective_value(indices: Iterable[int], ctx: ObjectiveContext) -> float:
    """f(S) = ln det(H_S H_S^H + I), evaluated on the n_tx-side Gram matrix."""
    _, value = _chol_logdet(gram_matrix(indices, ctx))
    return value


def conditional_entropy(indices: Iterable[int], ctx: ObjectiveContext) -> float:
    """Entropy of the received samples given the excitation.

    Equals (N/2) * (f(S) + n_rx * ln sigma^2) + (N * n_rx / 2)(1 + ln 2*pi);
    the half factors follow the real-Gaussian entropy convention.
    """
    scene = ctx.scene
    n, n_rx = scene.sample_count, ctx.array_spec.n_rx
    f = objective_value(indices, ctx)
    return 0.5 * n * (f + n_rx * math.log(scene.noise_power)) + 0.5 * n * n_rx * (
        1.0 + math.log(2.0 * math.pi)
    )


def noise_entropy(ctx: ObjectiveContext) -> float:
    """Entropy of the noise-only snapshot (the channel-free limit of the conditional entropy)."""
    scene = ctx.scene
    n, n_rx = scene.sample_count, ctx.array_spec.n_rx
    return 0.5 * n * n_rx * (1.0 + math.log(2.0 * math.pi) + math.log(scene.noise_power))


def mutual_information(indices: Iterable[int], ctx: ObjectiveContext) -> float:
    """Information the received signal carries about the channel; equals (N/2) f(S)."""
    return conditional_entropy(indices, ctx) - noise_entropy(ctx)


def empty_state(ctx: ObjectiveContext) -> GramState:
    eye = np.eye(ctx.n_tx, dtype=complex)
    return GramState(selected=(), matrix=eye, chol=eye.copy(), value=0.0)


def marginal_gain(state: GramState, u: int, ctx: ObjectiveContext) -> float:
    """f(S + u) - f(S) = ln(1 + rho_u * v_u^H A_S^{-1} v_u), one triangular solve."""
    if u in state.selected:
        raise ValueError(f"candidate {u} already selected")
    _check_indices([u], ctx)
    z = solve_triangular(state.chol, ctx.gram_vectors[u], lower=True, check_finite=False)
    return float(np.log1p(ctx.rho[u] * np.real(np.vdot(z, z))))


def update_state(state: GramState, u: int, ctx: ObjectiveContext) -> GramState:
    """Fresh state for S + u: rank-1 Gram update, full refactorization."""
    gain = marginal_gain(state, u, ctx)  # also rejects duplicates
    matrix = state.matrix + ctx.gram_increment(u)
    chol, _ = _chol_logdet(matrix)
    return GramState(
        selected=state.selected + (u,),
        matrix=matrix,
        chol=chol,
        value=state.value + gain,
    )
