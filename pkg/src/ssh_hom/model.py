"""Time-dependent SSH chain: lattice/schedule/disorder specs and Hamiltonian builders.

Conventions used throughout the package:

* hbar = 1 and the intercell hopping ``w`` is the energy unit, so every
  time is expressed in units of 1/w.
* Sites are 0-indexed internally.  Site ``0`` is the left end (site 1 in
  1-based counting) and site ``2N-1`` the right end.  Bond ``j`` couples
  sites ``j`` and ``j+1``; even ``j`` is an intracell bond (amplitude v),
  odd ``j`` an intercell bond (amplitude w).
* All single-particle Hamiltonians are real symmetric (hoppings and on-site
  energies are real), which keeps the chain in class BDI unless on-site
  disorder is switched on.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import ceil, cos, pi, sin
from typing import Optional

import numpy as np
from numpy.random import Philox, SeedSequence

DISORDER_KINDS = ("none", "hopping_bdi", "onsite_generic", "onsite_inversion_symmetric")
TEMPORAL_POLICIES = ("static", "resample_every_step")


@dataclass(frozen=True)
class LatticeSpec:
    """Chain geometry: N unit cells (2N sites), intracell modulation amplitude v0.

    ``v0`` is the peak intracell hopping in units of ``w``; the schedule keeps
    v(t) = v0 sin(theta) below w at all times, so the chain never leaves the
    topological regime.
    """

    n_cells: int
    v0: float
    w: float = 1.0

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError(f"n_cells must be >= 2, got {self.n_cells}")
        if not 0.0 <= self.v0 < 1.0:
            raise ValueError(f"v0 must satisfy 0 <= v0 < 1, got {self.v0}")
        if self.w <= 0.0:
            raise ValueError(f"w must be positive, got {self.w}")

    @property
    def n_sites(self) -> int:
        return 2 * self.n_cells


def default_step_count(t_final: float, temporal_noise: bool = False) -> int:
    """Integrator step count used when a schedule does not pin one.

    Per-step resampled noise needs a denser grid: the step sets the noise
    correlation time, and the leakage it induces shrinks with it.
    """
    per_unit = 120.0 if temporal_noise else 40.0
    return max(4096, ceil(per_unit * t_final))


@dataclass(frozen=True)
class Schedule:
    """Linear ramp theta(t) = pi * t / t_final over t in [0, t_final].

    v(t) = v0 sin(theta) starts and ends at the fully dimerized limit v = 0.
    """

    t_final: float
    n_steps: Optional[int] = None

    def __post_init__(self):
        if self.t_final <= 0.0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.n_steps is not None and self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")

    def theta(self, t):
        return pi * np.asarray(t) / self.t_final

    @property
    def steps(self) -> int:
        return self.n_steps if self.n_steps is not None else default_step_count(self.t_final)


@dataclass(frozen=True)
class DisorderSpec:
    """Disorder kind, strength and temporal policy.

    ``strength`` is xi for hopping disorder and zeta for on-site disorder, in
    units of w.  Under the static policy one realization is drawn at step 0
    and frozen; under resample_every_step an independent draw is made at every
    integrator step.  ``refresh_interval`` (in 1/w) coarsens the temporal
    resampling to one draw per interval instead of one per step.
    """

    kind: str = "none"
    strength: float = 0.0
    temporal_policy: str = "static"
    refresh_interval: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DISORDER_KINDS:
            raise ValueError(f"unknown disorder kind {self.kind!r}; expected one of {DISORDER_KINDS}")
        if self.temporal_policy not in TEMPORAL_POLICIES:
            raise ValueError(
                f"unknown temporal policy {self.temporal_policy!r}; expected one of {TEMPORAL_POLICIES}"
            )
        if self.strength < 0.0:
            raise ValueError(f"disorder strength must be >= 0, got {self.strength}")
        if self.refresh_interval is not None and self.refresh_interval <= 0.0:
            raise ValueError("refresh_interval must be positive when given")

    def with_seed(self, seed: int) -> "DisorderSpec":
        return replace(self, seed=int(seed))


CLEAN = DisorderSpec()


@dataclass(frozen=True)
class DisorderDraw:
    """One concrete realization: 2N-1 bond factors (hopping) or 2N on-site shifts."""

    r: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.r)


def draw_length(dspec: DisorderSpec, spec: LatticeSpec) -> int:
    """Number of independent uniforms consumed per draw for this disorder kind."""
    if dspec.kind == "none":
        return 0
    if dspec.kind == "hopping_bdi":
        return spec.n_sites - 1
    if dspec.kind == "onsite_inversion_symmetric":
        return spec.n_cells  # mirrored about the chain center
    return spec.n_sites


def _philox_key(seed: int) -> np.ndarray:
    return SeedSequence(int(seed)).generate_state(2, dtype=np.uint64)


def _blocks_per_step(spec: LatticeSpec) -> int:
    # Philox emits 4 uint64 per counter value; reserve a fixed stride per step
    # so draws are random-access by step index.
    return max(4, -(-spec.n_sites // 4))


def _uniform_block(seed: int, first_step: int, n_steps: int, spec: LatticeSpec) -> np.ndarray:
    """Uniforms in [-0.5, 0.5) for steps [first_step, first_step + n_steps).

    Shape (n_steps, 4 * blocks_per_step); the leading draw_length columns are
    the draw.  The value at a given (seed, step, position) never depends on
    how many steps are generated at once, so ensemble parallelism and
    chunking cannot change results.
    """
    blocks = _blocks_per_step(spec)
    bg = Philox(key=_philox_key(seed))
    bg.advance(blocks * first_step)
    raw = bg.random_raw(4 * blocks * n_steps).reshape(n_steps, 4 * blocks)
    return (raw >> np.uint64(11)) * 2.0 ** -53 - 0.5


def _mirror(r_half: np.ndarray) -> np.ndarray:
    return np.concatenate([r_half, r_half[..., ::-1]], axis=-1)


def sample_disorder(dspec: DisorderSpec, spec: LatticeSpec, step_index: int) -> DisorderDraw:
    """Draw the disorder realization for one integrator step.

    Static policy returns the step-0 draw for every ``step_index``; the
    temporal policy returns an independent draw per step, deterministically
    derived from (seed, step_index).  Inversion-symmetric on-site draws
    satisfy r[n] = r[2N-1-n] exactly.
    """
    m = draw_length(dspec, spec)
    if m == 0:
        return DisorderDraw(np.zeros(0))
    idx = 0 if dspec.temporal_policy == "static" else int(step_index)
    r = _uniform_block(dspec.seed, idx, 1, spec)[0, :m]
    if dspec.kind == "onsite_inversion_symmetric":
        r = _mirror(r)
    return DisorderDraw(r)


def intracell_amplitude(t: float, spec: LatticeSpec, sched: Schedule) -> float:
    """Instantaneous intracell hopping v(t) = v0 sin(pi t / t_final)."""
    if t < 0.0 or t > sched.t_final:
        raise ValueError(f"t={t} outside the schedule range [0, {sched.t_final}]")
    return spec.v0 * spec.w * sin(pi * t / sched.t_final)


def _bond_values(v_t, spec: LatticeSpec, dspec: DisorderSpec, r):
    """Bond amplitudes for scalar or batched v_t; r has shape (..., 2N-1) or None."""
    v_t = np.asarray(v_t, dtype=float)
    n = spec.n_sites
    bonds = np.empty(v_t.shape + (n - 1,))
    bonds[..., 0::2] = v_t[..., None]
    bonds[..., 1::2] = spec.w
    if dspec.kind == "hopping_bdi" and dspec.strength > 0.0:
        bonds = bonds * (1.0 + dspec.strength * r)
    return bonds


def build_hamiltonian(
    t: float,
    spec: LatticeSpec,
    sched: Schedule,
    draw: Optional[DisorderDraw] = None,
    dspec: DisorderSpec = CLEAN,
) -> np.ndarray:
    """Open-boundary 2N x 2N real symmetric Hamiltonian at time t.

    Intracell bonds carry v(t), intercell bonds w; under hopping disorder each
    bond j is scaled by (1 + xi * r[j]), so disordered intracell bonds vanish
    together with the clean ones at the dimerized endpoints.  On-site kinds
    put zeta * r[n] on the diagonal; the clean diagonal is zero.
    """
    n = spec.n_sites
    r = None
    if dspec.kind != "none":
        if draw is None:
            raise ValueError(f"disorder kind {dspec.kind!r} requires a draw")
        expected = n - 1 if dspec.kind == "hopping_bdi" else n
        if len(draw.r) != expected:
            raise ValueError(f"draw length {len(draw.r)} does not match kind {dspec.kind!r} (expected {expected})")
        r = draw.r
    v_t = intracell_amplitude(t, spec, sched)
    h = np.zeros((n, n))
    bonds = _bond_values(v_t, spec, dspec, r if dspec.kind == "hopping_bdi" else None)
    idx = np.arange(n - 1)
    h[idx, idx + 1] = bonds
    h[idx + 1, idx] = bonds
    if dspec.kind in ("onsite_generic", "onsite_inversion_symmetric") and dspec.strength > 0.0:
        h[np.arange(n), np.arange(n)] = dspec.strength * r
    return h


def hamiltonian_batch(
    v_vals: np.ndarray,
    spec: LatticeSpec,
    dspec: DisorderSpec = CLEAN,
    draws: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Stack of Hamiltonians for a batch of intracell amplitudes.

    ``v_vals`` has shape (B,), ``draws`` shape (B, draw_length) with entries
    already mirrored for the inversion-symmetric kind.  Returns (B, 2N, 2N).
    """
    n = spec.n_sites
    v_vals = np.asarray(v_vals, dtype=float)
    b = v_vals.shape[0]
    h = np.zeros((b, n, n))
    r = None
    if dspec.kind != "none" and dspec.strength > 0.0:
        if draws is None:
            raise ValueError("disordered batch requires draws")
        r = draws
    bonds = _bond_values(v_vals, spec, dspec, r if dspec.kind == "hopping_bdi" else None)
    idx = np.arange(n - 1)
    h[:, idx, idx + 1] = bonds
    h[:, idx + 1, idx] = bonds
    if dspec.kind in ("onsite_generic", "onsite_inversion_symmetric") and r is not None:
        h[:, np.arange(n), np.arange(n)] = dspec.strength * r
    return h


def hamiltonian_time_derivative(
    t: float,
    spec: LatticeSpec,
    sched: Schedule,
    draw: Optional[DisorderDraw] = None,
    dspec: DisorderSpec = CLEAN,
) -> np.ndarray:
    """dH/dt at frozen disorder: only the intracell bonds move with the ramp."""
    n = spec.n_sites
    vdot = spec.v0 * spec.w * cos(pi * t / sched.t_final) * pi / sched.t_final
    dh = np.zeros((n, n))
    intra = np.full(spec.n_cells, vdot)
    if dspec.kind == "hopping_bdi" and dspec.strength > 0.0:
        if draw is None:
            raise ValueError("hopping disorder requires a draw")
        intra = intra * (1.0 + dspec.strength * draw.r[0::2])
    idx = np.arange(0, n - 1, 2)
    dh[idx, idx + 1] = intra
    dh[idx + 1, idx] = intra
    return dh


def chiral_operator(n_cells: int) -> np.ndarray:
    """S = P_odd - P_even: +1 on the odd sublattice (0-based even indices)."""
    s = np.ones(2 * n_cells)
    s[1::2] = -1.0
    return np.diag(s)


def inversion_operator(n_cells: int) -> np.ndarray:
    """Site-reversal permutation |n> -> |2N-1-n> (0-based)."""
    return np.fliplr(np.eye(2 * n_cells))


_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)


def bloch_hamiltonian(k: float, v: float, w: float = 1.0) -> np.ndarray:
    """Two-band momentum-space form (v + w cos k) sigma_x + w sin k sigma_y."""
    return (v + w * cos(k)) * _SX + (w * sin(k)) * _SY
