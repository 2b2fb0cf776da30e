"""Two-boson states on the chain: HOM interference, correlations and NOONity.

Two non-interacting bosons evolve through permanents of the single-particle
propagator; that is the production path.  A direct integration of the
symmetric two-particle Hamiltonian is kept alongside as an independent
brute-force oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import pi
from typing import Optional, Tuple

import numpy as np

from .model import CLEAN, DisorderSpec, LatticeSpec, Schedule, hamiltonian_batch
from .dynamics import (
    _CF4_A1,
    _CF4_A2,
    _CF4_C1,
    _CF4_C2,
    _auto_chunk,
    _chunk_draws,
    _draw_indices,
    resolved_steps,
)

MAX_PAIR_DIM = 20000


@lru_cache(maxsize=8)
def _pair_index(n_sites: int):
    """Site-pair basis (i <= j): index arrays, lookup table and norm factors."""
    ii, jj = np.triu_indices(n_sites)
    lookup = np.full((n_sites, n_sites), -1, dtype=int)
    lookup[ii, jj] = np.arange(len(ii))
    lookup[jj, ii] = lookup[ii, jj]
    norm = np.where(ii == jj, np.sqrt(2.0), 1.0)  # sqrt(1 + delta_ij)
    return ii, jj, lookup, norm


def pair_basis_size(n_sites: int) -> int:
    return n_sites * (n_sites + 1) // 2


@dataclass
class TwoParticleState:
    """Amplitudes on the orthonormal symmetric basis b_i^dag b_j^dag |V> / sqrt(1+delta_ij)."""

    amps: np.ndarray = field(repr=False)
    n_sites: int

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def amplitude(self, i: int, j: int) -> complex:
        _, _, lookup, _ = _pair_index(self.n_sites)
        return complex(self.amps[lookup[i, j]])


def product_pair_state(n_sites: int, a: int, b: int) -> TwoParticleState:
    """|a, b>: one boson on each of the two sites (a == b puts both on one)."""
    amps = np.zeros(pair_basis_size(n_sites), dtype=complex)
    _, _, lookup, _ = _pair_index(n_sites)
    amps[lookup[a, b]] = 1.0
    return TwoParticleState(amps=amps, n_sites=n_sites)


def noon_state(n_sites: int) -> TwoParticleState:
    """(|1,1> + |2N,2N>)/sqrt(2) on the two end sites."""
    amps = np.zeros(pair_basis_size(n_sites), dtype=complex)
    _, _, lookup, _ = _pair_index(n_sites)
    amps[lookup[0, 0]] = 1.0 / np.sqrt(2.0)
    amps[lookup[n_sites - 1, n_sites - 1]] = 1.0 / np.sqrt(2.0)
    return TwoParticleState(amps=amps, n_sites=n_sites)


def hom_output(
    u: np.ndarray,
    pair: Optional[Tuple[int, int]] = None,
    check: bool = True,
) -> TwoParticleState:
    """Two-boson output state for bosons injected at the given input sites.

    The amplitude on each output pair (q, r) is the 2x2 permanent of the
    propagator rows/columns, perm[[U_qa, U_qb], [U_ra, U_rb]], divided by the
    exchange norms sqrt(1+delta_ab) sqrt(1+delta_qr).
    """
    u = np.asarray(u)
    n = u.shape[0]
    if pair is None:
        pair = (0, n - 1)
    if check:
        defect = np.abs(u.conj().T @ u - np.eye(n)).max()
        if defect > 1e-8:
            raise ValueError(f"propagator is not unitary (defect {defect:.3e})")
    a, b = pair
    ii, jj, _, norm_out = _pair_index(n)
    ua, ub = u[:, a], u[:, b]
    perm = ua[ii] * ub[jj] + ub[ii] * ua[jj]
    amps = perm / (norm_out * (np.sqrt(2.0) if a == b else 1.0))
    return TwoParticleState(amps=amps, n_sites=n)


@lru_cache(maxsize=4)
def _pair_lift_tables(n_sites: int):
    """Precomputed gather indices and masks for lifting h to the pair basis.

    <ab| H(2) |ij> = (d_bj h_ai + d_bi h_aj + d_aj h_bi + d_ai h_bj)
                     / (sqrt(1+d_ab) sqrt(1+d_ij)).
    """
    ii, jj, _, norm = _pair_index(n_sites)
    a, b = ii[:, None], jj[:, None]
    i, j = ii[None, :], jj[None, :]
    masks = ((b == j), (b == i), (a == j), (a == i))
    gathers = ((a, i), (a, j), (b, i), (b, j))
    nn = 1.0 / (norm[:, None] * norm[None, :])
    return masks, gathers, nn


def two_particle_hamiltonian(h: np.ndarray) -> np.ndarray:
    """Symmetric-subspace restriction of H (x) 1 + 1 (x) H on the pair basis."""
    h = np.asarray(h)
    n = h.shape[-1]
    if pair_basis_size(n) > MAX_PAIR_DIM:
        raise ValueError(f"two-particle basis dimension {pair_basis_size(n)} exceeds {MAX_PAIR_DIM}")
    masks, gathers, nn = _pair_lift_tables(n)
    out = np.zeros(h.shape[:-2] + nn.shape, dtype=h.dtype)
    for mask, (r, c) in zip(masks, gathers):
        out += np.where(mask, h[..., r, c], 0.0)
    return out * nn


def fock_evolve_oracle(
    spec: LatticeSpec,
    sched: Schedule,
    dspec: DisorderSpec = CLEAN,
    seed: Optional[int] = None,
    input_state: Optional[TwoParticleState] = None,
    n_steps: Optional[int] = None,
) -> TwoParticleState:
    """Brute-force two-boson evolution in the symmetric Fock sector.

    Restricts H (x) 1 + 1 (x) H to the pair basis and steps it with the same
    node times, weights and disorder draws as the single-particle integrator,
    but exponentiates by exact diagonalization.  Independent of the
    permanent-based path everywhere it can be.
    """
    n = spec.n_sites
    if input_state is None:
        input_state = product_pair_state(n, 0, n - 1)
    psi = input_state.amps.astype(complex).copy()
    steps_total = n_steps if n_steps is not None else resolved_steps(sched, dspec)
    dt = sched.t_final / steps_total
    use_seed = dspec.seed if seed is None else seed
    chunk = max(4, _auto_chunk(pair_basis_size(n)))
    for k0 in range(0, steps_total, chunk):
        k1 = min(k0 + chunk, steps_total)
        steps = np.arange(k0, k1)
        idx = _draw_indices(steps, dspec, dt, 1)
        draws = _chunk_draws(use_seed, idx, spec, dspec) if dspec.kind != "none" else None

        def node_pair_hams(c):
            v_node = spec.v0 * spec.w * np.sin(pi * (steps + c) * dt / sched.t_final)
            return two_particle_hamiltonian(hamiltonian_batch(v_node, spec, dspec, draws))

        h1 = node_pair_hams(_CF4_C1)
        h2 = node_pair_hams(_CF4_C2)
        ev_r = np.linalg.eigh(_CF4_A2 * h1 + _CF4_A1 * h2)
        ev_l = np.linalg.eigh(_CF4_A1 * h1 + _CF4_A2 * h2)
        for j in range(k1 - k0):
            for evals, evecs in ((ev_r[0][j], ev_r[1][j]), (ev_l[0][j], ev_l[1][j])):
                psi = evecs @ (np.exp(-1j * evals * dt) * (evecs.conj().T @ psi))
    return TwoParticleState(amps=psi, n_sites=n)


def density(state: TwoParticleState) -> np.ndarray:
    """Site occupations <n_r>; sums to 2 for any two-boson state."""
    ii, jj, _, _ = _pair_index(state.n_sites)
    p = np.abs(state.amps) ** 2
    out = np.zeros(state.n_sites)
    np.add.at(out, ii, p)
    np.add.at(out, jj, p)
    return out


def correlation(state: TwoParticleState) -> np.ndarray:
    """Two-particle correlation Gamma_qr = <b_q^dag b_r^dag b_r b_q>."""
    ii, jj, _, _ = _pair_index(state.n_sites)
    p = np.abs(state.amps) ** 2
    gamma = np.zeros((state.n_sites, state.n_sites))
    off = ii != jj
    gamma[ii[off], jj[off]] = p[off]
    gamma[jj[off], ii[off]] = p[off]
    diag = ~off
    gamma[ii[diag], ii[diag]] = 2.0 * p[diag]
    return gamma


def noonity(gamma: np.ndarray) -> float:
    """Nity = sum_qr (Gamma_qq Gamma_rr - Gamma_qr^2), in [-2, 2] for two bosons."""
    tr = float(np.trace(gamma))
    return tr * tr - float((gamma**2).sum())


def noon_fidelity(state: TwoParticleState) -> float:
    """|<NOON|psi>| with the fixed-phase NOON target (|1,1> + |2N,2N>)/sqrt(2)."""
    _, _, lookup, _ = _pair_index(state.n_sites)
    c00 = state.amps[lookup[0, 0]]
    cll = state.amps[lookup[state.n_sites - 1, state.n_sites - 1]]
    return float(abs(c00 + cll) / np.sqrt(2.0))


def noon_fidelity_phase_optimized(state: TwoParticleState) -> float:
    """Overlap with (|1,1> + e^{i chi} |2N,2N>)/sqrt(2), maximized over chi."""
    _, _, lookup, _ = _pair_index(state.n_sites)
    c00 = state.amps[lookup[0, 0]]
    cll = state.amps[lookup[state.n_sites - 1, state.n_sites - 1]]
    return float((abs(c00) + abs(cll)) / np.sqrt(2.0))


def pair_amplitude_matrix(state: TwoParticleState) -> np.ndarray:
    """Symmetric matrix of amplitudes in the raw b_i^dag b_j^dag |V> expansion."""
    ii, jj, _, norm = _pair_index(state.n_sites)
    m = np.zeros((state.n_sites, state.n_sites), dtype=complex)
    vals = state.amps / norm
    m[ii, jj] = vals
    m[jj, ii] = vals
    return m
