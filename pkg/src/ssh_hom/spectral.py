"""Exact diagonalization, analytic edge states and symmetry diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .model import (
    CLEAN,
    DisorderSpec,
    LatticeSpec,
    Schedule,
    build_hamiltonian,
    chiral_operator,
    sample_disorder,
)

HERMITICITY_TOL = 1e-12


class GapCollapseError(RuntimeError):
    """In-gap pair is no longer separated from the bulk."""


@dataclass
class EigenSystem:
    """Full spectrum of one Hamiltonian: ascending energies, orthonormal columns."""

    energies: np.ndarray
    states: np.ndarray
    gauge: str = "lapack"

    @property
    def n_sites(self) -> int:
        return len(self.energies)


@dataclass
class EdgePair:
    """The two in-gap eigenpairs; plus is the upper level, minus the lower."""

    plus_state: np.ndarray
    minus_state: np.ndarray
    e_plus: float
    e_minus: float


@dataclass
class AnalyticEdgeStates:
    """Normalized geometric-profile edge states with localization factor eta = -v/w."""

    left: np.ndarray
    right: np.ndarray
    eta: float


def diagonalize(h: np.ndarray, check: bool = True) -> EigenSystem:
    """Hermitian eigensolve with ascending energies.

    Raises ValueError for non-Hermitian input (residual above 1e-12 relative
    to the matrix scale).
    """
    h = np.asarray(h)
    if check:
        scale = max(1.0, float(np.abs(h).max()))
        if np.abs(h - h.conj().T).max() > HERMITICITY_TOL * scale:
            raise ValueError("matrix is not Hermitian")
    energies, states = np.linalg.eigh(h)
    return EigenSystem(energies=energies, states=states)


def _fix_phase(state: np.ndarray, anchor: Optional[np.ndarray]) -> np.ndarray:
    if anchor is not None:
        ov = np.vdot(anchor, state)
        if abs(ov) > 1e-12:
            return state * (ov.conjugate() / abs(ov))
        return state
    # no continuity anchor: site-1 amplitude real nonnegative (falling back to
    # the largest-magnitude component for states with no weight there)
    i = 0 if abs(state[0]) > 1e-6 else int(np.argmax(np.abs(state)))
    c = state[i]
    if abs(c) > 0:
        state = state * (c.conjugate() / abs(c))
    return state


def in_gap_pair(
    es: EigenSystem,
    previous: Optional[EdgePair] = None,
    gap_threshold: float = 1e-6,
    degeneracy_tol: float = 1e-9,
) -> EdgePair:
    """Extract the two smallest-|E| eigenpairs with a continuous gauge.

    The global phase of each state is fixed by a real positive overlap with
    ``previous``; without an anchor the largest component is made real
    positive.  At the dimerized endpoints the pair is degenerate and the
    2-dimensional eigenspace is resolved onto the parity combinations
    (|left end> +/- (-1)^(N+1) |right end>)/sqrt(2), matching the limit of the
    hybridized edge states.
    """
    n = es.n_sites
    order = np.argsort(np.abs(es.energies), kind="stable")
    pair_idx = order[:2]
    rest = order[2:]
    if len(rest):
        separation = np.abs(es.energies[rest]).min() - np.abs(es.energies[pair_idx]).max()
        if separation < gap_threshold:
            raise GapCollapseError(
                f"in-gap/bulk separation {separation:.3e} below threshold {gap_threshold:.1e}"
            )
    e = es.energies[pair_idx]
    v = es.states[:, pair_idx]
    lo, hi = (0, 1) if e[0] <= e[1] else (1, 0)

    if abs(e[hi] - e[lo]) < degeneracy_tol:
        # degenerate subspace: project the anchors (or the parity combinations)
        # onto it and re-orthonormalize
        sign = -1.0 if (n // 2) % 2 == 0 else 1.0  # (-1)^(N+1)
        if previous is not None:
            targets = [previous.plus_state, previous.minus_state]
        else:
            plus = np.zeros(n)
            plus[0] = 1.0
            plus[-1] = sign
            minus = np.zeros(n)
            minus[0] = 1.0
            minus[-1] = -sign
            targets = [plus / np.sqrt(2.0), minus / np.sqrt(2.0)]
        proj = v @ (v.conj().T @ np.stack(targets, axis=1))
        q, _ = np.linalg.qr(proj)
        plus_state = _fix_phase(q[:, 0], targets[0])
        minus_state = _fix_phase(q[:, 1], targets[1])
        e_plus = e_minus = float(e.mean())
    else:
        plus_state = _fix_phase(v[:, hi], previous.plus_state if previous else None)
        minus_state = _fix_phase(v[:, lo], previous.minus_state if previous else None)
        e_plus, e_minus = float(e[hi]), float(e[lo])
    return EdgePair(plus_state=plus_state, minus_state=minus_state, e_plus=e_plus, e_minus=e_minus)


def analytic_edge_states(spec: LatticeSpec, v: float) -> AnalyticEdgeStates:
    """Exponentially localized left/right edge states for intracell hopping v.

    The left state lives on the odd sublattice (0-based even indices) with
    amplitudes eta^m, the right state mirrors it on the even sublattice; both
    are normalized here although the geometric profiles are conventionally
    written without the normalization factor.
    """
    if abs(v) >= spec.w:
        raise ValueError(f"|v|={abs(v)} must be below w={spec.w}: edge states delocalize")
    n_cells, n = spec.n_cells, spec.n_sites
    eta = -v / spec.w
    profile = eta ** np.arange(n_cells)
    profile = profile / np.linalg.norm(profile)
    left = np.zeros(n)
    left[0::2] = profile
    right = np.zeros(n)
    right[::-1][0::2] = profile
    return AnalyticEdgeStates(left=left, right=right, eta=eta)


def hybrid_energy_formula(spec: LatticeSpec, v: float) -> float:
    """Closed-form in-gap splitting E_+ = |v eta^(N-1) (eta^2 - 1) / (eta^(2N) - 1)|."""
    if abs(v) >= spec.w:
        raise ValueError(f"|v|={abs(v)} must be below w={spec.w}")
    if v == 0.0:
        return 0.0
    n_cells = spec.n_cells
    eta = -v / spec.w
    return abs(v * eta ** (n_cells - 1) * (eta**2 - 1.0) / (eta ** (2 * n_cells) - 1.0))


def distribution_difference(psi: np.ndarray) -> float:
    """Left-half minus right-half probability weight, in [-1, 1]."""
    p = np.abs(np.asarray(psi)) ** 2
    half = len(p) // 2
    return float(p[:half].sum() - p[half:].sum())


@dataclass
class EqualSupportReport:
    """Outcome of the odd/even support balance check on every bulk-energy state."""

    passed: bool
    max_residual: float
    violations: List[Tuple[int, float, float]] = field(default_factory=list)
    n_checked: int = 0


def equal_support_check(
    es: EigenSystem,
    energy_threshold: float = 1e-6,
    tol: float = 1e-10,
) -> EqualSupportReport:
    """Check <P_odd> = <P_even> for every eigenstate with |E| above threshold.

    Guaranteed by chiral symmetry; states violating the balance are reported
    with their energies and residuals.
    """
    p = np.abs(es.states) ** 2
    imbalance = p[0::2].sum(axis=0) - p[1::2].sum(axis=0)
    mask = np.abs(es.energies) > energy_threshold
    violations = [
        (int(i), float(es.energies[i]), float(abs(imbalance[i])))
        for i in np.nonzero(mask & (np.abs(imbalance) > tol))[0]
    ]
    checked = np.abs(imbalance[mask])
    return EqualSupportReport(
        passed=not violations,
        max_residual=float(checked.max()) if checked.size else 0.0,
        violations=violations,
        n_checked=int(mask.sum()),
    )


def transition_element(es: EigenSystem, dh_dt: np.ndarray, n: int) -> complex:
    """Matrix element <psi_n| dH/dt S |psi_n> between a state and its chiral partner.

    Vanishes identically when both H and dH/dt anticommute with S, which is
    what suppresses transitions between the hybridized edge states under
    hopping disorder.
    """
    s = chiral_operator(es.n_sites // 2)
    psi = es.states[:, n]
    return complex(np.vdot(psi, dh_dt @ (s @ psi)))


def spectrum_over_schedule(
    spec: LatticeSpec,
    sched: Schedule,
    dspec: DisorderSpec = CLEAN,
    n_samples: int = 201,
) -> Tuple[np.ndarray, np.ndarray]:
    """Instantaneous spectrum E_n(t) on an even time grid over the schedule.

    Returns (times, energies) with energies of shape (n_samples, 2N); used for
    spectrum exports and plots.  Disordered spectra use the static draw for
    the static policy and per-sample draws otherwise.
    """
    times = np.linspace(0.0, sched.t_final, n_samples)
    energies = np.empty((n_samples, spec.n_sites))
    for i, t in enumerate(times):
        draw = sample_disorder(dspec, spec, i) if dspec.kind != "none" else None
        h = build_hamiltonian(t, spec, sched, draw, dspec)
        energies[i] = np.linalg.eigvalsh(h)
    return times, energies
