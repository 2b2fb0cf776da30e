"""Disorder-averaged experiments: seeded realization sweeps and regime studies.

Every realization k derives its disorder seed from (base_seed, k) through a
splittable hash, so results are bit-for-bit reproducible at any worker count
and extending a strength grid never perturbs existing realizations' draws.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from numpy.random import SeedSequence

from .model import DisorderSpec, LatticeSpec, Schedule
from .dynamics import UNITARITY_TOL, _run_evolution, parity_superposition, propagate, resolved_steps
from .multiparticle import correlation, hom_output, noon_fidelity, noonity

EXPERIMENTS = ("bs_fidelity", "hom_fidelity")
REGIMES = {
    "bdi_static": ("hopping_bdi", "static"),
    "bdi_temporal": ("hopping_bdi", "resample_every_step"),
    "inv_static": ("onsite_inversion_symmetric", "static"),
    "generic_static": ("onsite_generic", "static"),
    "generic_temporal": ("onsite_generic", "resample_every_step"),
}
LEAKAGE_TOL = 0.01


def realization_seed(base_seed: int, k: int) -> int:
    """Per-realization disorder seed: a splittable hash of (base_seed, k)."""
    return int(SeedSequence((int(base_seed), int(k))).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """One disorder-averaged experiment over a strength or t_final grid."""

    lattice: LatticeSpec
    schedule: Schedule
    disorder: DisorderSpec
    experiment: str = "bs_fidelity"
    strengths: Optional[Tuple[float, ...]] = None
    t_finals: Optional[Tuple[float, ...]] = None
    n_realizations: int = 100
    base_seed: int = 0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        for name, grid in (("strengths", self.strengths), ("t_finals", self.t_finals)):
            if grid is not None:
                if len(grid) == 0:
                    raise ValueError(f"{name} grid must be nonempty")
                if list(grid) != sorted(grid):
                    raise ValueError(f"{name} grid must be sorted")


@dataclass
class EnsembleResult:
    """Statistics per grid point, with every raw realization value retained."""

    experiment: str
    grid_name: str
    grid: np.ndarray
    values: np.ndarray  # (grid, realizations)
    flags: np.ndarray  # (grid, realizations) bool
    mean: np.ndarray
    std: np.ndarray
    min: np.ndarray
    max: np.ndarray
    n_flagged: np.ndarray

    @property
    def n_realizations(self) -> int:
        return self.values.shape[1]


def _finalize(experiment: str, grid_name: str, grid, values, flags) -> EnsembleResult:
    return EnsembleResult(
        experiment=experiment,
        grid_name=grid_name,
        grid=np.asarray(grid, dtype=float),
        values=values,
        flags=flags,
        mean=values.mean(axis=1),
        std=values.std(axis=1),
        min=values.min(axis=1),
        max=values.max(axis=1),
        n_flagged=flags.sum(axis=1),
    )


def bs_fidelity(u: np.ndarray) -> float:
    """|<target|psi>| for the 0:100 splitter: full transfer across the chain."""
    return float(abs(u[-1, 0]))


def hom_fidelity(u: np.ndarray) -> float:
    """NOON fidelity of the two-boson output for input |1, 2N>."""
    return float(abs(u[0, 0] * u[0, -1] + u[-1, 0] * u[-1, -1]))


def _leakage(u: np.ndarray, experiment: str) -> float:
    if experiment == "bs_fidelity":
        return 1.0 - abs(u[0, 0]) ** 2 - abs(u[-1, 0]) ** 2
    a_bunch_l = np.sqrt(2.0) * u[0, 0] * u[0, -1]
    a_bunch_r = np.sqrt(2.0) * u[-1, 0] * u[-1, -1]
    a_split = u[0, 0] * u[-1, -1] + u[0, -1] * u[-1, 0]
    return 1.0 - abs(a_bunch_l) ** 2 - abs(a_bunch_r) ** 2 - abs(a_split) ** 2


_FIDELITY = {"bs_fidelity": bs_fidelity, "hom_fidelity": hom_fidelity}


def _map_realizations(fn, n_realizations: int, workers: int):
    if workers <= 1:
        for k in range(n_realizations):
            fn(k)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fn, range(n_realizations)))


def run_ensemble(cfg: ExperimentConfig, workers: int = 1) -> EnsembleResult:
    """Fidelity statistics over disorder realizations for each strength.

    Realization k reuses the same underlying draws at every strength (the
    strength only scales them), so grid points are directly comparable.
    Realizations with unitarity defects or leakage above tolerance are
    flagged but kept in the statistics.
    """
    strengths = cfg.strengths if cfg.strengths is not None else (cfg.disorder.strength,)
    fid = _FIDELITY[cfg.experiment]
    values = np.empty((len(strengths), cfg.n_realizations))
    flags = np.zeros((len(strengths), cfg.n_realizations), dtype=bool)

    def one(k: int):
        seed = realization_seed(cfg.base_seed, k)
        for g, strength in enumerate(strengths):
            dspec = replace(cfg.disorder, strength=float(strength), seed=seed)
            prop = propagate(cfg.lattice, cfg.schedule, dspec)
            values[g, k] = fid(prop.u)
            flags[g, k] = (
                prop.unitarity_defect() > UNITARITY_TOL
                or _leakage(prop.u, cfg.experiment) > LEAKAGE_TOL
            )

    _map_realizations(one, cfg.n_realizations, workers)
    return _finalize(cfg.experiment, "strength", strengths, values, flags)


def tf_scan(cfg: ExperimentConfig, workers: int = 1) -> EnsembleResult:
    """Fidelity versus total evolution time for static disorder.

    Scanning t_final shifts the accumulated dynamical phase, so a statically
    detuned draw recovers peak fidelity at its own optimum; the mean curve's
    argmax is reported through the result grid.
    """
    if cfg.disorder.kind != "none" and cfg.disorder.temporal_policy != "static":
        raise ValueError("tf_scan expects static disorder (temporal noise has no t_final optimum)")
    if cfg.t_finals is None:
        raise ValueError("tf_scan needs a t_finals grid")
    fid = _FIDELITY[cfg.experiment]
    values = np.empty((len(cfg.t_finals), cfg.n_realizations))
    flags = np.zeros_like(values, dtype=bool)

    def one(k: int):
        seed = realization_seed(cfg.base_seed, k)
        dspec = replace(cfg.disorder, seed=seed)
        for g, tf in enumerate(cfg.t_finals):
            prop = propagate(cfg.lattice, Schedule(float(tf), cfg.schedule.n_steps), dspec)
            values[g, k] = fid(prop.u)
            flags[g, k] = prop.unitarity_defect() > UNITARITY_TOL

    _map_realizations(one, cfg.n_realizations, workers)
    return _finalize(cfg.experiment, "t_final", cfg.t_finals, values, flags)


@dataclass
class RegimeReport:
    """Bundled observables for one disorder/symmetry regime (HOM setup).

    Trajectory arrays are ensemble means; ``windowed_df_abs`` is the mean of
    |window-averaged D_f| of the two in-gap instantaneous eigenstates (lower,
    upper), one row per window.
    """

    regime: str
    strength: float
    n_realizations: int
    times: np.ndarray
    fidelity: np.ndarray
    nity: np.ndarray
    final_gamma: np.ndarray
    window_centers: np.ndarray
    windowed_df_abs: np.ndarray
    parity_times: np.ndarray
    parity: np.ndarray  # (samples, 2) for the even/odd end superpositions
    mean_final_fidelity: float
    final_fidelities: np.ndarray = field(repr=False)
    final_nities: np.ndarray = field(repr=False)
    n_flagged: int = 0


def symmetry_regime_study(
    regime: str,
    spec: LatticeSpec,
    sched: Schedule,
    strength: float,
    base_seed: int = 0,
    n_realizations: int = 20,
    n_fidelity_samples: int = 101,
    n_windows: int = 10,
    workers: int = 1,
) -> RegimeReport:
    """Run the HOM pipeline in one symmetry regime and bundle its observables.

    One evolution per realization yields the two-boson fidelity and NOONity
    trajectories (via propagator snapshots and permanents), the final
    correlation matrix, the window-averaged distribution difference of the
    in-gap instantaneous eigenstates, and the parity of the two end-site
    parity superpositions.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; expected one of {tuple(REGIMES)}")
    kind, policy = REGIMES[regime]
    n_steps = resolved_steps(sched, DisorderSpec(kind=kind, strength=strength, temporal_policy=policy))
    snap_steps = np.unique(np.linspace(1, n_steps, n_fidelity_samples).astype(int)) - 1
    psi0 = np.stack([parity_superposition(spec, +1), parity_superposition(spec, -1)])

    n_snap = len(snap_steps)
    fid_sum = np.zeros(1 + n_snap)
    nity_sum = np.zeros(1 + n_snap)
    gamma_sum = np.zeros((spec.n_sites, spec.n_sites))
    wdf_sum = np.zeros((n_windows, 2))
    parity_sum = None
    final_fids = np.empty(n_realizations)
    final_nities = np.empty(n_realizations)
    flags = np.zeros(n_realizations, dtype=bool)
    per_realization = [None] * n_realizations

    def one(k: int):
        dspec = DisorderSpec(
            kind=kind, strength=strength, temporal_policy=policy, seed=realization_seed(base_seed, k)
        )
        u, snapshots, rec, _ = _run_evolution(
            spec, sched, dspec, None, want_unitary=True, psi0=psi0, sample_every=1,
            snapshot_steps=snap_steps, n_steps=n_steps,
        )
        fid_traj = np.empty(1 + n_snap)
        nity_traj = np.empty(1 + n_snap)
        out0 = hom_output(np.eye(spec.n_sites), check=False)
        fid_traj[0] = noon_fidelity(out0)
        nity_traj[0] = noonity(correlation(out0))
        for i, us in enumerate(snapshots):
            out = hom_output(us, check=False)
            fid_traj[1 + i] = noon_fidelity(out)
            nity_traj[1 + i] = noonity(correlation(out))
        final_out = hom_output(snapshots[-1], check=False)
        gamma = correlation(final_out)
        s = len(rec["steps"]) // n_windows
        wdf = np.abs(rec["ingap_df"][: s * n_windows].reshape(n_windows, s, 2).mean(axis=1))
        parity = np.einsum("sbn,sbn->sb", rec["psi"].conj(), rec["psi"][:, :, ::-1]).real
        defect = float(np.abs(u.conj().T @ u - np.eye(spec.n_sites)).max())
        per_realization[k] = (fid_traj, nity_traj, gamma, wdf, parity, defect)

    _map_realizations(one, n_realizations, workers)

    for k, (fid_traj, nity_traj, gamma, wdf, parity, defect) in enumerate(per_realization):
        fid_sum += fid_traj
        nity_sum += nity_traj
        gamma_sum += gamma
        wdf_sum += wdf
        parity_sum = parity if parity_sum is None else parity_sum + parity
        final_fids[k] = fid_traj[-1]
        final_nities[k] = nity_traj[-1]
        flags[k] = defect > UNITARITY_TOL

    dt = sched.t_final / n_steps
    times = np.concatenate([[0.0], (snap_steps + 1) * dt])
    s = n_steps // n_windows
    window_centers = (np.arange(n_windows) + 0.5) * s * dt
    parity_times = (np.arange(parity_sum.shape[0]) + 1) * dt
    return RegimeReport(
        regime=regime,
        strength=strength,
        n_realizations=n_realizations,
        times=times,
        fidelity=fid_sum / n_realizations,
        nity=nity_sum / n_realizations,
        final_gamma=gamma_sum / n_realizations,
        window_centers=window_centers,
        windowed_df_abs=wdf_sum / n_realizations,
        parity_times=parity_times,
        parity=parity_sum / n_realizations,
        mean_final_fidelity=float(final_fids.mean()),
        final_fidelities=final_fids,
        final_nities=final_nities,
        n_flagged=int(flags.sum()),
    )
