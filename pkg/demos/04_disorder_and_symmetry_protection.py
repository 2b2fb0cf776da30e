"""What survives disorder: the four symmetry regimes, side by side.

Hopping disorder keeps chiral and time-reversal symmetry (class BDI): the
interference survives, temporally fluctuating disorder even self-averages.
On-site disorder breaks chiral symmetry; exact inversion symmetry still
protects the process, generic static disorder kills it, and generic
*temporal* disorder restores it through the emergent
temporal-average-inversion-symmetry.

Ensemble sizes here are kept small so the script runs in about a minute;
the CLI `sweep` command reproduces the full 100-realization curves.
"""

import numpy as np

from ssh_hom import DisorderSpec, ExperimentConfig, LatticeSpec, Schedule, run_ensemble
from ssh_hom.ensemble import symmetry_regime_study

spec = LatticeSpec(n_cells=8, v0=0.6)
K = 8

print("== mean 0:100 beam-splitter fidelity at T_f = 504, strength 0.2 ==")
for regime, kind, policy in (
    ("clean", "none", "static"),
    ("hopping, static", "hopping_bdi", "static"),
    ("hopping, temporal", "hopping_bdi", "resample_every_step"),
    ("on-site generic, static", "onsite_generic", "static"),
    ("on-site generic, temporal", "onsite_generic", "resample_every_step"),
):
    cfg = ExperimentConfig(
        lattice=spec,
        schedule=Schedule(504.0),
        disorder=DisorderSpec(kind=kind, temporal_policy=policy),
        experiment="bs_fidelity",
        strengths=(0.2 if kind != "none" else 0.0,),
        n_realizations=K if kind != "none" else 1,
        base_seed=42,
    )
    res = run_ensemble(cfg, workers=2)
    print(f"  {regime:27s}: mean F = {res.mean[0]:.4f}  (min {res.min[0]:.4f}, {res.n_flagged[0]} flagged)")

print("\n== HOM regime studies at zeta = xi = 0.2, T_f = 252 ==")
for regime in ("bdi_temporal", "inv_static", "generic_static", "generic_temporal"):
    rep = symmetry_regime_study(regime, spec, Schedule(252.0), strength=0.2,
                                base_seed=42, n_realizations=K, workers=2)
    wdf = rep.windowed_df_abs
    drift = np.abs(rep.parity - rep.parity[0]).max()
    spread = f" (draws {rep.final_fidelities.min():.2f}..{rep.final_fidelities.max():.2f})" \
        if rep.final_fidelities.ptp() > 0.05 else ""
    print(
        f"  {regime:16s}: final NOON F = {rep.mean_final_fidelity:.4f}{spread}, Nity = {rep.nity[-1]:+.3f}, "
        f"windowed |D_f| mean = {wdf.mean():.3f}, parity drift = {drift:.4f}"
    )

print("\nreading: BDI and inversion-symmetric disorder protect the interference;")
print("static generic disorder localizes the in-gap states (|D_f| near 1) and kills it;")
print("temporal generic disorder averages the asymmetry away (|D_f| near 0) and restores it.")
