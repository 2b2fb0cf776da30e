"""Command-line front end: JSON config in, CSV tables and SVG plots out.

Commands: spectrum | bs-scan | hom | calibrate | sweep | tf-scan | symmetry-check.
Every run writes a manifest.json listing the effective config and the sha256
of each output file; re-running with a manifest as the config reproduces the
data files byte for byte.  Exit codes: 0 ok, 2 config error, 3 numerical
check failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from math import pi
from pathlib import Path

import numpy as np

from . import __version__
from .model import (
    DisorderSpec,
    LatticeSpec,
    Schedule,
    bloch_hamiltonian,
    build_hamiltonian,
    chiral_operator,
    inversion_operator,
    sample_disorder,
)
from .spectral import GapCollapseError, hybrid_energy_formula, spectrum_over_schedule
from .dynamics import (
    ConvergenceError,
    beam_splitter_scan,
    mean_ingap_energy,
    propagate,
    resolved_steps,
)
from .ensemble import REGIMES, ExperimentConfig, run_ensemble, tf_scan
from .multiparticle import correlation, density, hom_output, noon_fidelity, noon_fidelity_phase_optimized, noonity
from .output import RunManifest, write_csv
from .svgplot import heatmap, line_plot

UNITARITY_TOL = 1e-10
LEAKAGE_TOL = 0.01


class ConfigError(Exception):
    pass


class NumericalCheckError(RuntimeError):
    pass


DEFAULT_CONFIG = {
    "lattice": {"n_cells": 8, "v0": 0.6, "w": 1.0},
    "schedule": {"t_final": 252.0, "n_steps": None},
    "disorder": {
        "kind": "none",
        "strength": 0.0,
        "temporal_policy": "static",
        "refresh_interval": None,
    },
    "seed": 12345,
    "workers": 0,  # 0 = all available cores
    "spectrum": {"n_samples": 201},
    "bs_scan": {"phase_start": 0.5 * pi, "phase_stop": 1.5 * pi, "phase_num": 9},
    "hom": {"n_samples": 101},
    "calibrate": {"phase": "pi/4"},
    "sweep": {
        "regime": "bdi_temporal",
        "strengths": "0.05:0.05:0.2",
        "n_realizations": 100,
        "experiments": ["bs_fidelity", "hom_fidelity"],
        "bs_t_final": 504.0,
        "hom_t_final": 252.0,
    },
    "tf_scan": {
        "experiment": "bs_fidelity",
        "t_finals": "254:25:754",
        "n_realizations": 1,
        "regime": "bdi_static",
        "strength": 0.2,
    },
    "symmetry_check": {"n_k": 65, "n_t": 5},
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, val in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {where!r}")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _merge(base[key], val, where)
        else:
            out[key] = val
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return json.loads(json.dumps(DEFAULT_CONFIG))
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    if "config" in doc and "outputs" in doc:
        doc = doc["config"]  # manifest passed back in: unwrap the echoed config
    return _merge(DEFAULT_CONFIG, doc)


def parse_phase(text) -> float:
    """Accept plain numbers or simple 'pi', 'pi/4', '3pi/2' style expressions."""
    if isinstance(text, (int, float)):
        return float(text)
    s = text.strip().lower().replace(" ", "")
    try:
        if "pi" in s:
            num, _, den = s.partition("pi")
            value = float(num) if num not in ("", "+", "-") else (-1.0 if num == "-" else 1.0)
            value *= pi
            if den.startswith("/"):
                value /= float(den[1:])
            elif den:
                raise ValueError(den)
            return value
        return float(s)
    except ValueError:
        raise ConfigError(f"cannot parse phase {text!r}")


def parse_grid(value) -> tuple:
    """Grids are lists of numbers or 'start:step:stop' range strings (inclusive)."""
    if isinstance(value, (list, tuple)):
        return tuple(float(x) for x in value)
    if isinstance(value, str):
        try:
            start, step, stop = (float(x) for x in value.split(":"))
        except ValueError:
            raise ConfigError(f"cannot parse grid {value!r}; expected 'start:step:stop'")
        if step <= 0:
            raise ConfigError(f"grid step must be positive in {value!r}")
        n = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 12) for i in range(n) if start + i * step <= stop + 1e-9)
    raise ConfigError(f"cannot parse grid {value!r}")


def _specs(cfg: dict):
    try:
        lattice = LatticeSpec(**cfg["lattice"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad 'lattice' section: {exc}")
    try:
        sched = Schedule(**cfg["schedule"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad 'schedule' section: {exc}")
    try:
        dspec = DisorderSpec(seed=cfg["seed"], **cfg["disorder"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad 'disorder' section: {exc}")
    return lattice, sched, dspec


def _check_unitarity(prop) -> None:
    defect = prop.unitarity_defect()
    if defect > UNITARITY_TOL:
        raise NumericalCheckError(f"propagator unitarity defect {defect:.3e} exceeds {UNITARITY_TOL:.1e}")


# ---------------------------------------------------------------- commands


def cmd_spectrum(cfg: dict, out: Path, manifest: RunManifest) -> None:
    lattice, sched, dspec = _specs(cfg)
    n_samples = int(cfg["spectrum"]["n_samples"])
    times, energies = spectrum_over_schedule(lattice, sched, dspec, n_samples)
    header = ["t (1/w)"] + [f"E_{i+1} (w)" for i in range(lattice.n_sites)]
    path = out / "spectrum.csv"
    write_csv(path, header, (np.concatenate([[t], e]) for t, e in zip(times, energies)))
    manifest.add(path)
    order = np.argsort(np.abs(energies), axis=1)
    ingap = set(int(i) for i in order[:, :2].ravel())
    svg = out / "spectrum.svg"
    line_plot(
        svg,
        times,
        [energies[:, i] for i in range(lattice.n_sites)],
        title=f"Instantaneous spectrum, 2N={lattice.n_sites}, v0={lattice.v0}",
        xlabel="t (1/w)",
        ylabel="E (w)",
        emphasize=tuple(ingap),
    )
    manifest.add(svg)
    peak = hybrid_energy_formula(lattice, lattice.v0 * lattice.w)
    print(f"spectrum: {n_samples} samples, closed-form in-gap peak |E| = {peak:.6g} w")


def cmd_bs_scan(cfg: dict, out: Path, manifest: RunManifest) -> None:
    lattice, sched, _ = _specs(cfg)
    sec = cfg["bs_scan"]
    phases = np.linspace(parse_phase(sec["phase_start"]), parse_phase(sec["phase_stop"]), int(sec["phase_num"]))
    scan = beam_splitter_scan(lattice, phases, n_steps=sched.n_steps)
    if scan.flagged.any():
        raise NumericalCheckError(
            f"beam splitter leakage exceeded {LEAKAGE_TOL} at {int(scan.flagged.sum())} grid point(s): non-adiabatic"
        )
    path = out / "bs_scan.csv"
    write_csv(
        path,
        ["phi_d (rad)", "t_final (1/w)", "p_port1_in1", "p_port2_in1", "p_port1_in2N", "p_port2_in2N",
         "leakage_in1", "leakage_in2N"],
        (
            [scan.phases[i], scan.t_finals[i], scan.p_stay[i, 0], scan.p_cross[i, 0],
             scan.p_cross[i, 1], scan.p_stay[i, 1], scan.leakage[i, 0], scan.leakage[i, 1]]
            for i in range(len(scan.phases))
        ),
    )
    manifest.add(path)
    svg = out / "bs_scan.svg"
    line_plot(
        svg, scan.phases,
        [scan.p_stay[:, 0], scan.p_cross[:, 0]],
        labels=["port 1 (stay)", "port 2 (cross)"],
        title="Tunable beam splitter, input port 1",
        xlabel="phi_d (rad)", ylabel="probability",
    )
    manifest.add(svg)
    print(f"bs-scan: {len(phases)} phases, max leakage {scan.leakage.max():.3e}")


def cmd_hom(cfg: dict, out: Path, manifest: RunManifest) -> None:
    lattice, sched, dspec = _specs(cfg)
    n_samples = int(cfg["hom"]["n_samples"])
    n_steps = resolved_steps(sched, dspec)
    snap_steps = np.unique(np.linspace(1, n_steps, n_samples).astype(int)) - 1
    prop = propagate(lattice, sched, dspec, snapshot_steps=snap_steps)
    _check_unitarity(prop)
    dt = sched.t_final / n_steps
    times = np.concatenate([[0.0], (snap_steps + 1) * dt])
    unitaries = [np.eye(lattice.n_sites, dtype=complex)] + list(prop.snapshots)
    rows = []
    gammas = {}
    for t, u in zip(times, unitaries):
        state = hom_output(u, check=False)
        gam = correlation(state)
        rows.append([t, noon_fidelity(state), noon_fidelity_phase_optimized(state), noonity(gam)]
                    + list(density(state)))
        gammas[t] = gam
    path = out / "hom_timeseries.csv"
    write_csv(
        path,
        ["t (1/w)", "noon_fidelity", "noon_fidelity_phase_opt", "nity"]
        + [f"n_{r+1}" for r in range(lattice.n_sites)],
        rows,
    )
    manifest.add(path)
    final_state = hom_output(prop.u, check=False)
    final_fid = noon_fidelity(final_state)
    final_nity = noonity(correlation(final_state))
    for tag, t in (("t0", times[0]), ("mid", times[len(times) // 2]), ("final", times[-1])):
        gpath = out / f"gamma_{tag}.csv"
        write_csv(gpath, [f"q{j+1}" for j in range(lattice.n_sites)], gammas[t])
        manifest.add(gpath)
        gsvg = out / f"gamma_{tag}.svg"
        heatmap(gsvg, gammas[t], title=f"Two-particle correlation at t={t:.6g}", xlabel="site r", ylabel="site q")
        manifest.add(gsvg)
    svg = out / "hom_timeseries.svg"
    arr = np.array([[row[1], row[3]] for row in rows])
    line_plot(svg, times, [arr[:, 0], arr[:, 1]], labels=["NOON fidelity", "Nity"],
              title="HOM interference", xlabel="t (1/w)", ylabel="value")
    manifest.add(svg)
    print(f"hom: final NOON fidelity {final_fid:.6f}, Nity {final_nity:.6f}")


def cmd_calibrate(cfg: dict, out: Path, manifest: RunManifest) -> None:
    lattice, _, _ = _specs(cfg)
    phase = parse_phase(cfg["calibrate"]["phase"])
    if phase <= 0:
        raise ConfigError("calibrate.phase must be positive")
    mean_e = mean_ingap_energy(lattice)
    t_final = phase / mean_e
    path = out / "calibrate.csv"
    write_csv(path, ["target_phase (rad)", "t_final (1/w)", "mean_ingap_energy (w)"],
              [[phase, t_final, mean_e]])
    manifest.add(path)
    print(f"calibrate: phi_d = {phase:.9g} rad -> t_final = {t_final:.6f} (1/w)")


def _sweep_config(cfg: dict, lattice, regime: str, experiment: str, strengths, n_real: int) -> ExperimentConfig:
    kind, policy = REGIMES[regime]
    t_final = float(cfg["sweep"]["bs_t_final" if experiment == "bs_fidelity" else "hom_t_final"])
    return ExperimentConfig(
        lattice=lattice,
        schedule=Schedule(t_final, cfg["schedule"]["n_steps"]),
        disorder=DisorderSpec(kind=kind, temporal_policy=policy),
        experiment=experiment,
        strengths=strengths,
        n_realizations=n_real,
        base_seed=int(cfg["seed"]),
    )


def cmd_sweep(cfg: dict, out: Path, manifest: RunManifest, workers: int) -> None:
    lattice, _, _ = _specs(cfg)
    sec = cfg["sweep"]
    regime = sec["regime"]
    if regime not in REGIMES:
        raise ConfigError(f"sweep.regime must be one of {tuple(REGIMES)}, got {regime!r}")
    strengths = parse_grid(sec["strengths"])
    n_real = int(sec["n_realizations"])
    for experiment in sec["experiments"]:
        short = {"bs_fidelity": "bs", "hom_fidelity": "hom"}.get(experiment)
        if short is None:
            raise ConfigError(f"sweep.experiments entries must be bs_fidelity/hom_fidelity, got {experiment!r}")
        ecfg = _sweep_config(cfg, lattice, regime, experiment, strengths, n_real)
        res = run_ensemble(ecfg, workers=workers)
        path = out / f"sweep_{short}.csv"
        write_csv(
            path,
            ["strength (w)", "mean_fidelity", "std", "min", "max", "n_flagged", "n_realizations"],
            (
                [res.grid[g], res.mean[g], res.std[g], res.min[g], res.max[g],
                 int(res.n_flagged[g]), res.n_realizations]
                for g in range(len(res.grid))
            ),
        )
        manifest.add(path)
        svg = out / f"sweep_{short}.svg"
        line_plot(svg, res.grid, [res.mean], labels=["mean fidelity"],
                  title=f"{experiment} vs disorder strength ({regime})",
                  xlabel="strength (w)", ylabel="mean fidelity")
        manifest.add(svg)
        print(f"sweep[{experiment}] {regime}: mean fidelity "
              + ", ".join(f"{s:g}->{m:.4f}" for s, m in zip(res.grid, res.mean)))


def cmd_tf_scan(cfg: dict, out: Path, manifest: RunManifest, workers: int) -> None:
    lattice, sched, _ = _specs(cfg)
    sec = cfg["tf_scan"]
    regime = sec["regime"]
    if regime not in REGIMES:
        raise ConfigError(f"tf_scan.regime must be one of {tuple(REGIMES)}, got {regime!r}")
    kind, policy = REGIMES[regime]
    if policy != "static":
        raise ConfigError("tf_scan.regime must be a static regime")
    experiment = sec["experiment"]
    ecfg = ExperimentConfig(
        lattice=lattice,
        schedule=sched,
        disorder=DisorderSpec(kind=kind, strength=float(sec["strength"]), temporal_policy=policy),
        experiment=experiment,
        t_finals=parse_grid(sec["t_finals"]),
        n_realizations=int(sec["n_realizations"]),
        base_seed=int(cfg["seed"]),
    )
    res = tf_scan(ecfg, workers=workers)
    path = out / "tf_scan.csv"
    write_csv(
        path,
        ["t_final (1/w)", "mean_fidelity", "std", "min", "max", "n_flagged", "n_realizations"],
        (
            [res.grid[g], res.mean[g], res.std[g], res.min[g], res.max[g],
             int(res.n_flagged[g]), res.n_realizations]
            for g in range(len(res.grid))
        ),
    )
    manifest.add(path)
    svg = out / "tf_scan.svg"
    line_plot(svg, res.grid, [res.mean], labels=["mean fidelity"],
              title=f"{experiment} vs t_final ({regime}, strength {sec['strength']})",
              xlabel="t_final (1/w)", ylabel="mean fidelity")
    manifest.add(svg)
    best = int(np.argmax(res.mean))
    print(f"tf-scan: max mean fidelity {res.mean[best]:.6f} at t_final = {res.grid[best]:g}")


def cmd_symmetry_check(cfg: dict, out: Path, manifest: RunManifest) -> None:
    lattice, sched, dspec = _specs(cfg)
    sec = cfg["symmetry_check"]
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)
    ks = np.linspace(-pi, pi, int(sec["n_k"]))
    v_mid = lattice.v0 * lattice.w * 0.5
    bloch = {"bloch_chiral": 0.0, "bloch_time_reversal": 0.0, "bloch_particle_hole": 0.0, "bloch_inversion": 0.0}
    for k in ks:
        hk = bloch_hamiltonian(k, v_mid, lattice.w)
        hmk = bloch_hamiltonian(-k, v_mid, lattice.w)
        bloch["bloch_chiral"] = max(bloch["bloch_chiral"], np.abs(sz @ hk @ sz + hk).max())
        bloch["bloch_time_reversal"] = max(bloch["bloch_time_reversal"], np.abs(hk.conj() - hmk).max())
        bloch["bloch_particle_hole"] = max(bloch["bloch_particle_hole"], np.abs(sz @ hk @ sz + hmk.conj()).max())
        bloch["bloch_inversion"] = max(bloch["bloch_inversion"], np.abs(sx @ hk @ sx - hmk).max())

    s_op = chiral_operator(lattice.n_cells)
    i_op = inversion_operator(lattice.n_cells)
    times = np.linspace(0.0, sched.t_final, int(sec["n_t"]))
    real_space = {"real_chiral": 0.0, "real_inversion": 0.0, "real_hermiticity": 0.0}
    for step, t in enumerate(times):
        draw = sample_disorder(dspec, lattice, step) if dspec.kind != "none" else None
        h = build_hamiltonian(t, lattice, sched, draw, dspec)
        real_space["real_hermiticity"] = max(real_space["real_hermiticity"], np.abs(h - h.T).max())
        real_space["real_chiral"] = max(real_space["real_chiral"], np.abs(s_op @ h @ s_op + h).max())
        real_space["real_inversion"] = max(real_space["real_inversion"], np.abs(i_op @ h @ i_op - h).max())

    expected_zero = {
        "bloch_chiral": True, "bloch_time_reversal": True, "bloch_particle_hole": True, "bloch_inversion": True,
        "real_hermiticity": True,
        "real_chiral": dspec.kind in ("none", "hopping_bdi"),
        "real_inversion": dspec.kind in ("none", "onsite_inversion_symmetric"),
    }
    rows = []
    failures = []
    for name, residual in {**bloch, **real_space}.items():
        must = expected_zero[name]
        rows.append([name, residual, int(must)])
        print(f"symmetry-check: {name:24s} residual {residual:.3e}" + ("" if must else "  (not protected)"))
        if must and residual > 1e-12:
            failures.append(name)
    path = out / "symmetry_check.csv"
    write_csv(path, ["check", "max_residual", "expected_zero"], rows)
    manifest.add(path)
    if failures:
        raise NumericalCheckError(f"symmetry residual(s) above 1e-12: {', '.join(failures)}")


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssh-hom",
        description="Edge-state beam splitting and Hong-Ou-Mandel interference on a driven SSH chain",
    )
    parser.add_argument("--version", action="version", version=f"ssh-hom {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "bs-scan", "hom", "calibrate", "sweep", "tf-scan", "symmetry-check"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="JSON config (or a manifest.json to replay)")
        p.add_argument("--out", type=str, default="out", help="output directory (env SSH_HOM_OUT wins)")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--workers", type=int, default=None, help="parallel workers for ensembles")
        p.add_argument("--steps", type=int, default=None, help="override integrator step count")
        if name == "calibrate":
            p.add_argument("--phase", type=str, default=None, help="target dynamical phase, e.g. pi/4")
        if name == "sweep":
            p.add_argument("--regime", type=str, default=None, choices=sorted(REGIMES))
            p.add_argument("--strengths", type=str, default=None, help="grid 'start:step:stop' or JSON list")
        if name == "tf-scan":
            p.add_argument("--t-finals", type=str, default=None, help="grid 'start:step:stop'")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.steps is not None:
            cfg["schedule"]["n_steps"] = args.steps
        if getattr(args, "phase", None) is not None:
            cfg["calibrate"]["phase"] = args.phase
        if getattr(args, "regime", None) is not None:
            cfg["sweep"]["regime"] = args.regime
        if getattr(args, "strengths", None) is not None:
            cfg["sweep"]["strengths"] = args.strengths
        if getattr(args, "t_finals", None) is not None:
            cfg["tf_scan"]["t_finals"] = args.t_finals
        workers = args.workers if args.workers is not None else int(cfg["workers"]) or (os.cpu_count() or 1)

        out = Path(os.environ.get("SSH_HOM_OUT") or args.out)
        out.mkdir(parents=True, exist_ok=True)
        manifest = RunManifest(command=args.command, version=__version__, base_seed=int(cfg["seed"]), config=cfg)
        t0 = time.perf_counter()
        if args.command == "spectrum":
            cmd_spectrum(cfg, out, manifest)
        elif args.command == "bs-scan":
            cmd_bs_scan(cfg, out, manifest)
        elif args.command == "hom":
            cmd_hom(cfg, out, manifest)
        elif args.command == "calibrate":
            cmd_calibrate(cfg, out, manifest)
        elif args.command == "sweep":
            cmd_sweep(cfg, out, manifest, workers)
        elif args.command == "tf-scan":
            cmd_tf_scan(cfg, out, manifest, workers)
        elif args.command == "symmetry-check":
            cmd_symmetry_check(cfg, out, manifest)
        manifest.wallclock_s = time.perf_counter() - t0
        manifest.write(out / "manifest.json")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalCheckError, ConvergenceError, GapCollapseError) as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
