"""Deterministic CSV/JSON artifacts and the run manifest."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Sequence


def fmt(x) -> str:
    """Shortest round-trip decimal form; identical bytes for identical floats."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, bool)):
        return str(x)
    return repr(float(x))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write rows with '\\n' newlines and round-trip float formatting."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_trajectory_csv(path, traj, input_index: int = 0) -> None:
    """Trajectory table: t, site probabilities, parity, D_f, leakage.

    ``input_index`` selects one of the batched initial states.
    """
    n = traj.states.shape[-1]
    header = (
        ["t (1/w)"]
        + [f"p_{r+1}" for r in range(n)]
        + ["parity", "df", "leakage", "ingap_df_lower", "ingap_df_upper"]
    )
    rows = []
    for s, t in enumerate(traj.times):
        probs = list(abs(traj.states[s, input_index]) ** 2)
        rows.append(
            [t] + probs
            + [traj.parity[s, input_index], traj.df[s, input_index], traj.leakage[s, input_index]]
            + list(traj.ingap_df[s])
        )
    write_csv(path, header, rows)


def write_propagator_csv(path, prop) -> None:
    """Row-major dump of the propagator, one (re, im) pair per entry."""
    n = prop.dim
    header = ["row", "col", "re", "im"]
    rows = (
        [i, j, prop.u[i, j].real, prop.u[i, j].imag]
        for i in range(n)
        for j in range(n)
    )
    write_csv(path, header, rows)


@dataclass
class RunManifest:
    """Provenance record: config echo, seed, versions, output hashes."""

    command: str
    version: str
    base_seed: int
    config: dict
    wallclock_s: float = 0.0
    outputs: List[dict] = field(default_factory=list)

    def add(self, path) -> None:
        p = Path(path)
        self.outputs.append({"path": p.name, "sha256": sha256_file(p)})

    def write(self, path) -> None:
        doc = {
            "tool": "ssh-hom",
            "version": self.version,
            "command": self.command,
            "base_seed": self.base_seed,
            "config": self.config,
            "wallclock_s": round(self.wallclock_s, 3),
            "outputs": self.outputs,
        }
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
