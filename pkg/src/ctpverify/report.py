"""Benchmark output: delimited rows plus figures rendered next to them.

Timing columns are wall-clock and never meaningful across machines;
timed-out cells render as `-`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

COLUMNS = ("family", "n", "mode", "verdict", "states_visited",
           "states_subsumed", "traces_completed", "time_ms")


@dataclass(frozen=True)
class BenchRow:
    family: str
    n: int
    mode: str
    verdict: str
    states_visited: int
    states_subsumed: int
    traces_completed: int
    time_ms: int

    @property
    def timed_out(self) -> bool:
        return self.verdict == "RESOURCE_LIMIT"

    def cells(self) -> list:
        if self.timed_out:
            return [self.family, self.n, self.mode, self.verdict, "-", "-", "-", "-"]
        return [self.family, self.n, self.mode, self.verdict, self.states_visited,
                self.states_subsumed, self.traces_completed, self.time_ms]


def write_csv(rows: List[BenchRow], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow(row.cells())
    return path


def render_figures(rows: List[BenchRow], out_dir) -> List[Path]:
    """One states-versus-size figure per family, one line per mode."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for family in sorted({r.family for r in rows}):
        fam_rows = [r for r in rows if r.family == family and not r.timed_out]
        modes = sorted({r.mode for r in fam_rows})
        if not modes:
            continue
        fig, ax = plt.subplots(figsize=(5.5, 4))
        for mode in modes:
            pts = sorted((r.n, r.states_visited) for r in fam_rows if r.mode == mode)
            ax.plot([n for n, _ in pts], [s for _, s in pts],
                    marker="o", label=mode)
        ax.set_xlabel("instance size")
        ax.set_ylabel("states visited")
        ax.set_yscale("log")
        ax.set_title(family)
        ax.legend()
        fig.tight_layout()
        target = out_dir / f"{family}_states.png"
        fig.savefig(target, dpi=120)
        plt.close(fig)
        written.append(target)
    return written
