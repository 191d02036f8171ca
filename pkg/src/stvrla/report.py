"""Files for --report-dir: CSV tables and PNG figures next to the JSON report."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

from matplotlib.figure import Figure

from .plan import PlannedAssertion
from .serialize import dec

STYLE = {"figsize": (7.0, 4.0), "dpi": 120}


def _prepare(directory) -> Path:
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _save(fig: Figure, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path)
    return path


def write_json(directory, payload: dict, name: str = "report.json") -> Path:
    path = _prepare(directory) / name
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def write_csv(path: Path, header: Sequence[str], rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def tabulation_files(directory, trace, election) -> list[Path]:
    out = _prepare(directory)
    names = election.candidates
    rows = []
    for r in trace.rounds:
        for c, t in r.tallies.items():
            rows.append([r.index, names[c], dec(t), r.action.kind.value,
                         " ".join(names[s] for s in r.action.subject)])
    files = [write_csv(out / "rounds.csv", ["round", "candidate", "tally", "action", "subject"], rows)]

    fig = Figure(**STYLE)
    ax = fig.add_subplot()
    for c in sorted({c for r in trace.rounds for c in r.tallies}):
        pts = [(r.index, float(r.tallies[c])) for r in trace.rounds if c in r.tallies]
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", label=names[c])
    ax.axhline(trace.quota, color="0.4", linestyle="--", linewidth=1, label="quota")
    ax.set_xlabel("round")
    ax.set_ylabel("tally at start of round")
    ax.legend(fontsize=8, ncol=2)
    files.append(_save(fig, out / "tallies.png"))
    return files


def plan_files(directory, items: Sequence[PlannedAssertion], names: Sequence[str],
               overall: int | None, trials=None) -> list[Path]:
    out = _prepare(directory)
    rows = [
        [it.assertion.describe(names), it.assertion.kind, dec(it.margin),
         "" if it.asn is None else it.asn]
        for it in items
    ]
    files = [write_csv(out / "assertions.csv", ["assertion", "type", "margin", "asn"], rows)]

    if items:
        fig = Figure(figsize=(7.0, 1.0 + 0.35 * len(items)), dpi=STYLE["dpi"])
        ax = fig.add_subplot()
        labels = [r[0] for r in rows]
        ax.barh(range(len(items)), [it.cost if it.asn is not None else 0 for it in items],
                color="tab:blue")
        ax.set_yticks(range(len(items)), labels, fontsize=8)
        ax.invert_yaxis()
        if overall is not None:
            ax.axvline(overall, color="tab:red", linestyle="--", linewidth=1, label=f"overall {overall}")
            ax.legend(fontsize=8)
        ax.set_xlabel("expected sample size (ballots)")
        files.append(_save(fig, out / "asn.png"))

    if trials:
        fig = Figure(**STYLE)
        ax = fig.add_subplot()
        lowers = sorted({t.tau_lower for t in trials})
        for lo in lowers:
            pts = [(float(t.tau_upper), t.asn) for t in trials if t.tau_lower == lo and t.asn is not None]
            if pts:
                xs, ys = zip(*pts)
                ax.plot(xs, ys, marker="o", label=f"lower bound {float(lo):.4f}")
        ax.set_xlabel("upper bound on first winner's transfer value")
        ax.set_ylabel("audit ASN")
        ax.legend(fontsize=8)
        files.append(_save(fig, out / "bounds.png"))
        write_csv(out / "bounds.csv", ["tau_lower", "tau_upper", "asn", "accepted"],
                  [[dec(t.tau_lower), dec(t.tau_upper), "" if t.asn is None else t.asn, t.accepted]
                   for t in trials])
        files.append(out / "bounds.csv")
    return files


def sim_files(directory, sim, estimate: int | None = None) -> list[Path]:
    out = _prepare(directory)
    files = [write_csv(out / "samples.csv", ["trial", "sample"], enumerate(sim.samples))]
    fig = Figure(**STYLE)
    ax = fig.add_subplot()
    ax.hist(sim.samples, bins=min(40, max(5, len(set(sim.samples)))), color="tab:blue", alpha=0.8)
    ax.axvline(sim.mean_sample, color="k", linewidth=1, label=f"mean {sim.mean_sample:.1f}")
    if estimate is not None:
        ax.axvline(estimate, color="tab:red", linestyle="--", linewidth=1, label=f"estimate {estimate}")
    ax.set_xlabel("ballots drawn")
    ax.set_ylabel("trials")
    ax.legend(fontsize=8)
    files.append(_save(fig, out / "samples.png"))
    return files
