"""Trace CSV files and static plots.

A trace file starts with ``#``-prefixed ``key=value`` metadata lines,
followed by the header::

    iter,time_s,f,primal,dmin,lmo_1,...,lmo_m,f_evals,grad_evals,M_t

Missing values (no known optimum, no stored iterate, short steps without
``M_t``) are written as empty fields. Floats use ``repr`` so a file reads
back to exactly the values written.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Iterable, Mapping, Sequence

FIXED_HEAD = ["iter", "time_s", "f", "primal", "dmin"]
FIXED_TAIL = ["f_evals", "grad_evals", "M_t"]


def trace_header(m: int) -> list[str]:
    return FIXED_HEAD + [f"lmo_{i}" for i in range(1, m + 1)] + FIXED_TAIL


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _parse(s: str):
    if s == "":
        return None
    if s.lstrip("-").isdigit():
        return int(s)
    return float(s)


def write_trace_csv(rows: Sequence[Mapping], path, m: int | None = None, metadata: Mapping | None = None) -> Path:
    """Write trace rows (mappings keyed by header names) to ``path``.

    ``m`` (number of LMO columns) is inferred from the first row when
    omitted; an empty trace needs it explicitly and yields a header-only
    file.
    """
    if m is None:
        if not rows:
            raise ValueError("m is required to write an empty trace")
        m = sum(1 for k in rows[0] if k.startswith("lmo_"))
    header = trace_header(m)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for k, v in (metadata or {}).items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row.get(col)) for col in header])
    return path


def read_trace_csv(path) -> tuple[list[dict], dict]:
    """Read a trace file; returns ``(rows, metadata)``."""
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key] = val
        elif line:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    rows = [{col: _parse(v) for col, v in zip(header, rec)} for rec in reader]
    return rows, meta


def emit_plots(csv_paths: Iterable[os.PathLike | str], out_dir) -> list[Path]:
    """Render log-y SVG line plots from averaged traces.

    Traces are grouped by their ``experiment`` metadata. For each group the
    optimality measure (``primal`` if present, else ``dmin``) is drawn
    against iterations, time and the expensive-oracle count (the last LMO
    column), one SVG per panel, one line per strategy.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    groups: dict[str, list[tuple[str, list[dict], str]]] = {}
    for p in csv_paths:
        rows, meta = read_trace_csv(p)
        if not rows:
            continue
        lmo_cols = [k for k in rows[0] if k.startswith("lmo_")]
        groups.setdefault(meta.get("experiment", "trace"), []).append((meta.get("strategy", Path(p).stem), rows, lmo_cols[-1]))

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for exp, series in sorted(groups.items()):
        has_primal = any(r["primal"] is not None for _, rows, _ in series for r in rows)
        ycol = "primal" if has_primal else "dmin"
        for xcol, xlabel in (("iter", "iteration"), ("time_s", "time (s)"), (None, "expensive LMO calls")):
            fig, ax = plt.subplots(figsize=(5, 4))
            for label, rows, expensive in series:
                key = xcol or expensive
                pts = [(r[key], r[ycol]) for r in rows if r[ycol] is not None and r[ycol] > 0]
                if pts:
                    xs, ys = zip(*pts)
                    ax.plot(xs, ys, label=label)
            ax.set_yscale("log")
            ax.set_xlabel(xlabel)
            ax.set_ylabel("f(x) - f*" if ycol == "primal" else "min FW gap")
            ax.set_title(exp)
            ax.grid(True, which="both", alpha=0.3)
            ax.legend(fontsize="small")
            fig.tight_layout()
            name = out_dir / f"{exp}_{ycol}_vs_{xcol or 'expensive_lmo'}.svg"
            fig.savefig(name, format="svg")
            plt.close(fig)
            written.append(name)
    return written
