"""Benchmark output: the delimited table and the two figures.

The table is tab-separated with a header row, one row per (pair count,
keyword position) sample. Figures render to files next to it: build
op-count against pair count with its least-squares line, and hop count
against keyword position, one series per pair count.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .bench import BenchRow
from .errors import ParameterError

TSV_HEADER = ("pairs", "keyword_pos", "index_ops", "index_seconds", "hops", "search_seconds")


def write_tsv(rows: list[BenchRow], path: str | Path) -> Path:
    path = Path(path)
    lines = ["\t".join(TSV_HEADER)]
    for r in rows:
        lines.append(
            f"{r.pairs}\t{r.keyword_pos}\t{r.index_ops}\t"
            f"{r.index_seconds:.6f}\t{r.hops}\t{r.search_seconds:.6f}"
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def read_tsv(path: str | Path) -> list[BenchRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or tuple(lines[0].split("\t")) != TSV_HEADER:
        raise ParameterError(f"{path} lacks the expected header row")
    rows = []
    for line in lines[1:]:
        p, kp, io, isec, h, ssec = line.split("\t")
        rows.append(BenchRow(int(p), int(kp), int(io), float(isec), int(h), float(ssec)))
    return rows


def linear_fit(xs: list[float], ys: list[float]) -> tuple[float, float, float]:
    """Least squares y = a·x + b; returns (a, b, R²)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 2:
        raise ParameterError("need at least two points for a fit")
    a, b = np.polyfit(x, y, 1)
    pred = a * x + b
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(a), float(b), r2


def build_series(rows: list[BenchRow]) -> tuple[list[int], list[int]]:
    """(pair counts, build op-counts), one point per pair count."""
    seen: dict[int, int] = {}
    for r in rows:
        seen[r.pairs] = r.index_ops
    pairs = sorted(seen)
    return pairs, [seen[p] for p in pairs]


def render_figures(rows: list[BenchRow], out_dir: str | Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    pairs, ops = build_series(rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(pairs, ops, "o", label="measured")
    if len(pairs) >= 2:
        a, b, r2 = linear_fit(pairs, ops)
        xs = np.linspace(min(pairs), max(pairs), 50)
        ax.plot(xs, a * xs + b, "-", label=f"fit: {a:.1f}·x+{b:.1f} (R²={r2:.4f})")
    ax.set_xlabel("keyword-document pairs")
    ax.set_ylabel("index build operations")
    ax.set_title("Index construction cost")
    ax.legend()
    fig.tight_layout()
    p = out_dir / "index_build.png"
    fig.savefig(p)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(6, 4))
    for pc in sorted({r.pairs for r in rows}):
        series = sorted((r.keyword_pos, r.hops) for r in rows if r.pairs == pc)
        ax.plot([s[0] for s in series], [s[1] for s in series], "o-", label=f"{pc} pairs")
    ax.set_xlabel("keyword position in dictionary order")
    ax.set_ylabel("records read (hops)")
    ax.set_title("Search traversal cost")
    ax.legend()
    fig.tight_layout()
    p = out_dir / "search_hops.png"
    fig.savefig(p)
    plt.close(fig)
    paths.append(p)
    return paths
