"""Deterministic artifact writers: JSON, CSV and SVG figures.

SVGs are rendered through matplotlib's SVG backend with a fixed hash salt and no
date stamp so reruns are byte-identical; each figure embeds its data table
as CSV inside a ``<desc>`` element.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "liouville"
matplotlib.rcParams["svg.fonttype"] = "path"


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    """Sorted, indented JSON; non-finite floats become strings."""
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{x:.17e}" if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _save(fig, path, data_csv: str) -> Path:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    svg = buf.getvalue()
    head_end = svg.index(">", svg.index("<svg")) + 1
    svg = svg[:head_end] + "\n<desc>" + escape(data_csv) + "</desc>" + svg[head_end:]
    return write_text(path, svg)


def plot_shells(radii, means, path, exponent=None) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.loglog(radii, means, "o-", color="k", lw=1)
    title = "shell mean |p|"
    if exponent is not None and math.isfinite(exponent):
        title += f"  (slope {exponent:.3f})"
    ax.set_title(title)
    ax.set_xlabel("r")
    ax.set_ylabel("mean |p|")
    fig.tight_layout()
    return _save(fig, path, table_csv(["r", "mean_abs_p"], zip(map(float, radii), map(float, means))))


def plot_scan(header, rows, path) -> Path:
    """``header``/``rows`` as in scan.csv (strings are accepted)."""
    data = [[float(x) for x in r] for r in rows]
    R = [r[0] for r in data]
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    for i, name in enumerate(header[1:], start=1):
        if name == "total":
            continue
        ax.plot(R, [r[i] for r in data], marker=".", lw=1, label=name)
    ax.set_xlabel("R")
    ax.set_title("cutoff ledger")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return _save(fig, path, table_csv(header, data))


def plot_series(header, rows, path) -> Path:
    cols = {name: i for i, name in enumerate(header)}
    t = [float(r[cols["t"]]) for r in rows]
    fig, (a, b) = plt.subplots(2, 1, figsize=(5.5, 5), sharex=True)
    for name in ("E1", "E2", "pv_estimate"):
        a.plot(t, [float(r[cols[name]]) for r in rows], marker=".", lw=1, label=name)
    a.legend(fontsize=7)
    a.set_title("component energies and PV pressure integral")
    b.semilogy(t, [max(float(r[cols["equipartition_defect"]]), 1e-300) for r in rows], marker=".", lw=1, label="equipartition")
    b.semilogy(t, [max(float(r[cols["cross_defect"]]), 1e-300) for r in rows], marker=".", lw=1, label="cross")
    b.set_xlabel("t")
    b.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path, table_csv(header, rows))


def render_directory(out_dir) -> list[Path]:
    """Render every figure whose data file exists in ``out_dir``."""
    out_dir = Path(out_dir)
    made = []
    if (out_dir / "scan.csv").exists():
        made.append(plot_scan(*read_csv(out_dir / "scan.csv"), out_dir / "scan.svg"))
    if (out_dir / "series.csv").exists():
        made.append(plot_series(*read_csv(out_dir / "series.csv"), out_dir / "series.svg"))
    if (out_dir / "shells.csv").exists():
        _, rows = read_csv(out_dir / "shells.csv")
        made.append(plot_shells([float(r[0]) for r in rows], [float(r[1]) for r in rows], out_dir / "shells.svg"))
    return made
