"""CSV and SVG output for sweep results."""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import Row, SweepResult  # noqa: E402

ROW_FIELDS = ["sweep_value", "trial", "seed", "rate_bits", "rate_user", "rate_eve", "iters", "status"]
SUMMARY_FIELDS = ["sweep_value", "mean", "median", "p10", "p90", "skip_fraction"]


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def _write_csv(path: Path, fields, rows):
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(fields)
            for r in rows:
                w.writerow([_fmt(r[k]) for k in fields])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_rows(result: SweepResult, path: Path):
    _write_csv(path, ROW_FIELDS, [r.__dict__ for r in result.rows])


def write_summary(result: SweepResult, path: Path):
    _write_csv(path, SUMMARY_FIELDS, result.summary())


def read_rows(path) -> list[Row]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        out = []
        for d in csv.DictReader(fh):
            sv = d["sweep_value"]
            out.append(Row(int(sv) if sv.lstrip("-").isdigit() else float(sv),
                           int(d["trial"]), int(d["seed"]), float(d["rate_bits"]),
                           float(d["rate_user"]), float(d["rate_eve"]), int(d["iters"]), d["status"]))
        return out


def plot_sweep(result: SweepResult, path: Path):
    summ = result.summary()
    x = [s["sweep_value"] for s in summ]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.fill_between(x, [s["p10"] for s in summ], [s["p90"] for s in summ], alpha=0.25, label="p10-p90")
    ax.plot(x, [s["median"] for s in summ], marker="o", ms=3, label="median")
    ax.plot(x, [s["mean"] for s in summ], ls="--", lw=1, label="mean")
    ax.set_xlabel(result.axis)
    ax.set_ylabel("secrecy rate (bits/s/Hz)")
    ax.set_title(result.name)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    # fixed salt and no date keep the SVG byte-stable across runs
    with matplotlib.rc_context({"svg.hashsalt": "xlris"}):
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        finally:
            plt.close(fig)


def emit_outputs(results, out_dir) -> list[Path]:
    """Writes ``<name>.csv``, ``<name>_summary.csv`` and ``<name>.svg`` per sweep."""
    if isinstance(results, SweepResult):
        results = [results]
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    written = []
    for res in results:
        paths = (out_dir / f"{res.name}.csv", out_dir / f"{res.name}_summary.csv", out_dir / f"{res.name}.svg")
        write_rows(res, paths[0])
        write_summary(res, paths[1])
        plot_sweep(res, paths[2])
        written.extend(paths)
    return written
