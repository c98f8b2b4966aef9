"""Render benchmark CSVs into figures.

Two figure kinds:

* ``violins``: distribution of a threshold column (e.g. iterations_to_99)
  per entropy group.  Violin bodies are bounded by blue min/max lines, with
  a blue mean line and a red median line inside.  The default grouping is
  the six benchmark groups: shannon, renyi_averse, renyi_ignorant, rqe
  (the quadratic renyi member, family == renyi and theta == 2), and the
  averse/ignorant behavioral groups.
* ``curves``: one line per spec from a (p, spec, entropy) table.

Rendering is a pure function of the CSV: the returned "data layer" (the
exact arrays handed to matplotlib, plus their summary statistics) is
deterministic and is what golden tests compare, image metadata aside.
Statistics are always computed from the raw rows, never pre-aggregated.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["PlotSpec", "RenderError", "render"]

BENCHMARK_GROUPS = (
    "shannon",
    "renyi_averse",
    "renyi_ignorant",
    "rqe",
    "behavioral_averse",
    "behavioral_ignorant",
)


class RenderError(Exception):
    """Bad plot input: missing file/column or an empty group."""


@dataclass(frozen=True)
class PlotSpec:
    kind: str  # "curves" | "violins"
    csv_path: str
    out_path: str
    group_by: tuple[str, ...] = ("spec_group",)
    threshold_column: str = "iterations_to_99"

    def __post_init__(self) -> None:
        if self.kind not in ("curves", "violins"):
            raise RenderError(f"kind must be 'curves' or 'violins', got {self.kind!r}")


def _read_csv(path: str) -> tuple[list[str], list[dict[str, str]]]:
    p = Path(path)
    if not p.exists():
        raise RenderError(f"input CSV {p} does not exist")
    with p.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise RenderError(f"{p}: empty CSV")
        rows = list(reader)
    return list(reader.fieldnames), rows


def _require_columns(header: list[str], needed, path: str) -> None:
    missing = [c for c in needed if c not in header]
    if missing:
        raise RenderError(f"{path}: missing column(s) {missing}")


def _violin_groups(spec: PlotSpec, header, rows):
    """Ordered (label, values) pairs; the spec_group default adds the rqe group."""
    _require_columns(header, list(spec.group_by) + [spec.threshold_column], spec.csv_path)

    def values_of(selected) -> np.ndarray:
        vals = [
            float(r[spec.threshold_column])
            for r in selected
            if r[spec.threshold_column] not in ("", "none")
        ]
        return np.array(vals)

    groups: list[tuple[str, np.ndarray]] = []
    if spec.group_by == ("spec_group",):
        _require_columns(header, ["family", "theta"], spec.csv_path)
        for name in BENCHMARK_GROUPS:
            if name == "rqe":
                selected = [
                    r
                    for r in rows
                    if r["family"] == "renyi" and float(r["theta"]) == 2.0
                ]
            else:
                selected = [r for r in rows if r["spec_group"] == name]
            if selected:
                groups.append((name, values_of(selected)))
    else:
        seen: dict[tuple, list[dict]] = {}
        for r in rows:
            key = tuple(r[c] for c in spec.group_by)
            seen.setdefault(key, []).append(r)
        for key in sorted(seen):
            groups.append(("/".join(key), values_of(seen[key])))

    if not groups:
        raise RenderError(f"{spec.csv_path}: no groups to plot")
    for name, values in groups:
        if values.size == 0:
            raise RenderError(f"{spec.csv_path}: group {name!r} has no data rows")
    return groups


def _render_violins(spec: PlotSpec) -> dict:
    header, rows = _read_csv(spec.csv_path)
    groups = _violin_groups(spec, header, rows)

    layer = {
        "kind": "violins",
        "threshold": spec.threshold_column,
        "groups": [
            {
                "label": name,
                "values": [float(v) for v in values],
                "min": float(values.min()),
                "max": float(values.max()),
                "mean": float(values.mean()),
                "median": float(np.median(values)),
            }
            for name, values in groups
        ],
    }

    fig, ax = plt.subplots(figsize=(1.6 * len(groups) + 1.5, 4.5))
    positions = np.arange(1, len(groups) + 1)
    ax.violinplot(
        [g["values"] for g in layer["groups"]],
        positions=positions,
        showmeans=False,
        showmedians=False,
        showextrema=False,
    )
    half = 0.28
    for x, g in zip(positions, layer["groups"]):
        ax.hlines([g["min"], g["max"]], x - half, x + half, color="tab:blue", lw=1.2)
        ax.hlines(g["mean"], x - half, x + half, color="tab:blue", lw=2.0)
        ax.hlines(g["median"], x - half, x + half, color="tab:red", lw=2.0)
    ax.set_xticks(positions)
    ax.set_xticklabels([g["label"] for g in layer["groups"]], rotation=20, ha="right")
    ax.set_ylabel(spec.threshold_column)
    fig.tight_layout()
    fig.savefig(spec.out_path)
    plt.close(fig)
    return layer


def _render_curves(spec: PlotSpec) -> dict:
    header, rows = _read_csv(spec.csv_path)
    _require_columns(header, ["p", "spec"], spec.csv_path)
    value_cols = [c for c in header if c not in ("p", "spec")]
    if len(value_cols) != 1:
        raise RenderError(
            f"{spec.csv_path}: expected exactly one value column besides "
            f"p/spec, found {value_cols}"
        )
    value_col = value_cols[0]
    series: dict[str, dict[str, list[float]]] = {}
    for r in rows:
        entry = series.setdefault(r["spec"], {"p": [], "value": []})
        entry["p"].append(float(r["p"]))
        entry["value"].append(float(r[value_col]))
    if not series:
        raise RenderError(f"{spec.csv_path}: no curve rows")

    layer = {
        "kind": "curves",
        "value_column": value_col,
        "series": [
            {"label": label, "p": data["p"], "value": data["value"]}
            for label, data in series.items()
        ],
    }
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for s in layer["series"]:
        ax.plot(s["p"], s["value"], label=s["label"], lw=1.6)
    ax.set_xlabel("p")
    ax.set_ylabel(value_col)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.out_path)
    plt.close(fig)
    return layer


def render(spec: PlotSpec) -> dict:
    """Write the figure for ``spec`` and return its data layer."""
    Path(spec.out_path).parent.mkdir(parents=True, exist_ok=True)
    if spec.kind == "violins":
        return _render_violins(spec)
    return _render_curves(spec)
