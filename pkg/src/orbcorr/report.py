"""Analysis reports: JSON round-trip, CSV matrices and SVG figures."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .entanglement import CorrelationTriple
from .ssr import SSR_MODES

MEASURES = ("I", "E", "C")
LN2 = math.log(2.0)
SWEEP_COLUMNS = ["t_over_u"] + [f"{m}_{mode}" for mode in SSR_MODES for m in MEASURES] + ["status"]


def _empty_matrix(n: int) -> list[list[float | None]]:
    return [[None] * n for _ in range(n)]


@dataclass(eq=True)
class AnalysisReport:
    """Single-orbital and pairwise correlations of one state, in nats.

    ``single_orbital[mode][k]`` is the triple of orbital ``k`` (0-based) or
    ``None`` when it was not requested. ``pairwise[mode][measure]`` is a
    symmetric matrix with ``None`` on the diagonal and on pairs that were not
    requested. ``pair_status`` lists one entry per computed pair and mode with
    its convergence flag and optimizer residual.
    """

    title: str
    orbital_count: int
    ssr_modes: list[str]
    single_orbital: dict[str, list[dict | None]] = field(default_factory=dict)
    pairwise: dict[str, dict[str, list[list[float | None]]]] = field(default_factory=dict)
    pair_status: list[dict] = field(default_factory=list)
    intrinsic_correlation: float | None = None
    ground_energy: float | None = None
    metadata: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, title: str, orbital_count: int, ssr_modes, metadata: dict | None = None) -> "AnalysisReport":
        modes = list(ssr_modes)
        return cls(
            title,
            orbital_count,
            modes,
            {m: [None] * orbital_count for m in modes},
            {m: {k: _empty_matrix(orbital_count) for k in MEASURES} for m in modes},
            [],
            metadata=dict(metadata or {}),
        )

    def set_single(self, k: int, triple: CorrelationTriple):
        self.single_orbital[triple.ssr_mode][k] = triple.as_dict()

    def set_pair(self, i: int, j: int, triple: CorrelationTriple, residual: float | None = None):
        mats = self.pairwise[triple.ssr_mode]
        for key, value in zip(MEASURES, (triple.total, triple.quantum, triple.classical)):
            mats[key][i][j] = mats[key][j][i] = value
        self.pair_status.append(
            {"i": i, "j": j, "ssr_mode": triple.ssr_mode, "converged": triple.converged, "residual": residual}
        )

    def pair(self, i: int, j: int, ssr_mode: str) -> CorrelationTriple | None:
        mats = self.pairwise[ssr_mode]
        if mats["I"][i][j] is None:
            return None
        flag = all(s["converged"] for s in self.pair_status
                   if s["ssr_mode"] == ssr_mode and {s["i"], s["j"]} == {i, j})
        return CorrelationTriple(mats["I"][i][j], mats["E"][i][j], mats["C"][i][j], ssr_mode, flag)

    def pairs(self) -> list[tuple[int, int]]:
        seen = sorted({(min(s["i"], s["j"]), max(s["i"], s["j"])) for s in self.pair_status})
        return seen

    @property
    def converged(self) -> bool:
        return all(s["converged"] for s in self.pair_status)

    def matrix(self, ssr_mode: str, measure: str) -> np.ndarray:
        """Matrix as floats with NaN for absent entries."""
        rows = self.pairwise[ssr_mode][measure]
        return np.array([[np.nan if v is None else v for v in row] for row in rows], dtype=float)

    # serialization

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "orbital_count": self.orbital_count,
            "ssr_modes": list(self.ssr_modes),
            "single_orbital": self.single_orbital,
            "pairwise": self.pairwise,
            "pair_status": self.pair_status,
            "intrinsic_correlation": self.intrinsic_correlation,
            "ground_energy": self.ground_energy,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisReport":
        return cls(
            data["title"],
            int(data["orbital_count"]),
            list(data["ssr_modes"]),
            data["single_orbital"],
            data["pairwise"],
            data["pair_status"],
            data["intrinsic_correlation"],
            data["ground_energy"],
            data["metadata"],
        )

    def to_json(self) -> str:
        # repr-exact floats; NaN and infinity are not valid report content
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def _scale(value, bits: bool):
    if value is None:
        return None
    return value / LN2 if bits else value


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def matrix_csv(report: AnalysisReport, ssr_mode: str, measure: str, bits: bool = False) -> str:
    """One matrix as CSV with 1-based orbital indices as row and column headers."""
    n = report.orbital_count
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["orbital"] + [str(k + 1) for k in range(n)])
    rows = report.pairwise[ssr_mode][measure]
    for i in range(n):
        writer.writerow([str(i + 1)] + [_fmt(_scale(v, bits)) for v in rows[i]])
    return buf.getvalue()


def single_orbital_csv(report: AnalysisReport, bits: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["orbital", "ssr_mode", "I", "E"])
    for mode in report.ssr_modes:
        for k, entry in enumerate(report.single_orbital[mode]):
            if entry is not None:
                writer.writerow([k + 1, mode, _fmt(_scale(entry["I"], bits)), _fmt(_scale(entry["E"], bits))])
    return buf.getvalue()


def sweep_csv(rows: list[dict], bits: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow(
            [_fmt(row["t_over_u"])]
            + [_fmt(_scale(row[c], bits)) for c in SWEEP_COLUMNS[1:-1]]
            + [row["status"]]
        )
    return buf.getvalue()


def _figure_backend():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return matplotlib, plt


def _save_svg(fig, path: Path):
    matplotlib, plt = _figure_backend()
    with matplotlib.rc_context({"svg.hashsalt": "orbcorr", "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def heatmap_svg(report: AnalysisReport, ssr_mode: str, measure: str, path: Path, bits: bool = False) -> Path:
    """Linear-scale heatmap of one matrix with every present value annotated."""
    _, plt = _figure_backend()
    data = report.matrix(ssr_mode, measure)
    if bits:
        data = data / LN2
    n = report.orbital_count
    finite = data[np.isfinite(data)]
    vmax = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
    size = 1.6 + 0.55 * n
    fig, ax = plt.subplots(figsize=(size + 1.2, size))
    cmap = plt.get_cmap("viridis").with_extremes(bad="lightgrey")
    im = ax.imshow(np.ma.masked_invalid(data), cmap=cmap, vmin=0.0, vmax=vmax, interpolation="nearest")
    ticks = np.arange(n)
    ax.set_xticks(ticks, [str(k + 1) for k in ticks])
    ax.set_yticks(ticks, [str(k + 1) for k in ticks])
    ax.set_xlabel("orbital")
    ax.set_ylabel("orbital")
    unit = "bits" if bits else "nats"
    ax.set_title(f"{measure} ({ssr_mode} SSR) [{unit}]")
    if n <= 16:
        for i in range(n):
            for j in range(n):
                if np.isfinite(data[i, j]):
                    color = "black" if data[i, j] > 0.6 * vmax else "white"
                    ax.text(j, i, f"{data[i, j]:.3f}", ha="center", va="center", fontsize=7, color=color)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    _save_svg(fig, path)
    return path


def sweep_svg(rows: list[dict], path: Path, bits: bool = False) -> Path:
    """I, E and C against t/U for every SSR mode on a logarithmic axis."""
    _, plt = _figure_backend()
    x = np.array([r["t_over_u"] for r in rows])
    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = {"I": "tab:blue", "E": "tab:red", "C": "tab:green"}
    styles = {"none": "-", "parity": "--", "number": ":"}
    for mode in SSR_MODES:
        for m in MEASURES:
            y = np.array([np.nan if r[f"{m}_{mode}"] is None else r[f"{m}_{mode}"] for r in rows], dtype=float)
            if bits:
                y = y / LN2
            ax.plot(x, y, styles[mode], color=colors[m], label=f"{m} ({mode})")
    ax.set_xscale("log")
    ax.set_xlabel("t/U")
    ax.set_ylabel("bits" if bits else "nats")
    ax.legend(ncol=3, fontsize=7)
    fig.tight_layout()
    _save_svg(fig, path)
    return path


def write_report(report: AnalysisReport, out_dir: Path, formats, stem: str = "report", bits: bool = False) -> list[Path]:
    """Emit the requested formats into ``out_dir``; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        path = out_dir / f"{stem}.json"
        path.write_text(report.to_json() + "\n")
        written.append(path)
    if "csv" in formats:
        path = out_dir / f"{stem}_single.csv"
        path.write_text(single_orbital_csv(report, bits))
        written.append(path)
        for mode in report.ssr_modes:
            for m in MEASURES:
                path = out_dir / f"{stem}_{m}_{mode}.csv"
                path.write_text(matrix_csv(report, mode, m, bits))
                written.append(path)
    if "svg" in formats:
        for mode in report.ssr_modes:
            for m in MEASURES:
                written.append(heatmap_svg(report, mode, m, out_dir / f"{stem}_{m}_{mode}.svg", bits))
    return written


def format_table(report: AnalysisReport, i: int, j: int, bits: bool = False) -> str:
    """Console table of one pair: rows I/E/C, one column per SSR mode."""
    unit = "bits" if bits else "nats"
    head = f"{'':10s}" + "".join(f"{m + ' SSR':>14s}" for m in report.ssr_modes)
    lines = [f"orbitals {i + 1},{j + 1} [{unit}]", head]
    names = {"I": "total", "E": "quantum", "C": "classical"}
    for m in MEASURES:
        cells = []
        for mode in report.ssr_modes:
            v = _scale(report.pairwise[mode][m][i][j], bits)
            cells.append(f"{'-' if v is None else f'{v:.6f}':>14s}")
        lines.append(f"{names[m]:10s}" + "".join(cells))
    return "\n".join(lines)


__all__ = [
    "AnalysisReport",
    "MEASURES",
    "SWEEP_COLUMNS",
    "format_table",
    "heatmap_svg",
    "matrix_csv",
    "single_orbital_csv",
    "sweep_csv",
    "sweep_svg",
    "write_report",
]
