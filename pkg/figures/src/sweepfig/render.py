"""Grouped line plots from sweep CSVs.

One curve per algorithm, markers on every sweep point, optional log error
axis with zero-cell clipping, one panel per experiment facet when the
input mixes several (e.g. a mobility grid merged from multiple files).
Output is written as both PNG and SVG; rendering is read-only over the
CSVs and reproducible byte for byte.
"""

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import pandas as pd

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = ["FigureSpec", "RenderError", "render"]

CLIP_FLOOR = 1e-6

MARKERS = ["o", "s", "^", "d", "v", "p", "*", "x"]


class RenderError(ValueError):
    """Raised for missing columns, empty data, or unusable inputs."""


@dataclass
class FigureSpec:
    """What to plot: input CSVs, the x/y columns, grouping and scaling."""

    csv_paths: list
    x: str = "sweep_value"
    y: str = "ader_mean"
    group_by: str = "algorithm"
    facet_by: str = "experiment"
    log_y: bool = False
    x_label: str = ""
    y_label: str = ""
    title: str = ""
    # subcarrier spacing for the access-latency twin axis on length sweeps
    delta_f_hz: float = 15e3
    extra_columns: tuple = field(default_factory=tuple)


def _load(spec: FigureSpec) -> pd.DataFrame:
    frames = []
    for path in spec.csv_paths:
        if not Path(path).exists():
            raise RenderError(f"no such CSV: {path}")
        df = pd.read_csv(path)
        if df.empty:
            raise RenderError(f"CSV has no data rows: {path}")
        frames.append(df)
    data = pd.concat(frames, ignore_index=True)
    required = [spec.x, spec.y, spec.group_by, spec.facet_by, *spec.extra_columns]
    missing = [c for c in required if c not in data.columns]
    if missing:
        raise RenderError(f"missing column(s) {missing} in {list(spec.csv_paths)}")
    return data


def render(spec: FigureSpec, out_path: str) -> dict:
    """Write the figure as PNG and SVG next to ``out_path``.

    Returns a summary dict with the written paths, panel count, curve
    count and whether any cells were clipped on the log axis.
    """
    data = _load(spec)
    facets = list(dict.fromkeys(data[spec.facet_by]))
    n_panels = len(facets)

    plt.rcParams["svg.hashsalt"] = "sweepfig"
    fig, axes = plt.subplots(
        1, n_panels, figsize=(5.2 * n_panels, 4.0), squeeze=False, sharey=True
    )

    clipped_any = False
    curve_count = 0
    for ax, facet in zip(axes[0], facets):
        part = data[data[spec.facet_by] == facet]
        for idx, (name, grp) in enumerate(part.groupby(spec.group_by, sort=True)):
            grp = grp.sort_values(spec.x)
            y = grp[spec.y].astype(float).to_numpy()
            if spec.log_y:
                bad = ~(y > 0)
                if bad.any():
                    clipped_any = True
                y = y.clip(min=CLIP_FLOOR)
            ax.plot(grp[spec.x], y, marker=MARKERS[idx % len(MARKERS)],
                    label=str(name))
            curve_count += 1
        if spec.log_y:
            ax.set_yscale("log")
        ax.grid(True, which="both", alpha=0.3)
        ax.set_xlabel(spec.x_label or spec.x)
        if n_panels > 1:
            ax.set_title(str(facet), fontsize=10)
        ax.legend(fontsize=8)

        # length sweeps get the access-latency twin axis on top
        if set(part.get("sweep_param", [])) == {"L"}:
            sec = ax.secondary_xaxis(
                "top",
                functions=(lambda L: L / spec.delta_f_hz * 1e3,
                           lambda t: t * spec.delta_f_hz / 1e3),
            )
            sec.set_xlabel("access latency [ms]")

    axes[0][0].set_ylabel(spec.y_label or spec.y)
    if spec.title:
        fig.suptitle(spec.title)
    if clipped_any:
        fig.text(0.01, 0.01, f"zero values clipped to {CLIP_FLOOR:g}",
                 fontsize=7, style="italic")
    fig.tight_layout()

    base = Path(out_path).with_suffix("")
    written = []
    for suffix in (".png", ".svg"):
        target = base.with_suffix(suffix)
        target.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(target, dpi=150, metadata=_stable_metadata(suffix))
        written.append(str(target))
    plt.close(fig)
    return {
        "paths": written,
        "panels": n_panels,
        "curves": curve_count,
        "clipped": clipped_any,
    }


def _stable_metadata(suffix: str) -> dict:
    # keep re-renders byte-identical: no dates or creator strings
    if suffix == ".svg":
        return {"Date": None, "Creator": "sweepfig"}
    return {"Software": "sweepfig"}
