"""Figure builders and the render_fig command line.

Figure ids follow the reference layout:

    1a/2a  <X>, <Y> versus tau          (X solid, Y dashed)
    1b/2b  dX, dY versus tau            (X solid, Y dashed)
    1c/2c  <L>, dL versus tau           (solid, dashed)
    1/2    the three panels stacked
    3      position-density heat maps at the listed times
    4a     jump-count histogram, bins of width 5 in tau
    4b     simulated dX overlaid with the analytic recoil-free curve

A spec is a JSON object: {"figure": id, "series_csv": path,
"cl_csv": path, "density_csvs": [paths], "out": path}; inputs not needed
by the figure id may be omitted.  Rendering is a pure function of the
CSV contents.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import SeriesTable, SpecError, read_density, read_series

_PANELS = {
    "a": (("mean_x", "<X>", "-"), ("mean_y", "<Y>", "--")),
    "b": (("var_x", "dX", "-"), ("var_y", "dY", "--")),
    "c": (("mean_L", "<L>", "-"), ("var_L", "dL", "--")),
}


def _panel(ax, table: SeriesTable, which: str):
    tau = table.column("tau")
    for name, label, style in _PANELS[which]:
        values = table.column(name)
        if name.startswith("var_"):
            values = np.sqrt(np.maximum(values, 0.0))
        ax.plot(tau, values, style, color="k", linewidth=1.0, label=label)
    ax.set_xlabel("tau")
    ax.set_ylabel(" , ".join(lbl for _, lbl, _ in _PANELS[which]))
    ax.legend(frameon=False, fontsize=8)


def _series_figure(spec: dict, panels: str):
    table = read_series(_need(spec, "series_csv"))
    fig, axes = plt.subplots(
        len(panels), 1, figsize=(5.0, 2.6 * len(panels)), squeeze=False
    )
    for ax, which in zip(axes[:, 0], panels):
        _panel(ax, table, which)
    fig.tight_layout()
    return fig


def _density_figure(spec: dict):
    paths = spec.get("density_csvs") or []
    if not paths:
        raise SpecError("figure 3 needs density_csvs")
    n = len(paths)
    ncol = min(4, n)
    nrow = (n + ncol - 1) // ncol
    fig, axes = plt.subplots(
        nrow, ncol, figsize=(3.0 * ncol, 2.8 * nrow), squeeze=False
    )
    for ax in axes.ravel()[n:]:
        ax.set_axis_off()
    for ax, path in zip(axes.ravel(), paths):
        grid, meta = read_density(path)
        ax.imshow(
            grid.T,
            origin="lower",
            extent=(meta["x_min"], meta["x_max"], meta["y_min"], meta["y_max"]),
            cmap="gray_r",
            aspect="equal",
        )
        ax.set_title(f"tau = {meta['tau']:g}", fontsize=9)
        ax.set_xlabel("X")
        ax.set_ylabel("Y")
    fig.tight_layout()
    return fig


def _histogram_figure(spec: dict, bin_width: float = 5.0):
    table = read_series(_need(spec, "series_csv"))
    tau = table.column("tau")
    jumps = table.column("jumps_in_bin")
    edges = np.arange(0.0, tau[-1] + bin_width * 0.999, bin_width)
    if edges[-1] < tau[-1]:
        edges = np.append(edges, tau[-1])
    counts = np.zeros(len(edges) - 1)
    for k in range(len(counts)):
        sel = (tau > edges[k]) & (tau <= edges[k + 1])
        counts[k] = jumps[sel].sum()
    fig, ax = plt.subplots(figsize=(5.0, 3.0))
    ax.bar(edges[:-1], counts, width=np.diff(edges), align="edge",
           color="0.6", edgecolor="k")
    ax.set_xlabel("tau")
    ax.set_ylabel("jumps per interval")
    fig.tight_layout()
    return fig


def _overlay_figure(spec: dict):
    table = read_series(_need(spec, "series_csv"))
    cl = read_series(_need(spec, "cl_csv"))
    fig, ax = plt.subplots(figsize=(5.0, 3.0))
    ax.plot(
        table.column("tau"),
        np.sqrt(np.maximum(table.column("var_x"), 0.0)),
        "-",
        color="k",
        linewidth=1.0,
        label="simulated dX",
    )
    ax.plot(
        cl.column("tau"),
        cl.column("cl_dx"),
        "--",
        color="k",
        linewidth=1.0,
        label="analytic (no recoil)",
    )
    ax.set_xlabel("tau")
    ax.set_ylabel("dX")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return fig


def _need(spec: dict, key: str) -> str:
    value = spec.get(key)
    if not value:
        raise SpecError(f"figure {spec.get('figure')!r} needs {key!r}")
    return value


def build_figure(spec: dict):
    fig_id = str(spec.get("figure", "")).lower()
    if fig_id in ("1", "2"):
        return _series_figure(spec, "abc")
    if len(fig_id) == 2 and fig_id[0] in "12" and fig_id[1] in _PANELS:
        return _series_figure(spec, fig_id[1])
    if fig_id == "3":
        return _density_figure(spec)
    if fig_id == "4a":
        return _histogram_figure(spec, float(spec.get("bin_width", 5.0)))
    if fig_id == "4b":
        return _overlay_figure(spec)
    raise SpecError(f"unknown figure id {spec.get('figure')!r}")


def render(spec: dict, out_path: str | Path) -> Path:
    fig = build_figure(spec)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="render_fig",
                                 description="Render a figure from CSV output")
    ap.add_argument("--spec", required=True, help="JSON figure spec")
    ap.add_argument("--out", default=None, help="output image (overrides spec)")
    args = ap.parse_args(argv)
    try:
        spec_path = Path(args.spec)
        spec = json.loads(spec_path.read_text())
        out = args.out or spec.get("out")
        if not out:
            raise SpecError("no output path: pass --out or put 'out' in the spec")
        # relative input paths resolve against the spec file's directory
        for key in ("series_csv", "cl_csv"):
            if spec.get(key):
                spec[key] = str((spec_path.parent / spec[key]).resolve())
        if spec.get("density_csvs"):
            spec["density_csvs"] = [
                str((spec_path.parent / p).resolve()) for p in spec["density_csvs"]
            ]
        path = render(spec, out)
    except (OSError, json.JSONDecodeError, SpecError) as exc:
        print(f"render_fig: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
