"""Gnuplot script generation for trace CSVs."""
from __future__ import annotations

import math
from pathlib import Path


def emit_plot_script(traces: dict, path: str | Path, title: str = "",
                     panels: list[list[str]] | None = None) -> Path:
    """Write a gnuplot script plotting ``{label: csv_path}``.

    Without ``panels`` every trace goes into one pair of panels (log-log MSE,
    linear scaled MSE). ``panels`` groups labels per row; four groups give a
    2x2 layout of MSE panels.
    """
    if not traces:
        raise ValueError("need at least one trace")
    path = Path(path)
    items = [(label or Path(csv).stem, str(csv)) for label, csv in traces.items()]
    lines = ["set datafile separator ','", "set key top right", "set grid"]
    if title:
        lines.append(f"set title '{title}'")

    def plot(col, entries):
        parts = [f"'{csv}' using 1:{col} skip 1 with lines title '{label}'"
                 for label, csv in entries]
        return "plot " + ", \\\n     ".join(parts)

    if panels:
        lookup = dict(items)
        cols = 2 if len(panels) == 4 else 1
        rows = math.ceil(len(panels) / cols)
        lines.append(f"set multiplot layout {rows},{cols}")
        lines += ["set logscale xy", "set xlabel 't'", "set ylabel 'MSE'"]
        for group in panels:
            lines.append(plot(2, [(g, lookup[g]) for g in group]))
        lines.append("unset multiplot")
    else:
        lines += ["set multiplot layout 1,2",
                  "set logscale xy", "set xlabel 't'", "set ylabel 'MSE'", plot(2, items),
                  "unset logscale y", "set ylabel 'scaled MSE'", plot(3, items),
                  "unset multiplot"]
    path.write_text("\n".join(lines) + "\n")
    return path
