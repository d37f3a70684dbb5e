"""Rendering of sweep CSV tables into publication-style figures.

The input is the sweep CSV produced by the sptmqc CLI (columns
theta,phi,m,fidelity,O_z,O_x,zeta_z,xi,xi_tilde,degenerate; leading ``#``
comment lines allowed).  Two figure kinds are supported:

* ``fig2_row``      — one theta row scanned across phi;
* ``fig3_traverse`` — a north-to-south traversal at fixed phi.

Values are never altered: cells are kept as their original strings, floats
are parsed only for plotting, and ``dump`` re-emits the plotted series
verbatim so round trips are byte-identical.  ``inf`` sentinels are drawn as
clipped markers at the top of the axis with a legend note; rows flagged
degenerate get a distinct overlay marker.
"""

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

REQUIRED_COLUMNS = ("theta", "phi", "m", "degenerate")
#: columns with a fixed [0, 1] scale so figures are comparable across sweeps
UNIT_SCALE_COLUMNS = ("fidelity", "O_z", "O_x")
X_COLUMN = {"fig2_row": "phi", "fig3_traverse": "theta"}


class SchemaError(Exception):
    """The CSV does not carry the columns or rows the figure needs."""


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input table, figure kind, column, output image."""

    input_csv: str
    figure: str
    quantity: str
    output: str
    title: str = ""
    dpi: int = 150


@dataclass
class Table:
    header: list
    rows: list = field(default_factory=list)

    def column(self, name):
        try:
            idx = self.header.index(name)
        except ValueError:
            raise SchemaError(f"column {name!r} not in header {self.header}") from None
        return [row[idx] for row in self.rows]


def load_table(path):
    """Read a sweep CSV keeping every cell as its original string."""
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh if not line.startswith("#")]
    lines = [line for line in lines if line]
    if not lines:
        raise SchemaError("CSV has no header")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    if not rows:
        raise SchemaError("CSV body is empty")
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"row width {len(row)} != header width {len(header)}")
    return Table(header=header, rows=rows)


def _check_columns(table, spec):
    for name in REQUIRED_COLUMNS + (spec.quantity,):
        if name not in table.header:
            raise SchemaError(f"column {name!r} missing from {spec.input_csv}")
    if spec.figure not in X_COLUMN:
        raise SchemaError(f"unknown figure kind {spec.figure!r}")


def select_series(table, spec):
    """The plotted series: (x string, m string, value string) per row,
    grouped by m, in input row order."""
    _check_columns(table, spec)
    xcol = X_COLUMN[spec.figure]
    xs = table.column(xcol)
    ms = table.column("m")
    vals = table.column(spec.quantity)
    degs = table.column("degenerate")
    series = {}
    for x, m, v, dg in zip(xs, ms, vals, degs):
        series.setdefault(m, []).append((x, v, dg))
    return xcol, series


def _m_label(m):
    return "limit" if m == "-1" else f"m = {m}"


def _m_sort_key(m):
    v = int(m)
    return (v == -1, v)  # finite depths first, the limit last


def render(spec):
    """Write the figure to ``spec.output`` (format from the extension)."""
    table = load_table(spec.input_csv)
    xcol, series = select_series(table, spec)

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    unit_scale = spec.quantity in UNIT_SCALE_COLUMNS
    finite_max = 0.0
    for m in series:
        for _, v, _ in series[m]:
            if v != "inf":
                finite_max = max(finite_max, abs(float(v)))
    clip = 1.05 if unit_scale else (1.1 * finite_max if finite_max else 1.0)

    any_clipped = False
    for m in sorted(series, key=_m_sort_key):
        pts = series[m]
        xs = [float(x) for x, _, _ in pts]
        ys, clipped_x, deg_x, deg_y = [], [], [], []
        for x, v, dg in pts:
            if v == "inf":
                ys.append(clip)
                clipped_x.append(float(x))
            else:
                ys.append(float(v))
            if dg == "1":
                deg_x.append(float(x))
                deg_y.append(ys[-1])
        (line,) = ax.plot(xs, ys, marker=".", markersize=3, linewidth=1.0,
                          label=_m_label(m))
        if clipped_x:
            any_clipped = True
            ax.plot(clipped_x, [clip] * len(clipped_x), linestyle="none",
                    marker="^", markersize=7, color=line.get_color())
        if deg_x:
            ax.plot(deg_x, deg_y, linestyle="none", marker="x", markersize=7,
                    color="black", zorder=5)

    if unit_scale:
        ax.set_ylim(-0.02, 1.07)
    ax.set_xlabel(xcol)
    ax.set_ylabel(spec.quantity)
    handles, labels = ax.get_legend_handles_labels()
    if any_clipped:
        handles.append(plt.Line2D([], [], linestyle="none", marker="^",
                                  color="gray"))
        labels.append("clipped (divergent)")
    if any(series_has_degenerate(series)):
        handles.append(plt.Line2D([], [], linestyle="none", marker="x",
                                  color="black"))
        labels.append("degenerate")
    ax.legend(handles, labels, fontsize=8)
    ax.set_title(spec.title or f"{spec.quantity} ({spec.figure})")
    fig.tight_layout()
    fig.savefig(spec.output, dpi=spec.dpi)
    plt.close(fig)
    return spec.output


def series_has_degenerate(series):
    for pts in series.values():
        yield any(dg == "1" for _, _, dg in pts)


def dump(spec, path):
    """Re-emit the plotted series verbatim: x, m, and quantity columns.

    Cells are the exact strings from the input file, so the output is
    byte-identical to the corresponding input columns.
    """
    table = load_table(spec.input_csv)
    xcol, series = select_series(table, spec)
    lines = [f"{xcol},m,{spec.quantity}"]
    for m in sorted(series, key=_m_sort_key):
        for x, v, _ in series[m]:
            lines.append(f"{x},{m},{v}")
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return path
