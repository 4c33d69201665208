"""Report files: the results CSV and matplotlib figures in the style of the
evaluation plots (mean SNR against K, or success rate against sparsity factor)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import InvalidArgument  # noqa: E402
from .harness import OCTAVE_BAND, mean_snr, rows_to_csv, success_probability  # noqa: E402

LABELS = {
    "bsl0": "BSL0",
    "biht": "BIHT",
    "biht_lc": "Modified BIHT",
    "bsl0_lc": "Modified BSL0",
    "omp": "OMP (conventional CS)",
}

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "svg.hashsalt": "lcsense",
}


def _series(table, solver, L=None):
    pts = sorted((K, v) for (s, K, l), v in table.items() if s == solver and (L is None or l == L))
    return [p[0] for p in pts], [p[1] for p in pts]


def snr_figure(rows, title=None):
    """Mean reconstruction SNR against K, one line per solver and level count."""
    table = mean_snr(rows)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for solver in dict.fromkeys(r.solver for r in rows):
            Ls = sorted({l for (s, _, l) in table if s == solver})
            for L in Ls:
                xs, ys = _series(table, solver, L)
                label = LABELS.get(solver, solver) + (f", L={L}" if len(Ls) > 1 or solver in ("biht_lc", "bsl0_lc") else "")
                ax.plot(xs, ys, marker="o", label=label)
        ax.set_xlabel("sparsity number K")
        ax.set_ylabel("mean reconstruction SNR (dB)")
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
    return fig


def sparsity_factor(K: int, band_width: int) -> float:
    return K / band_width


def success_figure(rows, threshold_db=20.0, band_width=None, title=None):
    """Success probability against the sparsity factor K / band width."""
    band_width = band_width or (OCTAVE_BAND[1] - OCTAVE_BAND[0] + 1)
    rates = success_probability(rows, threshold_db)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for solver in dict.fromkeys(r.solver for r in rows):
            pts = {}
            for (s, K, _), p in rates.items():
                if s == solver:
                    pts.setdefault(K, []).append(p)
            Ks = sorted(pts)
            ax.plot([sparsity_factor(K, band_width) for K in Ks], [sum(pts[K]) / len(pts[K]) for K in Ks],
                    marker="o", label=LABELS.get(solver, solver))
        ax.set_xlabel("sparsity factor")
        ax.set_ylabel(f"P(SNR > {threshold_db:g} dB)")
        ax.set_ylim(-0.05, 1.05)
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
    return fig


def emit_report(rows, path, fmt: str | None = None, mode: str = "fig1_zc_sweep",
                threshold_db: float = 20.0, band_width: int | None = None, include_timing=False) -> Path:
    """Write `rows` as CSV or as a figure (svg/png/pdf, chosen by `fmt` or suffix)."""
    if not rows:
        raise InvalidArgument("empty result table")
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".") or "csv").lower()
    if fmt == "csv":
        path.write_text(rows_to_csv(rows, include_timing))
        return path
    if fmt in ("svg-plot", "plot"):
        fmt = "svg"
    if fmt not in ("svg", "png", "pdf"):
        raise InvalidArgument(f"unsupported report format {fmt!r}")
    if mode in ("fig3", "fig3_octave_band"):
        fig = success_figure(rows, threshold_db, band_width)
    else:
        fig = snr_figure(rows)
    try:
        with plt.rc_context(STYLE):
            fig.savefig(path, format=fmt, metadata={"Date": None} if fmt == "svg" else None)
    finally:
        plt.close(fig)
    return path
