"""Render the three itstrack CSV families into figures.

Each loader validates the CSV schema before any drawing happens and raises
``RenderError`` naming the offending column or value, so a failed render
never leaves a partial image behind.  Rendering is read-only: the same CSV
always produces the same image.
"""

import csv
import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

KINDS = ("nmse", "aoa", "se")

RAD2DEG = 180.0 / math.pi

# scheme -> (legend label, line style kwargs)
SCHEME_STYLES = {
    "map_myopic": ("MAP myopic", {"color": "tab:blue", "marker": "o"}),
    "map_exploratory": ("MAP exploratory",
                        {"color": "tab:orange", "marker": "s"}),
    "ml_myopic": ("ML myopic", {"color": "tab:green", "marker": "^"}),
    "perfect_csi": ("Perfect CSI",
                    {"color": "black", "linestyle": "--"}),
}


class RenderError(Exception):
    """Raised when a CSV does not match its schema or cannot be read."""


@dataclass
class FigureSpec:
    """One figure to render: input table, kind, output path, styling."""

    kind: str
    csv_path: str
    image_path: str
    styles: dict = field(default_factory=lambda: dict(SCHEME_STYLES))
    log_y: bool = field(init=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}")
        self.log_y = self.kind == "nmse"


def _read_rows(path):
    if not os.path.isfile(path):
        raise RenderError(f"csv file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, restval=None)
        if reader.fieldnames is None:
            raise RenderError(f"empty csv: {path}")
        rows = list(reader)
    if not rows:
        raise RenderError(f"no data rows in {path}")
    return list(reader.fieldnames), rows


def _require(fieldnames, required, path):
    for name in required:
        if name not in fieldnames:
            raise RenderError(f"missing column {name!r} in {path}")


def _value(row, name, path, cast=float):
    raw = row.get(name)
    if raw is None or raw == "":
        raise RenderError(f"missing value in column {name!r} of {path}")
    try:
        return cast(raw)
    except ValueError:
        raise RenderError(
            f"bad value {raw!r} in column {name!r} of {path}") from None


def _by_scheme(rows, value_names, path):
    """Group rows into scheme -> (snrs, values...) keeping first-seen order."""
    series = {}
    for row in rows:
        scheme = row.get("scheme")
        if not scheme:
            raise RenderError(f"missing value in column 'scheme' of {path}")
        entry = series.setdefault(scheme, tuple([] for _ in
                                                range(1 + len(value_names))))
        entry[0].append(_value(row, "snr_db", path))
        for slot, name in zip(entry[1:], value_names):
            slot.append(_value(row, name, path))
    return series


def load_nmse(path):
    """scheme -> (snr list, channel NMSE list, AoA NMSE list)."""
    fieldnames, rows = _read_rows(path)
    _require(fieldnames, ("snr_db", "scheme", "nmse_channel", "nmse_aoa"),
             path)
    return _by_scheme(rows, ("nmse_channel", "nmse_aoa"), path)


def load_se(path):
    """scheme -> (snr list, mean SE list)."""
    fieldnames, rows = _read_rows(path)
    _require(fieldnames, ("snr_db", "scheme", "mean_se_bits"), path)
    return _by_scheme(rows, ("mean_se_bits",), path)


def load_aoa(path):
    """(block list, true AoA degrees, scheme -> estimate degrees)."""
    fieldnames, rows = _read_rows(path)
    _require(fieldnames, ("block", "true_phi_rad"), path)
    scheme_cols = [n for n in fieldnames if n not in ("block",
                                                      "true_phi_rad")]
    if not scheme_cols:
        raise RenderError(f"no scheme columns in {path}")
    blocks = [_value(row, "block", path, cast=int) for row in rows]
    truth = [RAD2DEG * _value(row, "true_phi_rad", path) for row in rows]
    tracks = {name: [RAD2DEG * _value(row, name, path) for row in rows]
              for name in scheme_cols}
    return blocks, truth, tracks


def _style(spec, scheme):
    return spec.styles.get(scheme, (scheme, {}))


def _save(fig, spec):
    out_dir = os.path.dirname(spec.image_path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    fig.savefig(spec.image_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return spec.image_path


def _render_nmse(spec):
    series = load_nmse(spec.csv_path)
    fig, (ax_ch, ax_aoa) = plt.subplots(1, 2, figsize=(9.0, 3.6),
                                        sharex=True)
    for scheme, (snrs, ch, aoa) in series.items():
        label, style = _style(spec, scheme)
        ax_ch.semilogy(snrs, ch, label=label, **style)
        ax_aoa.semilogy(snrs, aoa, label=label, **style)
    ax_ch.set_ylabel("Channel NMSE")
    ax_aoa.set_ylabel("AoA NMSE")
    for ax in (ax_ch, ax_aoa):
        ax.set_xlabel("SNR [dB]")
        ax.grid(True, which="both", alpha=0.3)
    ax_ch.legend()
    fig.tight_layout()
    return _save(fig, spec)


def _render_aoa(spec):
    blocks, truth, tracks = load_aoa(spec.csv_path)
    fig, ax = plt.subplots(figsize=(6.4, 3.8))
    ax.plot(blocks, truth, color="black", linewidth=2.4, label="True AoA")
    for scheme, values in tracks.items():
        label, style = _style(spec, scheme)
        ax.plot(blocks, values, linewidth=1.1, label=label, **style)
    ax.set_xlabel("Coherence block")
    ax.set_ylabel("AoA [deg]")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return _save(fig, spec)


def _render_se(spec):
    series = load_se(spec.csv_path)
    fig, ax = plt.subplots(figsize=(6.4, 3.8))
    for scheme, (snrs, se) in series.items():
        label, style = _style(spec, scheme)
        ax.plot(snrs, se, label=label, **style)
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("Average SE [bit/s/Hz]")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return _save(fig, spec)


def render(spec: FigureSpec) -> str:
    """Validate the CSV, draw the figure, and write the image file."""
    return {"nmse": _render_nmse, "aoa": _render_aoa,
            "se": _render_se}[spec.kind](spec)
