"""Deterministic experiment artifacts: CSV tables, log-log SVG plots, and
run manifests.

Determinism contract: identical rows produce identical bytes.  All floats
are rendered with %.12g, column order is fixed by the caller, line endings
are a single newline regardless of platform, and manifest JSON is emitted
with sorted keys.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence

import numpy as np

from .errors import EmptyReport, InvalidParams


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    v = float(value)
    if math.isnan(v):
        return "nan"
    return "%.12g" % v


def write_csv(path, rows: Sequence[Mapping], columns: Sequence[str]) -> None:
    """Write rows under a fixed header; missing keys render empty."""
    lines = [",".join(columns)]
    for row in rows:
        cells = [_fmt(row.get(c)) for c in columns]
        for cell in cells:
            if "," in cell or "\n" in cell:
                raise InvalidParams(f"cell value {cell!r} needs quoting")
        lines.append(",".join(cells))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# SVG log-log scatter


_SVG_W, _SVG_H = 640, 480
_MARGIN = 60.0


def svg_loglog(path, x: Sequence[float], y: Sequence[float],
               slope: float = math.nan, intercept: float = math.nan,
               title: str = "", xlabel: str = "d", ylabel: str = "value"):
    """Log-log scatter with one fitted-line annotation (class="fit").

    With a NaN slope the annotation degrades to the horizontal median,
    marking the level of a constant cloud instead of a power law.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]
    if x.size == 0:
        raise EmptyReport("no positive finite points to plot")
    lx, ly = np.log10(x), np.log10(y)
    x0, x1 = float(lx.min()), float(lx.max())
    y0, y1 = float(ly.min()), float(ly.max())
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad_x = 0.05 * (x1 - x0)
    pad_y = 0.05 * (y1 - y0)
    x0, x1 = x0 - pad_x, x1 + pad_x
    y0, y1 = y0 - pad_y, y1 + pad_y

    def px(v):
        return _MARGIN + (v - x0) / (x1 - x0) * (_SVG_W - 2 * _MARGIN)

    def py(v):
        return _SVG_H - _MARGIN - (v - y0) / (y1 - y0) * (_SVG_H - 2 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" '
        f'height="{_SVG_H}" viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect x="{_MARGIN:.1f}" y="{_MARGIN:.1f}" '
        f'width="{_SVG_W - 2 * _MARGIN:.1f}" '
        f'height="{_SVG_H - 2 * _MARGIN:.1f}" '
        'fill="none" stroke="black"/>',
    ]
    if title:
        parts.append(f'<text x="{_SVG_W / 2:.1f}" y="30" '
                     f'text-anchor="middle">{title}</text>')
    parts.append(f'<text x="{_SVG_W / 2:.1f}" y="{_SVG_H - 15:.1f}" '
                 f'text-anchor="middle">log10 {xlabel}</text>')
    parts.append(f'<text x="18" y="{_SVG_H / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {_SVG_H / 2:.1f})">'
                 f'log10 {ylabel}</text>')
    parts.append('<g class="points" fill="steelblue" fill-opacity="0.6">')
    for xi, yi in zip(lx, ly):
        parts.append(f'<circle cx="{px(xi):.2f}" cy="{py(yi):.2f}" r="2.5"/>')
    parts.append('</g>')
    if math.isnan(slope):
        level = float(np.median(ly))
        fy0 = fy1 = level
        fx0, fx1 = x0 + pad_x, x1 - pad_x
        label = "median %.4g" % (10.0 ** level)
    else:
        b = intercept if not math.isnan(intercept) \
            else float(np.median(ly - slope * lx))
        fx0, fx1 = x0 + pad_x, x1 - pad_x
        fy0, fy1 = slope * fx0 + b, slope * fx1 + b
        label = "slope %.4g" % slope
    parts.append(f'<line class="fit" x1="{px(fx0):.2f}" y1="{py(fy0):.2f}" '
                 f'x2="{px(fx1):.2f}" y2="{py(fy1):.2f}" '
                 'stroke="crimson" stroke-width="1.5"/>')
    parts.append(f'<text x="{_SVG_W - _MARGIN:.1f}" y="45" '
                 f'text-anchor="end">{label}</text>')
    parts.append('</svg>')
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# manifests


@dataclass
class RunManifest:
    """Provenance record for one CLI run."""

    experiment: str
    config_hash: str
    seed: int
    versions: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {"experiment": self.experiment,
                   "config_hash": self.config_hash,
                   "seed": self.seed,
                   "versions": dict(sorted(self.versions.items())),
                   "outputs": list(self.outputs)}
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def hash_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def package_versions() -> Dict[str, str]:
    import scipy

    from . import __version__
    return {"greendec": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__}


def write_manifest(path, manifest: RunManifest) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(manifest.to_json())
