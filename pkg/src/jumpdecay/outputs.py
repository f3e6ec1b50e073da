"""Result persistence: canonical JSON, CSV series, a small SVG line chart and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import platform
import time
from dataclasses import dataclass, field

import numpy as np


def _clean(obj):
    # strict JSON has no inf / nan
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(config) -> str:
    blob = json.dumps(_clean(config), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode()).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(canonical_json(obj))
    return path


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return path


@dataclass
class RunManifest:
    version: str
    subcommand: str
    config: dict
    stages: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)

    @property
    def config_hash(self):
        return config_hash(self.config)

    def stage(self, name):
        return _Stage(self, name)

    def add_file(self, path):
        self.files[os.path.basename(path)] = sha256_file(path)
        return path

    def to_dict(self):
        return {
            "version": self.version,
            "subcommand": self.subcommand,
            "config": self.config,
            "config_hash": self.config_hash,
            "wall_seconds": self.stages,
            "verdicts": self.verdicts,
            "files": dict(sorted(self.files.items())),
            "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "python": platform.python_version(),
            "numpy": np.__version__,
        }

    def write(self, out_dir):
        return write_json(os.path.join(out_dir, "manifest.json"), self.to_dict())


class _Stage:
    def __init__(self, manifest, name):
        self.m, self.name = manifest, name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.m.stages[self.name] = round(time.perf_counter() - self.t0, 6)
        return False


# ----------------------------------------------------------------------------
# plot data

OVERLAY_SERIES = ("phi", "C_nu", "fit")


def _log10(v):
    v = float(v)
    return math.log10(v) if v > 0 and math.isfinite(v) else math.nan


def emit_plotdata(rows, out_prefix, svg=True, title=""):
    """Overlay series from (x, phi, C nu, ratio, fit) rows.

    Writes <prefix>_loglog.csv, <prefix>_loglinear.csv and optionally <prefix>.svg.
    An empty row list gives header-only CSVs.
    """
    rows = [tuple(float(v) for v in r) for r in rows]
    header = ["x", *OVERLAY_SERIES]
    ll = [(_log10(r[0]), _log10(r[1]), _log10(r[2]), _log10(r[4])) for r in rows]
    lin = [(r[0], _log10(r[1]), _log10(r[2]), _log10(r[4])) for r in rows]
    paths = [write_csv(f"{out_prefix}_loglog.csv", ["log10_x"] + [f"log10_{s}" for s in OVERLAY_SERIES], ll),
             write_csv(f"{out_prefix}_loglinear.csv", ["x"] + [f"log10_{s}" for s in OVERLAY_SERIES], lin)]
    if svg:
        paths.append(write_svg(f"{out_prefix}.svg", header, lin, title=title))
    return paths


_COLORS = ("#1f77b4", "#d62728", "#2ca02c")


def svg_chart(series_x, series, names, title="", width=480, height=320):
    """Minimal deterministic SVG line chart (x linear, y as given)."""
    pad = 40
    xs = [x for x in series_x if math.isfinite(x)]
    ys = [y for s in series for y in s if y is not None and math.isfinite(y)]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="16" text-anchor="middle" font-size="12">{title}</text>')
    if xs and ys:
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        x1 = x1 if x1 > x0 else x0 + 1
        y1 = y1 if y1 > y0 else y0 + 1

        def px(x):
            return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

        def py(y):
            return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

        out.append(f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
                   f'fill="none" stroke="#888"/>')
        out.append(f'<text x="{pad}" y="{height - 10}" font-size="10">{x0:.4g}</text>')
        out.append(f'<text x="{width - pad}" y="{height - 10}" font-size="10" text-anchor="end">{x1:.4g}</text>')
        out.append(f'<text x="4" y="{height - pad:.1f}" font-size="10">{y0:.4g}</text>')
        out.append(f'<text x="4" y="{pad + 10}" font-size="10">{y1:.4g}</text>')
        for k, (ys_k, name) in enumerate(zip(series, names)):
            pts = [f"{px(x):.2f},{py(y):.2f}" for x, y in zip(series_x, ys_k)
                   if y is not None and math.isfinite(x) and math.isfinite(y)]
            if pts:
                col = _COLORS[k % len(_COLORS)]
                out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{" ".join(pts)}"/>')
            out.append(f'<text x="{width - pad - 4}" y="{pad + 14 + 12 * k}" font-size="10" text-anchor="end" '
                       f'fill="{_COLORS[k % len(_COLORS)]}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, header, rows, title=""):
    xs = [r[0] for r in rows]
    series = [[r[i] for r in rows] for i in range(1, len(header))]
    with open(path, "w") as fh:
        fh.write(svg_chart(xs, series, header[1:], title=title))
    return path
