"""CSV, SVG and run-manifest writers."""

from __future__ import annotations

import csv
import io
import math
import xml.etree.ElementTree as ET
from datetime import datetime, timezone
from typing import Iterable, Sequence

from ripbound import __version__
from ripbound._parallel import RNG_METHOD
from ripbound.bounds import PLOT_CLIP, CurveRow

CURVE_HEADER = [
    "compression_rate",
    "sparsity_level",
    "n",
    "N",
    "s",
    "lower_bound",
    "upper_new",
    "upper_classical",
    "flags",
]
SERIES = ("lower_bound", "upper_new", "upper_classical")
SERIES_STYLE = {
    "lower_bound": ("#1f77b4", "", "lower bound"),
    "upper_new": ("#d62728", "", "new upper bound"),
    "upper_classical": ("#2ca02c", "6,4", "classical upper bound"),
}


def fmt(value) -> str:
    """Serialise one CSV cell; reals keep 17 significant digits, None is empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value, ".17g")
    if isinstance(value, (list, tuple)):
        return "|".join(str(v) for v in value)
    return str(value)


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def curve_csv(rows: Iterable[CurveRow]) -> str:
    return to_csv(CURVE_HEADER, ([getattr(r, k) for k in CURVE_HEADER] for r in rows))


def parse_curve_csv(text: str) -> list[dict]:
    """Inverse of :func:`curve_csv`; empty cells come back as None."""
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for key in CURVE_HEADER:
            raw = rec[key]
            if key == "flags":
                row[key] = raw.split("|") if raw else []
            elif key in ("n", "N", "s"):
                row[key] = int(raw)
            else:
                row[key] = float(raw) if raw else None
        out.append(row)
    return out


def manifest_text(command: str, params: dict, timestamp: str | None = None) -> str:
    """Flat key=value manifest. Only the timestamp line varies between identical runs."""
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    lines = [f"command={command}", f"version={__version__}", f"rng={RNG_METHOD}"]
    for key in sorted(params):
        lines.append(f"param.{key}={fmt(params[key])}")
    lines.append(f"timestamp={timestamp}")
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_with_manifest(path: str, text: str, command: str, params: dict) -> str:
    write_text(path, text)
    manifest_path = path + ".manifest"
    write_text(manifest_path, manifest_text(command, params))
    return manifest_path


# --- SVG -------------------------------------------------------------------

_W, _H = 800, 600
_MARGIN = dict(left=50, right=15, top=40, bottom=90)


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 10))
        v += step
    return ticks


def curve_svg(rows: Sequence[CurveRow], title: str = "RIP constant bounds") -> str:
    """Self-contained SVG line chart with one panel per sparsity level.

    Every panel holds exactly one polyline per bound kind (possibly with no
    points). Values are clipped at 2 and vacuous lower bounds drawn at 0.
    """
    levels = sorted({r.sparsity_level for r in rows}, reverse=True)
    rates = [r.compression_rate for r in rows]
    x_lo, x_hi = (min(rates), max(rates)) if rates else (1.0, 2.0)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5

    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "version": "1.1",
        "width": str(_W),
        "height": str(_H),
        "viewBox": f"0 0 {_W} {_H}",
        "font-family": "sans-serif",
        "font-size": "11",
    })
    ET.SubElement(svg, "rect", {"x": "0", "y": "0", "width": str(_W), "height": str(_H), "fill": "white"})
    t = ET.SubElement(svg, "text", {"x": str(_W / 2), "y": "20", "text-anchor": "middle", "font-size": "15"})
    t.text = title

    panel_w = _W / max(len(levels), 1)
    plot_h = _H - _MARGIN["top"] - _MARGIN["bottom"]
    for i, level in enumerate(levels):
        x0 = i * panel_w + _MARGIN["left"]
        pw = panel_w - _MARGIN["left"] - _MARGIN["right"]
        y0 = _MARGIN["top"]

        def sx(v, x0=x0, pw=pw):
            return x0 + (v - x_lo) / (x_hi - x_lo) * pw

        def sy(v, y0=y0):
            return y0 + (1.0 - v / PLOT_CLIP) * plot_h

        g = ET.SubElement(svg, "g", {"class": "panel", "data-sparsity": fmt(level)})
        ET.SubElement(g, "rect", {"x": f"{x0:.2f}", "y": f"{y0:.2f}", "width": f"{pw:.2f}",
                                  "height": f"{plot_h:.2f}", "fill": "none", "stroke": "#444"})
        for tick in _nice_ticks(x_lo, x_hi):
            tx = sx(tick)
            ET.SubElement(g, "line", {"x1": f"{tx:.2f}", "x2": f"{tx:.2f}", "y1": f"{y0 + plot_h:.2f}",
                                      "y2": f"{y0 + plot_h + 4:.2f}", "stroke": "#444"})
            lab = ET.SubElement(g, "text", {"x": f"{tx:.2f}", "y": f"{y0 + plot_h + 16:.2f}",
                                            "text-anchor": "middle"})
            lab.text = f"{tick:g}"
        for tick in (0.0, 0.5, 1.0, 1.5, 2.0):
            ty = sy(tick)
            ET.SubElement(g, "line", {"x1": f"{x0 - 4:.2f}", "x2": f"{x0:.2f}", "y1": f"{ty:.2f}",
                                      "y2": f"{ty:.2f}", "stroke": "#444"})
            lab = ET.SubElement(g, "text", {"x": f"{x0 - 6:.2f}", "y": f"{ty + 4:.2f}", "text-anchor": "end"})
            lab.text = f"{tick:g}"
        xl = ET.SubElement(g, "text", {"x": f"{x0 + pw / 2:.2f}", "y": f"{y0 + plot_h + 32:.2f}",
                                       "text-anchor": "middle"})
        xl.text = "compression rate N/n"
        head = ET.SubElement(g, "text", {"x": f"{x0 + pw / 2:.2f}", "y": f"{y0 - 6:.2f}",
                                         "text-anchor": "middle"})
        head.text = f"s/N = {level:g}"

        panel_rows = [r for r in rows if r.sparsity_level == level]
        for name in SERIES:
            colour, dash, _ = SERIES_STYLE[name]
            pts = []
            for r in panel_rows:
                v = getattr(r, name)
                if v is None:
                    continue
                v = min(max(v, 0.0), PLOT_CLIP)
                pts.append(f"{sx(r.compression_rate):.2f},{sy(v):.2f}")
            attrs = {"class": f"series {name}", "data-series": name, "points": " ".join(pts),
                     "fill": "none", "stroke": colour, "stroke-width": "1.5"}
            if dash:
                attrs["stroke-dasharray"] = dash
            ET.SubElement(g, "polyline", attrs)

    legend = ET.SubElement(svg, "g", {"class": "legend"})
    ly = _H - 25
    for j, name in enumerate(SERIES):
        colour, dash, label = SERIES_STYLE[name]
        lx = 60 + j * 240
        attrs = {"x1": str(lx), "x2": str(lx + 30), "y1": str(ly), "y2": str(ly), "stroke": colour,
                 "stroke-width": "2"}
        if dash:
            attrs["stroke-dasharray"] = dash
        ET.SubElement(legend, "line", attrs)
        txt = ET.SubElement(legend, "text", {"x": str(lx + 36), "y": str(ly + 4)})
        txt.text = label

    body = ET.tostring(svg, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"
