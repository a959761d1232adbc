"""
Float renderings of exact reports

Implements:
1. CSV tables of the slice-width functions
2. SVG drawings of planar bodies and of nu_1 = t slices of 3-dimensional bodies

Floats appear only here, with 12 significant digits.
"""

from __future__ import annotations

import csv
import io
import math
from fractions import Fraction

from inobody.bodies import BodyReport
from inobody.errors import DomainError
from inobody.exactlin import to_rat
from inobody.polytope import RationalPolytope, slice

SVG_SIZE = 400
MARGIN = 20


def fmt(x) -> str:
    return f"{float(x):.12g}"


def report_csv(report: BodyReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["index", "t", "width", "t_exact", "width_exact"])
    for profile in report.width_fns:
        for t, w in profile.samples:
            writer.writerow([profile.index, fmt(t), fmt(w), str(t), str(w)])
    return buffer.getvalue()


def _ring(p: RationalPolytope) -> list[tuple[Fraction, ...]]:
    # counter-clockwise around the vertex centroid
    cx = sum(v[0] for v in p.vertices) / len(p.vertices)
    cy = sum(v[1] for v in p.vertices) / len(p.vertices)
    return sorted(p.vertices, key=lambda v: math.atan2(float(v[1] - cy), float(v[0] - cx)))


def _planar(report: BodyReport, slice_at) -> tuple[RationalPolytope, str]:
    if report.tilted is None:
        raise DomainError(f"{report.family} carries no body to draw")
    if report.n == 2:
        return report.tilted, "tilted body"
    if report.n == 3:
        t = to_rat(slice_at) if slice_at is not None else report.epsilons[0]
        if not 0 <= t <= report.mu:
            raise DomainError(f"slice value {t} outside [0, {report.mu}]")
        return slice(report.tilted, 0, t), f"slice nu_1 = {t}"
    raise DomainError(f"SVG export needs a 2- or 3-dimensional body, got dimension {report.n}")


def report_svg(report: BodyReport, slice_at=None) -> str:
    """Draw the tilted body (n = 2) or its slice at nu_1 = slice_at (n = 3, default eps_1)."""
    polygon, caption = _planar(report, slice_at)
    if polygon.is_empty:
        raise DomainError("nothing to draw: the slice is empty")
    top = max(max(v) for v in polygon.vertices) or Fraction(1)
    scale = (SVG_SIZE - 2 * MARGIN) / float(top)

    def place(v):
        return f"{fmt(MARGIN + float(v[0]) * scale)},{fmt(SVG_SIZE - MARGIN - float(v[1]) * scale)}"

    points = " ".join(place(v) for v in _ring(polygon))
    labels = "\n".join(
        f'  <text x="{place(v).split(",")[0]}" y="{place(v).split(",")[1]}" font-size="10">'
        f"({', '.join(str(x) for x in v)})</text>"
        for v in polygon.vertices
    )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">\n'
        f"  <title>{report.family}: {caption}</title>\n"
        f'  <polygon points="{points}" fill="#9ecae1" stroke="#08519c" stroke-width="1.5"/>\n'
        f"{labels}\n"
        "</svg>\n"
    )
