"""SVG rendering of raster domains, zero bands, and hole diagnostics."""

import numpy as np

_STYLE = {
    "domain": "#cfd8dc",
    "band": "#ffb74d",
    "hole": "#e57373",
    "boundary": "#1565c0",
    "text": "#212121",
}


def _cell_rects(dom, cells, color, opacity=1.0):
    h = dom.h
    x0, _, y0, _ = dom.bbox
    parts = []
    for r, c in cells:
        x = x0 + c * h
        y = y0 + r * h
        parts.append(
            f'<rect x="{x:.6g}" y="{y:.6g}" width="{h:.6g}" height="{h:.6g}" '
            f'fill="{color}" fill-opacity="{opacity}"/>')
    return parts


def render_domain(dom, band=None, report=None, windings=None, title=None):
    """SVG document for a 2-d raster domain.

    ``band`` is an optional boolean grid (zero band), ``report`` a
    HoleReport of that band, ``windings`` a {hole_id: int} map drawn as
    text labels at hole centroids.
    """
    if dom.d != 2:
        raise ValueError("SVG rendering supports d = 2 domains")
    h = dom.h
    x0, x1, y0, y1 = dom.bbox
    w_pix = x1 - x0
    h_pix = y1 - y0
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.6g} {y0:.6g} '
        f'{w_pix:.6g} {h_pix:.6g}" width="640" height="{640 * h_pix / w_pix:.0f}">',
        f'<g transform="translate(0,{(y0 + y1):.6g}) scale(1,-1)">',
    ]
    parts += _cell_rects(dom, dom.mask_cells(), _STYLE["domain"])
    if band is not None:
        parts += _cell_rects(dom, np.argwhere(band), _STYLE["band"], 0.9)
    if report is not None:
        for hole in report.holes:
            parts += _cell_rects(dom, hole.cells, _STYLE["hole"], 0.7)
            cyc = hole.boundary_cycle
            if cyc is not None:
                pts = " ".join(f"{z.real:.6g},{z.imag:.6g}" for z in cyc.centers)
                parts.append(
                    f'<polygon points="{pts}" fill="none" '
                    f'stroke="{_STYLE["boundary"]}" stroke-width="{h / 2:.6g}"/>')
    parts.append("</g>")
    if windings and report is not None:
        centers = dom.centers()
        for hole in report.holes:
            if hole.id not in windings:
                continue
            cz = np.mean([centers[r, c] for r, c in hole.cells])
            parts.append(
                f'<text x="{cz.real:.6g}" y="{(y0 + y1) - cz.imag:.6g}" '
                f'font-size="{12 * h:.6g}" text-anchor="middle" '
                f'fill="{_STYLE["text"]}">{windings[hole.id]}</text>')
    if title:
        parts.append(
            f'<text x="{x0 + 2 * h:.6g}" y="{y0 + 4 * h:.6g}" '
            f'font-size="{10 * h:.6g}" fill="{_STYLE["text"]}">{title}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def save_svg(path, dom, **kw):
    doc = render_domain(dom, **kw)
    with open(path, "w") as fh:
        fh.write(doc)
    return path
