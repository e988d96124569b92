"""Rasterized planar/linear topology.

Zero-set bands, complement component labeling with hole detection,
hole condition and boundary principle checks, winding numbers, planar
phase unwrapping and nearest-cell (Tietze-style) extension.

Connectivity convention: foreground masks are 8-connected, complements
are 4-connected, which avoids the digital Jordan paradoxes.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .algebra import GRID, AlgebraElement, AlgebraInstance, default_tol
from .errors import (EmptySource, LogObstruction, NotSubset, ResolutionError)
from .raster import RasterDomain

TWO_PI = 2.0 * np.pi

# Moore neighborhood in clockwise order starting north.
_MOORE = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


@dataclass(frozen=True)
class Cycle:
    """Closed 8-connected loop of cells, canonicalized counterclockwise."""

    cells: tuple          # ((r, c), ...) without repeated endpoint
    centers: np.ndarray   # complex cell centers, same order

    def __len__(self):
        return len(self.cells)

    def signed_area(self):
        z = self.centers
        zn = np.roll(z, -1)
        return 0.5 * float(np.sum(z.real * zn.imag - zn.real * z.imag))


@dataclass(frozen=True)
class Hole:
    id: int
    cells: np.ndarray                  # (k, d) int cell coordinates
    boundary_cycle: object = None      # Cycle (d=2) or (left, right) mask cells (d=1)


@dataclass
class HoleReport:
    domain: RasterDomain
    labels: np.ndarray                 # component id per complement cell, -1 on the mask
    n_components: int
    unbounded_ids: tuple
    holes: list = field(default_factory=list)

    def hole(self, hole_id):
        for h in self.holes:
            if h.id == hole_id:
                return h
        raise KeyError(hole_id)


def _border_labels(labels, d):
    if d == 1:
        edge = np.concatenate([labels[:1], labels[-1:]])
    else:
        edge = np.concatenate([labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]])
    return set(int(v) for v in np.unique(edge) if v >= 0)


def _trace_hole_cycle(mask, hole_cells, centers):
    """Moore-trace the ring of mask cells surrounding a hole.

    Starts at the mask cell just above the hole's lexicographically first
    cell, keeping the hole as initial backtrack; orientation is then
    canonicalized counterclockwise by signed area.
    """
    r0, c0 = hole_cells[0]
    start = (r0 - 1, c0)
    assert mask[start], "cell above the topmost hole cell must be foreground"
    back0 = (r0, c0)
    cur, back = start, back0
    path = [start]
    limit = 8 * int(mask.sum()) + 8
    ny, nx = mask.shape
    for _ in range(limit):
        db = (back[0] - cur[0], back[1] - cur[1])
        k0 = _MOORE.index(db)
        nxt = None
        prev = back
        for s in range(1, 9):
            dr, dc = _MOORE[(k0 + s) % 8]
            cand = (cur[0] + dr, cur[1] + dc)
            if 0 <= cand[0] < ny and 0 <= cand[1] < nx and mask[cand]:
                nxt = cand
                break
            prev = cand
        if nxt is None:  # isolated cell, degenerate ring
            break
        cur, back = nxt, prev
        if cur == start and back == back0:
            break
        path.append(cur)
    cyc_centers = np.array([centers[rc] for rc in path], dtype=complex)
    cycle = Cycle(tuple(path), cyc_centers)
    if len(path) >= 3 and cycle.signed_area() < 0:
        path = [path[0]] + path[:0:-1]
        cyc_centers = np.array([centers[rc] for rc in path], dtype=complex)
        cycle = Cycle(tuple(path), cyc_centers)
    return cycle


def complement_components(Z):
    """Label the complement of a raster mask; bounded components are holes.

    The complement is labeled 4-connected inside the bounding box; the
    border-touching component(s) are unbounded thanks to the margin.
    Each hole gets a traced boundary cycle through adjacent mask cells
    (d=2) or its two adjacent mask cells (d=1).
    """
    mask = Z.mask
    if Z.d == 1:
        comp = ~mask
        lab = np.full(Z.shape, -1, dtype=np.int32)
        runs = []
        inside = False
        for i, v in enumerate(comp):
            if v and not inside:
                runs.append([i, i])
                inside = True
            elif v and inside:
                runs[-1][1] = i
            elif not v:
                inside = False
        for cid, (a, b) in enumerate(runs):
            lab[a:b + 1] = cid
        n = len(runs)
        unbounded = tuple(cid for cid, (a, b) in enumerate(runs)
                          if a == 0 or b == Z.shape[0] - 1)
        holes = []
        for cid, (a, b) in enumerate(runs):
            if cid in unbounded:
                continue
            cells = np.array([[i] for i in range(a, b + 1)], dtype=np.int64)
            holes.append(Hole(cid, cells, boundary_cycle=(a - 1, b + 1)))
        return HoleReport(Z, lab, n, unbounded, holes)

    labels, n = _kernels.label_components(~mask)
    unbounded = tuple(sorted(_border_labels(labels, 2)))
    centers = Z.centers()
    holes = []
    for cid in range(n):
        if cid in unbounded:
            continue
        cells = np.argwhere(labels == cid)
        cycle = _trace_hole_cycle(mask, cells, centers) if mask.any() else None
        holes.append(Hole(cid, cells, boundary_cycle=cycle))
    return HoleReport(Z, labels, n, unbounded, holes)


def lipschitz_estimate(g):
    """Finite-difference Lipschitz estimate over adjacent mask cells."""
    dom = g.owner.domain
    vals = g.grid_values()
    mask = dom.mask
    best = 0.0
    if dom.d == 1:
        pair = mask[:-1] & mask[1:]
        if pair.any():
            best = float(np.max(np.abs(vals[1:] - vals[:-1])[pair]))
    else:
        ph = mask[:, :-1] & mask[:, 1:]
        pv = mask[:-1, :] & mask[1:, :]
        if ph.any():
            best = float(np.max(np.abs(vals[:, 1:] - vals[:, :-1])[ph]))
        if pv.any():
            best = max(best, float(np.max(np.abs(vals[1:, :] - vals[:-1, :])[pv])))
    return best / dom.h


def default_band_eps(g):
    """Default zero-band half-width: 2h * Lipschitz estimate (with a floor)."""
    dom = g.owner.domain
    return max(2.0 * dom.h * lipschitz_estimate(g), 1e-12 * (1.0 + g.sup_norm))


def sublevel_zero_set(g, eps):
    """Raster of {|g| <= eps} inside g's domain (the thickened zero set)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    dom = g.owner.domain
    band = np.zeros(dom.shape, dtype=bool)
    band[dom.mask] = np.abs(g.values) <= eps
    return dom.with_mask(band)


@dataclass
class HoleConditionResult:
    holds: bool
    entries: list            # per hole: {"hole": id, "witness_cell": [..] or None}
    report: HoleReport

    def __bool__(self):
        return self.holds

    def to_json(self):
        return {"holds": self.holds, "entries": self.entries}


def hole_condition(Z, K):
    """Decide whether every hole of Z contains a cell outside K.

    Equivalent (footnote form) to: no hole of Z is entirely contained in
    K. Pre: Z is a cellwise subset of K on the same grid.
    """
    if not Z.is_subset_of(K):
        raise NotSubset("Z is not contained in K")
    report = complement_components(Z)
    entries = []
    holds = True
    for hole in report.holes:
        if Z.d == 1:
            inside = K.mask[hole.cells[:, 0]]
        else:
            inside = K.mask[hole.cells[:, 0], hole.cells[:, 1]]
        out = np.flatnonzero(~inside)
        if out.size:
            entries.append({"hole": hole.id, "witness_cell": [int(v) for v in hole.cells[out[0]]]})
        else:
            holds = False
            entries.append({"hole": hole.id, "witness_cell": None})
    return HoleConditionResult(holds, entries, report)


def _interior(mask, d):
    out = mask.copy()
    if d == 1:
        out[1:] &= mask[:-1]
        out[:-1] &= mask[1:]
        out[0] = out[-1] = False
    else:
        out[1:, :] &= mask[:-1, :]
        out[:-1, :] &= mask[1:, :]
        out[:, 1:] &= mask[:, :-1]
        out[:, :-1] &= mask[:, 1:]
        out[0, :] = out[-1, :] = False
        out[:, 0] = out[:, -1] = False
    return out


def b1_falsify(g, eps):
    """Search for a boundary-principle violation of g on its domain K.

    Scans components U of {interior cells of K with |g| > eps}; a U whose
    entire cell boundary lies in the eps-zero band violates (B2). Returns
    the first such component (cells + boundary cells) or None.
    """
    dom = g.owner.domain
    mask = dom.mask
    absg = np.zeros(dom.shape)
    absg[mask] = np.abs(g.values)
    cand = _interior(mask, dom.d) & mask & (absg > eps)
    if not cand.any():
        return None
    if dom.d == 1:
        labels = np.full(dom.shape, -1, dtype=np.int32)
        n = 0
        prev = False
        for i, v in enumerate(cand):
            if v:
                if not prev:
                    n += 1
                labels[i] = n - 1
            prev = bool(v)
    else:
        labels, n = _kernels.label_components(cand)
    for cid in range(n):
        comp = labels == cid
        bdry = _dilate4(comp, dom.d) & ~comp
        # by interior construction boundary cells lie in K, where g is defined
        if np.all(absg[bdry] <= eps):
            return {"component": cid,
                    "cells": np.argwhere(comp),
                    "boundary_cells": np.argwhere(bdry)}
    return None


def _dilate4(mask, d):
    out = mask.copy()
    if d == 1:
        out[1:] |= mask[:-1]
        out[:-1] |= mask[1:]
    else:
        out[1:, :] |= mask[:-1, :]
        out[:-1, :] |= mask[1:, :]
        out[:, 1:] |= mask[:, :-1]
        out[:, :-1] |= mask[:, 1:]
    return out


def winding_number(values):
    """Integer winding of nonvanishing complex samples along a closed cycle.

    Refuses with ResolutionError when any single phase step reaches pi/2,
    rather than risking a mis-rounded degree.
    """
    values = np.asarray(values, dtype=complex)
    if np.min(np.abs(values)) <= 0:
        raise ValueError("winding needs nonvanishing values")
    ratio = np.roll(values, -1) / values
    inc = np.angle(ratio)
    if np.max(np.abs(inc)) >= np.pi / 2:
        raise ResolutionError("phase increment >= pi/2 along the cycle")
    total = float(np.sum(inc)) / TWO_PI
    w = int(np.round(total))
    if abs(total - w) > 0.25:
        raise ResolutionError("winding sum does not round to an integer")
    return w


def hole_windings(f_grid, R, report=None):
    """Winding of f around every hole of R, via the traced boundary cycles."""
    if report is None:
        report = complement_components(R)
    out = {}
    for hole in report.holes:
        cyc = hole.boundary_cycle
        vals = np.array([f_grid[rc] for rc in cyc.cells])
        out[hole.id] = winding_number(vals)
    return out, report


def _resolve_punctures(punctures, report, domain):
    ids = set()
    if punctures is None:
        return ids
    for p in punctures:
        if isinstance(p, (int, np.integer)):
            ids.add(int(p))
            continue
        # a point in the plane: find the hole containing its cell
        z = complex(p)
        c = int((z.real - domain.origin[0]) / domain.h)
        r = int((z.imag - domain.origin[1]) / domain.h)
        lab = int(report.labels[r, c])
        if lab >= 0:
            ids.add(lab)
    return ids


def phase_unwrap_log(f, R, punctures=None, tol=None):
    """Continuous logarithm of f on the raster R, when the topology allows.

    Builds a spanning tree over R's cell graph and propagates principal
    phase increments. Any increment reaching pi/2 or any nonzero residue
    on a unit square raises ResolutionError (under-sampling, never
    routed); a nonzero winding around a non-punctured hole raises
    LogObstruction. On success returns h on R with e^h = f cellwise.
    """
    owner = f.owner
    if owner.kind != GRID or owner.field != "C":
        raise ValueError("phase unwrapping applies to complex grid elements")
    if tol is None:
        tol = default_tol(f.sup_norm)
    fg = f.grid_values()
    mask = R.mask
    if not mask.any():
        raise EmptySource("empty unwrap mask")
    if not R.is_subset_of(owner.domain):
        raise NotSubset("unwrap mask must lie inside the element's domain")
    vals = fg[mask]
    if np.min(np.abs(vals)) <= tol:
        raise ValueError("f has (near-)zeros on the unwrap mask")

    ang = np.zeros(R.shape)
    ang[mask] = np.angle(fg[mask])
    if R.d == 1:
        pair = mask[:-1] & mask[1:]
        inc = ang[1:] - ang[:-1]
        inc -= TWO_PI * np.round(inc / TWO_PI)
        if pair.any() and np.max(np.abs(inc[pair])) >= np.pi / 2:
            raise ResolutionError("phase step >= pi/2 between adjacent cells")
        theta = np.zeros(R.shape)
        prev_in = False
        for i in range(R.shape[0]):
            if mask[i]:
                theta[i] = ang[i] if not prev_in else theta[i - 1] + inc[i - 1]
                prev_in = True
            else:
                prev_in = False
        h = np.log(np.abs(fg[mask])) + 1j * theta[mask]
        sub = AlgebraInstance(GRID, "C", R)
        return AlgebraElement(sub, h)

    dh = ang[:, 1:] - ang[:, :-1]
    dh -= TWO_PI * np.round(dh / TWO_PI)
    dv = ang[1:, :] - ang[:-1, :]
    dv -= TWO_PI * np.round(dv / TWO_PI)
    ph = mask[:, 1:] & mask[:, :-1]
    pv = mask[1:, :] & mask[:-1, :]
    if (ph.any() and np.max(np.abs(dh[ph])) >= np.pi / 2) or \
       (pv.any() and np.max(np.abs(dv[pv])) >= np.pi / 2):
        raise ResolutionError("phase step >= pi/2 between adjacent cells")

    # residues on unit squares fully inside R must vanish
    full = mask[:-1, :-1] & mask[:-1, 1:] & mask[1:, :-1] & mask[1:, 1:]
    if full.any():
        res = dh[:-1, :] + dv[:, 1:] - dh[1:, :] - dv[:, :-1]
        res = np.round(res / TWO_PI)
        if np.any(res[full] != 0):
            raise ResolutionError("nonzero residue on an interior unit square")

    report = complement_components(R)
    windings, _ = hole_windings(fg, R, report)
    allowed = _resolve_punctures(punctures, report, R)
    bad = [(hid, w) for hid, w in sorted(windings.items()) if w != 0 and hid not in allowed]
    if bad:
        raise LogObstruction(bad)

    theta = _kernels.propagate_phase(mask, ang)
    h = np.log(np.abs(fg[mask])) + 1j * theta[mask]
    sub = AlgebraInstance(GRID, "C", R)
    return AlgebraElement(sub, h)


def tietze_extend(h, K):
    """Extend h from its raster Z to the raster K by nearest-cell copy.

    Nearest in Euclidean distance over cell centers, ties broken by
    lexicographic cell index; agrees with h on Z exactly, so the sup norm
    is preserved.
    """
    if isinstance(K, AlgebraInstance):
        K_dom, K_inst = K.domain, K
    else:
        K_dom, K_inst = K, AlgebraInstance(GRID, h.owner.field, K)
    Z = h.owner.domain
    if Z.npoints == 0:
        raise EmptySource("cannot extend from an empty raster")
    if not Z.is_subset_of(K_dom):
        raise NotSubset("Z must be contained in K")
    sources = Z.mask_cells()
    targets = K_dom.mask_cells()
    idx = _kernels.nearest_sources(targets, sources)
    return AlgebraElement(K_inst, h.values[idx])
