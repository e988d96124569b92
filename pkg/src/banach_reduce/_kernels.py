"""Grid kernels: component labeling, spanning-tree phase propagation,
nearest-cell lookup.

Each kernel has a numba implementation (suffix ``_nb``) and a numpy one
(suffix ``_np``); dispatch goes through :mod:`banach_reduce.backend`.
Both variants implement the same deterministic rules:

* labels are assigned in row-major first-encounter order, 4-connectivity;
* phase propagation visits neighbors in N, W, E, S priority;
* nearest-cell ties are broken by the smallest source index, and sources
  are passed in row-major (lexicographic) order.
"""

import numpy as np
from scipy import ndimage

from .backend import NUMBA_AVAILABLE, get_backend

if NUMBA_AVAILABLE:
    from numba import njit, prange
else:  # pragma: no cover
    prange = range

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


# ---------------------------------------------------------------- labeling

@njit(cache=True)
def _label_nb(mask):
    ny, nx = mask.shape
    labels = np.full((ny, nx), -1, dtype=np.int32)
    queue = np.empty(ny * nx, dtype=np.int64)
    current = 0
    for r0 in range(ny):
        for c0 in range(nx):
            if mask[r0, c0] and labels[r0, c0] < 0:
                head = 0
                tail = 0
                labels[r0, c0] = current
                queue[tail] = r0 * nx + c0
                tail += 1
                while head < tail:
                    flat = queue[head]
                    head += 1
                    r = flat // nx
                    c = flat % nx
                    if r > 0 and mask[r - 1, c] and labels[r - 1, c] < 0:
                        labels[r - 1, c] = current
                        queue[tail] = flat - nx
                        tail += 1
                    if c > 0 and mask[r, c - 1] and labels[r, c - 1] < 0:
                        labels[r, c - 1] = current
                        queue[tail] = flat - 1
                        tail += 1
                    if c < nx - 1 and mask[r, c + 1] and labels[r, c + 1] < 0:
                        labels[r, c + 1] = current
                        queue[tail] = flat + 1
                        tail += 1
                    if r < ny - 1 and mask[r + 1, c] and labels[r + 1, c] < 0:
                        labels[r + 1, c] = current
                        queue[tail] = flat + nx
                        tail += 1
                current += 1
    return labels, current


_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def _label_np(mask):
    raw, count = ndimage.label(mask, structure=_FOUR)
    labels = raw.astype(np.int32) - 1
    if count == 0:
        return labels, 0
    # canonicalize to row-major first-encounter order
    flat = labels.ravel()
    first = np.full(count, flat.size, dtype=np.int64)
    idx = np.flatnonzero(flat >= 0)
    np.minimum.at(first, flat[idx], idx)
    remap = np.empty(count, dtype=np.int32)
    remap[np.argsort(first, kind="stable")] = np.arange(count, dtype=np.int32)
    out = labels.copy()
    out[mask] = remap[labels[mask]]
    return out, count


def label_components(mask):
    """4-connected labeling of a 2D boolean mask.

    Returns (labels, count); labels is int32 with -1 off the mask and
    component ids in row-major first-encounter order.
    """
    mask = np.ascontiguousarray(mask, dtype=bool)
    if get_backend() == "numba":
        return _label_nb(mask)
    return _label_np(mask)


# ---------------------------------------------------- phase propagation

@njit(cache=True)
def _propagate_phase_nb(mask, phase):
    ny, nx = mask.shape
    theta = np.zeros((ny, nx), dtype=np.float64)
    done = np.zeros((ny, nx), dtype=np.bool_)
    queue = np.empty(ny * nx, dtype=np.int64)
    two_pi = 2.0 * np.pi
    for r0 in range(ny):
        for c0 in range(nx):
            if mask[r0, c0] and not done[r0, c0]:
                theta[r0, c0] = phase[r0, c0]
                done[r0, c0] = True
                head = 0
                tail = 0
                queue[tail] = r0 * nx + c0
                tail += 1
                while head < tail:
                    flat = queue[head]
                    head += 1
                    r = flat // nx
                    c = flat % nx
                    base = theta[r, c]
                    ph = phase[r, c]
                    for k in range(4):
                        if k == 0:
                            rr, cc = r - 1, c
                        elif k == 1:
                            rr, cc = r, c - 1
                        elif k == 2:
                            rr, cc = r, c + 1
                        else:
                            rr, cc = r + 1, c
                        if 0 <= rr < ny and 0 <= cc < nx and mask[rr, cc] and not done[rr, cc]:
                            d = phase[rr, cc] - ph
                            d -= two_pi * np.round(d / two_pi)
                            theta[rr, cc] = base + d
                            done[rr, cc] = True
                            queue[tail] = rr * nx + cc
                            tail += 1
    return theta


def _propagate_phase_np(mask, phase):
    two_pi = 2.0 * np.pi
    theta = np.where(mask, phase, 0.0)
    done = ~mask  # off-mask cells count as settled
    # every component seeds from its row-major first cell (= keeps raw phase)
    labels, count = _label_np(mask)
    if count == 0:
        return np.zeros_like(phase)
    flat = labels.ravel()
    first = np.full(count, flat.size, dtype=np.int64)
    idx = np.flatnonzero(flat >= 0)
    np.minimum.at(first, flat[idx], idx)
    seeded = np.zeros(mask.shape, dtype=bool)
    seeded.ravel()[first] = True
    known = seeded.copy()

    shifts = ((-1, 0), (0, -1), (0, 1), (1, 0))  # neighbor above, left, right, below
    while True:
        frontier_any = False
        new_known = known.copy()
        new_theta = theta
        for dr, dc in shifts:
            nb_known = np.zeros_like(known)
            nb_theta = np.zeros_like(theta)
            nb_phase = np.zeros_like(theta)
            src = (slice(max(dr, 0), known.shape[0] + min(dr, 0)),
                   slice(max(dc, 0), known.shape[1] + min(dc, 0)))
            dst = (slice(max(-dr, 0), known.shape[0] + min(-dr, 0)),
                   slice(max(-dc, 0), known.shape[1] + min(-dc, 0)))
            nb_known[dst] = known[src]
            nb_theta[dst] = theta[src]
            nb_phase[dst] = phase[src]
            grow = mask & ~new_known & nb_known
            if grow.any():
                frontier_any = True
                d = phase[grow] - nb_phase[grow]
                d -= two_pi * np.round(d / two_pi)
                upd = new_theta.copy() if new_theta is theta else new_theta
                upd[grow] = nb_theta[grow] + d
                new_theta = upd
                new_known |= grow
        theta = new_theta
        known = new_known
        if not frontier_any:
            break
    return np.where(mask, theta, 0.0)


def propagate_phase(mask, phase):
    """Spanning-tree unwrap of ``phase`` over the mask cell graph.

    Returns theta with theta == phase (mod 2*pi) cellwise and wrapped
    increments along the propagation tree. Residue and increment checks
    are the caller's responsibility.
    """
    mask = np.ascontiguousarray(mask, dtype=bool)
    phase = np.ascontiguousarray(phase, dtype=np.float64)
    if get_backend() == "numba":
        return _propagate_phase_nb(mask, phase)
    return _propagate_phase_np(mask, phase)


# ------------------------------------------------------- nearest sources

@njit(cache=True, parallel=True)
def _nearest_nb(targets, sources):
    m = targets.shape[0]
    k = sources.shape[0]
    out = np.empty(m, dtype=np.int64)
    for i in prange(m):
        tr = targets[i, 0]
        tc = targets[i, 1]
        best = np.int64(2 ** 62)
        best_j = 0
        for j in range(k):
            dr = sources[j, 0] - tr
            dc = sources[j, 1] - tc
            d2 = dr * dr + dc * dc
            if d2 < best:
                best = d2
                best_j = j
        out[i] = best_j
    return out


def _nearest_np(targets, sources):
    m = targets.shape[0]
    out = np.empty(m, dtype=np.int64)
    chunk = max(1, int(4e6) // max(1, sources.shape[0]))
    for lo in range(0, m, chunk):
        t = targets[lo:lo + chunk]
        d2 = (t[:, 0:1] - sources[None, :, 0]) ** 2 + (t[:, 1:2] - sources[None, :, 1]) ** 2
        out[lo:lo + chunk] = np.argmin(d2, axis=1)  # first min = lexicographic tie-break
    return out


def nearest_sources(targets, sources):
    """Index of the nearest source cell for every target cell.

    ``targets`` and ``sources`` are (m, 2) / (k, 2) int64 row/col arrays;
    sources must be in row-major order so that ties resolve to the
    lexicographically smallest cell.
    """
    targets = np.ascontiguousarray(targets, dtype=np.int64)
    sources = np.ascontiguousarray(sources, dtype=np.int64)
    if sources.shape[0] == 0:
        raise ValueError("no source cells")
    if get_backend() == "numba":
        return _nearest_nb(targets, sources)
    return _nearest_np(targets, sources)
