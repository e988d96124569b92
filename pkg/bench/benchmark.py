"""Compare the numba and numpy backends on the three grid kernels.

Usage:  python3 bench/benchmark.py [--h 0.0078125] [--repeat 3]

Each kernel is run on the annulus fixture (1 <= |z| <= 2) at the chosen
resolution; results are checked for cellwise agreement between backends
before timings are reported.
"""

import argparse
import time

import numpy as np

from banach_reduce._kernels import (label_components, nearest_sources,
                                    propagate_phase)
from banach_reduce.backend import NUMBA_AVAILABLE, get_backend, set_backend
from banach_reduce.raster import RasterDomain


def fixtures(h):
    dom = RasterDomain.annulus(1.0, 2.0, h)
    z = dom.centers()
    band = dom.mask & (np.abs(np.abs(z) - 1.5) <= 2.5 * h)
    phase = np.where(dom.mask, np.angle(z), 0.0)
    targets = np.ascontiguousarray(np.argwhere(dom.mask))
    sources = np.ascontiguousarray(np.argwhere(band))
    return {
        "label_components": (lambda: label_components(dom.mask)),
        "propagate_phase": (lambda: propagate_phase(band, phase)),
        "nearest_sources": (lambda: nearest_sources(targets, sources)),
    }, dom, band


def time_call(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=1 / 128, help="grid pitch")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    kernels, dom, band = fixtures(args.h)
    print(f"annulus fixture: h={args.h:g}, {dom.npoints} cells, "
          f"{int(band.sum())} band cells")

    backends = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])
    if not NUMBA_AVAILABLE:
        print("numba not importable; timing numpy backend only")

    if "numba" in backends:
        set_backend("numba")   # compile outside the timed region
        for fn in kernels.values():
            fn()

    results = {}
    for backend in backends:
        set_backend(backend)
        assert get_backend() == backend
        for name, fn in kernels.items():
            secs, out = time_call(fn, args.repeat)
            results[(backend, name)] = (secs, out)

    print(f"\n{'kernel':<20} {'numpy':>12} {'numba':>12} {'speedup':>9}  agree")
    for name in kernels:
        t_np, out_np = results[("numpy", name)]
        if "numba" in backends:
            t_nb, out_nb = results[("numba", name)]
            if isinstance(out_np, tuple):
                agree = all(np.array_equal(a, b) for a, b in zip(out_np, out_nb))
            elif out_np.dtype.kind == "f":
                agree = np.allclose(out_np, out_nb, atol=1e-12)
            else:
                agree = np.array_equal(out_np, out_nb)
            print(f"{name:<20} {t_np:>10.4f} s {t_nb:>10.4f} s "
                  f"{t_np / t_nb:>8.1f}x  {agree}")
        else:
            print(f"{name:<20} {t_np:>10.4f} s {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
