import numpy as np
import pytest

from banach_reduce.errors import NotSubset
from banach_reduce.raster import RasterDomain


def test_margin_enforced():
    dom = RasterDomain.disk(1.0, 1 / 16)
    m = dom.mask
    assert not m[:2].any() and not m[-2:].any()
    assert not m[:, :2].any() and not m[:, -2:].any()


def test_annulus_counts():
    h = 1 / 64
    dom = RasterDomain.annulus(1.0, 2.0, h)
    area = dom.npoints * h * h
    assert abs(area - np.pi * 3.0) < 0.1


def test_interval_union():
    dom = RasterDomain.interval_union([(-1.0, -0.5), (0.5, 1.0)], 1 / 64)
    assert dom.d == 1
    x = dom.points()
    assert ((np.abs(x) >= 0.5 - 1 / 64) & (np.abs(x) <= 1.0 + 1 / 64)).all()


def test_rle_roundtrip(tmp_path):
    dom = RasterDomain.annulus(0.5, 1.2, 1 / 32)
    p = tmp_path / "mask.json"
    dom.save(str(p))
    back = RasterDomain.load(str(p))
    assert back.same_grid(dom)
    assert np.array_equal(back.mask, dom.mask)
    # byte-determinism of serialization
    dom.save(str(tmp_path / "m2.json"))
    assert (tmp_path / "mask.json").read_bytes() == (tmp_path / "m2.json").read_bytes()


def test_subset_relation():
    dom = RasterDomain.disk(1.0, 1 / 16)
    sub = dom.with_mask(dom.mask & (np.abs(dom.centers()) <= 0.5))
    assert sub.is_subset_of(dom)
    other = RasterDomain.disk(1.0, 1 / 8)
    with pytest.raises(NotSubset):
        sub.is_subset_of(other)


def test_cell_index_inverse():
    dom = RasterDomain.disk(0.7, 1 / 16)
    idx = dom.cell_index()
    cells = dom.mask_cells()
    for k in (0, dom.npoints // 2, dom.npoints - 1):
        r, c = cells[k]
        assert idx[r, c] == k
    assert idx[0, 0] == -1
