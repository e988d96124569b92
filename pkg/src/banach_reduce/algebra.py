"""Concrete commutative unital Banach algebras and their elements.

Three instance kinds are supported, all with a finite spectrum:

* ``grid``    -- C(K, K-field) sampled at the cells of a RasterDomain,
* ``product`` -- K^m with coordinatewise operations,
* ``circle``  -- C(T) sampled at N equispaced points of the unit circle.

Elements are immutable value arrays indexed by spectrum points; all
operations are pointwise, the norm is the sup norm.
"""

import numpy as np

from .errors import (EmptySpectrum, LogObstruction, NonPositiveValue,
                     NotInvertible, NotInvertibleTuple, OwnerMismatch)
from .raster import RasterDomain

GRID = "grid"
PRODUCT = "product"
CIRCLE = "circle"


def default_tol(norm):
    """Scale-aware invertibility tolerance."""
    return 1e-8 * (1.0 + float(norm))


class AlgebraInstance:
    __slots__ = ("kind", "field", "domain", "m", "N", "bsr1_connected", "_points")

    def __init__(self, kind, field, descriptor, bsr1_connected=None):
        if field not in ("R", "C"):
            raise ValueError("field must be 'R' or 'C'")
        self.kind = kind
        self.field = field
        self.domain = None
        self.m = None
        self.N = None
        self._points = None
        if kind == GRID:
            if not isinstance(descriptor, RasterDomain):
                raise ValueError("grid instance needs a RasterDomain")
            if descriptor.npoints == 0:
                raise EmptySpectrum("mask has no cells")
            self.domain = descriptor
        elif kind == PRODUCT:
            self.m = int(descriptor)
            if self.m < 1:
                raise ValueError("need m >= 1")
        elif kind == CIRCLE:
            self.N = int(descriptor)
            if self.N < 8:
                raise ValueError("need N >= 8 circle samples")
        else:
            raise ValueError(f"unknown kind {kind!r}")
        self.bsr1_connected = bsr1_connected

    @property
    def dtype(self):
        return np.complex128 if self.field == "C" else np.float64

    @property
    def npoints(self):
        if self.kind == GRID:
            return self.domain.npoints
        return self.m if self.kind == PRODUCT else self.N

    def points(self):
        """Spectrum point coordinates.

        grid: cell centers (complex for d=2, real for d=1); product: indices
        0..m-1; circle: angles theta_k = 2*pi*k/N.
        """
        if self._points is None:
            if self.kind == GRID:
                self._points = self.domain.points()
            elif self.kind == PRODUCT:
                self._points = np.arange(self.m, dtype=np.float64)
            else:
                self._points = 2.0 * np.pi * np.arange(self.N) / self.N
        return self._points

    # -------------------------------------------------------- constructors

    def element(self, values):
        values = np.asarray(values, dtype=self.dtype)
        if values.shape == ():
            values = np.full(self.npoints, values, dtype=self.dtype)
        if values.shape != (self.npoints,):
            raise ValueError(f"expected {self.npoints} values, got {values.shape}")
        return AlgebraElement(self, values)

    def scalar(self, c):
        c = complex(c)
        if self.field == "R":
            if abs(c.imag) > 1e-14 * (1 + abs(c)):
                raise ValueError("complex scalar in a real algebra")
            c = c.real
        return self.element(np.full(self.npoints, c, dtype=self.dtype))

    def unit(self):
        return self.scalar(1.0)

    def zero(self):
        return self.scalar(0.0)

    def from_function(self, fn):
        return self.element(np.asarray(fn(self.points()), dtype=self.dtype))

    def coordinate(self):
        """The identity chart: z on grids, index on products, e^{i theta} on the circle."""
        if self.kind == CIRCLE:
            if self.field != "C":
                raise ValueError("circle coordinate lives in the complex algebra")
            return self.element(np.exp(1j * self.points()))
        return self.element(self.points())

    def same_as(self, other):
        if self is other:
            return True
        if self.kind != other.kind or self.field != other.field:
            return False
        if self.kind == GRID:
            return self.domain.same_grid(other.domain) and np.array_equal(self.domain.mask, other.domain.mask)
        return self.npoints == other.npoints

    def describe(self):
        d = {"kind": self.kind, "field": self.field}
        if self.kind == GRID:
            d.update(d=self.domain.d, h=self.domain.h, shape=list(self.domain.shape),
                     origin=list(self.domain.origin), margin=self.domain.margin,
                     npoints=self.domain.npoints)
        elif self.kind == PRODUCT:
            d["m"] = self.m
        else:
            d["N"] = self.N
        return d


def make_instance(kind, field, descriptor, **kw):
    return AlgebraInstance(kind, field, descriptor, **kw)


def _check_owner(a, b):
    if not a.owner.same_as(b.owner):
        raise OwnerMismatch("elements belong to different instances")


class AlgebraElement:
    __slots__ = ("owner", "values")

    def __init__(self, owner, values):
        self.owner = owner
        values = np.ascontiguousarray(values, dtype=owner.dtype)
        values.setflags(write=False)
        self.values = values

    # ------------------------------------------------------------- algebra

    def _coerce(self, other):
        if isinstance(other, AlgebraElement):
            _check_owner(self, other)
            return other
        return self.owner.scalar(other)

    def __add__(self, other):
        other = self._coerce(other)
        return AlgebraElement(self.owner, self.values + other.values)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return AlgebraElement(self.owner, self.values - other.values)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return AlgebraElement(self.owner, self.values * other.values)

    __rmul__ = __mul__

    def __neg__(self):
        return AlgebraElement(self.owner, -self.values)

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.invert()

    def conj(self):
        return AlgebraElement(self.owner, np.conj(self.values))

    def abs(self):
        return AlgebraElement(self.owner, np.abs(self.values).astype(self.owner.dtype))

    @property
    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def min_modulus(self):
        return float(np.min(np.abs(self.values)))

    def invert(self, tol=None):
        if tol is None:
            tol = default_tol(self.sup_norm)
        mods = np.abs(self.values)
        k = int(np.argmin(mods))
        if mods[k] <= tol:
            raise NotInvertible(mods[k], where=k)
        return AlgebraElement(self.owner, 1.0 / self.values)

    def allclose(self, other, tol):
        other = self._coerce(other)
        return float(np.max(np.abs(self.values - other.values))) <= tol

    def restrict(self, subdomain):
        """Restriction to a sub-raster of this grid instance's domain."""
        if self.owner.kind != GRID:
            raise ValueError("restrict applies to grid instances")
        own = self.owner.domain
        if not subdomain.is_subset_of(own):
            raise ValueError("subdomain is not contained in the owner domain")
        grid_vals = np.zeros(own.shape, dtype=self.owner.dtype)
        grid_vals[own.mask] = self.values
        sub = AlgebraInstance(GRID, self.owner.field, subdomain,
                              bsr1_connected=self.owner.bsr1_connected)
        return AlgebraElement(sub, grid_vals[subdomain.mask])

    def grid_values(self):
        """Values scattered back onto the full grid (0 off the mask)."""
        dom = self.owner.domain
        out = np.zeros(dom.shape, dtype=self.owner.dtype)
        out[dom.mask] = self.values
        return out

    # -------------------------------------------------------- transcendental

    def exp(self):
        return AlgebraElement(self.owner, np.exp(self.values))

    def log(self, tol=None):
        return log_element(self, tol=tol)

    # -------------------------------------------------------- serialization

    def to_json(self):
        doc = {"format": "banach-reduce/element-v1",
               "instance": self.owner.describe()}
        if self.owner.field == "C":
            doc["values"] = [[float(v.real), float(v.imag)] for v in self.values]
        else:
            doc["values"] = [float(v) for v in self.values]
        return doc

    @classmethod
    def from_json(cls, doc, owner=None):
        if doc.get("format") != "banach-reduce/element-v1":
            raise ValueError("not an element document")
        desc = doc["instance"]
        if owner is None:
            owner = instance_like(desc)
        if desc["field"] == "C":
            vals = np.array([complex(re, im) for re, im in doc["values"]])
        else:
            vals = np.array(doc["values"], dtype=np.float64)
        return owner.element(vals)


def instance_like(desc):
    """Rebuild a product/circle instance from its description.

    Grid instances carry a mask and must be supplied by the caller
    (certificates embed the mask separately).
    """
    if desc["kind"] == PRODUCT:
        return AlgebraInstance(PRODUCT, desc["field"], desc["m"])
    if desc["kind"] == CIRCLE:
        return AlgebraInstance(CIRCLE, desc["field"], desc["N"])
    raise ValueError("grid instances need an explicit domain to deserialize")


def exp_element(a):
    return a.exp()


def log_element(a, tol=None, punctures=None):
    """Pointwise logarithm with a continuous branch, when one exists.

    Real instances require strictly positive values. Complex grid
    instances delegate to the planar phase unwrapper; the complex circle
    refuses with the total winding when it is nonzero.
    """
    if tol is None:
        tol = default_tol(a.sup_norm)
    mods = np.abs(a.values)
    k = int(np.argmin(mods))
    if mods[k] <= tol:
        raise NotInvertible(mods[k], where=k)
    owner = a.owner
    if owner.field == "R":
        if np.min(a.values.real) <= tol:
            raise NonPositiveValue("real log requires strictly positive values")
        return AlgebraElement(owner, np.log(a.values.real).astype(owner.dtype))
    if owner.kind == PRODUCT:
        return AlgebraElement(owner, np.log(a.values))
    if owner.kind == CIRCLE:
        return _circle_log(a)
    from .topology import phase_unwrap_log

    return phase_unwrap_log(a, owner.domain, punctures=punctures, tol=tol)


def circle_winding(values):
    """Total winding of nonvanishing samples around the cyclic spectrum."""
    from .errors import ResolutionError

    ang = np.angle(values)
    inc = np.diff(np.concatenate([ang, ang[:1]]))
    inc -= 2.0 * np.pi * np.round(inc / (2.0 * np.pi))
    if np.max(np.abs(inc)) >= np.pi / 2:
        raise ResolutionError("phase step >= pi/2 between circle samples")
    total = float(np.sum(inc)) / (2.0 * np.pi)
    w = int(np.round(total))
    if abs(total - w) > 0.25:
        raise ResolutionError("winding sum does not round to an integer")
    return w


def _circle_log(a):
    w = circle_winding(a.values)
    if w != 0:
        raise LogObstruction([(0, w)])
    ang = np.angle(a.values)
    inc = np.diff(ang)
    inc -= 2.0 * np.pi * np.round(inc / (2.0 * np.pi))
    theta = ang[0] + np.concatenate([[0.0], np.cumsum(inc)])
    return AlgebraElement(a.owner, np.log(np.abs(a.values)) + 1j * theta)


class TupleOverA:
    """Ordered tuple of elements sharing one owner."""

    __slots__ = ("coordinates",)

    def __init__(self, coordinates):
        coords = tuple(coordinates)
        if not coords:
            raise ValueError("empty tuple")
        owner = coords[0].owner
        for c in coords[1:]:
            if not owner.same_as(c.owner):
                raise OwnerMismatch("tuple coordinates have different owners")
        self.coordinates = coords

    @property
    def owner(self):
        return self.coordinates[0].owner

    @property
    def n(self):
        return len(self.coordinates)

    def __iter__(self):
        return iter(self.coordinates)

    def __getitem__(self, j):
        return self.coordinates[j]

    def value_matrix(self):
        """(n, npoints) array of coordinate values."""
        return np.stack([c.values for c in self.coordinates])

    def joint_modulus(self):
        return np.sqrt(np.sum(np.abs(self.value_matrix()) ** 2, axis=0))

    def min_modulus(self):
        return float(np.min(self.joint_modulus()))

    def is_invertible(self, tol=None):
        if tol is None:
            tol = default_tol(max(c.sup_norm for c in self.coordinates))
        return self.min_modulus() > tol

    def require_invertible(self, tol=None):
        if tol is None:
            tol = default_tol(max(c.sup_norm for c in self.coordinates))
        jm = self.joint_modulus()
        k = int(np.argmin(jm))
        if jm[k] <= tol:
            raise NotInvertibleTuple(jm[k], where=k)

    def dot(self, other):
        """<f, g> = sum f_j g_j."""
        if isinstance(other, TupleOverA):
            other = other.coordinates
        acc = self.coordinates[0] * other[0]
        for a, b in zip(self.coordinates[1:], other[1:]):
            acc = acc + a * b
        return acc

    def append(self, elem):
        return TupleOverA(self.coordinates + (elem,))

    @classmethod
    def basis(cls, owner, n, j=0):
        """e_{j+1} in A^n."""
        coords = [owner.zero() for _ in range(n)]
        coords[j] = owner.unit()
        return cls(coords)

    def to_json(self):
        return {"format": "banach-reduce/tuple-v1",
                "coordinates": [c.to_json() for c in self.coordinates]}

    @classmethod
    def from_json(cls, doc, owner=None):
        return cls([AlgebraElement.from_json(c, owner=owner) for c in doc["coordinates"]])
