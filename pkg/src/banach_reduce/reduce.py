"""Reducibility decisions and witness constructors.

Constructive paths: n = 1 over complex planar grids, n = 1 over real
line grids, all n over finite products, n = 1 over the complex circle.
Other in-scope shapes get a decision (hole condition) plus ScopeError
for the constructive request.

Every constructor returns a witness object that re-verifies from its own
data (residual evaluation), or an obstruction report object.
"""

from dataclasses import dataclass, field

import numpy as np

from .algebra import (CIRCLE, GRID, PRODUCT, AlgebraElement, AlgebraInstance,
                      TupleOverA, circle_winding, default_tol, log_element)
from .errors import (HoleConditionViolated, InvalidWitness, LogObstruction,
                     NotInvertibleTuple, PathLeavesInvertibleSet,
                     ResolutionError, ScopeError)
from .matrices import (ExpProduct, MatrixOverA, determinant, log_unipotent,
                       row_times_matrix, so_log_np, verify_exp_product)
from . import _kernels
from .topology import (complement_components, default_band_eps,
                       hole_condition, hole_windings, phase_unwrap_log,
                       sublevel_zero_set, tietze_extend)

TWO_PI = 2.0 * np.pi


def _as_tuple(f):
    if isinstance(f, TupleOverA):
        return f
    if isinstance(f, AlgebraElement):
        return TupleOverA([f])
    return TupleOverA(list(f))


# ------------------------------------------------------------- witnesses

@dataclass
class ReductionWitness:
    f: TupleOverA
    g: AlgebraElement
    a: TupleOverA
    achieved_min: float
    extension_trace: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.f.n

    def reduced_tuple(self):
        return TupleOverA([fj + aj * self.g for fj, aj in zip(self.f, self.a)])

    def verify(self, tol=None):
        if tol is None:
            tol = default_tol(max(c.sup_norm for c in self.f))
        mm = self.reduced_tuple().min_modulus()
        return {"min_modulus": mm, "tol": float(tol), "passed": mm > tol}


@dataclass
class PrincipalWitness:
    f: TupleOverA
    g: AlgebraElement
    a: TupleOverA
    h: AlgebraElement = None      # n = 1: f + a g = e^h
    E: ExpProduct = None          # n >= 2: f + a g = e_1 * prod exp(L_j)

    @property
    def n(self):
        return self.f.n

    def reduced_tuple(self):
        return TupleOverA([fj + aj * self.g for fj, aj in zip(self.f, self.a)])

    def verify(self, tol):
        u = self.reduced_tuple()
        if self.n == 1:
            res = float(np.max(np.abs(np.exp(self.h.values) - u[0].values)))
        else:
            e1 = TupleOverA.basis(self.g.owner, self.n)
            w = row_times_matrix(e1, self.E.evaluate(owner=self.g.owner, n=self.n))
            res = max(float(np.max(np.abs(wj.values - uj.values))) for wj, uj in zip(w, u))
        return {"residual": res, "tol": float(tol), "passed": res <= tol}

    def as_equivalence(self):
        """View as an exp-equivalence witness f ~_g e_1."""
        owner = self.g.owner
        if self.n == 1 and self.E is None:
            E = ExpProduct([MatrixOverA(owner, self.h.values[:, None, None])])
        else:
            E = self.E
        return ExpEquivalenceWitness(self.f, self.g,
                                     TupleOverA.basis(owner, self.n), self.a, E)


@dataclass
class RowExtension:
    u: TupleOverA                 # the invertible row (f_1..f_n, g)
    W: ExpProduct                 # det-1 product with u * W = e_1

    @property
    def size(self):
        return self.u.n

    def verify(self, tol):
        owner = self.u.owner
        n1 = self.size
        Weval = self.W.evaluate(owner=owner, n=n1)
        uw = row_times_matrix(self.u, Weval)
        e1 = TupleOverA.basis(owner, n1)
        r_row = max(float(np.max(np.abs(a.values - b.values))) for a, b in zip(uw, e1))
        det = determinant(Weval)
        r_det = float(np.max(np.abs(det.values - 1.0)))
        first = Weval.inv().row(0)
        r_inv = max(float(np.max(np.abs(a.values - b.values))) for a, b in zip(first, self.u))
        r_prod = 0.0  # evaluate() is the product by construction
        passed = max(r_row, r_det, r_inv) <= tol
        return {"row_residual": r_row, "det_residual": r_det,
                "inverse_row_residual": r_inv, "product_residual": r_prod,
                "tol": float(tol), "passed": passed}


@dataclass
class ExpReducibilityWitness:
    a: TupleOverA
    g: AlgebraElement
    x: TupleOverA
    b: TupleOverA

    def verify(self, tol):
        res = verify_exp_reducibility(self.a, self.g, self)
        return {"residual": res, "tol": float(tol), "passed": res <= tol}


@dataclass
class ExpEquivalenceWitness:
    """Certificate for f ~_g base: f + g x = base * prod exp(L_j)."""

    f: TupleOverA
    g: AlgebraElement
    base: TupleOverA
    x: TupleOverA
    E: ExpProduct

    @property
    def n(self):
        return self.f.n

    def rhs(self):
        if not self.E.logs:
            return self.base
        return row_times_matrix(self.base, self.E.evaluate(owner=self.g.owner, n=self.n))

    def verify(self, tol):
        lhs = TupleOverA([fj + self.g * xj for fj, xj in zip(self.f, self.x)])
        r = self.rhs()
        res = max(float(np.max(np.abs(a.values - b.values))) for a, b in zip(lhs, r))
        return {"residual": res, "tol": float(tol), "passed": res <= tol}

    @classmethod
    def identity(cls, f, g):
        f = _as_tuple(f)
        owner = g.owner
        zero = TupleOverA([owner.zero() for _ in range(f.n)])
        return cls(f, g, f, zero, ExpProduct([]))

    def inverted(self):
        """Witness for base ~_g f (symmetry)."""
        Einv = self.E.inverse()
        if Einv.logs:
            M = Einv.evaluate(owner=self.g.owner, n=self.n)
            x_new = TupleOverA([e * (-1) for e in row_times_matrix(self.x, M)])
        else:
            x_new = TupleOverA([e * (-1) for e in self.x])
        return ExpEquivalenceWitness(self.base, self.g, self.f, x_new, Einv)

    def compose(self, other):
        """From f ~ m (self) and m ~ b (other), the witness f ~ b (transitivity)."""
        if other.f is not self.base and any(
                np.max(np.abs(a.values - b.values)) > 1e-9 for a, b in zip(other.f, self.base)):
            raise InvalidWitness("chain mismatch: self.base must equal other.f")
        if self.E.logs:
            E1 = self.E.evaluate(owner=self.g.owner, n=self.n)
            x2E1 = row_times_matrix(other.x, E1)
        else:
            x2E1 = other.x
        x_new = TupleOverA([a + b for a, b in zip(self.x, x2E1)])
        return ExpEquivalenceWitness(self.f, self.g, other.base, x_new,
                                     ExpProduct(other.E.logs + self.E.logs))


@dataclass
class Irreducible:
    report: dict

    def __bool__(self):
        return False


@dataclass
class NotPrincipal:
    report: dict

    def __bool__(self):
        return False


@dataclass
class Rejected:
    gap: float
    delta: float

    def __bool__(self):
        return False


# ---------------------------------------------------------------- bezout

def bezout(f, tol=None):
    """Solve sum x_j f_j = 1 via x_j = conj(f_j) / |f|^2."""
    f = _as_tuple(f)
    f.require_invertible(tol)
    jm2 = f.joint_modulus() ** 2
    owner = f.owner
    return TupleOverA([AlgebraElement(owner, np.conj(c.values) / jm2) for c in f])


# ------------------------------------------------- zero-free extensions

def _hole_puncture_point(hole, K_dom):
    """Cell of the hole outside K with maximal distance to K (ties lexicographic)."""
    if K_dom.d == 1:
        inside = K_dom.mask[hole.cells[:, 0]]
    else:
        inside = K_dom.mask[hole.cells[:, 0], hole.cells[:, 1]]
    outside = hole.cells[~inside]
    if outside.shape[0] == 0:
        return None
    if K_dom.d == 1:
        kcells = np.argwhere(K_dom.mask)
        d = np.abs(outside[:, 0:1] - kcells[None, :, 0].T.reshape(1, -1)).min(axis=1)
        pick = outside[int(np.argmax(d))]
        return float(K_dom.centers()[pick[0]])
    kcells = K_dom.mask_cells()
    idx = _kernels.nearest_sources(outside, kcells)
    near = kcells[idx]
    d2 = np.sum((outside - near) ** 2, axis=1)
    pick = outside[int(np.argmax(d2))]
    return complex(K_dom.centers()[pick[0], pick[1]])


def zero_free_extension(f, Z, K, tol=None):
    """Extend f (nonvanishing on raster Z) to a zero-free element on K.

    Complex planar case: windings around holes of Z that reach outside K
    are cancelled by unit-modulus Moebius powers anchored at puncture
    points; a nonzero winding around a hole inside K raises
    HoleConditionViolated (the Brouwer obstruction). Real line case:
    nearest-cell sign extension, refusing on sign mismatch across a hole
    inside K.

    Returns (F, trace) with F on the K instance and F = f on Z.
    """
    owner = f.owner
    if isinstance(K, AlgebraInstance):
        K_dom, K_inst = K.domain, K
    else:
        K_dom, K_inst = K, AlgebraInstance(GRID, owner.field, K)
    if tol is None:
        tol = default_tol(f.sup_norm)
    f_Z = f if f.owner.domain is Z or (f.owner.kind == GRID and np.array_equal(f.owner.domain.mask, Z.mask)) \
        else f.restrict(Z)
    if np.min(np.abs(f_Z.values)) <= tol:
        raise NotInvertibleTuple(np.min(np.abs(f_Z.values)), "f vanishes on Z")
    report = complement_components(Z)

    if owner.field == "R" and Z.d == 1:
        for hole in report.holes:
            inside = K_dom.mask[hole.cells[:, 0]]
            if np.all(inside):
                left, right = hole.boundary_cycle
                vl = f_Z.values[Z.cell_index()[left]]
                vr = f_Z.values[Z.cell_index()[right]]
                if np.sign(vl.real) != np.sign(vr.real):
                    raise HoleConditionViolated(hole.id, winding=None)
        F = tietze_extend(f_Z, K_inst)
        return F, {"kind": "sign-extension", "mobius_factors": []}

    if owner.field != "C" or Z.d != 2:
        raise ScopeError("zero-free extension implemented for complex planar and real line rasters")

    fg = f.grid_values()
    windings, _ = hole_windings(fg, Z, report)
    factors = []
    for hole in report.holes:
        w = windings[hole.id]
        p = _hole_puncture_point(hole, K_dom)
        if p is None:  # hole entirely inside K
            if w != 0:
                raise HoleConditionViolated(hole.id, winding=w)
        elif w != 0:
            factors.append((complex(p), int(w)))

    def phi_at(z):
        out = np.ones(z.shape, dtype=complex)
        for p, w in factors:
            r = z - p
            out *= (r / np.abs(r)) ** w
        return out

    z_Z = Z.points()
    u_vals = f_Z.values / phi_at(z_Z)
    Z_inst = AlgebraInstance(GRID, "C", Z)
    u = AlgebraElement(Z_inst, u_vals)
    h = phase_unwrap_log(u, Z, tol=tol)  # all windings cancelled by phi
    H = tietze_extend(h, K_inst)
    z_K = K_dom.points()
    F = AlgebraElement(K_inst, phi_at(z_K) * np.exp(H.values))
    trace = {"kind": "mobius-log-extension",
             "mobius_factors": [{"p": [p.real, p.imag], "winding": w} for p, w in factors]}
    return F, trace


def _cutoff(abs_g, eps):
    return np.clip((abs_g - eps / 2.0) / (eps / 2.0), 0.0, 1.0)


def _cutoff_vector(f, g, F, eps):
    """a = chi * (F - f) / g with chi the two-zone piecewise-linear cutoff."""
    absg = np.abs(g.values)
    chi = _cutoff(absg, eps)
    num = chi * (F.values - f.values)
    a = np.zeros_like(num)
    nz = chi > 0
    a[nz] = num[nz] / g.values[nz]
    return AlgebraElement(g.owner, a)


# --------------------------------------------------------- circle helper

def _circle_zero_free_extension(f, band, zero_winding=False):
    """Fill the complementary arcs of a cyclic zero band by log-linear
    interpolation; optionally spend one arc's 2*pi freedom to zero the
    total winding."""
    vals = f.values.copy()
    N = vals.size
    inband = band
    idx = np.arange(N)
    gaps = []
    i = 0
    # find maximal cyclic runs of ~inband
    out = ~inband
    if not out.any():
        return f, 0
    if out.all():
        raise ScopeError("zero band covers the whole circle")
    start = int(np.flatnonzero(inband)[0])
    order = (idx + start) % N
    run = None
    for k in order:
        if out[k]:
            if run is None:
                run = [k, k]
            else:
                run[1] = k
        else:
            if run is not None:
                gaps.append(run)
                run = None
    if run is not None:
        gaps.append(run)
    increments = []
    for a, b in gaps:
        ia = (a - 1) % N            # last band sample before the gap
        ib = (b + 1) % N            # first band sample after
        la = np.log(np.abs(vals[ia])) + 1j * np.angle(vals[ia])
        dang = np.angle(vals[ib] / vals[ia])
        increments.append((a, b, ia, ib, la, dang))
    # fill gaps by log-linear interpolation; track the resulting winding
    filled = vals.copy()
    for a, b, ia, ib, la, dang in increments:
        length = (b - a) % N + 2
        ts = np.arange(1, length) / length
        d = np.log(np.abs(vals[ib]) / np.abs(vals[ia])) + 1j * dang
        seg = np.exp(la + ts * d)
        cells = [(a + t) % N for t in range((b - a) % N + 1)]
        filled[cells] = seg[:len(cells)]
    w = circle_winding(filled)
    if zero_winding and w != 0 and gaps:
        a, b, ia, ib, la, dang = increments[0]
        dang2 = dang - TWO_PI * w
        length = (b - a) % N + 2
        ts = np.arange(1, length) / length
        d = np.log(np.abs(vals[ib]) / np.abs(vals[ia])) + 1j * dang2
        seg = np.exp(la + ts * d)
        cells = [(a + t) % N for t in range((b - a) % N + 1)]
        filled[cells] = seg[:len(cells)]
        w = circle_winding(filled)
    return AlgebraElement(f.owner, filled), w


def _band_eps_default(g):
    if g.owner.kind == GRID:
        return default_band_eps(g)
    vals = g.values
    if g.owner.kind == CIRCLE:
        d = np.max(np.abs(np.diff(np.concatenate([vals, vals[:1]]))))
        return max(2.0 * float(d), 1e-12 * (1.0 + g.sup_norm))
    return default_tol(g.sup_norm)


# ----------------------------------------------------------- reduce_tuple

def reduce_tuple(f, g, tol=None, eps=None):
    """Decide reducibility of (f, g) and construct a reduction vector.

    Returns a ReductionWitness or an Irreducible report carrying the
    hole/winding obstruction.
    """
    f = _as_tuple(f)
    owner = g.owner
    if tol is None:
        tol = default_tol(max([c.sup_norm for c in f] + [g.sup_norm]))
    pair = f.append(g)
    pair.require_invertible(tol)

    if owner.kind == PRODUCT:
        return _reduce_product(f, g, tol)
    if owner.kind == CIRCLE:
        return _reduce_circle(f, g, tol, eps)
    # grid
    d = owner.domain.d
    constructive = f.n == 1 and ((owner.field == "C" and d == 2) or (owner.field == "R" and d == 1))
    if eps is None:
        eps = _band_eps_default(g)
    if not constructive:
        Z = sublevel_zero_set(g, eps)
        decision = hole_condition(Z, owner.domain)
        raise ScopeError(
            f"constructive reduction supports n=1 over (C, d=2) or (R, d=1); "
            f"got n={f.n}, field={owner.field}, d={d}", decision=decision)
    return _reduce_grid_n1(f, g, tol, eps)


def _reduce_grid_n1(f, g, tol, eps):
    owner = g.owner
    f0 = f[0]
    Z = sublevel_zero_set(g, eps)
    if Z.npoints == 0:
        if f0.min_modulus() > tol:
            a = owner.zero()
            trace = {"kind": "g-invertible", "a": "zero"}
        else:
            a = (owner.unit() - f0) * g.invert(tol)
            trace = {"kind": "g-invertible", "a": "(1-f)/g"}
        w = ReductionWitness(f, g, TupleOverA([a]), (f0 + a * g).min_modulus(), trace)
        return w
    try:
        F, trace = zero_free_extension(f0, Z, owner, tol=tol)
    except HoleConditionViolated as exc:
        return Irreducible({"reason": "hole-condition",
                            "hole": exc.hole_id, "winding": exc.winding})
    a = _cutoff_vector(f0, g, _lift_to_owner(F, owner), eps)
    u = f0 + a * g
    mm = u.min_modulus()
    if mm <= tol:
        raise ResolutionError(f"constructed reduction has min modulus {mm:.3e} <= tol")
    trace = dict(trace, eps=eps)
    return ReductionWitness(f, g, TupleOverA([a]), mm, trace)


def _lift_to_owner(F, owner):
    """F lives on an instance with the same mask as owner's domain."""
    if F.owner.same_as(owner):
        return AlgebraElement(owner, F.values)
    return AlgebraElement(owner, F.values)


def _reduce_product(f, g, tol):
    owner = g.owner
    jf = f.joint_modulus()
    use_g = np.abs(g.values) >= jf
    coords = []
    for j, fj in enumerate(f):
        target = 1.0 if j == 0 else 0.0
        a = np.zeros(owner.npoints, dtype=owner.dtype)
        a[use_g] = (target - fj.values[use_g]) / g.values[use_g]
        coords.append(AlgebraElement(owner, a))
    a_tup = TupleOverA(coords)
    u = TupleOverA([fj + aj * g for fj, aj in zip(f, a_tup)])
    return ReductionWitness(f, g, a_tup, u.min_modulus(), {"kind": "pointwise"})


def _reduce_circle(f, g, tol, eps):
    owner = g.owner
    if f.n != 1:
        raise ScopeError("circle constructive path supports n = 1")
    f0 = f[0]
    if eps is None:
        eps = _band_eps_default(g)
    band = np.abs(g.values) <= eps
    if not band.any():
        a = (owner.unit() - f0) * g.invert(tol)
        u = f0 + a * g
        return ReductionWitness(f, g, TupleOverA([a]), u.min_modulus(), {"kind": "g-invertible"})
    if band.all():
        # g is (numerically) 0: f itself must be invertible
        a = owner.zero()
        return ReductionWitness(f, g, TupleOverA([a]), f0.min_modulus(), {"kind": "g-zero"})
    if owner.field == "R":
        vals = f0.values.real
        # sign consistency across each gap
        N = vals.size
        sgn = np.sign(vals)
        first = int(np.flatnonzero(band)[0])
        ref = None
        prev_sign = None
        for k in range(N + 1):
            i = (first + k) % N
            if band[i]:
                if prev_sign is not None and np.sign(vals[i]) != prev_sign:
                    return Irreducible({"reason": "sign-change", "at": i})
                prev_sign = np.sign(vals[i])
        filled = _fill_circle_real(f0.values.real, band)
        F = AlgebraElement(owner, filled)
    else:
        F, _ = _circle_zero_free_extension(
            AlgebraElement(owner, np.where(band, f0.values, 1.0).astype(complex)), band)
        # keep original values on the band
        vals = F.values.copy()
        vals[band] = f0.values[band]
        F = AlgebraElement(owner, vals)
    a = _cutoff_vector(f0, g, F, eps)
    u = f0 + a * g
    mm = u.min_modulus()
    if mm <= tol:
        raise ResolutionError(f"circle reduction min modulus {mm:.3e} <= tol")
    return ReductionWitness(f, g, TupleOverA([a]), mm, {"kind": "arc-extension", "eps": eps})


def _fill_circle_real(vals, band):
    out = vals.copy()
    N = vals.size
    idx = np.flatnonzero(band)
    for i in range(N):
        if not band[i]:
            # nearest band sample cyclically, ties toward the smaller index
            d = np.minimum((idx - i) % N, (i - idx) % N)
            out[i] = vals[idx[int(np.argmin(d))]]
    return out


# ---------------------------------------------------- reduce_to_principal

def reduce_to_principal(f, g, tol=None, eps=None):
    """Reducibility of (f, g) to the principal component, with certificate.

    Returns a PrincipalWitness or NotPrincipal(report).
    """
    f = _as_tuple(f)
    owner = g.owner
    if tol is None:
        tol = default_tol(max([c.sup_norm for c in f] + [g.sup_norm]))
    pair = f.append(g)
    pair.require_invertible(tol)

    if owner.kind == PRODUCT:
        return _principal_product(f, g, tol)
    if owner.kind == CIRCLE:
        return _principal_circle(f, g, tol, eps)
    d = owner.domain.d
    if f.n != 1 or not ((owner.field == "C" and d == 2) or (owner.field == "R" and d == 1)):
        if eps is None:
            eps = _band_eps_default(g)
        Z = sublevel_zero_set(g, eps)
        report = complement_components(Z)
        raise ScopeError("constructive principal reduction supports n=1 grids",
                         decision={"z_holes": len(report.holes)})
    if eps is None:
        eps = _band_eps_default(g)
    f0 = f[0]
    Z = sublevel_zero_set(g, eps)
    if Z.npoints == 0:
        a = (owner.unit() - f0) * g.invert(tol)
        h = owner.zero()
        return PrincipalWitness(f, g, TupleOverA([a]), h=h)
    if owner.field == "R":
        fZ_vals = f0.values[np.abs(g.values) <= eps]
        if np.min(fZ_vals.real) <= tol:
            return NotPrincipal({"reason": "nonpositive-on-zero-set",
                                 "min_value": float(np.min(fZ_vals.real))})
        F = tietze_extend(f0.restrict(Z), owner)
        a = _cutoff_vector(f0, g, F, eps)
        u = f0 + a * g
        h = log_element(u, tol=tol)
        return PrincipalWitness(f, g, TupleOverA([a]), h=h)
    # complex planar
    try:
        hZ = phase_unwrap_log(f0.restrict(Z), Z, tol=tol)
    except LogObstruction as exc:
        return NotPrincipal({"reason": "winding", "windings": exc.windings})
    H = tietze_extend(hZ, owner)
    F = AlgebraElement(owner, np.exp(H.values))
    a = _cutoff_vector(f0, g, F, eps)
    u = f0 + a * g
    mm = u.min_modulus()
    if mm <= tol:
        raise ResolutionError(f"principal reduction min modulus {mm:.3e} <= tol")
    return PrincipalWitness(f, g, TupleOverA([a]), h=H)


def principal_certificate_for_invertible(u, tol=None):
    """ExpProduct E with e_1 * E.evaluate() = u, for invertible tuples.

    n = 1 takes a continuous logarithm (may raise LogObstruction); n >= 2
    routes through row extension of the Bezout dual.
    """
    u = _as_tuple(u)
    owner = u.owner
    u.require_invertible(tol)
    if u.n == 1:
        h = log_element(u[0], tol=tol)
        return ExpProduct([MatrixOverA(owner, h.values[:, None, None])])
    v = bezout(u, tol)
    n = u.n
    sub = TupleOverA(list(v)[:-1])
    d = v.min_modulus()
    mask = sub.joint_modulus() <= d / 2.0
    c_coords = [owner.zero() for _ in range(n - 1)]
    if mask.any():
        vals = np.zeros(owner.npoints, dtype=owner.dtype)
        vals[mask] = 1.0 / v[n - 1].values[mask]
        c_coords[0] = AlgebraElement(owner, vals)
    c = TupleOverA(c_coords)
    ext = extend_row(v, c, tol=tol)
    P1 = ExpProduct([(-L).transpose() for L in ext.W.logs])
    t = row_times_matrix(u, P1.evaluate(owner=owner, n=n))
    if float(np.max(np.abs(t[0].values - 1.0))) > 1e-6:
        raise InvalidWitness("row extension did not normalize the first coordinate")
    data = np.broadcast_to(np.eye(n, dtype=owner.dtype), (owner.npoints, n, n)).copy()
    for j in range(1, n):
        data[:, 0, j] = -t[j].values
    P2 = MatrixOverA(owner, data)
    Q = ExpProduct(P1.logs + [log_unipotent(P2)])
    return Q.inverse()


def _principal_product(f, g, tol):
    owner = g.owner
    red = _reduce_product(f, g, tol)
    u = red.reduced_tuple()
    if owner.field == "R" and f.n == 1:
        gz = np.abs(g.values) <= tol
        bad = gz & (f[0].values.real <= tol)
        if bad.any():
            return NotPrincipal({"reason": "nonpositive-at-zero-of-g",
                                 "indices": [int(i) for i in np.flatnonzero(bad)]})
        # send the reduced value to 1 wherever g is invertible
        a0 = np.zeros(owner.npoints, dtype=owner.dtype)
        a0[~gz] = (1.0 - f[0].values[~gz]) / g.values[~gz]
        a = TupleOverA([AlgebraElement(owner, a0)])
        u = TupleOverA([f[0] + a[0] * g])
        h = log_element(u[0], tol=tol)
        return PrincipalWitness(f, g, a, h=h)
    if owner.field == "R" and f.n >= 2:
        # fibers R^n \ 0 are connected for n >= 2
        E = principal_certificate_for_invertible(u, tol)
        return PrincipalWitness(f, g, red.a, E=E)
    if f.n == 1:
        h = log_element(u[0], tol=tol)
        return PrincipalWitness(f, g, red.a, h=h)
    E = principal_certificate_for_invertible(u, tol)
    return PrincipalWitness(f, g, red.a, E=E)


def _principal_circle(f, g, tol, eps):
    owner = g.owner
    if f.n != 1 or owner.field != "C":
        raise ScopeError("circle principal path supports n = 1 over C")
    f0 = f[0]
    if eps is None:
        eps = _band_eps_default(g)
    band = np.abs(g.values) <= eps
    if not band.any():
        a = (owner.unit() - f0) * g.invert(tol)
        return PrincipalWitness(f, g, TupleOverA([a]), h=owner.zero())
    if band.all():
        try:
            h = log_element(f0, tol=tol)
        except LogObstruction as exc:
            return NotPrincipal({"reason": "winding", "windings": exc.windings})
        return PrincipalWitness(f, g, TupleOverA([owner.zero()]), h=h)
    F, w = _circle_zero_free_extension(
        AlgebraElement(owner, np.where(band, f0.values, 1.0).astype(complex)),
        band, zero_winding=True)
    vals = F.values.copy()
    vals[band] = f0.values[band]
    F = AlgebraElement(owner, vals)
    if circle_winding(F.values) != 0:
        return NotPrincipal({"reason": "winding", "windings": [(0, w)]})
    a = _cutoff_vector(f0, g, F, eps)
    u = f0 + a * g
    h = log_element(u, tol=tol)
    return PrincipalWitness(f, g, TupleOverA([a]), h=h)


# -------------------------------------------------------------- extend_row

def extend_row(u, reduction, tol=None):
    """Extend the invertible row u = (f_1..f_n, g) to a det-1 product of
    exponentials W with u W = e_1; u is the first row of W^{-1}.

    ``reduction`` is the reduction vector for (f, g): a ReductionWitness
    or a TupleOverA / list of n elements.
    """
    u = _as_tuple(u)
    owner = u.owner
    n1 = u.n
    n = n1 - 1
    if n < 1:
        raise InvalidWitness("row must have length at least 2")
    if tol is None:
        tol = default_tol(max(c.sup_norm for c in u))
    u.require_invertible(tol)
    if isinstance(reduction, ReductionWitness):
        x = reduction.a
    else:
        x = _as_tuple(reduction)
    if x.n != n:
        raise InvalidWitness(f"reduction vector length {x.n}, expected {n}")
    g = u[n]
    fx = TupleOverA([u[j] + g * x[j] for j in range(n)])
    if not fx.is_invertible(tol):
        raise InvalidWitness("reduction vector does not produce an invertible tuple")
    one_minus_g = owner.unit() - g
    bez = bezout(fx, tol)
    y = [one_minus_g * bj for bj in bez]

    eye = np.broadcast_to(np.eye(n1, dtype=owner.dtype), (owner.npoints, n1, n1))
    m1 = eye.copy()
    for j in range(n):
        m1[:, n, j] = x[j].values
    M1 = MatrixOverA(owner, m1)
    m2 = eye.copy()
    for j in range(n):
        m2[:, j, n] = y[j].values
    M2 = MatrixOverA(owner, m2)
    w2 = eye.copy()
    for j in range(n):
        w2[:, n, j] = -fx[j].values
    W2 = MatrixOverA(owner, w2)
    w3 = np.zeros((n1, n1))
    w3[n, 0] = 1.0
    w3[0, 1] = (-1.0) ** n
    for j in range(2, n1):
        w3[j - 1, j] = 1.0
    L3 = MatrixOverA.from_scalar_matrix(owner, so_log_np(w3))
    E = ExpProduct([log_unipotent(M1), log_unipotent(M2), log_unipotent(W2), L3])
    return RowExtension(u, E)


# --------------------------------------------------------- permutations

def _perm_matrix(sigma):
    """Matrix P with (f P)_j = f_{sigma(j)}."""
    n = len(sigma)
    P = np.zeros((n, n))
    for j, s in enumerate(sigma):
        P[s, j] = 1.0
    return P


def _perm_sign(sigma):
    sigma = list(sigma)
    seen = [False] * len(sigma)
    sign = 1
    for i in range(len(sigma)):
        if seen[i]:
            continue
        j = i
        clen = 0
        while not seen[j]:
            seen[j] = True
            j = sigma[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


def permute_principal_witness(f, g, sigma, witness):
    """Transport a principal witness for (f, g) to the permuted tuple f_sigma.

    ``sigma`` gives the permuted tuple as f_sigma[j] = f[sigma[j]]. Even
    permutations append one rotation log; odd ones route through the
    first/last swap S and the det-1 cycle W, conjugating the log factors
    by S as in the underlying identity.
    """
    f = _as_tuple(f)
    n = f.n
    sigma = list(sigma)
    if sorted(sigma) != list(range(n)):
        raise InvalidWitness("not a permutation")
    owner = g.owner
    if n == 1 or sigma == list(range(n)):
        return witness
    if witness.E is None:
        raise InvalidWitness("witness carries no exp product")
    x = witness.a
    E = witness.E
    P = _perm_matrix(sigma)
    f_new = TupleOverA([f[s] for s in sigma])
    x_new = TupleOverA([x[s] for s in sigma])
    if _perm_sign(sigma) > 0:
        LQ = MatrixOverA.from_scalar_matrix(owner, so_log_np(P))
        return PrincipalWitness(f_new, g, x_new, E=ExpProduct(E.logs + [LQ]))
    # odd permutation: first get a witness for F = f P S (even), then swap back
    swap = list(range(n))
    swap[0], swap[n - 1] = swap[n - 1], swap[0]
    S = _perm_matrix(swap)
    Q = P @ S
    LQ = MatrixOverA.from_scalar_matrix(owner, so_log_np(Q))
    E_F = ExpProduct(E.logs + [LQ])
    F = TupleOverA([f_new[s] for s in swap])
    xF = TupleOverA([x_new[s] for s in swap])
    # case-1 swap: e_n = e_1 W with det W = 1
    W = np.zeros((n, n))
    W[0, n - 1] = 1.0
    W[1, 0] = (-1.0) ** (n - 1)
    for i in range(2, n):
        W[i, i - 1] = 1.0
    LW = MatrixOverA.from_scalar_matrix(owner, so_log_np(W))
    Smat = MatrixOverA.from_scalar_matrix(owner, S)
    conj_logs = [Smat @ L @ Smat for L in E_F.logs]
    E_new = ExpProduct([LW] + conj_logs)
    return PrincipalWitness(f_new, g, x_new, E=E_new)


# --------------------------------------------------- exponential reducibility

def verify_exp_reducibility(a, g, wit):
    """Sup-norm residual of sum e^{x_j} (a_j + b_j g) = 1."""
    a = _as_tuple(a)
    acc = None
    for aj, xj, bj in zip(a, wit.x, wit.b):
        term = (aj + bj * g) * xj.exp()
        acc = term if acc is None else acc + term
    return float(np.max(np.abs(acc.values - 1.0)))


def exp_reduce_pair_bsr1(a, g, tol=None):
    """Exponential reducibility witness for a pair over a bsr-1 instance
    with connected invertibles: b from the reduction, x = -log(a + b g).

    A LogObstruction here flags a wrong instance annotation and is
    surfaced, not swallowed.
    """
    if tol is None:
        tol = default_tol(max(a.sup_norm, g.sup_norm))
    red = reduce_tuple(a, g, tol=tol)
    if isinstance(red, Irreducible):
        raise InvalidWitness(f"pair is not reducible: {red.report}")
    u = red.reduced_tuple()[0]
    x = AlgebraElement(g.owner, -log_element(u, tol=tol).values)
    return ExpReducibilityWitness(TupleOverA([_as_tuple(a)[0]]), g,
                                  TupleOverA([x]), red.a)


def principal_from_exp_reducible(a, g, wit, tol=None):
    """Turn an exponential-reducibility witness into a principal witness.

    n = 1 rearranges directly (a + b g = e^{-x}); n >= 2 extends the row
    v = (e^{x_1}, .., e^{x_n}) -- invertible coordinatewise, hence
    reducible with the zero vector -- and clears the residual row with a
    unipotent elimination.
    """
    a = _as_tuple(a)
    owner = g.owner
    n = a.n
    if tol is None:
        tol = default_tol(max(c.sup_norm for c in a))
    res = verify_exp_reducibility(a, g, wit)
    if res > max(1e-6, 100 * tol):
        raise InvalidWitness(f"exp-reducibility residual {res:.3e}")
    if n == 1:
        h = AlgebraElement(owner, -wit.x[0].values)
        return PrincipalWitness(a, g, wit.b, h=h)
    v = TupleOverA([xj.exp() for xj in wit.x])
    zero_red = TupleOverA([owner.zero() for _ in range(n - 1)])
    ext = extend_row(v, zero_red, tol=tol)
    P1 = ExpProduct([(-L).transpose() for L in ext.W.logs])
    u = TupleOverA([aj + bj * g for aj, bj in zip(a, wit.b)])
    t = row_times_matrix(u, P1.evaluate(owner=owner, n=n))
    data = np.broadcast_to(np.eye(n, dtype=owner.dtype), (owner.npoints, n, n)).copy()
    for j in range(1, n):
        data[:, 0, j] = -t[j].values
    P2 = MatrixOverA(owner, data)
    E = ExpProduct(P1.logs + [log_unipotent(P2)]).inverse()
    return PrincipalWitness(a, g, wit.b, E=E)


# -------------------------------------------------------------- homotopy

def exp_class_path(f, g, witness, samples=32, tol=None):
    """Sample the canonical path H(t) = base * prod exp(t L_j) - t g x and
    check every sample stays in I_n(g); the concrete face of clopen-ness.

    Raises PathLeavesInvertibleSet on failure; returns a report otherwise.
    """
    f = _as_tuple(f)
    if isinstance(witness, PrincipalWitness):
        witness = witness.as_equivalence()
    if tol is None:
        tol = default_tol(max([c.sup_norm for c in f] + [g.sup_norm]))
    n = witness.n
    owner = g.owner
    worst = np.inf
    for t in np.linspace(0.0, 1.0, samples):
        Et = witness.E.scaled(t)
        Ht = row_times_matrix(witness.base, Et.evaluate(owner=owner, n=n)) \
            if Et.logs else witness.base
        coords = [hj - (g * xj) * t for hj, xj in zip(Ht, witness.x)]
        mm = TupleOverA(coords + [g]).min_modulus()
        worst = min(worst, mm)
        if mm <= tol:
            raise PathLeavesInvertibleSet(t, mm)
    return {"samples": int(samples), "min_min_modulus": float(worst), "passed": True}


# -------------------------------------------------------- perturbation gate

def perturb_transfer(f, g, b, witness, tol=None, eps=None):
    """Transfer a witness from b to f when sup_Z |f - b| <= delta/2 with
    delta = min_Z |f| (the proof's epsilon in ]0, delta/2] gate).

    Returns the transferred witness, or Rejected(gap, delta).
    """
    f = _as_tuple(f)
    b = _as_tuple(b)
    if f.n != 1 or b.n != 1:
        raise ScopeError("perturbation transfer implemented for n = 1")
    owner = g.owner
    if tol is None:
        tol = default_tol(max([c.sup_norm for c in f] + [g.sup_norm]))
    if eps is None:
        eps = _band_eps_default(g)
    zmask = np.abs(g.values) <= eps
    if not zmask.any():
        zmask = np.ones(owner.npoints, dtype=bool)
    delta = float(np.min(np.abs(f[0].values[zmask])))
    gap = float(np.max(np.abs(f[0].values[zmask] - b[0].values[zmask])))
    if gap > delta / 2.0:
        return Rejected(gap, delta)
    x_b = witness.a
    chi = _cutoff(np.abs(g.values), eps)
    corr = np.zeros(owner.npoints, dtype=owner.dtype)
    nz = chi > 0
    corr[nz] = chi[nz] * (b[0].values[nz] - f[0].values[nz]) / g.values[nz]
    x_f = AlgebraElement(owner, x_b[0].values + corr)
    u_f = f[0] + x_f * g
    if u_f.min_modulus() <= tol:
        return Rejected(gap, delta)
    if isinstance(witness, ReductionWitness):
        out = ReductionWitness(f, g, TupleOverA([x_f]), u_f.min_modulus(),
                               {"kind": "perturbation-transfer", "gap": gap, "delta": delta})
        return out
    if isinstance(witness, PrincipalWitness) and witness.n == 1:
        u_b = b[0] + x_b[0] * g
        rho = u_f.values / u_b.values
        if np.max(np.abs(rho - 1.0)) >= 1.0:
            return Rejected(gap, delta)
        h_f = AlgebraElement(owner, witness.h.values + np.log(rho))
        out = PrincipalWitness(f, g, TupleOverA([x_f]), h=h_f)
        exp_class_path(f, g, out, samples=16, tol=tol)
        return out
    raise ScopeError("unsupported witness type for transfer")
