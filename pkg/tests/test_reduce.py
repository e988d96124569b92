import numpy as np
import pytest

import banach_reduce.reduce as R
from banach_reduce import certify
from banach_reduce.algebra import (AlgebraElement, TupleOverA, make_instance)
from banach_reduce.errors import (HoleConditionViolated, InvalidWitness,
                                  LogObstruction, NotInvertibleTuple,
                                  PathLeavesInvertibleSet, ScopeError)
from banach_reduce.matrices import ExpProduct
from banach_reduce.raster import RasterDomain
from banach_reduce.topology import default_band_eps, sublevel_zero_set

RNG = np.random.default_rng(11)


def annulus(h=1 / 64):
    return make_instance("grid", "C", RasterDomain.annulus(1.0, 2.0, h))


def random_invertible_tuple(inst, n, rng=RNG):
    while True:
        coords = [inst.element(rng.standard_normal(inst.npoints)
                               + 1j * rng.standard_normal(inst.npoints))
                  for _ in range(n)]
        t = TupleOverA(coords)
        if t.min_modulus() > 0.2:
            return t


# ----------------------------------------------------------------- bezout

def test_bezout_examples():
    one = make_instance("product", "C", 1)
    assert R.bezout(TupleOverA([one.unit()]))[0].allclose(one.unit(), 0)
    pr = make_instance("product", "R", 1)
    t = TupleOverA([pr.scalar(3), pr.scalar(4)])
    x = R.bezout(t)
    assert np.allclose([x[0].values[0], x[1].values[0]], [0.12, 0.16])
    ti = TupleOverA([one.scalar(1j)])
    assert np.allclose(R.bezout(ti)[0].values, [-1j])
    with pytest.raises(NotInvertibleTuple):
        R.bezout(TupleOverA([one.zero()]))


def test_bezout_property():
    inst = make_instance("product", "C", 40)
    for _ in range(20):
        t = random_invertible_tuple(inst, 3)
        x = R.bezout(t)
        s = t.dot(x)
        assert np.max(np.abs(s.values - 1.0)) < 1e-10


# ------------------------------------------------- zero-free extension

def test_zero_free_extension_constant():
    inst = annulus()
    g = inst.from_function(lambda z: np.abs(z) - 1.5)
    Z = sublevel_zero_set(g, default_band_eps(g))
    F, trace = R.zero_free_extension(inst.unit(), Z, inst)
    assert np.max(np.abs(F.values - 1.0)) < 1e-12
    assert trace["mobius_factors"] == []


def test_zero_free_extension_winding_band():
    inst = annulus()
    z = inst.coordinate()
    g = inst.from_function(lambda p: np.abs(p) - 1.5)
    Z = sublevel_zero_set(g, default_band_eps(g))
    F, trace = R.zero_free_extension(z, Z, inst)
    assert F.min_modulus() > 0.5
    # agrees with f on the band
    FZ = F.restrict(Z)
    fZ = z.restrict(Z)
    assert np.max(np.abs(FZ.values - fZ.values)) < 1e-9
    assert len(trace["mobius_factors"]) == 1
    assert trace["mobius_factors"][0]["winding"] == 1


def test_zero_free_extension_brouwer_obstruction():
    disk = make_instance("grid", "C", RasterDomain.disk(2.0, 1 / 64))
    z = disk.coordinate()
    g = disk.from_function(lambda p: np.abs(p) - 1.0)
    Z = sublevel_zero_set(g, default_band_eps(g))
    with pytest.raises(HoleConditionViolated) as ei:
        R.zero_free_extension(z, Z, disk)
    assert ei.value.winding == 1


# ------------------------------------------------------------ reduce_tuple

def test_reduce_g_invertible_trivial():
    inst = annulus()
    g = inst.unit()
    f = inst.coordinate()
    w = R.reduce_tuple(f, g)
    assert w.verify()["passed"]


def test_reduce_annulus_witness():
    inst = annulus(1 / 128)
    z = inst.coordinate()
    g = inst.from_function(lambda p: np.abs(p) - 1.5)
    w = R.reduce_tuple(z, g)
    assert isinstance(w, R.ReductionWitness)
    assert w.achieved_min > 0.2
    assert w.verify()["passed"]


def test_reduce_disk_irreducible():
    disk = make_instance("grid", "C", RasterDomain.disk(2.0, 1 / 64))
    z = disk.coordinate()
    g = disk.from_function(lambda p: np.abs(p) - 1.0)
    res = R.reduce_tuple(z, g)
    assert isinstance(res, R.Irreducible)
    assert res.report["winding"] == 1


def test_reduce_scope_error_carries_decision():
    inst = annulus()
    z = inst.coordinate()
    g = inst.from_function(lambda p: np.abs(p) - 1.5)
    with pytest.raises(ScopeError) as ei:
        R.reduce_tuple(TupleOverA([z, z + 3]), g)
    assert ei.value.decision is not None


def test_reduce_rejects_noninvertible_pair():
    inst = annulus()
    with pytest.raises(NotInvertibleTuple):
        R.reduce_tuple(inst.zero(), inst.zero())


def test_reduce_membership_invariance():
    # membership in R_n(g) is invariant under f -> f + g*anything
    inst = make_instance("product", "C", 12)
    f = random_invertible_tuple(inst, 1)
    g = inst.element(RNG.standard_normal(12) + 1j * RNG.standard_normal(12))
    w = R.reduce_tuple(f, g)
    assert w.verify()["passed"]
    shift = inst.element(RNG.standard_normal(12))
    f2 = TupleOverA([f[0] + g * shift])
    w2 = R.reduce_tuple(f2, g)
    assert w2.verify()["passed"]


# ------------------------------------------------------ principal witnesses

def test_principal_trivial_unit():
    inst = annulus()
    g = inst.from_function(lambda p: np.abs(p) - 1.5)
    w = R.reduce_to_principal(inst.unit(), g)
    assert isinstance(w, R.PrincipalWitness)
    assert np.max(np.abs(w.h.values)) < 1e-9
    assert w.verify(1e-9)["passed"]


def test_principal_annulus_winding_obstruction():
    inst = annulus(1 / 128)
    z = inst.coordinate()
    g = inst.from_function(lambda p: np.abs(p) - 1.5)
    res = R.reduce_to_principal(z, g)
    assert isinstance(res, R.NotPrincipal)
    assert res.report["windings"][0][1] == 1


def test_principal_annulus_exp_field():
    inst = annulus(1 / 128)
    g = inst.from_function(lambda p: np.abs(p) - 1.5)
    f = inst.from_function(lambda p: np.exp(np.abs(p)))
    w = R.reduce_to_principal(f, g)
    assert isinstance(w, R.PrincipalWitness)
    assert w.verify(1e-6)["passed"]


def test_principal_real_line_sign_criteria():
    dom = RasterDomain.interval_union([(-1.0, 1.0)], 1 / 128)
    inst = make_instance("grid", "R", dom)
    x = inst.coordinate()
    f = inst.from_function(lambda t: t * t + 0.25)
    w = R.reduce_to_principal(f, x)
    assert isinstance(w, R.PrincipalWitness) and w.verify(1e-9)["passed"]
    res = R.reduce_to_principal(inst.scalar(-1.0), x)
    assert isinstance(res, R.NotPrincipal)


def test_principal_product_exact():
    inst = make_instance("product", "R", 6)
    g = inst.element([0, 0, 1, 0, 2, 0])
    f = inst.element([1, 2, -3, 4, -5, 6])
    w = R.reduce_to_principal(f, g)
    assert isinstance(w, R.PrincipalWitness) and w.verify(1e-9)["passed"]
    f2 = inst.element([1, -2, 3, 4, 5, 6])  # negative where g = 0
    res = R.reduce_to_principal(f2, g)
    assert isinstance(res, R.NotPrincipal)


def test_principal_product_n2_exp_product():
    inst = make_instance("product", "C", 9)
    f = random_invertible_tuple(inst, 2)
    g = inst.element(RNG.standard_normal(9) + 1j * RNG.standard_normal(9))
    w = R.reduce_to_principal(f, g)
    assert isinstance(w, R.PrincipalWitness)
    assert w.E is not None
    assert w.verify(1e-8)["passed"]


# ------------------------------------------------------------- extend_row

def test_extend_row_symbolic_example():
    inst = make_instance("product", "C", 1)
    u = TupleOverA([inst.unit(), inst.zero()])
    ext = R.extend_row(u, TupleOverA([inst.zero()]))
    W = ext.W.evaluate(owner=inst, n=2)
    assert np.allclose(W.data[0], [[1, 0], [1, 1]], atol=1e-12)
    assert ext.verify(1e-10)["passed"]


def test_extend_row_e1_general():
    inst = make_instance("product", "C", 6)
    for n in (1, 2, 3):
        u = TupleOverA.basis(inst, n + 1)
        ext = R.extend_row(u, TupleOverA([inst.zero()] * n))
        rep = ext.verify(1e-10)
        assert rep["passed"], rep


def test_extend_row_random_suite_small():
    inst = make_instance("product", "C", 5)
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = rng.integers(1, 5)
        f = random_invertible_tuple(inst, int(n), rng)
        g = inst.element(rng.standard_normal(5) + 1j * rng.standard_normal(5))
        red = R.reduce_tuple(f, g)
        ext = R.extend_row(f.append(g), red)
        rep = ext.verify(1e-8)
        assert rep["passed"], rep


def test_extend_row_rejects_bad_reduction():
    inst = make_instance("product", "C", 3)
    f = TupleOverA([inst.element([1, 0, 1])])
    g = inst.element([0, 0, 0])
    with pytest.raises(InvalidWitness):
        R.extend_row(f.append(g + 1), TupleOverA([inst.scalar(-1)]))


# ------------------------------------------------------------ permutations

def test_permute_identity_noop():
    inst = make_instance("product", "C", 4)
    f = random_invertible_tuple(inst, 3)
    g = inst.element(RNG.standard_normal(4) + 0j)
    w = R.reduce_to_principal(f, g)
    assert R.permute_principal_witness(f, g, [0, 1, 2], w) is w


def test_permute_swap_n2():
    inst = make_instance("product", "C", 1)
    f = TupleOverA([inst.scalar(2), inst.scalar(3)])
    g = inst.scalar(0.5)
    w = R.reduce_to_principal(f, g)
    assert w.verify(1e-9)["passed"]
    w2 = R.permute_principal_witness(f, g, [1, 0], w)
    assert w2.verify(1e-9)["passed"]
    assert np.allclose(w2.f[0].values, 3)


def test_permute_random_n3_suite():
    import itertools

    inst = make_instance("product", "C", 5)
    rng = np.random.default_rng(17)
    for sigma in itertools.permutations(range(3)):
        f = random_invertible_tuple(inst, 3, rng)
        g = inst.element(rng.standard_normal(5) + 1j * rng.standard_normal(5))
        w = R.reduce_to_principal(f, g)
        w2 = R.permute_principal_witness(f, g, list(sigma), w)
        rep = w2.verify(1e-8)
        assert rep["passed"], (sigma, rep)


# -------------------------------------------------- exponential reducibility

def test_exp_reduce_scalar_examples():
    one = make_instance("product", "C", 1)
    wit = R.exp_reduce_pair_bsr1(one.scalar(2), one.zero())
    assert np.allclose(wit.b[0].values, 0)
    assert np.allclose(wit.x[0].values, -np.log(2))
    assert wit.verify(1e-12)["passed"]


def test_exp_reduce_componentwise_logs():
    p3 = make_instance("product", "C", 3)
    a = p3.element([1, -1, 1j])
    wit = R.exp_reduce_pair_bsr1(a, p3.zero())
    x = wit.x[0].values
    expected = -np.array([0, 1j * np.pi, 1j * np.pi / 2])
    diff = (x - expected) / (2j * np.pi)
    assert np.allclose(diff, np.round(diff.real), atol=1e-9)
    assert wit.verify(1e-9)["passed"]


def test_exp_reduce_circle_obstruction():
    circ = make_instance("circle", "C", 1024)
    with pytest.raises(LogObstruction):
        R.exp_reduce_pair_bsr1(circ.coordinate(), circ.zero())


def test_verify_exp_reducibility_violation():
    one = make_instance("product", "C", 4)
    a = one.element([2, 2, 2, 2])
    wit = R.exp_reduce_pair_bsr1(a, one.zero())
    assert R.verify_exp_reducibility(TupleOverA([a]), one.zero(), wit) < 1e-9
    bad = R.ExpReducibilityWitness(
        wit.a, wit.g, TupleOverA([wit.x[0] + 0.1]), wit.b)
    assert R.verify_exp_reducibility(TupleOverA([a]), one.zero(), bad) >= 0.05


def test_principal_from_exp_reducible_n1_and_n2():
    one = make_instance("product", "C", 4)
    a = one.element([2, 1 + 1j, 3, 0.5])
    g = one.element([0.1, 0, 0.2, 0])
    wit = R.exp_reduce_pair_bsr1(a, g)
    pw = R.principal_from_exp_reducible(a, g, wit)
    assert pw.verify(1e-8)["passed"]
    # n = 2 over C^4 with random x, solved b
    rng = np.random.default_rng(5)
    x = TupleOverA([one.element(0.3 * (rng.standard_normal(4) + 1j * rng.standard_normal(4)))
                    for _ in range(2)])
    a2 = TupleOverA([one.element(rng.standard_normal(4) + 1j * rng.standard_normal(4))
                     for _ in range(2)])
    # solve sum e^{x_j} (a_j + b_j g) = 1 for b: put everything on b_1
    g2 = one.element([1.0, 2.0, 0.5, 1.5])
    s = sum((aj * xj.exp() for aj, xj in zip(a2, x)),
            start=one.zero())
    b1 = (one.unit() - s) * (g2 * x[0].exp()).invert()
    wit2 = R.ExpReducibilityWitness(a2, g2, x, TupleOverA([b1, one.zero()]))
    assert wit2.verify(1e-8)["passed"]
    pw2 = R.principal_from_exp_reducible(a2, g2, wit2)
    rep = pw2.verify(1e-8)
    assert rep["passed"], rep


def test_principal_from_exp_rejects_corrupt():
    one = make_instance("product", "C", 2)
    a = one.element([2, 2])
    wit = R.exp_reduce_pair_bsr1(a, one.zero())
    bad = R.ExpReducibilityWitness(wit.a, wit.g,
                                   TupleOverA([wit.x[0] + 1.0]), wit.b)
    with pytest.raises(InvalidWitness):
        R.principal_from_exp_reducible(a, one.zero(), bad)


# ----------------------------------------------------- equivalence relation

def test_equivalence_laws():
    inst = make_instance("product", "C", 6)
    rng = np.random.default_rng(23)
    g = inst.element(rng.standard_normal(6) + 1j * rng.standard_normal(6))
    f = random_invertible_tuple(inst, 2, rng)
    ident = R.ExpEquivalenceWitness.identity(f, g)
    assert ident.verify(1e-12)["passed"]
    w = R.reduce_to_principal(f, g).as_equivalence()
    assert w.verify(1e-8)["passed"]
    inv = w.inverted()
    assert inv.verify(1e-8)["passed"]
    # transitivity: f ~ e1 (w) then e1 ~ f (inv of another witness)
    f3 = random_invertible_tuple(inst, 2, rng)
    w3 = R.reduce_to_principal(f3, g).as_equivalence()
    chain = w.compose(w3.inverted())
    assert chain.verify(1e-8)["passed"]
    assert np.allclose(chain.base[0].values, f3[0].values)


def test_exp_class_path_valid_and_corrupt():
    inst = make_instance("product", "C", 6)
    rng = np.random.default_rng(29)
    gv = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    gv[0] = 0.0  # genuine zero of g: the path must stay away from 0 there
    g = inst.element(gv)
    f = random_invertible_tuple(inst, 1, rng)
    w = R.reduce_to_principal(f, g)
    rep = R.exp_class_path(f, g, w, samples=64)
    assert rep["passed"]
    ident = R.ExpEquivalenceWitness.identity(f, g)
    assert R.exp_class_path(f, g, ident, samples=8)["passed"]
    # corrupt the base endpoint so it vanishes where g does
    eq = w.as_equivalence()
    bv = eq.base[0].values.copy()
    bv[0] = 0.0
    bad = R.ExpEquivalenceWitness(
        eq.f, eq.g, TupleOverA([inst.element(bv)]), eq.x, eq.E)
    with pytest.raises(PathLeavesInvertibleSet):
        R.exp_class_path(f, g, bad, samples=64)


def test_exp_class_path_annulus_witness():
    inst = annulus(1 / 64)
    g = inst.from_function(lambda p: np.abs(p) - 1.5)
    f = inst.from_function(lambda p: np.exp(np.abs(p)))
    w = R.reduce_to_principal(f, g)
    rep = R.exp_class_path(f, g, w, samples=32)
    assert rep["min_min_modulus"] >= 0.1


# ------------------------------------------------------ perturbation gate

def test_perturb_transfer_thresholds():
    inst = annulus(1 / 64)
    g = inst.from_function(lambda p: np.abs(p) - 1.5)
    b = inst.from_function(lambda p: np.exp(np.abs(p)))
    wb = R.reduce_tuple(b, g)
    # b = f: trivially accepted
    t0 = R.perturb_transfer(b, g, b, wb)
    assert isinstance(t0, R.ReductionWitness)
    eps = default_band_eps(g)
    zmask = np.abs(g.values) <= eps
    delta = float(np.min(np.abs(b.values[zmask])))
    f_ok = b + inst.scalar(0.4 * delta)
    t1 = R.perturb_transfer(f_ok, g, b, wb)
    assert isinstance(t1, R.ReductionWitness) and t1.verify()["passed"]
    f_bad = b - inst.scalar(0.9 * delta)
    t2 = R.perturb_transfer(f_bad, g, b, wb)
    assert isinstance(t2, R.Rejected)
    assert t2.gap > t2.delta / 2


def test_perturb_transfer_principal():
    inst = annulus(1 / 64)
    g = inst.from_function(lambda p: np.abs(p) - 1.5)
    b = inst.from_function(lambda p: np.exp(np.abs(p)))
    wb = R.reduce_to_principal(b, g)
    f = b + inst.scalar(0.01)
    t = R.perturb_transfer(f, g, b, wb)
    assert isinstance(t, R.PrincipalWitness)
    assert t.verify(1e-6)["passed"]


# --------------------------------------------------- serialization soundness

def test_witness_soundness_from_serialized_form():
    inst = make_instance("product", "C", 5)
    rng = np.random.default_rng(31)
    f = random_invertible_tuple(inst, 2, rng)
    g = inst.element(rng.standard_normal(5) + 1j * rng.standard_normal(5))
    for wit, tol in (
            (R.reduce_tuple(f, g), 1e-8),
            (R.reduce_to_principal(f, g), 1e-8),
            (R.extend_row(f.append(g), R.reduce_tuple(f, g)), 1e-8),
            (R.exp_reduce_pair_bsr1(f[0], g), 1e-8),
    ):
        doc = certify.make_certificate(wit, tol)
        blob = certify.dumps(doc)
        import json

        back = certify.verify(json.loads(blob))
        assert back["passed"], back


def test_certificate_rejects_corrupted_numeric():
    inst = make_instance("product", "C", 4)
    f = TupleOverA([inst.element([2, 2, 2, 2])])
    g = inst.element([0.5, 0.5, 0.5, 0.5])
    w = R.reduce_to_principal(f, g)
    doc = certify.make_certificate(w, 1e-8)
    doc["witness"]["h"][0][0] += 0.1
    rep = certify.verify(doc)
    assert not rep["passed"]
