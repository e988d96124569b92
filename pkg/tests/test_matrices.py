import numpy as np
import pytest

from banach_reduce.algebra import make_instance
from banach_reduce.errors import (NotNearIdentity, NotSpecialOrthogonal,
                                  NotUnipotent)
from banach_reduce.matrices import (ExpProduct, MatrixOverA,
                                    conjugate_exp_product, determinant,
                                    log_near_identity, log_unipotent, mat_exp,
                                    so_log_np, verify_exp_product)

INST = make_instance("product", "C", 5)
RNG = np.random.default_rng(7)


def random_matrix(n, scale=1.0):
    d = RNG.standard_normal((INST.npoints, n, n)) + 1j * RNG.standard_normal((INST.npoints, n, n))
    return MatrixOverA(INST, scale * d)


def test_identity_and_mul():
    I = MatrixOverA.identity(INST, 3)
    A = random_matrix(3)
    assert np.allclose((A @ I).data, A.data)
    assert np.allclose((I @ A).data, A.data)


def test_det_multiplicative():
    for _ in range(20):
        A, B = random_matrix(3), random_matrix(3)
        dAB = determinant(A @ B).values
        dA_dB = determinant(A).values * determinant(B).values
        assert np.max(np.abs(dAB - dA_dB)) < 1e-10 * max(1, np.max(np.abs(dA_dB)))


def test_det_large_n_bareiss_path():
    A = random_matrix(7)
    d = determinant(A).values
    ref = np.linalg.det(A.data)
    assert np.max(np.abs(d - ref)) < 1e-8 * max(1, np.max(np.abs(ref)))


def test_expm_against_scipy():
    from scipy.linalg import expm

    A = random_matrix(4, scale=0.8)
    E = mat_exp(A)
    ref = np.stack([expm(A.data[p]) for p in range(INST.npoints)])
    assert np.max(np.abs(E.data - ref)) < 1e-10


def test_log_unipotent_roundtrip():
    n = 4
    data = np.broadcast_to(np.eye(n, dtype=complex), (INST.npoints, n, n)).copy()
    data[:, 0, 1] = 2.0
    data[:, 1, 3] = -1j
    M = MatrixOverA(INST, data)
    L = log_unipotent(M)
    rep = verify_exp_product(ExpProduct([L]), M, 1e-9)
    assert rep["passed"]


def test_log_unipotent_rejects():
    with pytest.raises(NotUnipotent):
        log_unipotent(random_matrix(3))


def test_log_near_identity_roundtrip():
    M = MatrixOverA.identity(INST, 3) + random_matrix(3, scale=0.1)
    L = log_near_identity(M)
    assert verify_exp_product(ExpProduct([L]), M, 1e-9)["passed"]
    with pytest.raises(NotNearIdentity):
        log_near_identity(random_matrix(3, scale=5.0))


def test_so_log_examples():
    assert np.allclose(so_log_np(np.eye(3)), 0)
    quarter = np.array([[0.0, -1.0], [1.0, 0.0]])
    L = so_log_np(quarter)
    assert np.allclose(L, [[0, -np.pi / 2], [np.pi / 2, 0]], atol=1e-12)
    # 3-cycle permutation: rotation by 2*pi/3 about (1,1,1)/sqrt(3)
    W3 = np.zeros((3, 3))
    W3[2, 0] = 1.0
    W3[0, 1] = 1.0
    W3[1, 2] = 1.0
    L3 = so_log_np(W3)
    assert np.allclose(L3, -L3.T, atol=1e-12)
    assert np.max(np.abs(np.linalg.matrix_power(np.eye(3), 1) @ _expm(L3) - W3)) < 1e-9
    assert abs(np.linalg.norm(L3) - 2 * np.pi / 3 * np.sqrt(2)) < 1e-9


def _expm(L):
    from scipy.linalg import expm

    return expm(L)


def test_so_log_minus_identity_even():
    L = so_log_np(-np.eye(2))
    assert np.max(np.abs(_expm(L) + np.eye(2))) < 1e-9
    with pytest.raises(NotSpecialOrthogonal):
        so_log_np(np.diag([1.0, -1.0]))
    with pytest.raises(NotSpecialOrthogonal):
        so_log_np(np.array([[2.0, 0.0], [0.0, 0.5]]))


def test_exp_product_inverse_and_then():
    A = random_matrix(3, scale=0.2)
    B = random_matrix(3, scale=0.2)
    E = ExpProduct([A, B])
    M = E.evaluate()
    Minv = E.inverse().evaluate()
    assert np.max(np.abs((M @ Minv).data - np.eye(3))) < 1e-10
    both = E.then(E.inverse()).evaluate()
    assert np.max(np.abs(both.data - np.eye(3))) < 1e-9


def test_conjugation_identity():
    S = MatrixOverA.identity(INST, 3) + random_matrix(3, scale=0.3)
    E = ExpProduct([random_matrix(3, scale=0.3) for _ in range(3)])
    C = conjugate_exp_product(S, E)
    lhs = (S.inv() @ E.evaluate()) @ S
    assert np.max(np.abs(C.evaluate().data - lhs.data)) < 1e-8


def test_verify_exp_product_detects_violation():
    L = random_matrix(3, scale=0.2)
    target = mat_exp(L)
    assert verify_exp_product(ExpProduct([L]), target, 1e-9)["passed"]
    R = MatrixOverA.identity(INST, 3) + random_matrix(3, scale=1e-3)
    bad = target @ R
    assert not verify_exp_product(ExpProduct([L]), bad, 1e-6)["passed"]
    # empty product against the identity
    assert verify_exp_product(ExpProduct([]), MatrixOverA.identity(INST, 3), 0)["passed"]


def test_exp_product_serialization_roundtrip():
    E = ExpProduct([random_matrix(2, scale=0.4), random_matrix(2, scale=0.4)])
    doc = E.to_json()
    back = ExpProduct.from_json(doc, INST)
    assert np.max(np.abs(back.evaluate().data - E.evaluate().data)) < 1e-14
