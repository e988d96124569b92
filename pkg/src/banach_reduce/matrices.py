"""Matrices over an algebra instance and exponential-product certificates.

A matrix is stored as a (npoints, n, n) array: evaluation at a spectrum
point is an algebra homomorphism, so exponentials, determinants and
inverses are computed per point with batched numpy linear algebra.
"""

import numpy as np
from scipy.linalg import schur

from .algebra import AlgebraElement, TupleOverA, default_tol
from .errors import (DimensionMismatch, NotNearIdentity, NotSpecialOrthogonal,
                     NotUnipotent, OwnerMismatch, SingularS)


class MatrixOverA:
    __slots__ = ("owner", "n", "data")

    def __init__(self, owner, data):
        data = np.ascontiguousarray(data, dtype=owner.dtype)
        if data.ndim != 3 or data.shape[1] != data.shape[2] or data.shape[0] != owner.npoints:
            raise DimensionMismatch(f"bad matrix data shape {data.shape}")
        data.setflags(write=False)
        self.owner = owner
        self.n = data.shape[1]
        self.data = data

    # -------------------------------------------------------- constructors

    @classmethod
    def identity(cls, owner, n):
        return cls.from_scalar_matrix(owner, np.eye(n))

    @classmethod
    def zero(cls, owner, n):
        return cls(owner, np.zeros((owner.npoints, n, n)))

    @classmethod
    def from_scalar_matrix(cls, owner, w):
        w = np.asarray(w, dtype=owner.dtype)
        return cls(owner, np.broadcast_to(w, (owner.npoints,) + w.shape))

    @classmethod
    def from_entries(cls, owner, rows):
        """Build from a nested list of elements / scalars."""
        n = len(rows)
        data = np.zeros((owner.npoints, n, n), dtype=owner.dtype)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise DimensionMismatch("ragged rows")
            for j, e in enumerate(row):
                if isinstance(e, AlgebraElement):
                    if not e.owner.same_as(owner):
                        raise OwnerMismatch("entry from a different instance")
                    data[:, i, j] = e.values
                else:
                    data[:, i, j] = e
        return cls(owner, data)

    # ----------------------------------------------------------- operations

    def entry(self, i, j):
        return AlgebraElement(self.owner, self.data[:, i, j])

    def _check(self, other):
        if not self.owner.same_as(other.owner):
            raise OwnerMismatch("matrices over different instances")
        if self.n != other.n:
            raise DimensionMismatch(f"{self.n} vs {other.n}")

    def __matmul__(self, other):
        self._check(other)
        return MatrixOverA(self.owner, self.data @ other.data)

    def __add__(self, other):
        self._check(other)
        return MatrixOverA(self.owner, self.data + other.data)

    def __sub__(self, other):
        self._check(other)
        return MatrixOverA(self.owner, self.data - other.data)

    def __neg__(self):
        return MatrixOverA(self.owner, -self.data)

    def scale(self, c):
        return MatrixOverA(self.owner, self.data * c)

    def transpose(self):
        return MatrixOverA(self.owner, np.swapaxes(self.data, 1, 2))

    def sup_norm(self):
        """Entrywise sup norm, used for residuals."""
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def op_norm(self):
        """Induced sup-operator norm overestimate: max row sum of entry sup norms."""
        entry_sup = np.max(np.abs(self.data), axis=0)
        return float(np.max(np.sum(entry_sup, axis=1)))

    def inv(self):
        return MatrixOverA(self.owner, np.linalg.inv(self.data))

    def row(self, i):
        return TupleOverA([self.entry(i, j) for j in range(self.n)])

    def is_scalar(self, tol=1e-12):
        ref = self.data[0]
        return bool(np.max(np.abs(self.data - ref[None])) <= tol * (1 + np.max(np.abs(ref))))


def row_times_matrix(row, M):
    """TupleOverA (1 x n) times an n x n matrix over the same instance."""
    if isinstance(row, TupleOverA):
        vec = row.value_matrix().T  # (npts, n)
    else:
        vec = np.stack([c.values for c in row], axis=1)
    if vec.shape[1] != M.n:
        raise DimensionMismatch("row length does not match matrix size")
    out = np.einsum("pi,pij->pj", vec, M.data)
    return TupleOverA([AlgebraElement(M.owner, out[:, j]) for j in range(M.n)])


def mat_mul(A, B):
    return A @ B


def identity(owner, n):
    return MatrixOverA.identity(owner, n)


# ------------------------------------------------------------ determinant

def determinant(M):
    """Pointwise determinant: cofactor expansion for n <= 6, Bareiss above."""
    n = M.n
    if n <= 6:
        vals = _det_cofactor(M.data)
    else:
        vals = _det_bareiss(M.data)
    return AlgebraElement(M.owner, vals)


def _det_cofactor(a):
    n = a.shape[1]
    if n == 1:
        return a[:, 0, 0].copy()
    if n == 2:
        return a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
    total = np.zeros(a.shape[0], dtype=a.dtype)
    cols = np.arange(n)
    for j in range(n):
        minor = a[:, 1:, :][:, :, cols != j]
        total += ((-1) ** j) * a[:, 0, j] * _det_cofactor(minor)
    return total


def _det_bareiss(a):
    a = a.copy()
    n = a.shape[1]
    prev = np.ones(a.shape[0], dtype=a.dtype)
    for k in range(n - 1):
        piv = a[:, k, k]
        if np.min(np.abs(piv)) == 0.0:
            raise ZeroDivisionError("zero pivot in Bareiss elimination")
        for i in range(k + 1, n):
            a[:, i, k + 1:] = (a[:, i, k + 1:] * piv[:, None]
                               - a[:, i, k, None] * a[:, k, k + 1:]) / prev[:, None]
        prev = piv
    return a[:, n - 1, n - 1].copy()


# ---------------------------------------------------------- exponentials

def _expm_batched(a):
    """Scaling-and-squaring Taylor exponential of a (npts, n, n) stack."""
    norm = float(np.max(np.sum(np.abs(a), axis=2))) if a.size else 0.0
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
    x = a / (2.0 ** s)
    n = a.shape[1]
    eye = np.broadcast_to(np.eye(n, dtype=a.dtype), a.shape)
    out = eye + x
    term = x
    for k in range(2, 24):
        term = term @ x / k
        out = out + term
        if np.max(np.abs(term)) < 1e-17 * max(1.0, np.max(np.abs(out))):
            break
    for _ in range(s):
        out = out @ out
    return out


def mat_exp(M):
    return MatrixOverA(M.owner, _expm_batched(M.data))


def log_unipotent(M, residual_tol=1e-10):
    """Log of I + N with N nilpotent of order <= n: the finite series."""
    n = M.n
    eye = MatrixOverA.identity(M.owner, n)
    N = M - eye
    power = N
    for _ in range(n - 1):
        power = power @ N
    res = power.sup_norm()
    if res > residual_tol * (1.0 + N.sup_norm() ** n):
        raise NotUnipotent(n, res)
    L = N.data.copy()
    pw = N.data
    for k in range(2, n):
        pw = pw @ N.data
        L += ((-1) ** (k + 1)) * pw / k
    return MatrixOverA(M.owner, L)


def log_near_identity(M, term_tol=1e-14, max_terms=300):
    """Mercator series log for ||M - I|| < 1 in the induced sup norm."""
    X = M - MatrixOverA.identity(M.owner, M.n)
    norm = X.op_norm()
    if norm >= 1.0:
        raise NotNearIdentity(norm)
    L = X.data.copy()
    pw = X.data
    for k in range(2, max_terms):
        pw = pw @ X.data
        term = ((-1) ** (k + 1)) * pw / k
        L += term
        if np.max(np.abs(term)) < term_tol:
            break
    return MatrixOverA(M.owner, L)


def so_log_np(W, tol=1e-9):
    """Skew-symmetric real logarithm of a special orthogonal matrix.

    Built from the 2x2 rotation blocks of a real Schur form; pairs of -1
    eigenvalues become half-turn rotations in their joint plane.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if W.shape != (n, n):
        raise NotSpecialOrthogonal("not square")
    if np.max(np.abs(W.T @ W - np.eye(n))) > tol:
        raise NotSpecialOrthogonal("W^T W != I")
    if abs(np.linalg.det(W) - 1.0) > max(tol, 1e-8):
        raise NotSpecialOrthogonal("det W != 1")
    T, Q = schur(W, output="real")
    L = np.zeros((n, n))
    minus_cols = []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > 1e-12:
            theta = np.arctan2(T[i + 1, i], T[i, i])
            u, v = Q[:, i], Q[:, i + 1]
            L += theta * (np.outer(v, u) - np.outer(u, v))
            i += 2
        else:
            if T[i, i] < 0:
                minus_cols.append(i)
            i += 1
    if len(minus_cols) % 2:
        raise NotSpecialOrthogonal("odd count of -1 eigenvalues")
    for a, b in zip(minus_cols[::2], minus_cols[1::2]):
        u, v = Q[:, a], Q[:, b]
        L += np.pi * (np.outer(v, u) - np.outer(u, v))
    return L


def so_log(M, tol=1e-9):
    """so_log for a scalar-embedded MatrixOverA."""
    if isinstance(M, np.ndarray):
        return so_log_np(M, tol)
    if not M.is_scalar():
        raise NotSpecialOrthogonal("entries are not scalar constants")
    L = so_log_np(M.data[0].real, tol)
    return MatrixOverA.from_scalar_matrix(M.owner, L)


# --------------------------------------------------------- exp products

class ExpProduct:
    """Ordered list of log-matrices certifying membership in Exp M_n(A)."""

    __slots__ = ("logs",)

    def __init__(self, logs):
        self.logs = list(logs)
        if self.logs:
            owner = self.logs[0].owner
            n = self.logs[0].n
            for L in self.logs[1:]:
                if not L.owner.same_as(owner) or L.n != n:
                    raise DimensionMismatch("inconsistent log factors")

    @property
    def k(self):
        return len(self.logs)

    def evaluate(self, owner=None, n=None):
        if not self.logs:
            if owner is None or n is None:
                raise ValueError("empty product needs owner and size to evaluate")
            return MatrixOverA.identity(owner, n)
        out = mat_exp(self.logs[0])
        for L in self.logs[1:]:
            out = out @ mat_exp(L)
        return out

    def inverse(self):
        """Exp product evaluating to the inverse: reversed, negated logs."""
        return ExpProduct([-L for L in reversed(self.logs)])

    def then(self, other):
        """Product self followed by other: evaluate() @ other.evaluate()."""
        return ExpProduct(self.logs + other.logs)

    def scaled(self, t):
        return ExpProduct([L.scale(t) for L in self.logs])

    def to_json(self):
        return {"format": "banach-reduce/exp-product-v1",
                "logs": [_matrix_to_json(L) for L in self.logs]}

    @classmethod
    def from_json(cls, doc, owner):
        return cls([_matrix_from_json(d, owner) for d in doc["logs"]])


def _matrix_to_json(M):
    flat = M.data.reshape(M.owner.npoints, -1)
    if M.owner.field == "C":
        vals = [[[float(v.real), float(v.imag)] for v in row] for row in flat]
    else:
        vals = [[float(v) for v in row] for row in flat]
    return {"n": M.n, "values": vals}


def _matrix_from_json(doc, owner):
    n = doc["n"]
    if owner.field == "C":
        flat = np.array([[complex(re, im) for re, im in row] for row in doc["values"]])
    else:
        flat = np.array(doc["values"], dtype=float)
    return MatrixOverA(owner, flat.reshape(owner.npoints, n, n))


def conjugate_exp_product(S, E):
    """{S^{-1} L_j S}: evaluates to S^{-1} E.evaluate() S."""
    det = determinant(S)
    if det.min_modulus() <= default_tol(det.sup_norm):
        raise SingularS("conjugating matrix is not invertible")
    Sinv = S.inv()
    return ExpProduct([Sinv @ L @ S for L in E.logs])


def verify_exp_product(E, target, tol):
    """Residual of prod exp(L_j) against the target matrix, with pass/fail."""
    if E.logs and (E.logs[0].n != target.n or not E.logs[0].owner.same_as(target.owner)):
        raise DimensionMismatch("certificate does not match the target")
    val = E.evaluate(owner=target.owner, n=target.n)
    residual = (val - target).sup_norm()
    return {"residual": residual, "tol": float(tol), "passed": residual <= tol}
