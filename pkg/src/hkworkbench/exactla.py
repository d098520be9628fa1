"""Exact arithmetic in finite fields and rank of matrices over them.

Field elements are plain Python ints. In the prime field ``F_p`` an element
is its residue in ``[0, p)``. In an extension ``F_{p^k}`` an element is the
integer whose base-``p`` digits are the coefficients (lowest first) of its
polynomial representative modulo the defining irreducible.

Three rank routines live here:

* a generic row reduction that only uses the field operations (any field),
* a blocked elimination over ``F_p`` whose trailing updates are float64
  matrix products (exact while ``rank * p**2 < 2**53``),
* a bit-packed XOR elimination over ``F_2`` with 64 columns per word.

``sparse_rank`` peels singleton rows/columns and splits the remaining
bipartite pattern into connected components before handing dense blocks to
one of the dense routines.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

__all__ = [
    "FieldCtx",
    "FpMatrix",
    "UnsupportedFieldError",
    "is_prime",
    "field_inv",
    "rank",
    "rank_bitpacked",
    "rank_generic",
    "sparse_rank",
]

_FLOAT_EXACT = 2**53


class UnsupportedFieldError(ValueError):
    """Raised when a routine is asked to work over a field it does not handle."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


# ---------------------------------------------------------------------------
# polynomial helpers over F_p (coefficient lists, lowest degree first)
# ---------------------------------------------------------------------------

def _trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mod(a: list[int], m: Sequence[int], p: int) -> list[int]:
    a = _trim([x % p for x in a])
    dm = len(m) - 1
    inv_lead = pow(m[-1], -1, p)
    while len(a) - 1 >= dm:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        _trim(a)
    return a


def _is_irreducible(m: Sequence[int], p: int) -> bool:
    """Exhaustive check: no monic factor of degree 1..deg/2."""
    k = len(m) - 1
    if k <= 0 or m[-1] % p != 1:
        return False
    if k == 1:
        return True
    for d in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            if not _poly_mod(list(m), list(low) + [1], p):
                return False
    return True


@dataclass(frozen=True)
class FieldCtx:
    """A finite field ``F_{p^k}``.

    ``modulus_poly`` lists the coefficients (lowest first) of the monic
    irreducible defining the extension; it is ``None`` for the prime field.
    """

    p: int
    ext_degree: int = 1
    modulus_poly: tuple[int, ...] | None = None
    _order: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"characteristic {self.p} is not prime")
        if self.ext_degree < 1:
            raise ValueError("ext_degree must be positive")
        if self.ext_degree == 1:
            if self.modulus_poly is not None:
                raise ValueError("prime field takes no modulus polynomial")
        else:
            m = self.modulus_poly
            if m is None or len(m) != self.ext_degree + 1:
                raise ValueError(f"need a monic modulus of degree {self.ext_degree}")
            m = tuple(int(c) % self.p for c in m)
            if not _is_irreducible(m, self.p):
                raise ValueError(f"modulus {m} is not monic irreducible over F_{self.p}")
            object.__setattr__(self, "modulus_poly", m)
        object.__setattr__(self, "_order", self.p**self.ext_degree)

    @classmethod
    def extension(cls, p: int, k: int) -> "FieldCtx":
        """``F_{p^k}`` built on the first monic irreducible in lexicographic order."""
        if k == 1:
            return cls(p)
        for low in itertools.product(range(p), repeat=k):
            m = tuple(low) + (1,)
            if low[0] != 0 and _is_irreducible(m, p):
                return cls(p, k, m)
        raise AssertionError("unreachable: irreducibles exist in every degree")

    @property
    def order(self) -> int:
        return self._order

    @property
    def is_prime_field(self) -> bool:
        return self.ext_degree == 1

    # -- encoding ---------------------------------------------------------
    def to_coeffs(self, a: int) -> list[int]:
        out = []
        for _ in range(self.ext_degree):
            a, r = divmod(a, self.p)
            out.append(r)
        return out

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        c = list(coeffs)
        if self.ext_degree > 1 and len(c) > self.ext_degree:
            c = _poly_mod(c, self.modulus_poly, self.p)
        v = 0
        for x in reversed(c):
            v = v * self.p + x % self.p
        return v

    def element(self, n: int) -> int:
        """The image of the integer ``n`` in the field."""
        return n % self.p

    def elements(self) -> range:
        return range(self._order)

    # -- arithmetic -------------------------------------------------------
    def add(self, a: int, b: int) -> int:
        if self.ext_degree == 1:
            return (a + b) % self.p
        return self.from_coeffs([x + y for x, y in zip(self.to_coeffs(a), self.to_coeffs(b))])

    def neg(self, a: int) -> int:
        if self.ext_degree == 1:
            return -a % self.p
        return self.from_coeffs([-x for x in self.to_coeffs(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.ext_degree == 1:
            return a * b % self.p
        ca, cb = self.to_coeffs(a), self.to_coeffs(b)
        prod = [0] * (2 * self.ext_degree - 1)
        for i, x in enumerate(ca):
            if x:
                for j, y in enumerate(cb):
                    prod[i + j] += x * y
        return self.from_coeffs(_poly_mod(prod, self.modulus_poly, self.p))

    def pow(self, a: int, n: int) -> int:
        if n < 0:
            return self.pow(field_inv(a, self), -n)
        if self.ext_degree == 1:
            return pow(a, n, self.p)
        result, base = 1, a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def inv(self, a: int) -> int:
        return field_inv(a, self)


def field_inv(a: int, ctx: FieldCtx) -> int:
    """Multiplicative inverse of ``a``; ``ZeroDivisionError`` for zero."""
    if a % ctx.order == 0:
        raise ZeroDivisionError("zero has no inverse in a field")
    if ctx.is_prime_field:
        return pow(a, -1, ctx.p)
    # a^(order-2) is the inverse in the multiplicative group
    return ctx.pow(a, ctx.order - 2)


@dataclass(frozen=True)
class FpMatrix:
    """Dense matrix over a finite field, stored row-major as an int64 array."""

    rows: int
    cols: int
    data: np.ndarray
    ctx: FieldCtx

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.int64).reshape(self.rows, self.cols)
        if data.size and (data.min() < 0 or data.max() >= self.ctx.order):
            raise ValueError("entries must be reduced field elements")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ctx: FieldCtx) -> "FpMatrix":
        rows = [list(r) for r in rows]
        n = len(rows)
        m = len(rows[0]) if rows else 0
        if any(len(r) != m for r in rows):
            raise ValueError("ragged rows")
        if ctx.is_prime_field:
            arr = np.array(rows, dtype=np.int64).reshape(n, m) % ctx.p
        else:
            arr = np.array([[x % ctx.order for x in r] for r in rows], dtype=np.int64).reshape(n, m)
        return cls(n, m, arr, ctx)

    @property
    def entries(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self.data.ravel())

    def transpose(self) -> "FpMatrix":
        return FpMatrix(self.cols, self.rows, self.data.T.copy(), self.ctx)


# ---------------------------------------------------------------------------
# rank routines
# ---------------------------------------------------------------------------

def rank(M: FpMatrix) -> int:
    """Rank of ``M`` over its field."""
    if M.rows == 0 or M.cols == 0:
        return 0
    if not M.ctx.is_prime_field:
        return rank_generic(M)
    if M.ctx.p == 2:
        return _rank_f2_packed(M.data)
    return _rank_dense_mod_p(M.data, M.ctx.p)


def rank_generic(M: FpMatrix) -> int:
    """Row reduction using only the field operations of ``M.ctx``."""
    ctx = M.ctx
    A = [list(map(int, row)) for row in M.data]
    r = 0
    for c in range(M.cols):
        piv = next((i for i in range(r, M.rows) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = ctx.inv(A[r][c])
        A[r] = [ctx.mul(inv, x) for x in A[r]]
        for i in range(r + 1, M.rows):
            f = A[i][c]
            if f:
                A[i] = [ctx.sub(x, ctx.mul(f, y)) for x, y in zip(A[i], A[r])]
        r += 1
        if r == M.rows:
            break
    return r


def rank_bitpacked(M: FpMatrix) -> int:
    """Rank over ``F_2`` with rows packed 64 columns per word."""
    if M.ctx.p != 2 or not M.ctx.is_prime_field:
        raise UnsupportedFieldError(f"bit-packed rank needs F_2, got {M.ctx}")
    if M.rows == 0 or M.cols == 0:
        return 0
    return _rank_f2_packed(M.data)


def _pack_f2(A: np.ndarray) -> np.ndarray:
    bits = np.packbits(np.asarray(A, dtype=np.uint8) & 1, axis=1, bitorder="little")
    pad = (-bits.shape[1]) % 8
    if pad:
        bits = np.pad(bits, ((0, 0), (0, pad)))
    return np.ascontiguousarray(bits).view(np.uint64)


def _rank_f2_packed(A: np.ndarray) -> int:
    n_rows, n_cols = A.shape
    if n_rows == 0 or n_cols == 0:
        return 0
    W = _pack_f2(A)
    r = 0
    for c in range(n_cols):
        w, b = divmod(c, 64)
        bit = np.uint64(1) << np.uint64(b)
        hits = np.flatnonzero(W[r:, w] & bit)
        if hits.size == 0:
            continue
        i = r + hits[0]
        if i != r:
            W[[r, i]] = W[[i, r]]
        below = r + 1 + np.flatnonzero(W[r + 1:, w] & bit)
        if below.size:
            W[below, w:] ^= W[r, w:]
        r += 1
        if r == n_rows:
            break
    return r


def _rref_block(X: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced echelon form of a short block; returns (pivot rows, pivot cols)."""
    X = X.copy()
    b, n = X.shape
    pivots: list[int] = []
    r = c = 0
    while r < b and c < n:
        live = np.flatnonzero(X[r:, c:].any(axis=0))
        if live.size == 0:
            break
        c += int(live[0])
        i = r + int(np.flatnonzero(X[r:, c])[0])
        if i != r:
            X[[r, i]] = X[[i, r]]
        X[r, c:] = X[r, c:] * pow(int(X[r, c]), -1, p) % p
        col = X[:, c].copy()
        col[r] = 0
        nz = np.flatnonzero(col)
        if nz.size:
            X[nz, c:] = (X[nz, c:] - np.outer(col[nz], X[r, c:])) % p
        pivots.append(c)
        r += 1
        c += 1
    return X[:r], pivots


def _rank_dense_mod_p(A: np.ndarray, p: int, block: int = 32) -> int:
    """Blocked row reduction over ``F_p``.

    The basis ``E`` is kept in reduced echelon form; each incoming block of
    rows is cleared against it with one matrix product, reduced internally,
    and then used to clear its new pivot columns out of ``E``.
    """
    A = np.asarray(A, dtype=np.int64) % p
    n_rows, n_cols = A.shape
    if n_rows == 0 or n_cols == 0:
        return 0
    if (p - 1) ** 2 * min(n_rows, n_cols) >= _FLOAT_EXACT:
        return rank_generic(FpMatrix(n_rows, n_cols, A, FieldCtx(p)))
    E = np.zeros((0, n_cols), dtype=np.float64)
    piv: list[int] = []
    for start in range(0, n_rows, block):
        X = A[start:start + block].astype(np.float64)
        if piv:
            X = np.mod(X - X[:, piv] @ E, p)
        Xi = X.astype(np.int64)
        if not Xi.any():
            continue
        R, new = _rref_block(Xi, p)
        if not new:
            continue
        Rf = R.astype(np.float64)
        if piv:
            E = np.mod(E - E[:, new] @ Rf, p)
        E = np.vstack([E, Rf])
        piv.extend(new)
        if len(piv) == n_cols:
            break
    return len(piv)


def _dense_rank(A: np.ndarray, p: int) -> int:
    if p == 2:
        return _rank_f2_packed(A)
    return _rank_dense_mod_p(A, p)


def sparse_rank(S, p: int) -> int:
    """Rank over ``F_p`` of a scipy sparse matrix.

    Rows with a single nonzero fix a pivot column; columns with a single
    nonzero fix a pivot row. Both are peeled off until none remain, then the
    bipartite row/column graph is split into connected components and each
    component is ranked densely.
    """
    A = sp.csr_matrix(S, dtype=np.int64, copy=True)
    A.data %= p
    A.eliminate_zeros()
    total = 0
    while A.nnz:
        row_nnz = np.diff(A.indptr)
        single_rows = np.flatnonzero(row_nnz == 1)
        if single_rows.size:
            cols = np.unique(A.indices[A.indptr[single_rows]])
            total += cols.size
            keep_c = np.ones(A.shape[1], dtype=bool)
            keep_c[cols] = False
            A = _drop(A, np.diff(A.indptr) > 0, keep_c)
            continue
        C = A.tocsc()
        col_nnz = np.diff(C.indptr)
        single_cols = np.flatnonzero(col_nnz == 1)
        if single_cols.size:
            rows = np.unique(C.indices[C.indptr[single_cols]])
            total += rows.size
            keep_r = np.ones(A.shape[0], dtype=bool)
            keep_r[rows] = False
            A = _drop(A, keep_r, col_nnz > 0)
            continue
        break
    if A.nnz == 0:
        return total
    n_rows, n_cols = A.shape
    graph = sp.bmat([[None, A], [A.T, None]], format="csr")
    n_comp, labels = connected_components(graph, directed=False)
    row_lab, col_lab = labels[:n_rows], labels[n_rows:]
    row_order = np.argsort(row_lab, kind="stable")
    col_order = np.argsort(col_lab, kind="stable")
    row_bounds = np.searchsorted(row_lab[row_order], np.arange(n_comp + 1))
    col_bounds = np.searchsorted(col_lab[col_order], np.arange(n_comp + 1))
    for k in range(n_comp):
        r = row_order[row_bounds[k]:row_bounds[k + 1]]
        c = col_order[col_bounds[k]:col_bounds[k + 1]]
        if r.size == 0 or c.size == 0:
            continue
        if r.size == 1 or c.size == 1:
            total += 1
            continue
        total += _dense_rank(A[r][:, c].toarray(), p)
    return total


def _drop(A: sp.csr_matrix, keep_rows: np.ndarray, keep_cols: np.ndarray) -> sp.csr_matrix:
    A = A[np.flatnonzero(keep_rows)][:, np.flatnonzero(keep_cols)]
    A = sp.csr_matrix(A)
    A.eliminate_zeros()
    # rows and columns emptied by the cut carry no rank
    r = np.diff(A.indptr) > 0
    c = np.bincount(A.indices, minlength=A.shape[1]) > 0
    if not r.all() or not c.all():
        A = sp.csr_matrix(A[np.flatnonzero(r)][:, np.flatnonzero(c)])
    return A
