"""Length of ``R/I^[q]`` by exact linear algebra, degree by degree.

The main path works inside the standard-monomial basis of ``R``: for each
generator ``f_i`` it keeps the sparse matrix whose rows are the normal forms
of ``f_i^q * mu`` for ``mu`` running over the basis of ``R_k``, and advances
``k`` by multiplying rows with the variable maps of :class:`NormalFormBasis`.
The dimension of ``(R/I^[q])_m`` is ``dim R_m`` minus the rank of the stacked
rows in degree ``m``.

Diagonal plane curves ``c_1 x^d + c_2 y^d + c_3 z^d`` with an ideal of pure
powers ``(x^a, y^b, z^c)`` take a shortcut. Multiplication by ``x^d`` on
``K[x]/(x^{qa})`` splits into shift chains by exponent residue mod ``d``, so
the quotient is a sum over residue triples of
``K[u,v,w]/(u^A, v^B, w^C, u + v + w)`` = ``K[u,v]/(u^A, v^B, (u+v)^C)``.
These are small two-variable problems, and the graded pieces are reassembled
from the residues.

``colength_naive`` is an independent check: it never reduces anything and
ranks, inside the ambient polynomial ring, the span of the relation's
multiples together with the multiples of the ``f_i^q``.
"""

from __future__ import annotations

import csv
import hashlib
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .exactla import FpMatrix, _rank_dense_mod_p, rank, rank_generic, sparse_rank
from .gradedring import (
    Poly,
    RingPresentation,
    frobenius_power,
    hilbert_function,
    monomials_of_degree,
    normal_form,
)

__all__ = [
    "IdealSpec",
    "ColengthResult",
    "NotPrimaryError",
    "ZeroPropagationError",
    "ColengthCache",
    "parse_ideal",
    "graded_piece_dim",
    "colength",
    "colength_naive",
    "colength_diagonal",
    "diagonal_data",
    "write_degree_csv",
    "safety_bound",
]


class NotPrimaryError(ValueError):
    """The graded pieces did not vanish below the safety bound."""

    def __init__(self, bound: int, q: int):
        self.bound = bound
        self.q = q
        super().__init__(
            f"(R/I^[{q}])_m is still nonzero at degree bound {bound}; the ideal is not R_+-primary"
        )


class ZeroPropagationError(AssertionError):
    """A graded piece past the first zero degree was nonzero."""


@dataclass(frozen=True)
class IdealSpec:
    """Homogeneous generators ``f_1..f_n`` (n >= 2) of an ideal."""

    gens: tuple[Poly, ...]

    def __post_init__(self):
        gens = tuple(self.gens)
        if len(gens) < 2:
            raise ValueError("an R_+-primary ideal of a 2-dimensional ring needs at least 2 generators")
        for f in gens:
            if f.is_zero() or not f.is_homogeneous:
                raise ValueError("generators must be nonzero and homogeneous")
        object.__setattr__(self, "gens", gens)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(f.degree for f in self.gens)


def parse_ideal(text: str, ring: RingPresentation) -> IdealSpec:
    """Comma-separated generator texts, e.g. ``x^2,y^3``."""
    return IdealSpec(tuple(ring.parse(t) for t in text.split(",") if t.strip()))


@dataclass(frozen=True)
class ColengthResult:
    q: int
    per_degree: tuple[int, ...]
    total: int
    m_stop: int


def safety_bound(ring: RingPresentation, ideal: IdealSpec, q: int) -> int:
    return q * sum(ideal.degrees) + ring.relation_degree + ring.nvars


def _check_q(ring: RingPresentation, q: int) -> None:
    p, r = ring.p, q
    while r > 1 and r % p == 0:
        r //= p
    if q < 1 or r != 1:
        from .gradedring import InvalidPowerError

        raise InvalidPowerError(f"{q} is not a power of the characteristic {p}")


# ---------------------------------------------------------------------------
# on-disk cache
# ---------------------------------------------------------------------------

class ColengthCache:
    """One small text file per (input hash, q, m) holding a single dimension.

    Writers go through a temporary file and ``os.replace`` so concurrent
    processes never observe a partial record.
    """

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)

    @staticmethod
    def describe(ring: RingPresentation, ideal: IdealSpec) -> str:
        gens = ",".join(ring.format(f) for f in ideal.gens)
        return f"{ring.describe()};gens={gens}"

    def _path(self, ring, ideal, q: int, m: int) -> tuple[Path, str]:
        desc = self.describe(ring, ideal)
        digest = hashlib.sha256(desc.encode()).hexdigest()[:20]
        return self.root / digest / f"q{q}_m{m}.txt", f"# {desc};q={q};m={m}"

    def get(self, ring, ideal, q: int, m: int) -> int | None:
        path, header = self._path(ring, ideal, q, m)
        try:
            lines = path.read_text().splitlines()
        except OSError:
            return None
        if len(lines) != 2 or lines[0] != header:
            return None
        try:
            return int(lines[1])
        except ValueError:
            return None

    def put(self, ring, ideal, q: int, m: int, dim: int) -> None:
        path, header = self._path(ring, ideal, q, m)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        with os.fdopen(fd, "w") as fh:
            fh.write(f"{header}\n{dim}\n")
        os.replace(tmp, path)


# ---------------------------------------------------------------------------
# main path: normal-form basis of R
# ---------------------------------------------------------------------------

class _ImageWalker:
    """Sparse rows spanning ``(I^[q])_m`` for increasing ``m``."""

    def __init__(self, ring: RingPresentation, ideal: IdealSpec, q: int):
        self.ring = ring
        self.nf = ring.nf
        self.p = ring.p
        self.q = q
        self.starts = [q * d for d in ideal.degrees]
        self.gens = ideal.gens
        self.state: list[tuple[int, sp.csr_matrix] | None] = [None] * len(self.gens)
        self._lifts: dict[int, list[tuple[int, sp.csr_matrix]]] = {}

    def _lift(self, k: int) -> list[tuple[int, sp.csr_matrix]]:
        """Selection matrices ``P_v`` with ``basis(k+1) = sum_v P_v * v * basis(k)``."""
        if k not in self._lifts:
            src = self.nf.index(k)
            dst = self.nf.basis(k + 1)
            picks: dict[int, tuple[list[int], list[int]]] = {}
            for j, mono in enumerate(dst):
                v = next(i for i, e in enumerate(mono) if e)
                lower = list(mono)
                lower[v] -= 1
                rows, cols = picks.setdefault(v, ([], []))
                rows.append(j)
                cols.append(src[tuple(lower)])
            self._lifts[k] = [
                (v, sp.csr_matrix((np.ones(len(r), dtype=np.int64), (r, c)), shape=(len(dst), len(src))))
                for v, (r, c) in sorted(picks.items())
            ]
        return self._lifts[k]

    def rows(self, m: int) -> sp.csr_matrix | None:
        """Stacked image rows in degree ``m``; calls must not decrease ``m``."""
        blocks = []
        for i, (f, start) in enumerate(zip(self.gens, self.starts)):
            k = m - start
            if k < 0:
                continue
            st = self.state[i]
            if st is None:
                vec = self.nf.vector(frobenius_power(f, self.q))
                st = (0, sp.csr_matrix(vec.reshape(1, -1)))
            kk, W = st
            if kk > k:
                raise ValueError("walker cannot move backwards")
            while kk < k:
                nxt = None
                for v, P in self._lift(kk):
                    term = P @ W @ self.nf.mult_matrix(v, start + kk)
                    nxt = term if nxt is None else nxt + term
                W = sp.csr_matrix(nxt)
                W.data %= self.p
                W.eliminate_zeros()
                kk += 1
            self.state[i] = (kk, W)
            blocks.append(W)
        if not blocks:
            return None
        return sp.vstack(blocks, format="csr")


def _piece_dim_generic(ring: RingPresentation, ideal: IdealSpec, q: int, m: int) -> int:
    """Field-agnostic variant: explicit normal forms and generic elimination."""
    hf = hilbert_function(ring, m)
    basis = ring.nf.basis(m)
    idx = ring.nf.index(m)
    rows = []
    for f, d in zip(ideal.gens, ideal.degrees):
        k = m - q * d
        if k < 0:
            continue
        fq = frobenius_power(f, q)
        for mu in ring.nf.basis(k):
            g = normal_form(fq * Poly.monomial(mu, ring.ctx), ring)
            row = [0] * len(basis)
            for mono, c in g.terms.items():
                row[idx[mono]] = c
            rows.append(row)
    if not rows:
        return hf
    return hf - rank_generic(FpMatrix.from_rows(rows, ring.ctx))


def graded_piece_dim(ring: RingPresentation, ideal: IdealSpec, q: int, m: int) -> int:
    """``dim_K (R/I^[q])_m``."""
    _check_q(ring, q)
    if m < 0:
        return 0
    hf = hilbert_function(ring, m)
    if m < q * min(ideal.degrees):
        return hf
    if not ring.ctx.is_prime_field:
        return _piece_dim_generic(ring, ideal, q, m)
    rows = _ImageWalker(ring, ideal, q).rows(m)
    return hf - sparse_rank(rows, ring.p)


def colength(
    ring: RingPresentation,
    ideal: IdealSpec,
    q: int,
    *,
    threads: int | None = 1,
    cache: ColengthCache | None = None,
    audit: bool = False,
    method: str = "auto",
) -> ColengthResult:
    """Total length of ``R/I^[q]`` together with its graded pieces.

    Pieces are evaluated in increasing degree until the first zero; a zero
    piece of a cyclic graded module over a standard-graded ring kills every
    higher piece. Rank jobs for consecutive degrees may run on a thread pool;
    results are collected by degree so the outcome does not depend on
    scheduling.

    ``method`` is ``"sparse"``, ``"diagonal"`` or ``"auto"`` (diagonal when
    :func:`diagonal_data` recognizes the input, without audit).
    """
    _check_q(ring, q)
    if method not in ("auto", "sparse", "diagonal"):
        raise ValueError(f"unknown method {method!r}")
    if method == "diagonal" or (method == "auto" and not audit and diagonal_data(ring, ideal) is not None):
        return colength_diagonal(ring, ideal, q)
    bound = safety_bound(ring, ideal, q)
    low = q * min(ideal.degrees)
    walker = _ImageWalker(ring, ideal, q) if ring.ctx.is_prime_field else None
    n_threads = threads or os.cpu_count() or 1

    def job(m: int, rows) -> int:
        if rows is None:
            return hilbert_function(ring, m)
        return hilbert_function(ring, m) - sparse_rank(rows, ring.p)

    def submit(pool, m: int):
        if m < low:
            return hilbert_function(ring, m)
        if cache is not None:
            hit = cache.get(ring, ideal, q, m)
            if hit is not None:
                return hit
        if walker is None:
            value = _piece_dim_generic(ring, ideal, q, m)
            if cache is not None:
                cache.put(ring, ideal, q, m, value)
            return value
        rows = walker.rows(m)
        if pool is None:
            value = job(m, rows)
            if cache is not None:
                cache.put(ring, ideal, q, m, value)
            return value
        return pool.submit(job, m, rows)

    def resolve(m: int, pending) -> int:
        if isinstance(pending, int):
            return pending
        value = pending.result()
        if cache is not None:
            cache.put(ring, ideal, q, m, value)
        return value

    per_degree: list[int] = []
    pool = ThreadPoolExecutor(n_threads) if n_threads > 1 and walker is not None else None
    try:
        queue: list[tuple[int, object]] = []
        m_next = 0
        while True:
            while len(queue) < max(1, n_threads) and m_next <= bound:
                queue.append((m_next, submit(pool, m_next)))
                m_next += 1
            if not queue:
                raise NotPrimaryError(bound, q)
            m, pending = queue.pop(0)
            value = resolve(m, pending)
            per_degree.append(value)
            if value == 0:
                break
        for m, pending in queue:
            if not isinstance(pending, int):
                pending.cancel()
    finally:
        if pool is not None:
            pool.shutdown(wait=True)

    m_stop = len(per_degree) - 1
    if audit:
        extra = ring.relation_degree + 2
        for m in range(m_stop + 1, m_stop + 1 + extra):
            if walker is not None:
                rows = walker.rows(m)
                value = job(m, rows)
            else:
                value = _piece_dim_generic(ring, ideal, q, m)
            if value != 0:
                raise ZeroPropagationError(f"degree {m} has dimension {value} after zero at {m_stop}")
    return ColengthResult(q, tuple(per_degree), sum(per_degree), m_stop)


# ---------------------------------------------------------------------------
# independent oracle: ambient polynomial ring, no normal forms
# ---------------------------------------------------------------------------

def _naive_piece(ring: RingPresentation, gens_q: Sequence[tuple[Poly, int]], m: int) -> int:
    cols = monomials_of_degree(ring.nvars, m)
    col_idx = {mono: i for i, mono in enumerate(cols)}
    generators = list(gens_q)
    if ring.relation is not None:
        generators.append((ring.relation, ring.relation_degree))
    rows: list[list[int]] = []
    for g, d in generators:
        for mu in monomials_of_degree(ring.nvars, m - d):
            row = [0] * len(cols)
            for mono, c in g.terms.items():
                row[col_idx[tuple(a + b for a, b in zip(mono, mu))]] = c
            rows.append(row)
    if not rows:
        return len(cols)
    M = FpMatrix.from_rows(rows, ring.ctx)
    return len(cols) - rank(M)


def colength_naive(ring: RingPresentation, ideal: IdealSpec, q: int) -> ColengthResult:
    """``colength`` recomputed in the ambient polynomial ring."""
    _check_q(ring, q)
    bound = safety_bound(ring, ideal, q)
    gens_q = [(frobenius_power(f, q), q * d) for f, d in zip(ideal.gens, ideal.degrees)]
    per_degree = []
    for m in range(bound + 1):
        value = _naive_piece(ring, gens_q, m)
        per_degree.append(value)
        if value == 0:
            return ColengthResult(q, tuple(per_degree), sum(per_degree), m)
    raise NotPrimaryError(bound, q)


# ---------------------------------------------------------------------------
# diagonal plane curves with pure-power ideals
# ---------------------------------------------------------------------------

def diagonal_data(ring: RingPresentation, ideal: IdealSpec) -> tuple[int, tuple[int, ...]] | None:
    """``(d, (a_x, a_y, a_z))`` when the shortcut applies, else ``None``."""
    if ring.nvars != 3 or ring.relation is None or not ring.ctx.is_prime_field:
        return None
    d = ring.relation_degree
    rel = ring.relation.terms
    if len(rel) != 3 or any(tuple(d if j == i else 0 for j in range(3)) not in rel for i in range(3)):
        return None
    powers: dict[int, int] = {}
    for f in ideal.gens:
        if len(f.terms) != 1:
            return None
        (mono,) = f.terms
        support = [i for i, a in enumerate(mono) if a]
        if len(support) != 1 or support[0] in powers:
            return None
        powers[support[0]] = mono[support[0]]
    if len(powers) != 3:
        return None
    return d, (powers[0], powers[1], powers[2])


def _two_var_pieces(A: int, B: int, C: int, p: int) -> list[int]:
    """Graded pieces of ``K[u,v]/(u^A, v^B, (u+v)^C)``."""
    binom = np.array([comb(C, t) % p for t in range(C + 1)], dtype=np.int64)

    def span(n: int) -> tuple[int, int]:
        # exponents of u in the basis of (K[u,v]/(u^A, v^B))_n
        return max(0, n - B + 1), min(A - 1, n)

    out = []
    for n in range(A + B - 1):
        lo, hi = span(n)
        dim = hi - lo + 1
        if n >= C:
            slo, shi = span(n - C)
            if shi >= slo:
                t = np.arange(lo, hi + 1)[None, :] - np.arange(slo, shi + 1)[:, None]
                M = np.where((t >= 0) & (t <= C), binom[np.clip(t, 0, C)], 0)
                dim -= _rank_dense_mod_p(M, p)
        out.append(dim)
    while out and out[-1] == 0:
        out.pop()
    return out


def colength_diagonal(ring: RingPresentation, ideal: IdealSpec, q: int) -> ColengthResult:
    """``colength`` for a diagonal plane curve and a pure-power ideal."""
    _check_q(ring, q)
    data = diagonal_data(ring, ideal)
    if data is None:
        raise ValueError("ring and ideal are not of the diagonal pure-power shape")
    d, powers = data
    chains = [[(r, len(range(r, q * a, d))) for r in range(d)] for a in powers]
    pieces: dict[tuple[int, ...], list[int]] = {}
    acc: dict[int, int] = {}
    for rx, lx in chains[0]:
        for ry, ly in chains[1]:
            for rz, lz in chains[2]:
                if not (lx and ly and lz):
                    continue
                key = tuple(sorted((lx, ly, lz)))
                if key not in pieces:
                    pieces[key] = _two_var_pieces(*key, ring.p)
                for n, v in enumerate(pieces[key]):
                    m = rx + ry + rz + d * n
                    acc[m] = acc.get(m, 0) + v
    per_degree = []
    for m in range(max(acc) + 2):
        per_degree.append(acc.get(m, 0))
        if per_degree[-1] == 0:
            break
    return ColengthResult(q, tuple(per_degree), sum(per_degree), len(per_degree) - 1)


def write_degree_csv(rows: Iterable[tuple[int, ColengthResult]], path: str | os.PathLike) -> None:
    """Per-degree detail with columns ``e,q,m,dim``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["e", "q", "m", "dim"])
        for e, res in rows:
            for m, d in enumerate(res.per_degree):
                w.writerow([e, res.q, m, d])
