"""Graded polynomials over finite fields and hypersurface quotient rings.

Monomials are exponent tuples. Terms are ordered graded-lexicographically
with the first variable largest (``x > y > z``). A ring is either the
polynomial ring in two variables or a quotient of the polynomial ring in
three variables by one homogeneous relation; since a single polynomial is a
Groebner basis of the ideal it generates, reduction by the relation gives
unique normal forms.

Text grammar for polynomials: terms ``c*x^a*y^b*z^c`` joined by ``+`` or
``-``. A coefficient is an integer (reduced mod ``p``) or, for extension
fields, a bracketed coefficient vector ``[a0,a1,...]`` lowest power first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .exactla import FieldCtx

Monomial = tuple[int, ...]

__all__ = [
    "Monomial",
    "Poly",
    "RingPresentation",
    "PolyParseError",
    "InvalidPowerError",
    "NormalFormBasis",
    "monomials_of_degree",
    "monomial_key",
    "normal_form",
    "hilbert_function",
    "frobenius_power",
    "parse_poly",
    "format_poly",
    "parse_ring",
]


class PolyParseError(ValueError):
    """Malformed polynomial or ring text; carries the column of the problem."""

    def __init__(self, message: str, text: str, column: int, line: int = 1):
        self.text = text
        self.column = column
        self.line = line
        super().__init__(f"line {line}, column {column}: {message} in {text!r}")


class InvalidPowerError(ValueError):
    """Raised for a Frobenius exponent that is not a power of the characteristic."""


def monomial_key(m: Monomial) -> tuple:
    """Sort key realising graded-lex order (larger key = larger monomial)."""
    return (sum(m), m)


def monomials_of_degree(nvars: int, m: int) -> list[Monomial]:
    """All monomials of total degree ``m``, largest first in graded-lex order."""
    if m < 0:
        return []
    if nvars == 1:
        return [(m,)]
    out = []
    for a in range(m, -1, -1):
        for rest in monomials_of_degree(nvars - 1, m - a):
            out.append((a,) + rest)
    return out


def _divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def _mono_div(b: Monomial, a: Monomial) -> Monomial:
    return tuple(y - x for x, y in zip(a, b))


@dataclass(frozen=True)
class Poly:
    """Sparse polynomial: a mapping from monomials to nonzero field elements."""

    terms: Mapping[Monomial, int]
    ctx: FieldCtx
    nvars: int

    def __post_init__(self):
        clean = {}
        for mono, c in self.terms.items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != self.nvars or min(mono, default=0) < 0:
                raise ValueError(f"bad monomial {mono} for {self.nvars} variables")
            c = int(c) % self.ctx.order
            if c:
                clean[mono] = c
        object.__setattr__(self, "terms", clean)

    @classmethod
    def zero(cls, ctx: FieldCtx, nvars: int) -> "Poly":
        return cls({}, ctx, nvars)

    @classmethod
    def monomial(cls, mono: Monomial, ctx: FieldCtx, coeff: int = 1) -> "Poly":
        return cls({tuple(mono): coeff}, ctx, len(mono))

    @cached_property
    def degree(self) -> int | None:
        """Common degree of all terms, or ``None`` if not homogeneous (or zero)."""
        degs = {sum(m) for m in self.terms}
        return degs.pop() if len(degs) == 1 else None

    @property
    def is_homogeneous(self) -> bool:
        return self.degree is not None

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self) -> list[tuple[Monomial, int]]:
        return sorted(self.terms.items(), key=lambda t: monomial_key(t[0]), reverse=True)

    def leading_monomial(self) -> Monomial:
        return max(self.terms, key=monomial_key)

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = self.ctx.add(out.get(m, 0), c)
        return Poly(out, self.ctx, self.nvars)

    def __neg__(self) -> "Poly":
        return Poly({m: self.ctx.neg(c) for m, c in self.terms.items()}, self.ctx, self.nvars)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        ctx = self.ctx
        out: dict[Monomial, int] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = ctx.add(out.get(m, 0), ctx.mul(c1, c2))
        return Poly(out, ctx, self.nvars)

    def scale(self, c: int) -> "Poly":
        return Poly({m: self.ctx.mul(c, v) for m, v in self.terms.items()}, self.ctx, self.nvars)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ctx == other.ctx and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.ctx, self.nvars, frozenset(self.terms.items())))


# ---------------------------------------------------------------------------
# text grammar
# ---------------------------------------------------------------------------

_DEFAULT_VARS = ("x", "y", "z")

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<vec>\[[^\]]*\])|(?P<var>[A-Za-z_]\w*)|(?P<op>[-+*^]))")


def parse_poly(text: str, ctx: FieldCtx, variables: Iterable[str] = _DEFAULT_VARS) -> Poly:
    """Parse ``text`` in the ``c*x^a*y^b`` grammar into a :class:`Poly`."""
    variables = tuple(variables)
    index = {v: i for i, v in enumerate(variables)}
    nvars = len(variables)
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        mt = _TOKEN.match(stripped, pos)
        if not mt:
            raise PolyParseError("unexpected character", text, pos + 1)
        kind = mt.lastgroup
        tokens.append((kind, mt.group(kind), mt.start(kind) + 1))
        pos = mt.end()
    if not tokens:
        raise PolyParseError("empty polynomial", text, 1)

    terms: dict[Monomial, int] = {}
    i = 0

    def expect_int(i):
        if i >= len(tokens) or tokens[i][0] != "num":
            col = tokens[i][2] if i < len(tokens) else len(text) + 1
            raise PolyParseError("expected an exponent", text, col)
        return int(tokens[i][1])

    while i < len(tokens):
        sign = 1
        if tokens[i][0] == "op" and tokens[i][1] in "+-":
            sign = -1 if tokens[i][1] == "-" else 1
            i += 1
        elif terms:
            raise PolyParseError("expected '+' or '-'", text, tokens[i][2])
        if i >= len(tokens):
            raise PolyParseError("dangling sign", text, len(text) + 1)
        coeff = 1
        exps = [0] * nvars
        seen_factor = False
        while i < len(tokens):
            kind, val, col = tokens[i]
            if seen_factor:
                if kind == "op" and val == "*":
                    i += 1
                    if i >= len(tokens):
                        raise PolyParseError("dangling '*'", text, col)
                    kind, val, col = tokens[i]
                else:
                    break
            if kind == "num":
                coeff = ctx.mul(coeff, int(val) % ctx.order if ctx.is_prime_field else ctx.element(int(val)))
                i += 1
            elif kind == "vec":
                body = val[1:-1].strip()
                try:
                    digits = [int(t) for t in body.split(",")] if body else []
                except ValueError:
                    raise PolyParseError("bad coefficient vector", text, col) from None
                if len(digits) > ctx.ext_degree:
                    raise PolyParseError("coefficient vector longer than the extension degree", text, col)
                coeff = ctx.mul(coeff, ctx.from_coeffs(digits))
                i += 1
            elif kind == "var":
                if val not in index:
                    raise PolyParseError(f"unknown variable {val!r}", text, col)
                i += 1
                e = 1
                if i < len(tokens) and tokens[i][0] == "op" and tokens[i][1] == "^":
                    e = expect_int(i + 1)
                    i += 2
                exps[index[val]] += e
            else:
                raise PolyParseError(f"unexpected {val!r}", text, col)
            seen_factor = True
        mono = tuple(exps)
        c = coeff if sign > 0 else ctx.neg(coeff)
        terms[mono] = ctx.add(terms.get(mono, 0), c)
    return Poly(terms, ctx, nvars)


def _format_coeff(c: int, ctx: FieldCtx) -> tuple[str, str]:
    """Return (sign, magnitude text) with symmetric representatives in F_p."""
    if ctx.is_prime_field:
        if ctx.p > 2 and c > ctx.p // 2:
            return "-", str(ctx.p - c)
        return "+", str(c)
    digits = ctx.to_coeffs(c)
    if all(d == 0 for d in digits[1:]):
        return _format_coeff(digits[0], FieldCtx(ctx.p))
    while digits and digits[-1] == 0:
        digits.pop()
    return "+", "[" + ",".join(map(str, digits)) + "]"


def format_poly(f: Poly, variables: Iterable[str] = _DEFAULT_VARS) -> str:
    """Canonical text of ``f``: terms in descending graded-lex order."""
    variables = tuple(variables)
    if f.is_zero():
        return "0"
    parts = []
    for mono, c in f.sorted_terms():
        sign, mag = _format_coeff(c, f.ctx)
        factors = []
        for v, e in zip(variables, mono):
            if e == 1:
                factors.append(v)
            elif e > 1:
                factors.append(f"{v}^{e}")
        if mag != "1" or not factors:
            factors.insert(0, mag)
        term = "*".join(factors)
        if not parts:
            parts.append(term if sign == "+" else "-" + term)
        else:
            parts.append(sign + term)
    return "".join(parts)


# ---------------------------------------------------------------------------
# rings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RingPresentation:
    """``K[x,y]`` or ``K[x,y,z]/(F)`` with ``F`` homogeneous.

    The relation is stored normalised so that its leading coefficient is 1.
    """

    ctx: FieldCtx
    nvars: int
    relation: Poly | None = None
    variables: tuple[str, ...] = field(default=None)

    def __post_init__(self):
        if self.variables is None:
            object.__setattr__(self, "variables", _DEFAULT_VARS[: self.nvars])
        if len(self.variables) != self.nvars:
            raise ValueError("variable names do not match nvars")
        if self.nvars == 2:
            if self.relation is not None:
                raise ValueError("a two-variable ring carries no relation")
        elif self.nvars == 3:
            F = self.relation
            if F is None:
                raise ValueError("a three-variable ring needs a relation (Krull dimension 2)")
            if F.nvars != 3 or F.ctx != self.ctx:
                raise ValueError("relation lives in a different polynomial ring")
            if not F.is_homogeneous or F.degree < 1:
                raise ValueError("relation must be homogeneous of positive degree")
            lc = F.terms[F.leading_monomial()]
            if lc != 1:
                object.__setattr__(self, "relation", F.scale(self.ctx.inv(lc)))
        else:
            raise ValueError("only 2 or 3 variables are supported")

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def relation_degree(self) -> int:
        return self.relation.degree if self.relation is not None else 0

    @cached_property
    def nf(self) -> "NormalFormBasis":
        return NormalFormBasis(self)

    def describe(self) -> str:
        parts = [f"p={self.ctx.p}"]
        if self.ctx.ext_degree > 1:
            parts.append(f"ext={self.ctx.ext_degree}")
        parts.append("vars=" + ",".join(self.variables))
        if self.relation is not None:
            parts.append("rel=" + format_poly(self.relation, self.variables))
        return ";".join(parts)

    def parse(self, text: str) -> Poly:
        return parse_poly(text, self.ctx, self.variables)

    def format(self, f: Poly) -> str:
        return format_poly(f, self.variables)


def parse_ring(text: str) -> RingPresentation:
    """Parse ``p=7;vars=x,y,z;rel=x^3+y^3+z^3`` (``ext=k`` optional)."""
    fields: dict[str, str] = {}
    col = 1
    for chunk in text.split(";"):
        if chunk.strip():
            if "=" not in chunk:
                raise PolyParseError("expected key=value", text, col)
            k, v = chunk.split("=", 1)
            fields[k.strip()] = v.strip()
        col += len(chunk) + 1
    if "p" not in fields:
        raise PolyParseError("missing p=", text, 1)
    try:
        p = int(fields["p"])
        ext = int(fields.get("ext", "1"))
    except ValueError:
        raise PolyParseError("p and ext must be integers", text, text.find("p=") + 1) from None
    ctx = FieldCtx.extension(p, ext)
    variables = tuple(v.strip() for v in fields.get("vars", "x,y").split(",") if v.strip())
    rel = fields.get("rel")
    relation = parse_poly(rel, ctx, variables) if rel else None
    return RingPresentation(ctx, len(variables), relation, variables)


def hilbert_function(ring: RingPresentation, m: int) -> int:
    """``dim_K R_m``."""
    if m < 0:
        return 0
    if ring.nvars == 2:
        return m + 1
    d = ring.relation_degree
    return comb(m + 2, 2) - (comb(m - d + 2, 2) if m >= d else 0)


def frobenius_power(f: Poly, q: int) -> Poly:
    """``f**q`` for ``q`` a power of the characteristic, computed term-wise."""
    p = f.ctx.p
    e, r = 0, q
    while r > 1 and r % p == 0:
        r //= p
        e += 1
    if q < 1 or r != 1:
        raise InvalidPowerError(f"{q} is not a power of the characteristic {p}")
    return Poly(
        {tuple(q * x for x in m): f.ctx.pow(c, q) for m, c in f.terms.items()},
        f.ctx,
        f.nvars,
    )


class NormalFormBasis:
    """Standard-monomial bases of the graded pieces ``R_m`` and the maps
    ``R_m -> R_{m+1}`` given by multiplication with one variable.

    Normal forms of monomials are memoised per degree. Everything else
    (normal forms of products, Frobenius powers) is assembled from the
    multiplication maps, so huge monomials are never expanded symbolically.
    """

    def __init__(self, ring: RingPresentation):
        self.ring = ring
        self.ctx = ring.ctx
        self.nvars = ring.nvars
        F = ring.relation
        self.lead = F.leading_monomial() if F is not None else None
        self.tail = [(m, ring.ctx.neg(c)) for m, c in F.terms.items() if m != self.lead] if F is not None else []
        self._basis: dict[int, list[Monomial]] = {}
        self._index: dict[int, dict[Monomial, int]] = {}
        self._mono_nf: dict[int, dict[Monomial, dict[Monomial, int]]] = {}
        self._mult: dict[tuple[int, int], sp.csr_matrix] = {}

    def is_standard(self, mono: Monomial) -> bool:
        return self.lead is None or not _divides(self.lead, mono)

    def basis(self, m: int) -> list[Monomial]:
        if m not in self._basis:
            b = self._standard_monomials(m)
            self._basis[m] = b
            self._index[m] = {mono: i for i, mono in enumerate(b)}
        return self._basis[m]

    def _standard_monomials(self, m: int) -> list[Monomial]:
        """Standard monomials of degree ``m`` in graded-lex order (largest
        first), enumerated without visiting the divisible ones."""
        if m < 0:
            return []
        if self.lead is None:
            return monomials_of_degree(self.nvars, m)
        l1, l2, l3 = self.lead
        out = []
        for a in range(m, -1, -1):
            rest = m - a
            if a < l1:
                out.extend((a, b, rest - b) for b in range(rest, -1, -1))
            else:
                # excluded exactly when b >= l2 and rest - b >= l3
                hi = rest - l3  # b above hi keeps c < l3
                out.extend((a, b, rest - b) for b in range(rest, max(hi, -1), -1))
                out.extend((a, b, rest - b) for b in range(min(l2 - 1, hi), -1, -1))
        return out

    def index(self, m: int) -> dict[Monomial, int]:
        self.basis(m)
        return self._index[m]

    def dim(self, m: int) -> int:
        return len(self.basis(m)) if m >= 0 else 0

    def monomial_nf(self, mono: Monomial) -> dict[Monomial, int]:
        """Normal form of a monomial as a sparse {standard monomial: coeff}."""
        if self.is_standard(mono):
            return {mono: 1}
        ctx = self.ctx
        memo = self._mono_nf.setdefault(sum(mono), {})
        stack = [mono]
        while stack:
            t = stack[-1]
            if t in memo:
                stack.pop()
                continue
            if self.is_standard(t):
                memo[t] = {t: 1}
                stack.pop()
                continue
            rest = _mono_div(t, self.lead)
            children = [(_mono_mul(s, rest), c) for s, c in self.tail]
            missing = [ch for ch, _ in children if ch not in memo]
            if missing:
                stack.extend(missing)
                continue
            acc: dict[Monomial, int] = {}
            for ch, c in children:
                for b, v in memo[ch].items():
                    acc[b] = ctx.add(acc.get(b, 0), ctx.mul(c, v))
            memo[t] = {b: v for b, v in acc.items() if v}
            stack.pop()
        return memo[mono]

    def mult_matrix(self, var: int, m: int) -> sp.csr_matrix:
        """Sparse matrix of ``f -> x_var * f`` from ``R_m`` to ``R_{m+1}``
        (row vectors: ``vec_{m+1} = vec_m @ M``)."""
        key = (var, m)
        if key not in self._mult:
            src = self.basis(m)
            idx = self.index(m + 1)
            rows, cols, vals = [], [], []
            for i, mono in enumerate(src):
                prod = list(mono)
                prod[var] += 1
                prod = tuple(prod)
                j = idx.get(prod)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    vals.append(1)
                    continue
                for b, c in self.monomial_nf(prod).items():
                    rows.append(i)
                    cols.append(idx[b])
                    vals.append(c)
            M = sp.csr_matrix(
                (np.array(vals, dtype=np.int64), (rows, cols)),
                shape=(len(src), len(idx)),
                dtype=np.int64,
            )
            self._mult[key] = M
        return self._mult[key]

    def vector(self, f: Poly) -> np.ndarray:
        """Normal form of a homogeneous polynomial as a dense coefficient
        vector over ``basis(deg f)``. Prime fields only."""
        if not self.ctx.is_prime_field:
            raise ValueError("dense vectors are only used over prime fields")
        d = f.degree
        if d is None:
            if f.is_zero():
                raise ValueError("zero polynomial has no degree")
            raise ValueError("polynomial is not homogeneous")
        p = self.ctx.p
        # walk each monomial up from 1 by variable multiplications
        out = np.zeros(self.dim(d), dtype=np.int64)
        for mono, c in f.terms.items():
            out = (out + c * self.monomial_vector(mono)) % p
        return out

    def monomial_vector(self, mono: Monomial) -> np.ndarray:
        p = self.ctx.p
        d = sum(mono)
        if self.is_standard(mono):
            v = np.zeros(self.dim(d), dtype=np.int64)
            v[self.index(d)[mono]] = 1
            return v
        # peel variables until the remaining part is standard, then multiply back
        cur = list(mono)
        steps = []
        while not self.is_standard(tuple(cur)):
            var = max(range(self.nvars), key=lambda i: (cur[i] > 0, cur[i]))
            cur[var] -= 1
            steps.append(var)
        base = tuple(cur)
        deg = sum(base)
        v = np.zeros(self.dim(deg), dtype=np.int64)
        v[self.index(deg)[base]] = 1
        for var in reversed(steps):
            v = (v @ self.mult_matrix(var, deg)) % p
            deg += 1
        return v

    def poly_from_vector(self, vec: np.ndarray, m: int) -> Poly:
        b = self.basis(m)
        return Poly({b[i]: int(c) for i, c in enumerate(vec) if c}, self.ctx, self.nvars)


def normal_form(f: Poly, ring: RingPresentation) -> Poly:
    """Remainder of ``f`` on division by the ring's relation."""
    if ring.relation is None or f.is_zero():
        return f
    nfb = ring.nf
    ctx = ring.ctx
    out: dict[Monomial, int] = {}
    for mono, c in f.terms.items():
        for b, v in nfb.monomial_nf(mono).items():
            out[b] = ctx.add(out.get(b, 0), ctx.mul(c, v))
    return Poly(out, ctx, f.nvars)
