"""Polynomial calculus in the jet variables of a scalar field.

An expression is a finite sum of monomials

    c * E[q] * u1^a1 * u2^a2 * ...

where ``E[q]`` stands for ``exp(q*beta*phi)`` and ``u_k`` for the k-th
light-cone derivative of phi. ``JetExpr`` keeps its monomials in a canonical
order with like terms merged, so two expressions are equal exactly when their
stored forms agree.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import JetOrderTooLow, ParseError

# monomials whose |coeff| falls below this fraction of the largest one are dropped
MERGE_THRESHOLD = 1e-14
# coefficient tolerance used by JetExpr.__eq__
EQ_RTOL = 1e-12

Powers = tuple  # tuple[tuple[int, int], ...] sorted by jet order
Key = tuple  # (q, Powers)


def _key(q: int, powers: Mapping[int, int] | Iterable[tuple[int, int]]) -> Key:
    items = powers.items() if isinstance(powers, Mapping) else powers
    merged: dict[int, int] = {}
    for k, a in items:
        if k < 1:
            raise ValueError(f"jet order must be >= 1, got {k}")
        if a:
            merged[k] = merged.get(k, 0) + a
    return int(q), tuple(sorted((k, a) for k, a in merged.items() if a))


def _mul_keys(a: Key, b: Key) -> Key:
    powers = dict(a[1])
    for k, e in b[1]:
        powers[k] = powers.get(k, 0) + e
    return a[0] + b[0], tuple(sorted(powers.items()))


class JetExpr:
    """Normal-form sum of jet monomials with complex coefficients."""

    __slots__ = ("_terms",)
    __hash__ = None

    def __init__(self, terms: Mapping[Key, complex] | Iterable[tuple[Key, complex]] = ()):
        acc: dict[Key, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, c in items:
            key = _key(*key)
            acc[key] = acc.get(key, 0j) + complex(c)
        self._terms = _normalize(acc)

    @classmethod
    def _from_normal(cls, terms):
        obj = cls.__new__(cls)
        obj._terms = terms
        return obj

    @classmethod
    def const(cls, c: complex) -> "JetExpr":
        return cls({(0, ()): c})

    @classmethod
    def exp(cls, q: int = 1, coeff: complex = 1.0) -> "JetExpr":
        return cls({(q, ()): coeff})

    @classmethod
    def u(cls, k: int, power: int = 1, coeff: complex = 1.0) -> "JetExpr":
        return cls({(0, ((k, power),)): coeff})

    @classmethod
    def monomial(cls, coeff: complex, q: int = 0, powers: Mapping[int, int] | None = None) -> "JetExpr":
        return cls({(q, tuple((powers or {}).items())): coeff})

    @property
    def terms(self) -> tuple[tuple[Key, complex], ...]:
        """Monomials as ``((q, powers), coeff)`` pairs in canonical order."""
        return self._terms

    def as_dict(self) -> dict[Key, complex]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def max_order(self) -> int:
        return max((k for (_, powers), _ in self._terms for k, _ in powers), default=0)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return je_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return JetExpr._from_normal(tuple((k, -c) for k, c in self._terms))

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return je_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        if isinstance(other, JetExpr):
            return je_mul(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(1 / complex(other))
        return NotImplemented

    def scale(self, c: complex) -> "JetExpr":
        c = complex(c)
        return JetExpr._from_normal(_normalize({k: v * c for k, v in self._terms}))

    def __eq__(self, other):
        if not isinstance(other, JetExpr):
            return NotImplemented
        return same_form(self, other, EQ_RTOL)

    def __repr__(self):
        return f"JetExpr({pretty(self)!r})"

    def __str__(self):
        return pretty(self)


def _coerce(x):
    if isinstance(x, JetExpr):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return JetExpr.const(x)
    return NotImplemented


def _normalize(acc: Mapping[Key, complex]) -> tuple:
    if not acc:
        return ()
    biggest = max(abs(c) for c in acc.values())
    if biggest == 0:
        return ()
    cut = MERGE_THRESHOLD * biggest
    return tuple(sorted(((k, c) for k, c in acc.items() if abs(c) >= cut and c != 0), key=lambda kc: kc[0]))


def same_form(a: JetExpr, b: JetExpr, rtol: float = EQ_RTOL) -> bool:
    """Structural equality: identical monomial keys, coefficients equal to ``rtol``."""
    if [k for k, _ in a.terms] != [k for k, _ in b.terms]:
        return False
    scale = max((abs(c) for _, c in a.terms + b.terms), default=0.0)
    return all(abs(ca - cb) <= rtol * scale for (_, ca), (_, cb) in zip(a.terms, b.terms))


def diff_forms(a: JetExpr, b: JetExpr) -> list[tuple[Key, complex, complex]]:
    """Per-monomial comparison ``(key, coeff_a, coeff_b)`` for keys where they differ."""
    da, db = a.as_dict(), b.as_dict()
    scale = max((abs(c) for c in list(da.values()) + list(db.values())), default=0.0)
    out = []
    for key in sorted(set(da) | set(db)):
        ca, cb = da.get(key, 0j), db.get(key, 0j)
        if abs(ca - cb) > EQ_RTOL * scale:
            out.append((key, ca, cb))
    return out


def je_add(a: JetExpr, b: JetExpr) -> JetExpr:
    acc = dict(a.terms)
    for k, c in b.terms:
        acc[k] = acc.get(k, 0j) + c
    return JetExpr._from_normal(_normalize(acc))


def je_mul(a: JetExpr, b: JetExpr) -> JetExpr:
    acc: dict[Key, complex] = {}
    for ka, ca in a.terms:
        for kb, cb in b.terms:
            k = _mul_keys(ka, kb)
            acc[k] = acc.get(k, 0j) + ca * cb
    return JetExpr._from_normal(_normalize(acc))


def d_plus(a: JetExpr, beta: float) -> JetExpr:
    """Total light-cone derivative.

    Uses d(u_k) = u_{k+1}, d(E[q]) = q*beta*u1*E[q], Leibniz and linearity.
    """
    acc: dict[Key, complex] = {}

    def bump(key, c):
        acc[key] = acc.get(key, 0j) + c

    for (q, powers), c in a.terms:
        if q:
            bump(_mul_keys((q, powers), (0, ((1, 1),))), c * q * beta)
        for k, e in powers:
            rest = dict(powers)
            rest[k] = e - 1
            rest[k + 1] = rest.get(k + 1, 0) + 1
            bump(_key(q, rest), c * e)
    return JetExpr._from_normal(_normalize(acc))


def je_eval(a: JetExpr, beta: float, phi, u: Sequence) -> complex | np.ndarray:
    """Substitute numbers (or equally shaped arrays) for phi and u1..uK."""
    order = a.max_order()
    if order > len(u):
        raise JetOrderTooLow(f"expression needs u{order} but only u1..u{len(u)} were supplied")
    phi = np.asarray(phi)
    u = [np.asarray(v) for v in u]
    total = np.zeros(np.broadcast_shapes(phi.shape, *(v.shape for v in u)), dtype=complex)
    for (q, powers), c in a.terms:
        term = c * np.exp(q * beta * phi) if q else np.full(total.shape, c, dtype=complex)
        for k, e in powers:
            term = term * u[k - 1] ** e
        total = total + term
    return complex(total) if total.ndim == 0 else total


def _fmt_coeff(c: complex) -> str:
    return f"({c.real:.17g}{c.imag:+.17g}j)"


def pretty(a: JetExpr) -> str:
    """Plain-text form ``coeff * E[q] * u1^a1 * ...``, one monomial per `` + ``."""
    if a.is_zero():
        return "0"
    parts = []
    for (q, powers), c in a.terms:
        factors = [_fmt_coeff(c), f"E[{q}]"]
        factors.extend(f"u{k}^{e}" for k, e in powers)
        parts.append(" * ".join(factors))
    return " + ".join(parts)


_COEFF_RE = re.compile(r"^\(([^()]+)j\)$")
_E_RE = re.compile(r"^E\[(-?\d+)\]$")
_U_RE = re.compile(r"^u(\d+)\^(\d+)$")


def parse_pretty(text: str) -> JetExpr:
    """Inverse of :func:`pretty`."""
    text = text.strip()
    if text == "0":
        return JetExpr()
    terms = []
    for lineno, chunk in enumerate(text.split(" + "), start=1):
        factors = [f.strip() for f in chunk.split(" * ")]
        m = _COEFF_RE.match(factors[0])
        e = _E_RE.match(factors[1]) if len(factors) > 1 else None
        if not m or not e:
            raise ParseError(f"malformed monomial {chunk!r}", lineno)
        coeff = complex(m.group(1) + "j")
        powers = []
        for f in factors[2:]:
            um = _U_RE.match(f)
            if not um:
                raise ParseError(f"malformed jet factor {f!r}", lineno)
            powers.append((int(um.group(1)), int(um.group(2))))
        terms.append(((int(e.group(1)), tuple(powers)), coeff))
    return JetExpr(terms)


def random_expr(rng: np.random.Generator, n_terms: int = 4, max_q: int = 2, max_order: int = 3, max_power: int = 2) -> JetExpr:
    """Random expression for property tests."""
    terms = []
    for _ in range(n_terms):
        q = int(rng.integers(-max_q, max_q + 1))
        powers = {}
        for k in range(1, max_order + 1):
            e = int(rng.integers(0, max_power + 1))
            if e:
                powers[k] = e
        c = complex(rng.normal(), rng.normal())
        terms.append(((q, tuple(powers.items())), c))
    return JetExpr(terms)

