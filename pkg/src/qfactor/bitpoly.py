"""Multilinear polynomials over binary variables with exact integer coefficients.

Every variable takes values in {0, 1}, so ``x * x == x`` holds structurally:
a monomial is a sorted, duplicate-free tuple of variable names and the
empty tuple is the constant monomial.
"""

from __future__ import annotations

import itertools
import re
from typing import Iterable, Mapping, Union

VarId = str
Monomial = tuple[VarId, ...]

_DIGITS = re.compile(r"(\d+)")


class MissingVariableError(KeyError):
    """Raised when an assignment does not cover every variable of a polynomial."""


def var_key(v: VarId) -> tuple:
    """Natural sort key, so that ``p2 < p10``."""
    parts = _DIGITS.split(v)
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p != "")


def _mono(vars_: Iterable[VarId]) -> Monomial:
    return tuple(sorted(set(vars_), key=var_key))


def _mono_key(m: Monomial) -> tuple:
    return tuple(var_key(v) for v in m)


def _term_order(m: Monomial) -> tuple:
    # highest degree first, constant last, lexicographic within a degree
    return (-len(m), _mono_key(m))


Coercible = Union["BitPoly", int, VarId]


class BitPoly:
    """Immutable multilinear polynomial ``sum(coeff * prod(vars))``."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, int] | None = None):
        clean: dict[Monomial, int] = {}
        if terms:
            for m, c in terms.items():
                c = int(c)
                if c:
                    key = _mono(m)
                    c = clean.get(key, 0) + c
                    if c:
                        clean[key] = c
                    else:
                        clean.pop(key, None)
        self._terms = dict(sorted(clean.items(), key=lambda kv: _term_order(kv[0])))
        self._hash = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def const(cls, c: int) -> BitPoly:
        return cls({(): c})

    @classmethod
    def var(cls, v: VarId) -> BitPoly:
        return cls({(v,): 1})

    @classmethod
    def monomial(cls, vars_: Iterable[VarId], coeff: int = 1) -> BitPoly:
        return cls({_mono(vars_): coeff})

    @classmethod
    def coerce(cls, x: Coercible) -> BitPoly:
        if isinstance(x, BitPoly):
            return x
        if isinstance(x, bool):
            return cls.const(int(x))
        if isinstance(x, int):
            return cls.const(x)
        if isinstance(x, str):
            return cls.var(x)
        raise TypeError(f"cannot convert {type(x).__name__} to BitPoly")

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> dict[Monomial, int]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, m: Iterable[VarId]) -> int:
        return self._terms.get(_mono(m), 0)

    @property
    def constant(self) -> int:
        return self._terms.get((), 0)

    def variables(self) -> list[VarId]:
        vs = {v for m in self._terms for v in m}
        return sorted(vs, key=var_key)

    def degree(self) -> int:
        return max((len(m) for m in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def bounds(self) -> tuple[int, int]:
        """Coarse range over binary points, treating monomials as independent."""
        lo = hi = self.constant
        for m, c in self._terms.items():
            if not m:
                continue
            if c > 0:
                hi += c
            else:
                lo += c
        return lo, hi

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: Coercible) -> BitPoly:
        other = BitPoly.coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return BitPoly(out)

    __radd__ = __add__

    def __neg__(self) -> BitPoly:
        return BitPoly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: Coercible) -> BitPoly:
        return self + (-BitPoly.coerce(other))

    def __rsub__(self, other: Coercible) -> BitPoly:
        return BitPoly.coerce(other) - self

    def __mul__(self, other: Coercible) -> BitPoly:
        other = BitPoly.coerce(other)
        out: dict[Monomial, int] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono(m1 + m2)
                out[m] = out.get(m, 0) + c1 * c2
        return BitPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> BitPoly:
        if k < 0:
            raise ValueError("negative exponent")
        out = BitPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def scale_div(self, d: int) -> BitPoly:
        """Exact division of every coefficient by ``d``."""
        if any(c % d for c in self._terms.values()):
            raise ValueError(f"coefficients not divisible by {d}")
        return BitPoly({m: c // d for m, c in self._terms.items()})

    # -- substitution / evaluation ---------------------------------------

    def substitute(self, v: VarId, r: Coercible) -> BitPoly:
        r = BitPoly.coerce(r)
        out = BitPoly()
        keep: dict[Monomial, int] = {}
        for m, c in self._terms.items():
            if v in m:
                rest = BitPoly({tuple(x for x in m if x != v): c})
                out = out + rest * r
            else:
                keep[m] = c
        return out + BitPoly(keep)

    def substitute_many(self, values: Mapping[VarId, Coercible]) -> BitPoly:
        """Simultaneous substitution of constants or polynomials."""
        consts = {v: x for v, x in values.items() if isinstance(x, int)}
        polys = {v: BitPoly.coerce(x) for v, x in values.items() if not isinstance(x, int)}
        out: dict[Monomial, int] = {}
        acc = BitPoly()
        for m, c in self._terms.items():
            keep = []
            for x in m:
                if x in consts:
                    if not consts[x]:
                        c = 0
                        break
                else:
                    keep.append(x)
            if not c:
                continue
            if polys and any(x in polys for x in keep):
                term = BitPoly.const(c)
                for x in keep:
                    term = term * (polys[x] if x in polys else BitPoly.var(x))
                acc = acc + term
            else:
                m2 = tuple(keep)
                out[m2] = out.get(m2, 0) + c
        return acc + BitPoly(out)

    def evaluate(self, x: Mapping[VarId, int]) -> int:
        total = 0
        for m, c in self._terms.items():
            val = c
            for v in m:
                try:
                    b = x[v]
                except KeyError:
                    raise MissingVariableError(v) from None
                if not b:
                    val = 0
                    break
            total += val
        return total

    # -- comparison / rendering ------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, str)) and not isinstance(other, bool):
            other = BitPoly.coerce(other)
        if not isinstance(other, BitPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def render(self, mul: str = "*") -> str:
        if not self._terms:
            return "0"
        chunks = []
        for i, (m, c) in enumerate(self._terms.items()):
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not m:
                body = str(a)
            elif a == 1:
                body = mul.join(m)
            else:
                body = f"{a}{mul}" + mul.join(m)
            if i == 0:
                chunks.append(("-" if c < 0 else "") + body)
            else:
                chunks.append(f" {sign} {body}")
        return "".join(chunks)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"BitPoly({self.render()!r})"

    def to_json(self) -> list[dict]:
        return [{"vars": list(m), "coeff": c} for m, c in self._terms.items()]

    @classmethod
    def from_json(cls, data: list[dict]) -> BitPoly:
        return cls({tuple(t["vars"]): t["coeff"] for t in data})


def add(a: Coercible, b: Coercible) -> BitPoly:
    return BitPoly.coerce(a) + b


def multiply(a: Coercible, b: Coercible) -> BitPoly:
    return BitPoly.coerce(a) * b


def substitute(p: BitPoly, v: VarId, r: Coercible) -> BitPoly:
    return p.substitute(v, r)


def evaluate(p: BitPoly, x: Mapping[VarId, int]) -> int:
    return p.evaluate(x)


def elementary_symmetric(vars_: Iterable[VarId], k: int) -> BitPoly:
    """Sum of all products of ``k`` distinct variables."""
    vs = list(dict.fromkeys(vars_))
    if not 0 <= k <= len(vs):
        raise ValueError(f"k={k} out of range for {len(vs)} variables")
    return BitPoly({c: 1 for c in itertools.combinations(vs, k)})
