"""Binary multiplication tables, rule-based minimization and factor decoding.

A composite ``N`` with ``alpha`` odd factors of a common bit length ``L`` is
written as a product of bit templates ``(1 x_{L-2} ... x_1 1)``. Multiplying
the templates column by column gives an equation system over factor bits,
carries and intermediate product bits. :func:`minimize` shrinks it with
binary-arithmetic rules and falls back to a pruned enumeration when the rules
stall; the surviving factor bits and their constraints form a
:class:`ReducedSystem`.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bitpoly import BitPoly, Monomial, VarId, elementary_symmetric, var_key

FACTOR_LETTERS = "pqrstuvwxy"
ENUMERATION_BUDGET = 5_000_000
BRUTE_FORCE_CAP = 24
GENERIC_SURVIVOR_CAP = 20


class ReductionError(Exception):
    pass


class NoTemplateError(ReductionError):
    """No equal-bit-length factor template exists for ``(N, alpha)``."""


class ContradictionError(ReductionError):
    """The equation system is unsatisfiable (wrong ``alpha`` or bit length)."""


class EnumerationLimitError(ReductionError):
    pass


class DecodeError(ReductionError):
    pass


# ---------------------------------------------------------------------------
# templates


def candidate_bitlengths(composite_n: int, alpha: int) -> list[int]:
    """Bit lengths ``L`` with ``(2**(L-1)+1)**alpha <= N <= (2**L-1)**alpha``."""
    if composite_n < 1 or composite_n % 2 == 0:
        raise ValueError("composite_n must be an odd positive integer")
    if alpha < 2:
        raise ValueError("alpha must be at least 2")
    out = []
    L = 2
    while ((1 << (L - 1)) + 1) ** alpha <= composite_n:
        if composite_n <= ((1 << L) - 1) ** alpha:
            out.append(L)
        L += 1
    return out


def factor_letters(alpha: int) -> tuple[str, ...]:
    if alpha == 2:
        return ("b", "c")
    if alpha <= len(FACTOR_LETTERS):
        return tuple(FACTOR_LETTERS[:alpha])
    return tuple(f"n{i + 1}_" for i in range(alpha))


@dataclass(frozen=True)
class FactorTemplate:
    composite_n: int
    alpha: int
    bit_len: int
    letters: tuple[str, ...]
    # per factor: ((position, bit), ...) for pinned positions
    fixed_bits: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self):
        n, a, L = self.composite_n, self.alpha, self.bit_len
        if n % 2 == 0 or n < 1:
            raise ValueError("composite_n must be odd")
        if a < 2 or L < 2:
            raise ValueError("alpha and bit_len must be at least 2")
        if not ((1 << (L - 1)) + 1) ** a <= n <= ((1 << L) - 1) ** a:
            raise NoTemplateError(f"{n} is not a product of {a} odd {L}-bit integers")

    def var(self, i: int, pos: int) -> VarId:
        return f"{self.letters[i]}{pos}"

    def pins(self, i: int) -> dict[int, int]:
        return dict(self.fixed_bits[i])

    def free_vars(self, i: int) -> list[VarId]:
        pins = self.pins(i)
        return [self.var(i, b) for b in range(self.bit_len) if b not in pins]

    def all_free_vars(self) -> list[VarId]:
        return [v for i in range(self.alpha) for v in self.free_vars(i)]

    def bit(self, i: int, pos: int) -> BitPoly:
        pins = self.pins(i)
        if pos in pins:
            return BitPoly.const(pins[pos])
        return BitPoly.var(self.var(i, pos))

    def factor_poly(self, i: int) -> BitPoly:
        return sum((self.bit(i, b) * (1 << b) for b in range(self.bit_len)), BitPoly())

    def factor_value(self, i: int, bits: dict[VarId, int]) -> int:
        pins = self.pins(i)
        return sum((pins[b] if b in pins else bits[self.var(i, b)]) << b for b in range(self.bit_len))

    def to_json(self) -> dict:
        return {
            "composite_n": self.composite_n,
            "alpha": self.alpha,
            "bit_len": self.bit_len,
            "factors": [
                {
                    "letter": self.letters[i],
                    "fixed_bits": {str(b): v for b, v in self.fixed_bits[i]},
                    "free_vars": self.free_vars(i),
                }
                for i in range(self.alpha)
            ],
        }


def make_template(composite_n: int, alpha: int, bit_len: int | None = None) -> FactorTemplate:
    if bit_len is None:
        cands = candidate_bitlengths(composite_n, alpha)
        if not cands:
            raise NoTemplateError(
                f"{composite_n} has no factorization into {alpha} odd factors of equal bit length"
            )
        bit_len = cands[0]
    pins = tuple(((0, 1), (bit_len - 1, 1)) for _ in range(alpha))
    return FactorTemplate(composite_n, alpha, bit_len, factor_letters(alpha), pins)


# ---------------------------------------------------------------------------
# multiplication table


def carry_name(fold: int, order: int, column: int) -> VarId:
    # z_{k m} with m = column - k + 1 reproduces the usual z11, z12, z21 labels
    m = column - order + 1
    primes = "'" * (fold - 1)
    if 1 <= order < 10 and 1 <= m < 10:
        return f"z{primes}{order}{m}"
    return f"z{primes}{order}_{m}"


def aux_name(fold: int, pos: int) -> VarId:
    return f"y{fold}_{pos}"


@dataclass(frozen=True)
class ColumnEquation:
    fold: int
    column: int
    lhs: BitPoly
    rhs_bit: int | VarId
    rhs_carries: tuple[tuple[VarId, int], ...]

    @property
    def residual(self) -> BitPoly:
        r = self.lhs - BitPoly.coerce(self.rhs_bit)
        for v, w in self.rhs_carries:
            r = r - w * BitPoly.var(v)
        return r

    def render(self) -> str:
        rhs = [f"{w}*{v}" for v, w in self.rhs_carries]
        if self.rhs_bit != 0 or not rhs:
            rhs.insert(0, str(self.rhs_bit))
        return f"{self.lhs.render()} = {' + '.join(rhs)}"

    def to_json(self) -> dict:
        return {
            "fold": self.fold,
            "column": self.column,
            "lhs": self.lhs.to_json(),
            "rhs_bit": self.rhs_bit,
            "rhs_carries": [{"var": v, "weight": w} for v, w in self.rhs_carries],
            "text": self.render(),
        }


@dataclass(frozen=True)
class Deduction:
    rule: str
    var: str
    value: int | str

    def to_json(self) -> dict:
        return {"rule": self.rule, "var": self.var, "value": self.value}


@dataclass
class EquationSystem:
    template: FactorTemplate
    columns: list[ColumnEquation]
    factor_vars: list[VarId]
    carry_vars: list[VarId]
    aux_vars: list[VarId]
    deductions: list[Deduction] = field(default_factory=list)

    @property
    def variables(self) -> list[VarId]:
        return self.factor_vars + self.aux_vars + self.carry_vars

    def kind(self, v: VarId) -> str:
        if v in self._kinds:
            return self._kinds[v]
        raise KeyError(v)

    @property
    def _kinds(self) -> dict[VarId, str]:
        k = {v: "factor" for v in self.factor_vars}
        k.update({v: "carry" for v in self.carry_vars})
        k.update({v: "aux" for v in self.aux_vars})
        return k

    def witness(self, factor_bits: dict[VarId, int]) -> dict[VarId, int] | None:
        """Extend factor bits to carries and product bits, or None if inconsistent."""
        x = dict(factor_bits)
        for col in self.columns:
            s = col.lhs.evaluate(x)
            if isinstance(col.rhs_bit, str):
                x[col.rhs_bit] = s & 1
                r = s & 1
            else:
                r = col.rhs_bit
            rest = s - r
            if rest < 0 or rest & 1:
                return None
            rest >>= 1
            for v, w in col.rhs_carries:
                x[v] = rest & 1
                rest >>= 1
            if rest:
                return None
        return x

    def to_json(self) -> dict:
        return {
            "template": self.template.to_json(),
            "variables": {
                "factor": self.factor_vars,
                "aux": self.aux_vars,
                "carry": self.carry_vars,
            },
            "equations": [c.to_json() for c in self.columns],
            "deductions": [d.to_json() for d in self.deductions],
        }


def build_multiplication_table(t: FactorTemplate) -> EquationSystem:
    """Column equations of ``n_1 * n_2 * ... * n_alpha = N``, folded left to right.

    Each fold multiplies the running product (bits of the previous fold, or
    the first factor) by the next factor. Intermediate folds write their
    product into fresh bit variables; the last fold targets the bits of N.
    """
    L = t.bit_len
    operand = [t.bit(0, b) for b in range(L)]
    columns: list[ColumnEquation] = []
    carries: list[VarId] = []
    aux: list[VarId] = []
    for f in range(1, t.alpha):
        other = [t.bit(f, b) for b in range(L)]
        final = f == t.alpha - 1
        width = len(operand) + L
        incoming: dict[int, list[VarId]] = defaultdict(list)
        out_bits: list[BitPoly] = []
        col = 0
        while col < width or incoming[col]:
            lhs = BitPoly()
            for i in range(max(0, col - L + 1), min(col, len(operand) - 1) + 1):
                lhs = lhs + operand[i] * other[col - i]
            for v in incoming[col]:
                lhs = lhs + BitPoly.var(v)
            rhs: int | VarId
            if final:
                rhs = (t.composite_n >> col) & 1
            elif col < width:
                rhs = aux_name(f, col)
                aux.append(rhs)
            else:
                rhs = 0
            _, hi = lhs.bounds()
            outs = []
            k = 1
            while (1 << k) <= hi:
                v = carry_name(f, k, col)
                outs.append((v, 1 << k))
                incoming[col + k].append(v)
                carries.append(v)
                k += 1
            columns.append(ColumnEquation(f, col, lhs, rhs, tuple(outs)))
            if col < width:
                out_bits.append(BitPoly.coerce(rhs))
            col += 1
        if final and t.composite_n >> col:
            raise ContradictionError("composite exceeds the product width")
        operand = out_bits
    return EquationSystem(t, columns, t.all_free_vars(), carries, aux)


# ---------------------------------------------------------------------------
# rule engine


def _normalize(p: BitPoly) -> BitPoly:
    g = 0
    for _, c in p.items():
        g = math.gcd(g, c)
    if g > 1:
        p = p.scale_div(g)
    first = next(iter(p.items()), None)
    if first is not None and first[1] < 0:
        p = -p
    return p


def render_constraint(p: BitPoly) -> str:
    """``p = 0`` written with the constant moved to the right-hand side."""
    c = p.constant
    body = p - c
    if body.is_zero():
        return f"0 = {-c}"
    return f"{body.render()} = {-c}"


class _Engine:
    """Rules applied round-robin until nothing changes.

    R1 idempotence is structural in BitPoly. R2-R7 act on residuals
    ``lhs - rhs = 0``; every variable decision is appended to the log.
    """

    def __init__(self, system: EquationSystem):
        self.sys = system
        self.kinds = system._kinds
        self.fixed: dict[VarId, int] = {}
        self.subst: dict[VarId, BitPoly] = {}
        self.log: list[Deduction] = []
        self.eqs: list[BitPoly] = []
        seen = set()
        for col in system.columns:
            r = col.residual
            self._check(r)
            if r.is_zero():
                continue
            r = _normalize(r)
            if r not in seen:
                seen.add(r)
                self.eqs.append(r)

    # -- bookkeeping ----------------------------------------------------

    def _check(self, p: BitPoly):
        lo, hi = p.bounds()
        if lo > 0 or hi < 0:
            raise ContradictionError(f"unsatisfiable: {render_constraint(p)}")

    def _rewrite(self, values: dict[VarId, int | BitPoly]):
        new, seen = [], set()
        for e in self.eqs:
            if any(v in values for v in e.variables()):
                e = e.substitute_many(values)
                self._check(e)
            if e.is_zero():
                continue
            e = _normalize(e)
            if e not in seen:
                seen.add(e)
                new.append(e)
        self.eqs = new
        for v, expr in list(self.subst.items()):
            if any(u in values for u in expr.variables()):
                self.subst[v] = expr.substitute_many(values)

    def fix(self, v: VarId, value: int, rule: str) -> bool:
        if v in self.fixed:
            if self.fixed[v] != value:
                raise ContradictionError(f"{v} forced to both 0 and 1")
            return False
        self.fixed[v] = value
        self.log.append(Deduction(rule, v, value))
        self._rewrite({v: value})
        return True

    def force_monomial(self, m: Monomial, value: int, rule: str) -> bool:
        if value == 1:
            changed = False
            for v in m:
                changed |= self.fix(v, 1, rule)
            return changed
        if len(m) == 1:
            return self.fix(m[0], 0, rule)
        mono = BitPoly.monomial(m)
        if mono in self.eqs:
            return False
        self.eqs.append(mono)
        self.log.append(Deduction(rule, "*".join(m), 0))
        # the monomial vanishes everywhere else too
        self.eqs = [e if e == mono else _normalize(e - e.coeff(m) * mono) for e in self.eqs]
        self.eqs = [e for e in self.eqs if not e.is_zero()]
        return True

    # -- rules -----------------------------------------------------------

    def r4_solve(self) -> bool:
        """A residual in a single variable determines it."""
        for e in list(self.eqs):
            vs = e.variables()
            if len(vs) != 1 or e not in self.eqs:
                continue
            v = vs[0]
            a, c = e.coeff([v]), e.constant
            if (-c) % a or (-c) // a not in (0, 1):
                raise ContradictionError(f"unsatisfiable: {render_constraint(e)}")
            return self.fix(v, (-c) // a, "R4")
        return False

    def r_bounds(self) -> bool:
        """R2 zero-sum, R3 saturation, R5 carry bound: per-term interval tests."""
        for e in list(self.eqs):
            if e not in self.eqs:
                continue
            lo, hi = e.bounds()
            for m, a in e.items():
                if not m:
                    continue
                if a > 0:
                    zero, one = lo + a > 0, hi - a < 0
                else:
                    zero, one = hi + a < 0, lo - a > 0
                if zero:
                    if len(m) == 1 and self.kinds.get(m[0]) == "carry" and a < 0:
                        rule = "R5"
                    else:
                        rule = "R2"
                    if len(m) > 1 and len(e) == 1:
                        continue  # already the constraint m = 0
                    if self.force_monomial(m, 0, rule):
                        return True
                elif one:
                    if self.force_monomial(m, 1, "R3"):
                        return True
        return False

    def r6_parity(self) -> bool:
        """Divisibility and mod-2 consistency."""
        for e in list(self.eqs):
            if e not in self.eqs:
                continue
            g = 0
            for m, a in e.items():
                if m:
                    g = math.gcd(g, a)
            if g and e.constant % g:
                raise ContradictionError(f"no integer solution: {render_constraint(e)}")
            odd = [m for m, a in e.items() if m and a % 2]
            if len(odd) == 1:
                m = odd[0]
                value = e.constant & 1
                if value == 0 and len(m) > 1 and len(e) == 1:
                    continue
                if self.force_monomial(m, value, "R6"):
                    return True
        return False

    def r7_linear(self) -> bool:
        """Eliminate ``v = expr`` when expr provably stays in {0, 1}."""
        for e in list(self.eqs):
            if e not in self.eqs:
                continue
            counts: dict[VarId, int] = defaultdict(int)
            for m, _ in e.items():
                for v in m:
                    counts[v] += 1
            for v in e.variables():
                a = e.coeff([v])
                if counts[v] != 1 or a not in (1, -1):
                    continue
                expr = (a * BitPoly.var(v) - e) * a
                lo, hi = expr.bounds()
                if lo < 0 or hi > 1 or len(expr) > 3:
                    continue
                self.subst[v] = expr
                self.log.append(Deduction("R7", v, expr.render()))
                self._rewrite({v: expr})
                return True
        return False

    def run(self):
        rules = (self.r4_solve, self.r_bounds, self.r6_parity, self.r7_linear)
        changed = True
        while changed:
            changed = False
            for rule in rules:
                while rule():
                    changed = True


# ---------------------------------------------------------------------------
# R8: pruned enumeration over factor bits


def enumerate_factor_tuples(
    composite_n: int,
    bit_len: int,
    pins: Sequence[dict[int, int]],
    budget: int = ENUMERATION_BUDGET,
) -> list[tuple[int, ...]]:
    """All ordered factor tuples matching per-factor bit pins with product N.

    Bits are decided alternately from the top and the bottom of the factors.
    A branch is cut when the product interval of the partially known factors
    misses N, or when the fully known low bits disagree with N modulo 2**k.
    """
    alpha = len(pins)
    L = bit_len
    order, lo_p, hi_p = [], 0, L - 1
    while lo_p <= hi_p:
        order.append(hi_p)
        hi_p -= 1
        if lo_p <= hi_p:
            order.append(lo_p)
            lo_p += 1
    lo = [0] * alpha
    hi = [0] * alpha
    unknown = [0] * alpha
    for i, p in enumerate(pins):
        for b in range(L):
            if b in p:
                if p[b]:
                    lo[i] |= 1 << b
                    hi[i] |= 1 << b
            else:
                hi[i] |= 1 << b
                unknown[i] |= 1 << b
    steps = [(b, i) for b in order for i in range(alpha) if unknown[i] >> b & 1]
    n = composite_n
    sols: list[tuple[int, ...]] = []
    nodes = 0

    def low_ok() -> bool:
        u = 0
        for x in unknown:
            u |= x
        k = (u & -u).bit_length() - 1 if u else L
        if k <= 0:
            return True
        m = (1 << k) - 1
        p = 1
        for x in lo:
            p = p * (x & m) & m
        return p == n & m

    def ok() -> bool:
        return math.prod(lo) <= n <= math.prod(hi) and low_ok()

    if not ok():
        return []

    def rec(d: int):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise EnumerationLimitError(f"enumeration exceeded {budget} nodes")
        if d == len(steps):
            if math.prod(lo) == n:
                sols.append(tuple(lo))
            return
        b, i = steps[d]
        bit = 1 << b
        saved = lo[i], hi[i], unknown[i]
        unknown[i] &= ~bit
        for v in (0, 1):
            if v:
                lo[i], hi[i] = saved[0] | bit, saved[1]
            else:
                lo[i], hi[i] = saved[0], saved[1] & ~bit
            if ok():
                rec(d + 1)
        lo[i], hi[i], unknown[i] = saved

    rec(0)
    return sorted(sols)


# ---------------------------------------------------------------------------
# reduced system


@dataclass
class ReducedSystem:
    template: FactorTemplate
    equations: list[BitPoly]
    ordering: list[VarId]
    survivors: list[VarId]
    fixed: dict[VarId, int]
    elimination: tuple[VarId, BitPoly] | None = None
    weight: int | None = None
    deductions: list[Deduction] = field(default_factory=list)
    solutions: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def symmetric(self) -> bool:
        return self.weight is not None

    @property
    def n_qubits(self) -> int:
        return len(self.ordering)

    def to_json(self) -> dict:
        out = {
            "template": self.template.to_json(),
            "variables": self.survivors,
            "qubits": self.ordering,
            "fixed": {v: self.fixed[v] for v in sorted(self.fixed, key=var_key)},
            "equations": [{"terms": e.to_json(), "text": render_constraint(e)} for e in self.equations],
            "elimination": None,
            "deductions": [d.to_json() for d in self.deductions],
        }
        if self.elimination:
            v, expr = self.elimination
            out["elimination"] = {"var": v, "expr": expr.render()}
        if self.weight is not None:
            out["weight"] = self.weight
        return out


def weight_constraints(vars_: Sequence[VarId], weight: int, count: int) -> list[BitPoly]:
    """``e_k(vars) = C(weight, k)`` for ``k = 1..count``."""
    return [elementary_symmetric(vars_, k) - math.comb(weight, k) for k in range(1, count + 1)]


def symmetric_system(alpha: int, case: int, vars_: Sequence[VarId] | None = None) -> list[BitPoly]:
    """Elementary symmetric constraints of the two single-deviant-factor families.

    Case 1: one factor has the bit set, the rest clear. Case 2: the reverse.
    Returns ``e_k = value_k`` for ``k = 1..alpha-1``.
    """
    if alpha < 2:
        raise ValueError("alpha must be at least 2")
    if case not in (1, 2):
        raise ValueError("case must be 1 or 2")
    if vars_ is None:
        vars_ = [f"{c}1" for c in factor_letters(alpha)]
    out = []
    for k in range(1, alpha):
        if case == 1:
            value = 1 if k == 1 else 0
        else:
            value = alpha - 1 if k == 1 else math.comb(alpha, k) - math.comb(alpha - 1, k - 1)
        out.append(elementary_symmetric(vars_, k) - value)
    return out


def _indicator(vars_: Sequence[VarId], points: set[tuple[int, ...]]) -> BitPoly:
    """Multilinear polynomial equal to 1 on ``points`` and 0 elsewhere."""
    m = len(vars_)
    if m > GENERIC_SURVIVOR_CAP:
        raise EnumerationLimitError(f"{m} surviving variables exceed the cap {GENERIC_SURVIVOR_CAP}")
    size = 1 << m
    f = [0] * size
    for pt in points:
        idx = 0
        for b in pt:
            idx = idx << 1 | b
        f[idx] = 1
    # Moebius transform; index bit (m-1-j) belongs to vars_[j]
    for j in range(m):
        step = 1 << j
        for idx in range(size):
            if idx & step:
                f[idx] -= f[idx ^ step]
    terms = {}
    for idx, c in enumerate(f):
        if c:
            terms[tuple(vars_[j] for j in range(m) if idx >> (m - 1 - j) & 1)] = c
    return BitPoly(terms)


def _canonical(
    t: FactorTemplate, tuples: list[tuple[int, ...]], deductions: list[Deduction]
) -> ReducedSystem:
    if not tuples:
        raise ContradictionError(f"{t.composite_n} admits no {t.alpha}-factor assignment with {t.bit_len}-bit factors")
    all_vars = t.all_free_vars()
    rows = []
    for tup in tuples:
        rows.append({t.var(i, b): (tup[i] >> b) & 1 for i in range(t.alpha) for b in range(t.bit_len) if t.var(i, b) in all_vars})
    fixed = {v: rows[0][v] for v in all_vars if all(r[v] == rows[0][v] for r in rows)}
    survivors = [v for v in all_vars if v not in fixed]
    points = {tuple(r[v] for v in survivors) for r in rows}

    positions = defaultdict(list)
    for i in range(t.alpha):
        for b in range(t.bit_len):
            if t.var(i, b) in survivors:
                positions[i].append(b)
    one_each = len(positions) == t.alpha and all(len(p) == 1 for p in positions.values())
    same_pos = one_each and len({p[0] for p in positions.values()}) == 1
    weights = {sum(p) for p in points}
    if same_pos and len(weights) == 1:
        w = weights.pop()
        if points == {pt for pt in itertools.product((0, 1), repeat=t.alpha) if sum(pt) == w}:
            count = min(t.alpha, max(2, t.alpha - 1))
            eqs = weight_constraints(survivors, w, count)
            last = survivors[-1]
            expr = w - sum((BitPoly.var(v) for v in survivors[:-1]), BitPoly())
            return ReducedSystem(
                t, eqs, survivors[:-1], survivors, fixed, (last, expr), w, list(deductions),
                sorted(pt[:-1] for pt in points),
            )
    eqs = [_indicator(survivors, points) - 1] if survivors else []
    return ReducedSystem(t, eqs, survivors, survivors, fixed, None, None, list(deductions), sorted(points))


def minimize(system: EquationSystem, budget: int = ENUMERATION_BUDGET) -> ReducedSystem:
    """Apply R1-R7 to a fixpoint, then R8 enumeration for whatever is left."""
    t = system.template
    eng = _Engine(system)
    eng.run()
    log = list(eng.log)

    pins = []
    for i in range(t.alpha):
        p = t.pins(i)
        for b in range(t.bit_len):
            v = t.var(i, b)
            if v in eng.fixed:
                p[b] = eng.fixed[v]
        pins.append(p)
    tuples = enumerate_factor_tuples(t.composite_n, t.bit_len, pins, budget)

    witnesses = []
    for tup in tuples:
        bits = {t.var(i, b): (tup[i] >> b) & 1 for i in range(t.alpha) for b in range(t.bit_len)}
        x = system.witness(bits)
        if x is None:
            raise AssertionError(f"enumerated tuple {tup} violates the column system")
        for v, val in eng.fixed.items():
            if x[v] != val:
                raise AssertionError(f"deduction {v}={val} contradicted by {tup}")
        for v, expr in eng.subst.items():
            if expr.evaluate(x) != x[v]:
                raise AssertionError(f"substitution for {v} contradicted by {tup}")
        for e in eng.eqs:
            if e.evaluate(x):
                raise AssertionError(f"residual {render_constraint(e)} violated by {tup}")
        witnesses.append(x)
    if not tuples:
        log.append(Deduction("R8", "*", "no solution"))
        system.deductions = log
        raise ContradictionError(
            f"{t.composite_n} admits no {t.alpha}-factor assignment with {t.bit_len}-bit factors"
        )

    decided = set(eng.fixed) | set(eng.subst)
    free_rest = [v for v in system.variables if v not in decided]
    stalled = bool(eng.eqs) or any(system._kinds[v] != "factor" for v in free_rest)
    if stalled:
        for v in sorted(free_rest, key=lambda v: (("factor", "aux", "carry").index(system._kinds[v]), var_key(v))):
            vals = {x[v] for x in witnesses}
            if len(vals) == 1:
                log.append(Deduction("R8", v, vals.pop()))
            elif system._kinds[v] != "factor":
                log.append(Deduction("R8", v, "eliminated"))
    system.deductions = log
    return _canonical(t, tuples, log)


def replay(system: EquationSystem, log: Iterable[Deduction]) -> ReducedSystem:
    """Rebuild the reduced system from the factor-bit decisions in a log."""
    t = system.template
    decided = {d.var: d.value for d in log if isinstance(d.value, int) and d.var in system.factor_vars}
    pins = []
    for i in range(t.alpha):
        p = t.pins(i)
        for b in range(t.bit_len):
            if t.var(i, b) in decided:
                p[b] = decided[t.var(i, b)]
        pins.append(p)
    tuples = enumerate_factor_tuples(t.composite_n, t.bit_len, pins)
    return _canonical(t, tuples, list(log))


def reduce_composite(composite_n: int, alpha: int, bit_len: int | None = None) -> tuple[EquationSystem, ReducedSystem]:
    t = make_template(composite_n, alpha, bit_len)
    system = build_multiplication_table(t)
    return system, minimize(system)


# ---------------------------------------------------------------------------
# hamiltonian polynomial, verification, decoding

_PAPER_COEFFS = {4: {2: 2, 3: 5}, 5: {2: 2, 3: 18, 4: -23}}


def resolve_mode(rs: ReducedSystem, mode: str) -> tuple[str, str | None]:
    """Effective combination mode and an optional fallback notice."""
    if mode not in ("paper", "sos"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sos":
        return "sos", None
    if rs.weight == 1 and rs.template.alpha in _PAPER_COEFFS:
        return "paper", None
    return "sos", (
        "paper-mode combination is only pinned for the weight-1 family with alpha in {4, 5}; "
        "fell back to sos"
    )


def hamiltonian_polynomial(rs: ReducedSystem, mode: str = "sos") -> BitPoly:
    """Non-negative polynomial over the qubit variables whose zeros are the solutions."""
    effective, _ = resolve_mode(rs, mode)
    if effective == "paper":
        coeffs = _PAPER_COEFFS[rs.template.alpha]
        return sum(
            (c * elementary_symmetric(rs.ordering, k) for k, c in coeffs.items()), BitPoly()
        )
    eqs = rs.equations
    if rs.elimination is not None:
        v, expr = rs.elimination
        eqs = [e.substitute(v, expr) for e in eqs]
    return sum((e * e for e in eqs), BitPoly())


def _assignment(rs: ReducedSystem, bits: Sequence[int]) -> dict[VarId, int] | None:
    if len(bits) != len(rs.ordering):
        raise ValueError(f"expected {len(rs.ordering)} bits, got {len(bits)}")
    x = dict(zip(rs.ordering, (int(b) for b in bits)))
    if rs.elimination is not None:
        v, expr = rs.elimination
        val = expr.evaluate(x)
        if val not in (0, 1):
            return None
        x[v] = val
    return x


def brute_force_solutions(rs: ReducedSystem, cap: int = BRUTE_FORCE_CAP) -> list[tuple[int, ...]]:
    """Every qubit assignment satisfying the reduced equations, ascending."""
    n = len(rs.ordering)
    if n > cap:
        raise EnumerationLimitError(f"{n} variables exceed the brute-force cap {cap}")
    out = []
    for bits in itertools.product((0, 1), repeat=n):
        x = _assignment(rs, bits)
        if x is not None and all(e.evaluate(x) == 0 for e in rs.equations):
            out.append(bits)
    return out


def decode_factors(bits: Sequence[int], t: FactorTemplate, rs: ReducedSystem) -> list[int]:
    """Factor values for a qubit assignment; the product is checked against N."""
    x = _assignment(rs, bits)
    if x is None:
        raise DecodeError(f"assignment {tuple(bits)} puts the eliminated variable outside {{0, 1}}")
    x.update(rs.fixed)
    factors = [t.factor_value(i, x) for i in range(t.alpha)]
    if math.prod(factors) != t.composite_n:
        raise DecodeError(f"decoded factors {factors} do not multiply to {t.composite_n}")
    return factors


def basis_bits(index: int, n: int) -> tuple[int, ...]:
    """Bits of a basis index; qubit 0 is the most significant bit."""
    return tuple((index >> (n - 1 - q)) & 1 for q in range(n))


def basis_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = idx << 1 | int(b)
    return idx
