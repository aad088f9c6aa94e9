"""Truncated cohomology rings of projective spaces with 2-adic normal forms.

A ring presentation fixes variables v2 (a unit of order 8), alpha (capped
exponent) and one or two orientation classes u with nilpotence caps, plus
the rewrite data derived from the rescaled formal group law:

  R1   2*(monomial with a u-factor) expands through [2](u) = 0, moving the
       even part of a coefficient to strictly higher u-degree;
  R2   in product rings, alpha*u1*u2^2 rewrites to alpha*u1^2*u2 plus
       higher terms, from u1*[2](u2) - u2*[2](u1) = 0;
  R3   exponents above a nilpotence cap vanish (for the infinite space the
       u-cap is a declared truncation, not a relation).

Iterating to a fixed point writes every element as a 0/1-combination of
basis monomials; pure coefficient-ring terms (no u-factor) keep their
2-local coefficient since no rewrite can absorb their even part.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from fractions import Fraction

from .fgl import FormalGroupLaw
from .series import Generator, GeneratorTable, GradedSeries


class CapTooSmall(ValueError):
    """The declared caps cannot contain the rewrite rule right-hand sides."""


class NonTermination(RuntimeError):
    """Step budget exhausted; this signals a bug, not an input property."""


STRATEGIES = ("lex", "degree")


@dataclass(frozen=True)
class SpaceSpec:
    """One of the supported spaces, with desk-scale parameters."""

    kind: str  # "rp_even" | "rp_infty" | "product_even_even" | "product_even_odd"
    n: int | None = None
    m: int | None = None
    K: int | None = None

    @classmethod
    def rp_even(cls, n: int) -> "SpaceSpec":
        return cls("rp_even", n=n)

    @classmethod
    def rp_infty(cls) -> "SpaceSpec":
        return cls("rp_infty")

    @classmethod
    def product_even_even(cls, n: int, m: int) -> "SpaceSpec":
        return cls("product_even_even", n=n, m=m)

    @classmethod
    def product_even_odd(cls, n: int, K: int) -> "SpaceSpec":
        return cls("product_even_odd", n=n, K=K)

    def u_caps(self, infty_cap: int) -> tuple[int, ...]:
        if self.kind == "rp_even":
            return (self.n,)
        if self.kind == "rp_infty":
            return (infty_cap,)
        if self.kind == "product_even_even":
            return (self.n, self.m)
        if self.kind == "product_even_odd":
            return (self.n, 8 * self.K + 5)
        raise ValueError(f"unknown space kind {self.kind}")


DEFAULT_STEP_BUDGET = 500_000


@dataclass(frozen=True)
class RingPresentation:
    spec: SpaceSpec
    table: GeneratorTable
    u_vars: tuple[str, ...]
    two_series: dict            # u var -> [2](u) as a series over table
    carry: dict                 # u var -> 0/1 series equal to 2*u in the ring
    r2_rhs: GradedSeries | None  # 0/1 series equal to alpha*u1*u2^2 (products)
    mod2_tail: GradedSeries | None  # alpha*u^2 = tail mod 2 (single spaces)
    alpha_cap: int
    truncated: bool             # u-cap is a truncation, not a relation
    step_budget: int = DEFAULT_STEP_BUDGET

    @property
    def is_product(self) -> bool:
        return len(self.u_vars) == 2

    def monomial(self, coeff=1, **exps) -> GradedSeries:
        return GradedSeries.monomial(self.table, coeff, order=None, **exps)

    def exponents(self, key) -> dict:
        return dict(zip(self.table.names(), key))


def make_ring(spec: SpaceSpec, fgl: FormalGroupLaw, alpha_cap: int = 16,
              infty_cap: int = 24,
              step_budget: int = DEFAULT_STEP_BUDGET) -> RingPresentation:
    """Presentation of the E(2)-cohomology ring of the given space.

    `fgl` must be in rescaled coordinates and truncated at least as deep
    as the largest u-cap, so every rule right-hand side is complete
    within the caps.
    """
    if fgl.coordinates != "rescaled":
        raise ValueError("make_ring needs the rescaled formal group law")
    caps = spec.u_caps(infty_cap)
    if alpha_cap < 4:
        raise CapTooSmall("alpha cap below 4 cannot hold rule right-hand sides")
    if fgl.order < max(caps):
        raise CapTooSmall(
            f"group law truncated at {fgl.order} but a u-cap is {max(caps)}"
        )
    u_vars = tuple(f"u{i+1}" for i in range(len(caps))) if len(caps) > 1 else ("u",)
    gens = [Generator("v2", -6, unit_order=8), Generator("alpha", -32, cap=alpha_cap)]
    gens += [Generator(n, -16, cap=c) for n, c in zip(u_vars, caps)]
    table = GeneratorTable(
        generators=tuple(gens), mod48=True, series_vars=frozenset(u_vars)
    )

    onevar = fgl.two_series().series  # over (alpha, u)
    two_series = {}
    exact_carry = {}
    for uv in u_vars:
        z = _embed_two_series(onevar, table, uv)
        two_series[uv] = z
        exact_carry[uv] = GradedSeries.monomial(table, 2, None, **{uv: 1}) - z

    exact_r2 = None
    mod2_tail = None
    if len(u_vars) == 2:
        u1, u2 = u_vars
        s = (GradedSeries.monomial(table, 1, None, **{u1: 1}) * two_series[u2]
             - GradedSeries.monomial(table, 1, None, **{u2: 1}) * two_series[u1])
        lead = GradedSeries.monomial(table, 1, None, alpha=1, **{u1: 1, u2: 2})
        exact_r2 = lead - s
        if exact_r2.coefficient(alpha=1, **{u1: 1, u2: 2}) != 0:
            raise CapTooSmall("symmetric relation lost its leading term")
    else:
        uv = u_vars[0]
        z = two_series[uv]
        rest = (z - GradedSeries.monomial(table, 2, None, **{uv: 1})
                - GradedSeries.monomial(table, 1, None, alpha=1, **{uv: 2}))
        mod2_tail = rest.reduce_mod2()

    # Bootstrap: reduce each rule's left-hand side once with the exact
    # series, then install the resulting 0/1 sums as the operational
    # right-hand sides.  All later rewriting sticks to small integers.
    uidx = [table.index(u) for u in u_vars]
    aidx = table.index("alpha")
    carry = {}
    for uv in u_vars:
        key = tuple(1 if i == table.index(uv) else 0
                    for i in range(len(table.generators)))
        out = _reduce({key: 2}, table, uidx, aidx, exact_carry, exact_r2,
                      u_vars, step_budget, "lex")
        theta = GradedSeries(table, out, None)
        if any(sum(k[i] for i in uidx) < 2 for k in theta.terms):
            raise CapTooSmall(f"2*{uv} reduced below u-degree 2")
        carry[uv] = theta

    r2_rhs = None
    if exact_r2 is not None:
        key = [0] * len(table.generators)
        key[aidx], key[uidx[0]], key[uidx[1]] = 1, 1, 2
        out = _reduce({tuple(key): 1}, table, uidx, aidx, exact_carry,
                      exact_r2, u_vars, step_budget, "lex")
        r2_rhs = GradedSeries(table, out, None)
        for k in r2_rhs.terms:
            total = sum(k[i] for i in uidx)
            if total < 3 or (total == 3 and k[uidx[1]] >= 2):
                raise CapTooSmall("product relation reduced below its own measure")

    return RingPresentation(
        spec=spec,
        table=table,
        u_vars=u_vars,
        two_series=two_series,
        carry=carry,
        r2_rhs=r2_rhs,
        mod2_tail=mod2_tail,
        alpha_cap=alpha_cap,
        truncated=spec.kind == "rp_infty",
        step_budget=step_budget,
    )


def _embed_two_series(onevar: GradedSeries, table: GeneratorTable,
                      u_name: str) -> GradedSeries:
    ia = table.index("alpha")
    iu = table.index(u_name)
    out = {}
    for (a, k), c in onevar.terms.items():
        key = [0] * len(table.generators)
        key[ia], key[iu] = a, k
        out[tuple(key)] = c
    return GradedSeries(table, out, None)


class NormalForm:
    """An element written in the 2-adic basis of its ring.

    Monomials with a u-factor carry coefficient exactly 1; terms from the
    coefficient ring (no u-factor) keep an exact 2-local coefficient.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring: RingPresentation, terms: dict):
        self.ring = ring
        self.terms = dict(terms)

    def is_zero(self) -> bool:
        return not self.terms

    def monomials(self):
        return sorted(self.terms)

    def survivors(self) -> list[dict]:
        return [self.ring.exponents(k) for k in self.monomials()]

    def u_divisible_part(self) -> dict:
        uidx = [self.ring.table.index(u) for u in self.ring.u_vars]
        return {k: c for k, c in self.terms.items() if any(k[i] for i in uidx)}

    def to_series(self) -> GradedSeries:
        return GradedSeries(self.ring.table, self.terms, None)

    def to_json(self) -> str:
        entries = []
        for k in self.monomials():
            entry = {n: e for n, e in zip(self.ring.table.names(), k)}
            c = self.terms[k]
            if c != 1:
                q = Fraction(c)
                entry["coefficient"] = [q.numerator, q.denominator]
            entries.append(entry)
        return json.dumps(entries, sort_keys=True)

    def __eq__(self, other):
        if not isinstance(other, NormalForm):
            return NotImplemented
        return self.ring.spec == other.ring.spec and {
            k: Fraction(c) for k, c in self.terms.items()
        } == {k: Fraction(c) for k, c in other.terms.items()}

    def __repr__(self):
        if not self.terms:
            return "<nf 0>"
        names = self.ring.table.names()
        bits = []
        for k in self.monomials():
            mono = "*".join(f"{n}^{e}" if e != 1 else n
                            for n, e in zip(names, k) if e)
            c = self.terms[k]
            bits.append(mono if c == 1 and mono else f"{c}*{mono}" if mono else str(c))
        return "<nf " + " + ".join(bits) + ">"


def _split_even(c):
    """c = b + 2q with b in {0, 1}; exact for odd-denominator rationals."""
    if isinstance(c, int):
        b = c & 1
        return b, (c - b) >> 1
    b = c.numerator % 2
    rest = (c - b) / 2
    if rest.denominator == 1:
        rest = int(rest)
    return b, rest


def normal_form(element, ring: RingPresentation, strategy: str = "lex") -> NormalForm:
    """Canonical 2-adic basis representative of an element of the ring.

    `element` is a GradedSeries over the ring's table (or a raw exponent
    dict).  Both rules move monomials strictly up in (u-total, -u2), so
    the agenda processes that order and touches each monomial once.  The
    two strategies break ties differently and disagree on whether the
    coefficient split or the monomial rewrite fires first; they must
    produce the same answer, which the test suite checks at scale.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    table = ring.table
    if isinstance(element, GradedSeries):
        if element.table != table:
            raise ValueError("element is not expressed in the ring's variables")
        work = dict(element.terms)
    else:
        work = dict(GradedSeries(table, dict(element), None).terms)

    uidx = [table.index(u) for u in ring.u_vars]
    last_u = uidx[-1]
    aidx = table.index("alpha")
    names = table.names()

    if strategy == "lex":
        def pick_key(k):
            return (sum(k[i] for i in uidx), -k[last_u], k)
    else:
        def pick_key(k):
            return (sum(k[i] for i in uidx), -k[last_u], tuple(reversed(k)))

    agenda = [pick_key(k) + (k,) for k in work]
    heapq.heapify(agenda)
    queued = set(work)
    out: dict = {}
    steps = 0

    def push(series_terms):
        for k, c in series_terms.items():
            total = work.get(k, 0) + c
            if total:
                work[k] = total
                if k not in queued:
                    queued.add(k)
                    heapq.heappush(agenda, pick_key(k) + (k,))
            else:
                work.pop(k, None)

    def emit(k, b):
        cur = out.get(k, 0) + b
        if cur == 2:
            del out[k]
            push({k: 2})
        elif cur:
            out[k] = cur
        elif k in out:
            del out[k]

    def rewrite(k, c, rhs, lead):
        quotient = tuple(e - l for e, l in zip(k, lead))
        prod = GradedSeries(table, {quotient: c}, None) * rhs
        push(prod.terms)

    if ring.is_product:
        r2_lead = tuple(
            1 if i == aidx or i == uidx[0] else 2 if i == uidx[1] else 0
            for i in range(len(names))
        )
    while agenda:
        steps += 1
        if steps > ring.step_budget:
            raise NonTermination(f"budget {ring.step_budget} exceeded")
        k = heapq.heappop(agenda)[-1]
        if k not in work:
            continue
        queued.discard(k)
        c = work.pop(k)
        piv = next((i for i in uidx if k[i]), None)
        if piv is None:
            cur = out.get(k, 0) + c
            if cur:
                out[k] = cur
            elif k in out:
                del out[k]
            continue
        shaped = (ring.is_product and k[aidx] >= 1
                  and k[uidx[0]] >= 1 and k[uidx[1]] >= 2)
        if strategy == "lex" and shaped:
            rewrite(k, c, ring.r2_rhs, r2_lead)
            continue
        b, q = _split_even(c)
        if q:
            lead = tuple(1 if i == piv else 0 for i in range(len(names)))
            rewrite(k, q, ring.carry[names[piv]], lead)
        if b:
            if shaped:  # degree strategy: coefficient split fired first
                rewrite(k, b, ring.r2_rhs, r2_lead)
            else:
                emit(k, b)

    return NormalForm(ring, out)


class ZeroCheck:
    __slots__ = ("zero", "certificate")

    def __init__(self, zero: bool, certificate: list):
        self.zero = zero
        self.certificate = certificate

    def __bool__(self):
        return self.zero


def is_zero(nf: NormalForm) -> ZeroCheck:
    """Zero test with a certificate listing the surviving basis monomials."""
    return ZeroCheck(nf.is_zero(), nf.survivors())


def formal_sum_series(ring: RingPresentation, fgl: FormalGroupLaw) -> GradedSeries:
    """u1 +_F u2 expressed over the ring's table."""
    if not ring.is_product:
        raise ValueError("formal sums of the two axes need a product ring")
    table = ring.table
    idx = [table.index("alpha")] + [table.index(u) for u in ring.u_vars]
    out = {}
    for (a, i, j), c in fgl.series.terms.items():
        key = [0] * len(table.generators)
        key[idx[0]], key[idx[1]], key[idx[2]] = a, i, j
        k = tuple(key)
        out[k] = out.get(k, 0) + c
    return GradedSeries(table, out, fgl.order)


def bounded_power(s: GradedSeries, n: int, max_total: int) -> GradedSeries:
    """s^n keeping only terms that can still matter below max_total.

    Every factor of s has u-total at least 1, so a partial product s^a
    may drop terms of u-total above max_total - (n - a).
    """
    result = None
    acc_exp = 0
    base = s.truncate_series_total(max(max_total - (n - 1), 1))
    base_exp = 1
    k = n
    while k:
        if k & 1:
            if result is None:
                result, acc_exp = base, base_exp
            else:
                result = result * base
                acc_exp += base_exp
            result = result.truncate_series_total(max_total - (n - acc_exp))
        k >>= 1
        if k:
            base = base * base
            base_exp *= 2
            base = base.truncate_series_total(
                max_total - max(n - base_exp, 0)
            )
    return result


def fgl_sum_power(N: int, ring: RingPresentation, fgl: FormalGroupLaw,
                  strategy: str = "lex") -> NormalForm:
    """Normal form of (u1 +_F u2)^N in a product ring."""
    if N < 1:
        raise ValueError("N must be positive")
    caps = [ring.table.generators[ring.table.index(u)].cap for u in ring.u_vars]
    if fgl.order < min(max(sum(caps) - (N - 1), 1), max(caps)):
        raise CapTooSmall("group law too shallow for this power")
    s = formal_sum_series(ring, fgl)
    power = bounded_power(s, N, sum(caps))
    return normal_form(power, ring, strategy)


def mod2_reduce(terms: dict, ring: RingPresentation) -> dict:
    """Reduce an F_2-combination using alpha*u^2 = (tail mod 2).

    Used on spectral sequence pages of single spaces, where 2 = 0 and the
    2-series relation collapses to this single rewrite.  The alpha
    exponent strictly drops at each step, so this terminates.
    """
    if ring.is_product or ring.mod2_tail is None:
        raise ValueError("mod-2 reduction is defined for single-space rings")
    table = ring.table
    aidx = table.index("alpha")
    uidx = table.index(ring.u_vars[0])
    names = table.names()
    work = {}
    for k, c in GradedSeries(table, dict(terms), None).reduce_mod2().terms.items():
        work[k] = 1
    agenda = [(k[uidx], k) for k in work]
    heapq.heapify(agenda)
    queued = set(work)
    out = {}
    steps = 0
    while agenda:
        steps += 1
        if steps > ring.step_budget:
            raise NonTermination(f"budget {ring.step_budget} exceeded")
        k = heapq.heappop(agenda)[-1]
        if k not in work:
            continue
        queued.discard(k)
        work.pop(k)
        if k[aidx] >= 1 and k[uidx] >= 2:
            quotient = tuple(
                e - (1 if i == aidx else 2 if i == uidx else 0)
                for i, e in enumerate(k)
            )
            prod = GradedSeries(table, {quotient: 1}, None) * ring.mod2_tail
            for kk, cc in prod.reduce_mod2().terms.items():
                if work.pop(kk, 0):
                    continue
                work[kk] = 1
                if kk not in queued:
                    queued.add(kk)
                    heapq.heappush(agenda, (kk[uidx], kk))
        else:
            out[k] = out.get(k, 0) ^ 1
            if not out[k]:
                del out[k]
    return out
