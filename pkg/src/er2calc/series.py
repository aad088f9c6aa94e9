"""Sparse graded multivariate polynomials and truncated power series.

Terms are stored as a map from exponent tuples to exact rational
coefficients (int where integral, Fraction otherwise).  A GeneratorTable
fixes the variable names, their degrees, optional exponent caps
(quotients by a pure power, e.g. u^{n+1} = 0), and optional unit orders
(exponents wrap, e.g. v2^8 = 1).  Designated "series variables" carry a
total-degree truncation order; all operations respect it.

Degrees are plain integers; a table in mod-48 mode compares them mod 48.
The stored integer degree of a term is the degree of its stored
representative, so wrapping a unit-order generator shifts it by a full
period and the mod-48 class is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


class TableMismatch(ValueError):
    """Operands are defined over different generator tables."""


class NonNilpotentSubstitution(ValueError):
    """A binding with a constant term was substituted into a truncated series."""


class BadLeadingTerm(ValueError):
    """Reversion needs a series of the form t + (higher order)."""


class NotHomogeneous(ValueError):
    """The series mixes terms of different degrees."""


def _norm_coeff(c):
    if isinstance(c, Fraction):
        if c.denominator == 1:
            return int(c)
        return c
    return c


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    cap: int | None = None          # exponents above this are zero
    unit_order: int | None = None   # exponents wrap mod this


@dataclass(frozen=True)
class GeneratorTable:
    generators: tuple[Generator, ...]
    mod48: bool = False
    series_vars: frozenset = frozenset()
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names: {names}")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"no generator named {name!r}") from None

    def names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.generators)

    def term_degree(self, exps) -> int:
        return sum(e * g.degree for e, g in zip(exps, self.generators))

    def series_degree(self, exps) -> int:
        return sum(
            e
            for e, g in zip(exps, self.generators)
            if g.name in self.series_vars
        )

    def degrees_equal(self, a: int, b: int) -> bool:
        if self.mod48:
            return (a - b) % 48 == 0
        return a == b


class GradedSeries:
    """Immutable sparse series over a GeneratorTable.

    order: total-degree truncation in the table's series variables
    (None means exact / no truncation was applied).
    """

    __slots__ = ("table", "terms", "order")

    def __init__(self, table: GeneratorTable, terms: dict, order: int | None = None):
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "terms", _clean(table, terms, order))
        object.__setattr__(self, "order", order)

    def __setattr__(self, name, value):
        raise AttributeError("GradedSeries is immutable")

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, table, order=None):
        return cls(table, {}, order)

    @classmethod
    def constant(cls, table, c, order=None):
        return cls(table, {(0,) * len(table.generators): c}, order)

    @classmethod
    def monomial(cls, table, c=1, order=None, **exps):
        e = [0] * len(table.generators)
        for name, k in exps.items():
            e[table.index(name)] = k
        return cls(table, {tuple(e): c}, order)

    def with_order(self, order):
        return GradedSeries(self.table, self.terms, order)

    # -- queries ----------------------------------------------------------

    def coefficient(self, **exps):
        e = [0] * len(self.table.generators)
        for name, k in exps.items():
            e[self.table.index(name)] = k
        return self.terms.get(tuple(e), 0)

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self):
        return sorted(self.terms.items())

    def homogeneous_degree(self) -> int:
        """Common degree of all terms (mod 48 when the table wraps)."""
        if not self.terms:
            raise NotHomogeneous("the zero series has no degree")
        degs = {self.table.term_degree(e) for e in self.terms}
        if self.table.mod48:
            degs = {d % 48 for d in degs}
        if len(degs) > 1:
            raise NotHomogeneous(f"mixed degrees {sorted(degs)}")
        return degs.pop()

    def is_homogeneous(self) -> bool:
        try:
            self.homogeneous_degree()
        except NotHomogeneous:
            return False
        return True

    def integer_degrees(self) -> set:
        """Degrees of the stored representatives, without mod-48 reduction."""
        return {self.table.term_degree(e) for e in self.terms}

    # -- arithmetic -------------------------------------------------------

    def _check(self, other):
        if isinstance(other, (int, Fraction)):
            other = GradedSeries.constant(self.table, other, self.order)
        if not isinstance(other, GradedSeries):
            return NotImplemented
        if other.table != self.table:
            raise TableMismatch("series are defined over different tables")
        return other

    @staticmethod
    def _merge_order(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return GradedSeries(self.table, out, self._merge_order(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return GradedSeries(
            self.table, {e: -c for e, c in self.terms.items()}, self.order
        )

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        order = self._merge_order(self.order, other.order)
        table = self.table
        out = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, 0) + ca * cb
        return GradedSeries(table, out, order)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        result = GradedSeries.constant(self.table, 1, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def scale(self, c):
        return GradedSeries(
            self.table, {e: c * v for e, v in self.terms.items()}, self.order
        )

    def truncate_series_total(self, maxdeg: int):
        """Drop terms of series-variable total degree above maxdeg."""
        table = self.table
        kept = {
            e: c for e, c in self.terms.items() if table.series_degree(e) <= maxdeg
        }
        return GradedSeries(table, kept, self.order)

    def map_coefficients(self, fn):
        return GradedSeries(
            self.table, {e: fn(c) for e, c in self.terms.items()}, self.order
        )

    def reduce_mod2(self):
        out = {}
        for e, c in self.terms.items():
            r = Fraction(c).numerator % 2
            if r:
                out[e] = r
        return GradedSeries(self.table, out, self.order)

    # -- composition ------------------------------------------------------

    def substitute(self, bindings: dict, table: GeneratorTable | None = None,
                   order: int | None = None) -> "GradedSeries":
        """Replace variables by series; unbound variables pass through.

        The result lives over `table` (default: the table of the bindings,
        or this series' own table when there are none).  Every unbound
        variable of self must exist in the target table.
        """
        if table is None:
            if bindings:
                table = next(iter(bindings.values())).table
            else:
                table = self.table
        for name, g in bindings.items():
            self.table.index(name)  # must exist on the source side
            if g.table != table:
                raise TableMismatch(f"binding for {name!r} over a different table")
        if order is None:
            orders = [g.order for g in bindings.values() if g.order is not None]
            if self.order is not None:
                orders.append(self.order)
            order = min(orders) if orders else None

        # A truncated series composed with something of series-valuation 0
        # has unbounded missing tail contributions in every output degree.
        if self.order is not None:
            for name, g in bindings.items():
                if name not in self.table.series_vars:
                    continue
                if any(table.series_degree(e) == 0 for e in g.terms):
                    raise NonNilpotentSubstitution(
                        f"binding for series variable {name!r} has a constant term"
                    )

        zero_target = GradedSeries.zero(table, order)
        one_target = GradedSeries.constant(table, 1, order)
        result = zero_target
        src_names = self.table.names()
        power_cache: dict[str, dict[int, GradedSeries]] = {}

        def bound_power(name, k):
            cache = power_cache.setdefault(name, {1: bindings[name]})
            top = max(cache)
            while top < k:
                cache[top + 1] = cache[top] * cache[1]
                top += 1
            return cache[k]

        for exps, c in self.terms.items():
            factor = one_target.scale(c)
            for name, k in zip(src_names, exps):
                if k == 0:
                    continue
                if name in bindings:
                    factor = factor * bound_power(name, k)
                else:
                    factor = factor * GradedSeries.monomial(
                        table, 1, order, **{name: k}
                    )
                if factor.is_zero():
                    break
            result = result + factor
        return result

    # -- one-variable structure --------------------------------------------

    def coefficients_in(self, var: str) -> dict:
        """View as a series in `var`: exponent -> coefficient series."""
        idx = self.table.index(var)
        out: dict[int, dict] = {}
        for e, c in self.terms.items():
            rest = e[:idx] + (0,) + e[idx + 1 :]
            out.setdefault(e[idx], {})[rest] = c
        return {
            k: GradedSeries(self.table, terms, self.order)
            for k, terms in sorted(out.items())
        }

    def reversion(self, var: str, order: int | None = None) -> "GradedSeries":
        """Compositional inverse in `var` of a series t + (higher order).

        Coefficients may involve the other table variables.  The result g
        satisfies self(g(t)) = t up to the truncation order.
        """
        order = order if order is not None else self.order
        if order is None:
            raise ValueError("reversion needs a finite truncation order")
        table = self.table
        parts = self.coefficients_in(var)
        ident = GradedSeries.monomial(table, 1, order, **{var: 1})
        unit = parts.get(1)
        if 0 in parts and not parts[0].is_zero():
            raise BadLeadingTerm("series has a constant term")
        if unit is None or unit.terms != ident.coefficients_in(var)[1].terms:
            raise BadLeadingTerm(f"coefficient of {var} must be exactly 1")

        # Solve f(g(t)) = t degree by degree: the t^n coefficient of the
        # tail sum determines -b_n.  Powers of g in degree <= n only use
        # b_2..b_{n-1}, so recomputing them at step n is exact; only the
        # exponents actually present in f are needed.
        g = ident
        a = {k: parts[k] for k in parts if k >= 2}
        exponents = sorted(a)
        for n in range(2, order + 1):
            powers = {1: g.truncate_series_total(n)}
            tail = GradedSeries.zero(table, order)
            for m in exponents:
                if m > n:
                    break
                tail = tail + a[m] * _cached_power(powers, m, n)
            coeff_n = tail.coefficients_in(var).get(n)
            if coeff_n is None or coeff_n.is_zero():
                continue
            correction = coeff_n * GradedSeries.monomial(table, -1, order, **{var: n})
            g = g + correction
        return g

    # -- misc ---------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return self.table == other.table and _as_fracs(self.terms) == _as_fracs(
            other.terms
        )

    def __hash__(self):
        return hash((self.table, tuple(sorted(_as_fracs(self.terms).items()))))

    def __repr__(self):
        if not self.terms:
            return "<series 0>"
        names = self.table.names()
        bits = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                f"{n}^{k}" if k != 1 else n for n, k in zip(names, e) if k
            )
            bits.append(f"{c}" if not mono else f"{c}*{mono}" if c != 1 else mono)
        return "<series " + " + ".join(bits) + ">"


def _cached_power(powers: dict, m: int, trunc: int) -> GradedSeries:
    """g^m by binary powering with a per-call cache, truncated at trunc."""
    if m in powers:
        return powers[m]
    half = _cached_power(powers, m // 2, trunc)
    out = (half * half).truncate_series_total(trunc)
    if m % 2:
        out = (out * powers[1]).truncate_series_total(trunc)
    powers[m] = out
    return out


def _as_fracs(terms):
    return {e: Fraction(c) for e, c in terms.items()}


def _clean(table: GeneratorTable, terms: dict, order: int | None) -> dict:
    out = {}
    gens = table.generators
    for exps, c in terms.items():
        c = _norm_coeff(c)
        if not c:
            continue
        exps = list(exps)
        dead = False
        for i, g in enumerate(gens):
            e = exps[i]
            if g.unit_order is not None:
                e = e % g.unit_order
                exps[i] = e
            elif e < 0:
                raise ValueError(f"negative exponent for non-unit generator {g.name}")
            if g.cap is not None and e > g.cap:
                dead = True
                break
        if dead:
            continue
        key = tuple(exps)
        if order is not None and table.series_degree(key) > order:
            continue
        prev = out.get(key, 0)
        total = _norm_coeff(prev + c)
        if total:
            out[key] = total
        elif key in out:
            del out[key]
    return out


def series_mul(a: GradedSeries, b: GradedSeries) -> GradedSeries:
    """Product of two series over the same table."""
    return a * b


def substitute(f: GradedSeries, bindings: dict, **kw) -> GradedSeries:
    return f.substitute(bindings, **kw)


def reversion(f: GradedSeries, var: str, order: int | None = None) -> GradedSeries:
    return f.reversion(var, order)
