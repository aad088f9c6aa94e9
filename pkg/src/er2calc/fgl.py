"""The 2-typical formal group law of the height-2 truncation of BP.

The logarithm is built from the standard recursions for the Hazewinkel or
Araki generators with v_i = 0 for i >= 3, the group law comes from
F(x, y) = exp(log x + log y), and everything can be rescaled into the
48-graded coordinates where the orientation class u has degree -16 and
the v_1-substitute alpha has degree -32 (that is, 16 mod 48).

With the Araki generators the 2-series satisfies
[2](t) = 2t +_F v_1 t^2 +_F v_2 t^4 exactly; with Hazewinkel it holds
only mod 2.  The two conventions first diverge in the coefficient of
x*y (equivalently, of t^2 in the 2-series).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

from .series import Generator, GeneratorTable, GradedSeries

HAZEWINKEL = "hazewinkel"
ARAKI = "araki"

DEFAULT_TRUNCATION = 26
DEFAULT_ALPHA_CAP = 16


class UnsupportedConvention(ValueError):
    pass


class InsufficientLogDepth(ValueError):
    """The requested truncation needs log coefficients beyond the built depth."""


class NonIntegralCoefficient(ArithmeticError):
    """A group-law coefficient has an even denominator; this signals a bug."""


V_TABLE = GeneratorTable(generators=(Generator("v1", -2), Generator("v2", -6)))

ONEVAR_TABLE = GeneratorTable(
    generators=(Generator("v1", -2), Generator("v2", -6), Generator("t", 2)),
    series_vars=frozenset({"t"}),
)

CLASSICAL_TABLE = GeneratorTable(
    generators=(
        Generator("v1", -2),
        Generator("v2", -6),
        Generator("x", 2),
        Generator("y", 2),
    ),
    series_vars=frozenset({"x", "y"}),
)


def rescaled_table(alpha_cap: int = DEFAULT_ALPHA_CAP,
                   u_names=("u1", "u2")) -> GeneratorTable:
    gens = [Generator("alpha", -32, cap=alpha_cap)]
    gens += [Generator(n, -16) for n in u_names]
    return GeneratorTable(
        generators=tuple(gens), mod48=True, series_vars=frozenset(u_names)
    )


@dataclass(frozen=True)
class BPLogData:
    convention: str
    coefficients: tuple  # l_0 .. l_N over V_TABLE
    depth: int

    def log_series(self, order: int) -> GradedSeries:
        """log(t) = sum l_n t^(2^n) truncated at the given total order."""
        total = GradedSeries.zero(ONEVAR_TABLE, order)
        for n, ln in enumerate(self.coefficients):
            if 2 ** n > order:
                break
            tpow = GradedSeries.monomial(ONEVAR_TABLE, 1, order, t=2 ** n)
            total = total + _embed(ln, ONEVAR_TABLE, order) * tpow
        return total


def _embed(f: GradedSeries, table: GeneratorTable, order=None) -> GradedSeries:
    """Re-express a series over a table whose generators include f's."""
    src = f.table.names()
    idx = [table.index(n) for n in src]
    width = len(table.generators)
    out = {}
    for e, c in f.terms.items():
        key = [0] * width
        for i, k in zip(idx, e):
            key[i] = k
        out[tuple(key)] = c
    return GradedSeries(table, out, order)


def build_log(convention: str, depth: int) -> BPLogData:
    """Log coefficients l_0..l_depth for the height-2 2-typical group law.

    Hazewinkel: 2*l_n = sum_{i<n} l_i v_{n-i}^{2^i}.
    Araki: the same sum extended by the i = n term with v_0 = 2, so
    (2 - 2^{2^n})*l_n = sum_{i<n} l_i v_{n-i}^{2^i}.
    Only v_1 and v_2 survive, so exactly two summands contribute.
    """
    if convention not in (HAZEWINKEL, ARAKI):
        raise UnsupportedConvention(convention)
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    one = GradedSeries.constant(V_TABLE, 1)
    coeffs = [one]
    for n in range(1, depth + 1):
        acc = GradedSeries.zero(V_TABLE)
        for j in (1, 2):  # v_j factor, contributed by l_{n-j}
            i = n - j
            if i < 0:
                continue
            vpow = GradedSeries.monomial(V_TABLE, 1, **{f"v{j}": 2 ** i})
            acc = acc + coeffs[i] * vpow
        if convention == HAZEWINKEL:
            divisor = Fraction(2)
        else:
            divisor = Fraction(2 - 2 ** (2 ** n))
        coeffs.append(acc.map_coefficients(lambda c: Fraction(c) / divisor))
    return BPLogData(convention, tuple(coeffs), depth)


@dataclass(frozen=True)
class FormalGroupLaw:
    series: GradedSeries       # F(x, y), or F(u1, u2) after rescaling
    order: int                 # truncation in total (x, y)-degree
    coordinates: str           # "classical" | "rescaled"
    convention: str

    @property
    def table(self) -> GeneratorTable:
        return self.series.table

    def variables(self) -> tuple[str, str]:
        if self.coordinates == "classical":
            return ("x", "y")
        names = [g.name for g in self.table.generators if g.degree == -16]
        return (names[0], names[1])

    def formal_sum(self, a: GradedSeries, b: GradedSeries) -> GradedSeries:
        """a +_F b for series over a common table."""
        x, y = self.variables()
        return self.series.substitute({x: a, y: b}, table=a.table)

    def formal_sum_chain(self, parts) -> GradedSeries:
        parts = list(parts)
        acc = parts[-1]
        for p in reversed(parts[:-1]):
            acc = self.formal_sum(p, acc)
        return acc

    def two_series(self) -> "TwoSeries":
        """[2](t) = F(t, t)."""
        x, y = self.variables()
        if self.coordinates == "classical":
            table = ONEVAR_TABLE
            var = "t"
        else:
            cap = self.table.generators[self.table.index("alpha")].cap
            table = rescaled_table(cap, ("u",))
            var = "u"
        t = GradedSeries.monomial(table, 1, self.order, **{var: 1})
        return TwoSeries(
            series=self.series.substitute({x: t, y: t}, table=table),
            variable=var,
            coordinates=self.coordinates,
            convention=self.convention,
        )

    def export_csv(self, path) -> None:
        names = self.table.names()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(names) + ["numerator", "denominator"])
            for exps, c in self.series.sorted_terms():
                q = Fraction(c)
                writer.writerow(list(exps) + [q.numerator, q.denominator])


@dataclass(frozen=True)
class TwoSeries:
    series: GradedSeries
    variable: str
    coordinates: str
    convention: str


def fgl_from_log(log: BPLogData, order: int = DEFAULT_TRUNCATION) -> FormalGroupLaw:
    """F(x, y) = exp(log x + log y) truncated at total degree `order`.

    The truncated log determines F up to total degree 2^(depth+1) - 1;
    beyond that the missing l_{depth+1} term would contribute.
    """
    if order >= 2 ** (log.depth + 1):
        raise InsufficientLogDepth(
            f"order {order} needs log depth > {log.depth}"
        )
    exp_series = log.log_series(order).reversion("t")
    lx = GradedSeries.zero(CLASSICAL_TABLE, order)
    for n, ln in enumerate(log.coefficients):
        if 2 ** n > order:
            break
        ln_c = _embed(ln, CLASSICAL_TABLE, order)
        lx = lx + ln_c * GradedSeries.monomial(CLASSICAL_TABLE, 1, order, x=2 ** n)
        lx = lx + ln_c * GradedSeries.monomial(CLASSICAL_TABLE, 1, order, y=2 ** n)
    F = exp_series.substitute({"t": lx}, table=CLASSICAL_TABLE)
    for exps, c in F.terms.items():
        if Fraction(c).denominator % 2 == 0:
            raise NonIntegralCoefficient(f"coefficient {c} at {exps}")
    return FormalGroupLaw(
        series=F, order=order, coordinates="classical", convention=log.convention
    )


def rescale_to_er2(F: FormalGroupLaw, alpha_cap: int = DEFAULT_ALPHA_CAP,
                   u_names=("u1", "u2")) -> FormalGroupLaw:
    """Change coordinates to u = v2^3 x: v_1 becomes alpha and v_2 becomes 1.

    Homogeneity forces v1^a v2^b x^i y^j with a + 3b = i + j - 1 to land on
    alpha^a u1^i u2^j exactly (the leftover v_2-power is v_2^{-8(a+b)} = 1).
    """
    if F.coordinates != "classical":
        raise ValueError("expected a formal group law in classical coordinates")
    table = rescaled_table(alpha_cap, u_names)
    ia, iu1, iu2 = (table.index("alpha"), table.index(u_names[0]),
                    table.index(u_names[1]))
    out = {}
    for (a, b, i, j), c in F.series.terms.items():
        if a + 3 * b != i + j - 1:
            raise NonIntegralCoefficient(
                f"inhomogeneous term v1^{a} v2^{b} x^{i} y^{j}"
            )
        key = [0] * len(table.generators)
        key[ia], key[iu1], key[iu2] = a, i, j
        out[tuple(key)] = out.get(tuple(key), 0) + c
    return FormalGroupLaw(
        series=GradedSeries(table, out, F.order),
        order=F.order,
        coordinates="rescaled",
        convention=F.convention,
    )


def rescale_two_series(ts: TwoSeries, alpha_cap: int = DEFAULT_ALPHA_CAP) -> TwoSeries:
    """Apply the same coordinate change to a classical 2-series."""
    if ts.coordinates != "classical":
        raise ValueError("expected a classical 2-series")
    table = rescaled_table(alpha_cap, ("u",))
    ia, iu = table.index("alpha"), table.index("u")
    out = {}
    for (a, b, k), c in ts.series.terms.items():
        if a + 3 * b != k - 1:
            raise NonIntegralCoefficient(f"inhomogeneous term v1^{a} v2^{b} t^{k}")
        key = [0] * len(table.generators)
        key[ia], key[iu] = a, k
        out[tuple(key)] = out.get(tuple(key), 0) + c
    return TwoSeries(
        series=GradedSeries(table, out, ts.series.order),
        variable="u",
        coordinates="rescaled",
        convention=ts.convention,
    )


def build_rescaled_fgl(convention: str = ARAKI, order: int = DEFAULT_TRUNCATION,
                       alpha_cap: int = DEFAULT_ALPHA_CAP,
                       u_names=("u1", "u2")) -> FormalGroupLaw:
    """Convenience pipeline: log -> F -> rescaled F."""
    depth = 1
    while 2 ** (depth + 1) <= order:
        depth += 1
    return rescale_to_er2(
        fgl_from_log(build_log(convention, depth), order), alpha_cap, u_names
    )


def convention_divergence(order: int = 8):
    """First coefficient of the 2-series at which the conventions differ.

    Returns (exponent key, araki coefficient, hazewinkel coefficient).
    """
    two = {}
    for conv in (ARAKI, HAZEWINKEL):
        depth = 1
        while 2 ** (depth + 1) <= order:
            depth += 1
        F = fgl_from_log(build_log(conv, depth), order)
        two[conv] = F.two_series().series
    a, h = two[ARAKI], two[HAZEWINKEL]
    keys = sorted(set(a.terms) | set(h.terms), key=lambda k: (k[-1], k))
    for k in keys:
        ca, ch = a.terms.get(k, 0), h.terms.get(k, 0)
        if ca != ch:
            return k, ca, ch
    return None
