"""Degree-wise matrices of the total differential on modular forms and their leading terms."""
from __future__ import annotations

from collections.abc import Iterable, Sequence
import csv
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from functools import lru_cache
import io
import json
import logging
from math import gcd, lcm
from pathlib import Path
from typing import Self

from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors

from .exact_algebra import Monomial, nu2
from .level_maps import FIXTURES, ModularFormsRing, check_level, level_data

_LOGGER = logging.getLogger(__name__)

D1_TABLES_FILE = FIXTURES / "d1_tables.csv"
CSV_HEADER = ("ell", "weight", "source_line", "source_monomial", "two_exponent", "target_monomial")

# Forms of level 3 are printed in v1 = a1, v2 = a3.
V_NOTATION_LEVEL = 3

LABEL_WEIGHTS = {
    "v1": 1,
    "v2": 3,
    "b2": 2,
    "b4": 4,
    "delta": 4,
    "c4": 4,
    "c6": 6,
    "Delta": 12,
}

# Level forms whose torsion-free homotopy generator is a proper multiple.
LEVEL_MULTIPLES = {5: {"delta^3": 4, "delta^5": 4}}


class ChartFormat(StrEnum):
    """Output formats of a chart."""

    CSV = "csv"
    JSON = "json"
    SVG = "svg-text"

    def to_name(self) -> str:
        """Return the format name."""
        return self.value

    @classmethod
    def from_string(cls, string: str) -> Self:
        """Return the format from string."""
        if string.lower() in [fmt.value for fmt in cls]:
            return cls(string.lower())
        raise ValueError(
            f"Unknown chart format: {string}. Valid formats are: "
            + ", ".join(fmt.value for fmt in cls)
        )


@dataclass(frozen=True)
class BasisElement:
    """A monomial of the level or level-1 forms ring, possibly scaled to a homotopy generator."""

    ring: str
    exponents: Monomial
    label: str
    v1_exponent: int
    multiple: int = 1

    @property
    def name(self) -> str:
        """Return the printed generator, e.g. ``8*Delta``."""
        return f"{self.multiple}*{self.label}" if self.multiple > 1 else self.label

    def scaled(self, multiple: int) -> BasisElement:
        """Return the element standing for multiple times the form."""
        return BasisElement(self.ring, self.exponents, self.label, self.v1_exponent, multiple)


@dataclass
class DegreewiseMatrix:
    """The coface alternating sum on weight-w forms, one column per source."""

    ell: int
    s: int
    weight: int
    sources: list[BasisElement]
    targets: list[BasisElement]
    entries: list[list[Fraction]]

    @property
    def shape(self) -> tuple[int, int]:
        """Return (rows, columns)."""
        return len(self.targets), len(self.sources)

    def column(self, index: int) -> list[Fraction]:
        """Return one source column."""
        return [row[index] for row in self.entries]

    def target_key(self, row: int) -> tuple[int, int, int]:
        """Return the position of a target in the leading-term order, lowest first.

        From line 0 the level-1 copy on line 1 comes before every level form.
        """
        target = self.targets[row]
        first = int(target.ring == "mf") if self.s == 0 else 0
        return first, target.v1_exponent, row

    def source_key(self, column: int) -> tuple[int, int, int]:
        """Return the position of a source in the leading-term order, lowest first."""
        source = self.sources[column]
        return source.v1_exponent, int(source.ring == "mf1"), column

    def __matmul__(self, other: DegreewiseMatrix) -> list[list[Fraction]]:
        """Return the product of self after other."""
        rows, inner = self.shape
        columns = other.shape[1]
        return [
            [sum((self.entries[r][i] * other.entries[i][c] for i in range(inner)), Fraction(0)) for c in range(columns)]
            for r in range(rows)
        ]


@dataclass(frozen=True, order=True)
class DifferentialRule:
    """The leading-term statement source ↦ 2^two_exponent·target."""

    ell: int
    weight: int
    source_line: int
    source: str
    two_exponent: int
    target: str

    def to_row(self) -> dict[str, object]:
        """Return a CSV row."""
        return dict(zip(CSV_HEADER, (self.ell, self.weight, self.source_line, self.source, self.two_exponent, self.target)))

    def __str__(self) -> str:
        """Return e.g. ``v1^4 -> 16*v1*v2``."""
        scale = f"{2**self.two_exponent}*" if self.two_exponent else ""
        return f"{self.source} -> {scale}{self.target}"


@dataclass
class DifferentialTable:
    """Leading-term rules of one level with the 2-parts of the elementary divisors."""

    ell: int
    rules: list[DifferentialRule] = field(default_factory=list)
    divisors: dict[tuple[int, int], list[int]] = field(default_factory=dict)

    def sorted_rules(self) -> list[DifferentialRule]:
        """Return the rules ordered by weight, line and source."""
        return sorted(self.rules, key=lambda r: (r.weight, r.source_line, r.source, r.two_exponent, r.target))

    def __len__(self) -> int:
        """Return the number of rules."""
        return len(self.rules)


def _power(name: str, exponent: int) -> str:
    return name if exponent == 1 else f"{name}^{exponent}"


def _v_label(exponents: Monomial) -> str:
    a, b, c = exponents
    v1, v2 = 2 * a + b, b + 2 * c
    factors = [_power(n, e) for n, e in (("v1", v1), ("v2", v2)) if e]
    return "*".join(factors) or "1"


def _v1_exponent(forms: ModularFormsRing, exponents: Monomial) -> int:
    """Return the a1 exponent of the 2-adic leading term: the least one among odd coefficients."""
    realized = forms.realize(forms.ring.monomial(exponents))
    position = realized.ring.generators.index("a1")
    terms = realized.terms()
    odd = [e[position] for e, value in terms if nu2(value) == 0] or [e[position] for e, _ in terms]
    return min(odd)


def homotopy_multiple(ell: int, element: BasisElement) -> int:
    """Return m such that m times the form generates torsion-free homotopy on line 1.

    Level-1 forms follow the image of tmf at 2: 8/gcd(8, k) on Δ^k, 2 on
    forms with a factor c6.
    """
    _, factors = parse_monomial(element.label)
    powers = dict(factors)
    if element.ring == "mf1":
        if powers.get("c6"):
            return 2
        if set(powers) == {"Delta"}:
            return 8 // gcd(8, powers["Delta"])
        return 1
    return LEVEL_MULTIPLES.get(ell, {}).get(element.label, 1)


def _basis(ell: int, ring: str, weight: int) -> list[BasisElement]:
    data = level_data(ell)
    forms = data.mf if ring == "mf" else data.mf1
    elements = []
    for exponents in forms.basis(weight):
        if ring == "mf" and ell == V_NOTATION_LEVEL:
            label = _v_label(exponents)
        else:
            label = str(forms.ring.monomial(exponents))
        elements.append(BasisElement(ring, exponents, label, _v1_exponent(forms, exponents)))
    return elements


def _coordinates(forms: ModularFormsRing, x, weight: int, basis: list[BasisElement]) -> list[Fraction]:
    values = forms.coordinates(forms.realize(x), weight)
    return [values[b.exponents] for b in basis]


def degree_matrix(ell: int, s: int, weight: int, plain: bool = False) -> DegreewiseMatrix:
    """Return the matrix of the alternating coface sum from line s on weight-w forms.

    From line 1 the sources are the torsion-free homotopy generators that
    line 0 does not already hit. With plain=True every source is the bare
    form, so the matrices of both lines compose.
    """
    check_level(ell)
    if s not in (0, 1):
        raise ValueError(f"Unknown source line: {s}. Valid lines are: 0, 1")
    if weight < 0:
        raise ValueError(f"Weight must be non-negative, got {weight}")
    data = level_data(ell)
    mf, mf1 = data.mf, data.mf1
    level = _basis(ell, "mf", weight)
    level1 = _basis(ell, "mf1", weight)
    columns = []
    if s == 1:
        sources, targets = level + level1, level
        if not plain:
            hit = hit_from_line_zero(ell, weight)
            sources = [
                element.scaled(homotopy_multiple(ell, element))
                for element in sources
                if (element.ring, element.exponents) not in hit
            ]
        for element in sources:
            if element.ring == "mf":
                x = mf.ring.monomial(element.exponents)
                column = _coordinates(mf, data.t_mf(x) + x, weight, targets)
            else:
                c = mf1.ring.monomial(element.exponents)
                column = [-v for v in _coordinates(mf, data.f_mf(c), weight, targets)]
            columns.append([element.multiple * v for v in column])
    else:
        sources, targets = level1, level + level1
        scale = Fraction(ell) ** weight - 1
        for index, element in enumerate(level1):
            c = mf1.ring.monomial(element.exponents)
            top = _coordinates(mf, data.q_mf(c) - data.f_mf(c), weight, level)
            bottom = [scale if i == index else Fraction(0) for i in range(len(level1))]
            columns.append(top + bottom)
    entries = [[column[r] for column in columns] for r in range(len(targets))]
    _LOGGER.debug("Level %s matrix from line %s in weight %s has shape %sx%s", ell, s, weight, len(targets), len(sources))
    return DegreewiseMatrix(ell, s, weight, sources, targets, entries)


@lru_cache(maxsize=None)
def hit_from_line_zero(ell: int, weight: int) -> frozenset[tuple[str, Monomial]]:
    """Return the line-1 forms that are leading terms of images from line 0."""
    matrix = degree_matrix(ell, 0, weight)
    return frozenset(
        (matrix.targets[row].ring, matrix.targets[row].exponents) for _, row, _ in leading_pivots(matrix)
    )


def elementary_divisors(matrix: DegreewiseMatrix) -> list[int]:
    """Return the 2-adic valuations of the nonzero invariant factors."""
    rows, columns = matrix.shape
    if not rows or not columns:
        return []
    # denominators are powers of ℓ, units at 2
    scale = lcm(*(v.denominator for row in matrix.entries for v in row))
    integral = [[ZZ(int(v * scale)) for v in row] for row in matrix.entries]
    factors = invariant_factors(DomainMatrix(integral, (rows, columns), ZZ))
    return sorted(nu2(int(f)) for f in factors if f)


def leading_pivots(matrix: DegreewiseMatrix) -> list[tuple[int, int, int]]:
    """Return (2-adic exponent, row, column) of each pivot in elimination order.

    A pivot has the least 2-adic valuation left, lies in the lowest target row
    holding that valuation and, within the row, in the highest source. The
    other columns are then cleared along the pivot row, so every remaining
    source picks up corrections by higher sources only.
    """
    columns = {c: matrix.column(c) for c in range(matrix.shape[1])}
    pivots = []
    while True:
        entries = [(nu2(v), r, c) for c, column in columns.items() for r, v in enumerate(column) if v]
        if not entries:
            return pivots
        exponent = min(e for e, _, _ in entries)
        row = min((r for e, r, _ in entries if e == exponent), key=matrix.target_key)
        pivot_column = max((c for e, r, c in entries if e == exponent and r == row), key=matrix.source_key)
        pivot = columns.pop(pivot_column)
        for c, column in columns.items():
            factor = column[row] / pivot[row]
            if factor:
                columns[c] = [a - factor * b for a, b in zip(column, pivot)]
        _LOGGER.debug("Pivot %s at row %s", matrix.sources[pivot_column].name, matrix.targets[row].label)
        pivots.append((exponent, row, pivot_column))


def smith_leading_terms(matrix: DegreewiseMatrix) -> tuple[list[DifferentialRule], list[int]]:
    """Return the leading-term rules by 2-local column elimination, and the divisor 2-parts."""
    rules = [
        DifferentialRule(
            matrix.ell,
            matrix.weight,
            matrix.s,
            matrix.sources[column].name,
            exponent,
            matrix.targets[row].label,
        )
        for exponent, row, column in leading_pivots(matrix)
    ]
    return rules, elementary_divisors(matrix)


def composite_is_zero(ell: int, weight: int) -> bool:
    """Return True if the line-1 matrix after the line-0 matrix vanishes."""
    product = degree_matrix(ell, 1, weight, plain=True) @ degree_matrix(ell, 0, weight)
    return all(not v for row in product for v in row)


def d1_table(ell: int, max_weight: int, lines: Iterable[int] = (0, 1)) -> DifferentialTable:
    """Return the leading-term rules of every weight up to max_weight."""
    table = DifferentialTable(check_level(ell))
    for weight in range(max_weight + 1):
        for s in lines:
            rules, divisors = smith_leading_terms(degree_matrix(ell, s, weight))
            table.rules.extend(rules)
            if divisors:
                table.divisors[(s, weight)] = divisors
    _LOGGER.info("Level %s table through weight %s has %s rules", ell, max_weight, len(table))
    return table


def load_reference(path: Path = D1_TABLES_FILE) -> list[DifferentialRule]:
    """Return the reference rules stored in the fixture file."""
    with path.open(newline="", encoding="utf-8") as handle:
        return [
            DifferentialRule(
                int(row["ell"]),
                int(row["weight"]),
                int(row["source_line"]),
                row["source_monomial"],
                int(row["two_exponent"]),
                row["target_monomial"],
            )
            for row in csv.DictReader(handle)
        ]


def parse_monomial(text: str) -> tuple[int, frozenset[tuple[str, int]]]:
    """Split ``8*Delta`` into (3, {Delta: 1}): the 2-power prefix and the factors."""
    prefix = 0
    factors: dict[str, int] = {}
    for factor in text.replace(" ", "").split("*"):
        if not factor or factor == "1":
            continue
        if factor.isdigit():
            prefix += nu2(int(factor)) or 0
            continue
        name, _, exponent = factor.partition("^")
        factors[name] = factors.get(name, 0) + int(exponent or 1)
    return prefix, frozenset(factors.items())


def monomial_weight(text: str) -> int:
    """Return the weight of a printed monomial, ignoring numeric prefixes."""
    _, factors = parse_monomial(text)
    return sum(LABEL_WEIGHTS[name] * e for name, e in factors)


def _match_key(rule: DifferentialRule) -> tuple:
    prefix, source = parse_monomial(rule.source)
    target_prefix, target = parse_monomial(rule.target)
    return rule.ell, rule.source_line, source, rule.two_exponent + target_prefix - prefix, target


@dataclass
class ReferenceComparison:
    """Reference rules found and missed by a computed table."""

    matched: list[DifferentialRule] = field(default_factory=list)
    unmatched: list[DifferentialRule] = field(default_factory=list)
    inconsistent: list[DifferentialRule] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """Return True if every reference rule was found."""
        return not self.unmatched

    def summary(self) -> str:
        """Return e.g. ``matched 20 of 21``."""
        return f"matched {len(self.matched)} of {len(self.matched) + len(self.unmatched)}"


def compare_with_reference(
    table: DifferentialTable, reference: Iterable[DifferentialRule] | None = None
) -> ReferenceComparison:
    """Match reference rules against the computed table up to odd units."""
    reference = load_reference() if reference is None else reference
    computed = {_match_key(rule) for rule in table.rules}
    weights = {rule.weight for rule in table.rules}
    comparison = ReferenceComparison()
    for rule in reference:
        if rule.ell != table.ell or rule.weight not in weights:
            continue
        if monomial_weight(rule.source) != monomial_weight(rule.target):
            _LOGGER.warning("Reference rule %s changes weight", rule)
            comparison.inconsistent.append(rule)
            continue
        if _match_key(rule) in computed:
            comparison.matched.append(rule)
        else:
            _LOGGER.warning("Reference rule %s in weight %s was not reproduced", rule, rule.weight)
            comparison.unmatched.append(rule)
    return comparison


def _emit_csv(rules: list[DifferentialRule]) -> str:
    handle = io.StringIO()
    writer = csv.DictWriter(handle, fieldnames=CSV_HEADER, lineterminator="\n")
    writer.writeheader()
    for rule in rules:
        writer.writerow(rule.to_row())
    return handle.getvalue()


def _emit_json(tables: Sequence[DifferentialTable]) -> str:
    document = []
    for table in sorted(tables, key=lambda t: t.ell):
        document.append(
            {
                "ell": table.ell,
                "rules": [
                    {**rule.to_row(), "provenance": "leading-term elimination"}
                    for rule in table.sorted_rules()
                ],
                "divisors": [
                    {"source_line": s, "weight": w, "two_exponents": table.divisors[(s, w)]}
                    for s, w in sorted(table.divisors)
                ],
            }
        )
    return json.dumps({"tables": document}, indent=2, sort_keys=True) + "\n"


def _emit_svg(rules: list[DifferentialRule]) -> str:
    unit, margin = 12, 24
    stems = [2 * r.weight - r.source_line for r in rules] or [0]
    width = margin * 2 + unit * (max(stems) + 2)
    height = margin * 2 + unit * 4
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        "<!-- torsion-free classes and leading-term differentials; x = t-s, y = s -->",
    ]

    def point(stem: int, s: int) -> tuple[int, int]:
        return margin + unit * stem, height - margin - unit * s

    dots = set()
    for rule in rules:
        stem = 2 * rule.weight - rule.source_line
        x0, y0 = point(stem, rule.source_line)
        x1, y1 = point(stem - 1, rule.source_line + 1)
        dots.update({(x0, y0), (x1, y1)})
        lines.append(
            f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="black">'
            f"<title>{rule.source} -&gt; 2^{rule.two_exponent} {rule.target}</title></line>"
        )
        lines.append(f'<text x="{(x0 + x1) // 2}" y="{(y0 + y1) // 2}" font-size="6">{rule.two_exponent}</text>')
    for x, y in sorted(dots):
        lines.append(f'<circle cx="{x}" cy="{y}" r="2"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_chart(tables: Sequence[DifferentialTable], chart_format: ChartFormat | str) -> str:
    """Serialize the tables as csv, json or svg-text."""
    chart_format = ChartFormat.from_string(chart_format) if isinstance(chart_format, str) else chart_format
    rules = sorted(
        (rule for table in tables for rule in table.rules),
        key=lambda r: (r.ell, r.weight, r.source_line, r.source, r.two_exponent, r.target),
    )
    if chart_format == ChartFormat.CSV:
        return _emit_csv(rules)
    if chart_format == ChartFormat.JSON:
        return _emit_json(tables)
    return _emit_svg(rules)
