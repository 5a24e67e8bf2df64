"""Command line front end."""
from __future__ import annotations

import argparse
from collections.abc import Callable, Sequence
import csv
from dataclasses import dataclass, field
from fractions import Fraction
import io
import json
import logging
from pathlib import Path
import sys
from typing import Any

import voluptuous as vol

from . import charts, chromatic, group_cohomology, hopf, level_maps, weierstrass
from .const import (
    CONF_CASE,
    CONF_COMMAND,
    CONF_COMPARE,
    CONF_DIFF,
    CONF_ELEMENT,
    CONF_ELEMENTS_FILE,
    CONF_ELL,
    CONF_FAMILY,
    CONF_FORMAT,
    CONF_MAP,
    CONF_MAX_I,
    CONF_MAX_J,
    CONF_MAX_K,
    CONF_MAX_M,
    CONF_MAX_N,
    CONF_MAX_S,
    CONF_MAX_WEIGHT,
    CONF_OUTPUT,
    CONF_SAMPLES,
    CONF_SEED,
    CONF_TATE_B,
    CONF_VERBOSE,
    CONF_VERIFY,
    DEFAULT_E2_ELL,
    DEFAULT_ELL,
    DEFAULT_FAMILIES,
    DEFAULT_FORMAT,
    DEFAULT_MAX_I,
    DEFAULT_MAX_J,
    DEFAULT_MAX_K,
    DEFAULT_MAX_M,
    DEFAULT_MAX_N,
    DEFAULT_MAX_S,
    DEFAULT_MAX_WEIGHT,
    DEFAULT_NAME,
    DEFAULT_RELATION_SAMPLES,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TATE_B,
    LOG_DATE_FORMAT,
    LOG_FORMAT,
    SUPPORTED_LEVELS,
)
from .exceptions import QellError
from .state import Report

_LOGGER = logging.getLogger(__name__)

TEXT_FORMATS = ("text", "csv", "json")
CHART_FORMATS = tuple(fmt.value for fmt in charts.ChartFormat)

ELL = vol.All(vol.Coerce(int), vol.In(SUPPORTED_LEVELS))
POSITIVE = vol.All(vol.Coerce(int), vol.Range(min=1))
NON_NEGATIVE = vol.All(vol.Coerce(int), vol.Range(min=0))

OPTIONS_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_VERBOSE, default=False): bool,
        vol.Optional(CONF_FORMAT, default=DEFAULT_FORMAT): vol.In(TEXT_FORMATS),
        vol.Optional(CONF_OUTPUT): str,
    },
    extra=vol.REMOVE_EXTRA,
)

TATE_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_TATE_B, default=[DEFAULT_TATE_B]): [vol.Coerce(Fraction)],
        vol.Optional(CONF_SAMPLES, default=DEFAULT_SAMPLES): POSITIVE,
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.Coerce(int),
    },
    extra=vol.REMOVE_EXTRA,
).extend(OPTIONS_SCHEMA.schema)

LEVEL_SCHEMA = vol.Schema(
    {vol.Optional(CONF_ELL, default=DEFAULT_ELL): ELL},
    extra=vol.REMOVE_EXTRA,
).extend(OPTIONS_SCHEMA.schema)

MAPS_SCHEMA = LEVEL_SCHEMA.extend({vol.Optional(CONF_MAP): str})

IDENTITIES_SCHEMA = LEVEL_SCHEMA.extend(
    {
        vol.Optional(CONF_MAX_WEIGHT, default=DEFAULT_MAX_WEIGHT): NON_NEGATIVE,
        vol.Optional(CONF_SAMPLES, default=DEFAULT_RELATION_SAMPLES): POSITIVE,
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.Coerce(int),
    }
)

E2_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_ELL, default=DEFAULT_E2_ELL): ELL,
        vol.Optional(CONF_MAX_WEIGHT, default=DEFAULT_MAX_WEIGHT): NON_NEGATIVE,
        vol.Optional(CONF_MAX_S, default=DEFAULT_MAX_S): NON_NEGATIVE,
        vol.Optional(CONF_VERIFY, default=False): bool,
    },
    extra=vol.REMOVE_EXTRA,
).extend(OPTIONS_SCHEMA.schema)

BETA_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_FAMILY, default=list(DEFAULT_FAMILIES)): [
            vol.All(str, chromatic.BetaFamily.from_string)
        ],
        vol.Optional(CONF_MAX_I, default=DEFAULT_MAX_I): POSITIVE,
        vol.Optional(CONF_MAX_J, default=DEFAULT_MAX_J): POSITIVE,
        vol.Optional(CONF_MAX_K, default=DEFAULT_MAX_K): POSITIVE,
        vol.Optional(CONF_DIFF, default=False): bool,
    },
    extra=vol.REMOVE_EXTRA,
).extend(OPTIONS_SCHEMA.schema)

COCYCLE_SCHEMA = LEVEL_SCHEMA.extend(
    {
        vol.Optional(CONF_ELEMENT, default=[]): [str],
        vol.Optional(CONF_ELEMENTS_FILE): str,
    }
)

# One entry of an --elements-file document: NUMERATOR / (2^k v1^j).
ELEMENT_SCHEMA = vol.Schema(
    {
        vol.Required("numerator"): vol.Coerce(str),
        vol.Required("k"): NON_NEGATIVE,
        vol.Required("j"): NON_NEGATIVE,
    }
)

BSS_SCHEMA = LEVEL_SCHEMA.extend(
    {
        vol.Optional(CONF_MAX_M, default=DEFAULT_MAX_M): POSITIVE,
        vol.Optional(CONF_MAX_N, default=DEFAULT_MAX_N): vol.All(vol.Coerce(int), vol.Range(min=2)),
    }
)

WITNESS_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_CASE, default=[]): [vol.All(str, chromatic.WitnessCase.from_string)],
    },
    extra=vol.REMOVE_EXTRA,
).extend(OPTIONS_SCHEMA.schema)

D1_SCHEMA = LEVEL_SCHEMA.extend(
    {
        vol.Optional(CONF_MAX_WEIGHT, default=DEFAULT_MAX_WEIGHT): NON_NEGATIVE,
        vol.Optional(CONF_COMPARE, default=False): bool,
    }
)

CHART_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_ELL, default=list(SUPPORTED_LEVELS)): [ELL],
        vol.Optional(CONF_MAX_WEIGHT, default=DEFAULT_MAX_WEIGHT): NON_NEGATIVE,
        vol.Optional(CONF_FORMAT, default=charts.ChartFormat.CSV.value): vol.In(CHART_FORMATS),
        vol.Optional(CONF_VERBOSE, default=False): bool,
        vol.Optional(CONF_OUTPUT): str,
    },
    extra=vol.REMOVE_EXTRA,
)


@dataclass
class Command:
    """A validated command with its options."""

    name: str
    options: dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        """Return an option."""
        return self.options[key]


def _add_common(parser: argparse.ArgumentParser, formats: Sequence[str] = TEXT_FORMATS) -> None:
    parser.add_argument("--verbose", action="store_true", help="Log debug messages.")
    parser.add_argument("--format", choices=formats, help="Output format.")
    parser.add_argument("--output", help="Write the document to this path.")


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(prog=DEFAULT_NAME, description="Exact computations for Q(3) and Q(5)")
    subparsers = parser.add_subparsers(dest=CONF_COMMAND, required=True)

    sub = subparsers.add_parser("tate-normal-form", help="Round-trip Tate normal forms and certify order 5.")
    sub.add_argument("--b", dest=CONF_TATE_B, action="append", help="Rational value of b (repeatable).")
    sub.add_argument("--samples", type=int, help="Random changes per value of b.")
    sub.add_argument("--seed", type=int, help="Seed for the random changes.")
    _add_common(sub)

    sub = subparsers.add_parser("velu", help="Quotient curve by Vélu's formulas.")
    sub.add_argument("--ell", type=int, help="Level, 3 or 5.")
    _add_common(sub)

    sub = subparsers.add_parser("maps", help="Print the structure maps of a level.")
    sub.add_argument("--ell", type=int, help="Level, 3 or 5.")
    sub.add_argument("--map", dest=CONF_MAP, help="Print only this map.")
    _add_common(sub)

    sub = subparsers.add_parser("identities", help="Check the composite identities of a level.")
    sub.add_argument("--ell", type=int, help="Level, 3 or 5.")
    sub.add_argument("--max-weight", type=int, help="Largest weight of the invariant basis.")
    sub.add_argument("--samples", type=int, help="Random points for the Lambda1 relations.")
    sub.add_argument("--seed", type=int, help="Seed for the random points.")
    _add_common(sub)

    sub = subparsers.add_parser("e2", help="Group cohomology chart of the E2-term.")
    sub.add_argument("--ell", type=int, help="Level, 3 or 5.")
    sub.add_argument("--max-weight", type=int, help="Largest internal weight.")
    sub.add_argument("--max-s", type=int, help="Largest cohomological degree.")
    sub.add_argument("--verify", action="store_true", help="Also verify the multiplicative relations.")
    _add_common(sub)

    sub = subparsers.add_parser("beta-table", help="Index sets of the divided beta family.")
    sub.add_argument("--family", action="append", help="sphere, q3 or q5 (repeatable).")
    sub.add_argument("--max-i", type=int, help="Largest power of a3.")
    sub.add_argument("--max-j", type=int, help="Largest power of v1.")
    sub.add_argument("--max-k", type=int, help="Largest power of 2.")
    sub.add_argument("--diff", action="store_true", help="Compare the first two families.")
    _add_common(sub)

    sub = subparsers.add_parser("verify-cocycle", help="Check a sum of chromatic fractions is a cocycle.")
    sub.add_argument("--ell", type=int, help="Level, 3 or 5.")
    sub.add_argument(
        "--element", action="append",
        help="Fraction NUMERATOR:K:J meaning NUMERATOR/(2^K v1^J) (repeatable).",
    )
    sub.add_argument(
        "--elements-file", dest=CONF_ELEMENTS_FILE,
        help='JSON list of {"numerator": ..., "k": ..., "j": ...} fractions.',
    )
    _add_common(sub)

    sub = subparsers.add_parser("bss", help="v1-Bockstein differentials from x0, x1 and x2.")
    sub.add_argument("--ell", type=int, help="Level, 3 or 5.")
    sub.add_argument("--max-m", type=int, help="Largest odd multiplier m.")
    sub.add_argument("--max-n", type=int, help="Largest n for the powers of x2.")
    _add_common(sub)

    sub = subparsers.add_parser("witnesses", help="Certify the stored divided beta witnesses of Q(3).")
    sub.add_argument("--case", dest=CONF_CASE, action="append", help="Only this case, e.g. k1 or k3odd (repeatable).")
    _add_common(sub)

    sub = subparsers.add_parser("d1-table", help="Leading terms of d1 on modular forms.")
    sub.add_argument("--ell", type=int, help="Level, 3 or 5.")
    sub.add_argument("--max-weight", type=int, help="Largest weight.")
    sub.add_argument("--compare", action="store_true", help="Compare with the reference tables.")
    _add_common(sub)

    sub = subparsers.add_parser("chart", help="Emit a chart of the leading-term tables.")
    sub.add_argument("--ell", type=int, action="append", help="Level, 3 or 5 (repeatable).")
    sub.add_argument("--max-weight", type=int, help="Largest weight.")
    _add_common(sub, CHART_FORMATS)
    return parser


COMMAND_SCHEMAS = {
    "tate-normal-form": TATE_SCHEMA,
    "velu": LEVEL_SCHEMA,
    "maps": MAPS_SCHEMA,
    "identities": IDENTITIES_SCHEMA,
    "e2": E2_SCHEMA,
    "beta-table": BETA_SCHEMA,
    "verify-cocycle": COCYCLE_SCHEMA,
    "bss": BSS_SCHEMA,
    "witnesses": WITNESS_SCHEMA,
    "d1-table": D1_SCHEMA,
    "chart": CHART_SCHEMA,
}


def parse_args(argv: Sequence[str] | None = None) -> Command:
    """Parse and validate the command line."""
    parser = build_parser()
    args = parser.parse_args(argv)
    name = getattr(args, CONF_COMMAND)
    options = {k: v for k, v in vars(args).items() if v is not None and k != CONF_COMMAND}
    try:
        options = COMMAND_SCHEMAS[name](options)
    except vol.Invalid as err:
        parser.error(f"{name}: {err}")
    return Command(name, options)


def _rows_document(rows: list[dict[str, Any]], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2, sort_keys=True) + "\n"
    if not rows:
        return ""
    handle = io.StringIO()
    if fmt == "csv":
        writer = csv.DictWriter(handle, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return handle.getvalue()
    lines = ["\t".join(rows[0])]
    lines.extend("\t".join(str(v) for v in row.values()) for row in rows)
    return "\n".join(lines) + "\n"


def _reports_document(reports: list[Report], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([r.to_json() for r in reports], indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        rows = [
            {"report": r.title, **check.to_json()} for r in reports for check in r.checks
        ]
        return _rows_document(rows, fmt)
    return "\n".join(r.summary() for r in reports) + "\n"


def _status(reports: list[Report]) -> int:
    return 0 if all(r.ok for r in reports) else 1


def _tate_normal_form(cmd: Command) -> tuple[int, str]:
    reports = [
        weierstrass.tate_round_trip_check(cmd[CONF_TATE_B], cmd[CONF_SEED], cmd[CONF_SAMPLES]),
        weierstrass.order_five_check(),
    ]
    return _status(reports), _reports_document(reports, cmd[CONF_FORMAT])


def _velu(cmd: Command) -> tuple[int, str]:
    data = level_maps.level_data(cmd[CONF_ELL])
    quotient = data.quotient_curve()
    report = level_maps.velu_agreement_check(cmd[CONF_ELL])
    if cmd[CONF_FORMAT] == "text":
        names = weierstrass.WEIERSTRASS_NAMES
        lines = [f"{n} = {c}" for n, c in zip(names, quotient.coefficients)]
        return _status([report]), "\n".join(lines) + "\n" + _reports_document([report], "text")
    rows = [
        {"coefficient": n, "value": str(c)}
        for n, c in zip(weierstrass.WEIERSTRASS_NAMES, quotient.coefficients)
    ]
    return _status([report]), _rows_document(rows, cmd[CONF_FORMAT])


def _maps(cmd: Command) -> tuple[int, str]:
    maps = level_maps.level_data(cmd[CONF_ELL]).maps()
    if CONF_MAP in cmd.options:
        if cmd[CONF_MAP] not in maps:
            raise ValueError(f"Unknown map: {cmd[CONF_MAP]}. Valid maps are: " + ", ".join(maps))
        maps = {cmd[CONF_MAP]: maps[cmd[CONF_MAP]]}
    rows = [
        {"map": name, "generator": generator, "image": image}
        for name, ring_map in maps.items()
        for generator, image in ring_map.to_json().items()
    ]
    return 0, _rows_document(rows, cmd[CONF_FORMAT])


def _identities(cmd: Command) -> tuple[int, str]:
    ell = cmd[CONF_ELL]
    reports = [level_maps.composite_identity_check(ell, cmd[CONF_MAX_WEIGHT])]
    if ell == 5:
        reports.extend(
            [
                level_maps.atkin_lehner_restriction_check(),
                level_maps.kernel_point_check(),
                hopf.lambda1_relations_check(cmd[CONF_SEED], cmd[CONF_SAMPLES]),
            ]
        )
    return _status(reports), _reports_document(reports, cmd[CONF_FORMAT])


def _action(ell: int) -> group_cohomology.CyclicAction:
    if ell == 5:
        return group_cohomology.CyclicAction.level5()
    return group_cohomology.CyclicAction.level3()


def _e2(cmd: Command) -> tuple[int, str]:
    action = _action(cmd[CONF_ELL])
    groups = group_cohomology.e2_chart(cmd[CONF_MAX_WEIGHT], cmd[CONF_MAX_S], action)
    status = 0 if all(g.matches_summands for g in groups) else 1
    document = _rows_document([g.to_row() for g in groups], cmd[CONF_FORMAT])
    if cmd[CONF_VERIFY]:
        if cmd[CONF_ELL] != 5:
            raise ValueError("The E2 relations are stated for level 5")
        report = group_cohomology.verify_e2_relations(cmd[CONF_MAX_WEIGHT], action)
        status = status or _status([report])
        document += _reports_document([report], cmd[CONF_FORMAT])
    return status, document


def _beta_table(cmd: Command) -> tuple[int, str]:
    families = cmd[CONF_FAMILY]
    bounds = (cmd[CONF_MAX_I], cmd[CONF_MAX_J], cmd[CONF_MAX_K])
    tables = [chromatic.beta_table(family, *bounds) for family in families]
    if cmd[CONF_DIFF]:
        if len(tables) != 2:
            raise ValueError("--diff needs exactly two families")
        only_first, only_second = chromatic.compare_beta_tables(*tables)
        if not only_first and not only_second:
            return 0, f"{families[0].to_name()} and {families[1].to_name()}: identical\n"
        rows = [
            {"only_in": family.to_name(), "m": m, "n": n, "j": j, "k": k}
            for family, keys in ((families[0], only_first), (families[1], only_second))
            for m, n, j, k in sorted(keys)
        ]
        return 1, _rows_document(rows, cmd[CONF_FORMAT])
    rows = [
        {"family": index.family.value, "element": str(index), "m": index.m, "n": index.n, "j": index.j, "k": index.k}
        for table in tables
        for index in sorted(table)
    ]
    return 0, _rows_document(rows, cmd[CONF_FORMAT])


def parse_fraction(ring, text: str) -> chromatic.ChromaticFraction:
    """Parse ``NUMERATOR:K:J``."""
    numerator, k, j = text.rsplit(":", 2)
    return chromatic.ChromaticFraction.parse(ring, numerator, int(k), int(j))


def load_fractions(ring, path: str) -> list[chromatic.ChromaticFraction]:
    """Read the fractions of a JSON element description."""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = vol.Schema([ELEMENT_SCHEMA])(document)
    except (OSError, vol.Invalid) as err:
        raise QellError(f"{path}: {err}") from err
    return [
        chromatic.ChromaticFraction.parse(ring, entry["numerator"], entry["k"], entry["j"])
        for entry in entries
    ]


def _verify_cocycle(cmd: Command) -> tuple[int, str]:
    ell = cmd[CONF_ELL]
    ring = level_maps.level_data(ell).weierstrass
    fractions = [parse_fraction(ring, text) for text in cmd[CONF_ELEMENT]]
    if CONF_ELEMENTS_FILE in cmd.options:
        fractions += load_fractions(ring, cmd[CONF_ELEMENTS_FILE])
    if not fractions:
        raise QellError("No elements given, use --element or --elements-file")
    differential, (k, j) = chromatic.reduced_total_differential(fractions, ell)
    row = {
        "sum": " + ".join(str(f) for f in fractions),
        "modulus": f"(2^{k}, v1^{j})",
        **differential.to_json(),
        "cocycle": differential.is_zero,
    }
    status = 0 if differential.is_zero else 1
    if cmd[CONF_FORMAT] == "text":
        return status, "\n".join(f"{key}: {value}" for key, value in row.items()) + "\n"
    return status, _rows_document([row], cmd[CONF_FORMAT])


def _bss(cmd: Command) -> tuple[int, str]:
    rules = chromatic.bss_differentials(cmd[CONF_ELL], cmd[CONF_MAX_M], cmd[CONF_MAX_N])
    if cmd[CONF_FORMAT] == "text":
        return 0, "".join(f"{rule}\n" for rule in rules)
    return 0, _rows_document([rule.to_row() for rule in rules], cmd[CONF_FORMAT])


def _witnesses(cmd: Command) -> tuple[int, str]:
    cases = set(cmd[CONF_CASE])
    report = Report("Divided beta witnesses of Q(3)")
    for witness in chromatic.load_witnesses():
        if cases and witness.case not in cases:
            continue
        report.add(f"{witness.case.to_name()}: {witness.index}", witness.certify(), str(witness))
    return _status([report]), _reports_document([report], cmd[CONF_FORMAT])


def _d1_table(cmd: Command) -> tuple[int, str]:
    table = charts.d1_table(cmd[CONF_ELL], cmd[CONF_MAX_WEIGHT])
    rows = [rule.to_row() for rule in table.sorted_rules()]
    if cmd[CONF_FORMAT] == "text":
        document = "".join(f"{rule.weight}\t{rule.source_line}\t{rule}\n" for rule in table.sorted_rules())
    else:
        document = _rows_document(rows, cmd[CONF_FORMAT])
    if not cmd[CONF_COMPARE]:
        return 0, document
    comparison = charts.compare_with_reference(table)
    report = Report(f"Reference table for level {cmd[CONF_ELL]}")
    for rule in comparison.matched:
        report.add(str(rule), True)
    for rule in comparison.unmatched:
        report.add(str(rule), False, f"weight {rule.weight}")
    return _status([report]), document + _reports_document([report], "text" if cmd[CONF_FORMAT] == "text" else "csv")


def _chart(cmd: Command) -> tuple[int, str]:
    tables = [charts.d1_table(ell, cmd[CONF_MAX_WEIGHT]) for ell in cmd[CONF_ELL]]
    return 0, charts.emit_chart(tables, cmd[CONF_FORMAT])


HANDLERS: dict[str, Callable[[Command], tuple[int, str]]] = {
    "tate-normal-form": _tate_normal_form,
    "velu": _velu,
    "maps": _maps,
    "identities": _identities,
    "e2": _e2,
    "beta-table": _beta_table,
    "verify-cocycle": _verify_cocycle,
    "bss": _bss,
    "witnesses": _witnesses,
    "d1-table": _d1_table,
    "chart": _chart,
}


def run(cmd: Command) -> tuple[int, str]:
    """Run a command and return its exit status and output document."""
    _LOGGER.debug("Running %s with %s", cmd.name, cmd.options)
    try:
        return HANDLERS[cmd.name](cmd)
    except (QellError, ValueError) as err:
        raise QellError(f"{cmd.name}: {err}") from err


def setup_logging(verbose: bool) -> None:
    """Configure the root logger."""
    logging.basicConfig(
        format=LOG_FORMAT,
        datefmt=LOG_DATE_FORMAT,
        level=logging.DEBUG if verbose else logging.WARNING,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the ``qell`` script."""
    cmd = parse_args(argv)
    setup_logging(cmd[CONF_VERBOSE])
    try:
        status, document = run(cmd)
    except QellError as err:
        _LOGGER.error("%s", err)
        sys.stderr.write(f"{DEFAULT_NAME}: {err}\n")
        return 2
    if CONF_OUTPUT in cmd.options:
        Path(cmd[CONF_OUTPUT]).write_text(document, encoding="utf-8")
    else:
        sys.stdout.write(document)
    return status
