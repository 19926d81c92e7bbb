"""Exact plain complexity under the toy machine, and the enumerable level sets.

Complexity is defined over the base modes (literal and repeat) only; lookup
programs are valid machine programs whose lengths get compared against this
base-mode quantity, never counted as descriptions themselves. With the step
budget the machine is total, so the table below is exact, not approximate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from .encoding import bits_to_hex, gamma_length, hex_to_bits
from .errors import InputError, MissingBuildError, ParameterError
from .machine import ToyMachine, literal_program, repeat_program

if TYPE_CHECKING:
    from .richowner import RichOwnerGraph, SplitLevelIndex

TABLE_N_CAP = 14

VARIANT_PLAIN = "plain"
VARIANT_AUGMENTED = "augmented"


@dataclass(frozen=True)
class ComplexityTable:
    version: str
    n_max: int
    values: dict[str, int]
    e_const: int

    def complexity(self, x: str) -> int:
        try:
            return self.values[x]
        except KeyError:
            raise InputError(f"string of length {len(x)} not tabulated") from None

    def strings_of_length(self, n: int) -> list[str]:
        if n > self.n_max:
            raise InputError(f"length {n} exceeds the tabulated bound {self.n_max}")
        return [format(v, f"0{n}b") if n else "" for v in range(1 << n)]


def complexity_table(machine: ToyMachine, n_max: int) -> ComplexityTable:
    """Exact C(x) for every string with |x| <= n_max.

    Base-mode programs either are literal (cost |x| + 2), follow the repeat
    layout (cost 2 + gamma(L) + L + gamma(count) for output block^count), or
    yield bottom; so the minimum is computable by structural enumeration.
    The brute-force sweep over raw programs is kept as a test oracle.
    """
    if n_max > TABLE_N_CAP:
        raise ParameterError(f"n_max {n_max} exceeds the table cap {TABLE_N_CAP}")
    values: dict[str, int] = {}
    for n in range(n_max + 1):
        for v in range(1 << n):
            x = format(v, f"0{n}b") if n else ""
            values[x] = n + 2
    for block_len in range(1, n_max + 1):
        for count in range(1, n_max // block_len + 1):
            out_len = block_len * count
            cost = 2 + gamma_length(block_len) + block_len + gamma_length(count)
            for bv in range(1 << block_len):
                block = format(bv, f"0{block_len}b")
                out = block * count
                if cost < values[out]:
                    values[out] = cost
    if machine.run(literal_program("0")) != "0" or machine.run(
        repeat_program("01", 2)
    ) != "0101":
        raise RuntimeError("machine base semantics changed; rebuild the table logic")
    e_const = max(c - len(x) for x, c in values.items()) + 1
    return ComplexityTable(
        version=machine.version, n_max=n_max, values=values, e_const=e_const
    )


def brute_force_table(machine: ToyMachine, n_max: int) -> dict[str, int]:
    """Reference table by running every program; exponential, tests only."""
    best: dict[str, int] = {}
    for length in range(n_max + 3):
        for value in range(1 << length):
            program = format(value, f"0{length}b") if length else ""
            out = machine.run(program)
            if out is not None and len(out) <= n_max and out not in best:
                best[out] = length
    return best


def write_table(table: ComplexityTable, path, preamble: str = "") -> None:
    with open(path, "w", encoding="ascii") as fh:
        if preamble:
            fh.write(f"# {preamble}\n")
        fh.write(f"CTABLE version={table.version} n_max={table.n_max}\n")
        for x in sorted(table.values, key=lambda s: (len(s), s)):
            fh.write(f"{bits_to_hex(x)} {table.values[x]}\n")


def read_table(path) -> ComplexityTable:
    values: dict[str, int] = {}
    version = ""
    n_max = -1
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("CTABLE"):
                fields = dict(p.split("=", 1) for p in line.split()[1:])
                version = fields["version"]
                n_max = int(fields["n_max"])
                continue
            try:
                x_part, c_part = line.split()
                values[hex_to_bits(x_part)] = int(c_part)
            except ValueError as exc:
                raise InputError(f"line {lineno}: bad table line {line!r}") from exc
    if n_max < 0:
        raise InputError("missing CTABLE header")
    e_const = max(c - len(x) for x, c in values.items()) + 1
    return ComplexityTable(version=version, n_max=n_max, values=values, e_const=e_const)


@dataclass(frozen=True)
class BSet:
    """A level set of n-bit strings in its canonical enumeration order.

    Plain: every x with C(x) < level. Augmented: every x with C(x) < level-1
    (first type) plus the members of the level above that are not delta-rich
    there (second type). Order is ascending complexity, ties lexicographic.
    """

    n: int
    level: int
    variant: str
    first_type: tuple[int, ...]
    second_type: tuple[int, ...]
    members: tuple[int, ...]
    delta: Fraction | None = None

    def __len__(self) -> int:
        return len(self.members)

    def member_strings(self) -> list[str]:
        return [format(x, f"0{self.n}b") for x in self.members]


def _ordered(table: ComplexityTable, n: int, xs: set[int]) -> tuple[int, ...]:
    def key(v: int) -> tuple[int, int]:
        return (table.values[format(v, f"0{n}b") if n else ""], v)

    return tuple(sorted(xs, key=key))


def enumerate_b_plain(table: ComplexityTable, n: int, level: int) -> BSet:
    if n > table.n_max:
        raise InputError(f"length {n} not tabulated")
    if level < 1:
        raise ParameterError("level must be >= 1")
    first = {
        v
        for v in range(1 << n)
        if table.values[format(v, f"0{n}b") if n else ""] < level
    }
    members = _ordered(table, n, first)
    if len(members) >= 1 << level:
        raise RuntimeError("program counting bound violated; table is corrupt")
    return BSet(n, level, VARIANT_PLAIN, members, (), members)


def enumerate_b_augmented(
    table: ComplexityTable,
    n: int,
    level: int,
    delta: Fraction,
    above: BSet | None = None,
    above_graph: "RichOwnerGraph | None" = None,
    above_index: "SplitLevelIndex | None" = None,
) -> BSet:
    """The chained level set; the top of a chain passes no level above.

    The second type consists of the members of the level above that own too
    few of their edges there (shared fraction above delta, share threshold 2).
    """
    if n > table.n_max:
        raise InputError(f"length {n} not tabulated")
    if level < 2:
        raise ParameterError("augmented sets need level >= 2")
    delta = Fraction(delta)
    first = {
        v
        for v in range(1 << n)
        if table.values[format(v, f"0{n}b") if n else ""] < level - 1
    }
    if above is None:
        second: set[int] = set()
    else:
        if above.level != level + 1:
            raise MissingBuildError(
                f"need the level-{level + 1} set, got level {above.level}"
            )
        if above_index is None:
            if above_graph is None:
                raise MissingBuildError("augmented enumeration needs the level above's graph")
            from .richowner import build_level_index

            above_index = build_level_index(above_graph, above.members)
        from .richowner import owner_audit

        _, offenders = owner_audit(above_index, delta)
        second = set(offenders)
    members = _ordered(table, n, first | second)
    return BSet(
        n,
        level,
        VARIANT_AUGMENTED,
        _ordered(table, n, first),
        _ordered(table, n, second - first),
        members,
        delta,
    )


def c_short_oracle(
    machine: ToyMachine, table: ComplexityTable, x: str, c: int
) -> tuple[str, ...]:
    """Every machine program of length at most C(x) + c that outputs x.

    Exhaustive run over the raw program space, so only sensible for small
    C(x) + c; the machine's registered context (if any) participates, which
    is the honest reading of machine-relative shortness.
    """
    if c < 0:
        raise ParameterError("c must be >= 0")
    bound = table.complexity(x) + c
    found = []
    for length in range(bound + 1):
        for value in range(1 << length):
            program = format(value, f"0{length}b") if length else ""
            if machine.run(program) == x:
                found.append(program)
    return tuple(found)


def short_program_census(
    table: ComplexityTable, n_cap: int, c_max: int
) -> dict[str, list[int]]:
    """Per-string sorted program lengths up to C(x) + c_max, context-free.

    Structural enumeration of the base modes (lookup programs are bottom
    without a context); agreement with the exhaustive oracle is pinned by
    tests.
    """
    if n_cap > table.n_max:
        raise InputError(f"cap {n_cap} exceeds the tabulated bound {table.n_max}")
    bounds = {
        x: table.values[x] + c_max
        for x in table.values
        if len(x) <= n_cap
    }
    lengths: dict[str, list[int]] = {x: [] for x in bounds}
    for x, bound in bounds.items():
        literal_cost = len(x) + 2
        if literal_cost <= bound:
            lengths[x].append(literal_cost)
    max_out = n_cap
    for block_len in range(1, max_out + 1):
        for count in range(1, max_out // block_len + 1):
            cost = 2 + gamma_length(block_len) + block_len + gamma_length(count)
            for bv in range(1 << block_len):
                block = format(bv, f"0{block_len}b")
                out = block * count
                bound = bounds.get(out)
                if bound is not None and cost <= bound:
                    lengths[out].append(cost)
    return {x: sorted(v) for x, v in lengths.items()}


def count_short_programs(lengths: list[int], limit: int) -> int:
    return sum(1 for v in lengths if v <= limit)
