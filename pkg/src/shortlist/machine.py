"""The fixed toy machine: a tiny total interpreter with decidable halting.

Programs are bit strings. A two-bit header selects the mode:

    00  literal: output the remainder of the program.
    01  repeat: gamma(block length) + block + gamma(count); output the block
        repeated count times. Trailing bits after the count are malformed.
    10  lookup: a graph-index program. One variant bit (0 = plain per-level
        set, 1 = chained set), then gamma(level), gamma(slack), gamma(1/delta),
        gamma(n), then a right-node id of fixed width taken from the resolved
        build. The machine enumerates the referenced member set in canonical
        order and outputs the first member adjacent to the right node.
    11  reserved, never valid.

Every malformed or over-budget run yields bottom (None), so the machine is
total and plain complexity over it is exactly computable. The step budget is
min(STEP_FACTOR * 2**|p|, STEP_CAP); each output bit and each enumerated
member costs one step. Changing any of this changes MACHINE_VERSION and
invalidates existing tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from . import rng
from .encoding import gamma_decode, gamma_encode

MACHINE_VERSION = "tm1"
STEP_FACTOR = 4096
STEP_CAP = 1 << 22

HEADER_LITERAL = "00"
HEADER_REPEAT = "01"
HEADER_LOOKUP = "10"

VARIANT_PLAIN = 0
VARIANT_CHAIN = 1


class ResolvedBuild(Protocol):
    """What a lookup program needs from a registered graph build."""

    z_width: int
    right_size: int

    def members_in_order(self) -> tuple[int, ...]: ...

    def is_edge(self, x: int, z: int) -> bool: ...


class BuildContext(Protocol):
    """Registry mapping lookup-program fields to a concrete build."""

    def resolve(
        self, variant: int, n: int, level: int, slack: int, inv_delta: int
    ) -> ResolvedBuild | None: ...


def definition_text() -> str:
    """Human-readable pin of everything the machine version covers."""
    lines = [
        f"MACHINE version={MACHINE_VERSION}",
        "bit-order=msb-first",
        "header 00=literal 01=repeat 10=lookup 11=invalid",
        "selfdelim gamma: (bitlen(N)-1) zeros then binary(N), N>=1",
        "literal: output = program[2:]",
        "repeat: gamma(L) block[L] gamma(count), strict end, output = block*count",
        "lookup: variant[1] gamma(level) gamma(slack+1) gamma(inv_delta) gamma(n) z[z_width]",
        "lookup semantics: first member of the referenced set adjacent to z, else bottom",
        f"budget steps = min({STEP_FACTOR}*2^|p|, 2^22); 1 step per output bit or enumerated member",
        f"rng=splitmix64 gamma={rng.GAMMA:#x} mix1={rng.MIX1:#x} mix2={rng.MIX2:#x}",
    ]
    return "\n".join(lines) + "\n"


@dataclass
class ToyMachine:
    """Deterministic total machine; optionally wired to graph builds."""

    context: BuildContext | None = None
    step_factor: int = STEP_FACTOR
    step_cap: int = STEP_CAP
    version: str = field(default=MACHINE_VERSION)

    def budget(self, program_length: int) -> int:
        if program_length >= 64:
            return self.step_cap
        return min(self.step_factor * (1 << program_length), self.step_cap)

    def run(self, program: str) -> str | None:
        """Execute a program; None is bottom (malformed or out of budget)."""
        if len(program) < 2 or set(program) - {"0", "1"}:
            return None
        header = program[:2]
        if header == HEADER_LITERAL:
            body = program[2:]
            return body if len(body) <= self.budget(len(program)) else None
        if header == HEADER_REPEAT:
            return self._run_repeat(program)
        if header == HEADER_LOOKUP:
            return self._run_lookup(program)
        return None

    def _run_repeat(self, program: str) -> str | None:
        decoded = gamma_decode(program, 2)
        if decoded is None:
            return None
        block_len, pos = decoded
        if pos + block_len > len(program):
            return None
        block = program[pos : pos + block_len]
        decoded = gamma_decode(program, pos + block_len)
        if decoded is None:
            return None
        count, end = decoded
        if end != len(program):
            return None
        if block_len * count > self.budget(len(program)):
            return None
        return block * count

    def _run_lookup(self, program: str) -> str | None:
        if self.context is None or len(program) < 3:
            return None
        variant = int(program[2])
        pos = 3
        fields = []
        for _ in range(4):
            decoded = gamma_decode(program, pos)
            if decoded is None:
                return None
            value, pos = decoded
            fields.append(value)
        level, slack_plus1, inv_delta, n = fields
        slack = slack_plus1 - 1
        build = self.context.resolve(variant, n, level, slack, inv_delta)
        if build is None:
            return None
        if pos + build.z_width != len(program):
            return None
        z = int(program[pos:], 2) if build.z_width else 0
        if z >= build.right_size:
            return None
        budget = self.budget(len(program))
        steps = 0
        for x in build.members_in_order():
            steps += 1
            if steps > budget:
                return None
            if build.is_edge(x, z):
                out = format(x, f"0{n}b") if n else ""
                return out if steps + n <= budget else None
        return None


def literal_program(x: str) -> str:
    return HEADER_LITERAL + x


def repeat_program(block: str, count: int) -> str:
    if not block:
        raise ValueError("repeat block must be nonempty")
    return HEADER_REPEAT + gamma_encode(len(block)) + block + gamma_encode(count)


def lookup_program(
    variant: int, level: int, slack: int, inv_delta: int, n: int, z: int, z_width: int
) -> str:
    """Assemble a lookup program; the caller supplies the build's z width."""
    if variant not in (VARIANT_PLAIN, VARIANT_CHAIN):
        raise ValueError("variant must be 0 or 1")
    if z < 0 or (z_width == 0 and z != 0) or (z_width > 0 and z >> z_width):
        raise ValueError(f"right node {z} does not fit in {z_width} bits")
    if slack < 0:
        raise ValueError("slack must be >= 0")
    head = HEADER_LOOKUP + str(variant)
    for value in (level, slack + 1, inv_delta, n):
        if value < 1:
            raise ValueError("lookup fields must be >= 1")
        head += gamma_encode(value)
    return head + (format(z, f"0{z_width}b") if z_width else "")


def lookup_program_length(
    level: int, slack: int, inv_delta: int, n: int, z_width: int
) -> int:
    from .encoding import gamma_length

    return 3 + sum(gamma_length(v) for v in (level, slack + 1, inv_delta, n)) + z_width
