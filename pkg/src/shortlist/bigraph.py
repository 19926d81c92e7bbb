"""Finite left-regular bipartite graphs and exact sharing/richness counts.

Left nodes are integers below 2**n read as n-bit strings; right nodes are
dense integers below right_size (not necessarily a power of two). A graph is
a neighbor oracle: a total deterministic function from (left node, edge slot)
to a right id, with every left node carrying exactly 2**d slots. Multi-edges
are legal and count with multiplicity wherever fractions of slots are taken,
while shared/s-shared thresholds count distinct left neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .errors import InputError, ParameterError, SizeViolationError

ADJACENCY_EDGE_CAP = 1 << 20


@dataclass(frozen=True)
class LeftRegularGraph:
    n: int
    d: int
    right_size: int
    neighbor_fn: Callable[[int, int], int]
    label: str = ""
    left_members: tuple[int, ...] | None = None  # None means all of {0,1}^n

    def __post_init__(self):
        if self.n < 0 or self.d < 0 or self.right_size < 1:
            raise ParameterError("need n >= 0, d >= 0, right_size >= 1")
        if self.left_members is not None:
            if not self.left_members:
                raise ParameterError("restricted left set must be nonempty")
            for x in self.left_members:
                self._check_left(x)

    @property
    def degree(self) -> int:
        return 1 << self.d

    def left_nodes(self) -> Iterable[int]:
        if self.left_members is not None:
            return self.left_members
        return range(1 << self.n)

    def left_size(self) -> int:
        if self.left_members is not None:
            return len(self.left_members)
        return 1 << self.n

    def has_left(self, x: int) -> bool:
        if x < 0 or x >> self.n:
            return False
        return self.left_members is None or x in set(self.left_members)

    def _check_left(self, x: int) -> None:
        if x < 0 or x >> self.n:
            raise InputError(f"left node {x} is not an {self.n}-bit value")

    def neighbor(self, x: int, slot: int) -> int:
        self._check_left(x)
        if not 0 <= slot < self.degree:
            raise InputError(f"edge slot {slot} out of range [0, {self.degree})")
        z = self.neighbor_fn(x, slot)
        if not 0 <= z < self.right_size:
            raise InputError(
                f"neighbor oracle returned {z} outside [0, {self.right_size})"
            )
        return z


@dataclass(frozen=True)
class LeftSubset:
    """A finite set of n-bit left nodes, enumerable in increasing order."""

    n: int
    members: frozenset[int]

    def __post_init__(self):
        for x in self.members:
            if x < 0 or x >> self.n:
                raise InputError(f"member {x} is not an {self.n}-bit value")

    @classmethod
    def of(cls, n: int, items: Iterable[int]) -> "LeftSubset":
        return cls(n, frozenset(items))

    @classmethod
    def full(cls, n: int) -> "LeftSubset":
        return cls(n, frozenset(range(1 << n)))

    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, x: int) -> bool:
        return x in self.members


@dataclass(frozen=True)
class RichnessReport:
    share_threshold: int
    delta: Fraction
    rich: frozenset[int]
    non_rich: frozenset[int]
    shared_right: frozenset[int]

    def non_rich_count(self) -> int:
        return len(self.non_rich)


def neighbors(graph: LeftRegularGraph, x: int) -> list[int]:
    """All 2**d neighbors of x, in slot order (multiplicity preserved)."""
    graph._check_left(x)
    if graph.left_members is not None and x not in graph.left_members:
        raise InputError(f"left node {x} not present in restricted graph")
    return [graph.neighbor(x, slot) for slot in range(graph.degree)]


def _present_members(graph: LeftRegularGraph, subset: LeftSubset) -> list[int]:
    if subset.n != graph.n:
        raise InputError("subset bit length does not match the graph")
    members = subset.members
    if graph.left_members is not None:
        members = members & frozenset(graph.left_members)
    return sorted(members)


def s_shared_right(
    graph: LeftRegularGraph, subset: LeftSubset, share_threshold: int
) -> frozenset[int]:
    """Right ids with at least share_threshold distinct left neighbors in subset."""
    if share_threshold < 1:
        raise ParameterError("share threshold must be >= 1")
    seen: dict[int, set[int]] = {}
    for x in _present_members(graph, subset):
        for z in set(neighbors(graph, x)):
            seen.setdefault(z, set()).add(x)
    return frozenset(z for z, xs in seen.items() if len(xs) >= share_threshold)


def rich_nodes(
    graph: LeftRegularGraph,
    subset: LeftSubset,
    share_threshold: int,
    delta: Fraction,
) -> RichnessReport:
    """Partition subset into rich and non-rich nodes.

    A member is rich when at most a delta fraction of its edge slots land on
    right nodes that share_threshold-many distinct subset members touch.
    """
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise ParameterError(f"delta must lie in (0, 1], got {delta}")
    shared = s_shared_right(graph, subset, share_threshold)
    rich: set[int] = set()
    non_rich: set[int] = set()
    for x in _present_members(graph, subset):
        hits = sum(1 for z in neighbors(graph, x) if z in shared)
        if Fraction(hits, graph.degree) <= delta:
            rich.add(x)
        else:
            non_rich.add(x)
    return RichnessReport(
        share_threshold=share_threshold,
        delta=delta,
        rich=frozenset(rich),
        non_rich=frozenset(non_rich),
        shared_right=shared,
    )


@dataclass(frozen=True)
class OwnerAuditEntry:
    subset_size: int
    non_rich_count: int
    allowed: int
    passed: bool
    non_rich: tuple[int, ...]


def check_rich_owner(
    graph: LeftRegularGraph,
    level: int,
    slack: int,
    delta: Fraction,
    family: list[LeftSubset],
) -> list[OwnerAuditEntry]:
    """Audit the rich-owner property against a supplied family of subsets.

    For each subset B with |B| <= 2**level, a pass means at most
    2**(level - slack) members are not (2, delta)-rich in B. Quantifying over
    every B is infeasible; callers choose the family that matters to them.
    """
    if level <= 0 or slack < 0:
        raise ParameterError("need level >= 1 and slack >= 0")
    allowed = 1 << (level - slack) if level >= slack else 0
    results = []
    for subset in family:
        if len(subset) > (1 << level):
            raise SizeViolationError(
                f"subset of size {len(subset)} exceeds 2^{level}"
            )
        report = rich_nodes(graph, subset, 2, delta)
        count = report.non_rich_count()
        results.append(
            OwnerAuditEntry(
                subset_size=len(subset),
                non_rich_count=count,
                allowed=allowed,
                passed=count <= allowed,
                non_rich=tuple(sorted(report.non_rich)),
            )
        )
    return results


def restrict(graph: LeftRegularGraph, keep: LeftSubset) -> LeftRegularGraph:
    """The subgraph on a nonempty subset of left nodes; edges are unchanged."""
    if len(keep) == 0:
        raise ParameterError("cannot restrict to an empty left set")
    members = _present_members(graph, keep)
    if not members:
        raise ParameterError("restriction removes every left node")
    return LeftRegularGraph(
        n=graph.n,
        d=graph.d,
        right_size=graph.right_size,
        neighbor_fn=graph.neighbor_fn,
        label=f"{graph.label}|restricted",
        left_members=tuple(members),
    )


def identity_graph(n: int) -> LeftRegularGraph:
    return LeftRegularGraph(n, 0, 1 << n, lambda x, _: x, label=f"identity[{n}]")


def constant_graph(n: int, d: int, target: int = 0, right_size: int = 1) -> LeftRegularGraph:
    if not 0 <= target < right_size:
        raise ParameterError("target must be a valid right id")
    return LeftRegularGraph(
        n, d, right_size, lambda x, j: target, label=f"constant[{n},{d}]"
    )


def table_graph(
    n: int, d: int, right_size: int, table: list[int], label: str = "table"
) -> LeftRegularGraph:
    """Graph backed by a dense (2**n * 2**d)-entry neighbor table."""
    if len(table) != (1 << (n + d)):
        raise InputError("table length must be 2^(n+d)")
    return LeftRegularGraph(
        n, d, right_size, lambda x, j: table[(x << d) | j], label=label
    )


def write_adjacency(graph: LeftRegularGraph, path) -> None:
    """Materialize a small graph to the adjacency text format."""
    edges = graph.left_size() * graph.degree
    if edges > ADJACENCY_EDGE_CAP:
        raise SizeViolationError(
            f"{edges} edges exceed the adjacency materialization cap"
        )
    hex_width = max(1, (graph.n + 3) // 4)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            f"BIGRAPH n={graph.n} d={graph.d} M={graph.right_size} label={graph.label}\n"
        )
        for x in graph.left_nodes():
            row = ",".join(str(z) for z in neighbors(graph, x))
            fh.write(f"{x:0{hex_width}x}: {row}\n")


def read_adjacency(path) -> LeftRegularGraph:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split()
        if len(parts) < 4 or parts[0] != "BIGRAPH":
            raise InputError(f"bad adjacency header: {header!r}")
        fields = dict(p.split("=", 1) for p in parts[1:])
        n, d, right_size = int(fields["n"]), int(fields["d"]), int(fields["M"])
        label = fields.get("label", "")
        rows: dict[int, list[int]] = {}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            left_part, _, rest = line.partition(":")
            x = int(left_part, 16)
            row = [int(tok) for tok in rest.strip().split(",")]
            if len(row) != (1 << d):
                raise InputError(f"row for {x:#x} has {len(row)} entries, want {1 << d}")
            rows[x] = row
    members = tuple(sorted(rows))
    full = len(members) == (1 << n)
    return LeftRegularGraph(
        n=n,
        d=d,
        right_size=right_size,
        neighbor_fn=lambda x, j: rows[x][j],
        label=label,
        left_members=None if full else members,
    )
