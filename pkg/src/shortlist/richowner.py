"""Prime-hash edge splitting and rich-owner graph construction.

The transform multiplies each edge of a base graph into one copy per prime in
a fixed list, tagging copies with the left node's residue. Two left nodes can
collide on a copy only when the prime divides their difference, and a
difference below 2**n has at most n prime divisors, so a long enough prime
list makes almost every copy privately owned. Composing a verified extractor
with the transform yields graphs where, in any admissible left subset, almost
every member owns almost all of its edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .bigraph import LeftRegularGraph, LeftSubset
from .encoding import ceil_log2, next_pow2
from .errors import InputError, ParameterError, UnverifiedExtractorError
from .extractor import ExtractorInstance, ceil_fraction

DEFAULT_DEGREE_CONSTANT = 6
DEFAULT_RIGHT_CONSTANT = 6

_prime_cache: list[int] = [2, 3, 5, 7, 11, 13]


def _sieve_limit_for(count: int) -> int:
    if count < 6:
        return 15
    approx = count * (math.log(count) + math.log(math.log(count)))
    return int(approx) + 16


def first_primes(count: int) -> tuple[int, ...]:
    """The first `count` primes, ascending."""
    if count < 1:
        raise ParameterError("count must be >= 1")
    while len(_prime_cache) < count:
        limit = max(_sieve_limit_for(count), 2 * _prime_cache[-1])
        flags = bytearray([1]) * (limit + 1)
        flags[0] = flags[1] = 0
        for p in range(2, int(limit**0.5) + 1):
            if flags[p]:
                flags[p * p :: p] = bytearray(len(range(p * p, limit + 1, p)))
        _prime_cache.clear()
        _prime_cache.extend(i for i in range(limit + 1) if flags[i])
    return tuple(_prime_cache[:count])


def prime_upper_bound(index: int) -> float:
    """t ln t + t ln ln t, valid as a bound on the index-th prime for index >= 6."""
    if index < 6:
        raise ParameterError("the bound applies from index 6 on")
    return index * math.log(index) + index * math.log(math.log(index))


def canonical_int(x: int, n: int) -> int:
    """Injective map of n-bit strings into [2**n, 2**(n+1))."""
    if x < 0 or x >> n:
        raise InputError(f"{x} is not an {n}-bit value")
    return (1 << n) | x


@dataclass(frozen=True)
class SplitParams:
    share: int
    delta: Fraction
    bits: int
    t: int
    primes: tuple[int, ...]

    @classmethod
    def exact(cls, share: int, delta: Fraction, bits: int) -> "SplitParams":
        """Prime count ceil(share*bits/delta), the collision-lemma minimum."""
        t = cls._minimum_t(share, delta, bits)
        return cls(share, Fraction(delta), bits, t, first_primes(t))

    @classmethod
    def padded(cls, share: int, delta: Fraction, bits: int) -> "SplitParams":
        """Prime count rounded up to a power of two.

        Extra primes only reduce collision fractions, and a power-of-two count
        keeps the split graph's degree a power of two so that edge slots are
        addressable by whole seed bits.
        """
        t = next_pow2(cls._minimum_t(share, delta, bits))
        return cls(share, Fraction(delta), bits, t, first_primes(t))

    @staticmethod
    def _minimum_t(share: int, delta: Fraction, bits: int) -> int:
        delta = Fraction(delta)
        if share < 1 or bits < 1:
            raise ParameterError("need share >= 1 and bits >= 1")
        if not 0 < delta <= 1:
            raise ParameterError(f"delta must lie in (0, 1], got {delta}")
        return ceil_fraction(Fraction(share * bits) / delta)

    @property
    def largest_prime(self) -> int:
        return self.primes[-1]


def collision_fraction(
    values: list[int], index: int, params: SplitParams
) -> Fraction:
    """Fraction of the prime list where values[index] collides with another entry.

    Entries are distinct integers below 2**(bits+1); callers holding n-bit
    strings get such integers from canonical_int. A residue collision needs
    the prime to divide a difference, and a difference this small has at most
    `bits` prime divisors, which is what keeps the fraction under delta.
    """
    if len(set(values)) != len(values):
        raise InputError("entries must be distinct")
    if len(values) > params.share:
        raise InputError("more entries than the share parameter covers")
    if not 0 <= index < len(values):
        raise InputError("index out of range")
    bound = 1 << (params.bits + 1)
    for v in values:
        if not 0 <= v < bound:
            raise InputError(f"entry {v} is not below 2^{params.bits + 1}")
    me = values[index]
    others = [v for j, v in enumerate(values) if j != index]
    colliding = 0
    for p in params.primes:
        mine = me % p
        if any(o % p == mine for o in others):
            colliding += 1
    return Fraction(colliding, params.t)


def encode_split_id(base: int, prime_index: int, residue: int, p_last: int) -> int:
    return base * p_last * p_last + prime_index * p_last + residue


@dataclass(frozen=True)
class SplitRightId:
    base: int
    prime: int
    residue: int
    prime_index: int

    def __post_init__(self):
        if not 0 <= self.residue < self.prime:
            raise InputError("residue must lie below its prime")


def decode_split_id(z: int, params: SplitParams) -> SplitRightId:
    p_last = params.largest_prime
    base, rem = divmod(z, p_last * p_last)
    prime_index, residue = divmod(rem, p_last)
    if prime_index >= params.t:
        raise InputError(f"prime index {prime_index} out of range")
    return SplitRightId(base, params.primes[prime_index], residue, prime_index)


def split_graph(
    graph: LeftRegularGraph, share: int, delta: Fraction
) -> tuple[LeftRegularGraph, SplitParams]:
    """Split every edge into one tagged copy per prime.

    Edge slot j of the new graph decomposes as (base slot, prime index) with
    j = base * t + prime_index; the copy for prime p lands on
    (base right id, p, x mod p) under the dense id encoding.
    """
    params = SplitParams.padded(share, delta, graph.n)
    t = params.t
    p_last = params.largest_prime
    primes = params.primes
    n = graph.n

    def neighbor(x: int, j: int) -> int:
        base_slot, prime_index = divmod(j, t)
        z0 = graph.neighbor_fn(x, base_slot)
        p = primes[prime_index]
        return encode_split_id(z0, prime_index, canonical_int(x, n) % p, p_last)

    split = LeftRegularGraph(
        n=n,
        d=graph.d + (t.bit_length() - 1),
        right_size=graph.right_size * p_last * p_last,
        neighbor_fn=neighbor,
        label=f"{graph.label}|split[s={share},t={t}]",
        left_members=graph.left_members,
    )
    return split, params


@dataclass(frozen=True)
class RichOwnerGraph:
    """A split extractor graph with recorded build parameters."""

    n: int
    level: int
    slack: int
    delta: Fraction
    eps: Fraction
    k: int
    base: ExtractorInstance
    split: SplitParams
    graph: LeftRegularGraph
    degree_bound: int
    share_uncapped: int
    d_out: int
    m_out: int

    @property
    def t(self) -> int:
        return self.split.t

    @property
    def right_size(self) -> int:
        return self.graph.right_size

    def base_neighbors(self, x: int) -> list[int]:
        base = x << self.base.d
        return [self.base.table[base + y] for y in range(1 << self.base.d)]


def neighbor_at(gro: RichOwnerGraph, x: int, j: int) -> int:
    """The j-th edge of x, j = base slot * t + prime index."""
    if not 0 <= j < gro.graph.degree:
        raise InputError(f"edge slot {j} out of range [0, {gro.graph.degree})")
    return gro.graph.neighbor(x, j)


ExtractorSource = Callable[[int, int, Fraction], ExtractorInstance]


def build_rich_owner(
    n: int,
    level: int,
    slack: int,
    delta: Fraction,
    extractor_source: ExtractorSource,
    degree_constant: int = DEFAULT_DEGREE_CONSTANT,
    right_constant: int = DEFAULT_RIGHT_CONSTANT,
) -> RichOwnerGraph:
    """Compose a verified extractor with the splitting transform.

    Recipe: eps = delta/4 and k = level - slack (k saturates at n, where the
    only flat source is the full uniform one). The average right degree of
    any admissible subset is bounded by a = ceil(min(2^level, 2^n) * D / M)
    exactly, the share threshold is ceil(a/eps) capped at min(2^level, 2^n)
    (no right node can have more distinct subset neighbors than that, so the
    cap loses nothing), and the split uses delta_split = eps.
    """
    delta = Fraction(delta)
    if not 0 < delta <= 1:
        raise ParameterError(f"delta must lie in (0, 1], got {delta}")
    if slack < 0 or level <= slack:
        raise ParameterError("need level > slack >= 0")
    eps = delta / 4
    k = min(level - slack, n)
    inst = extractor_source(n, k, eps)
    if inst.n != n or inst.k != k or inst.epsilon != eps:
        raise InputError("extractor source returned mismatched parameters")
    if not inst.is_verified():
        raise UnverifiedExtractorError(
            "rich-owner build needs a verified extractor instance"
        )
    subset_cap = 1 << min(level, n)
    degree_bound = ceil_fraction(
        Fraction(subset_cap * (1 << inst.d), 1 << inst.m)
    )
    share_uncapped = ceil_fraction(Fraction(degree_bound) / eps)
    share = min(share_uncapped, subset_cap)
    graph, params = split_graph(inst.graph(), share, eps)
    d_out = graph.d
    m_out = ceil_log2(graph.right_size) if graph.right_size > 1 else 0
    _check_size_bounds(
        n, level, slack, delta, d_out, m_out, degree_constant, right_constant
    )
    return RichOwnerGraph(
        n=n,
        level=level,
        slack=slack,
        delta=delta,
        eps=eps,
        k=k,
        base=inst,
        split=params,
        graph=graph,
        degree_bound=degree_bound,
        share_uncapped=share_uncapped,
        d_out=d_out,
        m_out=m_out,
    )


def _check_size_bounds(
    n: int,
    level: int,
    slack: int,
    delta: Fraction,
    d_out: int,
    m_out: int,
    degree_constant: int,
    right_constant: int,
) -> None:
    # d_out <= K_d*(slack + log2(n/delta)) checked as 2^d_out <= (2^slack*n/delta)^K_d
    scale = Fraction((1 << slack) * n, 1) / delta
    if Fraction(1 << d_out) > scale**degree_constant:
        raise ParameterError(
            f"left degree 2^{d_out} exceeds the calibrated bound "
            f"({degree_constant} * (slack + log2(n/delta)))"
        )
    if Fraction(1 << m_out) > Fraction(1 << level) * scale**right_constant:
        raise ParameterError(
            f"right size 2^{m_out} exceeds the calibrated bound "
            f"(level + {right_constant} * (slack + log2(n/delta)))"
        )


@dataclass(frozen=True)
class SplitLevelIndex:
    """Adjacency of an ordered member list inside a rich-owner graph.

    members are listed in their canonical enumeration order; everything the
    owner audits and the first-match semantics need is precomputed here:
    which members touch each base right node (in order) and which prime
    indices divide each pairwise difference.
    """

    gro: RichOwnerGraph
    members: tuple[int, ...]
    rank: dict[int, int]
    base_adjacency: dict[int, frozenset[int]]
    by_right: dict[int, tuple[int, ...]]
    diff_primes: dict[int, tuple[int, ...]]

    @property
    def z_width(self) -> int:
        return self.gro.m_out

    @property
    def right_size(self) -> int:
        return self.gro.right_size

    def members_in_order(self) -> tuple[int, ...]:
        return self.members

    def is_edge(self, x: int, z: int) -> bool:
        # Tolerates unreachable ids inside the dense block (residue >= prime).
        p_last = self.gro.split.largest_prime
        base, rem = divmod(z, p_last * p_last)
        prime_index, residue = divmod(rem, p_last)
        if prime_index >= self.gro.split.t:
            return False
        p = self.gro.split.primes[prime_index]
        if residue >= p:
            return False
        adjacency = self.base_adjacency.get(x)
        if adjacency is None or base not in adjacency:
            return False
        return canonical_int(x, self.gro.n) % p == residue

    def colliding_prime_indices(self, a: int, b: int) -> tuple[int, ...]:
        return self.diff_primes.get(abs(a - b), ())

    def shared_slot_count(self, x: int) -> int:
        """Edge slots of x landing on split nodes another member also touches."""
        if x not in self.rank:
            raise InputError(f"{x} is not a member of this level")
        total = 0
        for z0 in self.gro.base_neighbors(x):
            bad: set[int] = set()
            for other in self.by_right.get(z0, ()):
                if other != x:
                    bad.update(self.colliding_prime_indices(x, other))
            total += len(bad)
        return total

    def owner_fraction(self, x: int) -> Fraction:
        return 1 - Fraction(self.shared_slot_count(x), self.gro.graph.degree)


def _smallest_prime_factors(limit: int) -> list[int]:
    spf = list(range(limit + 1))
    for p in range(2, int(limit**0.5) + 1):
        if spf[p] == p:
            for multiple in range(p * p, limit + 1, p):
                if spf[multiple] == multiple:
                    spf[multiple] = p
    return spf


def build_level_index(
    gro: RichOwnerGraph, members: tuple[int, ...]
) -> SplitLevelIndex:
    rank = {x: i for i, x in enumerate(members)}
    if len(rank) != len(members):
        raise InputError("members must be distinct")
    base_adjacency: dict[int, frozenset[int]] = {}
    by_right: dict[int, list[int]] = {}
    for x in members:
        row = gro.base_neighbors(x)
        base_adjacency[x] = frozenset(row)
        for z0 in set(row):
            by_right.setdefault(z0, []).append(x)

    prime_index = {p: i for i, p in enumerate(gro.split.primes)}
    diff_primes: dict[int, tuple[int, ...]] = {}
    if members:
        spf = _smallest_prime_factors(max(1 << gro.n, 2))
        for diff in range(1, 1 << gro.n):
            value = diff
            hits = []
            while value > 1:
                p = spf[value]
                idx = prime_index.get(p)
                if idx is not None:
                    hits.append(idx)
                while value % p == 0:
                    value //= p
            if hits:
                diff_primes[diff] = tuple(sorted(hits))
    return SplitLevelIndex(
        gro=gro,
        members=members,
        rank=rank,
        base_adjacency=base_adjacency,
        by_right={z0: tuple(xs) for z0, xs in by_right.items()},
        diff_primes=diff_primes,
    )


def owner_audit(
    index: SplitLevelIndex, delta: Fraction
) -> tuple[int, tuple[int, ...]]:
    """Count members whose shared-slot fraction exceeds delta.

    Mathematically identical to the generic richness report at threshold 2,
    but runs on pairwise collisions instead of materializing the split
    adjacency, so it scales to the built graphs.
    """
    delta = Fraction(delta)
    offenders = []
    degree = index.gro.graph.degree
    for x in index.members:
        if Fraction(index.shared_slot_count(x), degree) > delta:
            offenders.append(x)
    return len(offenders), tuple(offenders)


def write_manifest(gro: RichOwnerGraph, path, preamble: str = "") -> None:
    with open(path, "w", encoding="ascii") as fh:
        if preamble:
            fh.write(f"# {preamble}\n")
        fh.write(
            "RICHOWNER "
            f"n={gro.n} ell={gro.level} c={gro.slack} "
            f"delta={gro.delta.numerator}/{gro.delta.denominator} "
            f"eps={gro.eps.numerator}/{gro.eps.denominator} "
            f"k={gro.k} s={gro.split.share} t={gro.t} "
            f"d_out={gro.d_out} m_out={gro.m_out} "
            f"extractor_seed={gro.base.seed}\n"
        )


def read_manifest(path) -> dict[str, str]:
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] != "RICHOWNER":
                raise InputError(f"bad manifest line {line!r}")
            return dict(p.split("=", 1) for p in parts[1:])
    raise InputError(f"no manifest record in {path}")
