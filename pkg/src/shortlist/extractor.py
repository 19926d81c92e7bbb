"""Generation and verification of small seeded extractors.

An instance is a concrete table E: {0,1}^n x {0,1}^d -> {0,1}^m together with
a claimed (k, eps) certificate. Verification is exact where the flat-source
space is enumerable within budget (all statistical distances are exact
rationals; no floating point touches a verdict) and sampled otherwise. A
sampled audit never upgrades an instance to exact-verified.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bigraph import LeftRegularGraph, LeftSubset, rich_nodes, table_graph
from .encoding import ceil_log2
from .errors import (
    EnumerationBudgetError,
    InputError,
    ParameterError,
    SearchFailedError,
    UnverifiedExtractorError,
)
from .rng import Rng, derive_seed

DEFAULT_ENUM_BUDGET = 10_000_000
DEFAULT_SAMPLED_TRIALS = 512
DEFAULT_SEARCH_RETRIES = 64

STATUS_UNVERIFIED = "unverified"
STATUS_EXACT = "exact-verified"
STATUS_SAMPLED = "sampled-audited"


@dataclass(frozen=True)
class FlatSource:
    """Uniform distribution over a power-of-two-sized support."""

    support: LeftSubset

    def __post_init__(self):
        size = len(self.support)
        if size < 1 or size & (size - 1):
            raise InputError(f"flat support size {size} is not a power of two")

    @property
    def k(self) -> int:
        return len(self.support).bit_length() - 1


@dataclass
class ExtractorInstance:
    n: int
    k: int
    d: int
    m: int
    epsilon: Fraction
    table: tuple[int, ...]
    seed: int
    status: str = STATUS_UNVERIFIED
    audit_trials: int | None = None
    worst_deviation: Fraction | None = None

    def __post_init__(self):
        self.epsilon = Fraction(self.epsilon)
        if not 0 < self.epsilon <= 1:
            raise ParameterError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not 0 <= self.k <= self.n:
            raise ParameterError("need 0 <= k <= n")
        if self.m < 0 or self.m > self.k + self.d:
            raise ParameterError("need 0 <= m <= k + d (nonnegative entropy loss)")
        if len(self.table) != 1 << (self.n + self.d):
            raise InputError("table must have 2^(n+d) entries")
        for z in self.table:
            if z < 0 or z >> self.m:
                raise InputError(f"table entry {z} is not an {self.m}-bit value")

    @property
    def entropy_loss(self) -> int:
        return self.k + self.d - self.m

    def graph(self) -> LeftRegularGraph:
        return table_graph(
            self.n,
            self.d,
            1 << self.m,
            list(self.table),
            label=f"extractor[n={self.n},k={self.k},eps={self.epsilon}]",
        )

    def is_verified(self) -> bool:
        """Exact-verified, or sampled-audited with every observed deviation below eps."""
        if self.status == STATUS_EXACT:
            return True
        if self.status == STATUS_SAMPLED:
            return self.worst_deviation is not None and self.worst_deviation < self.epsilon
        return False


def tv_deviation(inst: ExtractorInstance, source: FlatSource) -> Fraction:
    """Exact statistical distance of E(X, U_d) from uniform on {0,1}^m."""
    if source.support.n != inst.n:
        raise InputError("flat source bit length does not match the extractor")
    big_m = 1 << inst.m
    samples = len(source.support) << inst.d
    counts = [0] * big_m
    for x in source.support.sorted_members():
        base = x << inst.d
        for y in range(1 << inst.d):
            counts[inst.table[base + y]] += 1
    numerator = sum(abs(c * big_m - samples) for c in counts)
    return Fraction(numerator, 2 * samples * big_m)


def _row_histograms(inst: ExtractorInstance) -> np.ndarray:
    outputs = np.asarray(inst.table, dtype=np.int64).reshape(1 << inst.n, 1 << inst.d)
    hists = np.zeros((1 << inst.n, 1 << inst.m), dtype=np.int64)
    for x in range(1 << inst.n):
        hists[x] = np.bincount(outputs[x], minlength=1 << inst.m)
    return hists


@dataclass(frozen=True)
class VerifyResult:
    passed: bool
    max_deviation: Fraction
    worst_support: tuple[int, ...]
    flats_checked: int


def verify_exact(
    inst: ExtractorInstance, budget: int = DEFAULT_ENUM_BUDGET
) -> VerifyResult:
    """Enumerate every flat source of support 2^k and take the exact maximum.

    Refuses when the number of flats exceeds the budget. On a pass the
    instance becomes exact-verified; on a failure the worst flat is the
    witness. With m = 0 the output distribution is the point mass for every
    flat, so the maximum is 0 without enumeration.
    """
    support_size = 1 << inst.k
    total = math.comb(1 << inst.n, support_size)
    if inst.m == 0:
        dev = Fraction(0)
        witness = tuple(range(support_size))
        inst.status = STATUS_EXACT
        inst.worst_deviation = dev
        return VerifyResult(True, dev, witness, total)
    if total > budget:
        raise EnumerationBudgetError(
            f"{total} flat sources exceed the budget of {budget}; use a sampled audit"
        )
    hists = _row_histograms(inst)
    big_m = 1 << inst.m
    samples = support_size << inst.d
    best_num = -1
    worst: tuple[int, ...] = ()
    combos = itertools.combinations(range(1 << inst.n), support_size)
    chunk_rows = max(1, min(65536, (1 << 22) // max(support_size, 1)))
    while True:
        block = list(itertools.islice(combos, chunk_rows))
        if not block:
            break
        idx = np.array(block, dtype=np.int64)
        counts = hists[idx].sum(axis=1)
        nums = np.abs(counts * big_m - samples).sum(axis=1)
        pos = int(nums.argmax())
        if int(nums[pos]) > best_num:
            best_num = int(nums[pos])
            worst = tuple(int(v) for v in idx[pos])
    max_dev = Fraction(best_num, 2 * samples * big_m)
    passed = max_dev < inst.epsilon
    if passed:
        inst.status = STATUS_EXACT
        inst.worst_deviation = max_dev
    return VerifyResult(passed, max_dev, worst, total)


def audit_sampled(
    inst: ExtractorInstance, trials: int, seed: int
) -> Fraction:
    """Worst deviation over `trials` deterministically drawn flat sources."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    support_size = 1 << inst.k
    hists = _row_histograms(inst)
    big_m = 1 << inst.m
    samples = support_size << inst.d
    gen = Rng(derive_seed(seed, inst.n, inst.k, inst.d, inst.m))
    best_num = 0
    for _ in range(trials):
        support = gen.sample_distinct(support_size, 1 << inst.n)
        counts = hists[list(support)].sum(axis=0)
        num = int(np.abs(counts * big_m - samples).sum())
        best_num = max(best_num, num)
    worst = Fraction(best_num, 2 * samples * big_m)
    if inst.status != STATUS_EXACT:
        inst.status = STATUS_SAMPLED
        inst.audit_trials = trials
        inst.worst_deviation = worst
    return worst


def derived_seed_length(n: int, k: int, eps: Fraction, a_d: int) -> int:
    return ceil_log2(max(n - k, 1)) + 2 * ceil_log2(eps.denominator, eps.numerator) + a_d


def derived_output_length(k: int, d: int, eps: Fraction, a_m: int) -> int:
    return k + d - 2 * ceil_log2(eps.denominator, eps.numerator) - a_m


def generate_table(n: int, d: int, m: int, seed: int) -> tuple[int, ...]:
    gen = Rng(seed)
    return tuple(gen.bits(m) for _ in range(1 << (n + d)))


def search_extractor(
    n: int,
    k: int,
    eps: Fraction,
    seed: int,
    a_d: int = 2,
    a_m: int = 2,
    budget: int = DEFAULT_ENUM_BUDGET,
    allow_sampled: bool = False,
    sampled_trials: int = DEFAULT_SAMPLED_TRIALS,
    max_retries: int = DEFAULT_SEARCH_RETRIES,
) -> ExtractorInstance:
    """Draw random tables at the derived (d, m) until one verifies.

    The seed length and output length come from the additive constants a_d
    and a_m; the output length is clamped at zero when the formula goes
    negative (tiny parameter corners). Verification is exact when the flat
    space fits the budget, otherwise a sampled audit is used when permitted.
    """
    eps = Fraction(eps)
    d = derived_seed_length(n, k, eps, a_d)
    if d < 0:
        raise ParameterError(f"derived seed length {d} is negative; raise a_d")
    m = max(derived_output_length(k, d, eps, a_m), 0)
    exact_feasible = m == 0 or math.comb(1 << n, 1 << k) <= budget
    if not exact_feasible and not allow_sampled:
        raise EnumerationBudgetError(
            "exact verification over budget and sampled audits not accepted"
        )
    best: ExtractorInstance | None = None
    best_dev: Fraction | None = None
    for attempt in range(max_retries):
        table_seed = derive_seed(seed, attempt)
        inst = ExtractorInstance(
            n=n, k=k, d=d, m=m, epsilon=eps,
            table=generate_table(n, d, m, table_seed), seed=table_seed,
        )
        if exact_feasible:
            result = verify_exact(inst, budget)
            observed = result.max_deviation
            ok = result.passed
        else:
            observed = audit_sampled(inst, sampled_trials, table_seed)
            ok = observed < eps
        if ok:
            return inst
        if best_dev is None or observed < best_dev:
            best, best_dev = inst, observed
    raise SearchFailedError(
        f"no table verified in {max_retries} attempts; best deviation {best_dev}",
        best=best,
    )


def avg_right_degree(graph: LeftRegularGraph, subset: LeftSubset) -> Fraction:
    """Exact average number of subset edges per right node."""
    if subset.n != graph.n:
        raise InputError("subset bit length does not match the graph")
    members = subset.members
    if graph.left_members is not None:
        members = members & frozenset(graph.left_members)
    return Fraction(len(members) * graph.degree, graph.right_size)


def ceil_fraction(value: Fraction) -> int:
    return -((-value.numerator) // value.denominator)


@dataclass(frozen=True)
class RichLemmaAudit:
    share_threshold: int
    delta: Fraction
    non_rich_count: int
    offenders: tuple[int, ...]
    bound: int


def audit_rich_lemma(
    inst: ExtractorInstance, degree_bound: Fraction, subset: LeftSubset
) -> RichLemmaAudit:
    """Exact count of subset members that are not (a/eps, 2eps)-rich.

    Requires an exact-verified instance (the conclusion is meaningless
    otherwise) and a subset whose average right degree is at most the bound.
    """
    if inst.status != STATUS_EXACT:
        raise UnverifiedExtractorError(
            "rich-node audit needs an exact-verified extractor"
        )
    degree_bound = Fraction(degree_bound)
    graph = inst.graph()
    actual = avg_right_degree(graph, subset)
    if actual > degree_bound:
        raise ParameterError(
            f"average right degree {actual} exceeds the hypothesis bound {degree_bound}"
        )
    share = ceil_fraction(degree_bound / inst.epsilon)
    delta = min(2 * inst.epsilon, Fraction(1))
    if len(subset) == 0:
        return RichLemmaAudit(share, delta, 0, (), 1 << inst.k)
    report = rich_nodes(graph, subset, share, delta)
    return RichLemmaAudit(
        share_threshold=share,
        delta=delta,
        non_rich_count=report.non_rich_count(),
        offenders=tuple(sorted(report.non_rich)),
        bound=1 << inst.k,
    )


def _status_token(inst: ExtractorInstance) -> str:
    if inst.status == STATUS_SAMPLED:
        return (
            f"sampled-audited(trials={inst.audit_trials},"
            f"worst={inst.worst_deviation})"
        )
    return inst.status


def write_extractor(inst: ExtractorInstance, path) -> None:
    digits = max(1, (inst.m + 3) // 4)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            f"EXTRACTOR n={inst.n} k={inst.k} d={inst.d} m={inst.m} "
            f"eps={inst.epsilon.numerator}/{inst.epsilon.denominator} "
            f"status={_status_token(inst)} seed={inst.seed}\n"
        )
        if inst.m == 0:
            return
        blob = "".join(format(z, f"0{digits}x") for z in inst.table)
        for i in range(0, len(blob), 64):
            fh.write(blob[i : i + 64] + "\n")


def _parse_status(token: str) -> tuple[str, int | None, Fraction | None]:
    if token.startswith("sampled-audited("):
        inner = token[len("sampled-audited(") : -1]
        fields = dict(part.split("=", 1) for part in inner.split(","))
        return STATUS_SAMPLED, int(fields["trials"]), Fraction(fields["worst"])
    if token in (STATUS_EXACT, STATUS_UNVERIFIED):
        return token, None, None
    raise InputError(f"unknown extractor status {token!r}")


def read_extractor(path) -> ExtractorInstance:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split()
        if not parts or parts[0] != "EXTRACTOR":
            raise InputError(f"line 1: bad extractor header {header!r}")
        fields = dict(p.split("=", 1) for p in parts[1:])
        n, k, d, m = (int(fields[key]) for key in ("n", "k", "d", "m"))
        eps = Fraction(fields["eps"])
        status, trials, worst = _parse_status(fields["status"])
        seed = int(fields["seed"])
        entries = 1 << (n + d)
        if m == 0:
            table = (0,) * entries
        else:
            digits = max(1, (m + 3) // 4)
            body_lines = []
            arrow_table: dict[int, int] = {}
            uses_arrows = False
            for lineno, raw in enumerate(fh, start=2):
                line = raw.strip()
                if not line:
                    continue
                if "->" in line:
                    uses_arrows = True
                    try:
                        left_part, z_part = line.split("->")
                        x_tok, y_tok = left_part.split()
                        x, y = int(x_tok, 16), int(y_tok, 16)
                        arrow_table[(x << d) | y] = int(z_part.strip(), 16)
                    except ValueError as exc:
                        raise InputError(f"line {lineno}: bad edge line {line!r}") from exc
                else:
                    body_lines.append((lineno, line))
            if uses_arrows:
                if len(arrow_table) != entries:
                    raise InputError(
                        f"edge lines cover {len(arrow_table)} of {entries} entries"
                    )
                table = tuple(arrow_table[i] for i in range(entries))
            else:
                blob = "".join(line for _, line in body_lines)
                if len(blob) != entries * digits:
                    raise InputError(
                        f"dense block has {len(blob)} digits, want {entries * digits}"
                    )
                table = tuple(
                    int(blob[i * digits : (i + 1) * digits], 16) for i in range(entries)
                )
    inst = ExtractorInstance(n=n, k=k, d=d, m=m, epsilon=eps, table=table, seed=seed)
    inst.status = status
    inst.audit_trials = trials
    inst.worst_deviation = worst
    return inst
