"""Experiment matrix runner and nonparametric statistics.

Runs morphology x gait x environment x voltage grids with seeded replicates
and summarises them as per-cell ranges/means plus pairwise Mann-Whitney U
tests with Holm correction.  The U test uses the exact permutation
distribution for small tie-free samples and a tie-corrected normal
approximation otherwise; field-style cells with fewer than four replicates
skip significance testing.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .simulator import (
    Environment,
    EvaluationResult,
    run_field_protocol,
    run_lab_protocol,
)

#: Largest combined sample size for which the exact U distribution is used.
EXACT_LIMIT = 20
#: Smallest per-group size for which pairwise tests are reported.
MIN_TEST_N = 4


class DegenerateSamples(ValueError):
    """Both samples are a single repeated value; ranks carry no information."""


def _midranks(values):
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def _exact_cdf(n: int, m: int, u: int) -> float:
    """P(U_a <= u) under the exact permutation distribution.

    Counts rank arrangements by recursion on the largest observation: if it
    belongs to sample a it beats every b present, adding their count to U_a;
    otherwise it is a b and U_a is unchanged.
    """
    u = int(min(u, n * m))
    # f[i][j][k]: arrangements of i a-values and j b-values with U_a = k
    f = [[[0] * (u + 1) for _ in range(m + 1)] for _ in range(n + 1)]
    for j in range(m + 1):
        f[0][j][0] = 1
    for i in range(1, n + 1):
        f[i][0][0] = 1
        for j in range(1, m + 1):
            row = f[i][j]
            a_largest = f[i - 1][j]
            b_largest = f[i][j - 1]
            for k in range(u + 1):
                v = b_largest[k]
                if k >= j:
                    v += a_largest[k - j]
                row[k] = v
    total = math.comb(n + m, n)
    return sum(f[n][m]) / total


def mann_whitney_u(a, b) -> tuple[float, float]:
    """Two-sided Mann-Whitney U test.

    Returns ``(U, p)`` with ``U = min(U_a, U_b)`` under midrank tie
    handling.  For tie-free samples with at most ``EXACT_LIMIT`` combined
    observations the p-value comes from the exact permutation distribution;
    otherwise from the normal approximation with tie correction and
    continuity correction.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    n, m = len(a), len(b)
    if n < 1 or m < 1:
        raise ValueError("both samples must be non-empty")
    combined = a + b
    if max(combined) == min(combined):
        raise DegenerateSamples("all values identical across both samples")
    ranks = _midranks(combined)
    r_a = sum(ranks[:n])
    u_a = n * m + n * (n + 1) / 2.0 - r_a
    u_b = n * m - u_a
    u = min(u_a, u_b)
    has_ties = len(set(combined)) != len(combined)
    if not has_ties and n + m <= EXACT_LIMIT:
        p = 2.0 * _exact_cdf(n, m, int(round(u)))
        return u, min(1.0, p)
    # Normal approximation with tie correction, continuity correction and an
    # Edgeworth kurtosis term (the U distribution is symmetric, so the first
    # correction beyond the normal is the fourth moment).
    big_n = n + m
    tie_term = 0.0
    seen = {}
    for v in combined:
        seen[v] = seen.get(v, 0) + 1
    for count in seen.values():
        tie_term += count ** 3 - count
    sigma2 = n * m / 12.0 * ((big_n + 1) - tie_term / (big_n * (big_n - 1)))
    if sigma2 <= 0:
        raise DegenerateSamples("tie structure leaves zero rank variance")
    z = (u - n * m / 2.0 + 0.5) / math.sqrt(sigma2)
    cdf = 0.5 * math.erfc(-z / math.sqrt(2.0))
    if not has_ties:
        excess = -1.2 * (n * n + m * m + n * m + n + m) / (n * m * (big_n + 1))
        phi = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        cdf -= phi * (excess / 24.0) * (z ** 3 - 3.0 * z)
    p = 2.0 * max(0.0, cdf)
    return u, min(1.0, p)


def holm_correction(p_values) -> list[float]:
    """Holm step-down adjustment, returned in the input order."""
    p = [float(v) for v in p_values]
    if any(not 0.0 <= v <= 1.0 for v in p):
        raise ValueError("p-values must lie in [0, 1]")
    m = len(p)
    order = sorted(range(m), key=p.__getitem__)
    adjusted = [0.0] * m
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, (m - rank) * p[idx])
        adjusted[idx] = min(1.0, running)
    return adjusted


@dataclass(frozen=True)
class Cell:
    """One experiment cell: a morphology/gait pairing in a setting."""

    morphology: str
    gait: str
    environment: str
    voltage: float

    @property
    def name(self) -> str:
        return f"{self.morphology}+{self.gait}"


@dataclass(frozen=True)
class ExperimentSpec:
    """A block of cells evaluated with shared protocol and replicate count."""

    name: str
    protocol: str  # "lab" | "field"
    cells: tuple[Cell, ...]
    replicates: int
    base_seed: int = 42

    def __post_init__(self):
        if self.protocol not in ("lab", "field"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")


@dataclass
class CellResult:
    """All replicate evaluations of one cell (or the failure that stopped it)."""

    cell: Cell
    evaluations: list[EvaluationResult] = field(default_factory=list)
    error: str | None = None

    @property
    def speeds(self) -> list[float]:
        return [e.achieved_speed for e in self.evaluations]


def _run_one(args):
    protocol, gait, morph, env, voltage, seed, noise, trace = args
    runner = run_lab_protocol if protocol == "lab" else run_field_protocol
    return runner(gait, morph, env, voltage, seed=seed, noise=noise, trace=trace)


def run_matrix(
    spec: ExperimentSpec,
    resolve,
    *,
    jobs: int = 1,
    noise: bool = True,
    trace: bool = False,
) -> list[CellResult]:
    """Evaluate every (cell, replicate) of a spec.

    ``resolve`` maps preset names to objects via ``resolve.morphologies``,
    ``resolve.gaits`` and ``resolve.environments`` (a ``Config`` works).
    Replicate ``i`` runs with seed ``base_seed + i`` so a rerun with the
    same base seed reproduces the result set exactly.  A cell whose
    evaluation fails is recorded with its error and the matrix continues.
    """
    tasks = []
    for cell in spec.cells:
        gait = resolve.gaits[cell.gait]
        morph = resolve.morphologies[cell.morphology]
        env = resolve.environments[cell.environment]
        for rep in range(spec.replicates):
            tasks.append(
                (spec.protocol, gait, morph, env, cell.voltage,
                 spec.base_seed + rep, noise, trace)
            )

    outcomes: list = [None] * len(tasks)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, result in enumerate(pool.map(_run_one, tasks)):
                outcomes[i] = result
    else:
        for i, task in enumerate(tasks):
            try:
                outcomes[i] = _run_one(task)
            except Exception as exc:  # noqa: BLE001 - recorded per cell
                outcomes[i] = exc

    results = []
    idx = 0
    for cell in spec.cells:
        cr = CellResult(cell=cell)
        for _ in range(spec.replicates):
            out = outcomes[idx]
            idx += 1
            if isinstance(out, Exception):
                if cr.error is None:
                    cr.error = f"{type(out).__name__}: {out}"
            else:
                cr.evaluations.append(out)
        results.append(cr)
    return results


@dataclass
class CellSummary:
    cell: Cell
    n: int
    minimum: float
    maximum: float
    mean: float


@dataclass
class PairTest:
    cell_a: str
    cell_b: str
    u: float
    p_raw: float
    p_holm: float


@dataclass
class StatsReport:
    """Per-cell summaries plus pairwise tests within comparable blocks."""

    cells: list[CellSummary]
    comparisons: list[PairTest]
    notes: list[str]


def summarize(results: list[CellResult]) -> StatsReport:
    """Aggregate cell results and test pairwise differences.

    Pairwise U tests run only between cells sharing environment and
    voltage, and only when every group has at least ``MIN_TEST_N``
    replicates; Holm correction is applied within each such block.
    """
    if not results:
        raise ValueError("no results to summarize")
    cells = []
    for cr in results:
        speeds = cr.speeds
        if not speeds:
            continue
        cells.append(CellSummary(
            cell=cr.cell,
            n=len(speeds),
            minimum=min(speeds),
            maximum=max(speeds),
            mean=sum(speeds) / len(speeds),
        ))
    comparisons: list[PairTest] = []
    notes: list[str] = []
    blocks: dict[tuple[str, float], list[CellResult]] = {}
    for cr in results:
        if cr.speeds:
            key = (cr.cell.environment, cr.cell.voltage)
            blocks.setdefault(key, []).append(cr)
    for (env_name, voltage), members in blocks.items():
        if len(members) < 2:
            continue
        if min(len(cr.speeds) for cr in members) < MIN_TEST_N:
            notes.append(
                f"{env_name} @ {voltage:g} V: fewer than {MIN_TEST_N} "
                "replicates per cell, significance tests suppressed"
            )
            continue
        pairs = []
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                pairs.append((members[i], members[j]))
        raw = []
        stats = []
        for a, b in pairs:
            try:
                u, p = mann_whitney_u(a.speeds, b.speeds)
            except DegenerateSamples:
                notes.append(
                    f"{a.cell.name} vs {b.cell.name}: identical samples, "
                    "test skipped"
                )
                continue
            raw.append(p)
            stats.append((a.cell.name, b.cell.name, u))
        adjusted = holm_correction(raw) if raw else []
        for (name_a, name_b, u), p, ph in zip(stats, raw, adjusted):
            comparisons.append(PairTest(name_a, name_b, u, p, ph))
    return StatsReport(cells=cells, comparisons=comparisons, notes=notes)


def table_rows(spec_name: str, report: StatsReport) -> list[str]:
    """Fixed-width result rows in the style of a lab notebook table."""
    rows = []
    for cs in report.cells:
        rows.append(
            f"{spec_name:<10} {cs.n:>5} {cs.cell.morphology:>10} "
            f"{cs.cell.gait:>9} [{cs.minimum:6.3f}, {cs.maximum:6.3f}] "
            f"{cs.mean:6.3f}"
        )
    return rows


TABLE_HEADER = (
    f"{'Experiment':<10} {'Evals':>5} {'Morphology':>10} {'Gait':>9} "
    f"{'Range':>16} {'Mean':>6}"
)
