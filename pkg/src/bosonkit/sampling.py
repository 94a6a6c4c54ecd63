"""Sampling from exact outcome distributions and goodness-of-fit checks."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .errors import DomainError
from .ideal import NORMALIZATION_TOL, OutcomeDistribution, Pattern
from .montecarlo import RNG_NAME, shard_generators

POOL_THRESHOLD = 5.0


def distribution_id(dist: OutcomeDistribution) -> str:
    """Short content hash identifying a distribution."""
    payload = json.dumps(dist.to_json(digits=15), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


class AliasTable:
    """Walker/Vose alias table for O(1) categorical draws."""

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float)
        n = len(p)
        scaled = p * n / p.sum()
        self.prob = np.ones(n)
        self.alias = np.arange(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s, l = small.pop(), large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = l
            scaled[l] -= 1.0 - scaled[s]
            (small if scaled[l] < 1.0 else large).append(l)
        # leftovers are 1 up to rounding
        for i in small + large:
            self.prob[i] = 1.0
            self.alias[i] = i

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        col = rng.integers(0, len(self.prob), size=size)
        keep = rng.random(size) < self.prob[col]
        return np.where(keep, col, self.alias[col])


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    pooled_bins: int = 0
    note: str = ""


@dataclass
class SampleReport:
    distribution_id: str
    trials: int
    seed: int
    counts: dict[Pattern, int]
    expected: dict[Pattern, float]
    tv_distance: float
    chi_square: ChiSquareResult | None = None
    shards: int = 1
    rng: str = RNG_NAME
    postselected_total: int | None = None
    accepted: int | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def acceptance(self) -> float | None:
        if self.accepted is None:
            return None
        return self.accepted / self.trials if self.trials else 0.0

    @property
    def acceptance_stderr(self) -> float | None:
        a = self.acceptance
        if a is None or not self.trials:
            return None
        return math.sqrt(a * (1.0 - a) / self.trials)

    @property
    def sampled(self) -> int:
        return sum(self.counts.values())

    def frequencies(self) -> dict[Pattern, float]:
        total = self.sampled
        return {k: c / total for k, c in self.counts.items()} if total else {}

    def to_json(self, digits: int = 12) -> dict:
        def fmt(x):
            return None if x is None else float(f"{x:.{digits}g}")

        out = {
            "distribution_id": self.distribution_id,
            "rng": self.rng,
            "seed": self.seed,
            "shards": self.shards,
            "trials": self.trials,
            "tv_distance": fmt(self.tv_distance),
            "empirical": [
                {"pattern": list(k), "count": c, "expected": fmt(self.expected.get(k, 0.0))}
                for k, c in self.counts.items()
            ],
        }
        if self.chi_square is not None:
            cs = self.chi_square
            out["chi_square"] = {
                "statistic": fmt(cs.statistic),
                "dof": cs.dof,
                "p_value": fmt(cs.p_value),
                "pooled_bins": cs.pooled_bins,
                "note": cs.note,
            }
        if self.postselected_total is not None:
            out["postselect"] = {
                "total": self.postselected_total,
                "accepted": self.accepted,
                "acceptance": fmt(self.acceptance),
                "acceptance_stderr": fmt(self.acceptance_stderr),
            }
        if self.flags:
            out["flags"] = list(self.flags)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pattern", "count", "expected"])
        expected_total = self.sampled
        for k, c in self.counts.items():
            w.writerow(
                [" ".join(map(str, k)), c, f"{self.expected.get(k, 0.0) * expected_total:.{digits}g}"]
            )
        return buf.getvalue()


def tv_distance(counts: dict[Pattern, int], expected: dict[Pattern, float]) -> float:
    total = sum(counts.values())
    if total == 0:
        return 0.0
    keys = set(counts) | set(expected)
    return 0.5 * math.fsum(abs(counts.get(k, 0) / total - expected.get(k, 0.0)) for k in keys)


def _normalized(dist: OutcomeDistribution) -> tuple[list[Pattern], np.ndarray]:
    if not dist.entries:
        raise DomainError("cannot sample from an empty distribution")
    keys = list(dist.entries)
    p = np.array([dist.entries[k] for k in keys], dtype=float)
    if (p < 0).any():
        raise DomainError("distribution has negative probabilities")
    residual = 1.0 - math.fsum(p)
    if abs(residual) > NORMALIZATION_TOL:
        raise DomainError(f"distribution sums to 1{-residual:+.3e}; renormalize before sampling")
    p[int(np.argmax(p))] += residual
    return keys, p


def sample(
    dist: OutcomeDistribution, trials: int, seed: int, shards: int = 1, chi_square: bool = True
) -> SampleReport:
    """Draw ``trials`` i.i.d. outcomes with the alias method.

    Trials are split over ``shards`` Philox streams spawned from ``seed``;
    the report is a deterministic function of (dist, trials, seed, shards).
    """
    if trials < 0:
        raise DomainError(f"trials must be nonnegative, got {trials}")
    keys, p = _normalized(dist)
    table = AliasTable(p)
    tally = np.zeros(len(keys), dtype=np.int64)
    per_shard = [trials // shards + (i < trials % shards) for i in range(shards)]
    for rng, n in zip(shard_generators(seed, shards), per_shard):
        tally += np.bincount(table.draw(rng, n), minlength=len(keys))
    counts = {k: int(c) for k, c in zip(keys, tally)}
    expected = {k: float(x) for k, x in zip(keys, p)}
    report = SampleReport(
        distribution_id=distribution_id(dist),
        trials=trials,
        seed=seed,
        counts=counts,
        expected=expected,
        tv_distance=tv_distance(counts, expected),
        shards=shards,
    )
    if chi_square:
        report.chi_square = chi_square_test(report)
    return report


def postselect(report: SampleReport, n: int) -> SampleReport:
    """Keep only samples whose total count is ``n``.

    Expected probabilities are renormalized over the accepted outcomes, so
    ``tv_distance`` compares with the conditional distribution; the
    acceptance fraction estimates the postselection efficiency.
    """
    counts = {k: c for k, c in report.counts.items() if sum(k) == n}
    accepted = sum(counts.values())
    mass = math.fsum(p for k, p in report.expected.items() if sum(k) == n)
    expected = (
        {k: p / mass for k, p in report.expected.items() if sum(k) == n} if mass > 0 else {}
    )
    flags = list(report.flags)
    if accepted == 0:
        flags.append("no samples accepted by postselection")
    out = replace(
        report,
        counts=counts,
        expected=expected,
        tv_distance=tv_distance(counts, expected),
        chi_square=None,
        postselected_total=n,
        accepted=accepted,
        flags=flags,
    )
    if accepted and expected:
        out.chi_square = chi_square_test(out)
    return out


def chi_square_test(report: SampleReport, dist: OutcomeDistribution | None = None) -> ChiSquareResult:
    """Pearson chi-square of the sampled counts against exact probabilities.

    Outcomes with expected count below 5 are pooled (smallest first) into a
    single tail bin.  Outcomes of zero probability are excluded unless they
    were observed, in which case the fit is rejected outright.
    """
    expected_p = report.expected if dist is None else dict(dist.entries)
    total = report.sampled
    if total == 0:
        return ChiSquareResult(0.0, 0, 1.0, note="no samples")
    impossible = [k for k, c in report.counts.items() if c and expected_p.get(k, 0.0) <= 0.0]
    if impossible:
        return ChiSquareResult(math.inf, 0, 0.0, note=f"{len(impossible)} zero-probability outcomes observed")

    keys = sorted((k for k, p in expected_p.items() if p > 0), key=lambda k: expected_p[k])
    obs = np.array([report.counts.get(k, 0) for k in keys], dtype=float)
    exp = np.array([expected_p[k] for k in keys]) * total
    split = 0
    pooled = 0.0
    while split < len(keys) and exp[split] < POOL_THRESHOLD:
        pooled += exp[split]
        split += 1
    bins_obs, bins_exp = list(obs[split:]), list(exp[split:])
    note = ""
    if split:
        pooled_obs = obs[:split].sum()
        if pooled >= POOL_THRESHOLD or not bins_exp:
            bins_obs.append(pooled_obs)
            bins_exp.append(pooled)
        else:
            # pooled tail still short: merge into the smallest regular bin
            bins_obs[0] += pooled_obs
            bins_exp[0] += pooled
        note = f"pooled {split} outcomes with expected count < {POOL_THRESHOLD:g}"
        if bins_exp and min(bins_exp) < POOL_THRESHOLD:
            note += "; insufficient trials for all bins to reach the threshold"
    dof = len(bins_exp) - 1
    if dof <= 0:
        return ChiSquareResult(0.0, 0, 1.0, pooled_bins=split, note=note or "single bin")
    bo, be = np.array(bins_obs), np.array(bins_exp)
    stat = float(((bo - be) ** 2 / be).sum())
    return ChiSquareResult(stat, dof, float(stats.chi2.sf(stat, dof)), pooled_bins=split, note=note)
