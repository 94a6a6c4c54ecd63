"""Photocounting statistics with realistic detectors.

Two independent routes to the same numbers:

* :func:`realistic_distribution` convolves the ideal distribution with the
  per-mode P(k|m) tables (sum over every ideal outcome m).
* :func:`postselected_probability` multiplies the ideal probability of k by
  the correction coefficient prod_i P(k_i|k_i); valid only when the total
  count equals the photon number.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .detectors import (
    DeadTimeExp,
    DeadTimeMono,
    DetectorModel,
    OnOffArray,
    cond_prob_table,
    describe,
    diagonal_factor,
    diagonal_prob,
    max_counts,
)
from .errors import DomainError
from .ideal import (
    OutcomeDistribution,
    Pattern,
    as_pattern,
    enumerate_outcomes,
    enumerate_patterns_up_to,
    ideal_distribution,
    ideal_probability,
)
from .interferometer import UnitaryMatrix

Identifier = tuple[int, ...]


def reduced_identifier(p: Sequence[int]) -> Identifier:
    """Counts >= 2 of a pattern, sorted descending.  () marks collision-free."""
    return tuple(sorted((int(c) for c in p if c >= 2), reverse=True))


def format_identifier(ident: Identifier) -> str:
    return "{" + ",".join(str(c) for c in ident) + "}"


def parse_identifier(text: str) -> Identifier:
    body = text.strip().strip("{}").strip()
    return reduced_identifier(int(c) for c in body.split(",")) if body else ()


def correction_coefficient(model: DetectorModel, p: Sequence[int]) -> float:
    """C = prod_i P(k_i|k_i).

    Raises:
        DomainError: if some count exceeds what the detector can report.
    """
    k = as_pattern(p)
    for c in k:
        if c > max_counts(model, c):
            raise DomainError(f"count {c} exceeds the range of detector {describe(model)}")
    return math.prod(diagonal_prob(model, c) for c in k)


def identifier_coefficient(model: DetectorModel, ident: Iterable[int], n: int) -> float:
    """eta^n prod_q P(k_q|k_q)/eta^{k_q} for a reduced identifier.

    Counts outside the detector range give 0, the value the closed forms
    take there (such events are never registered).
    """
    return model.eta**n * math.prod(diagonal_factor(model, c) for c in ident)


def _partitions(total: int, largest: int) -> Iterable[Identifier]:
    """Partitions of ``total`` into parts in [2, largest], descending."""
    if total == 0:
        yield ()
        return
    for part in range(min(total, largest), 1, -1):
        for rest in _partitions(total - part, part):
            yield (part,) + rest


def identifiers_up_to(n: int) -> list[Identifier]:
    """All multisets of parts >= 2 with sum <= n: (), (2,), (3,), (2,2), (4,), ..."""
    out: list[Identifier] = []
    for j in range(n + 1):
        out.extend(sorted(_partitions(j, j), key=lambda t: (len(t), [-x for x in t])))
    return out


@dataclass
class CorrectionTable:
    model: DetectorModel
    n: int
    entries: dict[Identifier, float] = field(default_factory=dict)

    def __getitem__(self, ident) -> float:
        return self.entries[reduced_identifier(ident)]

    def to_json(self, digits: int = 12) -> dict:
        return {
            "model": describe(self.model),
            "n": self.n,
            "coefficients": [
                {"identifier": list(i), "C": float(f"{c:.{digits}g}")}
                for i, c in self.entries.items()
            ],
        }


def correction_table(model: DetectorModel, n: int) -> CorrectionTable:
    """Coefficients for every reduced identifier reachable with n photons."""
    if n < 0:
        raise DomainError(f"photon number must be nonnegative, got {n}")
    return CorrectionTable(
        model, n, {i: identifier_coefficient(model, i, n) for i in identifiers_up_to(n)}
    )


def sweep_parameter(model: DetectorModel) -> float:
    """The swept quantity in a coefficient sweep: K for arrays, r for dead time."""
    if isinstance(model, OnOffArray):
        return model.K
    if isinstance(model, (DeadTimeMono, DeadTimeExp)):
        return model.ratio
    return model.eta


def correction_rows(tables: Sequence[CorrectionTable]) -> list[tuple[str, float, float]]:
    rows = []
    for table in tables:
        x = sweep_parameter(table.model)
        for ident, c in table.entries.items():
            rows.append((format_identifier(ident), x, c))
    return rows


def correction_csv(tables: Sequence[CorrectionTable], digits: int = 12) -> str:
    """CSV with columns identifier,K_or_r,coefficient."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["identifier", "K_or_r", "coefficient"])
    for ident, x, c in correction_rows(tables):
        w.writerow([ident, f"{x:.{digits}g}", f"{c:.{digits}g}"])
    return buf.getvalue()


def correction_json(tables: Sequence[CorrectionTable], digits: int = 12) -> str:
    return json.dumps([t.to_json(digits) for t in tables], indent=1)


def realistic_distribution(
    u: UnitaryMatrix, input, model: DetectorModel, ideal: OutcomeDistribution | None = None
) -> OutcomeDistribution:
    """rho_k = sum_{m : |m| = n} prod_i P(k_i|m_i) P_m.

    The support is every count pattern with total <= n and entries within
    the detector range, zeros included.  Accumulation follows the
    lexicographic order of ideal outcomes, so results are reproducible.
    """
    inp = as_pattern(input)
    if ideal is None:
        ideal = ideal_distribution(u, inp)
    n = sum(inp)
    table = cond_prob_table(model, n)
    cap = min(max_counts(model, n), n)
    entries = {k: 0.0 for k in enumerate_patterns_up_to(n, u.dim, cap)}
    for m, pm in ideal.entries.items():
        if pm == 0.0:
            continue
        per_mode = [
            [(k, table(k, mi)) for k in range(min(mi, cap) + 1) if table(k, mi) != 0.0]
            for mi in m
        ]
        for combo in itertools.product(*per_mode):
            w = pm
            for _, pk in combo:
                w *= pk
            key = tuple(k for k, _ in combo)
            entries[key] += w
    return OutcomeDistribution(inp, entries, label=f"realistic:{model.kind}")


def postselected_probability(u: UnitaryMatrix, input, model: DetectorModel, k) -> float:
    """C_k * P_ideal(k) for a count pattern whose total equals the photon number."""
    inp, kk = as_pattern(input), as_pattern(k)
    if sum(kk) != sum(inp):
        raise DomainError(
            f"postselected form needs total counts {sum(kk)} equal to photon number {sum(inp)}"
        )
    return correction_coefficient(model, kk) * ideal_probability(u, inp, kk)


def postselected_distribution(
    u: UnitaryMatrix, input, model: DetectorModel, ideal: OutcomeDistribution | None = None
) -> OutcomeDistribution:
    """Unnormalized rho_k on patterns with total n, via correction coefficients."""
    inp = as_pattern(input)
    if ideal is None:
        ideal = ideal_distribution(u, inp)
    n = sum(inp)
    cap = min(max_counts(model, n), n)
    entries = {
        k: correction_coefficient(model, k) * ideal[k] for k in enumerate_outcomes(n, u.dim, cap)
    }
    return OutcomeDistribution(inp, entries, label=f"postselected:{model.kind}")


def postselection_efficiency(u: UnitaryMatrix, input, model: DetectorModel) -> float:
    """Probability that the total count equals the number of injected photons."""
    return postselected_distribution(u, input, model).total()
