"""Ideal photon-number statistics at the interferometer output.

Patterns are plain tuples of nonnegative ints, one entry per mode.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError, ShapeError, SizeError
from .interferometer import UnitaryMatrix
from .permanent import expanded_submatrix, permanent, size_cap

Pattern = tuple[int, ...]

FOCK_ORACLE_MAX_PHOTONS = 7
NORMALIZATION_TOL = 1e-9


def as_pattern(counts: Sequence[int]) -> Pattern:
    """Coerce to a tuple of ints, rejecting negatives."""
    p = tuple(int(c) for c in counts)
    if any(c < 0 for c in p):
        raise ShapeError(f"pattern entries must be nonnegative, got {p}")
    return p


def parse_pattern(text: str) -> Pattern:
    """Parse ``"1,1,0"`` (spaces and brackets tolerated)."""
    cleaned = text.strip().strip("()[]")
    if not cleaned:
        raise ShapeError("empty pattern")
    try:
        return as_pattern(int(tok) for tok in cleaned.split(","))
    except ValueError as exc:
        raise ShapeError(f"cannot parse pattern {text!r}") from exc


def _factorial_table(cap: int) -> list[float]:
    return [float(math.factorial(i)) for i in range(cap + 1)]


def _bounded_compositions(n: int, modes: int, cap: int) -> Iterator[Pattern]:
    if modes == 1:
        if n <= cap:
            yield (n,)
        return
    lo = max(0, n - cap * (modes - 1))
    for first in range(lo, min(n, cap) + 1):
        for rest in _bounded_compositions(n - first, modes - 1, cap):
            yield (first,) + rest


def enumerate_outcomes(n: int, modes: int, per_mode_cap: int | None = None) -> list[Pattern]:
    """All length-``modes`` patterns with total ``n`` and entries <= cap.

    Returned in lexicographic order, e.g. ``(0, 2), (1, 1), (2, 0)``.
    """
    if n < 0:
        raise ShapeError(f"photon number must be nonnegative, got {n}")
    if modes < 1:
        raise ShapeError(f"need at least one mode, got {modes}")
    cap = n if per_mode_cap is None else per_mode_cap
    return list(_bounded_compositions(n, modes, cap))


def enumerate_patterns_up_to(n: int, modes: int, per_mode_cap: int) -> list[Pattern]:
    """Patterns with total 0..n and entries <= cap, ordered by total then lexicographically."""
    out: list[Pattern] = []
    for total in range(n + 1):
        out.extend(enumerate_outcomes(total, modes, per_mode_cap))
    return out


@dataclass
class OutcomeDistribution:
    """Finite map from output pattern to probability.

    ``entries`` keeps insertion order; zero-probability outcomes are kept so
    normalization checks are exact sums over the support.
    """

    input: Pattern
    entries: dict[Pattern, float] = field(default_factory=dict)
    label: str = "ideal"

    @property
    def n(self) -> int:
        return sum(self.input)

    def __getitem__(self, pattern) -> float:
        return self.entries.get(tuple(pattern), 0.0)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.items())

    def total(self) -> float:
        return math.fsum(self.entries.values())

    def normalization_residual(self) -> float:
        return self.total() - 1.0

    def restricted_to_total(self, n: int) -> "OutcomeDistribution":
        return OutcomeDistribution(
            self.input,
            {k: p for k, p in self.entries.items() if sum(k) == n},
            label=f"{self.label}|total={n}",
        )

    def to_json(self, digits: int | None = None) -> dict:
        def fmt(x):
            return float(f"{x:.{digits}g}") if digits else float(x)

        return {
            "input": list(self.input),
            "label": self.label,
            "outcomes": [{"pattern": list(k), "p": fmt(p)} for k, p in self.entries.items()],
        }

    def dumps(self, digits: int | None = 12) -> str:
        return json.dumps(self.to_json(digits), indent=1)

    @classmethod
    def from_json(cls, obj) -> "OutcomeDistribution":
        try:
            entries = {as_pattern(o["pattern"]): float(o["p"]) for o in obj["outcomes"]}
            return cls(as_pattern(obj["input"]), entries, label=obj.get("label", "ideal"))
        except (KeyError, TypeError) as exc:
            raise ShapeError(f"malformed distribution object: {exc}") from exc


def _check_lengths(u: UnitaryMatrix, *patterns: Pattern) -> None:
    for p in patterns:
        if len(p) != u.dim:
            raise ShapeError(f"pattern {p} has length {len(p)}, interferometer has {u.dim} modes")


def _check_photons(n: int) -> None:
    cap = size_cap()
    if n > cap:
        raise SizeError(f"total photon number {n} exceeds size cap {cap}")


def ideal_probability(u: UnitaryMatrix, input, output) -> float:
    """|Perm U[out|in]|^2 / (prod m_i! prod n_j!), or exactly 0 if totals differ."""
    inp, out = as_pattern(input), as_pattern(output)
    _check_lengths(u, inp, out)
    n = sum(inp)
    if sum(out) != n:
        return 0.0
    _check_photons(n)
    fact = _factorial_table(n)
    norm = math.prod(fact[c] for c in out) * math.prod(fact[c] for c in inp)
    amp = permanent(expanded_submatrix(u.matrix, out, inp))
    return abs(amp) ** 2 / norm


def ideal_distribution(u: UnitaryMatrix, input) -> OutcomeDistribution:
    """Distribution over all outcomes with the input photon total."""
    inp = as_pattern(input)
    _check_lengths(u, inp)
    n = sum(inp)
    _check_photons(n)
    fact = _factorial_table(n)
    in_norm = math.prod(fact[c] for c in inp)
    entries = {}
    for out in enumerate_outcomes(n, u.dim, n):
        amp = permanent(expanded_submatrix(u.matrix, out, inp))
        entries[out] = abs(amp) ** 2 / (in_norm * math.prod(fact[c] for c in out))
    return OutcomeDistribution(inp, entries, label="ideal")


def fock_oracle_distribution(u: UnitaryMatrix, input) -> OutcomeDistribution:
    """Output distribution by expanding prod_i (sum_j U_ji a_j^dag)^{n_i} |0>.

    Never forms a permanent: the state is tracked as a polynomial in the
    output creation operators (monomial exponents -> coefficient) and each
    monomial is normalized with sqrt(prod m_j!) at the end.  Exponential cost,
    so limited to 7 photons.
    """
    inp = as_pattern(input)
    _check_lengths(u, inp)
    n = sum(inp)
    if n > FOCK_ORACLE_MAX_PHOTONS:
        raise SizeError(f"Fock oracle limited to {FOCK_ORACLE_MAX_PHOTONS} photons, got {n}")
    a = u.matrix
    modes = u.dim
    poly: dict[Pattern, complex] = {(0,) * modes: 1.0 + 0.0j}
    for i, ni in enumerate(inp):
        for _ in range(ni):
            nxt: dict[Pattern, complex] = {}
            for mono, coef in poly.items():
                for j in range(modes):
                    amp = a[j, i]
                    if amp == 0:
                        continue
                    key = mono[:j] + (mono[j] + 1,) + mono[j + 1 :]
                    nxt[key] = nxt.get(key, 0.0) + coef * amp
            poly = nxt
    in_norm = math.prod(math.factorial(c) for c in inp)
    entries = {}
    for out in enumerate_outcomes(n, modes, n):
        coef = poly.get(out, 0.0)
        entries[out] = abs(coef) ** 2 * math.prod(math.factorial(c) for c in out) / in_norm
    return OutcomeDistribution(inp, entries, label="fock-oracle")


def check_normalized(dist: OutcomeDistribution, tol: float = NORMALIZATION_TOL) -> None:
    resid = dist.normalization_residual()
    if abs(resid) > tol:
        raise DomainError(f"distribution sums to 1{resid:+.3e}, outside tolerance {tol:.0e}")


def distribution_as_array(dist: OutcomeDistribution) -> tuple[list[Pattern], np.ndarray]:
    keys = list(dist.entries)
    return keys, np.array([dist.entries[k] for k in keys], dtype=float)
