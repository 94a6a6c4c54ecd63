"""Detector models and their conditional count probabilities P(k|m).

P(k|m) is the Fock diagonal <m|Pi_k|m> of the detector POVM: the
probability of k counts when m photons reach the detector.  Every model
here has no dark counts, so P(k|m) = 0 for k > m.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import AccuracyError, DomainError, ParameterError
from .quadrature import QuadratureSpec, deadtime_column, window_count

PASCAL_ROWS = 64
POSITIVITY_TOL = 1e-12


def _pascal(rows: int) -> np.ndarray:
    table = np.zeros((rows, rows))
    for n in range(rows):
        table[n, 0] = 1.0
        for k in range(1, n + 1):
            table[n, k] = table[n - 1, k - 1] + table[n - 1, k]
    return table


_BINOM = _pascal(PASCAL_ROWS)


def binom(n: int, k: int) -> float:
    if k < 0 or k > n:
        return 0.0
    if n < PASCAL_ROWS:
        return float(_BINOM[n, k])
    return float(math.comb(n, k))


def _check_eta(eta):
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"efficiency must lie in [0, 1], got {eta}")


def _check_ratio(r):
    if not 0.0 <= r <= 1.0:
        raise ParameterError(f"dead-time ratio must lie in [0, 1], got {r}")


# --- models -----------------------------------------------------------------


@dataclass(frozen=True)
class IdealPNR:
    kind = "ideal"

    @property
    def eta(self) -> float:
        return 1.0


@dataclass(frozen=True)
class LossyPNR:
    eta: float
    kind = "lossy"

    def __post_init__(self):
        _check_eta(self.eta)


@dataclass(frozen=True)
class OnOffArray:
    """K on/off detectors fed by an equal split of one mode."""

    K: int
    eta: float = 1.0
    kind = "array"

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ParameterError(f"array size K must be a positive integer, got {self.K}")
        _check_eta(self.eta)


@dataclass(frozen=True)
class DeadTimeMono:
    """Pulse counting with dead time, flat (monochromatic) intensity.

    ``ratio`` is dead time over measurement window.
    """

    ratio: float
    eta: float = 1.0
    kind = "deadtime-mono"

    def __post_init__(self):
        _check_ratio(self.ratio)
        _check_eta(self.eta)


@dataclass(frozen=True)
class DeadTimeExp:
    """Pulse counting with dead time, exponentially decaying intensity."""

    ratio: float
    gamma: float
    eta: float = 1.0
    quad: QuadratureSpec = field(default_factory=QuadratureSpec, compare=True)
    kind = "deadtime-exp"

    def __post_init__(self):
        _check_ratio(self.ratio)
        _check_eta(self.eta)
        if not self.gamma > 0:
            raise ParameterError(
                f"decay rate gamma must be > 0 (use DeadTimeMono for gamma = 0), got {self.gamma}"
            )


DetectorModel = Union[IdealPNR, LossyPNR, OnOffArray, DeadTimeMono, DeadTimeExp]


def describe(model: DetectorModel) -> dict:
    """Plain-dict description of a model, suitable for JSON."""
    d = {"kind": model.kind}
    if not isinstance(model, IdealPNR):
        d.update({k: v for k, v in asdict(model).items() if k != "quad"})
    return d


# --- count range --------------------------------------------------------------


def max_counts(model: DetectorModel, m: int) -> int:
    """Largest count the detector can report when ``m`` photons arrive.

    Resolving detectors report up to m, an array up to K, a dead-time
    detector up to floor(1/r) + 1 (unbounded, i.e. m, when r = 0).
    """
    if isinstance(model, (IdealPNR, LossyPNR)):
        return m
    if isinstance(model, OnOffArray):
        return model.K
    if isinstance(model, (DeadTimeMono, DeadTimeExp)):
        windows = window_count(model.ratio)
        return m if windows is None else windows + 1
    raise TypeError(f"unknown detector model {model!r}")


# --- closed-form conditional probabilities ------------------------------------


def pkm_lossy(eta: float, k: int, m: int) -> float:
    """Binomial thinning: C(m,k) eta^k (1-eta)^(m-k)."""
    if k < 0 or k > m:
        return 0.0
    return binom(m, k) * eta**k * (1.0 - eta) ** (m - k)


@lru_cache(maxsize=None)
def _stirling2_row(n: int) -> tuple[int, ...]:
    """Stirling numbers of the second kind S(n, j), j = 0..n, exact."""
    row = [1]
    for i in range(1, n + 1):
        nxt = [0] * (i + 1)
        for j in range(1, i + 1):
            nxt[j] = j * (row[j] if j < len(row) else 0) + row[j - 1]
        row = nxt
    return tuple(row)


def _occupancy(K: int, k: int, l: int) -> float:
    """Probability that l balls thrown uniformly into K bins fill exactly k bins."""
    if k > l or k > K:
        return 0.0
    if l == 0:
        return 1.0 if k == 0 else 0.0
    return math.perm(K, k) * _stirling2_row(l)[k] / K**l


def pkm_array(K: int, eta: float, k: int, m: int) -> float:
    """Click-number probability for an array of K on/off detectors.

    Each photon survives with probability eta and lands in one of K
    equally weighted detectors; the count is the number of fired ones.
    Summed as binomial thinning times exact occupancy numbers, which
    avoids the cancellation in the alternating binomial form.
    """
    if k < 0 or k > K:
        raise DomainError(f"an array of {K} detectors cannot report {k} clicks")
    if k > m:
        return 0.0
    return math.fsum(pkm_lossy(eta, l, m) * _occupancy(K, k, l) for l in range(k, m + 1))


def pkm_array_alternating(K: int, eta: float, k: int, m: int) -> float:
    """C(K,k) sum_j (-1)^j C(k,j) (1 - eta (K-k+j)/K)^m.

    Direct Fock diagonal of the normally ordered array POVM.  Loses
    precision for large K; used as a cross-check.
    """
    if k < 0 or k > K:
        raise DomainError(f"an array of {K} detectors cannot report {k} clicks")
    s = sum(
        (-1) ** j * math.comb(k, j) * (1.0 - eta * (K - k + j) / K) ** m for j in range(k + 1)
    )
    return math.comb(K, k) * s


def adjusting_efficiency(r: float, k: int) -> float:
    """1 - k r, clamped at 0 once k dead-time intervals overflow the window."""
    return max(0.0, 1.0 - k * r)


def _binom_cdf(m: int, upto: int, mu: float) -> float:
    return math.fsum(pkm_lossy(mu, l, m) for l in range(0, min(upto, m) + 1))


def pkm_deadtime_mono(r: float, eta: float, k: int, m: int) -> float:
    """Pulse-count probability with dead time ratio r and flat intensity.

    For 1 <= k <= K = floor(1/r):
        sum_{l<=k} B(m,l; eta eta_k) - sum_{l<=k-1} B(m,l; eta eta_{k-1}),
    k = 0 gives (1-eta)^m and k = K+1 takes the remaining probability.
    """
    _check_ratio(r)
    _check_eta(eta)
    if k < 0 or k > m:
        return 0.0
    if k == 0:
        return (1.0 - eta) ** m
    windows = window_count(r)
    if windows is None:
        return pkm_lossy(eta, k, m)
    if k > windows + 1:
        return 0.0
    if k == windows + 1:
        value = 1.0 - _binom_cdf(m, windows, eta * adjusting_efficiency(r, windows))
    else:
        value = _binom_cdf(m, k, eta * adjusting_efficiency(r, k)) - _binom_cdf(
            m, k - 1, eta * adjusting_efficiency(r, k - 1)
        )
    return _clamp(value)


def pkm_deadtime_exp(
    r: float, gamma: float, eta: float, k: int, m: int, quad: QuadratureSpec | None = None
) -> float:
    """Pulse-count probability for an exponentially decaying mode (numeric)."""
    if not gamma > 0:
        raise ParameterError(f"decay rate gamma must be > 0, got {gamma}")
    if k < 0 or k > m:
        return 0.0
    return _clamp(float(deadtime_column(r, gamma, eta, k, m, quad)[m]))


def pkk_deadtime_exp_analytic(r: float, gamma: float, eta: float, k: int) -> float:
    """[eta sinh(gamma eta_{k-1}/2) / sinh(gamma/2)]^k."""
    if not gamma > 0:
        raise ParameterError(f"decay rate gamma must be > 0, got {gamma}")
    _check_ratio(r)
    _check_eta(eta)
    if k == 0:
        return 1.0
    return (eta * _sinh_ratio(gamma, adjusting_efficiency(r, k - 1))) ** k


def _sinh_ratio(gamma: float, x: float) -> float:
    """sinh(gamma x / 2) / sinh(gamma / 2), overflow-safe for large gamma."""
    if gamma > 50:
        # sinh(a)/sinh(b) = e^{a-b} (1 - e^{-2a}) / (1 - e^{-2b})
        a, b = 0.5 * gamma * x, 0.5 * gamma
        return math.exp(a - b) * (-math.expm1(-2 * a)) / (-math.expm1(-2 * b))
    return math.sinh(0.5 * gamma * x) / math.sinh(0.5 * gamma)


def _clamp(value: float) -> float:
    if value < -POSITIVITY_TOL:
        raise AccuracyError(f"negative probability {value:.3e}", value, abs(value))
    return min(max(value, 0.0), 1.0)


# --- model dispatch -----------------------------------------------------------


def cond_prob(model: DetectorModel, k: int, m: int) -> float:
    """P(k|m) for any model; 0 outside the reportable range."""
    if k < 0 or k > m or k > max_counts(model, m):
        return 0.0
    if isinstance(model, IdealPNR):
        return 1.0 if k == m else 0.0
    if isinstance(model, LossyPNR):
        return pkm_lossy(model.eta, k, m)
    if isinstance(model, OnOffArray):
        return pkm_array(model.K, model.eta, k, m)
    if isinstance(model, DeadTimeMono):
        return pkm_deadtime_mono(model.ratio, model.eta, k, m)
    if isinstance(model, DeadTimeExp):
        return pkm_deadtime_exp(model.ratio, model.gamma, model.eta, k, m, model.quad)
    raise TypeError(f"unknown detector model {model!r}")


def diagonal_prob(model: DetectorModel, k: int) -> float:
    """P(k|k) from the model's closed form (exp mode uses the sinh expression)."""
    if k < 0:
        raise DomainError(f"negative count {k}")
    if k == 0:
        return 1.0
    if isinstance(model, IdealPNR):
        return 1.0
    if isinstance(model, LossyPNR):
        return model.eta**k
    if isinstance(model, OnOffArray):
        if k > model.K:
            return 0.0
        return (model.eta / model.K) ** k * math.perm(model.K, k)
    if isinstance(model, DeadTimeMono):
        return (model.eta * adjusting_efficiency(model.ratio, k - 1)) ** k
    if isinstance(model, DeadTimeExp):
        return pkk_deadtime_exp_analytic(model.ratio, model.gamma, model.eta, k)
    raise TypeError(f"unknown detector model {model!r}")


def diagonal_factor(model: DetectorModel, k: int) -> float:
    """P(k|k) / eta^k, the loss-free part of the diagonal."""
    if isinstance(model, (IdealPNR, LossyPNR)) or k <= 1:
        return 1.0
    if isinstance(model, OnOffArray):
        if k > model.K:
            return 0.0
        return math.prod((model.K - i) / model.K for i in range(k))
    if isinstance(model, DeadTimeMono):
        return adjusting_efficiency(model.ratio, k - 1) ** k
    if isinstance(model, DeadTimeExp):
        return _sinh_ratio(model.gamma, adjusting_efficiency(model.ratio, k - 1)) ** k
    raise TypeError(f"unknown detector model {model!r}")


# --- tables -------------------------------------------------------------------


@dataclass
class CondProbTable:
    """P(k|m) for k = 0..max_counts(model, max_m) and m = 0..max_m.

    ``values[k, m]`` holds the probability.
    """

    model: DetectorModel
    max_m: int
    values: np.ndarray

    def __call__(self, k: int, m: int) -> float:
        if k < 0 or m < 0 or m > self.max_m or k >= self.values.shape[0]:
            return 0.0
        return float(self.values[k, m])

    def completeness_residual(self) -> np.ndarray:
        return self.values.sum(axis=0) - 1.0

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "m", "p"])
        for m in range(self.max_m + 1):
            for k in range(self.values.shape[0]):
                w.writerow([k, m, f"{self.values[k, m]:.{digits}g}"])
        return buf.getvalue()

    def to_json(self, digits: int = 12) -> dict:
        return {
            "model": describe(self.model),
            "max_m": self.max_m,
            "values": [[float(f"{v:.{digits}g}") for v in row] for row in self.values],
        }

    def dumps(self, digits: int = 12) -> str:
        return json.dumps(self.to_json(digits), indent=1)


@lru_cache(maxsize=256)
def cond_prob_table(model: DetectorModel, max_m: int) -> CondProbTable:
    """Tabulate P(k|m); the exp dead-time model is integrated one k-column at a time."""
    if max_m < 0:
        raise DomainError(f"max_m must be nonnegative, got {max_m}")
    kmax = min(max_counts(model, max_m), max_m)
    values = np.zeros((kmax + 1, max_m + 1))
    if isinstance(model, DeadTimeExp):
        for k in range(kmax + 1):
            col = deadtime_column(model.ratio, model.gamma, model.eta, k, max_m, model.quad)
            values[k] = [_clamp(v) for v in col]
    else:
        for m in range(max_m + 1):
            for k in range(min(kmax, m) + 1):
                values[k, m] = cond_prob(model, k, m)
    values.setflags(write=False)
    return CondProbTable(model, max_m, values)
