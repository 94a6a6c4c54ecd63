"""Fock diagonals of the dead-time POVM for a time-dependent intensity.

Time is measured in units of the measurement window, so the window is
[0, 1] and the dead time is the ratio ``r``.  The intensity profile is the
exponential decay I(t) = eta*gamma*exp(-gamma t)/(1 - exp(-gamma)) with
cumulative Phi(t); ``gamma == 0`` gives the flat profile I(t) = eta.

For k >= 1 pulses and m photons,

    P(k|m) = m!/(m-k)! * int_{T_k} prod_i I(t_i) (1 - Xi_k(t))^{m-k} dt

over ordered times with gaps t_{i+1} - t_i >= r.  Two evaluation routes:

``"chain"``
    With the gaps enforced, 1 - Xi_k = (1 - eta) + sum_i D(t_i), where
    D(t) = Phi(min(t + r, 1)) - Phi(t) is the intensity blocked by a pulse at
    t.  Expanding (1 - Xi)^j through the generating function exp(x(1 - Xi))
    makes the integrand a product over pulses, so after the shift
    s_i = t_i - (i-1) r the k-fold integral becomes k nested cumulative
    1-D integrals.  These are done spectrally on Chebyshev nodes; the only
    kink (D at t = 1 - r) sits in the last, plain Gauss-Legendre stage and is
    split out.  Works for any k.

``"simplex"``
    Direct iterated Gauss-Legendre over the k-dimensional ordered simplex
    with Xi_k assembled from Phi term by term.  Cost grows as nodes^k, so it
    is restricted to k <= 4; kept as an independent check of ``"chain"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial.legendre import leggauss

from .errors import AccuracyError, ParameterError

SIMPLEX_MAX_K = 4
CHAIN_MAX_NODES = 1024


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy settings for the dead-time quadrature.

    Attributes:
        nodes: Gauss-Legendre / Chebyshev nodes per dimension.
        tol: absolute accuracy target.  The chain route doubles its node
            count until two successive results agree to ``tol``; the simplex
            route compares ``nodes`` against ``3*nodes//4``.
        method: ``"chain"`` or ``"simplex"``.
    """

    nodes: int = 32
    tol: float = 1e-6
    method: str = "chain"

    def __post_init__(self):
        if self.nodes < 4:
            raise ParameterError(f"need at least 4 quadrature nodes, got {self.nodes}")
        if self.method not in ("chain", "simplex"):
            raise ParameterError(f"unknown quadrature method {self.method!r}")


class Intensity:
    """Exponential-decay intensity on [0, 1] normalized to ``eta``."""

    def __init__(self, gamma: float, eta: float):
        if gamma < 0:
            raise ParameterError(f"decay rate must be >= 0, got {gamma}")
        self.gamma = float(gamma)
        self.eta = float(eta)
        # 1 - exp(-gamma), accurate for tiny gamma
        self._norm = -math.expm1(-self.gamma) if self.gamma > 0 else 0.0

    def density(self, t):
        t = np.asarray(t, dtype=float)
        if self.gamma == 0:
            return np.full_like(t, self.eta)
        return self.eta * self.gamma * np.exp(-self.gamma * t) / self._norm

    def cumulative(self, t):
        """Phi(t) = int_0^t I, clipped to the window."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        if self.gamma == 0:
            return self.eta * t
        return self.eta * (-np.expm1(-self.gamma * t)) / self._norm


def window_count(r: float) -> int | None:
    """Number of whole dead-time intervals in the window, None when r == 0."""
    if r == 0:
        return None
    # guard against 1/r landing a hair below an integer
    return int(math.floor(1.0 / r + 1e-9))


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Truncated product of power series stored along the last axis."""
    deg = a.shape[-1]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=float)
    for p in range(deg):
        out[..., p:] += a[..., p : p + 1] * b[..., : deg - p]
    return out


def _exp_series(values: np.ndarray, deg: int) -> np.ndarray:
    """Coefficients of exp(x*v) up to x^(deg-1) for each v."""
    v = np.asarray(values, dtype=float)[..., None]
    p = np.arange(deg)
    inv_fact = np.array([1.0 / math.factorial(i) for i in range(deg)])
    return v**p * inv_fact


def _chain_series(k: int, r: float, intensity: Intensity, deg: int, nodes: int) -> np.ndarray:
    """Series J(x) = int prod_i I(t_i) exp(x D(t_i)) over the gap-ordered domain."""
    length = 1.0 - (k - 1) * r
    if length <= 0.0:
        return np.zeros(deg)

    def pulse_factor(t):
        t = np.asarray(t, dtype=float)
        blocked = intensity.cumulative(np.minimum(t + r, 1.0)) - intensity.cumulative(t)
        return intensity.density(t)[..., None] * _exp_series(blocked, deg)

    # Chebyshev points of the first kind mapped onto [0, length]
    xc = C.chebpts1(nodes)
    sc = 0.5 * length * (xc + 1.0)
    vander = C.chebvander(xc, nodes - 1)

    # running cumulative integral G_{i}(s), held as Chebyshev coefficients
    cum_coef = None
    for i in range(1, k):
        f = pulse_factor(sc + (i - 1) * r)
        if cum_coef is not None:
            f = _series_mul(f, C.chebval(xc, cum_coef).T)
        coef = np.linalg.solve(vander, f)
        cum_coef = C.chebint(coef, lbnd=-1.0, scl=0.5 * length, axis=0)

    xg, wg = leggauss(nodes)
    kink = length - r
    pieces = [(0.0, kink), (kink, length)] if 0.0 < kink < length else [(0.0, length)]
    total = np.zeros(deg)
    for a, b in pieces:
        s = a + 0.5 * (b - a) * (xg + 1.0)
        f = pulse_factor(s + (k - 1) * r)
        if cum_coef is not None:
            xs = 2.0 * s / length - 1.0
            f = _series_mul(f, C.chebval(xs, cum_coef).T)
        total += 0.5 * (b - a) * (wg[:, None] * f).sum(axis=0)
    return total


def _chain_column(k: int, max_m: int, r: float, intensity: Intensity, nodes: int) -> np.ndarray:
    """P(k|m) for m = k..max_m via the chain route."""
    deg = max_m - k + 1
    series = _chain_series(k, r, intensity, deg, nodes)
    series = _series_mul(_exp_series(1.0 - intensity.eta, deg), series)
    return np.array([math.factorial(k + j) * series[j] for j in range(deg)])


def _simplex_points(k: int, length: float, kink: float, nodes: int):
    """Nodes and weights on 0 <= s_1 <= ... <= s_k <= length.

    The outer variable s_k is split at ``kink``; inner ones are scaled copies
    s_{i} = s_{i+1} * u.
    """
    xg, wg = leggauss(nodes)
    u = 0.5 * (xg + 1.0)
    wu = 0.5 * wg
    pieces = [(0.0, kink), (kink, length)] if 0.0 < kink < length else [(0.0, length)]
    outer_s, outer_w = [], []
    for a, b in pieces:
        outer_s.append(a + (b - a) * u)
        outer_w.append((b - a) * wu)
    s = np.concatenate(outer_s)[:, None]
    w = np.concatenate(outer_w)
    for _ in range(k - 1):
        inner = s[:, :1] * u[None, :]
        w = (w[:, None] * s[:, 0][:, None] * wu[None, :]).ravel()
        s = np.concatenate(
            [inner.reshape(-1, 1), np.repeat(s, nodes, axis=0)], axis=1
        )
    # columns are s_1, ..., s_k
    return s, w


def _simplex_value(k: int, m: int, r: float, intensity: Intensity, nodes: int) -> float:
    length = 1.0 - (k - 1) * r
    if length <= 0.0:
        return 0.0
    s, w = _simplex_points(k, length, length - r, nodes)
    t = s + r * np.arange(k)[None, :]
    phi = intensity.cumulative
    xi = phi(t[:, 0])
    for i in range(k - 1):
        xi = xi + np.maximum(0.0, phi(t[:, i + 1]) - phi(t[:, i] + r))
    xi = xi + np.maximum(0.0, phi(1.0) - phi(t[:, -1] + r))
    integrand = np.prod(intensity.density(t), axis=1) * (1.0 - xi) ** (m - k)
    return math.factorial(m) / math.factorial(m - k) * float(np.dot(w, integrand))


def _check_args(r, gamma, eta):
    if not 0.0 <= r <= 1.0:
        raise ParameterError(f"dead-time ratio must lie in [0, 1], got {r}")
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"efficiency must lie in [0, 1], got {eta}")
    if gamma < 0:
        raise ParameterError(f"decay rate must be >= 0, got {gamma}")


def _feasible(k: int, r: float) -> bool:
    return (k - 1) * r <= 1.0 + 1e-12


def deadtime_column(
    r: float, gamma: float, eta: float, k: int, max_m: int, quad: QuadratureSpec | None = None
) -> np.ndarray:
    """P(k|m) for m = 0..max_m, with accuracy control.

    Entries with m < k are zero.  Raises :class:`AccuracyError` when the
    two-resolution error estimate exceeds ``quad.tol``.
    """
    quad = quad or QuadratureSpec()
    _check_args(r, gamma, eta)
    out = np.zeros(max_m + 1)
    if k < 0 or k > max_m:
        return out
    if k == 0:
        return (1.0 - eta) ** np.arange(max_m + 1)
    if not _feasible(k, r):
        return out
    intensity = Intensity(gamma, eta)
    if quad.method == "chain":
        # steep e^{-p gamma t} terms at high series order need more nodes
        nodes = quad.nodes
        coarse = _chain_column(k, max_m, r, intensity, nodes)
        while True:
            fine = _chain_column(k, max_m, r, intensity, 2 * nodes)
            nodes *= 2
            if np.max(np.abs(fine - coarse)) <= quad.tol or nodes >= CHAIN_MAX_NODES:
                break
            coarse = fine
    else:
        if k > SIMPLEX_MAX_K:
            raise ParameterError(f"simplex quadrature is limited to k <= {SIMPLEX_MAX_K}")
        coarse_nodes = max(2, (3 * quad.nodes) // 4)
        ms = range(k, max_m + 1)
        fine = np.array([_simplex_value(k, m, r, intensity, quad.nodes) for m in ms])
        coarse = np.array([_simplex_value(k, m, r, intensity, coarse_nodes) for m in ms])
    err = float(np.max(np.abs(fine - coarse)))
    if err > quad.tol:
        worst = int(np.argmax(np.abs(fine - coarse)))
        raise AccuracyError(
            f"dead-time quadrature for k={k} did not converge: error estimate {err:.2e}"
            f" > {quad.tol:.1e}",
            float(fine[worst]),
            err,
        )
    out[k:] = fine
    return out


def deadtime_probability(
    r: float, gamma: float, eta: float, k: int, m: int, quad: QuadratureSpec | None = None
) -> float:
    """Single P(k|m); see :func:`deadtime_column`."""
    if k > m or k < 0:
        return 0.0
    return float(deadtime_column(r, gamma, eta, k, m, quad)[m])
