"""Matrix permanents.

The production path is Ryser's inclusion-exclusion formula iterated in
Gray-code order, so consecutive subsets differ by one column and each row
sum is updated in O(d).  ``permanent_naive`` sums over all permutations and
exists only as an independent check.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

from .errors import ShapeError, SizeError

DEFAULT_SIZE_CAP = 20
NAIVE_MAX_DIM = 9
SIZE_CAP_ENV = "BOSONKIT_SIZE_CAP"


def size_cap() -> int:
    """Return the photon-number / matrix-dimension cap.

    Read from ``BOSONKIT_SIZE_CAP`` on every call so the CLI and tests can
    override it; falls back to 20.
    """
    raw = os.environ.get(SIZE_CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_SIZE_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise SizeError(f"{SIZE_CAP_ENV}={raw!r} is not an integer") from exc
    if cap < 0:
        raise SizeError(f"{SIZE_CAP_ENV} must be nonnegative, got {cap}")
    return cap


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"permanent needs a square matrix, got shape {a.shape}")
    return a


def permanent(m, cap: int | None = None) -> complex:
    """Permanent of a square complex matrix (Ryser formula, Gray-code order).

    Args:
        m: square array-like, dimension d.
        cap: maximum allowed d; defaults to :func:`size_cap`.

    Returns:
        The permanent as a Python complex.  The 0x0 permanent is 1.

    Raises:
        ShapeError: if ``m`` is not square.
        SizeError: if d exceeds the cap.
    """
    a = _as_square(m)
    d = a.shape[0]
    cap = size_cap() if cap is None else cap
    if d > cap:
        raise SizeError(f"matrix dimension {d} exceeds size cap {cap}")
    if d == 0:
        return 1.0 + 0.0j
    if d == 1:
        return complex(a[0, 0])
    if d == 2:
        return complex(a[0, 0] * a[1, 1] + a[0, 1] * a[1, 0])

    cols = [a[:, j].copy() for j in range(d)]
    row_sums = np.zeros(d, dtype=complex)
    in_subset = [False] * d
    total = 0.0 + 0.0j
    size = 0
    for g in range(1, 1 << d):
        # column toggled between Gray codes g-1 and g
        j = (g & -g).bit_length() - 1
        if in_subset[j]:
            row_sums -= cols[j]
            size -= 1
        else:
            row_sums += cols[j]
            size += 1
        in_subset[j] = not in_subset[j]
        term = complex(np.prod(row_sums))
        total += -term if size & 1 else term
    return -total if d & 1 else total


def permanent_naive(m) -> complex:
    """Permanent by explicit summation over all d! permutations (d <= 9)."""
    a = _as_square(m)
    d = a.shape[0]
    if d > NAIVE_MAX_DIM:
        raise SizeError(f"naive permanent is limited to d <= {NAIVE_MAX_DIM}, got {d}")
    rows = range(d)
    total = 0.0 + 0.0j
    for perm in itertools.permutations(rows):
        prod = 1.0 + 0.0j
        for i, j in zip(rows, perm):
            prod *= a[i, j]
        total += prod
    return complex(total)


def expanded_submatrix(u, row_mult, col_mult) -> np.ndarray:
    """Build U[1^{m_1}...N^{m_N} | 1^{n_1}...N^{n_N}].

    Row ``i`` of ``u`` is repeated ``row_mult[i]`` times and column ``j``
    ``col_mult[j]`` times, both in ascending mode order.
    """
    a = np.asarray(u, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected an NxN matrix, got shape {a.shape}")
    n_modes = a.shape[0]
    rm = np.asarray(row_mult, dtype=int)
    cm = np.asarray(col_mult, dtype=int)
    if rm.shape != (n_modes,) or cm.shape != (n_modes,):
        raise ShapeError(
            f"multiplicities must have length {n_modes}, got {rm.shape} and {cm.shape}"
        )
    if (rm < 0).any() or (cm < 0).any():
        raise ShapeError("multiplicities must be nonnegative")
    if rm.sum() != cm.sum():
        raise ShapeError(
            f"row and column multiplicities differ in total: {rm.sum()} != {cm.sum()}"
        )
    rows = np.repeat(np.arange(n_modes), rm)
    cols = np.repeat(np.arange(n_modes), cm)
    return a[np.ix_(rows, cols)]
