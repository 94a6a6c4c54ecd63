"""Unitary interferometer matrices: named networks, Haar sampling, file I/O."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ParameterError, ShapeError, UnitarityError

UNITARITY_TOL = 1e-10


def unitarity_residual(m) -> float:
    """Max absolute entry of U^dagger U - I."""
    a = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0])), initial=0.0))


class UnitaryMatrix:
    """An N x N matrix checked to be unitary at construction.

    Entry ``[j, i]`` is the amplitude U_ji coupling input mode ``i`` to
    output mode ``j``.  The array is stored read-only.
    """

    __slots__ = ("_m",)

    def __init__(self, entries, tol: float = UNITARITY_TOL):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeError(f"unitary must be square, got shape {a.shape}")
        if a.shape[0] == 0:
            raise ShapeError("unitary must have at least one mode")
        if not np.isfinite(a).all():
            raise UnitarityError("matrix has NaN or infinite entries", math.inf)
        residual = unitarity_residual(a)
        if residual > tol:
            raise UnitarityError(
                f"matrix is not unitary: max|U^dag U - I| = {residual:.3e} > {tol:.1e}",
                residual,
            )
        a.setflags(write=False)
        self._m = a

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, UnitaryMatrix):
            return NotImplemented
        return np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash(self._m.tobytes())

    def __repr__(self):
        return f"UnitaryMatrix(dim={self.dim})"

    def permute_outputs(self, perm) -> "UnitaryMatrix":
        """Return U with output mode ``perm[j]`` moved to position ``j``."""
        return UnitaryMatrix(self._m[list(perm), :])

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self._m],
        }


def validate_unitary(m, tol: float = UNITARITY_TOL) -> UnitaryMatrix:
    """Wrap ``m`` as a :class:`UnitaryMatrix`, raising if it is not unitary."""
    return UnitaryMatrix(m, tol=tol)


def beam_splitter(transmittance_amplitude: float, phase: float = 0.0) -> UnitaryMatrix:
    """Two-mode splitter [[t, r e^{i phi}], [-r e^{-i phi}, t]], r = sqrt(1 - t^2)."""
    t = float(transmittance_amplitude)
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"transmittance amplitude must lie in [0, 1], got {t}")
    r = math.sqrt(1.0 - t * t)
    e = complex(math.cos(phase), math.sin(phase))
    return UnitaryMatrix([[t, r * e], [-r * e.conjugate(), t]])


def balanced_beam_splitter() -> UnitaryMatrix:
    return beam_splitter(1.0 / math.sqrt(2.0))


def dft_unitary(n: int) -> UnitaryMatrix:
    """Discrete Fourier transform on ``n`` modes, entries exp(2 pi i jk/n)/sqrt(n)."""
    if n < 1:
        raise ParameterError(f"DFT size must be >= 1, got {n}")
    j, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    # jk mod n keeps the phase argument in [0, 2pi)
    return UnitaryMatrix(np.exp(2j * np.pi * ((j * k) % n) / n) / math.sqrt(n))


def haar_random_unitary(n: int, seed: int) -> UnitaryMatrix:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix.

    The columns of Q are rephased by the phases of diag(R); without this
    correction QR output is not Haar distributed.
    """
    if n < 1:
        raise ParameterError(f"unitary size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return UnitaryMatrix(q * (d / np.abs(d)))


def identity_unitary(n: int) -> UnitaryMatrix:
    if n < 1:
        raise ParameterError(f"unitary size must be >= 1, got {n}")
    return UnitaryMatrix(np.eye(n))


def _reject_constant(name):
    raise ShapeError(f"non-finite value {name} in matrix file")


def matrix_from_json(obj) -> np.ndarray:
    """Parse ``{"dim": N, "entries": [[[re, im], ...], ...]}`` into an array."""
    try:
        dim = int(obj["dim"])
        rows = obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeError(f"malformed matrix object: {exc}") from exc
    if len(rows) != dim or any(len(row) != dim for row in rows):
        raise ShapeError(f"matrix file declares dim={dim} but entries do not match")
    a = np.empty((dim, dim), dtype=complex)
    for j, row in enumerate(rows):
        for i, pair in enumerate(row):
            if len(pair) != 2:
                raise ShapeError(f"entry [{j}][{i}] is not a [re, im] pair")
            a[j, i] = complex(float(pair[0]), float(pair[1]))
    if not np.isfinite(a).all():
        raise ShapeError("matrix file contains NaN or infinite entries")
    return a


def load_matrix(path, tol: float = UNITARITY_TOL) -> UnitaryMatrix:
    text = Path(path).read_text()
    obj = json.loads(text, parse_constant=_reject_constant)
    return validate_unitary(matrix_from_json(obj), tol=tol)


def save_matrix(u: UnitaryMatrix, path) -> None:
    Path(path).write_text(json.dumps(u.to_json()) + "\n")
