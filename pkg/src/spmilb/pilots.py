"""DFT-phase (MWBE) pilot codebooks shared by the superimposed and regular schemes.

Rows index users, columns index pilot symbols. Row ``k`` (0-based) is
``exp(-2j*pi*k*n/K)`` for ``n = 0 .. length-1`` with no unitary scaling,
so every row has squared norm ``length`` and the columns are orthogonal
with squared norm ``K`` as long as ``length <= K``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def dft_phase_rows(users: int, length: int) -> np.ndarray:
    """Raw ``users x length`` phase matrix, without the ``length <= users`` check.

    Phases are reduced modulo ``users`` in integer arithmetic before the
    exponential, so every entry is an exact rational multiple of 2*pi.
    """
    k = np.arange(users, dtype=np.int64)[:, None]
    n = np.arange(length, dtype=np.int64)[None, :]
    phase = (k * n) % users
    return np.exp(-2j * np.pi * phase / users)


@dataclass(frozen=True)
class PilotMatrix:
    entries: np.ndarray

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def users(self) -> int:
        return self.entries.shape[0]

    @property
    def length(self) -> int:
        return self.entries.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def truncated(self, length: int) -> "PilotMatrix":
        """First ``length`` columns, i.e. the regular-pilot codebook for the same users."""
        return gen_mwbe_pilots(self.users, length)


def gen_mwbe_pilots(users: int, length: int) -> PilotMatrix:
    """Build the ``users x length`` MWBE pilot matrix.

    Raises
    ------
    ValueError
        If either dimension is not positive, or ``length > users`` (the
        columns can no longer be mutually orthogonal).
    """
    if users < 1 or length < 1:
        raise ValueError(f"pilot dimensions must be positive, got users={users}, length={length}")
    if length > users:
        raise ValueError(
            f"pilot length {length} exceeds user count {users}; column Gram would not be {users}*I"
        )
    return PilotMatrix(dft_phase_rows(users, length))


def gram_rows(pilots: PilotMatrix | np.ndarray) -> np.ndarray:
    """Row Gram matrix ``Phi Phi^H`` (``K x K``); the diagonal equals the pilot length."""
    phi = np.asarray(pilots)
    g = phi @ phi.conj().T
    # unit-modulus entries: the diagonal is the length exactly, not a rounded sum
    np.fill_diagonal(g, float(phi.shape[1]))
    return g


def gram_rows_closed_form(users: int, length: int) -> np.ndarray:
    """Entrywise geometric-series value of the row Gram matrix."""
    d = (np.arange(users)[:, None] - np.arange(users)[None, :]) % users
    q = np.exp(-2j * np.pi * d / users)
    out = np.full((users, users), float(length), dtype=complex)
    off = d != 0
    out[off] = (1 - q[off] ** length) / (1 - q[off])
    return out


def dump_csv(pilots: PilotMatrix | np.ndarray, path: str | Path) -> None:
    """Write the matrix row-major, two columns (re, im) per complex entry."""
    phi = np.asarray(pilots)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in phi:
            flat = []
            for z in row:
                flat.extend((repr(float(z.real)), repr(float(z.imag))))
            writer.writerow(flat)


def load_csv(path: str | Path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    return data[:, 0::2] + 1j * data[:, 1::2]
