"""Phased Pauli strings with exact integer phase tracking.

A Pauli string is i**k * (W_0 tensor ... tensor W_{n-1}) with letters
W_j in {I, X, Y, Z} and the phase exponent k in {0, 1, 2, 3}. The phase
is never touched by floating point: products, commutators and sign
flips stay exact no matter how many operators are multiplied.

Qubit 0 is the leftmost tensor factor and the most significant bit of
computational basis labels; this convention is shared by every module
that consumes PauliString.
"""

from __future__ import annotations

import functools
from typing import Iterable, Sequence

import numpy as np

_LETTERS = "IXYZ"

# Symplectic encoding of a letter: I=(0,0), X=(1,0), Y=(1,1), Z=(0,1).
_XBIT = {"I": 0, "X": 1, "Y": 1, "Z": 0}
_ZBIT = {"I": 0, "X": 0, "Y": 1, "Z": 1}
_LETTER_OF_BITS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}

_PHASE_VALUES = (1 + 0j, 1j, -1 + 0j, -1j)
_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}

_SINGLE_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Largest register for which a dense matrix is built on request.
MATRIX_QUBIT_CAP = 12


class PauliString:
    """Immutable phased Pauli operator on n >= 1 qubits.

    Parameters
    ----------
    letters : str or iterable of str
        Letters from {I, X, Y, Z}, qubit 0 first.
    phase_exponent : int
        Power k of i in the overall phase i**k; reduced mod 4.
    """

    __slots__ = ("_x", "_z", "_k")

    def __init__(self, letters: Iterable[str], phase_exponent: int = 0):
        letters = tuple(letters)
        if len(letters) < 1:
            raise ValueError("a PauliString needs at least one qubit")
        try:
            x = np.array([_XBIT[c] for c in letters], dtype=np.uint8)
            z = np.array([_ZBIT[c] for c in letters], dtype=np.uint8)
        except KeyError as bad:
            raise ValueError(f"unknown Pauli letter {bad}; expected one of I, X, Y, Z")
        x.setflags(write=False)
        z.setflags(write=False)
        self._x = x
        self._z = z
        self._k = int(phase_exponent) % 4

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        """The +1 identity string on n qubits."""
        return cls("I" * n)

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse the text form: optional sign, optional 'i', then letters.

        Accepts e.g. "XZZXI", "-IZXXI", "+ZZXIX", "iXY", "-iZZ".
        """
        body = text.strip()
        k = 0
        if body.startswith("+"):
            body = body[1:]
        elif body.startswith("-"):
            k = 2
            body = body[1:]
        if body.startswith("i"):
            k += 1
            body = body[1:]
        if not body:
            raise ValueError(f"no Pauli letters in {text!r}")
        return cls(body, phase_exponent=k)

    @classmethod
    def product(cls, factors: Iterable["PauliString"], n: int | None = None) -> "PauliString":
        """Ordered product of the factors; identity(n) if factors is empty."""
        result = None
        for p in factors:
            result = p if result is None else result * p
        if result is None:
            if n is None:
                raise ValueError("empty product needs an explicit qubit count")
            return cls.identity(n)
        return result

    # ------------------------------------------------------------------
    # basic accessors

    @property
    def n(self) -> int:
        return self._x.shape[0]

    def __len__(self) -> int:
        return self.n

    @property
    def phase_exponent(self) -> int:
        return self._k

    @property
    def phase(self) -> complex:
        """The exact phase i**k as a complex number (one of +1, +i, -1, -i)."""
        return _PHASE_VALUES[self._k]

    @property
    def letters(self) -> str:
        """Letters without the phase, e.g. "ZZXIX"."""
        return "".join(
            _LETTER_OF_BITS[(int(xb), int(zb))] for xb, zb in zip(self._x, self._z)
        )

    def letter(self, j: int) -> str:
        return _LETTER_OF_BITS[(int(self._x[j]), int(self._z[j]))]

    @property
    def x_bits(self) -> np.ndarray:
        """Symplectic x row (read-only uint8 array)."""
        return self._x

    @property
    def z_bits(self) -> np.ndarray:
        """Symplectic z row (read-only uint8 array)."""
        return self._z

    @property
    def weight(self) -> int:
        """Number of non-identity letters."""
        return int(np.count_nonzero(self._x | self._z))

    @property
    def support(self) -> tuple[int, ...]:
        """Indices of non-identity letters, ascending."""
        return tuple(int(j) for j in np.flatnonzero(self._x | self._z))

    def is_identity(self) -> bool:
        """True iff every letter is I (any phase)."""
        return self.weight == 0

    def is_hermitian(self) -> bool:
        """True iff the phase is real (+1 or -1)."""
        return self._k % 2 == 0

    # ------------------------------------------------------------------
    # algebra

    def __mul__(self, other: "PauliString") -> "PauliString":
        if not isinstance(other, PauliString):
            return NotImplemented
        if self.n != other.n:
            raise ValueError(
                f"length mismatch: cannot multiply strings on {self.n} and {other.n} qubits"
            )
        x1 = self._x.astype(np.int64)
        z1 = self._z.astype(np.int64)
        x2 = other._x.astype(np.int64)
        z2 = other._z.astype(np.int64)
        x3 = x1 ^ x2
        z3 = z1 ^ z2
        # Per-qubit phase from W(x1,z1)W(x2,z2) = i**d W(x3,z3), derived by
        # passing through the X^x Z^z form (Y = i X Z).
        d = x1 * z1 + x2 * z2 + 2 * (z1 * x2) - x3 * z3
        k = (self._k + other._k + int(d.sum())) % 4
        out = PauliString.__new__(PauliString)
        x3u = x3.astype(np.uint8)
        z3u = z3.astype(np.uint8)
        x3u.setflags(write=False)
        z3u.setflags(write=False)
        out._x = x3u
        out._z = z3u
        out._k = k
        return out

    def commutes(self, other: "PauliString") -> bool:
        """True iff self and other commute (parity of anticommuting positions)."""
        if self.n != other.n:
            raise ValueError(
                f"length mismatch: cannot compare strings on {self.n} and {other.n} qubits"
            )
        clashes = (self._x & other._z) ^ (self._z & other._x)
        return int(np.count_nonzero(clashes)) % 2 == 0

    def anticommutes(self, other: "PauliString") -> bool:
        return not self.commutes(other)

    def adjoint(self) -> "PauliString":
        """Hermitian conjugate: letters unchanged, phase conjugated."""
        return self.with_phase_exponent((-self._k) % 4)

    def with_phase_exponent(self, k: int) -> "PauliString":
        return PauliString(self.letters, phase_exponent=k)

    def __neg__(self) -> "PauliString":
        return self.with_phase_exponent(self._k + 2)

    # ------------------------------------------------------------------
    # register plumbing

    def embed(self, positions: Sequence[int], n: int) -> "PauliString":
        """Place this string at the given global positions of an n-qubit register.

        Identity elsewhere; the phase is preserved. positions[j] is the
        global index of this string's qubit j.
        """
        positions = list(positions)
        if len(positions) != self.n:
            raise ValueError(
                f"need {self.n} positions for a {self.n}-qubit string, got {len(positions)}"
            )
        if len(set(positions)) != len(positions):
            raise ValueError(f"duplicate positions in {positions}")
        letters = ["I"] * n
        for j, pos in enumerate(positions):
            if not 0 <= pos < n:
                raise ValueError(f"position {pos} out of range for {n} qubits")
            letters[pos] = self.letter(j)
        return PauliString(letters, phase_exponent=self._k)

    def restrict(self, positions: Sequence[int]) -> "PauliString":
        """Letters at the given positions as a new string with phase +1.

        The caller owns the global phase: restricting splits an operator
        across parties and only the full product's phase is physical.
        """
        positions = list(positions)
        for pos in positions:
            if not 0 <= pos < self.n:
                raise ValueError(f"position {pos} out of range for {self.n} qubits")
        if not positions:
            raise ValueError("cannot restrict to an empty position list")
        return PauliString([self.letter(pos) for pos in positions])

    # ------------------------------------------------------------------
    # dense oracle

    def to_matrix(self) -> np.ndarray:
        """Dense 2**n x 2**n matrix; entries are exact Gaussian integers."""
        if self.n > MATRIX_QUBIT_CAP:
            raise ValueError(f"dense matrix capped at {MATRIX_QUBIT_CAP} qubits, got {self.n}")
        mats = [_SINGLE_MATRICES[c] for c in self.letters]
        return self.phase * functools.reduce(np.kron, mats)

    # ------------------------------------------------------------------
    # text form and value semantics

    def __str__(self) -> str:
        return _PHASE_PREFIX[self._k] + self.letters

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self._k == other._k
            and self.n == other.n
            and bool(np.array_equal(self._x, other._x))
            and bool(np.array_equal(self._z, other._z))
        )

    def __hash__(self) -> int:
        return hash((self._k, self._x.tobytes(), self._z.tobytes()))
