"""Dense statevector engine: Pauli application, expectations, projective sampling.

States are immutable complex128 vectors over the computational basis.
Qubit 0 is the most significant bit of the basis label, matching the
letter order of PauliString.
"""

from __future__ import annotations

import functools
from typing import Iterable, Sequence, Union

import numpy as np

from netbell.pauli import PauliString

STATE_QUBIT_CAP = 20
NORM_TOL = 1e-12
IMAG_TOL = 1e-10

# A measurable observable: a single hermitian PauliString, or a real
# combination sum_i c_i P_i of pairwise anticommuting hermitian strings
# with sum c_i^2 = 1 (so that the observable squares to the identity).
ObservableTerms = Union[PauliString, Sequence[tuple[float, PauliString]]]


def make_rng(seed: int | None) -> np.random.Generator:
    """Seeded generator; the seed is echoed in every sampling report."""
    return np.random.default_rng(seed)


def spawn_rngs(seed: int | None, count: int) -> list[np.random.Generator]:
    """Independent child generators split deterministically from one seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(c) for c in children]


def _parity(values: np.ndarray) -> np.ndarray:
    """Bitwise popcount parity of each entry (values below 2**32)."""
    v = values.copy()
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return v & 1


class StateVector:
    """Normalized pure state on n qubits."""

    __slots__ = ("_amps", "_n")

    def __init__(self, amplitudes: np.ndarray | Sequence[complex]):
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.shape[0] < 2 or (amps.shape[0] & (amps.shape[0] - 1)):
            raise ValueError(f"amplitude count {amps.shape} is not a power of two >= 2")
        n = int(amps.shape[0]).bit_length() - 1
        if n > STATE_QUBIT_CAP:
            raise ValueError(f"{n} qubits exceeds the cap of {STATE_QUBIT_CAP}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} is not 1 within {NORM_TOL}")
        amps = amps.copy()
        amps.setflags(write=False)
        self._amps = amps
        self._n = n

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def from_unnormalized(cls, amplitudes: np.ndarray | Sequence[complex]) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = float(np.linalg.norm(amps))
        if norm < NORM_TOL:
            raise ValueError("cannot normalize a (near-)zero vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, n: int, label: int | str | Sequence[int]) -> "StateVector":
        """Computational basis state; label as index, bit string, or bit list."""
        if isinstance(label, str):
            index = int(label, 2)
        elif isinstance(label, int):
            index = label
        else:
            index = 0
            for bit in label:
                index = (index << 1) | int(bit)
        dim = 1 << n
        if not 0 <= index < dim:
            raise ValueError(f"basis label {label!r} out of range for {n} qubits")
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        return cls.basis(n, 0)

    @classmethod
    def plus(cls, n: int) -> "StateVector":
        """The uniform |+...+> state."""
        dim = 1 << n
        return cls(np.full(dim, 1.0 / np.sqrt(dim), dtype=complex))

    # ------------------------------------------------------------------
    # accessors

    @property
    def n(self) -> int:
        return self._n

    @property
    def amplitudes(self) -> np.ndarray:
        """Read-only amplitude array."""
        return self._amps

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        if self._n != other._n:
            raise ValueError("qubit count mismatch in inner product")
        return complex(np.vdot(self._amps, other._amps))

    def fidelity(self, other: "StateVector") -> float:
        return abs(self.inner(other)) ** 2

    def with_canonical_phase(self) -> "StateVector":
        """Rotate the global phase so the first nonzero amplitude is real positive."""
        for a in self._amps:
            if abs(a) > NORM_TOL:
                return StateVector(self._amps * (abs(a) / a))
        raise ValueError("zero state has no canonical phase")

    # ------------------------------------------------------------------
    # operator action

    def apply(self, p: PauliString) -> "StateVector":
        """Exact action of a phased Pauli string, including its phase."""
        if p.n != self._n:
            raise ValueError(f"operator on {p.n} qubits applied to {self._n}-qubit state")
        n = self._n
        # Qubit j is bit (n-1-j) of the basis index.
        xmask = 0
        zmask = 0
        for j in range(n):
            bit = 1 << (n - 1 - j)
            if p.x_bits[j]:
                xmask |= bit
            if p.z_bits[j]:
                zmask |= bit
        y_count = int(np.count_nonzero(p.x_bits & p.z_bits))
        phase = (1j) ** ((p.phase_exponent + y_count) % 4)
        idx = np.arange(1 << n)
        signs = 1.0 - 2.0 * _parity(idx & zmask)
        out = np.empty(1 << n, dtype=complex)
        out[idx ^ xmask] = phase * signs * self._amps
        return StateVector(out)

    def expectation(self, p: PauliString) -> float:
        """<psi|P|psi> for a hermitian string; the tiny imaginary residue is
        asserted below 1e-10 and discarded."""
        if not p.is_hermitian():
            raise ValueError(f"expectation of non-hermitian operator {p}")
        value = self.inner(self.apply(p))
        assert abs(value.imag) < IMAG_TOL, f"imaginary residue {value.imag!r} in expectation"
        return float(value.real)

    def expectation_combo(self, terms: ObservableTerms) -> float:
        """Expectation of a real combination of hermitian strings."""
        return sum(c * self.expectation(p) for c, p in _as_terms(terms))

    # ------------------------------------------------------------------
    # measurement

    def measure(
        self,
        observable: ObservableTerms,
        rng: np.random.Generator,
        outcome: int | None = None,
    ) -> tuple[int, "StateVector"]:
        """Projective measurement of an involutory observable.

        Samples +1/-1 with the Born probabilities <(I +/- O)/2> and returns
        the renormalized projection. Passing outcome forces that branch and
        raises if its probability is (near) zero.
        """
        terms = _check_involutory(_as_terms(observable), n=self._n)
        applied = np.zeros_like(self._amps)
        for c, p in terms:
            applied = applied + c * self.apply(p).amplitudes
        plus = (self._amps + applied) / 2.0
        minus = (self._amps - applied) / 2.0
        p_plus = float(np.linalg.norm(plus)) ** 2
        if outcome is None:
            outcome = 1 if rng.random() < p_plus else -1
        branch = plus if outcome == 1 else minus
        prob = p_plus if outcome == 1 else 1.0 - p_plus
        if prob < NORM_TOL:
            raise ValueError(f"projection onto outcome {outcome:+d} has probability {prob!r}")
        return outcome, StateVector.from_unnormalized(branch)


def _as_terms(observable: ObservableTerms) -> list[tuple[float, PauliString]]:
    if isinstance(observable, PauliString):
        return [(1.0, observable)]
    return [(float(c), p) for c, p in observable]


def _check_involutory(terms: list[tuple[float, PauliString]], n: int) -> list[tuple[float, PauliString]]:
    if not terms:
        raise ValueError("empty observable")
    for _, p in terms:
        if p.n != n:
            raise ValueError(f"observable on {p.n} qubits measured on {n}-qubit state")
        if not p.is_hermitian():
            raise ValueError(f"observable term {p} is not hermitian")
    for a in range(len(terms)):
        for b in range(a + 1, len(terms)):
            if not terms[a][1].anticommutes(terms[b][1]):
                raise ValueError(
                    f"observable terms {terms[a][1]} and {terms[b][1]} do not anticommute"
                )
    weight = sum(c * c for c, _ in terms)
    if abs(weight - 1.0) > 1e-9:
        raise ValueError(f"observable does not square to identity: sum of c^2 = {weight!r}")
    return terms


def tensor(states: Iterable[StateVector]) -> StateVector:
    """Kronecker product in global qubit order (first state owns qubit 0)."""
    states = list(states)
    if not states:
        raise ValueError("tensor of no states")
    total = sum(s.n for s in states)
    if total > STATE_QUBIT_CAP:
        raise ValueError(f"{total} qubits exceeds the cap of {STATE_QUBIT_CAP}")
    amps = functools.reduce(np.kron, (s.amplitudes for s in states))
    return StateVector(amps)
