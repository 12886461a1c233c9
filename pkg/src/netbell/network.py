"""Network layout, operator selection, and the parity conditions.

A network has N independent sources distributed among K source-side
agents and M receivers. Sources are numbered 1..N and qubit j of source
i is the pair (i, j) with j in 1..n_i. Agents are numbered 1..K+M with
the first K on the source side; agent K+m is receiver m.

Source agent k holds sources partition[k-1]+1 .. partition[k] (a block
of consecutive source ids); its qubits from those sources are the ones
assigned to it, and every other qubit goes to some receiver.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from netbell.codes import CheckResult, SourceState, ValidationReport
from netbell.pauli import PauliString
from netbell.states import StateVector, tensor

STABILIZER_TOL = 1e-9


@dataclass(frozen=True)
class NetworkLayout:
    """Immutable wiring of sources, agents, and qubit custody."""

    sources: tuple[SourceState, ...]
    K: int
    M: int
    partition: tuple[int, ...]
    assignment: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "partition", tuple(int(e) for e in self.partition))
        triples = tuple(sorted((int(i), int(j), int(a)) for i, j, a in self.assignment))
        object.__setattr__(self, "assignment", triples)
        self._validate()

    def _validate(self) -> None:
        n_sources = len(self.sources)
        if self.K < 1 or self.M < 1:
            raise ValueError("need at least one source agent and one receiver")
        if len(self.partition) != self.K + 1:
            raise ValueError(
                f"partition needs K+1={self.K + 1} boundaries, got {len(self.partition)}"
            )
        if self.partition[0] != 0 or self.partition[-1] != n_sources:
            raise ValueError("partition must start at 0 and end at the source count")
        if any(a >= b for a, b in zip(self.partition, self.partition[1:])):
            raise ValueError("partition boundaries must be strictly increasing")

        expected = {
            (i + 1, j + 1)
            for i, src in enumerate(self.sources)
            for j in range(src.code.n)
        }
        seen = [(i, j) for i, j, _ in self.assignment]
        if len(seen) != len(set(seen)):
            raise ValueError("a qubit is assigned more than once")
        if set(seen) != expected:
            missing = sorted(expected - set(seen))
            extra = sorted(set(seen) - expected)
            raise ValueError(f"assignment mismatch: missing {missing}, unknown {extra}")
        for i, j, agent in self.assignment:
            if not 1 <= agent <= self.K + self.M:
                raise ValueError(f"qubit ({i},{j}) assigned to unknown agent {agent}")
            if agent <= self.K and agent != self.holder(i):
                raise ValueError(
                    f"qubit ({i},{j}) assigned to source agent {agent}, "
                    f"but source {i} is held by agent {self.holder(i)}"
                )
        for i in range(1, n_sources + 1):
            if not any(s == i and a == self.holder(i) for s, _, a in self.assignment):
                raise ValueError(f"source {i} gives no qubit to its source agent")
        held = {a for _, _, a in self.assignment}
        for agent in range(self.K + 1, self.K + self.M + 1):
            if agent not in held:
                raise ValueError(
                    f"receiver {self.agent_label(agent)} holds no qubits"
                )

    # -- structure ------------------------------------------------------

    @property
    def N(self) -> int:
        return len(self.sources)

    @cached_property
    def source_sizes(self) -> tuple[int, ...]:
        return tuple(src.code.n for src in self.sources)

    @cached_property
    def total_qubits(self) -> int:
        return sum(self.source_sizes)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        acc, out = 0, []
        for size in self.source_sizes:
            out.append(acc)
            acc += size
        return tuple(out)

    def global_index(self, i: int, j: int) -> int:
        """0-based statevector position of qubit (i, j)."""
        if not 1 <= i <= self.N or not 1 <= j <= self.source_sizes[i - 1]:
            raise ValueError(f"no qubit ({i},{j}) in this layout")
        return self.offsets[i - 1] + (j - 1)

    def holder(self, i: int) -> int:
        """The source agent whose block contains source i."""
        for k in range(1, self.K + 1):
            if self.partition[k - 1] < i <= self.partition[k]:
                return k
        raise ValueError(f"source {i} outside the partition")

    @cached_property
    def _agent_of(self) -> dict[tuple[int, int], int]:
        return {(i, j): a for i, j, a in self.assignment}

    def agent_of(self, i: int, j: int) -> int:
        return self._agent_of[(i, j)]

    def qubits_of(self, agent: int) -> tuple[tuple[int, int], ...]:
        return tuple((i, j) for i, j, a in self.assignment if a == agent)

    @property
    def source_agents(self) -> tuple[int, ...]:
        return tuple(range(1, self.K + 1))

    @property
    def receivers(self) -> tuple[int, ...]:
        return tuple(range(self.K + 1, self.K + self.M + 1))

    def is_receiver(self, agent: int) -> bool:
        return agent > self.K

    def agent_label(self, agent: int) -> str:
        return f"S{agent}" if agent <= self.K else f"R{agent - self.K}"

    # -- quantum state --------------------------------------------------

    @cached_property
    def state(self) -> StateVector:
        """Joint state: tensor product of source states in source-id order."""
        return tensor([src.state for src in self.sources])

    def embed(self, i: int, op: PauliString) -> PauliString:
        """Lift a source-i operator to the full qubit register."""
        if op.n != self.source_sizes[i - 1]:
            raise ValueError(
                f"operator on {op.n} qubits does not fit source {i} "
                f"of size {self.source_sizes[i - 1]}"
            )
        positions = [self.global_index(i, j) for j in range(1, op.n + 1)]
        return op.embed(positions, self.total_qubits)


@dataclass(frozen=True)
class OperatorSelection:
    """Per-source operator choices: stabilizing g, partner h, optional
    phase-flip representative h_prime for the tilted construction."""

    g: tuple[PauliString, ...]
    h: tuple[PauliString, ...]
    h_prime: tuple[PauliString | None, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(self.g))
        object.__setattr__(self, "h", tuple(self.h))
        prime = tuple(self.h_prime) if self.h_prime else (None,) * len(self.g)
        object.__setattr__(self, "h_prime", prime)
        if len(self.h) != len(self.g) or len(self.h_prime) != len(self.g):
            raise ValueError("selection needs one g, h, h_prime slot per source")

    @property
    def N(self) -> int:
        return len(self.g)

    def for_source(self, i: int) -> tuple[PauliString, PauliString, PauliString | None]:
        return self.g[i - 1], self.h[i - 1], self.h_prime[i - 1]

    @property
    def tilt_sources(self) -> tuple[int, ...]:
        """Source ids carrying an h_prime (the tilted product membership)."""
        return tuple(i + 1 for i, p in enumerate(self.h_prime) if p is not None)


@dataclass(frozen=True)
class Classification:
    """Per-qubit anticommutation structure of the (g, h) letter pairs."""

    d_sets: tuple[tuple[int, ...], ...]
    h_sets: tuple[tuple[int, ...], ...]
    idle: tuple[tuple[int, int], ...]
    o_letters: tuple[tuple[tuple[int, int], str], ...]

    def delta(self, i: int, j: int) -> bool:
        """True when the (g, h) letters at qubit (i, j) anticommute."""
        return j in self.d_sets[i - 1]

    def o_letter(self, i: int, j: int) -> str | None:
        """The repeatedly measured letter on an idle qubit, if any."""
        return dict(self.o_letters).get((i, j))

    def is_idle(self, i: int, j: int) -> bool:
        return (i, j) in self.idle


def _letters_anticommute(a: str, b: str) -> bool:
    return a != "I" and b != "I" and a != b


def classify(layout: NetworkLayout, selection: OperatorSelection) -> Classification:
    """Split each source's qubits into anticommuting (D) and commuting (H)
    letter positions, and mark receiver-held commuting qubits as idle."""
    if selection.N != layout.N:
        raise ValueError(
            f"selection covers {selection.N} sources, layout has {layout.N}"
        )
    for i in range(1, layout.N + 1):
        g, h, _ = selection.for_source(i)
        if g.n != layout.source_sizes[i - 1] or h.n != layout.source_sizes[i - 1]:
            raise ValueError(f"selection operators do not match source {i} size")

    d_sets, h_sets, idle, o_letters = [], [], [], []
    for i in range(1, layout.N + 1):
        g, h, _ = selection.for_source(i)
        d, hh = [], []
        for j in range(1, g.n + 1):
            s_letter, t_letter = g.letter(j - 1), h.letter(j - 1)
            if _letters_anticommute(s_letter, t_letter):
                d.append(j)
            else:
                hh.append(j)
                if layout.is_receiver(layout.agent_of(i, j)):
                    idle.append((i, j))
                    nonidentity = s_letter if s_letter != "I" else t_letter
                    if nonidentity != "I":
                        o_letters.append(((i, j), nonidentity))
        d_sets.append(tuple(d))
        h_sets.append(tuple(hh))
    return Classification(
        d_sets=tuple(d_sets),
        h_sets=tuple(h_sets),
        idle=tuple(idle),
        o_letters=tuple(o_letters),
    )


@dataclass(frozen=True)
class ParityReport:
    """Outcome of the anticommuting-count conditions, one fact per line.

    The per-source and per-source-agent facts gate observable synthesis:
    without them the A pairs are not involutions. The receiver facts
    decide whether the B pair anticommutes; layouts that fail them can
    still be evaluated when commuting B pairs are explicitly allowed.
    """

    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def source_side_passed(self) -> bool:
        return all(
            c.passed for c in self.checks if c.name.startswith(("source", "agent S"))
        )

    @property
    def receiver_side_passed(self) -> bool:
        return all(
            c.passed
            for c in self.checks
            if c.name.startswith(("agent R", "agent count"))
        )

    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def __str__(self) -> str:
        return "\n".join(str(c) for c in self.checks)


def check_parity(layout: NetworkLayout, classification: Classification) -> ParityReport:
    """Evaluate every anticommuting-count condition; never raises."""
    checks: list[CheckResult] = []
    for i in range(1, layout.N + 1):
        count = len(classification.d_sets[i - 1])
        checks.append(
            CheckResult(
                f"source {i} anticommuting count even",
                count % 2 == 0,
                f"count={count}",
            )
        )
    for agent in layout.source_agents:
        total = sum(
            classification.delta(i, j) for i, j in layout.qubits_of(agent)
        )
        checks.append(
            CheckResult(
                f"agent {layout.agent_label(agent)} anticommuting count odd",
                total % 2 == 1,
                f"count={total}",
            )
        )
    for agent in layout.receivers:
        total = sum(
            classification.delta(i, j) for i, j in layout.qubits_of(agent)
        )
        checks.append(
            CheckResult(
                f"agent {layout.agent_label(agent)} anticommuting count odd",
                total % 2 == 1,
                f"count={total}",
            )
        )
    checks.append(
        CheckResult(
            "agent count K+M even",
            (layout.K + layout.M) % 2 == 0,
            f"K+M={layout.K + layout.M}",
        )
    )
    return ParityReport(tuple(checks))


def check_selection(layout: NetworkLayout, selection: OperatorSelection):
    """Structural checks of the operator choices against the layout:
    sizes, commutation, hermiticity, and that each g fixes its source."""
    checks: list[CheckResult] = []
    checks.append(
        CheckResult(
            "one operator slot per source",
            selection.N == layout.N,
            f"{selection.N} slots for {layout.N} sources",
        )
    )
    if selection.N != layout.N:
        return ValidationReport(tuple(checks))

    for i in range(1, layout.N + 1):
        g, h, prime = selection.for_source(i)
        size = layout.source_sizes[i - 1]
        sized = g.n == size and h.n == size and (prime is None or prime.n == size)
        checks.append(CheckResult(f"source {i} operator sizes", sized, f"n={size}"))
        if not sized:
            continue
        checks.append(
            CheckResult(
                f"source {i} g and h commute",
                g.commutes(h),
                f"{g} vs {h}",
            )
        )
        hermitian = g.is_hermitian() and h.is_hermitian() and (
            prime is None or prime.is_hermitian()
        )
        checks.append(CheckResult(f"source {i} operator phases real", hermitian))
        # Agent restrictions always come out with a plus sign, so their
        # product only reassembles g (or h) when the sign lives nowhere.
        checks.append(
            CheckResult(
                f"source {i} g and h carry plus signs",
                g.phase == 1 and h.phase == 1,
                f"g phase {g.phase}, h phase {h.phase}",
            )
        )
        if prime is not None:
            checks.append(
                CheckResult(
                    f"source {i} g and h_prime commute",
                    g.commutes(prime),
                    f"{g} vs {prime}",
                )
            )
        if hermitian:
            value = layout.sources[i - 1].state.expectation(g)
            checks.append(
                CheckResult(
                    f"source {i} g stabilizes the source state",
                    abs(value - 1.0) < STABILIZER_TOL,
                    f"expectation {value:+.6f}",
                )
            )
    return ValidationReport(tuple(checks))
