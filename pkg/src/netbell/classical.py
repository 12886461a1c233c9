"""Classical certification of the network bounds.

Hidden-variable strategies assign each source a discrete label drawn
from a product distribution; every agent answers with a deterministic
+/-1 table over its settings and the labels it can see.  The
deterministic scan enumerates response tables together with point-mass
label assignments and maximizes the same objective the quantum engine
reports; a stochastic pass then probes mixed label distributions with
random restarts and hill climbing.  The scan is falsification pressure
for the analytic bound, not a search for new physics: the objective
must never come out above 1 (or beta + 1 tilted).
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from netbell.states import make_rng

# The deterministic scan is exact arithmetic, so its tolerance is pure
# roundoff; the stochastic pass is allowed refinement noise but no real
# excess.
BOUND_TOL = 1e-12
REFINE_TOL = 1e-9
# Enumerations past this size get a warning even when the budget allows
# them; the default budget refuses them outright.
WARN_LIMIT = 10**8
DEFAULT_BUDGET = 10**8
# Below this many evaluations the process pool costs more than it saves.
PARALLEL_THRESHOLD = 4_000_000


class BoundViolation(RuntimeError):
    """A strategy scored above the classical bound; carries the strategy."""

    def __init__(self, message: str, strategy: "HiddenStrategy"):
        super().__init__(message)
        self.strategy = strategy


@dataclass(frozen=True)
class NetworkShape:
    """Who sees which source labels: the causal skeleton of a layout.

    partition follows the layout convention (source agent s serves
    sources partition[s-1]+1 .. partition[s]); reach lists, per
    receiver, the sources whose qubits it holds.
    """

    k: int
    m: int
    n: int
    partition: tuple[int, ...]
    reach: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "partition", tuple(self.partition))
        object.__setattr__(
            self, "reach", tuple(tuple(sorted(r)) for r in self.reach)
        )
        if self.k < 1 or self.m < 1 or self.n < 1:
            raise ValueError("k, m, n must all be at least 1")
        if (
            len(self.partition) != self.k + 1
            or self.partition[0] != 0
            or self.partition[-1] != self.n
            or any(a >= b for a, b in zip(self.partition, self.partition[1:]))
        ):
            raise ValueError(
                "partition must rise strictly from 0 to n with one step per "
                "source agent"
            )
        if len(self.reach) != self.m:
            raise ValueError(f"need one reach entry per receiver, got {len(self.reach)}")
        for sources in self.reach:
            if len(set(sources)) != len(sources) or any(
                not 1 <= i <= self.n for i in sources
            ):
                raise ValueError(f"reach entry {sources} is not a set of source ids")

    @classmethod
    def from_layout(cls, layout) -> "NetworkShape":
        reach = []
        for agent in layout.receivers:
            reach.append(tuple(sorted({i for i, _ in layout.qubits_of(agent)})))
        return cls(
            k=layout.K,
            m=layout.M,
            n=layout.N,
            partition=layout.partition,
            reach=tuple(reach),
        )

    def block(self, s: int) -> tuple[int, ...]:
        """Sources served by source agent s (1-based)."""
        return tuple(range(self.partition[s - 1] + 1, self.partition[s] + 1))


def _flat(sources: tuple[int, ...], labels, alphabet) -> int:
    """Row-major index of the visible label combination."""
    index = 0
    for i in sources:
        index = index * alphabet[i - 1] + labels[i - 1]
    return index


def _decode_labels(value: int, alphabet) -> tuple[int, ...]:
    labels = []
    for size in reversed(alphabet):
        labels.append(value % size)
        value //= size
    return tuple(reversed(labels))


def _normalize_alphabet(shape: NetworkShape, alphabet) -> tuple[int, ...]:
    if isinstance(alphabet, int):
        alphabet = (alphabet,) * shape.n
    alphabet = tuple(int(size) for size in alphabet)
    if len(alphabet) != shape.n or any(size < 1 for size in alphabet):
        raise ValueError("alphabet needs one positive size per source")
    return alphabet


@dataclass(frozen=True)
class HiddenStrategy:
    """One hidden-variable strategy: label distributions plus response tables.

    a_tables[s][x][c] is source agent s's answer to setting x when its
    visible labels flatten to column c; b_tables mirrors that for
    receivers; p_tables (tilted runs only) is the receiver's answer for
    the phase-flip product, setting-free.  Locality is structural: a
    table can only be indexed by the labels its agent can see.
    """

    shape: NetworkShape
    alphabet: tuple[int, ...]
    weights: tuple[tuple[float, ...], ...]
    a_tables: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    b_tables: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    p_tables: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        shape = self.shape
        object.__setattr__(self, "alphabet", _normalize_alphabet(shape, self.alphabet))
        object.__setattr__(
            self, "weights", tuple(tuple(map(float, w)) for w in self.weights)
        )
        object.__setattr__(
            self,
            "a_tables",
            tuple((tuple(t[0]), tuple(t[1])) for t in self.a_tables),
        )
        object.__setattr__(
            self,
            "b_tables",
            tuple((tuple(t[0]), tuple(t[1])) for t in self.b_tables),
        )
        if self.p_tables is not None:
            object.__setattr__(
                self, "p_tables", tuple(tuple(t) for t in self.p_tables)
            )

        if len(self.weights) != shape.n:
            raise ValueError("need one weight vector per source")
        for i, w in enumerate(self.weights, start=1):
            if len(w) != self.alphabet[i - 1]:
                raise ValueError(f"source {i} weights do not match its alphabet")
            if any(p < 0 for p in w) or abs(sum(w) - 1.0) > 1e-9:
                raise ValueError(f"source {i} weights are not a distribution")
        if len(self.a_tables) != shape.k or len(self.b_tables) != shape.m:
            raise ValueError("need one table per source agent and per receiver")
        for s, table in enumerate(self.a_tables, start=1):
            self._check_table(table, self.block_size(s), f"source agent {s}")
        for m, table in enumerate(self.b_tables, start=1):
            self._check_table(table, self.reach_size(m), f"receiver {m}")
        if self.p_tables is not None:
            if len(self.p_tables) != shape.m:
                raise ValueError("need one p table per receiver")
            for m, column in enumerate(self.p_tables, start=1):
                self._check_table((column,), self.reach_size(m), f"receiver {m} p")

    @staticmethod
    def _check_table(table, width: int, who: str) -> None:
        for row in table:
            if len(row) != width:
                raise ValueError(f"{who} table width {len(row)}, expected {width}")
            if any(entry not in (-1, 1) for entry in row):
                raise ValueError(f"{who} table entries must be -1 or +1")

    def block_size(self, s: int) -> int:
        return math.prod(self.alphabet[i - 1] for i in self.shape.block(s))

    def reach_size(self, m: int) -> int:
        return math.prod(self.alphabet[i - 1] for i in self.shape.reach[m - 1])

    def to_json(self) -> dict:
        data = {
            "shape": {
                "k": self.shape.k,
                "m": self.shape.m,
                "n": self.shape.n,
                "partition": list(self.shape.partition),
                "reach": [list(r) for r in self.shape.reach],
            },
            "alphabet": list(self.alphabet),
            "weights": [list(w) for w in self.weights],
            "a_tables": [[list(row) for row in t] for t in self.a_tables],
            "b_tables": [[list(row) for row in t] for t in self.b_tables],
        }
        if self.p_tables is not None:
            data["p_tables"] = [list(t) for t in self.p_tables]
        return data

    @classmethod
    def from_json(cls, data: dict) -> "HiddenStrategy":
        shape = NetworkShape(
            k=data["shape"]["k"],
            m=data["shape"]["m"],
            n=data["shape"]["n"],
            partition=tuple(data["shape"]["partition"]),
            reach=tuple(tuple(r) for r in data["shape"]["reach"]),
        )
        p_tables = data.get("p_tables")
        return cls(
            shape=shape,
            alphabet=tuple(data["alphabet"]),
            weights=tuple(tuple(w) for w in data["weights"]),
            a_tables=tuple(tuple(tuple(row) for row in t) for t in data["a_tables"]),
            b_tables=tuple(tuple(tuple(row) for row in t) for t in data["b_tables"]),
            p_tables=tuple(tuple(t) for t in p_tables) if p_tables else None,
        )


@dataclass(frozen=True)
class ClassicalCorrelators:
    i_value: float
    j_value: float
    p_value: float | None = None


def correlators(strategy: HiddenStrategy) -> ClassicalCorrelators:
    """Exact I, J (and P when present) by summing the label grid."""
    shape = strategy.shape
    alphabet = strategy.alphabet
    blocks = [shape.block(s) for s in range(1, shape.k + 1)]
    i_total = 0.0
    j_total = 0.0
    p_total = 0.0 if strategy.p_tables is not None else None
    for labels in itertools.product(*(range(size) for size in alphabet)):
        weight = math.prod(
            strategy.weights[i][labels[i]] for i in range(shape.n)
        )
        if weight == 0.0:
            continue
        half_sum = 1.0
        half_diff = 1.0
        for s, block in enumerate(blocks):
            column = _flat(block, labels, alphabet)
            a0 = strategy.a_tables[s][0][column]
            a1 = strategy.a_tables[s][1][column]
            half_sum *= (a0 + a1) / 2
            half_diff *= (a0 - a1) / 2
        b0 = 1
        b1 = 1
        p = 1
        for m in range(shape.m):
            column = _flat(shape.reach[m], labels, alphabet)
            b0 *= strategy.b_tables[m][0][column]
            b1 *= strategy.b_tables[m][1][column]
            if strategy.p_tables is not None:
                p *= strategy.p_tables[m][column]
        i_total += weight * half_sum * b0
        j_total += weight * half_diff * b1
        if p_total is not None:
            p_total += weight * p
    return ClassicalCorrelators(i_total, j_total, p_total)


def bell_value(corr: ClassicalCorrelators, k: int) -> float:
    return abs(corr.i_value) ** (1.0 / k) + abs(corr.j_value) ** (1.0 / k)


def objective_value(corr: ClassicalCorrelators, k: int, beta: float | None) -> float:
    if beta is None:
        return bell_value(corr, k)
    if corr.p_value is None:
        raise ValueError("tilted objective needs a strategy with p tables")
    return beta * abs(corr.p_value) ** (1.0 / k) + bell_value(corr, k)


@dataclass(frozen=True)
class MahlerChain:
    """Stages of the classical bounding chain for one strategy."""

    value: float
    factored: float
    product_bound: float

    @property
    def holds(self) -> bool:
        return (
            self.value <= self.factored + BOUND_TOL
            and self.factored <= self.product_bound + BOUND_TOL
            and self.product_bound <= 1.0 + BOUND_TOL
        )


def mahler_chain(strategy: HiddenStrategy) -> MahlerChain:
    """Numeric check of the bounding chain on one strategy.

    value is the objective; factored bounds it using per-agent averages
    u_s = E|<A0+A1>/2| and v_s = E|<A0-A1>/2| (receiver answers only
    contribute their modulus 1); product_bound applies the product
    inequality, and u_s + v_s = 1 pointwise pins it at 1.
    """
    shape = strategy.shape
    alphabet = strategy.alphabet
    k = shape.k
    corr = correlators(strategy)
    u = [0.0] * k
    v = [0.0] * k
    for s in range(1, k + 1):
        block = shape.block(s)
        for labels in itertools.product(
            *(range(alphabet[i - 1]) for i in block)
        ):
            weight = math.prod(
                strategy.weights[i - 1][value]
                for i, value in zip(block, labels)
            )
            full = [0] * shape.n
            for i, value in zip(block, labels):
                full[i - 1] = value
            column = _flat(block, full, alphabet)
            a0 = strategy.a_tables[s - 1][0][column]
            a1 = strategy.a_tables[s - 1][1][column]
            u[s - 1] += weight * abs(a0 + a1) / 2
            v[s - 1] += weight * abs(a0 - a1) / 2
    factored = (
        math.prod(u) ** (1.0 / k) + math.prod(v) ** (1.0 / k)
    )
    product_bound = math.prod(
        (u[s] + v[s]) ** (1.0 / k) for s in range(k)
    )
    return MahlerChain(
        value=bell_value(corr, k),
        factored=factored,
        product_bound=product_bound,
    )


def _table_bits(shape: NetworkShape, alphabet, tilted: bool):
    """Bit widths of every enumerated table, in scan order."""
    block_sizes = [
        math.prod(alphabet[i - 1] for i in shape.block(s))
        for s in range(1, shape.k + 1)
    ]
    reach_sizes = [
        math.prod(alphabet[i - 1] for i in reach) for reach in shape.reach
    ]
    widths = [2 * size for size in block_sizes]
    widths += [2 * size for size in reach_sizes]
    if tilted:
        widths += list(reach_sizes)
    return block_sizes, reach_sizes, widths


def scan_size(shape: NetworkShape, alphabet, *, tilted: bool = False) -> int:
    """How many (tables, point-label) combinations the full scan visits."""
    alphabet = _normalize_alphabet(shape, alphabet)
    _, _, widths = _table_bits(shape, alphabet, tilted)
    tables = math.prod(1 << w for w in widths)
    return tables * math.prod(alphabet)


def _scan_chunk(shape, alphabet, beta, label_lo, label_hi):
    """Scan all response tables for a slice of point-label assignments.

    Returns (best value, best key, combos scanned); the key is
    (label index, table integers) so ties resolve to the earliest
    combination in enumeration order no matter how the space is split.
    """
    tilted = beta is not None
    k, m = shape.k, shape.m
    blocks = [shape.block(s) for s in range(1, k + 1)]
    block_sizes, reach_sizes, widths = _table_bits(shape, alphabet, tilted)
    root = 1.0 / k
    best_value = -1.0
    best_key = None
    scanned = 0
    for label_index in range(label_lo, label_hi):
        labels = _decode_labels(label_index, alphabet)
        a_cols = [_flat(block, labels, alphabet) for block in blocks]
        b_cols = [_flat(reach, labels, alphabet) for reach in shape.reach]
        for combo in itertools.product(*(range(1 << w) for w in widths)):
            scanned += 1
            i_sign = 1
            j_sign = 1
            for s in range(k):
                bits = combo[s]
                a0 = 1 - 2 * ((bits >> a_cols[s]) & 1)
                a1 = 1 - 2 * ((bits >> (block_sizes[s] + a_cols[s])) & 1)
                i_sign *= (a0 + a1) // 2
                j_sign *= (a0 - a1) // 2
            for r in range(m):
                bits = combo[k + r]
                i_sign *= 1 - 2 * ((bits >> b_cols[r]) & 1)
                j_sign *= 1 - 2 * ((bits >> (reach_sizes[r] + b_cols[r])) & 1)
            value = abs(i_sign) ** root + abs(j_sign) ** root
            if tilted:
                p_sign = 1
                for r in range(m):
                    bits = combo[k + m + r]
                    p_sign *= 1 - 2 * ((bits >> b_cols[r]) & 1)
                value += beta * abs(p_sign) ** root
            if value > best_value:
                best_value = value
                best_key = (label_index, combo)
    return best_value, best_key, scanned


def _strategy_from_key(shape, alphabet, beta, key) -> HiddenStrategy:
    """Decode a scan key back into a point-mass strategy."""
    tilted = beta is not None
    label_index, combo = key
    labels = _decode_labels(label_index, alphabet)
    block_sizes, reach_sizes, _ = _table_bits(shape, alphabet, tilted)

    def rows(bits, width, count):
        flat = [1 - 2 * ((bits >> e) & 1) for e in range(width * count)]
        return tuple(
            tuple(flat[row * width : (row + 1) * width]) for row in range(count)
        )

    a_tables = tuple(
        rows(combo[s], block_sizes[s], 2) for s in range(shape.k)
    )
    b_tables = tuple(
        rows(combo[shape.k + r], reach_sizes[r], 2) for r in range(shape.m)
    )
    p_tables = None
    if tilted:
        p_tables = tuple(
            rows(combo[shape.k + shape.m + r], reach_sizes[r], 1)[0]
            for r in range(shape.m)
        )
    weights = tuple(
        tuple(1.0 if v == labels[i] else 0.0 for v in range(alphabet[i]))
        for i in range(shape.n)
    )
    return HiddenStrategy(
        shape=shape,
        alphabet=alphabet,
        weights=weights,
        a_tables=a_tables,
        b_tables=b_tables,
        p_tables=p_tables,
    )


def _scan_reachable(shape, alphabet, beta):
    """Equivalent maximum over point-label behaviors.

    With a point-mass label assignment the objective only reads each
    table at one column, so scanning the response values at that column
    reaches exactly the same maximum as scanning whole tables.  Used
    when the literal table space exceeds the budget.
    """
    tilted = beta is not None
    k, m = shape.k, shape.m
    root = 1.0 / k
    pairs = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    label_total = math.prod(alphabet)
    best = (-1.0, None)
    scanned = 0
    p_choices = [(1,), (-1,)] if tilted else [()]
    for label_index in range(label_total):
        for a_choice in itertools.product(pairs, repeat=k):
            for b_choice in itertools.product(pairs, repeat=m):
                for p_choice in itertools.product(p_choices, repeat=m):
                    scanned += 1
                    i_sign = 1
                    j_sign = 1
                    for a0, a1 in a_choice:
                        i_sign *= (a0 + a1) // 2
                        j_sign *= (a0 - a1) // 2
                    for b0, b1 in b_choice:
                        i_sign *= b0
                        j_sign *= b1
                    value = abs(i_sign) ** root + abs(j_sign) ** root
                    if tilted:
                        p_sign = math.prod(p[0] for p in p_choice)
                        value += beta * abs(p_sign) ** root
                    if value > best[0]:
                        best = (value, (label_index, a_choice, b_choice, p_choice))
    value, (label_index, a_choice, b_choice, p_choice) = best
    labels = _decode_labels(label_index, alphabet)
    block_sizes, reach_sizes, _ = _table_bits(shape, alphabet, tilted)
    a_tables = tuple(
        ((a0,) * block_sizes[s], (a1,) * block_sizes[s])
        for s, (a0, a1) in enumerate(a_choice)
    )
    b_tables = tuple(
        ((b0,) * reach_sizes[r], (b1,) * reach_sizes[r])
        for r, (b0, b1) in enumerate(b_choice)
    )
    p_tables = (
        tuple((p[0],) * reach_sizes[r] for r, p in enumerate(p_choice))
        if tilted
        else None
    )
    weights = tuple(
        tuple(1.0 if v == labels[i] else 0.0 for v in range(alphabet[i]))
        for i in range(shape.n)
    )
    strategy = HiddenStrategy(
        shape=shape,
        alphabet=alphabet,
        weights=weights,
        a_tables=a_tables,
        b_tables=b_tables,
        p_tables=p_tables,
    )
    return value, strategy, scanned


def _random_tables(shape, alphabet, tilted, rng):
    block_sizes, reach_sizes, _ = _table_bits(shape, alphabet, tilted)

    def row(width):
        return tuple(int(v) for v in rng.choice((-1, 1), size=width))

    a_tables = tuple((row(b), row(b)) for b in block_sizes)
    b_tables = tuple((row(r), row(r)) for r in reach_sizes)
    p_tables = tuple(row(r) for r in reach_sizes) if tilted else None
    return a_tables, b_tables, p_tables


def _refine(shape, alphabet, beta, seed_strategy, rng, draws, steps):
    """Stochastic pass: random product label distributions, hill-climbed.

    Restarts alternate between the deterministic argmax tables and fresh
    random tables; each restart greedily flips table entries, then walks
    the label weights toward random vertices, keeping improvements.
    """
    tilted = beta is not None
    k = shape.k

    def score(strategy):
        return objective_value(correlators(strategy), k, beta)

    best_value = score(seed_strategy)
    best_strategy = seed_strategy
    for draw in range(draws):
        if draw == 0:
            a_tables, b_tables, p_tables = (
                seed_strategy.a_tables,
                seed_strategy.b_tables,
                seed_strategy.p_tables,
            )
        else:
            a_tables, b_tables, p_tables = _random_tables(
                shape, alphabet, tilted, rng
            )
        weights = tuple(
            tuple(rng.dirichlet(np.ones(size))) for size in alphabet
        )
        current = HiddenStrategy(
            shape=shape,
            alphabet=alphabet,
            weights=weights,
            a_tables=a_tables,
            b_tables=b_tables,
            p_tables=p_tables,
        )
        current_value = score(current)

        improved = True
        sweeps = 0
        while improved and sweeps < 4:
            improved = False
            sweeps += 1
            tables = current.to_json()
            for group in ("a_tables", "b_tables", "p_tables"):
                rows = tables.get(group)
                if rows is None:
                    continue
                for table in rows:
                    table_rows = [table] if group == "p_tables" else table
                    for row in table_rows:
                        for e in range(len(row)):
                            row[e] = -row[e]
                            candidate = HiddenStrategy.from_json(tables)
                            candidate_value = score(candidate)
                            if candidate_value > current_value + 1e-15:
                                current, current_value = candidate, candidate_value
                                improved = True
                            else:
                                row[e] = -row[e]

        for _ in range(steps):
            source = int(rng.integers(shape.n))
            size = alphabet[source]
            vertex = int(rng.integers(size))
            eta = float(rng.uniform(0.1, 1.0))
            mixed = [
                (1 - eta) * w + (eta if v == vertex else 0.0)
                for v, w in enumerate(current.weights[source])
            ]
            total = sum(mixed)
            new_weights = list(current.weights)
            new_weights[source] = tuple(w / total for w in mixed)
            candidate = HiddenStrategy(
                shape=shape,
                alphabet=alphabet,
                weights=tuple(new_weights),
                a_tables=current.a_tables,
                b_tables=current.b_tables,
                p_tables=current.p_tables,
            )
            candidate_value = score(candidate)
            if candidate_value > current_value:
                current, current_value = candidate, candidate_value

        if current_value > best_value:
            best_value, best_strategy = current_value, current
    return best_value, best_strategy


@dataclass(frozen=True)
class ScanReport:
    """Result of the deterministic scan plus the stochastic pass."""

    value: float
    strategy: HiddenStrategy
    stochastic_value: float
    stochastic_strategy: HiddenStrategy
    mode: str
    scanned: int
    alphabet: tuple[int, ...]
    beta: float | None = None


def default_alphabet(shape: NetworkShape, *, tilted: bool = False, budget: int = DEFAULT_BUDGET) -> int:
    """Largest uniform label alphabet (at most 4) the full scan affords."""
    for size in (4, 3, 2):
        if scan_size(shape, size, tilted=tilted) <= budget:
            return size
    return 2


def max_deterministic(
    shape: NetworkShape,
    alphabet=None,
    *,
    beta: float | None = None,
    mode: str = "auto",
    budget: int = DEFAULT_BUDGET,
    seed: int | None = 0,
    refine_draws: int = 40,
    refine_steps: int = 60,
    processes: int | None = None,
) -> ScanReport:
    """Exhaustive deterministic maximum plus a stochastic refinement pass.

    mode "full" enumerates every response table literally; "reachable"
    enumerates response values at the active label column, which reaches
    the same maximum because unread table entries cannot move the
    objective; "auto" picks "full" when it fits the budget.  Chunks of
    the label space run concurrently when the scan is large; the result
    never depends on the chunking.
    """
    if beta is not None and beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    if mode not in ("auto", "full", "reachable"):
        raise ValueError(f"unknown scan mode {mode!r}")
    if alphabet is None:
        alphabet = default_alphabet(shape, tilted=beta is not None, budget=budget)
    alphabet = _normalize_alphabet(shape, alphabet)

    size = scan_size(shape, alphabet, tilted=beta is not None)
    if mode == "auto":
        mode = "full" if size <= budget else "reachable"
    if mode == "full":
        if size > budget:
            raise ValueError(
                f"full scan of {size:.3e} combinations exceeds the budget "
                f"of {budget:.3e}; shrink the alphabet or use reachable mode"
            )
        if size > WARN_LIMIT:
            warnings.warn(
                f"enumerating {size:.3e} strategy combinations", stacklevel=2
            )
        value, key, scanned = _run_full_scan(shape, alphabet, beta, size, processes)
        strategy = _strategy_from_key(shape, alphabet, beta, key)
    else:
        value, strategy, scanned = _scan_reachable(shape, alphabet, beta)

    rng = make_rng(seed)
    stochastic_value, stochastic_strategy = _refine(
        shape, alphabet, beta, strategy, rng, refine_draws, refine_steps
    )
    return ScanReport(
        value=value,
        strategy=strategy,
        stochastic_value=stochastic_value,
        stochastic_strategy=stochastic_strategy,
        mode=mode,
        scanned=scanned,
        alphabet=alphabet,
        beta=beta,
    )


def _run_full_scan(shape, alphabet, beta, size, processes):
    label_total = math.prod(alphabet)
    if processes is None:
        processes = 1 if size < PARALLEL_THRESHOLD else None
    if processes == 1 or label_total == 1:
        return _scan_chunk(shape, alphabet, beta, 0, label_total)

    chunks = []
    workers = processes
    step = max(1, label_total // (workers * 4 if workers else 16))
    starts = list(range(0, label_total, step))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_scan_chunk, shape, alphabet, beta, lo, min(lo + step, label_total))
            for lo in starts
        ]
        chunks = [f.result() for f in futures]
    best_value, best_key, scanned = -1.0, None, 0
    for value, key, count in chunks:
        scanned += count
        if value > best_value or (value == best_value and key < best_key):
            best_value, best_key = value, key
    return best_value, best_key, scanned


@dataclass(frozen=True)
class BoundReport:
    """Certification record: both maxima against the analytic bound."""

    deterministic_max: float
    stochastic_max: float
    classical_bound: float
    passed: bool
    scan: ScanReport


def verify_bound(
    shape: NetworkShape,
    alphabet=None,
    *,
    beta: float | None = None,
    seed: int | None = 0,
    **scan_options,
) -> BoundReport:
    """Certify the classical bound for one shape.

    Raises BoundViolation (carrying the offending strategy verbatim)
    when the deterministic maximum exceeds the bound or the stochastic
    pass exceeds the deterministic maximum.
    """
    scan = max_deterministic(shape, alphabet, beta=beta, seed=seed, **scan_options)
    bound = 1.0 if beta is None else beta + 1.0
    if scan.value > bound + BOUND_TOL:
        raise BoundViolation(
            f"deterministic strategy scored {scan.value:.12f} above the "
            f"classical bound {bound}: {json.dumps(scan.strategy.to_json())}",
            scan.strategy,
        )
    if scan.stochastic_value > scan.value + REFINE_TOL:
        raise BoundViolation(
            f"stochastic refinement scored {scan.stochastic_value:.12f} above "
            f"the deterministic maximum {scan.value:.12f}: "
            f"{json.dumps(scan.stochastic_strategy.to_json())}",
            scan.stochastic_strategy,
        )
    return BoundReport(
        deterministic_max=scan.value,
        stochastic_max=scan.stochastic_value,
        classical_bound=bound,
        passed=True,
        scan=scan,
    )
