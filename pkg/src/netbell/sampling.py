"""Finite-round sampling of network Bell experiments.

Rounds are simulated exactly rather than by per-round state collapse. For
each setting combination the commuting per-agent observables are rotated
into one shared computational-basis frame:

* a source agent's two-outcome observable cos(theta) S + (-1)^x sin(theta) T
  equals V S V^dag with V = exp(-(-1)^x (theta/2) ST), so applying V^dag
  (a real combination of the identity and the string ST) reduces it to the
  plain string S;
* every remaining measured string is then diagonalized letter by letter
  with single-qubit basis rotations (H for X, H S^dag for Y).

The squared amplitudes of the rotated state are the exact joint outcome
distribution, so rounds are drawn directly from it. Round counts per
setting combination follow one multinomial draw, which together with
independent draws inside each combination reproduces independent uniformly
chosen settings exactly.

Two acquisition strategies are supported. "direct-observable" measures each
agent's chosen observable as a whole (for tilted runs the receiver measures
the commuting grafted triple and the plain B0 outcome is recovered as a
product of its bits). "per-qubit-discard" measures every receiver qubit in
a single-qubit basis (the repeated letter on idle qubits) and multiplies
the relevant bits, discarding the rest. Both strategies share the same
estimators; they differ in which qubits are measured and in what the
per-round record contains.

Standard errors use the plug-in binomial variance per setting cell and the
delta method through the K-th roots; they are approximate (the phase-flip
estimate shares rounds with the correlator cells, and cells left empty by
the multinomial draw contribute a zero mean with a conservative unit
standard error).
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .network import NetworkLayout, OperatorSelection, classify
from .observables import ReceiverObservables, SourceObservables, TiltedBlock
from .pauli import PauliString
from .states import StateVector, make_rng

MODES = ("direct-observable", "per-qubit-discard")

PROB_TOL = 1e-9

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
_S_DAG = np.array([[1.0, 0.0], [0.0, -1.0j]], dtype=complex)
_BASIS_ROTATION = {"X": _H, "Y": _H @ _S_DAG, "Z": None}


@dataclass(frozen=True)
class RunConfig:
    """How many rounds to draw, from which seed, with which strategy.

    setting_weights, when given, lists one nonnegative weight per setting
    combination in lexicographic (x bits, then y bits) order; the default
    is uniform.
    """

    rounds: int
    seed: int | None = None
    strategy: str = "direct-observable"
    setting_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError(f"rounds must be at least 1, got {self.rounds}")
        if self.strategy not in MODES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; expected one of {MODES}"
            )
        if self.setting_weights is not None:
            weights = tuple(float(w) for w in self.setting_weights)
            if any(w < 0 for w in weights) or sum(weights) <= 0:
                raise ValueError("setting weights must be nonnegative with a positive sum")
            object.__setattr__(self, "setting_weights", weights)


@dataclass(frozen=True)
class SettingTally:
    """Counts and outcome sums for one setting combination."""

    x: tuple[int, ...]
    y: tuple[int, ...]
    rounds: int
    product_sum: int
    p_sum: int | None

    @property
    def product_mean(self) -> float:
        return self.product_sum / self.rounds if self.rounds else 0.0

    @property
    def p_mean(self) -> float | None:
        if self.p_sum is None:
            return None
        return self.p_sum / self.rounds if self.rounds else 0.0

    def as_dict(self) -> dict:
        return {
            "x": "".join(str(b) for b in self.x),
            "y": "".join(str(b) for b in self.y),
            "rounds": self.rounds,
            "product_mean": self.product_mean,
            "p_mean": self.p_mean,
        }


@dataclass(frozen=True)
class TallyReport:
    """Estimates from one sampling run, with the seed echoed back."""

    mode: str
    rounds: int
    seed: int | None
    k: int
    tallies: tuple[SettingTally, ...]
    i_estimate: float
    i_se: float
    j_estimate: float
    j_se: float
    p_estimate: float | None
    p_se: float | None
    beta: float | None
    value_estimate: float
    value_se: float | None
    g_estimate: float | None
    g_se: float | None

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "rounds": self.rounds,
            "seed": self.seed,
            "K": self.k,
            "I": self.i_estimate,
            "I_se": self.i_se,
            "J": self.j_estimate,
            "J_se": self.j_se,
            "P": self.p_estimate,
            "P_se": self.p_se,
            "beta": self.beta,
            "value": self.value_estimate,
            "value_se": self.value_se,
            "G": self.g_estimate,
            "G_se": self.g_se,
            "tallies": [t.as_dict() for t in self.tallies],
        }


# ----------------------------------------------------------------------
# measurement frames


@dataclass(frozen=True)
class _Mask:
    """Bit mask over basis-index bits plus the string's real sign."""

    bits: int
    sign: int


@dataclass(frozen=True)
class _Frame:
    """One setting combination rotated into the computational basis."""

    probabilities: np.ndarray
    source_masks: tuple[_Mask, ...]
    receiver_masks: tuple[_Mask, ...]
    p_masks: tuple[_Mask, ...] | None
    measured_qubits: tuple[tuple[int, int], ...]
    qubit_masks: tuple[_Mask, ...]


def _parity(values: np.ndarray) -> np.ndarray:
    v = values.astype(np.int64, copy=True)
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1


def _string_mask(layout: NetworkLayout, op: PauliString) -> _Mask:
    phase = op.phase
    if phase.imag != 0 or phase.real not in (1.0, -1.0):
        raise ValueError(f"measured string must carry a real sign, got phase {phase}")
    n = layout.total_qubits
    bits = 0
    for q in op.support:
        bits |= 1 << (n - 1 - q)
    return _Mask(bits=bits, sign=int(phase.real))


def _mask_outcomes(indices: np.ndarray, mask: _Mask) -> np.ndarray:
    return mask.sign * (1 - 2 * _parity(indices & mask.bits))


def _apply_one_qubit(amps: np.ndarray, n: int, q: int, gate: np.ndarray) -> np.ndarray:
    # Qubit q is bit (n-1-q) of the basis index, so axis sizes split at q.
    left = 1 << q
    right = 1 << (n - 1 - q)
    return np.einsum("ab,ibj->iaj", gate, amps.reshape(left, 2, right)).reshape(-1)


def _add_letters(target: dict[int, str], op: PauliString, where: str) -> None:
    for q in op.support:
        letter = op.letter(q)
        if target.setdefault(q, letter) != letter:
            raise RuntimeError(
                f"{where}: qubit {q} would be measured in both "
                f"{target[q]} and {letter} bases"
            )


def _build_frame(
    layout: NetworkLayout,
    classification,
    sources: tuple[SourceObservables, ...],
    receivers: tuple[ReceiverObservables, ...],
    x: tuple[int, ...],
    y: tuple[int, ...],
    mode: str,
    tilt: TiltedBlock | None,
) -> _Frame:
    n = layout.total_qubits
    state = layout.state

    # Rotate each source observable cos(theta) S +/- sin(theta) T onto S.
    amps = state.amplitudes
    for xk, src in zip(x, sources):
        w = src.s_global * src.t_global
        half = src.theta / 2.0
        sign = 1.0 if xk == 0 else -1.0
        rotated = math.cos(half) * amps + sign * math.sin(half) * StateVector(
            amps
        ).apply(w).amplitudes
        amps = rotated

    letters: dict[int, str] = {}
    for src in sources:
        _add_letters(letters, src.s_global, f"source agent {src.agent}")

    tilted_now = tilt is not None and all(b == 0 for b in y)
    p_masks: list[_Mask] | None = [] if tilted_now else None

    for pos_r, (ym, rec) in enumerate(zip(y, receivers)):
        where = f"receiver agent {rec.agent}"
        if mode == "direct-observable":
            if tilt is not None and ym == 0:
                block = tilt.receivers[pos_r]
                _add_letters(letters, block.b0_bar_global, where)
                _add_letters(letters, block.p_part_global, where)
            else:
                _add_letters(letters, rec.b0_global if ym == 0 else rec.b1_global, where)
        else:
            chosen = rec.b0 if ym == 0 else rec.b1
            for pos, (i, j) in enumerate(rec.qubits):
                letter = chosen.letter(pos)
                if letter == "I":
                    letter = classification.o_letter(i, j)
                if letter is not None:
                    q = layout.global_index(i, j)
                    if letters.setdefault(q, letter) != letter:
                        raise RuntimeError(
                            f"{where}: qubit {q} would be measured in both "
                            f"{letters[q]} and {letter} bases"
                        )
        if tilted_now:
            p_masks.append(_string_mask(layout, tilt.receivers[pos_r].p_part_global))

    for q, letter in letters.items():
        gate = _BASIS_ROTATION[letter]
        if gate is not None:
            amps = _apply_one_qubit(amps, n, q, gate)

    probabilities = np.abs(amps) ** 2
    total = probabilities.sum()
    assert abs(total - 1.0) < PROB_TOL, f"frame probabilities sum to {total!r}"
    probabilities = probabilities / total

    source_masks = tuple(_string_mask(layout, src.s_global) for src in sources)
    receiver_masks = tuple(
        _string_mask(layout, rec.b0_global if ym == 0 else rec.b1_global)
        for ym, rec in zip(y, receivers)
    )
    # Per-qubit records cover the receiver-held measured qubits only; the
    # source-agent columns already carry the source side.
    index_of = {
        layout.global_index(i, j): (i, j)
        for i in range(1, layout.N + 1)
        for j in range(1, layout.source_sizes[i - 1] + 1)
    }
    measured = tuple(
        q
        for q in sorted(letters)
        if layout.is_receiver(layout.agent_of(*index_of[q]))
    )
    qubit_masks = tuple(_Mask(bits=1 << (n - 1 - q), sign=1) for q in measured)
    measured_qubits = tuple(index_of[q] for q in measured)

    return _Frame(
        probabilities=probabilities,
        source_masks=source_masks,
        receiver_masks=receiver_masks,
        p_masks=tuple(p_masks) if p_masks is not None else None,
        measured_qubits=measured_qubits,
        qubit_masks=qubit_masks,
    )


def _setting_combos(k: int, m: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    return [
        (x, y)
        for x in itertools.product((0, 1), repeat=k)
        for y in itertools.product((0, 1), repeat=m)
    ]


def outcome_distribution(
    layout: NetworkLayout,
    selection: OperatorSelection,
    sources: tuple[SourceObservables, ...],
    receivers: tuple[ReceiverObservables, ...],
    x: tuple[int, ...],
    y: tuple[int, ...],
    *,
    mode: str = "direct-observable",
    tilt: TiltedBlock | None = None,
) -> dict[tuple[int, ...], float]:
    """Exact joint distribution of the recorded outcomes at one setting.

    Keys are (a_1..a_K, b_1..b_M) tuples, extended by (p_1..p_M) when a
    tilted block is given and every receiver is on setting 0.
    """
    if mode not in MODES:
        raise ValueError(f"unknown strategy {mode!r}; expected one of {MODES}")
    classification = classify(layout, selection)
    frame = _build_frame(layout, classification, sources, receivers, x, y, mode, tilt)
    dim = frame.probabilities.size
    indices = np.arange(dim)
    columns = [_mask_outcomes(indices, mask) for mask in frame.source_masks]
    columns += [_mask_outcomes(indices, mask) for mask in frame.receiver_masks]
    if frame.p_masks is not None:
        columns += [_mask_outcomes(indices, mask) for mask in frame.p_masks]
    stacked = np.stack(columns, axis=1)
    out: dict[tuple[int, ...], float] = {}
    for idx in np.flatnonzero(frame.probabilities > 0):
        key = tuple(int(v) for v in stacked[idx])
        out[key] = out.get(key, 0.0) + float(frame.probabilities[idx])
    return out


# ----------------------------------------------------------------------
# estimators


def _power_and_se(value: float, se: float, k: int) -> tuple[float, float | None]:
    root = abs(value) ** (1.0 / k)
    if value == 0.0 and k > 1:
        return root, None
    derivative = abs(value) ** (1.0 / k - 1.0) / k
    return root, derivative * se


def _cell_se(tally: SettingTally) -> float:
    if tally.rounds == 0:
        return 1.0
    variance = max(0.0, 1.0 - tally.product_mean**2)
    return math.sqrt(variance / tally.rounds)


def _correlator_estimates(tallies, k: int):
    scale = 1.0 / 2.0**k
    i_sum = 0.0
    i_var = 0.0
    j_sum = 0.0
    j_var = 0.0
    for tally in tallies:
        if all(b == 0 for b in tally.y):
            i_sum += tally.product_mean
            i_var += _cell_se(tally) ** 2
        if all(b == 1 for b in tally.y):
            sign = -1.0 if sum(tally.x) % 2 else 1.0
            j_sum += sign * tally.product_mean
            j_var += _cell_se(tally) ** 2
    return scale * i_sum, scale * math.sqrt(i_var), scale * j_sum, scale * math.sqrt(j_var)


def _phase_flip_estimate(tallies) -> tuple[float | None, float | None]:
    total = 0
    weight = 0
    for tally in tallies:
        if tally.p_sum is not None:
            total += tally.p_sum
            weight += tally.rounds
    if weight == 0:
        return None, None
    mean = total / weight
    return mean, math.sqrt(max(0.0, 1.0 - mean**2) / weight)


# ----------------------------------------------------------------------
# the run itself


def _csv_header(mode, k, m, tilted, measured_qubits) -> list[str]:
    header = ["round", "settings"]
    header += [f"a{idx}" for idx in range(1, k + 1)]
    if mode == "direct-observable":
        header += [f"b{idx}" for idx in range(1, m + 1)]
        if tilted:
            header += [f"p{idx}" for idx in range(1, m + 1)]
    else:
        header += [f"q({i},{j})" for i, j in measured_qubits]
    return header


def run(
    layout: NetworkLayout,
    selection: OperatorSelection,
    sources: tuple[SourceObservables, ...],
    receivers: tuple[ReceiverObservables, ...],
    config: RunConfig,
    *,
    tilt: TiltedBlock | None = None,
    beta: float | None = None,
    record_path=None,
) -> TallyReport:
    """Sample finite rounds and report correlator estimates.

    record_path, when given, receives one CSV row per round: the round
    index, the settings (x bits, a bar, y bits), then the recorded
    outcomes. Direct mode records per-agent observable outcomes (phase-flip
    columns hold 0 in rounds where they are not collected); per-qubit mode
    records every measured qubit outcome after the source-agent columns.
    """
    if beta is not None:
        if tilt is None:
            raise ValueError("beta without a tilted block has no meaning")
        if beta < 0:
            raise ValueError(f"beta must be nonnegative, got {beta}")
    k = layout.K
    m = layout.M
    combos = _setting_combos(k, m)
    if config.setting_weights is None:
        weights = np.full(len(combos), 1.0 / len(combos))
    else:
        if len(config.setting_weights) != len(combos):
            raise ValueError(
                f"expected {len(combos)} setting weights, got {len(config.setting_weights)}"
            )
        weights = np.asarray(config.setting_weights, dtype=float)
        weights = weights / weights.sum()

    classification = classify(layout, selection)
    rng = make_rng(config.seed)
    counts = rng.multinomial(config.rounds, weights)

    tallies = []
    blocks = []
    for (x, y), count in zip(combos, (int(c) for c in counts)):
        tilted_now = tilt is not None and all(b == 0 for b in y)
        if count == 0:
            tallies.append(
                SettingTally(
                    x=x, y=y, rounds=0, product_sum=0, p_sum=0 if tilted_now else None
                )
            )
            continue
        frame = _build_frame(
            layout, classification, sources, receivers, x, y, config.strategy, tilt
        )
        indices = rng.choice(frame.probabilities.size, size=count, p=frame.probabilities)
        a_cols = [_mask_outcomes(indices, mask) for mask in frame.source_masks]
        b_cols = [_mask_outcomes(indices, mask) for mask in frame.receiver_masks]
        product = np.prod(a_cols, axis=0) * np.prod(b_cols, axis=0)
        p_sum = None
        p_cols = []
        if frame.p_masks is not None:
            p_cols = [_mask_outcomes(indices, mask) for mask in frame.p_masks]
            p_sum = int(np.prod(p_cols, axis=0).sum())
        tallies.append(
            SettingTally(
                x=x,
                y=y,
                rounds=count,
                product_sum=int(product.sum()),
                p_sum=p_sum,
            )
        )
        if record_path is not None:
            if config.strategy == "direct-observable":
                outcome_cols = a_cols + b_cols
                if tilt is not None:
                    pad = p_cols if p_cols else [np.zeros(count, dtype=int)] * m
                    outcome_cols += pad
            else:
                outcome_cols = a_cols + [
                    _mask_outcomes(indices, mask) for mask in frame.qubit_masks
                ]
            settings_text = "".join(map(str, x)) + "|" + "".join(map(str, y))
            blocks.append((settings_text, np.stack(outcome_cols, axis=1)))

    i_est, i_se, j_est, j_se = _correlator_estimates(tallies, k)
    p_est, p_se = _phase_flip_estimate(tallies)

    i_root, i_root_se = _power_and_se(i_est, i_se, k)
    j_root, j_root_se = _power_and_se(j_est, j_se, k)
    value = i_root + j_root
    if i_root_se is None or j_root_se is None:
        value_se = None
    else:
        value_se = math.sqrt(i_root_se**2 + j_root_se**2)

    g_est = None
    g_se = None
    if beta is not None and p_est is not None:
        p_root, p_root_se = _power_and_se(p_est, p_se, k)
        g_est = beta * p_root + value
        if value_se is not None and p_root_se is not None:
            g_se = math.sqrt(value_se**2 + (beta * p_root_se) ** 2)

    if record_path is not None:
        measured_qubits = ()
        if config.strategy == "per-qubit-discard":
            measured_qubits = _measured_qubits_for_header(
                layout, classification, sources, receivers, config.strategy, tilt
            )
        _write_rounds(record_path, config, k, m, tilt is not None, blocks, rng, measured_qubits)

    return TallyReport(
        mode=config.strategy,
        rounds=config.rounds,
        seed=config.seed,
        k=k,
        tallies=tuple(tallies),
        i_estimate=i_est,
        i_se=i_se,
        j_estimate=j_est,
        j_se=j_se,
        p_estimate=p_est,
        p_se=p_se,
        beta=beta,
        value_estimate=value,
        value_se=value_se,
        g_estimate=g_est,
        g_se=g_se,
    )


def _measured_qubits_for_header(
    layout, classification, sources, receivers, mode, tilt
) -> tuple[tuple[int, int], ...]:
    x = tuple(0 for _ in range(layout.K))
    y = tuple(0 for _ in range(layout.M))
    frame = _build_frame(layout, classification, sources, receivers, x, y, mode, tilt)
    return frame.measured_qubits


def _write_rounds(path, config, k, m, tilted, blocks, rng, measured_qubits) -> None:
    header = _csv_header(config.strategy, k, m, tilted, measured_qubits)
    width = len(header) - 2
    rows = []
    settings = []
    for settings_text, outcomes in blocks:
        if outcomes.shape[1] != width:
            raise RuntimeError(
                f"round record width {outcomes.shape[1]} does not match header {width}"
            )
        rows.append(outcomes)
        settings.extend([settings_text] * outcomes.shape[0])
    stacked = np.concatenate(rows, axis=0) if rows else np.zeros((0, width), dtype=int)
    order = rng.permutation(stacked.shape[0])
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for round_index, source_row in enumerate(order):
            writer.writerow(
                [round_index, settings[source_row], *map(int, stacked[source_row])]
            )
