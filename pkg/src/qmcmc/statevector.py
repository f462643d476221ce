"""Dense complex statevector simulator.

Gate application, measurement sampling, post-selection and overlaps for up
to 16 qubits.  Basis-state indexing is fixed package-wide: with register
order (q0, q1, ..., q_{n-1}), qubit q0 is the most significant index bit.

Shot sampling draws each shot from an independent counter-based stream keyed
by (seed, shot_index), so shots can be evaluated in any order, in parallel,
or in batches without changing the results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._apply import apply_matrix, marginal_probabilities
from .circuit import Circuit, GateApplication
from .config import DEFAULT_NUMERICS, NumericsConfig
from .errors import AddressingError, PostSelectImpossible
from .rng import ShotStreams

MAX_QUBITS = 16


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm complex amplitude array over an ordered qubit register set."""

    num_qubits: int
    amps: np.ndarray
    config: NumericsConfig = field(default=DEFAULT_NUMERICS, repr=False)

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"supported qubit counts are 1..{MAX_QUBITS}")
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(f"expected {2**self.num_qubits} amplitudes, got {amps.shape}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > self.config.norm_tol:
            raise ValueError(f"state norm deviates from 1 by {abs(norm - 1.0):.3e}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Outcome bits (in measured-qubit order) plus the collapsed state."""

    outcome: str
    remaining_state: StateVector


def zero_state(num_qubits: int) -> StateVector:
    return basis_state(num_qubits, 0)


def basis_state(num_qubits: int, index: int) -> StateVector:
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(num_qubits, amps)


def from_amplitudes(amps) -> StateVector:
    amps = np.asarray(amps, dtype=complex)
    n = int(np.log2(amps.shape[0]))
    if 2**n != amps.shape[0]:
        raise ValueError("amplitude count must be a power of two")
    return StateVector(n, amps)


def _resolve(gate: GateApplication, index_of) -> tuple[tuple[int, ...], tuple[int, ...]]:
    targets = tuple(index_of[q] for q in gate.targets)
    controls = tuple(index_of[q] for q in gate.controls)
    return targets, controls


def apply_gate(state: StateVector, gate: GateApplication, index_of: dict[str, int]) -> StateVector:
    """Apply one gate; qubit names resolve through ``index_of``."""
    targets, controls = _resolve(gate, index_of)
    seen = targets + controls
    if len(set(seen)) != len(seen):
        raise AddressingError(f"gate addresses a qubit twice: {seen}")
    if any(not 0 <= q < state.num_qubits for q in seen):
        raise AddressingError(f"qubit index out of range in {seen}")
    amps = apply_matrix(state.amps, gate.base_matrix(), targets, controls, state.num_qubits)
    return StateVector(state.num_qubits, amps, state.config)


@dataclass(frozen=True, eq=False)
class SimulationResult:
    state: StateVector
    measurements: dict[str, int]


def simulate(
    circuit: Circuit,
    initial: StateVector | None = None,
    rng: np.random.Generator | None = None,
) -> SimulationResult:
    """Run a circuit front to back; measurements collapse using ``rng``."""
    n = circuit.num_qubits
    state = initial if initial is not None else zero_state(n)
    if state.num_qubits != n:
        raise ValueError("initial state size does not match circuit")
    index_of = {q: circuit.index_of(q) for q in circuit.qubits}
    outcomes: dict[str, int] = {}
    for op in circuit.ops:
        if op.kind == "measure":
            if rng is None:
                raise ValueError("circuit contains measurements; provide an rng")
            record = measure(state, (index_of[op.targets[0]],), rng)
            outcomes[op.targets[0]] = int(record.outcome)
            state = record.remaining_state
        elif op.kind == "reset":
            if rng is None:
                raise ValueError("circuit contains reset; provide an rng")
            q = index_of[op.targets[0]]
            record = measure(state, (q,), rng)
            state = record.remaining_state
            if record.outcome == "1":
                state = apply_gate(state, GateApplication("x", op.targets), index_of)
        else:
            state = apply_gate(state, op, index_of)
    return SimulationResult(state, outcomes)


def statevector_of(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    """Final state of a measurement-free circuit."""
    return simulate(circuit, initial, rng=None).state


def measure(
    state: StateVector, qubits: tuple[int, ...], rng: np.random.Generator
) -> MeasurementRecord:
    """Born-rule measurement of the given qubits; collapses and renormalizes."""
    probs = marginal_probabilities(state.amps, qubits, state.num_qubits)
    outcome = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    outcome = min(outcome, len(probs) - 1)
    bits = format(outcome, f"0{len(qubits)}b")
    collapsed = _project(state, qubits, bits)
    return MeasurementRecord(bits, collapsed)


def _project(state: StateVector, qubits: tuple[int, ...], bits: str) -> StateVector:
    nd = state.amps.reshape((2,) * state.num_qubits).copy()
    for q, b in zip(qubits, bits):
        sel = [slice(None)] * state.num_qubits
        sel[q] = 1 - int(b)
        nd[tuple(sel)] = 0.0
    flat = nd.reshape(-1)
    norm = np.linalg.norm(flat)
    if norm < 1e-12:
        raise PostSelectImpossible(f"branch {bits} on qubits {qubits} has zero probability")
    return StateVector(state.num_qubits, flat / norm, state.config)


def post_select(
    state: StateVector, qubit: int, value: int, config: NumericsConfig = DEFAULT_NUMERICS
) -> tuple[StateVector, float]:
    """Condition on one qubit reading ``value``; returns (collapsed state, probability)."""
    if value not in (0, 1):
        raise ValueError("post-selected value must be 0 or 1")
    probs = marginal_probabilities(state.amps, (qubit,), state.num_qubits)
    prob = float(probs[value])
    if prob <= config.post_select_cutoff:
        raise PostSelectImpossible(
            f"qubit {qubit} = {value} has probability {prob:.3e} <= cutoff"
        )
    return _project(state, (qubit,), str(value)), prob


def drop_qubit(state: StateVector, qubit: int, value: int = 0) -> StateVector:
    """Remove a qubit that is exactly |value>; errors if it carries amplitude."""
    nd = state.amps.reshape((2,) * state.num_qubits)
    sel = [slice(None)] * state.num_qubits
    sel[qubit] = 1 - value
    if np.max(np.abs(nd[tuple(sel)])) > 1e-9:
        raise ValueError(f"qubit {qubit} is not in a definite |{value}> state")
    sel[qubit] = value
    kept = nd[tuple(sel)].reshape(-1)
    kept = kept / np.linalg.norm(kept)
    return StateVector(state.num_qubits - 1, kept, state.config)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """a (x) b; b's qubits are appended after a's (less significant bits)."""
    return StateVector(a.num_qubits + b.num_qubits, np.kron(a.amps, b.amps), a.config)


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("overlap requires equal qubit counts")
    return complex(np.vdot(a.amps, b.amps))


def sample(
    state: StateVector, qubits: tuple[int, ...] | list[int], shots: int, seed: int
) -> dict[str, int]:
    """Histogram of bitstrings over ``qubits`` (in that order) for seeded shots."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    qubits = tuple(qubits)
    probs = marginal_probabilities(state.amps, qubits, state.num_qubits)
    return sample_from_probabilities(probs, len(qubits), shots, seed)


def sample_from_probabilities(
    probs: np.ndarray, num_bits: int, shots: int, seed: int
) -> dict[str, int]:
    """Draw one uniform per shot from its own stream and invert the CDF.

    This exact draw discipline (outcome uniform is the first draw of each
    shot's stream) is shared with the noise-trajectory engine, which makes
    the all-zero noise model reproduce noiseless histograms bit-exactly.
    """
    cum = np.cumsum(probs)
    cum[-1] = max(cum[-1], 1.0)
    streams = ShotStreams(seed)
    u = np.array([streams.shot(s).random() for s in range(shots)])
    outcomes = np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)
    counts: dict[str, int] = {}
    for outcome in outcomes:
        key = format(int(outcome), f"0{num_bits}b")
        counts[key] = counts.get(key, 0) + 1
    return counts
