"""Stochastic Pauli noise via trajectory sampling.

Each shot evolves a pure state: after every gate, with probability p1 or p2
(by gate arity) a uniformly random non-identity Pauli hits the gate's
qubits, and recorded measurement bits flip with probability p_meas.  Memory
stays at statevector size and trajectories are embarrassingly parallel.

Draw discipline per shot stream (seed, shot_index): the terminal-outcome
uniform comes first, then the measurement-flip uniforms, then one uniform
per gate site (with a Pauli choice drawn on demand when a site fires).
Because the outcome uniform is the first draw, the all-zero model reproduces
noiseless sampling bit-exactly, and batched evaluation reproduces sequential
evaluation exactly.

Default rates are an order-of-magnitude stand-in for trapped-ion hardware,
not calibrated device numbers.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from ._apply import apply_matrix, apply_matrix_nd, marginal_probabilities
from .circuit import Circuit, GateApplication
from .errors import SchemaError
from .rng import ShotStreams, shot_rng
from .statevector import StateVector, from_amplitudes, statevector_of, zero_state

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PAULI_1Q = [_PAULI["x"], _PAULI["y"], _PAULI["z"]]


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing rates per gate plus a measurement bit-flip rate."""

    p1: float = 2e-5
    p2: float = 1e-3
    p_meas: float = 1e-3
    attach: str = "native"

    def __post_init__(self):
        for name in ("p1", "p2", "p_meas"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")
        if self.attach not in ("native", "logical"):
            raise ValueError("attach must be 'native' or 'logical'")
        if self.p2 < self.p1:
            warnings.warn("two-qubit rate p2 below single-qubit rate p1", stacklevel=2)

    @property
    def is_zero(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0 and self.p_meas == 0.0

    def rate_for(self, num_qubits: int) -> float:
        return self.p1 if num_qubits == 1 else self.p2

    def to_json(self) -> str:
        return json.dumps(
            {"p1": self.p1, "p2": self.p2, "p_meas": self.p_meas, "attach": self.attach}
        )

    @classmethod
    def from_json(cls, text: str) -> "NoiseModel":
        try:
            obj = json.loads(text)
            return cls(
                p1=float(obj.get("p1", 0.0)),
                p2=float(obj.get("p2", 0.0)),
                p_meas=float(obj.get("p_meas", 0.0)),
                attach=obj.get("attach", "native"),
            )
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed noise model JSON: {exc}") from exc


ZERO_NOISE = NoiseModel(0.0, 0.0, 0.0)


def _pauli_matrix(num_qubits: int, index: int) -> np.ndarray:
    """index in 1..4^k-1 selects a non-identity Pauli string (base-4 digits)."""
    mats = []
    for _ in range(num_qubits):
        digit = index % 4
        index //= 4
        mats.append(np.eye(2, dtype=complex) if digit == 0 else _PAULI_1Q[digit - 1])
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _gate_sites(circuit: Circuit) -> list[GateApplication]:
    return [op for op in circuit.ops if op.kind not in ("measure", "reset")]


def _shot_events(
    rng: np.random.Generator, rates: np.ndarray, arities: np.ndarray
) -> list[tuple[int, int]]:
    """(site, pauli index) pairs for one trajectory, in site order."""
    if len(rates) == 0:
        return []
    u = rng.random(len(rates))
    events = []
    for site in np.flatnonzero(u < rates):
        n_paulis = 4 ** int(arities[site]) - 1
        events.append((int(site), 1 + int(rng.integers(n_paulis))))
    return events


def apply_trajectory(
    circuit: Circuit,
    model: NoiseModel,
    seed: int,
    shot_index: int,
    initial: StateVector | None = None,
) -> tuple[StateVector, dict[str, int]]:
    """Evolve one noise trajectory; deterministic per (seed, shot_index).

    Measurement ops collapse the state and record (possibly flipped) bits.
    For terminal-measurement circuits the outcomes match the batched sampler
    bit for bit; mid-circuit measurements are supported but draw from the
    stream inline, so only the sequential engine handles them.
    """
    n = circuit.num_qubits
    state = initial if initial is not None else zero_state(n)
    measured = [op.targets[0] for op in circuit.ops if op.kind == "measure"]
    terminal = _is_terminal_measurement(circuit)
    rng = shot_rng(seed, shot_index)
    sites = _gate_sites(circuit)
    arities = np.array([len(op.qubits) for op in sites])
    rates = np.array([model.rate_for(len(op.qubits)) for op in sites])

    if terminal:
        u_out = rng.random()
        flip_u = rng.random(len(measured)) if measured else np.empty(0)
        events = dict(_shot_events(rng, rates, arities))
        amps = state.amps
        for site, op in enumerate(sites):
            targets = tuple(circuit.index_of(q) for q in op.targets)
            controls = tuple(circuit.index_of(q) for q in op.controls)
            amps = apply_matrix(amps, op.base_matrix(), targets, controls, n)
            if site in events:
                qubits = tuple(circuit.index_of(q) for q in op.qubits)
                amps = apply_matrix(amps, _pauli_matrix(len(qubits), events[site]), qubits, (), n)
        state = from_amplitudes(amps)
        outcomes: dict[str, int] = {}
        if measured:
            idx = tuple(circuit.index_of(q) for q in measured)
            probs = marginal_probabilities(state.amps, idx, n)
            k = int(np.searchsorted(np.cumsum(probs), u_out, side="right"))
            k = min(k, len(probs) - 1)
            bits = format(k, f"0{len(measured)}b")
            for j, q in enumerate(measured):
                bit = int(bits[j])
                if flip_u[j] < model.p_meas:
                    bit ^= 1
                outcomes[q] = bit
        return state, outcomes

    # Mid-circuit measurements: inline draws in program order.
    amps = state.amps
    outcomes = {}
    for op in circuit.ops:
        if op.kind == "measure":
            q = circuit.index_of(op.targets[0])
            probs = marginal_probabilities(amps, (q,), n)
            bit = int(rng.random() < probs[1])
            nd = amps.reshape((2,) * n).copy()
            sel = [slice(None)] * n
            sel[q] = 1 - bit
            nd[tuple(sel)] = 0
            amps = nd.reshape(-1)
            amps = amps / np.linalg.norm(amps)
            if rng.random() < model.p_meas:
                bit ^= 1
            outcomes[op.targets[0]] = bit
        elif op.kind == "reset":
            raise ValueError("reset is not supported in noisy trajectories")
        else:
            targets = tuple(circuit.index_of(q) for q in op.targets)
            controls = tuple(circuit.index_of(q) for q in op.controls)
            amps = apply_matrix(amps, op.base_matrix(), targets, controls, n)
            rate = model.rate_for(len(op.qubits))
            if rate > 0 and rng.random() < rate:
                qubits = tuple(circuit.index_of(q) for q in op.qubits)
                pauli = 1 + int(rng.integers(4 ** len(qubits) - 1))
                amps = apply_matrix(amps, _pauli_matrix(len(qubits), pauli), qubits, (), n)
    return from_amplitudes(amps), outcomes


def _is_terminal_measurement(circuit: Circuit) -> bool:
    seen_measure = False
    for op in circuit.ops:
        if op.kind == "measure":
            seen_measure = True
        elif op.kind == "reset" or seen_measure:
            return False
    return True


def sample_with_noise(
    circuit: Circuit,
    model: NoiseModel,
    shots: int,
    seed: int,
    measured_qubits: list[str] | None = None,
) -> dict[str, int]:
    """Histogram over measured qubits from batched noise trajectories.

    Requires terminal measurement (or an explicit measured-qubit list on a
    measurement-free circuit).  The all-zero model takes the noiseless path
    and is bit-exact against plain sampling.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not _is_terminal_measurement(circuit):
        raise ValueError("batched sampling requires terminal measurement only")
    if measured_qubits is None:
        measured_qubits = [op.targets[0] for op in circuit.ops if op.kind == "measure"]
    if not measured_qubits:
        raise ValueError("nothing to measure")
    n = circuit.num_qubits
    idx = tuple(circuit.index_of(q) for q in measured_qubits)

    if model.is_zero:
        state = statevector_of(_without_measures(circuit))
        probs = marginal_probabilities(state.amps, idx, n)
        streams = ShotStreams(seed)
        return _histogram_from_uniforms(
            np.array([streams.shot(s).random() for s in range(shots)]),
            np.broadcast_to(probs, (shots, len(probs))),
            len(measured_qubits),
            np.empty((shots, 0)),
            0.0,
        )

    sites = _gate_sites(circuit)
    arities = np.array([len(op.qubits) for op in sites])
    rates = np.array([model.rate_for(len(op.qubits)) for op in sites])
    u_out = np.empty(shots)
    flip_u = np.empty((shots, len(measured_qubits)))
    events_by_site: dict[int, list[tuple[int, int]]] = {}
    streams = ShotStreams(seed)
    for s in range(shots):
        rng = streams.shot(s)
        u_out[s] = rng.random()
        flip_u[s] = rng.random(len(measured_qubits))
        for site, pauli in _shot_events(rng, rates, arities):
            events_by_site.setdefault(site, []).append((s, pauli))

    batch = np.zeros((shots,) + (2,) * n, dtype=complex)
    batch.reshape(shots, -1)[:, 0] = 1.0
    for site, op in enumerate(sites):
        targets = tuple(circuit.index_of(q) for q in op.targets)
        controls = tuple(circuit.index_of(q) for q in op.controls)
        batch = apply_matrix_nd(batch, op.base_matrix(), targets, controls)
        events = events_by_site.get(site)
        if events:
            qubits = tuple(circuit.index_of(q) for q in op.qubits)
            if not batch.flags.writeable or batch.base is not None:
                batch = batch.copy()
            flat_rows = batch.reshape(shots, -1)
            for s, pauli in events:
                flat_rows[s] = apply_matrix(
                    flat_rows[s], _pauli_matrix(len(qubits), pauli), qubits, (), n
                )
    probs = marginal_probabilities(
        np.ascontiguousarray(batch).reshape(shots, -1), idx, n, batched=True
    )
    return _histogram_from_uniforms(u_out, probs, len(measured_qubits), flip_u, model.p_meas)


def _without_measures(circuit: Circuit) -> Circuit:
    out = Circuit(circuit.qubits)
    out.extend(op for op in circuit.ops if op.kind not in ("measure", "reset"))
    return out.freeze()


def _histogram_from_uniforms(
    u_out: np.ndarray,
    probs: np.ndarray,
    num_bits: int,
    flip_u: np.ndarray,
    p_meas: float,
) -> dict[str, int]:
    cum = np.cumsum(probs, axis=1)
    cum[:, -1] = np.maximum(cum[:, -1], 1.0)
    # Count of cum entries <= u equals searchsorted(side="right"): keep this
    # identical to the noiseless sampler so zero noise is bit-exact.
    outcomes = (cum <= u_out[:, None]).sum(axis=1)
    outcomes = np.minimum(outcomes, probs.shape[1] - 1)
    if p_meas > 0 and flip_u.size:
        weights = 1 << np.arange(num_bits - 1, -1, -1)
        flips = (flip_u < p_meas) @ weights
        outcomes = outcomes ^ flips.astype(int)
    counts: dict[str, int] = {}
    for k in outcomes:
        key = format(int(k), f"0{num_bits}b")
        counts[key] = counts.get(key, 0) + 1
    return counts
