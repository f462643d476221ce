"""Shared generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from qmcmc.markov import Distribution, MarkovKernel


def random_reversible_kernel(rng: np.random.Generator, n: int) -> tuple[MarkovKernel, Distribution]:
    """Reversible ergodic kernel from a symmetric positive flow matrix."""
    flow = rng.uniform(0.1, 1.0, size=(n, n))
    flow = (flow + flow.T) / 2
    row_mass = flow.sum(axis=1)
    p = flow / row_mass[:, None]
    pi = row_mass / row_mass.sum()
    return MarkovKernel(p), Distribution(pi)


def random_circuit(rng: np.random.Generator, qubits: list[str], depth: int):
    """Random circuit over a mixed gate alphabet (no measurements)."""
    from qmcmc.circuit import Circuit

    circ = Circuit(qubits)
    for _ in range(depth):
        kind = rng.choice(
            ["h", "x", "y", "z", "s", "sdg", "rx", "ry", "rz", "phase",
             "cx", "cz", "swap", "zzphase", "ccx", "crz"]
        )
        if kind in ("h", "x", "y", "z", "s", "sdg"):
            circ._add(kind, (rng.choice(qubits),))
        elif kind in ("rx", "ry", "rz", "phase"):
            circ._add(kind, (rng.choice(qubits),), params=(rng.uniform(-np.pi, np.pi),))
        elif kind in ("cx", "cz", "swap"):
            a, b = rng.choice(qubits, size=2, replace=False)
            circ._add(kind, (a, b))
        elif kind == "zzphase":
            a, b = rng.choice(qubits, size=2, replace=False)
            circ._add(kind, (a, b), params=(rng.uniform(-np.pi, np.pi),))
        elif kind == "ccx" and len(qubits) >= 3:
            a, b, c = rng.choice(qubits, size=3, replace=False)
            circ._add("x", (c,), controls=(a, b))
        elif kind == "crz":
            a, b = rng.choice(qubits, size=2, replace=False)
            circ._add("rz", (b,), controls=(a,), params=(rng.uniform(-np.pi, np.pi),))
    return circ


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
