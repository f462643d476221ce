"""Low-level dense gate application on raw amplitude arrays.

Amplitude arrays are indexed with the leftmost qubit of the register order as
the most significant bit of the basis-state index.  All functions accept an
optional leading batch axis so that many statevectors (e.g. noise
trajectories) can be evolved in lockstep.
"""

from __future__ import annotations

import numpy as np


def apply_matrix(
    amps: np.ndarray,
    mat: np.ndarray,
    targets: tuple[int, ...],
    controls: tuple[int, ...],
    num_qubits: int,
    batched: bool = False,
) -> np.ndarray:
    """Apply ``mat`` to the target qubits, conditioned on all controls being 1.

    ``amps`` has shape ``(2**n,)`` or ``(B, 2**n)`` with ``batched=True``.
    Returns a new array; the input is never mutated.
    """
    k = len(targets)
    if mat.shape != (2**k, 2**k):
        raise ValueError(f"matrix shape {mat.shape} does not address {k} qubits")
    offset = 1 if batched else 0
    shape = ((-1,) if batched else ()) + (2,) * num_qubits

    if controls:
        arr = amps.reshape(shape).copy()
        sel = [slice(None)] * (num_qubits + offset)
        for c in controls:
            sel[c + offset] = 1
        sel = tuple(sel)
        # Control axes are dropped in the sliced view; remap target positions.
        remaining = [q for q in range(num_qubits) if q not in controls]
        sub_targets = tuple(remaining.index(t) for t in targets)
        arr[sel] = _apply_to_block(arr[sel], mat, sub_targets, len(remaining), offset)
    else:
        # No in-place writes happen on this path, so a view suffices.
        arr = _apply_to_block(amps.reshape(shape), mat, targets, num_qubits, offset)
    return arr.reshape(amps.shape)


def _apply_to_block(
    block: np.ndarray, mat: np.ndarray, targets: tuple[int, ...], n: int, offset: int
) -> np.ndarray:
    k = len(targets)
    src = [t + offset for t in targets]
    dst = list(range(block.ndim - k, block.ndim))
    moved = np.moveaxis(block, src, dst)
    moved_shape = moved.shape
    flat = moved.reshape(-1, 2**k)
    out = flat @ mat.T
    return np.moveaxis(out.reshape(moved_shape), dst, src)


def apply_matrix_nd(
    arr: np.ndarray, mat: np.ndarray, targets: tuple[int, ...], controls: tuple[int, ...]
) -> np.ndarray:
    """Gate application on an already-ND amplitude array (batch axis first).

    Used by the batched trajectory engine to avoid per-gate flat/ND round
    trips; the input is not mutated.
    """
    n = arr.ndim - 1
    if controls:
        out = arr.copy()
        sel = [slice(None)] * (n + 1)
        for c in controls:
            sel[c + 1] = 1
        sel = tuple(sel)
        remaining = [q for q in range(n) if q not in controls]
        sub_targets = tuple(remaining.index(t) for t in targets)
        out[sel] = _apply_to_block(out[sel], mat, sub_targets, len(remaining), 1)
        return out
    return _apply_to_block(arr, mat, targets, n, 1)


def marginal_probabilities(
    amps: np.ndarray, qubits: tuple[int, ...], num_qubits: int, batched: bool = False
) -> np.ndarray:
    """Born probabilities over the given qubits, in the given qubit order.

    Returns shape ``(2**k,)`` or ``(B, 2**k)``.
    """
    offset = 1 if batched else 0
    shape = ((-1,) if batched else ()) + (2,) * num_qubits
    probs = np.abs(amps.reshape(shape)) ** 2
    keep = [q + offset for q in qubits]
    drop = tuple(ax for ax in range(offset, probs.ndim) if ax not in keep)
    probs = probs.sum(axis=drop)
    # Axes collapse preserves ascending qubit order; permute to requested order.
    ascending = sorted(qubits)
    src = [offset + ascending.index(q) for q in qubits]
    probs = np.moveaxis(probs, src, range(offset, offset + len(qubits)))
    return probs.reshape(((-1,) if batched else ()) + (2 ** len(qubits),))
