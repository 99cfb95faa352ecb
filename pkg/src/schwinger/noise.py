"""Noisy shot sampling and charge-sector post-selection.

Noise is simulated by trajectories. For every shot and every CNOT a fault
occurs with probability ``p_cnot`` and applies one of the 15 non-identity
two-qubit Paulis to the CNOT's qubits, uniformly. Shots sharing a fault
pattern share one simulated trajectory. Each measured bit then flips
independently with probability ``p_readout``.

Random draws per shot block, in order: fault pattern (only when p_cnot > 0
and the circuit has CNOTs), outcome uniforms, readout flips (only when
p_readout > 0). With no noise this is exactly the draw sequence of
:func:`schwinger.simulator.sample`.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import EmptySelectionError
from .hamiltonian import vacuum_bits
from .simulator import (
    Circuit,
    Statevector,
    apply_circuit,
    apply_gate_batch,
    draw_outcomes,
    index_to_bits,
    probability_vector,
    shot_blocks,
)

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# fault code k in 1..15 -> (Pauli on control, Pauli on target); code 0 is no fault
TWO_QUBIT_PAULIS = [(a, b) for a in "IXYZ" for b in "IXYZ"][1:]


@dataclass(frozen=True)
class NoiseModel:
    p_cnot: float = 0.0
    p_readout: float = 0.0

    def __post_init__(self):
        for name in ("p_cnot", "p_readout"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @classmethod
    def uniform(cls, eps: float) -> "NoiseModel":
        return cls(p_cnot=eps, p_readout=eps)

    @property
    def is_ideal(self) -> bool:
        return self.p_cnot == 0 and self.p_readout == 0


@dataclass
class Counts:
    """Measurement histogram ``bitstring -> count``."""

    counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        lengths = set()
        for k, v in self.counts.items():
            if v < 0 or int(v) != v:
                raise ValueError(f"invalid count {v!r} for {k}")
            lengths.add(len(k))
            if v:
                clean[k] = int(v)
        if len(lengths) > 1:
            raise ValueError("bitstrings of mixed length")
        self.counts = dict(sorted(clean.items()))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, key: str) -> int:
        return self.counts.get(key, 0)

    def __iter__(self):
        return iter(self.counts)

    def __len__(self):
        return len(self.counts)

    def items(self):
        return self.counts.items()

    def __eq__(self, other):
        if isinstance(other, Counts):
            return self.counts == other.counts
        if isinstance(other, Mapping):
            return self.counts == {k: v for k, v in other.items() if v}
        return NotImplemented

    def merge(self, other: "Counts") -> "Counts":
        out = dict(self.counts)
        for k, v in other.items():
            out[k] = out.get(k, 0) + v
        return Counts(out)

    def to_json(self) -> str:
        return json.dumps(self.counts, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Counts":
        return cls({str(k): int(v) for k, v in json.loads(text).items()})


def _pauli_fault(psi: np.ndarray, control: int, target: int, code: int) -> np.ndarray:
    for q, letter in zip((control, target), TWO_QUBIT_PAULIS[code - 1]):
        if letter != "I":
            axis = q + 1
            psi = np.moveaxis(np.tensordot(_PAULI_1Q[letter], psi, axes=([1], [axis])), 0, axis)
    return psi


def _run_trajectories(circuit: Circuit, initial: Statevector, patterns: np.ndarray) -> np.ndarray:
    """Final probability vectors, one row per fault pattern (rows x n_cnot codes)."""
    n = circuit.qubit_count
    psi = np.broadcast_to(
        initial.amplitudes.reshape((1,) + (2,) * n), (patterns.shape[0],) + (2,) * n
    ).copy()
    k = 0
    for gate in circuit.gates:
        psi = apply_gate_batch(psi, gate)
        if gate.kind != "CNOT":
            continue
        codes = patterns[:, k]
        for code in np.unique(codes):
            if code == 0:
                continue
            rows = np.nonzero(codes == code)[0]
            psi[rows] = _pauli_fault(psi[rows], *gate.targets, int(code))
        k += 1
    probs = np.abs(psi.reshape(patterns.shape[0], -1)) ** 2
    return probs


def _sample_block(circuit, initial, final_probs, noise, size, rng) -> np.ndarray:
    n = circuit.qubit_count
    n_cnot = circuit.count("CNOT")
    if noise.p_cnot > 0 and n_cnot > 0:
        fault = rng.random((size, n_cnot)) < noise.p_cnot
        which = rng.integers(1, 16, size=(size, n_cnot))
        patterns = np.where(fault, which, 0)
        unique, inverse = np.unique(patterns, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        traj_probs = _run_trajectories(circuit, initial, unique)
        uniforms = rng.random(size)
        idx = draw_outcomes(traj_probs[inverse], uniforms)
    else:
        idx = draw_outcomes(final_probs, rng.random(size))
    if noise.p_readout > 0:
        flips = rng.random((size, n)) < noise.p_readout
        weights = 1 << np.arange(n - 1, -1, -1)
        idx = idx ^ (flips.astype(np.int64) @ weights)
    return np.bincount(idx, minlength=2**n)


def sample_noisy(
    circuit: Circuit,
    initial: Statevector,
    n_shot: int,
    noise: NoiseModel,
    seed: int,
    workers: int = 1,
) -> Counts:
    """Seeded shot histogram of ``circuit`` applied to ``initial`` under ``noise``."""
    if circuit.qubit_count != initial.qubit_count:
        raise ValueError("circuit and initial state sizes differ")
    final_probs = probability_vector(apply_circuit(initial, circuit))
    blocks = list(shot_blocks(n_shot, seed))
    job = lambda b: _sample_block(circuit, initial, final_probs, noise, *b)  # noqa: E731
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(job, blocks))
    else:
        parts = [job(b) for b in blocks]
    hist = np.sum(parts, axis=0)
    n = circuit.qubit_count
    return Counts({index_to_bits(i, n): int(c) for i, c in enumerate(hist) if c})


def post_select(counts: Counts, weight: int | None = None) -> Counts:
    """Keep only bitstrings in the physical (zero-charge) sector.

    ``weight`` defaults to the Hamming weight of the vacuum pattern, i.e. 3
    on five qubits.
    """
    if not counts.counts:
        raise EmptySelectionError("no shots to post-select")
    if weight is None:
        n = len(next(iter(counts)))
        weight = vacuum_bits(n).count("1")
    kept = {k: v for k, v in counts.items() if k.count("1") == weight}
    if not kept:
        raise EmptySelectionError(f"all {counts.total} shots fall outside the weight-{weight} sector")
    return Counts(kept)


def pvac(counts: Counts, vacuum: str | None = None) -> tuple[float, float]:
    """Vacuum frequency and its binomial standard error."""
    total = counts.total
    if total == 0:
        raise ValueError("cannot estimate a probability from zero shots")
    if vacuum is None:
        vacuum = vacuum_bits(len(next(iter(counts))))
    p = counts[vacuum] / total
    return p, math.sqrt(p * (1 - p) / total)
