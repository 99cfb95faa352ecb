"""Statevector engine with exact and Trotterized time evolution plus shot sampling.

Bit ordering: qubit 0 is the leftmost character of a bitstring and the most
significant bit of the basis index, so ``"10101"`` is index 21.

Gate kernels act on arrays of shape ``(batch, 2, ..., 2)``; a single state is
a batch of one. The noise module reuses them for trajectory batches.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .hamiltonian import MAX_DENSE_QUBITS, PauliOperator, TrotterSplit, to_dense

NORM_TOL = 1e-8
SHOT_BLOCK = 16384

GATE_KINDS = ("X", "Rx", "Ry", "Rz", "CNOT", "CRx", "CRy")
_ROTATIONS = {"Rx", "Ry", "Rz", "CRx", "CRy"}
_TWO_QUBIT = {"CNOT", "CRx", "CRy"}


def _rx(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta):
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_BASE = {"X": lambda _: _X, "Rx": _rx, "Ry": _ry, "Rz": _rz, "CNOT": lambda _: _X, "CRx": _rx, "CRy": _ry}


@dataclass(frozen=True)
class Gate:
    """One gate. Controlled kinds list ``(control, target)`` in ``targets``."""

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        arity = 2 if self.kind in _TWO_QUBIT else 1
        if len(self.targets) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {self.targets}")
        if len(set(self.targets)) != arity or min(self.targets) < 0:
            raise ValueError(f"invalid targets {self.targets}")
        if self.kind in _ROTATIONS:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in _TWO_QUBIT

    def base_matrix(self) -> np.ndarray:
        """2x2 matrix applied to the target (conditioned on the control for two-qubit kinds)."""
        return _BASE[self.kind](self.angle)

    def matrix(self) -> np.ndarray:
        """Unitary on ``targets`` in the listed order (first listed = most significant)."""
        u = self.base_matrix()
        if not self.is_two_qubit:
            return u
        out = np.eye(4, dtype=complex)
        out[2:, 2:] = u
        return out

    def inverse(self) -> "Gate":
        if self.kind in _ROTATIONS:
            return Gate(self.kind, self.targets, -self.angle)
        return self

    def dump(self) -> str:
        parts = [self.kind, *map(str, self.targets)]
        if self.angle is not None:
            parts.append(repr(self.angle))
        return f"{parts[0]} " + ",".join(parts[1:])


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.targets) >= self.qubit_count:
                raise ValueError(f"gate {g.dump()} outside a {self.qubit_count}-qubit register")

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.qubit_count != self.qubit_count:
            raise ValueError("qubit counts differ")
        return Circuit(self.qubit_count, self.gates + other.gates)

    def __len__(self):
        return len(self.gates)

    def repeat(self, times: int) -> "Circuit":
        return Circuit(self.qubit_count, self.gates * times)

    def inverse(self) -> "Circuit":
        return Circuit(self.qubit_count, tuple(g.inverse() for g in reversed(self.gates)))

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def dump(self) -> str:
        return "".join(g.dump() + "\n" for g in self.gates)

    @classmethod
    def parse(cls, text: str, qubit_count: int) -> "Circuit":
        gates = []
        for line in text.splitlines():
            if not line.strip():
                continue
            kind, rest = line.split(" ", 1)
            fields = rest.split(",")
            arity = 2 if kind in _TWO_QUBIT else 1
            qubits = tuple(int(f) for f in fields[:arity])
            angle = float(fields[arity]) if len(fields) > arity else None
            gates.append(Gate(kind, qubits, angle))
        return cls(qubit_count, tuple(gates))

    def unitary(self) -> np.ndarray:
        """Dense matrix of the whole circuit, built column by column."""
        dim = 2**self.qubit_count
        cols = np.eye(dim, dtype=complex).reshape((dim,) + (2,) * self.qubit_count)
        for g in self.gates:
            cols = apply_gate_batch(cols, g)
        return cols.reshape(dim, dim).T


@dataclass(frozen=True, eq=False)
class Statevector:
    amplitudes: np.ndarray
    qubit_count: int = field(default=-1)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = int(round(math.log2(amps.size))) if amps.size else -1
        if amps.size == 0 or 2**n != amps.size:
            raise ValueError(f"amplitude vector length {amps.size} is not a power of two")
        if self.qubit_count not in (-1, n):
            raise ValueError(f"{amps.size} amplitudes do not describe {self.qubit_count} qubits")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 by more than {NORM_TOL}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "qubit_count", n)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "Statevector") -> complex:
        """<self|other>."""
        if other.qubit_count != self.qubit_count:
            raise ValueError("qubit counts differ")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def bits_to_index(bits: str) -> int:
    return int(bits, 2)


def index_to_bits(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def basis_state(bits: str) -> Statevector:
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"not a bitstring: {bits!r}")
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[bits_to_index(bits)] = 1.0
    return Statevector(amps)


def apply_gate_batch(psi: np.ndarray, gate: Gate) -> np.ndarray:
    """Apply ``gate`` to every state of a ``(batch, 2, ..., 2)`` array."""
    n = psi.ndim - 1
    if max(gate.targets) >= n:
        raise ValueError(f"gate {gate.dump()} outside a {n}-qubit register")
    u = gate.base_matrix()
    if not gate.is_two_qubit:
        axis = gate.targets[0] + 1
        out = np.tensordot(u, psi, axes=([1], [axis]))
        return np.moveaxis(out, 0, axis)
    control, target = gate.targets
    out = psi.copy()
    sel = [slice(None)] * psi.ndim
    sel[control + 1] = 1
    sel = tuple(sel)
    sub = psi[sel]
    # target axis index inside the sub-array (control axis removed)
    t_axis = target + 1 if target < control else target
    if gate.kind == "CNOT":
        out[sel] = np.flip(sub, axis=t_axis)
    else:
        moved = np.tensordot(u, sub, axes=([1], [t_axis]))
        out[sel] = np.moveaxis(moved, 0, t_axis)
    return out


def _as_tensor(state: Statevector) -> np.ndarray:
    return state.amplitudes.reshape((1,) + (2,) * state.qubit_count)


def _from_tensor(psi: np.ndarray) -> Statevector:
    return Statevector(psi.reshape(-1))


def apply(state: Statevector, gate: Gate) -> Statevector:
    return _from_tensor(apply_gate_batch(_as_tensor(state), gate))


def apply_circuit(state: Statevector, circuit: Circuit) -> Statevector:
    if circuit.qubit_count != state.qubit_count:
        raise ValueError(
            f"circuit on {circuit.qubit_count} qubits applied to {state.qubit_count}-qubit state"
        )
    psi = _as_tensor(state)
    for g in circuit.gates:
        psi = apply_gate_batch(psi, g)
    return _from_tensor(psi)


@lru_cache(maxsize=128)
def _eigensystem(op: PauliOperator) -> tuple[np.ndarray, np.ndarray]:
    return _hermitian_eigh(to_dense(op))


def _hermitian_eigh(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scale = max(1.0, float(np.abs(mat).max()))
    if np.abs(mat - mat.conj().T).max() > 1e-12 * scale:
        raise ValueError("Hamiltonian is not Hermitian")
    return np.linalg.eigh(mat)


def eigensystem(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a PauliOperator (cached) or a dense matrix."""
    if isinstance(h, PauliOperator):
        return _eigensystem(h)
    mat = np.asarray(h, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected a square matrix")
    return _hermitian_eigh(mat)


def evolve_exact(h, t: float, state: Statevector) -> Statevector:
    """exp(-iHt)|state> via the eigendecomposition of the dense Hamiltonian."""
    evals, evecs = eigensystem(h)
    if evecs.shape[0] != state.amplitudes.size:
        raise ValueError("Hamiltonian and state dimensions differ")
    coeffs = evecs.conj().T @ state.amplitudes
    return Statevector(evecs @ (np.exp(-1j * evals * t) * coeffs))


def _hopping_pairs(op: PauliOperator) -> dict[tuple[int, int], float]:
    """Pair -> w for an operator made of w/2 (XX + YY) blocks on adjacent qubits."""
    pairs: dict[tuple[int, int], dict[str, float]] = {}
    for term in op:
        sup = term.support
        if len(sup) != 2:
            raise ValueError(f"term {term.factors} is not a two-qubit hopping string")
        letters = term.factors[sup[0]] + term.factors[sup[1]]
        if letters not in ("XX", "YY"):
            raise ValueError(f"term {term.factors} is not an XX or YY string")
        pairs.setdefault(sup, {})[letters] = term.coefficient
    out = {}
    for pair, coeffs in pairs.items():
        xx, yy = coeffs.get("XX", 0.0), coeffs.get("YY", 0.0)
        if abs(xx - yy) > 1e-12 * max(1.0, abs(xx)):
            raise ValueError(f"pair {pair} has unequal XX/YY weights; not a hopping term")
        out[pair] = 2 * xx
    return out


def hopping_block(i: int, j: int, angle: float, rotation: str = "CRx") -> list[Gate]:
    """CNOT(i->j) . C-R(j->i, angle) . CNOT(i->j).

    Acts as R(angle) on span{|01>, |10>} of qubits (i, j) and as identity on
    |00>, |11>. With ``CRx`` and ``angle = 2 w dt`` it equals
    exp(-i dt w (XX + YY) / 2).
    """
    return [Gate("CNOT", (i, j)), Gate(rotation, (j, i), angle), Gate("CNOT", (i, j))]


def trotter_step_circuit(split: TrotterSplit, dt: float) -> Circuit:
    """One first-order step exp(-i h1 dt) exp(-i h2 dt) exp(-i h3 dt).

    The rightmost factor acts first, so gates run h3, then h2, then h1. The
    identity part of h1 is a global phase and is dropped.
    """
    if not math.isfinite(dt):
        raise ValueError("dt must be finite")
    n = split.qubit_count
    gates: list[Gate] = []
    for group in (split.h3, split.h2):
        for (i, j), w in sorted(_hopping_pairs(group).items()):
            gates.extend(hopping_block(i, j, 2 * w * dt))
    for term in split.h1:
        sup = term.support
        if not sup:
            continue
        if len(sup) != 1 or term.factors[sup[0]] != "Z":
            raise ValueError(f"h1 term {term.factors} is not a single Z")
        # (alpha/2) Z -> Rz(alpha dt)
        gates.append(Gate("Rz", (sup[0],), 2 * term.coefficient * dt))
    return Circuit(n, tuple(gates))


def trotter_circuit(split: TrotterSplit, t: float, n_t: int) -> Circuit:
    if n_t < 1:
        raise ValueError("n_t must be at least 1")
    return trotter_step_circuit(split, t / n_t).repeat(n_t)


def evolve_trotter(split: TrotterSplit, t: float, n_t: int, state: Statevector) -> Statevector:
    return apply_circuit(state, trotter_circuit(split, t, n_t))


def expectation(h, state: Statevector) -> float:
    mat = to_dense(h) if isinstance(h, PauliOperator) else np.asarray(h)
    if mat.shape[0] != state.amplitudes.size:
        raise ValueError("operator and state dimensions differ")
    val = np.vdot(state.amplitudes, mat @ state.amplitudes)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError("expectation value is not real; operator not Hermitian?")
    return float(val.real)


def probability_vector(state: Statevector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def probabilities(state: Statevector, cutoff: float = 0.0) -> dict[str, float]:
    p = probability_vector(state)
    n = state.qubit_count
    return {index_to_bits(i, n): float(v) for i, v in enumerate(p) if v > cutoff}


def shot_blocks(n_shot: int, seed: int, block: int = SHOT_BLOCK):
    """Fixed-size shot partitions with their own generators.

    Partitioning depends only on ``n_shot``, so merged counts do not depend
    on how blocks are spread over workers.
    """
    if n_shot < 1:
        raise ValueError("n_shot must be at least 1")
    for k, start in enumerate(range(0, n_shot, block)):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
        yield min(block, n_shot - start), rng


def draw_outcomes(probs: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw. ``probs`` is (dim,) or (shots, dim), one row per shot."""
    cdf = np.cumsum(probs, axis=-1)
    cdf /= cdf[..., -1:]
    if cdf.ndim == 1:
        idx = np.searchsorted(cdf, uniforms, side="right")
    else:
        idx = (cdf <= uniforms[:, None]).sum(axis=1)
    return np.minimum(idx, probs.shape[-1] - 1)


def tally(indices: Iterable[np.ndarray], n: int) -> dict[str, int]:
    counts = np.zeros(2**n, dtype=np.int64)
    for idx in indices:
        counts += np.bincount(idx, minlength=2**n)
    return {index_to_bits(i, n): int(c) for i, c in enumerate(counts) if c}


def sample(state: Statevector, n_shot: int, seed: int) -> dict[str, int]:
    """Seeded i.i.d. measurement counts in the computational basis."""
    p = probability_vector(state)
    idx = (draw_outcomes(p, rng.random(size)) for size, rng in shot_blocks(n_shot, seed))
    return tally(idx, state.qubit_count)


def random_state(n: int, rng: np.random.Generator) -> Statevector:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return Statevector(v / np.linalg.norm(v))


def random_circuit(n: int, depth: int, rng: np.random.Generator) -> Circuit:
    gates = []
    for _ in range(depth):
        kind = GATE_KINDS[rng.integers(len(GATE_KINDS))]
        if kind in _TWO_QUBIT:
            c, t = rng.choice(n, size=2, replace=False)
            targets: Sequence[int] = (int(c), int(t))
        else:
            targets = (int(rng.integers(n)),)
        angle = float(rng.uniform(-2 * np.pi, 2 * np.pi)) if kind in _ROTATIONS else None
        gates.append(Gate(kind, tuple(targets), angle))
    return Circuit(n, tuple(gates))


__all__ = [
    "Gate", "Circuit", "Statevector", "basis_state", "apply", "apply_circuit",
    "evolve_exact", "trotter_step_circuit", "trotter_circuit", "evolve_trotter",
    "expectation", "probabilities", "sample", "MAX_DENSE_QUBITS",
]
