"""Variational preparation of the free vacuum with a charge-conserving ansatz.

Ansatz on five qubits, nine angles:
    CNOT-CRy-CNOT on (0,1) and (2,3)    theta[0], theta[1]
    Rz on qubits 0..4                   theta[4..8]
    CNOT-CRy-CNOT on (1,2) and (3,4)    theta[2], theta[3]
Each entangling block rotates within span{|01>, |10>} of its pair, so the
Hamming weight of the input is preserved.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateGroundStateError, OptimizationError
from .hamiltonian import PauliOperator, sector_indices, to_dense, vacuum_bits
from .simulator import Circuit, Gate, Statevector, apply_circuit, basis_state, hopping_block

N_PARAMS = 9
FIRST_LAYER = ((0, 1), (2, 3))
SECOND_LAYER = ((1, 2), (3, 4))
THETA_BOUND = 2 * math.pi
N_QUBITS = 5


def _check_theta(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != N_PARAMS:
        raise ValueError(f"ansatz takes {N_PARAMS} angles, got {theta.size}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("ansatz angles must be finite")
    return theta


def ansatz_circuit(theta) -> Circuit:
    theta = _check_theta(theta)
    gates: list[Gate] = []
    for (i, j), angle in zip(FIRST_LAYER, theta[0:2]):
        gates.extend(hopping_block(i, j, angle, rotation="CRy"))
    for q in range(N_QUBITS):
        gates.append(Gate("Rz", (q,), theta[4 + q]))
    for (i, j), angle in zip(SECOND_LAYER, theta[2:4]):
        gates.extend(hopping_block(i, j, angle, rotation="CRy"))
    return Circuit(N_QUBITS, tuple(gates))


def reference_state() -> Statevector:
    return basis_state(vacuum_bits(N_QUBITS))


class _FastAnsatz:
    """Ansatz state from index arithmetic; equivalent to ``ansatz_circuit`` on a statevector."""

    def __init__(self, n: int = N_QUBITS):
        idx = np.arange(2**n)
        bit = lambda q: (idx >> (n - 1 - q)) & 1  # noqa: E731
        self._pairs = {}
        for i, j in FIRST_LAYER + SECOND_LAYER:
            lo = idx[(bit(i) == 0) & (bit(j) == 1)]  # |..0_i..1_j..>
            hi = lo + (1 << (n - 1 - i)) - (1 << (n - 1 - j))  # |..1_i..0_j..>
            self._pairs[(i, j)] = (lo, hi)
        self._zsign = np.array([1 - 2 * bit(q) for q in range(n)], dtype=float)
        self._start = reference_state().amplitudes.copy()

    def _block(self, psi, pair, theta):
        lo, hi = self._pairs[pair]
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        a, b = psi[lo], psi[hi]
        psi[lo], psi[hi] = c * a - s * b, s * a + c * b

    def state(self, theta) -> np.ndarray:
        psi = self._start.copy()
        for pair, angle in zip(FIRST_LAYER, theta[0:2]):
            self._block(psi, pair, angle)
        # Rz(t) contributes exp(-i t z / 2) with z = +1 for bit 0, -1 for bit 1
        psi *= np.exp(-0.5j * (theta[4:9] @ self._zsign))
        for pair, angle in zip(SECOND_LAYER, theta[2:4]):
            self._block(psi, pair, angle)
        return psi


_FAST = _FastAnsatz()


def ansatz_state(theta) -> Statevector:
    return apply_circuit(reference_state(), ansatz_circuit(theta))


def energy(theta, h0: PauliOperator) -> float:
    """<10101| U(theta)^dagger H0 U(theta) |10101>, exact (no shot noise)."""
    theta = _check_theta(theta)
    return _energy_dense(theta, to_dense(h0))


def _energy_dense(theta: np.ndarray, mat: np.ndarray) -> float:
    psi = _FAST.state(theta)
    return float(np.vdot(psi, mat @ psi).real)


def fidelity(psi: Statevector, phi: Statevector) -> float:
    if psi.qubit_count != phi.qubit_count:
        raise ValueError("qubit counts differ")
    return float(min(1.0, abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2))


def exact_ground_state(h, charge: int = 0, degeneracy_tol: float = 1e-10) -> Statevector:
    """Lowest eigenvector inside the given charge sector, phase-fixed.

    The sector is the Hamming weight of the vacuum pattern plus ``charge``.
    """
    mat = to_dense(h) if isinstance(h, PauliOperator) else np.asarray(h, dtype=complex)
    n = int(round(math.log2(mat.shape[0])))
    weight = vacuum_bits(n).count("1") + charge
    idx = sector_indices(n, weight)
    if idx.size == 0:
        raise ValueError(f"empty charge sector {charge}")
    evals, evecs = np.linalg.eigh(mat[np.ix_(idx, idx)])
    if evals.size > 1 and evals[1] - evals[0] < degeneracy_tol:
        raise DegenerateGroundStateError(
            f"ground level degenerate within {degeneracy_tol}: gap {evals[1] - evals[0]:.3e}"
        )
    vec = evecs[:, 0]
    k = np.argmax(np.abs(vec))
    vec = vec * (abs(vec[k]) / vec[k])
    amps = np.zeros(2**n, dtype=complex)
    amps[idx] = vec
    return Statevector(amps)


def ground_energy(h, charge: int = 0) -> float:
    mat = to_dense(h) if isinstance(h, PauliOperator) else np.asarray(h)
    n = int(round(math.log2(mat.shape[0])))
    idx = sector_indices(n, vacuum_bits(n).count("1") + charge)
    return float(np.linalg.eigvalsh(mat[np.ix_(idx, idx)])[0])


@dataclass(frozen=True)
class VQEOptions:
    max_iter: int = 4000
    tol: float = 1e-10
    restarts: int = 8
    seed: int = 0
    min_fidelity: float = 0.99
    workers: int = 1


@dataclass(frozen=True)
class VQEResult:
    theta: tuple[float, ...]
    energy: float
    fidelity: float
    ground_energy: float
    init_energy: float
    restart: int
    n_evals: int

    def to_record(self, mprime: float, a: float, eE: float = 0.0) -> dict:
        return {
            "m'": mprime,
            "a": a,
            "eE": eE,
            "theta": list(self.theta),
            "fidelity": self.fidelity,
            "energy": self.energy,
        }

    def as_dict(self) -> dict:
        return asdict(self)


def _run_restart(mat, x0, opts: VQEOptions):
    def objective(x):
        return _energy_dense(np.clip(x, -THETA_BOUND, THETA_BOUND), mat)

    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={"maxiter": opts.max_iter, "xatol": 1e-9, "fatol": opts.tol, "adaptive": False},
    )
    x = np.clip(res.x, -THETA_BOUND, THETA_BOUND)
    return x, objective(x), res.nfev


def optimize(h0: PauliOperator, init=None, opts: VQEOptions | None = None) -> VQEResult:
    """Multi-start Nelder-Mead on the exact ansatz energy.

    Restart 0 starts at ``init``; restart r > 0 starts from ``init`` plus a
    uniform offset in [-pi, pi] drawn from a generator keyed on (seed, r).
    Raises OptimizationError (carrying the best result) when the best
    fidelity stays below ``opts.min_fidelity``.
    """
    opts = opts or VQEOptions()
    if h0.qubit_count != N_QUBITS:
        raise ValueError(f"ansatz is defined on {N_QUBITS} qubits")
    init = np.zeros(N_PARAMS) if init is None else np.clip(_check_theta(init), -THETA_BOUND, THETA_BOUND)
    mat = to_dense(h0)
    starts = [init]
    for r in range(1, max(1, opts.restarts)):
        rng = np.random.default_rng(np.random.SeedSequence(opts.seed, spawn_key=(r,)))
        starts.append(np.clip(init + rng.uniform(-math.pi, math.pi, N_PARAMS), -THETA_BOUND, THETA_BOUND))

    if opts.workers > 1:
        with ThreadPoolExecutor(opts.workers) as pool:
            runs = list(pool.map(lambda x0: _run_restart(mat, x0, opts), starts))
    else:
        runs = [_run_restart(mat, x0, opts) for x0 in starts]

    best = min(range(len(runs)), key=lambda r: (runs[r][1], r))
    theta, e_best, _ = runs[best]
    exact = exact_ground_state(mat)
    result = VQEResult(
        theta=tuple(float(v) for v in theta),
        energy=float(e_best),
        fidelity=fidelity(Statevector(_FAST.state(theta)), exact),
        ground_energy=ground_energy(mat),
        init_energy=_energy_dense(init, mat),
        restart=best,
        n_evals=sum(r[2] for r in runs),
    )
    if result.fidelity < opts.min_fidelity:
        raise OptimizationError(
            f"best VQE fidelity {result.fidelity:.5f} below {opts.min_fidelity}", best=result
        )
    return result
