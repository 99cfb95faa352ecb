"""Lattice Hamiltonians of the reduced (1+1)D Schwinger problem as Pauli sums.

Qubit 0 is the leftmost character of every Pauli string and bitstring. With
``Z|0> = +|0>`` the site occupation is ``(Z + 1) / 2``, so the staggered
mass term is minimised by ``|10101>`` (even sites empty, odd sites filled).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping

import numpy as np

PAULI_LETTERS = "IXYZ"
MAX_DENSE_QUBITS = 12

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit Pauli products: (a, b) -> (phase, a*b)
_PAULI_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


@dataclass(frozen=True)
class LatticeParams:
    """Parameters of one (1+1)D lattice problem.

    ``m`` is the mass entering the lattice Hamiltonian (the effective mass
    m' when scanning transverse momenta). ``n_sites`` counts qubits in one
    parity sector; ``n_full`` is the staggered lattice size before the
    parity reduction.
    """

    m: float = 1.0
    eE: float = 20.0
    a: float = 0.45
    n_sites: int = 5
    n_full: int | None = None

    def __post_init__(self):
        if self.n_full is None:
            object.__setattr__(self, "n_full", 2 * self.n_sites)
        if not self.a > 0:
            raise ValueError(f"lattice spacing must be positive, got {self.a}")
        if self.n_sites < 2:
            raise ValueError(f"need at least 2 sites per sector, got {self.n_sites}")
        if self.n_full != 2 * self.n_sites:
            raise ValueError(f"n_full must equal 2*n_sites, got {self.n_full} vs {self.n_sites}")
        if self.m < 0 or self.eE < 0:
            raise ValueError("m and eE must be nonnegative")
        if not all(math.isfinite(v) for v in (self.m, self.eE, self.a)):
            raise ValueError("lattice parameters must be finite")

    @property
    def volume(self) -> float:
        """Spatial extent a*N used to convert decay exponents into rates."""
        return self.a * self.n_sites

    def with_mass(self, m: float) -> "LatticeParams":
        return LatticeParams(m=m, eE=self.eE, a=self.a, n_sites=self.n_sites)

    def with_field(self, eE: float) -> "LatticeParams":
        return LatticeParams(m=self.m, eE=eE, a=self.a, n_sites=self.n_sites)


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    factors: str

    def __post_init__(self):
        object.__setattr__(self, "coefficient", float(self.coefficient))
        if not math.isfinite(self.coefficient):
            raise ValueError(f"non-finite coefficient on {self.factors}")
        if not self.factors or any(c not in PAULI_LETTERS for c in self.factors):
            raise ValueError(f"invalid Pauli string {self.factors!r}")

    @property
    def qubit_count(self) -> int:
        return len(self.factors)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.factors) if c != "I")


class PauliOperator:
    """Real-weighted sum of Hermitian Pauli strings on a fixed register.

    Terms with the same string are merged on construction and stored sorted
    by string, so equality is term-exact and the text dump is deterministic.
    """

    __slots__ = ("_terms", "_qubit_count")

    def __init__(self, terms: Iterable[PauliTerm], qubit_count: int):
        if qubit_count < 1:
            raise ValueError("qubit_count must be positive")
        merged: dict[str, float] = {}
        for term in terms:
            if term.qubit_count != qubit_count:
                raise ValueError(
                    f"term {term.factors} has {term.qubit_count} qubits, expected {qubit_count}"
                )
            merged[term.factors] = merged.get(term.factors, 0.0) + term.coefficient
        self._terms = tuple(
            PauliTerm(c, s) for s, c in sorted(merged.items()) if c != 0.0
        )
        self._qubit_count = qubit_count

    @classmethod
    def from_dict(cls, coeffs: Mapping[str, float], qubit_count: int | None = None):
        if qubit_count is None:
            if not coeffs:
                raise ValueError("qubit_count required for an empty operator")
            qubit_count = len(next(iter(coeffs)))
        return cls((PauliTerm(c, s) for s, c in coeffs.items()), qubit_count)

    @classmethod
    def zero(cls, qubit_count: int) -> "PauliOperator":
        return cls((), qubit_count)

    @property
    def terms(self) -> tuple[PauliTerm, ...]:
        return self._terms

    @property
    def qubit_count(self) -> int:
        return self._qubit_count

    def to_dict(self) -> dict[str, float]:
        return {t.factors: t.coefficient for t in self._terms}

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __add__(self, other: "PauliOperator") -> "PauliOperator":
        if not isinstance(other, PauliOperator):
            return NotImplemented
        if other.qubit_count != self.qubit_count:
            raise ValueError("qubit counts differ")
        return PauliOperator(self._terms + other._terms, self._qubit_count)

    def __mul__(self, scalar: float) -> "PauliOperator":
        return PauliOperator(
            (PauliTerm(t.coefficient * scalar, t.factors) for t in self._terms),
            self._qubit_count,
        )

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return self._qubit_count == other._qubit_count and self._terms == other._terms

    def __hash__(self):
        return hash((self._qubit_count, self._terms))

    def __repr__(self):
        return f"PauliOperator({len(self._terms)} terms, qubit_count={self._qubit_count})"

    def dump(self) -> str:
        """Tab-separated ``coefficient<TAB>string`` lines, sorted by string."""
        return "".join(f"{float(t.coefficient)!r}\t{t.factors}\n" for t in self._terms)

    @classmethod
    def parse(cls, text: str) -> "PauliOperator":
        terms = []
        for line in text.splitlines():
            if not line.strip():
                continue
            coeff, factors = line.split("\t")
            terms.append(PauliTerm(float(coeff), factors.strip()))
        if not terms:
            raise ValueError("empty operator dump")
        return cls(terms, terms[0].qubit_count)


@dataclass(frozen=True)
class TrotterSplit:
    """Three groups whose members mutually commute (the diagonal part, then even and odd pairs)."""

    h1: PauliOperator
    h2: PauliOperator
    h3: PauliOperator

    @property
    def qubit_count(self) -> int:
        return self.h1.qubit_count

    def total(self) -> PauliOperator:
        return self.h1 + self.h2 + self.h3


def effective_mass(m: float, p_perp: float) -> float:
    if m < 0 or p_perp < 0:
        raise ValueError("mass and transverse momentum must be nonnegative")
    return math.hypot(m, p_perp)


def analytic_rate_1p1(m: float, eE: float) -> float:
    """Continuum (1+1)D vacuum decay rate per unit length, ``(eE/2pi)|ln(1 - exp(-pi m^2/eE))|``."""
    if m < 0 or eE < 0:
        raise ValueError("m and eE must be nonnegative")
    if eE == 0:
        if m == 0:
            raise ValueError("rate undefined for m = eE = 0")
        return 0.0
    if m == 0:
        raise ValueError("rate diverges for a massless fermion in a nonzero field")
    x = math.pi * m * m / eE
    # log(1 - e^-x) without cancellation at either end of the x range
    log_term = math.log(-math.expm1(-x)) if x < math.log(2) else math.log1p(-math.exp(-x))
    return eE / (2 * math.pi) * abs(log_term)


def mass_grid(m: float, m_max: float, step: float) -> np.ndarray:
    """Uniform grid from m to m_max; the final panel is shortened to land on m_max."""
    if step <= 0:
        raise ValueError(f"grid_step must be positive, got {step}")
    n_full = int(math.floor((m_max - m) / step + 1e-9))
    grid = m + step * np.arange(n_full + 1)
    if m_max - grid[-1] > 1e-9 * max(1.0, m_max):
        grid = np.append(grid, m_max)
    else:
        grid[-1] = m_max
    return grid


def trapezoid_rate_integral(grid, rates) -> float:
    """Integral of m' * Gamma(m') / pi over the m' grid (trapezoid rule)."""
    grid = np.asarray(grid, dtype=float)
    rates = np.asarray(rates, dtype=float)
    return float(np.trapezoid(grid * rates, grid) / math.pi)


CONVENTIONS = ("literal", "paper")


def normalize_convention(convention: str) -> str:
    key = convention.lower().replace("_", "-")
    if key in ("paper", "paper-match"):
        return "paper"
    if key == "literal":
        return "literal"
    raise ValueError(f"unknown normalization convention {convention!r}")


def analytic_rate_3p1(
    m: float,
    eE: float,
    p_perp_max: float,
    grid_step: float = 0.2,
    convention: str = "literal",
) -> float:
    """Integrate the (1+1)D rate over transverse momenta up to ``p_perp_max``.

    ``literal`` returns 2 * int d^2p/(2pi)^2 Gamma_1+1, i.e. the m'-integral of
    m' Gamma / pi; ``paper`` divides that by a further pi, which is the
    normalization that reproduces the published theory number.
    """
    convention = normalize_convention(convention)
    if grid_step <= 0:
        raise ValueError(f"grid_step must be positive, got {grid_step}")
    if p_perp_max < 0:
        raise ValueError("p_perp_max must be nonnegative")
    if p_perp_max == 0:
        return 0.0
    grid = mass_grid(m, effective_mass(m, p_perp_max), grid_step)
    rates = [analytic_rate_1p1(mp, eE) for mp in grid]
    value = trapezoid_rate_integral(grid, rates)
    return value / math.pi if convention == "paper" else value


def _pauli_mul(a: str, b: str) -> tuple[complex, str]:
    phase = 1 + 0j
    out = []
    for x, y in zip(a, b):
        p, z = _PAULI_PRODUCT[(x, y)]
        phase *= p
        out.append(z)
    return phase, "".join(out)


def _single(n: int, q: int, letter: str) -> str:
    return "I" * q + letter + "I" * (n - q - 1)


def _ladder(n: int, q: int, raising: bool) -> dict[str, complex]:
    # sigma^+- = (X +- iY) / 2
    sign = 1 if raising else -1
    return {_single(n, q, "X"): 0.5, _single(n, q, "Y"): 0.5j * sign}


def _product(p: dict[str, complex], q: dict[str, complex]) -> dict[str, complex]:
    out: dict[str, complex] = {}
    for sa, ca in p.items():
        for sb, cb in q.items():
            phase, s = _pauli_mul(sa, sb)
            out[s] = out.get(s, 0) + phase * ca * cb
    return out


def hopping_terms(n: int, i: int, j: int, strength: float) -> list[PauliTerm]:
    """``strength * [s+(i)s-(j) + s+(j)s-(i)]`` expanded into Pauli strings."""
    acc: dict[str, complex] = {}
    for a, b in ((i, j), (j, i)):
        for s, c in _product(_ladder(n, a, True), _ladder(n, b, False)).items():
            acc[s] = acc.get(s, 0) + c
    terms = []
    for s, c in acc.items():
        if abs(c.imag) > 1e-14:
            raise AssertionError("hopping expansion left an anti-Hermitian part")
        if abs(c.real) > 0:
            terms.append(PauliTerm(strength * c.real, s))
    return terms


def site_coefficient(k: int, params: LatticeParams) -> float:
    """(-1)^k m + eE a k: the on-site energy of lattice site k."""
    return (-1) ** k * params.m + params.eE * params.a * k


def build_parity_hamiltonian(sector: str, params: LatticeParams) -> PauliOperator:
    """Spin form of the parity-even (``"even"``) or parity-odd (``"odd"``) Hamiltonian.

    Even sector: sites 0..n-1 on qubits 0..n-1, the reduced hopping 1/(sqrt2 a)
    on the pair touching site 0. Odd sector: sites 1..n on qubits 0..n-1,
    reduced hopping on the pair touching site n.
    """
    n = params.n_sites
    a = params.a
    if sector in ("even", "+"):
        sites = list(range(0, n))
        boundary = 0
    elif sector in ("odd", "-"):
        sites = list(range(1, n + 1))
        boundary = n - 2
    else:
        raise ValueError(f"unknown parity sector {sector!r}")

    terms: list[PauliTerm] = []
    identity = "I" * n
    for q, k in enumerate(sites):
        c = site_coefficient(k, params)
        # c * (Z + 1) / 2
        terms.append(PauliTerm(c / 2, _single(n, q, "Z")))
        terms.append(PauliTerm(c / 2, identity))
    for q in range(n - 1):
        strength = 1 / (math.sqrt(2) * a) if q == boundary else 1 / (2 * a)
        terms.extend(hopping_terms(n, q, q + 1, strength))
    return PauliOperator(terms, n)


def mass_term_hamiltonian(params: LatticeParams) -> PauliOperator:
    """Staggered mass term alone on the even sector (no hopping, no field)."""
    n = params.n_sites
    terms = []
    for k in range(n):
        c = (-1) ** k * params.m
        terms.append(PauliTerm(c / 2, _single(n, k, "Z")))
        terms.append(PauliTerm(c / 2, "I" * n))
    return PauliOperator(terms, n)


def _hopping_pair(term: PauliTerm) -> tuple[int, int] | None:
    sup = term.support
    if len(sup) == 2 and sup[1] == sup[0] + 1:
        letters = {term.factors[sup[0]], term.factors[sup[1]]}
        if letters in ({"X"}, {"Y"}):
            return sup
    return None


def split_trotter_terms(h_even: PauliOperator, params: LatticeParams | None = None) -> TrotterSplit:
    """Partition into Z/identity terms, hopping on pairs (0,1),(2,3),... and on (1,2),(3,4),..."""
    n = h_even.qubit_count
    if params is not None and params.n_sites != n:
        raise ValueError("operator size does not match params.n_sites")
    groups: list[list[PauliTerm]] = [[], [], []]
    for term in h_even:
        sup = term.support
        if all(term.factors[q] == "Z" for q in sup) and len(sup) <= 1:
            groups[0].append(term)
            continue
        pair = _hopping_pair(term)
        if pair is None:
            raise ValueError(f"term {term.factors} fits none of the three Trotter groups")
        groups[1 if pair[0] % 2 == 0 else 2].append(term)
    return TrotterSplit(*(PauliOperator(g, n) for g in groups))


def to_dense(op: PauliOperator, max_qubits: int = MAX_DENSE_QUBITS) -> np.ndarray:
    """Dense matrix of ``op`` in the bit-ordering where qubit 0 is most significant."""
    n = op.qubit_count
    if n > max_qubits:
        raise ValueError(f"{n} qubits exceeds the dense cap of {max_qubits}")
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for term in op:
        mats = [_PAULI_MATRICES[c] for c in term.factors]
        out += term.coefficient * reduce(np.kron, mats)
    return out


def vacuum_bits(n_sites: int) -> str:
    """Mass-term ground state ``1010...`` of the even sector."""
    return "".join("1" if k % 2 == 0 else "0" for k in range(n_sites))


def charge_weight(bitstring: str, reference: str | None = None) -> int:
    """Hamming weight relative to the vacuum pattern; 0 marks the physical sector."""
    if reference is None:
        reference = vacuum_bits(len(bitstring))
    if len(bitstring) != len(reference):
        raise ValueError(f"bitstring length {len(bitstring)} != {len(reference)}")
    if any(c not in "01" for c in bitstring):
        raise ValueError(f"not a bitstring: {bitstring!r}")
    return bitstring.count("1") - reference.count("1")


def sector_indices(n_qubits: int, weight: int) -> np.ndarray:
    """Basis indices whose bitstrings carry ``weight`` ones."""
    idx = np.arange(2**n_qubits)
    ones = np.zeros_like(idx)
    for q in range(n_qubits):
        ones += (idx >> q) & 1
    return idx[ones == weight]


def charge_projector(n_qubits: int, weight: int) -> np.ndarray:
    diag = np.zeros(2**n_qubits)
    diag[sector_indices(n_qubits, weight)] = 1.0
    return np.diag(diag)
