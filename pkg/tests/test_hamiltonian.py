import math
from pathlib import Path

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schwinger.hamiltonian import (
    LatticeParams,
    PauliOperator,
    PauliTerm,
    analytic_rate_1p1,
    analytic_rate_3p1,
    build_parity_hamiltonian,
    charge_projector,
    charge_weight,
    effective_mass,
    mass_grid,
    mass_term_hamiltonian,
    split_trotter_terms,
    to_dense,
    vacuum_bits,
)

DATA = Path(__file__).parent / "data"


def rate_oracle(m, eE):
    """Continuum rate at 40 significant digits."""
    with mpmath.workdps(40):
        m, eE = mpmath.mpf(m), mpmath.mpf(eE)
        return eE / (2 * mpmath.pi) * abs(mpmath.log(1 - mpmath.exp(-mpmath.pi * m**2 / eE)))


def occupation_oracle(params, sites, boundary):
    """Dense H built directly in the occupation basis, no Pauli algebra.

    Diagonal: sum of c_k over sites whose qubit reads 0. Off-diagonal: the
    hopping amplitude w between states that differ by swapping a 01/10 pair
    on neighbouring qubits.
    """
    n = len(sites)
    dim = 2**n
    H = np.zeros((dim, dim))
    for idx in range(dim):
        bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
        for q, k in enumerate(sites):
            if bits[q] == 0:
                H[idx, idx] += (-1) ** k * params.m + params.eE * params.a * k
        for q in range(n - 1):
            if bits[q] != bits[q + 1]:
                w = 1 / (math.sqrt(2) * params.a) if q == boundary else 1 / (2 * params.a)
                H[idx ^ (1 << (n - 1 - q)) ^ (1 << (n - 2 - q)), idx] += w
    return H


# --- analytic rate ----------------------------------------------------------

def test_rate_frozen_values():
    # independent high-precision values, frozen
    assert analytic_rate_1p1(1.4, 20.0) == pytest.approx(4.227313115465881, rel=1e-12)
    assert analytic_rate_1p1(1.0, 20.0) == pytest.approx(float(rate_oracle(1.0, 20.0)), rel=1e-12)


def test_rate_edge_cases():
    assert analytic_rate_1p1(1.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        analytic_rate_1p1(0.0, 1.0)
    with pytest.raises(ValueError):
        analytic_rate_1p1(-1.0, 1.0)
    # large pi m^2/eE: no underflow to log(1) = 0 artefacts beyond exp(-x)
    big = analytic_rate_1p1(10.0, 1.0)
    assert big == pytest.approx(float(rate_oracle(10.0, 1.0)), rel=1e-10)
    assert big > 0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.1, 100.0))
def test_rate_matches_mpmath(m, eE):
    assert analytic_rate_1p1(m, eE) == pytest.approx(float(rate_oracle(m, eE)), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.01, 1.0), st.floats(1.0, 50.0))
def test_rate_decreases_with_mass(m, dm, eE):
    assert analytic_rate_1p1(m + dm, eE) <= analytic_rate_1p1(m, eE)


def test_effective_mass():
    assert effective_mass(1.0, 0.0) == 1.0
    assert effective_mass(0.6, 0.8) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        effective_mass(-1.0, 0.5)


def test_mass_grid_shortens_last_panel():
    np.testing.assert_allclose(mass_grid(1.0, 2.0, 0.2), [1.0, 1.2, 1.4, 1.6, 1.8, 2.0])
    g = mass_grid(1.0, 1.5, 0.2)
    np.testing.assert_allclose(g, [1.0, 1.2, 1.4, 1.5])
    with pytest.raises(ValueError):
        mass_grid(1.0, 2.0, 0.0)


def test_analytic_3p1_conventions():
    pmax = math.sqrt(3.0)  # m' runs from 1 to 2
    literal = analytic_rate_3p1(1.0, 20.0, pmax, 0.2, "literal")
    paper = analytic_rate_3p1(1.0, 20.0, pmax, 0.2, "paper-match")
    assert paper == pytest.approx(literal / math.pi, rel=1e-14)
    assert paper == pytest.approx(0.5757, abs=5e-4)
    assert analytic_rate_3p1(1.0, 20.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        analytic_rate_3p1(1.0, 20.0, 1.0, convention="natural")


# --- operator construction --------------------------------------------------

def test_golden_dump(h_plus):
    assert h_plus.dump() == (DATA / "h_plus_benchmark.txt").read_text()


def test_dump_parse_roundtrip(h_plus):
    assert PauliOperator.parse(h_plus.dump()) == h_plus


@pytest.mark.parametrize("m,eE", [(1.0, 20.0), (1.4, 0.0), (2.0, 5.0)])
def test_even_sector_matches_occupation_oracle(m, eE):
    params = LatticeParams(m=m, eE=eE, a=0.45)
    H = to_dense(build_parity_hamiltonian("even", params))
    np.testing.assert_allclose(H, occupation_oracle(params, range(5), boundary=0), atol=1e-13)


def test_odd_sector_matches_occupation_oracle():
    params = LatticeParams(m=1.2, eE=20.0, a=0.45)
    H = to_dense(build_parity_hamiltonian("odd", params))
    np.testing.assert_allclose(H, occupation_oracle(params, range(1, 6), boundary=3), atol=1e-13)


def test_hermitian(h_plus):
    H = to_dense(h_plus)
    np.testing.assert_allclose(H, H.conj().T, atol=1e-14)


def test_commutes_with_charge(h_plus):
    H = to_dense(h_plus)
    for w in range(6):
        P = charge_projector(5, w)
        assert np.linalg.norm(H @ P - P @ H) < 1e-12


def test_mass_term_ground_state():
    H = to_dense(mass_term_hamiltonian(LatticeParams(m=1.0)))
    diag = np.real(np.diag(H))
    assert np.argmin(diag) == int("10101", 2)
    assert np.sum(diag == diag.min()) == 1
    assert vacuum_bits(5) == "10101"


def test_trotter_split_partitions(h_plus):
    split = split_trotter_terms(h_plus)
    assert split.total() == h_plus
    assert {t.support for t in split.h2} == {(0, 1), (2, 3)}
    assert {t.support for t in split.h3} == {(1, 2), (3, 4)}
    assert all(set(t.factors) <= {"I", "Z"} for t in split.h1)
    with pytest.raises(ValueError):
        split_trotter_terms(h_plus + PauliOperator.from_dict({"XIXII": 1.0}))


def test_invalid_params():
    with pytest.raises(ValueError):
        LatticeParams(a=0.0)
    with pytest.raises(ValueError):
        build_parity_hamiltonian("sideways", LatticeParams())
    with pytest.raises(ValueError):
        to_dense(PauliOperator.zero(13))


def test_volume():
    assert LatticeParams().volume == pytest.approx(2.25)


# --- algebra -----------------------------------------------------------------

pauli_strings = st.text(alphabet="IXYZ", min_size=3, max_size=3)
coeffs = st.floats(-5, 5, allow_nan=False).map(lambda x: round(x, 6))
operators = st.dictionaries(pauli_strings, coeffs, max_size=6).map(
    lambda d: PauliOperator.from_dict(d, qubit_count=3)
)


@settings(max_examples=50, deadline=None)
@given(operators, operators)
def test_dense_is_linear(a, b):
    np.testing.assert_allclose(to_dense(a + b), to_dense(a) + to_dense(b), atol=1e-12)
    np.testing.assert_allclose(to_dense(a * 2.5), 2.5 * to_dense(a), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(operators)
def test_parse_inverts_dump(op):
    back = PauliOperator.parse(op.dump()) if len(op) else op
    assert back == op


def test_duplicate_strings_merge():
    op = PauliOperator([PauliTerm(1.0, "XZ"), PauliTerm(2.0, "XZ"), PauliTerm(-1.0, "ZZ"),
                        PauliTerm(1.0, "ZZ")], 2)
    assert op.to_dict() == {"XZ": 3.0}


@settings(max_examples=50, deadline=None)
@given(st.text(alphabet="01", min_size=5, max_size=5))
def test_charge_weight(bits):
    assert charge_weight(bits) == bits.count("1") - 3


def test_charge_weight_rejects_garbage():
    with pytest.raises(ValueError):
        charge_weight("1010", reference="10101")
    with pytest.raises(ValueError):
        charge_weight("10201")
