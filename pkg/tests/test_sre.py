from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defectsre.clifford import random_gate_sequence
from defectsre.pauli import PauliString, StateVector, expectation
from defectsre.sre import (ResourceError, bell_distribution, ghz_state, interleave,
                           is_stabilizer, pauli_expectations, plus_state, read_distribution,
                           sre, sre_direct_oracle, sre_from_distribution, t_state,
                           write_distribution)

import oracles


def random_state(rng, L):
    return StateVector.normalized(rng.normal(size=2 ** L) + 1j * rng.normal(size=2 ** L))


def clifford_state(rng, L, depth=30):
    u = oracles.circuit_matrix(random_gate_sequence(L, depth, rng), L)
    return StateVector.normalized(u[:, 0])


@pytest.mark.parametrize("alpha", [0.5, 2.0, 3.0])
@pytest.mark.parametrize("L", [1, 2, 4])
def test_sre_matches_brute_force(L, alpha):
    rng = np.random.default_rng(L)
    psi = random_state(rng, L)
    assert sre(psi, alpha).value == pytest.approx(oracles.sre_brute(psi.amplitudes, alpha), abs=1e-10)


def test_t_state_value():
    assert sre(t_state(), 2).value == pytest.approx(-math.log(3 / 4), abs=1e-14)
    assert sre(t_state(), 2).bits == pytest.approx(-math.log2(3 / 4), abs=1e-14)


@pytest.mark.parametrize("psi", [plus_state(5), ghz_state(6), StateVector.basis(4, 9)])
def test_reference_stabilizer_states(psi):
    res = sre(psi)
    assert abs(res.value) < 1e-12
    assert res.participation == 2 ** psi.length
    assert is_stabilizer(psi)
    assert not is_stabilizer(t_state())


@given(st.integers(1, 6), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=30, deadline=None)
def test_random_clifford_states_have_zero_sre(L, seed):
    psi = clifford_state(np.random.default_rng(seed), L)
    assert abs(sre(psi).value) < 1e-12
    assert abs(sre(psi, 3).value) < 1e-12


def test_bell_distribution_entries_and_normalization():
    rng = np.random.default_rng(11)
    psi = random_state(rng, 3)
    dist = bell_distribution(psi)
    assert abs(dist.sum_check) < 1e-13
    for x in range(8):
        for z in range(8):
            p = PauliString(3, x, z)
            assert dist.entry(p) == pytest.approx(expectation(psi, p) ** 2 / 8, abs=1e-14)
    assert dist.probabilities[interleave(0b001, 0b000, 3)] == dist.entry(PauliString.from_label("XII"))


def test_pauli_expectations_real_y_form():
    rng = np.random.default_rng(2)
    psi = random_state(rng, 3)
    e = pauli_expectations(psi)
    assert e[0b011, 0b010] == pytest.approx(expectation(psi, PauliString.from_label("XYI")), abs=1e-14)


def test_sre_from_distribution_agrees():
    psi = random_state(np.random.default_rng(4), 4)
    assert sre_from_distribution(bell_distribution(psi), 2).value == pytest.approx(sre(psi).value, abs=1e-12)


def test_oracle_agrees_and_is_capped():
    psi = random_state(np.random.default_rng(5), 4)
    assert sre_direct_oracle(psi).value == pytest.approx(sre(psi).value, abs=1e-12)
    with pytest.raises(ResourceError):
        sre_direct_oracle(plus_state(8))


@pytest.mark.parametrize("alpha", [1, 1.0, 0, -2])
def test_alpha_validation(alpha):
    with pytest.raises(ValueError):
        sre(t_state(), alpha)


def test_length_cap():
    with pytest.raises(ResourceError) as info:
        sre(plus_state(6), max_length=5)
    assert info.value.required_bytes > 0


def test_distribution_dump_roundtrip(tmp_path):
    dist = bell_distribution(random_state(np.random.default_rng(6), 3))
    path = tmp_path / "d.bin"
    write_distribution(path, dist)
    back = read_distribution(path)
    assert back.length == 3 and np.array_equal(back.probabilities, dist.probabilities)
    raw = path.read_bytes()
    assert raw[:4] == b"SREP" and len(raw) == 16 + 8 * 64
    path.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError):
        read_distribution(path)


def test_real_state_fast_path_matches_complex():
    rng = np.random.default_rng(8)
    v = rng.normal(size=2 ** 7)
    a = sre(StateVector.normalized(v)).value
    b = sre(StateVector.normalized(v.astype(complex))).value
    assert a == pytest.approx(b, abs=1e-12)
