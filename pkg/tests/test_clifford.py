from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defectsre.clifford import (CliffordMap, DefectOperator, compose, conjugate_string,
                                conjugate_sum, defect_gates, defect_unitary, from_gate_sequence,
                                gate_map, global_duality, inverse, parse_gate_file,
                                random_gate_sequence)
from defectsre.pauli import PauliString, PauliSum, sums_equal

import oracles


def _dense_conj(gates, L, label, phase=0):
    u = oracles.circuit_matrix(gates, L)
    return u @ oracles.string_matrix(label, phase) @ u.conj().T


@given(st.integers(1, 4), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=60, deadline=None)
def test_tableau_conjugation_matches_dense(L, seed):
    rng = np.random.default_rng(seed)
    gates = random_gate_sequence(L, 12, rng)
    c = from_gate_sequence(gates, L)
    assert c.is_symplectic()
    label = "".join(rng.choice(list("IXYZ"), L))
    phase = int(rng.integers(0, 4))
    got = conjugate_string(c, PauliString.from_label(label, phase)).to_matrix()
    np.testing.assert_allclose(got, _dense_conj(gates, L, label, phase), atol=1e-12)


@pytest.mark.parametrize("gate,src,dst", [
    (("H", 1), "X", (0, "Z")), (("H", 1), "Z", (0, "X")),
    (("S", 1), "X", (0, "Y")), (("S", 1), "Z", (0, "Z")),
    (("X", 1), "Z", (2, "Z")), (("Z", 1), "X", (2, "X")),
    (("CZ", 1, 2), "XI", (0, "XZ")), (("CX", 1, 2), "XI", (0, "XX")),
    (("CX", 1, 2), "IZ", (0, "ZZ")), (("CX", 1, 2), "IX", (0, "IX")),
])
def test_gate_rules(gate, src, dst):
    L = len(src)
    img = gate_map(gate, L)(PauliString.from_label(src))
    assert img == PauliString.from_label(dst[1], dst[0])


def test_compose_order_and_inverse():
    rng = np.random.default_rng(7)
    L = 3
    ga, gb = random_gate_sequence(L, 8, rng), random_gate_sequence(L, 8, rng)
    a, b = from_gate_sequence(ga, L), from_gate_sequence(gb, L)
    assert compose(a, b) == from_gate_sequence(ga + gb, L)
    assert compose(a, inverse(a)) == CliffordMap.identity(L)
    assert compose(inverse(b), b) == CliffordMap.identity(L)
    p = PauliString.from_label("XYZ")
    assert inverse(a)(a(p)) == p


def test_tableau_shape():
    t = from_gate_sequence([("H", 1), ("CZ", 1, 2)], 2).tableau
    assert t.shape == (4, 4) and t.dtype == np.uint8


def test_gate_validation():
    with pytest.raises(ValueError):
        gate_map(("H", 3), 2)
    with pytest.raises(ValueError):
        gate_map(("CZ", 1, 1), 2)
    with pytest.raises(ValueError):
        parse_gate_file("FOO 1")


def test_parse_gate_file():
    gates = parse_gate_file("# comment\nH 1\ncz 1 2  # trailing\n\nX 2\n")
    assert gates == [("H", 1), ("CZ", 1, 2), ("X", 2)]


@pytest.mark.parametrize("name", list(DefectOperator))
def test_defect_unitary_matches_dense(name):
    L = 4
    gates = defect_gates(name, 2, L)
    c = defect_unitary(name, 2, L)
    for lab in ("XIII", "IXII", "IZII", "IIZI", "IIXI", "ZZZZ"):
        got = conjugate_string(c, PauliString.from_label(lab)).to_matrix()
        np.testing.assert_allclose(got, _dense_conj(gates, L, lab), atol=1e-12)


def test_pair_operator_needs_neighbour():
    with pytest.raises(ValueError):
        defect_unitary(DefectOperator.D_D, 5, 5)
    defect_unitary(DefectOperator.U_ETA, 5, 5)


def test_global_duality_maps_bonds_to_fields():
    L = 5
    c = global_duality(L)
    # sequential duality sends the open-chain bond Z_j Z_{j+1} onto a single-site term
    for j in range(1, L):
        img = c(PauliString.from_sites(L, {j: "Z", j + 1: "Z"}))
        assert img.weight == 1


def test_conjugate_sum_linear():
    L = 3
    c = from_gate_sequence([("H", 2), ("CX", 2, 3)], L)
    h = PauliSum.from_terms(L, [(1.0, "ZZI"), (-0.5, "XII"), (0.3, "IYZ")])
    dense = sum(coef * oracles.string_matrix(s.label, s.phase_exp) for coef, s in h.terms)
    u = oracles.circuit_matrix([("H", 2), ("CX", 2, 3)], L)
    np.testing.assert_allclose(conjugate_sum(c, h).to_matrix(), u @ dense @ u.conj().T, atol=1e-12)
    assert sums_equal(conjugate_sum(inverse(c), conjugate_sum(c, h)), h)
