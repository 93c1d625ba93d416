from __future__ import annotations

import numpy as np
import pytest

from defectsre.clifford import DefectOperator, conjugate_sum, defect_unitary
from defectsre.hamiltonians import (BoundaryLabel, DefectKind, DefectSpec, Insertion,
                                    NamedHamiltonian, build, build_named,
                                    build_open_boundary_chain, parse_insertion, parse_spec,
                                    parse_topology, removed_site_boundary_chain,
                                    removed_site_chain)
from defectsre.pauli import sums_equal

import oracles


@pytest.mark.parametrize("lam", [1.0, 0.6])
def test_periodic_chain_matches_dense(lam):
    h = build(DefectSpec.periodic(lam), 5)
    np.testing.assert_allclose(h.to_matrix(), oracles.ising_matrix(5, lam), atol=1e-12)


def test_defect_insertions_match_dense():
    L = 5
    spec = parse_spec("periodic", 0.8, ["eta@(5,1)", "duality@(2,3)"])
    want = oracles.ising_matrix(L, 0.8, eta={(5, 1)}, duality={(2, 3)})
    np.testing.assert_allclose(build(spec, L).to_matrix(), want, atol=1e-12)


@pytest.mark.parametrize("left,right,lf,rf", [
    ("free", "free", 0, 0), ("up", "up", -1, -1), ("down", "up", 1, -1), ("up", "down", -1, 1),
])
def test_open_chains_match_dense(left, right, lf, rf):
    L = 5
    h = build(DefectSpec.open(left, right), L)
    want = oracles.ising_matrix(L, periodic=False, left_field=lf, right_field=rf)
    np.testing.assert_allclose(h.to_matrix(), want, atol=1e-12)


def test_boundary_fields_pin_spins():
    L = 6
    h_up = build(DefectSpec.open("up", "up"), L)
    e, v, _ = oracles.ground_dense(h_up.to_matrix())
    z1 = oracles.site_op(oracles.Z, 1, L)
    assert np.vdot(v, z1 @ v).real > 0.5
    h_dn = build(DefectSpec.open("down", "down"), L)
    e, v, _ = oracles.ground_dense(h_dn.to_matrix())
    assert np.vdot(v, z1 @ v).real < -0.5


def test_boundary_label_aliases():
    assert BoundaryLabel.parse("f") is BoundaryLabel.FREE
    assert BoundaryLabel.parse("↑") is BoundaryLabel.UP
    assert parse_topology("open:up,down") == ("open", BoundaryLabel.UP, BoundaryLabel.DOWN)
    with pytest.raises(ValueError):
        parse_topology("ring")


def test_insertion_parsing():
    ins = parse_insertion("eta@(6,1)")
    assert ins == Insertion(DefectKind.ETA, (6, 1))
    assert parse_insertion(" duality @ (1, 2) ").kind is DefectKind.DUALITY
    with pytest.raises(ValueError):
        parse_insertion("eta(6,1)")


@pytest.mark.parametrize("bad", [["eta@(1,3)"], ["eta@(1,2)", "duality@(1,2)"], ["eta@(0,1)"]])
def test_insertion_validation(bad):
    with pytest.raises(ValueError):
        build(parse_spec("periodic", 1.0, bad), 6)


def test_cut_bond_rejected_on_open_chain():
    with pytest.raises(ValueError):
        build(parse_spec("open:free,free", 1.0, ["eta@(6,1)"]), 6)


def test_spec_validation():
    with pytest.raises(ValueError):
        DefectSpec("open")
    with pytest.raises(ValueError):
        DefectSpec("periodic", BoundaryLabel.UP, BoundaryLabel.UP)
    with pytest.raises(ValueError):
        build(DefectSpec.periodic(), 2)


def test_describe_roundtrip():
    spec = parse_spec("open:up,free", 0.5, ["eta@(2,3)"])
    d = spec.describe()
    assert parse_spec(d["topology"], d["lambda"], d["insert"]) == spec


def test_duality_removes_transverse_term():
    h = build_named(NamedHamiltonian.D_12, 4)
    assert h.coefficient("ZXII") == -1.0
    assert h.coefficient("IXII") == 0.0
    assert h.coefficient("IZZI") == -1.0


@pytest.mark.parametrize("name", list(NamedHamiltonian))
def test_named_are_real_symmetric(name):
    h = build_named(name, 6)
    assert h.is_real_matrix


def test_removed_site_chain_structure():
    L = 6
    t = removed_site_chain(L)
    assert t.coefficient("IIIIIX") == -1.0 and t.coefficient("XIIIII") == 0.0
    assert t.coefficient("IZIIIZ") == -1.0
    assert removed_site_chain(L, twisted=True).coefficient("IZIIIZ") == 1.0
    b = removed_site_boundary_chain(BoundaryLabel.UP, L)
    assert b.coefficient("IZIIII") == -1.0


def test_eta_movement_preserves_spectrum_dense():
    L = 6
    a = build_named(NamedHamiltonian.ETA_L1, L).to_matrix()
    b = build_named(NamedHamiltonian.ETA_12, L).to_matrix()
    np.testing.assert_allclose(np.linalg.eigvalsh(a), np.linalg.eigvalsh(b), atol=1e-10)


def test_duality_movement_conjugation():
    L = 6
    moved = conjugate_sum(defect_unitary(DefectOperator.U_D, 1, L),
                          build_named(NamedHamiltonian.D_L1, L))
    assert sums_equal(moved, build_named(NamedHamiltonian.D_12, L))


def test_open_boundary_chain_helper():
    h = build_open_boundary_chain("up", [Insertion(DefectKind.ETA, (1, 2))], 5)
    assert h.coefficient("ZZIII") == 1.0 and h.coefficient("ZIIII") == -1.0
