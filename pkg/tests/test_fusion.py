from __future__ import annotations

import numpy as np
import pytest

from defectsre.clifford import CliffordMap, DefectOperator, defect_gates, defect_unitary
from defectsre.fusion import (IdentityReport, all_identities, down_with_duality, fusion_reports,
                              movement_reports, verify_boundary_superposition, verify_conjugation,
                              verify_direct_sum_DD, verify_sre_fusion_relation)
from defectsre.hamiltonians import (BoundaryLabel, NamedHamiltonian, build_named,
                                    build_open_boundary_chain)
from defectsre.pauli import PauliString

import oracles


def test_reports_cover_every_identity_family():
    names = {r.name.split(" to ")[0] for r in fusion_reports(6) + movement_reports(6)}
    assert {"eta move", "D move", "eta x eta -> 1", "eta x D -> D", "D x eta -> D",
            "D x D -> T-(1 + eta)", "eta * free -> free", "eta * up -> down",
            "eta * down -> up", "D * up -> free", "D * down -> free",
            "D * free -> T-(up + down)"} <= names


@pytest.mark.parametrize("L", [4, 5, 7])
def test_all_hold_small(L):
    reps = fusion_reports(L) + movement_reports(L)
    assert all(r.holds and r.status == "holds" and r.witness is None for r in reps)


def test_direct_sum_dense_oracle():
    # U H_{D;D} U^dag = |0><0| (x) H_T- + |1><1| (x) H_T-eta, checked with matrices
    L = 5
    u = oracles.circuit_matrix(defect_gates(DefectOperator.D_D, 1, L), L)
    h = oracles.ising_matrix(L, duality={(L, 1), (1, 2)})
    got = u @ h @ u.conj().T
    t = build_named(NamedHamiltonian.T_MINUS, L).to_matrix()
    te = build_named(NamedHamiltonian.T_MINUS_ETA, L).to_matrix()
    want = oracles.projector(1, 1, L) @ t + oracles.projector(1, -1, L) @ te
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_boundary_superposition_dense_oracle():
    L = 5
    u = oracles.circuit_matrix(defect_gates(DefectOperator.D_FREE, 1, L), L)
    h = oracles.ising_matrix(L, periodic=False, duality={(1, 2)})
    got = u @ h @ u.conj().T
    rep = verify_boundary_superposition(L)
    assert rep.holds
    # the image is block diagonal in Z_1
    off = oracles.projector(1, 1, L) @ got @ oracles.projector(1, -1, L)
    assert np.abs(off).max() < 1e-12


def test_literal_eta_d_operator_fails_with_witness():
    L = 6
    rep = verify_conjugation("literal", defect_unitary(DefectOperator.ETA_D_LITERAL, 1, L),
                             build_named(NamedHamiltonian.ETA_D, L),
                             build_named(NamedHamiltonian.D_12, L))
    assert not rep.holds and rep.status == "fails"
    assert rep.witness and "expected" in rep.witness
    assert rep.max_coeff_dev == pytest.approx(2.0)


def test_corrupted_fusion_operator_fails():
    L = 6
    identity = CliffordMap.identity(L)
    rep = verify_direct_sum_DD(L, fusion=identity)
    assert not rep.holds and rep.witness
    assert not verify_boundary_superposition(L, fusion=identity).holds


def test_down_with_duality_is_valid_chain():
    L = 6
    h = down_with_duality(L)
    assert h.coefficient(PauliString.from_label("ZIIIII")) == 1.0  # down field
    assert np.allclose(np.linalg.eigvalsh(h.to_matrix()),
                       np.linalg.eigvalsh(build_open_boundary_chain(
                           BoundaryLabel.UP, [("duality", (1, 2))], L).to_matrix()))


def test_all_identities_count_and_serialization():
    reps = all_identities(6)
    assert len(reps) == sum(len(fusion_reports(L)) + len(movement_reports(L)) for L in (4, 5, 6))
    d = reps[0].to_dict()
    assert set(d) == {"name", "holds", "max_coeff_dev", "witness", "length", "status"}


def test_size_guard():
    with pytest.raises(ValueError):
        verify_direct_sum_DD(3)


@pytest.mark.parametrize("L,alpha", [(6, 2.0), (6, 3.0), (7, 2.0)])
def test_sre_relation_small(L, alpha):
    rep = verify_sre_fusion_relation(L, alpha)
    assert rep.holds, rep.witness


def test_sre_relation_off_critical():
    assert verify_sre_fusion_relation(6, lam=0.7).holds


def test_sre_relation_zero_field_is_inconclusive():
    rep = verify_sre_fusion_relation(6, lam=0.0)
    assert rep.status == "inconclusive" and not rep.holds


def test_report_default_status():
    assert IdentityReport("x", False, 1.0, "w", 4).status == "fails"
