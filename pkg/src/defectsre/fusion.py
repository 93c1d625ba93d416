"""Exact operator checks of defect movement and fusion, plus the SRE consequence of D x D."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

from .clifford import CliffordMap, DefectOperator, conjugate_sum, defect_unitary
from .eigensolver import ground_state
from .hamiltonians import (BoundaryLabel, DefectKind, DefectSpec, Insertion, NamedHamiltonian,
                           build, build_named, build_open_boundary_chain,
                           removed_site_boundary_chain)
from .pauli import EQUAL_TOL, PauliSum, project_site, shift_sites, term_deviations
from .sre import sre

SRE_TOL = 1e-7


@dataclass
class IdentityReport:
    name: str
    holds: bool
    max_coeff_dev: float
    witness: str | None
    length: int
    status: str = ""  # "holds", "fails" or "inconclusive"

    def __post_init__(self) -> None:
        if not self.status:
            self.status = "holds" if self.holds else "fails"

    def to_dict(self) -> dict:
        return asdict(self)


def _compare(name: str, got: PauliSum, want: PauliSum, tol: float) -> IdentityReport:
    dev = term_deviations(got, want)
    worst = dev[0][0] if dev else 0.0
    witness = None
    if worst >= tol:
        d, s, cg, cw = dev[0]
        witness = f"{s.label}: got {cg:+.12g}, expected {cw:+.12g}"
    return IdentityReport(name, worst < tol, worst, witness, got.length)


def verify_conjugation(name: str, c: CliffordMap, h_in: PauliSum, h_expected: PauliSum,
                       tol: float = EQUAL_TOL) -> IdentityReport:
    """Check ``C h_in C^dag == h_expected`` term by term."""
    return _compare(name, conjugate_sum(c, h_in), h_expected, tol)


def _verify_split(name: str, c: CliffordMap, h_in: PauliSum, plus: PauliSum, minus: PauliSum,
                  tol: float) -> IdentityReport:
    """``C h_in C^dag`` must be diagonal on site 1 and project to ``plus`` / ``minus``."""
    mapped = conjugate_sum(c, h_in)
    for coeff, s in mapped.terms:
        if s.x_bits & 1:
            return IdentityReport(name, False, abs(coeff),
                                  f"{s.label}: X or Y on site 1 (coefficient {coeff:+.12g})",
                                  h_in.length)
    up = _compare(name, project_site(mapped, 1, 1), plus, tol)
    down = _compare(name, project_site(mapped, 1, -1), minus, tol)
    worst = max(up.max_coeff_dev, down.max_coeff_dev)
    witness = up.witness and f"Z_1=+1 sector, {up.witness}"
    witness = witness or (down.witness and f"Z_1=-1 sector, {down.witness}")
    return IdentityReport(name, up.holds and down.holds, worst, witness, h_in.length)


def verify_direct_sum_DD(length: int, fusion: CliffordMap | None = None,
                         tol: float = EQUAL_TOL) -> IdentityReport:
    """D x D: the two-defect chain splits into the site-removed chain with and without eta."""
    if length < 4:
        raise ValueError("needs L >= 4")
    c = fusion or defect_unitary(DefectOperator.D_D, 1, length)
    return _verify_split("D x D -> T-(1 + eta)", c, build_named(NamedHamiltonian.D_D, length),
                         build_named(NamedHamiltonian.T_MINUS, length),
                         build_named(NamedHamiltonian.T_MINUS_ETA, length), tol)


def verify_boundary_superposition(length: int, fusion: CliffordMap | None = None,
                                  tol: float = EQUAL_TOL) -> IdentityReport:
    """D * free: the free boundary with D splits into up and down on one fewer site."""
    if length < 4:
        raise ValueError("needs L >= 4")
    c = fusion or defect_unitary(DefectOperator.D_FREE, 1, length)
    h = build_open_boundary_chain(BoundaryLabel.FREE, [_d12()], length)
    return _verify_split("D * free -> T-(up + down)", c, h,
                         removed_site_boundary_chain(BoundaryLabel.UP, length),
                         removed_site_boundary_chain(BoundaryLabel.DOWN, length), tol)


def _d12() -> Insertion:
    return Insertion(DefectKind.DUALITY, (1, 2))


def _eta(bond) -> Insertion:
    return Insertion(DefectKind.ETA, bond)


def _bond_before(j: int, L: int) -> tuple[int, int]:
    return ((j - 2) % L + 1, j)


def down_with_duality(length: int) -> PauliSum:
    """Down boundary carrying D on bond (1,2), defined as the eta image of the up case."""
    up = build_open_boundary_chain(BoundaryLabel.UP, [_d12()], length)
    return conjugate_sum(defect_unitary(DefectOperator.ETA_BOUNDARY, 1, length), up)


def movement_reports(length: int) -> list[IdentityReport]:
    """eta moved across every bond and D across every non-wrapping bond."""
    L = length
    out = []
    for j in range(1, L + 1):
        h_in = build(DefectSpec.periodic(1.0, [_eta(_bond_before(j, L))]), L)
        h_out = build(DefectSpec.periodic(1.0, [_eta((j, j % L + 1))]), L)
        out.append(verify_conjugation(f"eta move to bond ({j},{j % L + 1})",
                                      defect_unitary(DefectOperator.U_ETA, j, L), h_in, h_out))
    for j in range(1, L):
        h_in = build(DefectSpec.periodic(1.0, [Insertion(DefectKind.DUALITY, _bond_before(j, L))]), L)
        h_out = build(DefectSpec.periodic(1.0, [Insertion(DefectKind.DUALITY, (j, j + 1))]), L)
        out.append(verify_conjugation(f"D move to bond ({j},{j + 1})",
                                      defect_unitary(DefectOperator.U_D, j, L), h_in, h_out))
    return out


def fusion_reports(length: int) -> list[IdentityReport]:
    L = length
    u = lambda name: defect_unitary(name, 1, L)  # noqa: E731
    named = lambda name: build_named(name, L)  # noqa: E731
    periodic = build(DefectSpec.periodic(), L)
    out = [
        verify_conjugation("eta x eta -> 1", u(DefectOperator.ETA_ETA),
                           named(NamedHamiltonian.ETA_ETA), periodic),
        verify_conjugation("eta x D -> D", u(DefectOperator.ETA_D),
                           named(NamedHamiltonian.ETA_D), named(NamedHamiltonian.D_12)),
        verify_conjugation("D x eta -> D", u(DefectOperator.D_ETA),
                           named(NamedHamiltonian.D_ETA), named(NamedHamiltonian.D_12)),
        verify_direct_sum_DD(L),
    ]
    flipped = {BoundaryLabel.FREE: BoundaryLabel.FREE, BoundaryLabel.UP: BoundaryLabel.DOWN,
               BoundaryLabel.DOWN: BoundaryLabel.UP}
    for a in BoundaryLabel:
        out.append(verify_conjugation(
            f"eta * {a.value} -> {flipped[a].value}", u(DefectOperator.ETA_BOUNDARY),
            build_open_boundary_chain(a, [_eta((1, 2))], L),
            build_open_boundary_chain(flipped[a], [], L)))
    free = build_open_boundary_chain(BoundaryLabel.FREE, [], L)
    out.append(verify_conjugation(
        "D * up -> free", u(DefectOperator.D_UP),
        build_open_boundary_chain(BoundaryLabel.UP, [_d12()], L), free))
    out.append(verify_conjugation("D * down -> free", u(DefectOperator.D_DOWN),
                                  down_with_duality(L), free))
    out.append(verify_boundary_superposition(L))
    return out


def all_identities(max_length: int = 12, min_length: int = 4) -> list[IdentityReport]:
    out = []
    for L in range(min_length, max_length + 1):
        out.extend(movement_reports(L))
        out.extend(fusion_reports(L))
    return out


# ---------------------------------------------------------------------------
# SRE consequence


def verify_sre_fusion_relation(length: int, alpha: float = 2.0, lam: float = 1.0,
                               tol: float = SRE_TOL, seed: int = 0) -> IdentityReport:
    """``M_alpha`` of the D x D ground state equals that of the site-removed chain.

    The fusion operator is Clifford and maps the two-defect ground state to
    ``|0>_1 (x) |psi_T->``; the decoupled qubit is a stabilizer state and adds nothing.
    """
    L = length
    name = f"M_{alpha:g}(D x D) = M_{alpha:g}(T-)"
    h_dd = build(DefectSpec.periodic(lam, [Insertion(DefectKind.DUALITY, (L, 1)), _d12()]), L)
    if lam == 1.0:
        h_t = build(DefectSpec.periodic(), L - 1)
    else:
        # off criticality the fused chain keeps unit couplings where the defects were
        h_t = _fused_chain(L, lam)
    g_dd = ground_state(h_dd, seed=seed)
    g_t = ground_state(h_t, seed=seed)
    if g_dd.degenerate or g_t.degenerate:
        return IdentityReport(name, False, float("nan"),
                              "degenerate ground state; SRE of the ground space is ambiguous",
                              L, "inconclusive")
    m_dd = sre(g_dd.ground, alpha).value
    m_t = sre(g_t.ground, alpha).value
    dev = abs(m_dd - m_t)
    ok = dev < tol and math.isclose(g_dd.energy, g_t.energy, abs_tol=1e-8)
    witness = None if ok else (f"M(D x D)={m_dd:.12g}, M(T-)={m_t:.12g}, "
                               f"E0={g_dd.energy:.12g} vs {g_t.energy:.12g}")
    return IdentityReport(name, ok, dev, witness, L)


def _fused_chain(length: int, lam: float) -> PauliSum:
    """Z_1=+1 sector of the fused D x D chain, relabelled onto sites 1..L-1."""
    L = length
    h_dd = build(DefectSpec.periodic(lam, [Insertion(DefectKind.DUALITY, (L, 1)), _d12()]), L)
    mapped = conjugate_sum(defect_unitary(DefectOperator.D_D, 1, L), h_dd)
    return shift_sites(project_site(mapped, 1, 1), -1, L - 1)
