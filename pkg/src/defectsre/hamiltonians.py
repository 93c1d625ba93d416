"""Transverse-field Ising chains with Cardy boundaries and topological line defects.

Bulk: ``H = -sum_j (Z_j Z_{j+1} + lam X_j)`` on sites ``1..L`` with bond ``(L, 1)``
closing the ring.  Insertions modify single bonds:

* ``eta`` at ``(j, j+1)`` flips the sign of ``Z_j Z_{j+1}``;
* ``duality`` at ``(j-1, j)`` replaces ``Z_{j-1} Z_j + lam X_j`` by ``Z_{j-1} X_j``
  with coefficient ``-1``.

Open chains drop bond ``(L, 1)`` and add ``+a Z_1`` and ``+b Z_L`` with
``a, b = 0, -1, +1`` for the free, up and down boundaries.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .pauli import PauliString, PauliSum, canonicalize, shift_sites


class BoundaryLabel(str, enum.Enum):
    FREE = "free"
    UP = "up"
    DOWN = "down"

    @property
    def field(self) -> float:
        """Coefficient ``a`` of the boundary term ``+a Z``."""
        return {"free": 0.0, "up": -1.0, "down": 1.0}[self.value]

    @classmethod
    def parse(cls, text: str) -> "BoundaryLabel":
        aliases = {"f": "free", "u": "up", "d": "down", "↑": "up", "↓": "down"}
        t = text.strip().lower()
        return cls(aliases.get(t, t))


class DefectKind(str, enum.Enum):
    ETA = "eta"
    DUALITY = "duality"


@dataclass(frozen=True)
class Insertion:
    kind: DefectKind
    bond: tuple[int, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DefectKind(self.kind))
        object.__setattr__(self, "bond", (int(self.bond[0]), int(self.bond[1])))

    def __str__(self) -> str:
        return f"{self.kind.value}@({self.bond[0]},{self.bond[1]})"


@dataclass(frozen=True)
class DefectSpec:
    """Chain topology, transverse field and defect insertions."""

    topology: str = "periodic"
    left: BoundaryLabel | None = None
    right: BoundaryLabel | None = None
    lam: float = 1.0
    insertions: tuple[Insertion, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.topology not in ("periodic", "open"):
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.topology == "open":
            if self.left is None or self.right is None:
                raise ValueError("open topology needs left and right boundary labels")
            object.__setattr__(self, "left", BoundaryLabel(self.left))
            object.__setattr__(self, "right", BoundaryLabel(self.right))
        elif self.left is not None or self.right is not None:
            raise ValueError("periodic topology takes no boundary labels")
        ins = tuple(i if isinstance(i, Insertion) else Insertion(*i) for i in self.insertions)
        object.__setattr__(self, "insertions", ins)
        object.__setattr__(self, "lam", float(self.lam))

    @classmethod
    def periodic(cls, lam: float = 1.0, insertions: Iterable = ()) -> "DefectSpec":
        return cls("periodic", None, None, lam, tuple(insertions))

    @classmethod
    def open(cls, left: BoundaryLabel | str, right: BoundaryLabel | str, lam: float = 1.0,
             insertions: Iterable = ()) -> "DefectSpec":
        return cls("open", BoundaryLabel.parse(str(getattr(left, "value", left))),
                   BoundaryLabel.parse(str(getattr(right, "value", right))), lam, tuple(insertions))

    def describe(self) -> dict:
        topo = ("periodic" if self.topology == "periodic"
                else f"open:{self.left.value},{self.right.value}")
        return {"topology": topo, "lambda": self.lam,
                "insert": [str(i) for i in self.insertions]}


_INSERT_RE = re.compile(r"^\s*(eta|duality|d)\s*@\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*$", re.I)


def parse_topology(text: str) -> tuple[str, BoundaryLabel | None, BoundaryLabel | None]:
    t = text.strip()
    if t == "periodic":
        return "periodic", None, None
    m = re.fullmatch(r"open:([^,]+),([^,]+)", t)
    if not m:
        raise ValueError(f"bad topology {text!r}; expected 'periodic' or 'open:<A>,<B>'")
    return "open", BoundaryLabel.parse(m.group(1)), BoundaryLabel.parse(m.group(2))


def parse_insertion(text: str) -> Insertion:
    """``eta@(6,1)`` or ``duality@(1,2)``."""
    m = _INSERT_RE.match(text)
    if not m:
        raise ValueError(f"bad insertion {text!r}; expected e.g. 'eta@(6,1)'")
    kind = "duality" if m.group(1).lower() in ("duality", "d") else "eta"
    return Insertion(DefectKind(kind), (int(m.group(2)), int(m.group(3))))


def parse_spec(topology: str = "periodic", lam: float = 1.0,
               insert: Sequence[str] = ()) -> DefectSpec:
    topo, a, b = parse_topology(topology)
    return DefectSpec(topo, a, b, lam, tuple(parse_insertion(s) for s in insert))


def _bonds(L: int, periodic: bool) -> list[tuple[int, int]]:
    out = [(j, j + 1) for j in range(1, L)]
    if periodic:
        out.append((L, 1))
    return out


def build(spec: DefectSpec, length: int) -> PauliSum:
    L = length
    if L < 3:
        raise ValueError("chains need at least 3 sites")
    periodic = spec.topology == "periodic"
    bonds = _bonds(L, periodic)
    kinds: dict[tuple[int, int], DefectKind] = {}
    for ins in spec.insertions:
        i, j = ins.bond
        if not (1 <= i <= L and 1 <= j <= L) or j != i % L + 1:
            raise ValueError(f"insertion {ins} is not a nearest-neighbour bond (j, j+1 mod {L})")
        if ins.bond not in bonds:
            raise ValueError(f"insertion {ins} sits on the cut bond of an open chain")
        if ins.bond in kinds:
            raise ValueError(f"two insertions on bond {ins.bond}")
        kinds[ins.bond] = ins.kind

    Z = lambda *s: PauliString.from_sites(L, [(k, "Z") for k in s])  # noqa: E731
    terms: list[tuple[float, PauliString]] = []
    consumed_x = set()
    for bond in bonds:
        i, j = bond
        kind = kinds.get(bond)
        if kind is DefectKind.DUALITY:
            terms.append((-1.0, PauliString.from_sites(L, [(i, "Z"), (j, "X")])))
            consumed_x.add(j)
        elif kind is DefectKind.ETA:
            terms.append((1.0, Z(i, j)))
        else:
            terms.append((-1.0, Z(i, j)))
    for j in range(1, L + 1):
        if j not in consumed_x:
            terms.append((-spec.lam, PauliString.from_sites(L, {j: "X"})))
    if not periodic:
        if spec.left.field:
            terms.append((spec.left.field, Z(1)))
        if spec.right.field:
            terms.append((spec.right.field, Z(L)))
    return canonicalize(PauliSum(L, tuple(terms)))


def build_open_boundary_chain(boundary: BoundaryLabel | str, insertions: Iterable = (),
                              length: int = 0, lam: float = 1.0) -> PauliSum:
    """Open chain with ``boundary`` on site 1 and a free right end."""
    return build(DefectSpec.open(boundary, BoundaryLabel.FREE, lam, tuple(insertions)), length)


class NamedHamiltonian(str, enum.Enum):
    ETA_L1 = "eta_L1"          # eta on bond (L, 1)
    ETA_12 = "eta_12"          # eta on bond (1, 2)
    ETA_ETA = "eta_eta"        # eta on (L, 1) and (1, 2)
    D_L1 = "D_L1"              # duality on (L, 1)
    D_12 = "D_12"              # duality on (1, 2)
    ETA_D = "eta_D"            # eta on (L, 1), duality on (1, 2)
    D_ETA = "D_eta"            # duality on (L, 1), eta on (1, 2)
    D_D = "D_D"                # duality on (L, 1) and (1, 2)
    T_MINUS = "T_minus"        # periodic chain on sites 2..L
    T_MINUS_ETA = "T_minus_eta"  # same with eta on the closing bond (L, 2)


def _ins(*pairs) -> tuple[Insertion, ...]:
    return tuple(Insertion(DefectKind(k), b) for k, b in pairs)


def removed_site_chain(length: int, lam: float = 1.0, twisted: bool = False) -> PauliSum:
    """Periodic chain on sites ``2..L`` (bond ``(L, 2)`` closes it) inside ``L`` sites."""
    small = length - 1
    ins = _ins(("eta", (small, 1))) if twisted else ()
    return shift_sites(build(DefectSpec.periodic(lam, ins), small), 1, length)


def removed_site_boundary_chain(boundary: BoundaryLabel | str, length: int,
                                lam: float = 1.0) -> PauliSum:
    """Open chain on sites ``2..L`` with ``boundary`` on site 2 and a free end at ``L``."""
    small = length - 1
    return shift_sites(build_open_boundary_chain(boundary, (), small, lam), 1, length)


def build_named(name: NamedHamiltonian | str, length: int) -> PauliSum:
    """Critical (``lam = 1``) chains used by the fusion identities."""
    name = NamedHamiltonian(name)
    L = length
    need = 4 if name in (NamedHamiltonian.ETA_ETA, NamedHamiltonian.ETA_D,
                         NamedHamiltonian.D_ETA, NamedHamiltonian.D_D,
                         NamedHamiltonian.T_MINUS, NamedHamiltonian.T_MINUS_ETA) else 3
    if L < need:
        raise ValueError(f"{name.value} needs at least {need} sites")
    if name is NamedHamiltonian.T_MINUS:
        return removed_site_chain(L)
    if name is NamedHamiltonian.T_MINUS_ETA:
        return removed_site_chain(L, twisted=True)
    table = {
        NamedHamiltonian.ETA_L1: _ins(("eta", (L, 1))),
        NamedHamiltonian.ETA_12: _ins(("eta", (1, 2))),
        NamedHamiltonian.ETA_ETA: _ins(("eta", (L, 1)), ("eta", (1, 2))),
        NamedHamiltonian.D_L1: _ins(("duality", (L, 1))),
        NamedHamiltonian.D_12: _ins(("duality", (1, 2))),
        NamedHamiltonian.ETA_D: _ins(("eta", (L, 1)), ("duality", (1, 2))),
        NamedHamiltonian.D_ETA: _ins(("duality", (L, 1)), ("eta", (1, 2))),
        NamedHamiltonian.D_D: _ins(("duality", (L, 1)), ("duality", (1, 2))),
    }
    return build(DefectSpec.periodic(1.0, table[name]), L)
