"""Lowest eigenpairs of Pauli-sum Hamiltonians.

Small chains are diagonalized densely.  Larger ones use a Lanczos iteration with full
reorthogonalization that converges one eigenpair at a time and locks it, so exact
degeneracies (which a single Krylov space cannot resolve) are recovered.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .pauli import PauliString, PauliSum, StateVector, commutes, compile_sum

DEFAULT_MAX_LENGTH = 14
DENSE_MAX_LENGTH = 8
RESIDUAL_TOL = 1e-10
MAX_ITER = 500
DEGENERACY_REL = 1e-8


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass
class SpectrumResult:
    energies: np.ndarray
    states: list[StateVector]
    residuals: np.ndarray
    method: str
    sector: int | None = None
    gap: float = field(init=False)
    degenerate: bool = field(init=False)

    def __post_init__(self) -> None:
        self.energies = np.asarray(self.energies, dtype=float)
        if len(self.energies) > 1:
            self.gap = float(self.energies[1] - self.energies[0])
            scale = max(abs(float(self.energies[0])), 1e-300)
            self.degenerate = self.gap < DEGENERACY_REL * scale
        else:
            self.gap = float("nan")
            self.degenerate = False

    @property
    def ground(self) -> StateVector:
        return self.states[0]

    @property
    def energy(self) -> float:
        return float(self.energies[0])


def gauge_fix(v: np.ndarray) -> np.ndarray:
    """Make the first largest-magnitude amplitude real and positive."""
    k = int(np.argmax(np.abs(v)))
    a = v[k]
    return v * (np.conj(a) / abs(a))


def spin_flip(length: int) -> PauliString:
    return PauliString(length, (1 << length) - 1, 0)


def _sector_projector(h: PauliSum, sector: int | None):
    if sector is None:
        return None
    if sector not in (1, -1):
        raise ValueError("sector must be +1 or -1")
    flip = spin_flip(h.length)
    if not all(commutes(s, flip) for _, s in h.terms):
        raise ValueError("Hamiltonian does not commute with the global spin flip")
    mask = (1 << h.length) - 1

    def project(v: np.ndarray) -> np.ndarray:
        idx = np.arange(v.shape[0]) ^ mask
        return 0.5 * (v + sector * v[idx])

    return project


def _dense(h: PauliSum, k: int, project) -> tuple[np.ndarray, np.ndarray]:
    n = 1 << h.length
    op = compile_sum(h)
    basis = np.eye(n, dtype=float if op.is_real else complex)
    if project is not None:
        # orthonormal basis of the sector
        basis = project(basis)
        u, s, _ = np.linalg.svd(basis, full_matrices=False)
        basis = u[:, s > 0.5]
    mat = basis.conj().T @ op(basis)
    mat = 0.5 * (mat + mat.conj().T)
    w, v = scipy.linalg.eigh(mat, subset_by_index=[0, min(k, mat.shape[0]) - 1])
    return w, basis @ v


def _lanczos_one(op, n, dtype, locked: list[np.ndarray], rng, project,
                 tol: float, max_iter: int) -> tuple[float, np.ndarray, float, int]:
    """Lowest eigenpair of ``op`` restricted to the complement of ``locked``."""

    def orth(w: np.ndarray, basis) -> np.ndarray:
        for _ in range(2):
            for b in basis:
                w = w - np.vdot(b, w) * b
        return w

    v = rng.standard_normal(n)
    if dtype == np.complex128:
        v = v + 1j * rng.standard_normal(n)
    if project is not None:
        v = project(v)
    v = orth(v, locked)
    v /= np.linalg.norm(v)

    iters = 0
    max_krylov = 200
    theta, best, res = np.inf, v, np.inf
    while iters < max_iter:
        V = [v]
        alphas: list[float] = []
        betas: list[float] = []
        for j in range(max_krylov):
            w = op(V[j])
            iters += 1
            a = float(np.vdot(V[j], w).real)
            alphas.append(a)
            w = w - a * V[j] - (betas[-1] * V[j - 1] if j else 0)
            if project is not None:
                w = project(w)
            w = orth(w, locked)
            w = orth(w, V)
            b = float(np.linalg.norm(w))
            ritz, vecs = scipy.linalg.eigh_tridiagonal(np.array(alphas), np.array(betas))
            theta = float(ritz[0])
            res = abs(b * vecs[-1, 0])
            if res < tol or b < 1e-14 or iters >= max_iter:
                best = np.array(V).T @ vecs[:, 0]
                break
            betas.append(b)
            V.append(w / b)
        else:
            best = np.array(V[:-1]).T @ vecs[:, 0]
        best = orth(best, locked)
        best /= np.linalg.norm(best)
        if res < tol:
            return theta, best, res, iters
        if b < 1e-14:
            # invariant subspace; the Ritz pair is exact up to rounding
            return theta, best, res, iters
        v = best  # restart from the current Ritz vector
    raise ConvergenceError(f"Lanczos did not converge in {max_iter} iterations", res)


def low_spectrum(h: PauliSum, k: int = 2, *, seed: int = 0, tol: float = RESIDUAL_TOL,
                 max_iter: int = MAX_ITER, max_length: int = DEFAULT_MAX_LENGTH,
                 method: str = "auto", sector: int | None = None) -> SpectrumResult:
    """The ``k`` lowest eigenpairs of ``h`` (optionally in a spin-flip sector)."""
    if not h.terms:
        raise ValueError("empty Hamiltonian")
    if h.length > max_length:
        raise ValueError(f"length {h.length} exceeds the cap {max_length}")
    n = 1 << h.length
    k = min(k, n)
    op = compile_sum(h)
    project = _sector_projector(h, sector)
    if method == "auto":
        method = "dense" if h.length <= DENSE_MAX_LENGTH else "lanczos"
    dtype = np.float64 if op.is_real else np.complex128

    if method == "dense":
        w, v = _dense(h, k, project)
        energies, vecs = list(w), [v[:, i] for i in range(v.shape[1])]
    elif method == "lanczos":
        rng = np.random.default_rng(seed)
        energies, vecs = [], []
        for _ in range(k):
            e, v, _, _ = _lanczos_one(op, n, dtype, vecs, rng, project, tol, max_iter)
            energies.append(e)
            vecs.append(v)
        order = np.argsort(energies, kind="stable")
        energies = [energies[i] for i in order]
        vecs = [vecs[i] for i in order]
        # rotate within the converged block to proper Ritz vectors
        basis = np.array(vecs).T
        small = basis.conj().T @ op(basis)
        w, u = np.linalg.eigh(0.5 * (small + small.conj().T))
        energies, basis = list(w), basis @ u
        vecs = [basis[:, i] for i in range(basis.shape[1])]
    else:
        raise ValueError(f"unknown method {method!r}")

    states, residuals = [], []
    for e, v in zip(energies, vecs):
        v = gauge_fix(v / np.linalg.norm(v))
        if dtype == np.float64:
            v = v.real.astype(np.float64)
        r = float(np.linalg.norm(op(v) - e * v))
        if r > 1e-8:
            raise ConvergenceError("eigenpair residual above 1e-8", r)
        residuals.append(r)
        states.append(StateVector(v))
    return SpectrumResult(np.array(energies), states, np.array(residuals), method, sector)


def ground_state(h: PauliSum, **opts) -> SpectrumResult:
    """Two lowest eigenpairs, exposing the gap and any ground-state degeneracy."""
    opts.setdefault("k", 2)
    return low_spectrum(h, **opts)
