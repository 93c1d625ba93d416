"""q-series oracle for orbifold boundary amplitudes of the replicated Ising theory.

Theta conventions at real nome ``0 < q < 1``::

    eta(q)    = q^{1/24} prod (1 - q^n)
    theta2(q) = sum_n q^{(n+1/2)^2/2}
    theta3(q) = sum_n q^{n^2/2}
    theta4(q) = sum_n (-1)^n q^{n^2/2}
    theta2(y, q) = sum_n y^{n+1/2} q^{(n+1/2)^2/2}
    theta4(y, q) = sum_n (-1)^n y^n q^{n^2/2}

The boundary amplitudes are stored as ``eta(qt)^{-N} F(qt)`` where ``F`` is a finite
sum of rational powers of ``qt`` with exact rational coefficients.  Because
``qt^h / eta^N`` are the U(1)^N characters, the coefficients of ``F`` are the
multiplicities ``n^h`` of the open-string spectrum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np

N_TRUNC = 200
DEFAULT_DPS = 40
MAX_LATTICE_POINTS = 5_000_000

Series = dict  # Fraction exponent -> Fraction coefficient


class PrecisionError(ArithmeticError):
    """A series did not reach its truncation target."""


# ---------------------------------------------------------------------------
# eta and theta functions


def _nome(q) -> mpmath.mpf:
    q = mpmath.mpf(q)
    if not 0 < q < 1:
        raise ValueError(f"nome must lie in (0, 1), got {q}")
    return q


def _tol() -> mpmath.mpf:
    return min(mpmath.mpf("1e-15"), mpmath.mpf(10) ** (-(mpmath.mp.dps - 5)))


def _bilateral(term: Callable[[int], mpmath.mpc]) -> mpmath.mpc:
    """``sum_{n in Z} term(n)`` ordered by ``|n|``; terms must decay super-exponentially."""
    total = term(0)
    tol = _tol()
    for k in range(1, N_TRUNC + 1):
        pair = term(k) + term(-k)
        total += pair
        nxt = abs(term(k + 1)) + abs(term(-k - 1))
        if nxt < tol * abs(total):
            return total
    raise PrecisionError(f"bilateral sum not converged after {N_TRUNC} terms")


def _product(factor: Callable[[int], mpmath.mpf], small: Callable[[int], mpmath.mpf]):
    """``prod_{n>=1} factor(n)``, stopping once ``small(n)`` (the deviation from 1) is negligible."""
    total = mpmath.mpf(1)
    tol = _tol()
    for n in range(1, N_TRUNC + 1):
        total *= factor(n)
        if small(n + 1) < tol:
            return total
    raise PrecisionError(f"product not converged after {N_TRUNC} factors")


def dedekind_eta(q, form: str = "sum"):
    """Sum form uses Euler's pentagonal series ``q^{1/24} sum (-1)^k q^{k(3k-1)/2}``."""
    q = _nome(q)
    if form == "sum":
        return q ** (mpmath.mpf(1) / 24) * _bilateral(
            lambda k: (-1) ** k * q ** (k * (3 * k - 1) // 2)).real
    if form == "product":
        return q ** (mpmath.mpf(1) / 24) * _product(lambda n: 1 - q ** n, lambda n: q ** n)
    raise ValueError(f"unknown form {form!r}")


def theta2(q, form: str = "sum"):
    q = _nome(q)
    if form == "sum":
        return _bilateral(lambda n: q ** ((n + mpmath.mpf(1) / 2) ** 2 / 2)).real
    if form == "product":
        return 2 * q ** (mpmath.mpf(1) / 8) * _product(
            lambda n: (1 - q ** n) * (1 + q ** n) ** 2, lambda n: 2 * q ** n)
    raise ValueError(f"unknown form {form!r}")


def theta3(q, form: str = "sum"):
    q = _nome(q)
    if form == "sum":
        return _bilateral(lambda n: q ** (mpmath.mpf(n) ** 2 / 2)).real
    if form == "product":
        h = mpmath.mpf(1) / 2
        return _product(lambda n: (1 - q ** n) * (1 + q ** (n - h)) ** 2,
                        lambda n: 2 * q ** (n - h))
    raise ValueError(f"unknown form {form!r}")


def theta4(q, form: str = "sum"):
    q = _nome(q)
    if form == "sum":
        return _bilateral(lambda n: (-1) ** n * q ** (mpmath.mpf(n) ** 2 / 2)).real
    if form == "product":
        h = mpmath.mpf(1) / 2
        return _product(lambda n: (1 - q ** n) * (1 - q ** (n - h)) ** 2,
                        lambda n: 2 * q ** (n - h))
    raise ValueError(f"unknown form {form!r}")


def theta2_arg(y, q):
    """``sum_n y^{n+1/2} q^{(n+1/2)^2/2}``; ``y`` may be complex (principal powers)."""
    q = _nome(q)
    y = mpmath.mpmathify(y)
    h = mpmath.mpf(1) / 2
    val = _bilateral(lambda n: mpmath.power(y, n + h) * q ** ((n + h) ** 2 / 2))
    return val.real if mpmath.im(val) == 0 else val


def theta4_arg(y, q):
    """``sum_n (-1)^n y^n q^{n^2/2}``."""
    q = _nome(q)
    y = mpmath.mpmathify(y)
    val = _bilateral(lambda n: (-1) ** n * mpmath.power(y, n) * q ** (mpmath.mpf(n) ** 2 / 2))
    return val.real if mpmath.im(val) == 0 else val


def nome_pair(t) -> tuple[mpmath.mpf, mpmath.mpf]:
    """``(q, qt)`` for ``tau = i t``: ``q = exp(-2 pi t)``, ``qt = exp(-2 pi / t)``."""
    t = mpmath.mpf(t)
    return mpmath.exp(-2 * mpmath.pi * t), mpmath.exp(-2 * mpmath.pi / t)


# ---------------------------------------------------------------------------
# exact q-series with rational exponents


def series_mul(a: Series, b: Series, cutoff: Fraction) -> Series:
    out: Series = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            if e <= cutoff:
                out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def series_add(a: Series, b: Series, scale=1) -> Series:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0) + scale * c
    return {e: c for e, c in out.items() if c != 0}


def _half_odd_series(cutoff: Fraction) -> Series:
    """``sum_{n>=1} qt^{(n-1/2)^2/4}``."""
    out: Series = {}
    n = 1
    while Fraction((2 * n - 1) ** 2, 16) <= cutoff:
        out[Fraction((2 * n - 1) ** 2, 16)] = Fraction(1)
        n += 1
    return out


def _alternating_series(linear: Fraction, cutoff: Fraction) -> Series:
    """``sum_{n in Z} (-1)^n qt^{n^2 + linear n}`` up to ``cutoff``."""
    out: Series = {}
    bound = int(math.isqrt(int(cutoff) + 1)) + 2
    for n in range(-bound - 1, bound + 2):
        e = Fraction(n * n) + linear * n
        if e <= cutoff:
            out[e] = out.get(e, 0) + (1 if n % 2 == 0 else -1)
    return {e: c for e, c in out.items() if c != 0}


def lattice_series(shift: Sequence[int], radius: Fraction, cutoff: Fraction,
                   with_overflow: bool = False):
    """``sum_{R in Lt} qt^{2 |R - P shift/4|^2}`` with ``Lt = radius * P Z^N``.

    ``P`` projects out ``d = (1, ..., 1)``.  Cosets of ``Z^N / Z d`` are enumerated with
    the last component fixed to zero.  With ``radius = a/b`` the exponent of the point
    ``n`` is ``(N |w|^2 - (sum w)^2) / (8 b^2 N)`` for the integer vector
    ``w = 4 a n - b shift``.
    """
    s = np.asarray(shift, dtype=np.int64)
    N = s.size
    radius = Fraction(radius)
    a, b = radius.numerator, radius.denominator
    if N == 1:
        pts = {Fraction(0): Fraction(1)}
        return (pts, Fraction(0)) if with_overflow else pts
    outer = cutoff + 1
    # exponent >= (radius |n|_inf - 1/2)^2, so this box holds every point below `outer`
    B = int(math.floor((math.sqrt(float(outer)) + 0.5) / float(radius))) + 1
    npts = (2 * B + 1) ** (N - 1)
    if npts > MAX_LATTICE_POINTS:
        raise PrecisionError(f"lattice enumeration needs {npts} points; raise qt or lower precision")
    rng = np.arange(-B, B + 1, dtype=np.int64)
    grid = np.array(np.meshgrid(*([rng] * (N - 1)), indexing="ij")).reshape(N - 1, -1).T
    w = np.empty((grid.shape[0], N), dtype=np.int64)
    w[:, :N - 1] = 4 * a * grid - b * s[:N - 1]
    w[:, N - 1] = -b * s[N - 1]
    K = N * np.einsum("ij,ij->i", w, w) - w.sum(axis=1) ** 2
    den = 8 * b * b * N
    vals, counts = np.unique(K, return_counts=True)
    kept: Series = {}
    overflow = Fraction(0)
    for k, c in zip(vals.tolist(), counts.tolist()):
        e = Fraction(int(k), den)
        if e <= cutoff:
            kept[e] = Fraction(c)
        elif e <= outer and (overflow == 0 or e < overflow):
            overflow = e
    return (kept, overflow) if with_overflow else kept


@dataclass(frozen=True)
class QSeries:
    """``value = eta(q)^{-N} sum_e coeff_e q^e`` at the nome ``q``."""

    q: mpmath.mpf
    components: int
    terms: tuple[tuple[Fraction, Fraction], ...]
    value: mpmath.mpf
    truncation_bound: mpmath.mpf
    n_trunc: int

    @property
    def leading_exponent(self) -> Fraction:
        """Exponent ``h - N/24`` of the leading power of ``q``."""
        return self.terms[0][0] - Fraction(self.components, 24)

    def multiplicities(self, levels: int) -> list[tuple[Fraction, Fraction]]:
        """First ``levels`` nonzero ``(h, n^h)`` pairs of the character expansion."""
        return list(self.terms[:levels])


def _cutoff_for(qt: mpmath.mpf, leading: Fraction, rel_tol) -> Fraction:
    decades = -mpmath.log(mpmath.mpf(rel_tol)) / -mpmath.log(qt)
    return leading + Fraction(int(mpmath.ceil(decades * 16)) + 1, 16)


def _finish(qt, N: int, F: Series, cutoff: Fraction, omitted: Fraction) -> QSeries:
    terms = tuple(sorted((e, c) for e, c in F.items() if c != 0))
    body = mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * qt ** (mpmath.mpf(e.numerator) / e.denominator)
                       for e, c in terms)
    eta = dedekind_eta(qt)
    value = body / eta ** N
    # next omitted power (with unit weight per lattice shell) bounds the truncation
    nxt = omitted if omitted > cutoff else cutoff
    bound = (qt ** (mpmath.mpf(nxt.numerator) / nxt.denominator)) * len(terms) / eta ** N
    if value <= 0:
        raise PrecisionError("amplitude evaluated to a non-positive value")
    return QSeries(qt, N, terms, value, bound, len(terms))


def _check_alpha(alpha: int) -> int:
    if alpha not in (1, 2, 3):
        raise ValueError(f"unsupported replica index alpha={alpha}; use 1, 2 or 3")
    return int(alpha)


def amplitude_Z1f(qtilde, alpha: int, radius=1, dps: int = DEFAULT_DPS,
                  rel_tol=None) -> QSeries:
    """Amplitude between the replica-gluing boundary and the free boundary, ``N = 2 alpha``.

    ``Z = 1/2 sum_{a in {+-1}^N} eta^{-N} T(qt) sum_{R} qt^{2 (R - P a d / 4)^2}``.
    """
    N = 2 * _check_alpha(alpha)
    with mpmath.workdps(dps):
        qt = _nome(qtilde)
        tol = rel_tol if rel_tol is not None else mpmath.mpf(10) ** (-(dps - 10))
        cutoff = _cutoff_for(qt, Fraction(1, 16), tol)
        T = _half_odd_series(cutoff)
        F: Series = {}
        omitted = cutoff + 1
        for k in range(N + 1):
            shift = [-1] * k + [1] * (N - k)
            S, over = lattice_series(shift, Fraction(radius), cutoff, with_overflow=True)
            if over:
                omitted = min(omitted, over + Fraction(1, 16))
            F = series_add(F, series_mul(T, S, cutoff), Fraction(math.comb(N, k), 2))
        return _finish(qt, N, F, cutoff, omitted)


def amplitude_Z1up(qtilde, alpha: int, radius=1, dps: int = DEFAULT_DPS,
                   rel_tol=None) -> QSeries:
    """Amplitude between the replica-gluing boundary and the fixed (up or down) boundary.

    Untwisted block ``1/2 eta^{-N} T(qt) sum_R qt^{2 R^2}`` plus the twisted block
    ``1/2 eta^{-N} qt^{1/16} (sum (-1)^n qt^{n^2+n/2}) (sum (-1)^n qt^{n^2})^{N-1}``.
    """
    N = 2 * _check_alpha(alpha)
    with mpmath.workdps(dps):
        qt = _nome(qtilde)
        tol = rel_tol if rel_tol is not None else mpmath.mpf(10) ** (-(dps - 10))
        cutoff = _cutoff_for(qt, Fraction(1, 16), tol)
        T = _half_odd_series(cutoff)
        S, over = lattice_series([0] * N, Fraction(radius), cutoff, with_overflow=True)
        F = series_mul(T, S, cutoff)
        F = {e: c / 2 for e, c in F.items()}
        tw = {Fraction(1, 16): Fraction(1, 2)}
        tw = series_mul(tw, _alternating_series(Fraction(1, 2), cutoff), cutoff)
        alt = _alternating_series(Fraction(0), cutoff)
        for _ in range(N - 1):
            tw = series_mul(tw, alt, cutoff)
        F = series_add(F, tw)
        omitted = over + Fraction(1, 16) if over else cutoff + 1
        return _finish(qt, N, F, cutoff, omitted)


AMPLITUDES = {"z1f": amplitude_Z1f, "z1up": amplitude_Z1up}


# ---------------------------------------------------------------------------
# weight extraction


@dataclass(frozen=True)
class WeightEstimate:
    h: float
    drift: float
    slopes: tuple[float, ...]


def _aitken(seq: Sequence[mpmath.mpf]) -> mpmath.mpf:
    s0, s1, s2 = seq[-3:]
    den = s2 - 2 * s1 + s0
    if den == 0:
        return s2
    return s2 - (s2 - s1) ** 2 / den


def leading_weight(samples: Iterable[tuple[object, object]], c: float) -> WeightEstimate:
    """Estimate ``h`` from ``Z(qt) ~ qt^{h - c/24}`` at small ``qt``.

    Consecutive log-log slopes are formed.  With two slopes a Richardson step removes
    a correction linear in ``qt``; with three or more an Aitken step removes the
    leading geometric correction whatever its power.  ``drift`` is the change made
    by that step, a proxy for the remaining error.
    """
    pts = sorted(((mpmath.mpf(q), mpmath.mpf(z)) for q, z in samples), key=lambda p: -p[0])
    if len(pts) < 3:
        raise ValueError("need at least three samples")
    if any(q <= 0 or z <= 0 for q, z in pts):
        raise ValueError("samples must be positive")
    slopes = [mpmath.log(z2 / z1) / mpmath.log(q2 / q1)
              for (q1, z1), (q2, z2) in zip(pts, pts[1:])]
    if len(slopes) >= 3:
        best = _aitken(slopes)
    else:
        # slope k carries (q_{k+1} - q_k) / ln(q_{k+1} / q_k) times the q^1 coefficient
        d = [(q2 - q1) / mpmath.log(q2 / q1) for (q1, _), (q2, _) in zip(pts, pts[1:])]
        best = (slopes[1] * d[0] - slopes[0] * d[1]) / (d[0] - d[1])
    drift = abs(best - slopes[-1])
    h = best + mpmath.mpf(c) / 24
    return WeightEstimate(float(h), float(drift), tuple(float(s) for s in slopes))


def sample_amplitude(name: str, alpha: int, qtildes: Sequence, dps: int = DEFAULT_DPS):
    fn = AMPLITUDES[name]
    return [(mpmath.mpf(q), fn(q, alpha, dps=dps).value) for q in qtildes]


def numeric_multiplicities(amplitude: Callable[[mpmath.mpf], mpmath.mpf], components: int,
                           exponents: Sequence[Fraction], qtilde="1e-400", dps: int = 900):
    """Peel ``n^h`` off ``eta^N Z`` numerically at a tiny nome, level by level.

    ``amplitude`` is treated as a black box; at ``qtilde`` each successive term is
    smaller than the previous one by ``qtilde`` to the exponent spacing, which fixes
    the achievable accuracy.
    """
    out = []
    with mpmath.workdps(dps):
        qt = mpmath.mpf(qtilde)
        g = amplitude(qt) * dedekind_eta(qt) ** components
        for e in exponents:
            scale = qt ** (mpmath.mpf(e.numerator) / e.denominator)
            coeff = g / scale
            out.append((e, coeff))
            g -= mpmath.nint(coeff) * scale
    return out


# ---------------------------------------------------------------------------
# closed forms


def corner_exponent(c, theta=None, h=0, *, theta_over_pi=None):
    """``(c/24)(theta/pi - pi/theta) + (pi/theta) h``.

    Passing ``theta_over_pi`` with rational ``c`` and ``h`` returns an exact Fraction.
    """
    if theta_over_pi is not None:
        t = Fraction(theta_over_pi)
        if t <= 0:
            raise ValueError("theta must be positive")
        if isinstance(c, (int, Fraction)) and isinstance(h, (int, Fraction)):
            return Fraction(c) / 24 * (t - 1 / t) + Fraction(h) / t
        tf = float(t)
        return float(c) / 24 * (tf - 1 / tf) + float(h) / tf
    if theta is None or theta <= 0:
        raise ValueError("theta must be positive")
    return c / 24 * (theta / math.pi - math.pi / theta) + (math.pi / theta) * h


def casimir_energy(N: int, L: float) -> float:
    """Ground-state energy ``-pi N / (6 L)`` of N free bosons on a ring of length L."""
    if N < 1 or L <= 0:
        raise ValueError("need N >= 1 and L > 0")
    return -math.pi * N / (6 * L)


def g_factor_dirichlet(N: int, unit_cell_volume: float) -> float:
    if N < 1 or unit_cell_volume <= 0:
        raise ValueError("need N >= 1 and a positive volume")
    return 4.0 ** (-N / 4) * unit_cell_volume ** -0.5


def g_factor_neumann(unit_cell_volume: float) -> float:
    if unit_cell_volume <= 0:
        raise ValueError("need a positive volume")
    return unit_cell_volume ** 0.5
