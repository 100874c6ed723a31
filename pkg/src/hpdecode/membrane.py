"""Haar-averaged decoding error from the domain-wall transfer matrix.

Averaging the two-replica purity over Haar gates leaves Ising spins (identity or
swap permutation) on the gates of every other layer. Two layers combine into a
transfer matrix T on N = L/2 spins which leaves the domain-wall states
|m> = |up_1 ... up_m down_{m+1} ... down_N> invariant; up is the swap spin.
Restricted to them T is tridiagonal with absorbing ends at m = 0 and m = N.

For the numerics we iterate the similarity transform T' = D T D^-1 with
D = diag(q^(-2m)), which is column stochastic (a random walk of the wall with
hops z q^2 down, 2z stay, z / q^2 up). This keeps every quantity O(1) for L in
the thousands, where the raw boundary vectors would overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .hpcore import HPPartition


MAX_LOG_RANGE = 600.0


def z_weight(q: int) -> float:
    return (q / (q * q + 1.0)) ** 2


@dataclass(frozen=True, eq=False)
class DWTransfer:
    N: int
    q: int
    z: float
    matrix: np.ndarray = field(repr=False)


def build_dw_transfer(L: int, q: int = 2) -> DWTransfer:
    """The (N+1) x (N+1) domain-wall transfer matrix, acting on column vectors."""
    if L % 2 or L < 4:
        raise InvalidInputError(f"need even L >= 4, got {L}")
    if q < 2:
        raise InvalidInputError("q must be >= 2")
    n = L // 2
    z = z_weight(q)
    t = np.zeros((n + 1, n + 1))
    for m in range(1, n):
        t[m, m] = 2 * z
        if m - 1 > 0:
            t[m, m - 1] = z
        if m + 1 < n:
            t[m, m + 1] = z
    t[0, 0] = t[n, n] = 1.0
    t[0, 1] = z
    t[n, n - 1] = z
    t.setflags(write=False)
    return DWTransfer(n, q, z, t)


def dw_spectrum(N: int, q: int = 2) -> np.ndarray:
    """Analytic eigenvalues: the doubly degenerate 1 and 2z(1 + cos(pi n / N)), n = 1..N-1."""
    z = z_weight(q)
    n = np.arange(1, N)
    return np.concatenate([[1.0, 1.0], 2 * z * (1 + np.cos(np.pi * n / N))])


@dataclass(frozen=True, eq=False)
class DWEigensystem:
    """Biorthonormal eigenvectors: rows of ``left`` and columns of ``right``.

    Index 0 and 1 hold the two stationary states (wall absorbed at m = 0 and
    m = N); index n + 1 holds the standing wave with eigenvalue lambda_n.
    """

    eigenvalues: np.ndarray
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)


def dw_eigensystem(T: DWTransfer) -> DWEigensystem:
    N, q, z = T.N, T.q, T.z
    j = np.arange(N + 1)
    lam = dw_spectrum(N, q)
    left = np.zeros((N + 1, N + 1))
    right = np.zeros((N + 1, N + 1))
    right[0, 0] = 1.0
    right[N, 1] = 1.0
    # leading left vectors (q^{2x} - q^{-2x}) / (q^{2N} - q^{-2N}) with x = N - j and x = j
    scale = 2.0 * N * math.log(q)
    for row, x in ((0, 2.0 * (N - j) * math.log(q)), (1, 2.0 * j * math.log(q))):
        left[row] = np.exp(x - scale) * (-np.expm1(-2 * x)) / (-np.expm1(-2 * scale))
    a = math.sqrt(2.0 / N)
    for n in range(1, N):
        k = math.pi * n / N
        wave = a * np.sin(k * j)
        wave[0] = wave[N] = 0.0
        left[n + 1] = wave
        r = wave.copy()
        r[0] = z / (lam[n + 1] - 1.0) * a * math.sin(k)
        r[N] = (-1) ** (n + 1) * z / (lam[n + 1] - 1.0) * a * math.sin(k)
        right[:, n + 1] = r
    return DWEigensystem(lam, left, right)


# --- boundary vectors -------------------------------------------------------


def _log_readout(L: int, L_A: int, q: int) -> np.ndarray:
    """log of the balanced readout covector g'(m), m = 0..N, for Alice's boundary.

    The input legs carry swap on A and identity on B; a leg contributes q^2 when
    its gate spin agrees with the boundary and q otherwise.
    """
    N = L // 2
    lq = math.log(q)
    sites = np.arange(L)
    boundary_swap = sites < L_A
    out = np.empty(N + 1)
    for m in range(N + 1):
        spin_swap = sites < 2 * m
        match = np.count_nonzero(spin_swap == boundary_swap)
        out[m] = (L_A - 2 * L + 2 * m) * lq + (2 * match + (L - match)) * lq
    return out


def readout_vector(L: int, L_A: int, q: int = 2) -> np.ndarray:
    """Balanced readout covector; equals 1 at m = 0 and q^(2 L_A) once the wall has passed A."""
    return np.exp(_log_readout(L, L_A, q))


def start_vector(L: int, L_D: int, q: int = 2) -> np.ndarray:
    """Balanced initial wall distribution set by Bob's boundary (swap on C, identity on D)."""
    N = L // 2
    L_C = L - L_D
    f = np.zeros(N + 1)
    if L_C % 2 == 0:
        f[L_C // 2] = 1.0
    else:
        # the bond straddling C and D spreads the wall over its two sides
        f[(L_C - 1) // 2] = q * q / (q * q + 1.0)
        f[(L_C + 1) // 2] = 1.0 / (q * q + 1.0)
    return f


def balanced_step(v: np.ndarray, q: int) -> np.ndarray:
    """One application of the column-stochastic T' to a distribution over m."""
    z = z_weight(q)
    down, stay, up = z * q * q, 2 * z, z / (q * q)
    out = np.zeros_like(v)
    n = len(v) - 1
    out[0] += v[0]
    out[n] += v[n]
    w = v[1:n]
    out[1:n] += stay * w
    out[0 : n - 1] += down * w
    out[2 : n + 1] += up * w
    return out


def _check_membrane_args(L, L_A, L_D, q, t=None):
    if L % 2 or L < 4:
        raise InvalidInputError(f"need even L >= 4, got {L}")
    HPPartition(L, L_A, L_D, q)  # validates the geometry
    if t is not None:
        if t < 1 or t % 2 == 0:
            raise InvalidInputError(f"membrane evolution is defined for odd t >= 1, got {t}")


def membrane_series(L: int, L_A: int, L_D: int, q: int = 2, t_max: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Haar-averaged delta(t) at every odd t <= t_max, in O(L t_max)."""
    _check_membrane_args(L, L_A, L_D, q, t_max if t_max % 2 else t_max - 1)
    g = readout_vector(L, L_A, q)
    v = start_vector(L, L_D, q)
    ts = np.arange(1, t_max + 1, 2)
    out = np.empty(len(ts))
    for i in range(len(ts)):
        if i:
            v = balanced_step(v, q)
        out[i] = g @ v - 1.0
    return ts, out


def membrane_delta(L: int, L_A: int, L_D: int, q: int = 2, t: int = 1) -> float:
    _check_membrane_args(L, L_A, L_D, q, t)
    return float(membrane_series(L, L_A, L_D, q, t)[1][-1])


def saturation_delta(L: int, L_A: int, L_D: int, q: int = 2) -> float:
    """t -> infinity limit of the finite-L average.

    Equal to (q^{2L_A} - 1)(q^{2L_C} - 1) / (q^{2L} - 1), i.e. the absorption
    probabilities of the wall weighted by the readout at m = 0 and m = N.
    """
    _check_membrane_args(L, L_A, L_D, q)
    lq = math.log(q)
    L_C = L - L_D
    # written with expm1 so the tiny L_D / large L regimes keep full precision
    return math.expm1(2 * L_A * lq) * (-math.expm1(-2 * L_C * lq)) * math.exp(-2 * L_D * lq) / (-math.expm1(-2 * L * lq))


def saturation_delta_overlap_form(L: int, L_A: int, L_D: int, q: int = 2) -> float:
    """Same quantity written as a sum of the two absorbing-state overlaps."""
    q = float(q)
    den = q**L - q ** (-L)
    one = q ** (L - L_D) * (q**L_D - q ** (-L_D)) / den
    two = q ** (2 * L_A - L_D) * (q ** (L - L_D) - q ** (L_D - L)) / den
    return one + two - 1.0


def infinite_size_plateau(q: int, L_A: int, L_D: int) -> float:
    return (q ** (2 * L_A) - 1) / q ** (2 * L_D)


def _interior_block(N: int, q: int) -> np.ndarray:
    z = z_weight(q)
    n = N - 1
    b = np.diag(np.full(n, 2 * z))
    b += np.diag(np.full(n - 1, z * q * q), 1)  # m+1 -> m
    b += np.diag(np.full(n - 1, z / (q * q)), -1)
    return b


def relaxation_covector(L: int, L_A: int, q: int = 2) -> np.ndarray:
    """Covector h on interior walls with delta(t) - delta_inf = h . p_int(t).

    The future absorption of interior weight at m = 0 and m = N is folded into
    h, so no large terms cancel when delta(t) is close to its plateau.
    """
    N = L // 2
    z = z_weight(q)
    g = readout_vector(L, L_A, q)
    b = _interior_block(N, q)
    eye = np.eye(N - 1)
    e_first = np.zeros(N - 1)
    e_first[0] = 1.0
    e_last = np.zeros(N - 1)
    e_last[-1] = 1.0
    # absorption probabilities from each interior site: a^T = e^T (1 - B)^-1 times the hop
    absorb0 = z * q * q * np.linalg.solve((eye - b).T, e_first)
    absorbN = z / (q * q) * np.linalg.solve((eye - b).T, e_last)
    return g[1:N] - g[0] * absorb0 - g[N] * absorbN


def relaxation_series(L: int, L_A: int, L_D: int, q: int = 2, t_max: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """delta(t) - delta_inf at odd t, returned as natural logs to survive underflow.

    Entries are log|delta - delta_inf|; the sign is positive for all cases we
    have checked and a negative value raises.
    """
    _check_membrane_args(L, L_A, L_D, q, t_max if t_max % 2 else t_max - 1)
    if L * math.log(q) > MAX_LOG_RANGE:
        # the slow mode lives on entries of relative size q^-L, which would underflow
        raise InvalidInputError(f"relaxation_series needs L log q <= {MAX_LOG_RANGE}; use relaxation_spectral")
    N = L // 2
    h = relaxation_covector(L, L_A, q)
    p = start_vector(L, L_D, q)[1:N].copy()
    b = _interior_block(N, q)
    ts = np.arange(1, t_max + 1, 2)
    out = np.empty(len(ts))
    log_scale = 0.0
    for i in range(len(ts)):
        if i:
            p = b @ p
            s = np.abs(p).max()
            if s > 0:
                p /= s
                log_scale += math.log(s)
        val = h @ p
        if val <= 0:
            raise ArithmeticError(f"non-positive relaxation at t={ts[i]}")
        out[i] = math.log(val) + log_scale
    return ts, out


def relaxation_spectral(L: int, L_A: int, L_D: int, q: int = 2, t: int = 1, log: bool = False) -> float:
    """delta(t) - delta_inf from the standing-wave part of the spectral decomposition.

    The overlaps span factors up to q^L, so every term is formed in log space
    and the sum is rescaled by its largest term. ``log=True`` returns the
    natural log of the (positive) result.
    """
    _check_membrane_args(L, L_A, L_D, q, t)
    es = dw_eigensystem(build_dw_transfer(L, q))
    N = L // 2
    lq = math.log(q)
    m = np.arange(N + 1)
    # undo the balancing: <g'| T'^s |f'> = <g' D| T^s |D^-1 f'>
    log_gd = _log_readout(L, L_A, q) - 2.0 * m * lq
    f = start_vector(L, L_D, q)
    nz = f > 0
    log_fd = np.full(N + 1, -np.inf)
    log_fd[nz] = np.log(f[nz]) + 2.0 * m[nz] * lq
    gmax, fmax = log_gd.max(), log_fd.max()
    gd = np.exp(log_gd - gmax)
    fd = np.exp(log_fd - fmax)
    s = (t - 1) // 2
    coef = (gd @ es.right[:, 2:]) * (es.left[2:] @ fd)
    with np.errstate(divide="ignore"):
        log_terms = np.log(np.abs(coef)) + s * np.log(es.eigenvalues[2:])
    top = log_terms.max()
    total = float(np.sum(np.sign(coef) * np.exp(log_terms - top)))
    if not log:
        return total * math.exp(top + gmax + fmax)
    if total <= 0:
        raise ArithmeticError(f"non-positive relaxation at t={t}")
    return math.log(total) + top + gmax + fmax


# --- asymptotics ------------------------------------------------------------


@dataclass(frozen=True)
class Velocities:
    v_E: float
    v_B: float
    D: float


def velocities(q: int = 2) -> Velocities:
    z = z_weight(q)
    return Velocities(
        v_E=math.log((q * q + 1) / (2 * q)) / math.log(q),
        v_B=(q * q - 1) / (q * q + 1),
        D=math.sqrt(z) / 2,
    )


def asymptotic_relaxation(L: int, t: float, q: int = 2, L_A: int = 1, L_D: int = 1, log: bool = False) -> float:
    """Saddle-point estimate of delta(t) - delta_inf for t >> L.

    (4 sqrt(2 pi) D / v_B^2) (q^{2(L_A+1)} - 1) / q^{L_D} (L / t^{3/2}) q^{L - v_E t}
    With ``log=True`` the natural log of the value is returned.
    """
    v = velocities(q)
    lq = math.log(q)
    val = (
        math.log(4 * math.sqrt(2 * math.pi) * v.D / v.v_B**2)
        + math.log(q ** (2 * (L_A + 1)) - 1)
        - L_D * lq
        + math.log(L)
        - 1.5 * math.log(t)
        + (L - v.v_E * t) * lq
    )
    return val if log else math.exp(val)


# --- Monte Carlo oracle -------------------------------------------------------


@dataclass(frozen=True)
class MCResult:
    mean: float
    sem: float
    samples: int


def _sample_seeds(seed: int, samples: int) -> list[int]:
    if samples == 1:
        return [seed]
    return [int(c.generate_state(1, np.uint64)[0]) for c in np.random.SeedSequence(seed).spawn(samples)]


def haar_mc_series(L: int, p: HPPartition, times, samples: int, seed: int, bc: str = "open") -> dict[int, MCResult]:
    """Monte Carlo mean of the exact decoding error over Haar circuits, per time.

    Each sample is a RandomGates circuit whose seed is spawned from ``seed``;
    with ``samples == 1`` the circuit seed is ``seed`` itself.
    """
    from .brickwork import CircuitSpec, RandomGates
    from .hpcore import decoding_series

    if samples < 1:
        raise InvalidInputError("need at least one sample")
    times = sorted(set(int(t) for t in times))
    vals = np.empty((samples, len(times)))
    for i, s in enumerate(_sample_seeds(seed, samples)):
        spec = CircuitSpec(L, p.q, bc, RandomGates(s))
        vals[i] = decoding_series(spec, p, times)[0].delta
    out = {}
    for j, t in enumerate(times):
        col = vals[:, j]
        sem = float(col.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("nan")
        out[t] = MCResult(float(col.mean()), sem, samples)
    return out


def haar_mc_delta(L: int, p: HPPartition, t: int, samples: int, seed: int, bc: str = "open") -> MCResult:
    return haar_mc_series(L, p, [t], samples, seed, bc)[int(t)]


# --- front broadening --------------------------------------------------------


def front_width(L: int, q: int = 2, thresholds=(0.75, 0.25), L_A: int = 1, L_D: int = 1, t_max: int | None = None) -> float:
    """Width in layers of the crossover of delta(t) from its early value to delta_inf.

    s(t) = (delta(t) - delta_inf) / (delta(3) - delta_inf); the width is
    t(s = thresholds[1]) - t(s = thresholds[0]) with linear interpolation
    between odd-t samples.
    """
    hi, lo = thresholds
    if not 0 < lo < hi < 1:
        raise InvalidInputError("thresholds must satisfy 0 < low < high < 1")
    if t_max is None:
        t_max = int(3 * L / velocities(q).v_B) + 101
    t_max |= 1
    ts, d = membrane_series(L, L_A, L_D, q, t_max)
    d_inf = saturation_delta(L, L_A, L_D, q)
    early = d[ts == 3][0]
    s = (d - d_inf) / (early - d_inf)
    return _crossing(ts, s, lo) - _crossing(ts, s, hi)


def _crossing(ts: np.ndarray, s: np.ndarray, level: float) -> float:
    below = np.nonzero(s <= level)[0]
    if len(below) == 0 or below[0] == 0:
        raise ValueError(f"level {level} not bracketed by the sampled series")
    i = below[0]
    t0, t1, s0, s1 = ts[i - 1], ts[i], s[i - 1], s[i]
    return float(t0 + (s0 - level) * (t1 - t0) / (s0 - s1))
