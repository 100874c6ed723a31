"""Exact Hayden-Preskill quantities for small brickwork circuits.

The Choi state of the evolution U is |U> / q^(L/2) on (input legs) x (output legs).
Alice's register A is the L_A leftmost input sites, Bob's output D the L_D
rightmost output sites; B and C are the complements. The decoding error is

    delta = d_A d_C tr[rho_{A'C}^2] - 1,

where rho_{A'C} is the reduction of the Choi state to (A inputs, C outputs).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.linalg.blas import zherk

from .brickwork import CircuitSpec, EvolutionOperator, build_evolution, iter_evolution
from .errors import InvalidInputError
from .qgates import PAULI_X, PAULI_Y, PAULI_Z, Gate
from .brickwork import Floquet

DELTA_TOL = 1e-9


@dataclass(frozen=True)
class HPPartition:
    L: int
    L_A: int
    L_D: int
    q: int = 2

    def __post_init__(self):
        if not 1 <= self.L_A <= self.L_D <= self.L:
            raise InvalidInputError(f"need 1 <= L_A <= L_D <= L, got L_A={self.L_A}, L_D={self.L_D}, L={self.L}")
        if self.L_A + self.L_D > self.L:
            raise InvalidInputError("A and D must fit into the chain (L_A + L_D <= L)")

    @property
    def L_B(self) -> int:
        return self.L - self.L_A

    @property
    def L_C(self) -> int:
        return self.L - self.L_D

    @property
    def d_A(self) -> int:
        return self.q**self.L_A

    @property
    def d_B(self) -> int:
        return self.q**self.L_B

    @property
    def d_C(self) -> int:
        return self.q**self.L_C

    @property
    def d_D(self) -> int:
        return self.q**self.L_D

    def with_L_D(self, L_D: int) -> "HPPartition":
        return HPPartition(self.L, self.L_A, L_D, self.q)

    @property
    def delta_max(self) -> float:
        """Decoding error of the identity circuit, q^(2 L_A) - 1."""
        return float(self.d_A**2 - 1)


@dataclass(eq=False)
class DecodingSeries:
    method: str
    spec: dict
    partition: HPPartition
    t: np.ndarray
    delta: np.ndarray
    seed: int | None = None
    parity: str = "even"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=int)
        self.delta = np.asarray(self.delta, dtype=float)
        if self.t.shape != self.delta.shape:
            raise InvalidInputError("t and delta must have equal length")

    def check(self, tol: float = DELTA_TOL):
        """Raise if any value leaves [0, q^(2 L_A) - 1] by more than ``tol``."""
        lo, hi = -tol, self.partition.delta_max + tol
        bad = (self.delta < lo) | (self.delta > hi)
        if np.any(bad):
            raise AssertionError(f"delta out of range at t={self.t[bad].tolist()}")
        return self

    def window_mean(self, t_min: int, t_max: int) -> float:
        sel = (self.t >= t_min) & (self.t <= t_max)
        if not np.any(sel):
            raise InvalidInputError(f"no samples in [{t_min}, {t_max}]")
        return float(self.delta[sel].mean())

    @property
    def big_delta(self) -> np.ndarray:
        """Pauli-averaged OTOC, (delta + 1) / d_A^2."""
        return (self.delta + 1.0) / self.partition.d_A**2


def _check_compatible(spec: CircuitSpec, p: HPPartition):
    if spec.L != p.L or spec.q != p.q:
        raise InvalidInputError(f"partition (L={p.L}, q={p.q}) does not match circuit (L={spec.L}, q={spec.q})")


def choi_matrix(u: np.ndarray, p: HPPartition) -> np.ndarray:
    """Unnormalized Choi state as a (A in, C out) x (B in, D out) matrix."""
    t = u.reshape(p.d_C, p.d_D, p.d_A, p.d_B)  # [c, d, a, b]
    return np.ascontiguousarray(t.transpose(2, 0, 3, 1)).reshape(p.d_A * p.d_C, p.d_B * p.d_D)


def _gram(m: np.ndarray) -> np.ndarray:
    """Upper triangle of the Gram matrix on the smaller side of ``m`` (up to complex conjugation)."""
    rows, cols = m.shape
    if rows <= cols:
        return zherk(1.0, m.T, trans=2)  # (m^T)^H m^T = conj(m m^H)
    return zherk(1.0, m.T, trans=0)  # m^T conj(m) = conj(m^H m)


def _frob2_upper(g: np.ndarray) -> float:
    d = np.real(np.diagonal(g))
    # vdot keeps integer-valued Gram entries (e.g. permutation circuits) exact
    return 2.0 * float(np.vdot(g, g).real) - float(d @ d)


def choi_purity_matrix(u: np.ndarray, p: HPPartition) -> float:
    m = choi_matrix(u, p)
    return _frob2_upper(_gram(m)) / float(p.q) ** (2 * p.L)


def choi_purity(u: EvolutionOperator, p: HPPartition) -> float:
    """tr[rho_{A'C}^2] for the normalized Choi state of ``u``."""
    _check_compatible(u.spec, p)
    return choi_purity_matrix(u.u, p)


def delta_from_matrix(u: np.ndarray, p: HPPartition) -> float:
    return p.d_A * p.d_C * choi_purity_matrix(u, p) - 1.0


def decoding_error(spec: CircuitSpec, p: HPPartition, t: int) -> float:
    _check_compatible(spec, p)
    return delta_from_matrix(build_evolution(spec, t).u, p)


def decoding_series(spec: CircuitSpec, partitions, times, method: str = "exact", seed=None) -> list[DecodingSeries]:
    """delta(t) for several partitions, evolving the circuit once.

    ``partitions`` may be a single HPPartition or a sequence; the returned list
    has one DecodingSeries per partition.
    """
    if isinstance(partitions, HPPartition):
        partitions = [partitions]
    for p in partitions:
        _check_compatible(spec, p)
    times = sorted(set(int(t) for t in times))
    if not times or times[0] < 0:
        raise InvalidInputError("times must be non-empty and >= 0")
    wanted = set(times)
    vals = {p: [] for p in partitions}
    for ev in iter_evolution(spec, times[-1]):
        if ev.t in wanted:
            for p in partitions:
                vals[p].append(delta_from_matrix(ev.u, p))
    if seed is None and "seed" in spec.describe():
        seed = spec.describe()["seed"]
    return [
        DecodingSeries(method, spec.describe(), p, np.array(times), np.array(vals[p]), seed, spec.parity)
        for p in partitions
    ]


def saturation_window(L: int) -> range:
    """Late-time window [5L, 10L] sampled every second layer."""
    return range(5 * L, 10 * L + 1, 2)


def b_quantity(g: Gate, L: int) -> float:
    """B_{L-1}: q^L times the Choi purity at the light-cone transport time t = L - 1.

    Uses a Floquet circuit of ``g`` with open boundaries, default layer parity and
    L_A = L_D = 1, so that ``B_{L-1} = delta(L - 1) + 1``.
    """
    if L < 2:
        raise InvalidInputError("need L >= 2")
    spec = CircuitSpec(L, g.q, "open", Floquet(g))
    return decoding_error(spec, HPPartition(L, 1, 1, g.q), L - 1) + 1.0


def weyl_basis(q: int) -> list[np.ndarray]:
    """Unitary operator basis on one qudit: Paulis (I, X, Y, Z) for q = 2, X^a Z^b otherwise.

    The identity is always first.
    """
    if q == 2:
        return [np.eye(2, dtype=complex), PAULI_X, PAULI_Y, PAULI_Z]
    shift = np.roll(np.eye(q), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(q) / q))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b) for a in range(q) for b in range(q)]


def operator_strings(q: int, n: int) -> list[np.ndarray]:
    basis = weyl_basis(q)
    return [reduce(np.kron, combo) for combo in itertools.product(basis, repeat=n)]


def otoc_average(spec: CircuitSpec, p: HPPartition, t: int, which: str = "nonidentity") -> float:
    """Average of <O_A(t)^dag O_D^dag O_A(t) O_D> over operator strings on A and D.

    ``which="all"`` averages over every string pair (this is Delta(t));
    ``which="nonidentity"`` excludes the identity on either side (this is F(t)).
    The bracket is the infinite-temperature trace tr[.] / q^L.

    O_A(t) = U O_A U^dagger: Alice's operator enters at the circuit input and is
    carried to the output, where D lives. This is the ordering for which
    delta = d_A^2 Delta - 1 holds with the Choi convention used here.
    """
    if which not in ("all", "nonidentity"):
        raise InvalidInputError(f"which must be 'all' or 'nonidentity', got {which!r}")
    _check_compatible(spec, p)
    u = build_evolution(spec, t).u
    ud = u.conj().T
    n = spec.dim
    strings_a = operator_strings(p.q, p.L_A)
    strings_d = operator_strings(p.q, p.L_D)
    if which == "nonidentity":
        strings_a, strings_d = strings_a[1:], strings_d[1:]
    evolved = [u @ np.kron(s, np.eye(n // p.d_A)) @ ud for s in strings_a]
    placed = [np.kron(np.eye(n // p.d_D), s) for s in strings_d]
    total = 0.0
    for oa in evolved:
        for od in placed:
            total += np.real(np.trace(oa.conj().T @ od.conj().T @ oa @ od)) / n
    return total / (len(evolved) * len(placed))


def delta_from_otoc(p: HPPartition, f: float) -> float:
    """delta = delta_inf + (d_A^2 - 1)(1 - d_D^-2) F with delta_inf = (d_A^2 - 1) / d_D^2."""
    da2, dd2 = p.d_A**2, p.d_D**2
    return (da2 - 1) / dd2 + (da2 - 1) * (1 - 1 / dd2) * f


def mutual_information(u: EvolutionOperator, p: HPPartition, base="e") -> float:
    """Operator-space mutual information I(A:C) = S_A + S_C - S_AC.

    S_A = L_A log q and S_C = L_C log q follow from unitarity; S_AC is the von
    Neumann entropy of rho_{A'C}. ``base`` is ``"e"`` (nats), ``"q"`` (units of
    log q) or a number.
    """
    _check_compatible(u.spec, p)
    g = _gram(choi_matrix(u.u, p))
    ev = np.linalg.eigvalsh(g, UPLO="U") / float(p.q) ** p.L
    ev = ev[ev > 1e-300]
    s_ac = float(-np.sum(ev * np.log(ev)))
    info = (p.L_A + p.L_C) * np.log(p.q) - s_ac
    if base == "e":
        return info
    if base == "q":
        return info / np.log(p.q)
    return info / np.log(base)
