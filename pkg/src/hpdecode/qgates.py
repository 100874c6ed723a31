"""Two-site gates: XXZ Trotter gates, Haar sampling, space-time duals, operator entanglement.

Index convention used throughout the package: a pair of sites (s1, s2) maps to
the flat index ``s1 * q + s2``; site 1 is the left (more significant) factor of
a Kronecker product. A gate matrix ``m`` maps inputs (a, b) to outputs (c, d)
as ``m[c * q + d, a * q + b]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import InvalidInputError

UNITARITY_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def unitarity_defect(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[1]))))


@dataclass(frozen=True, eq=False)
class Gate:
    """An immutable q^2 x q^2 unitary acting on two neighbouring qudits."""

    q: int
    m: np.ndarray = field(repr=False)

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 2:
            raise InvalidInputError(f"qudit dimension must be an integer >= 2, got {self.q}")
        m = np.array(self.m, dtype=complex)
        if m.shape != (self.q**2, self.q**2):
            raise InvalidInputError(f"gate must be {self.q**2}x{self.q**2}, got {m.shape}")
        defect = unitarity_defect(m)
        if defect > UNITARITY_TOL:
            raise InvalidInputError(f"gate is not unitary (defect {defect:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def dagger(self) -> "Gate":
        return Gate(self.q, self.m.conj().T)

    def __matmul__(self, other: "Gate") -> "Gate":
        if other.q != self.q:
            raise InvalidInputError("cannot compose gates of different qudit dimension")
        return Gate(self.q, self.m @ other.m)

    def dressed(self, u1, u2, v1, v2) -> "Gate":
        """Return ``(u1 x u2) m (v1 x v2)``."""
        ops = [np.asarray(x, dtype=complex) for x in (u1, u2, v1, v2)]
        for x in ops:
            if x.shape != (self.q, self.q) or unitarity_defect(x) > UNITARITY_TOL:
                raise InvalidInputError("dressing matrices must be q x q unitaries")
        return Gate(self.q, np.kron(ops[0], ops[1]) @ self.m @ np.kron(ops[2], ops[3]))

    def to_tensor(self) -> np.ndarray:
        """Gate as a rank-4 tensor indexed [c, d, a, b]."""
        q = self.q
        return self.m.reshape(q, q, q, q)


def identity_gate(q: int = 2) -> Gate:
    return Gate(q, np.eye(q * q))


def swap_gate(q: int = 2) -> Gate:
    m = np.zeros((q * q, q * q))
    for a in range(q):
        for b in range(q):
            m[b * q + a, a * q + b] = 1.0
    return Gate(q, m)


def xxz_gate(J_xy: float, J_z: float, dressing=None) -> Gate:
    """exp(-i (J_xy (XX + YY) + J_z ZZ)), optionally sandwiched by single-site unitaries.

    ``dressing`` is a sequence ``(u_plus, u_minus, v_plus, v_minus)`` giving
    ``(u_plus x u_minus) exp(...) (v_plus x v_minus)``.
    """
    h = J_xy * (np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y)) + J_z * np.kron(PAULI_Z, PAULI_Z)
    g = Gate(2, expm(-1j * h))
    if dressing is None:
        return g
    if len(dressing) != 4:
        raise InvalidInputError("dressing needs four single-site unitaries")
    return g.dressed(*dressing)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    # QR of a Ginibre matrix with R's diagonal phases fixed to +1 (Mezzadri's construction)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    qmat, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return qmat * (d / np.abs(d))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_gate(q: int = 2, seed=None) -> Gate:
    """Haar-random gate on U(q^2); deterministic for a given seed."""
    return Gate(q, haar_unitary(q * q, _as_rng(seed)))


def random_dressing(q: int = 2, seed=None) -> tuple:
    """Four independent Haar single-site unitaries, e.g. for ``xxz_gate(..., dressing=...)``."""
    rng = _as_rng(seed)
    return tuple(haar_unitary(q, rng) for _ in range(4))


def _matrix_and_q(g) -> tuple[np.ndarray, int]:
    if isinstance(g, Gate):
        return g.m, g.q
    m = np.asarray(g, dtype=complex)
    q = int(round(np.sqrt(m.shape[0])))
    if m.ndim != 2 or m.shape[0] != m.shape[1] or q * q != m.shape[0]:
        raise InvalidInputError(f"expected a q^2 x q^2 matrix, got shape {m.shape}")
    return m, q


def spacetime_dual(g) -> np.ndarray:
    """Index reshuffle U~[(c, a), (d, b)] = U[(c, d), (a, b)].

    Accepts a Gate or a raw q^2 x q^2 matrix; the reshuffle is an involution.
    """
    m, q = _matrix_and_q(g)
    t = m.reshape(q, q, q, q)  # [c, d, a, b]
    return np.ascontiguousarray(t.transpose(0, 2, 1, 3)).reshape(q * q, q * q)


def dual_unitarity_defect(g) -> float:
    return unitarity_defect(spacetime_dual(g))


@dataclass(frozen=True)
class GateCharacterization:
    dual_defect: float
    op_entanglement: float
    b1: float
    q: int

    @property
    def e_max(self) -> float:
        return 1.0 - 1.0 / self.q**2

    @property
    def z1(self) -> float:
        """Deviation from maximal operator entanglement, 1 - q^2 E / (q^2 - 1)."""
        return 1.0 - self.q**2 * self.op_entanglement / (self.q**2 - 1)


def operator_entanglement(op) -> GateCharacterization:
    """Linear operator entanglement of a two-site operator across its two sites.

    The operator is normalized to unit Hilbert-Schmidt norm, viewed as a state on
    (site-1 legs) x (site-2 legs), and the purity p of the site-1 reduction gives
    ``b1 = q^2 p`` and ``E = 1 - p``.
    """
    m, q = _matrix_and_q(op)
    norm = np.linalg.norm(m)
    if norm == 0:
        raise InvalidInputError("operator entanglement of the zero operator is undefined")
    # rows (c, a): site-1 legs; columns (d, b): site-2 legs
    r = spacetime_dual(m / norm)
    rho = r @ r.conj().T
    p = float(np.real(np.vdot(rho, rho)))
    b1 = q * q * p
    e = (q * q - b1) / (q * q)
    return GateCharacterization(
        dual_defect=unitarity_defect(spacetime_dual(m * (q / norm))),
        op_entanglement=e,
        b1=b1,
        q=q,
    )
