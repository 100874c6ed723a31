"""Closed-form predictions for the decoding error."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from .errors import InvalidInputError, PreconditionError
from .hpcore import HPPartition
from .qgates import Gate, operator_entanglement, swap_gate

TAGS = (
    "duc_plateau",
    "scrambled_plateau",
    "perturbed_decay",
    "transmission_length",
    "integrable_du",
    "yoshida_kitaev_bound",
)

COMMUTATION_TOL = 1e-10
DUAL_TOL = 1e-10


@dataclass(frozen=True)
class PredictionResult:
    value: float
    tag: str
    validity: str = ""

    def __post_init__(self):
        if self.tag not in TAGS:
            raise InvalidInputError(f"unknown prediction tag {self.tag!r}")
        if math.isnan(self.value):
            raise InvalidInputError("prediction value is NaN")


def _check_sizes(q, L_A, L_D):
    if q < 2 or L_A < 1 or L_D < L_A:
        raise InvalidInputError(f"need q >= 2 and 1 <= L_A <= L_D, got q={q}, L_A={L_A}, L_D={L_D}")


def duc_plateau(q: int, L_A: int, L_D: int) -> float:
    """Late-time plateau of maximally chaotic dual-unitary circuits, (1 - q^-2L_A) q^-2(L_D - L_A)."""
    _check_sizes(q, L_A, L_D)
    return (1.0 - float(q) ** (-2 * L_A)) * float(q) ** (-2 * (L_D - L_A))


def scrambled_plateau_exact(q: int, L_A: int, L_D: int) -> Fraction:
    """Plateau from averaging operator strings over a fully scrambled evolution.

    Of the d_A^2 d_D^2 string pairs, those with an identity on A or on D commute
    and give 1; all others average to 0. Hence
    Delta_inf = (d_D^2 + d_A^2 - 1) / (d_A^2 d_D^2) and delta = d_A^2 Delta - 1.
    """
    _check_sizes(q, L_A, L_D)
    da2, dd2 = q ** (2 * L_A), q ** (2 * L_D)
    big_delta = Fraction(dd2 + da2 - 1, da2 * dd2)
    return da2 * big_delta - 1


def scrambled_plateau_from_strings(q: int, L_A: int, L_D: int) -> float:
    return float(scrambled_plateau_exact(q, L_A, L_D))


def yoshida_kitaev_bound(p: HPPartition) -> float:
    """Upper bound d_A^2 / d_D^2 on the decoding error of a scrambling evolution."""
    return float(Fraction(p.d_A**2, p.d_D**2))


# --- perturbed dual-unitary circuits -----------------------------------------


def incomplete_beta(a: float, b: float, z: float, method: str = "special") -> float:
    """B_z(a, b) = int_0^z t^(a-1) (1-t)^(b-1) dt (not regularized)."""
    if not 0.0 <= z <= 1.0:
        raise InvalidInputError(f"z must lie in [0, 1], got {z}")
    if a <= 0 or b <= 0:
        raise InvalidInputError("beta parameters must be positive")
    if z == 0.0:
        return 0.0
    if method == "special":
        return float(special.betainc(a, b, z) * special.beta(a, b))
    if method == "quad":
        val, _ = integrate.quad(lambda t: t ** (a - 1) * (1 - t) ** (b - 1), 0.0, z, epsabs=1e-14, epsrel=1e-13, limit=200)
        return float(val)
    raise InvalidInputError(f"unknown method {method!r}")


def f_beta(z: float, x: int, y: int, method: str = "special") -> float:
    """F_z(x, y) = x binom(y, x) B_z(x, y - x + 1)."""
    if not 1 <= x <= y:
        raise InvalidInputError(f"need 1 <= x <= y, got x={x}, y={y}")
    return x * math.comb(y, x) * incomplete_beta(x, y - x + 1, z, method)


def f_alternating_exact(z, n: int, m: int) -> Fraction:
    """F_z(n, m) = (-1)^n sum_{nu=n}^{m} binom(m, nu) binom(nu-1, n-1) (-z)^nu, in exact arithmetic.

    ``z`` is converted to a Fraction (floats convert exactly), so the
    alternating sum carries no cancellation error.
    """
    if not 1 <= n <= m:
        raise InvalidInputError(f"need 1 <= n <= m, got n={n}, m={m}")
    z = Fraction(z)
    total = sum(math.comb(m, nu) * math.comb(nu - 1, n - 1) * (-z) ** nu for nu in range(n, m + 1))
    return (-1) ** n * total


def f_alternating(z: float, n: int, m: int) -> float:
    return float(f_alternating_exact(z, n, m))


def perturbed_decay(q: int, n: int, L: int, z1: float) -> float:
    """Leading large-q correction delta(t) - delta_inf = q^2 F_{z1}(n, L - n), n = (t - L + 2) / 2."""
    if not 0.0 <= z1 <= 1.0:
        raise InvalidInputError(f"z1 must lie in [0, 1], got {z1}")
    if not 1 <= n <= L - n:
        raise InvalidInputError(f"need 1 <= n <= L - n, got n={n}, L={L}")
    return q * q * f_beta(z1, n, L - n)


def decay_index(t: int, L: int) -> int:
    """n = (t - L + 2) / 2 for even t - L."""
    if (t - L) % 2:
        raise InvalidInputError("t - L must be even")
    return (t - L + 2) // 2


# --- light-cone transmission ------------------------------------------------


def transmission_length_from_z1(z1: float) -> float:
    if not 0.0 <= z1 < 1.0:
        raise InvalidInputError(f"z1 must lie in [0, 1), got {z1}")
    ratio = 1.0 - z1
    if 1.0 - ratio <= 1e-12:
        return math.inf
    return -1.0 / math.log(ratio)


def transmission_length(g) -> float:
    """l with 1/l = -log(q^2 E / (q^2 - 1)); infinite for maximal operator entanglement."""
    ch = operator_entanglement(g.m if isinstance(g, Gate) else g)
    if ch.op_entanglement <= 1e-14:
        raise InvalidInputError("transmission length undefined for gates without operator entanglement")
    return transmission_length_from_z1(max(ch.z1, 0.0))


# --- integrable dual-unitary circuits ---------------------------------------


def scattering_part(g: Gate) -> np.ndarray:
    return g.m @ swap_gate(g.q).m


def scattering_commutator_defect(g: Gate) -> float:
    """max |V12 V23 - V23 V12| on three sites, with V = g SWAP."""
    v = scattering_part(g)
    eye = np.eye(g.q)
    v12 = np.kron(v, eye)
    v23 = np.kron(eye, v)
    return float(np.max(np.abs(v12 @ v23 - v23 @ v12)))


def revival_index(t: int, L: int, parity: str = "even") -> tuple[int, bool]:
    """(k, at_revival) for the piecewise integrable prediction.

    Revivals sit at t = (2k+1)L - 1 and (2k+1)L for the default layer parity,
    one layer later for ``parity="odd"``; revival times take the revival branch.
    """
    s = 0 if parity == "even" else 1
    tt = t - s
    k = int(math.floor((tt / L + 1) / 2))
    at = tt >= L - 1 and (tt % (2 * L)) in (L - 1, L)
    return k, at


def integrable_du_delta(g: Gate, t: int, L: int, parity: str = "even") -> float:
    """Piecewise-constant decoding error of an integrable dual-unitary circuit, L_A = L_D = 1, open chain.

    0 at revival times, otherwise q^2 (E_max - E(V^{2k})) with V = g SWAP.
    """
    if t < 0 or L < 2:
        raise InvalidInputError("need t >= 0 and L >= 2")
    defect = scattering_commutator_defect(g)
    if defect > COMMUTATION_TOL:
        raise PreconditionError(f"scattering part does not commute on overlapping bonds (defect {defect:.3e})")
    from .qgates import dual_unitarity_defect

    du = dual_unitarity_defect(g)
    if du > DUAL_TOL:
        raise PreconditionError(f"gate is not dual-unitary (defect {du:.3e})")
    k, at = revival_index(t, L, parity)
    if at:
        return 0.0
    q = g.q
    vk = np.linalg.matrix_power(scattering_part(g), 2 * k)
    e = operator_entanglement(vk).op_entanglement
    return max(q * q * ((1 - 1 / q**2) - e), 0.0)
