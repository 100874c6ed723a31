"""Brickwork circuits and their dense evolution operators.

Layers are numbered from 1. With ``parity="even"`` (the default) odd layers act
on bonds (0,1), (2,3), ... and even layers on (1,2), (3,4), ...; periodic
boundaries add the bond (L-1, 0) to whichever layer starts at site 1.
``parity="odd"`` swaps the two layer types. Under open boundaries the sites left
uncovered by a layer are idle unless edge gates are configured.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import CapacityError, InvalidInputError
from .qgates import UNITARITY_TOL, Gate, haar_gate, unitarity_defect

MAX_EXACT_DIM = 2**16


@dataclass(frozen=True, eq=False)
class Floquet:
    gate: Gate


@dataclass(frozen=True)
class RandomGates:
    """Independent Haar gate per (layer, bond), seeded from ``(seed, layer, bond)``."""

    seed: int


@dataclass(frozen=True, eq=False)
class FloquetWithEdges:
    """Floquet bulk plus one-site gates on the idle edge sites of the second layer type."""

    gate: Gate
    edge_gates: tuple = field(repr=False)

    def __post_init__(self):
        if len(self.edge_gates) != 2:
            raise InvalidInputError("edge_gates must be a (left, right) pair")
        q = self.gate.q
        mats = []
        for e in self.edge_gates:
            e = np.asarray(e, dtype=complex)
            if e.shape != (q, q) or unitarity_defect(e) > UNITARITY_TOL:
                raise InvalidInputError("edge gates must be q x q unitaries")
            mats.append(e)
        object.__setattr__(self, "edge_gates", tuple(mats))


Assignment = Union[Floquet, RandomGates, FloquetWithEdges]


@dataclass(frozen=True, eq=False)
class CircuitSpec:
    L: int
    q: int = 2
    bc: str = "open"
    assignment: Assignment = None
    parity: str = "even"

    def __post_init__(self):
        if self.L < 2:
            raise InvalidInputError("need at least two sites")
        if self.q < 2:
            raise InvalidInputError("qudit dimension must be >= 2")
        if self.bc not in ("open", "periodic"):
            raise InvalidInputError(f"unknown boundary condition {self.bc!r}")
        if self.bc == "periodic" and self.L % 2:
            raise InvalidInputError("periodic boundaries require even L")
        if self.parity not in ("even", "odd"):
            raise InvalidInputError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.assignment is None:
            raise InvalidInputError("a gate assignment is required")
        if isinstance(self.assignment, (Floquet, FloquetWithEdges)) and self.assignment.gate.q != self.q:
            raise InvalidInputError("gate dimension does not match q")
        if isinstance(self.assignment, FloquetWithEdges) and self.bc != "open":
            raise InvalidInputError("edge gates only make sense with open boundaries")

    @property
    def dim(self) -> int:
        return self.q**self.L

    def check_capacity(self):
        if self.dim > MAX_EXACT_DIM:
            raise CapacityError(f"q^L = {self.dim} exceeds the exact-mode limit {MAX_EXACT_DIM}")

    def layer_start(self, layer: int) -> int:
        """First site of the first bond in ``layer`` (0 or 1)."""
        first = 0 if self.parity == "even" else 1
        return first if layer % 2 == 1 else 1 - first

    def bonds(self, layer: int) -> list[tuple[int, int]]:
        s = self.layer_start(layer)
        out = [(i, i + 1) for i in range(s, self.L - 1, 2)]
        if self.bc == "periodic" and s == 1:
            out.append((self.L - 1, 0))
        return out

    def gate(self, layer: int, bond: int) -> np.ndarray:
        a = self.assignment
        if isinstance(a, RandomGates):
            ss = np.random.SeedSequence(entropy=a.seed, spawn_key=(layer, bond))
            return haar_gate(self.q, np.random.default_rng(ss)).m
        return a.gate.m

    def edge_ops(self, layer: int) -> list[tuple[int, np.ndarray]]:
        if not isinstance(self.assignment, FloquetWithEdges) or self.layer_start(layer) == 0:
            return []
        covered = {s for b in self.bonds(layer) for s in b}
        left, right = self.assignment.edge_gates
        ops = []
        if 0 not in covered:
            ops.append((0, left))
        if self.L - 1 not in covered:
            ops.append((self.L - 1, right))
        return ops

    def describe(self) -> dict:
        a = self.assignment
        kind = {Floquet: "floquet", RandomGates: "random", FloquetWithEdges: "floquet_edges"}[type(a)]
        d = {"L": self.L, "q": self.q, "bc": self.bc, "parity": self.parity, "assignment": kind}
        if isinstance(a, RandomGates):
            d["seed"] = a.seed
        return d


def _apply_rows(x: np.ndarray, g: np.ndarray, i: int, j: int, L: int, q: int) -> np.ndarray:
    """Left-multiply ``x`` (rows indexed by L sites) by gate ``g`` on sites (i, j)."""
    ncol = x.shape[1]
    if j == i + 1:
        a = q**i
        y = np.matmul(g, x.reshape(a, q * q, (q ** (L - i - 2)) * ncol))
        return y.reshape(q**L, ncol)
    if (i, j) == (L - 1, 0):
        x4 = x.reshape(q, q ** (L - 2), q, ncol)
        g4 = g.reshape(q, q, q, q)  # [c, d, a, b]: a on site L-1, b on site 0
        y = np.einsum("cdab,bman->dmcn", g4, x4, optimize=True)
        return np.ascontiguousarray(y).reshape(q**L, ncol)
    raise InvalidInputError(f"unsupported bond ({i}, {j})")


def _apply_site_rows(x: np.ndarray, u: np.ndarray, i: int, L: int, q: int) -> np.ndarray:
    ncol = x.shape[1]
    y = np.matmul(u, x.reshape(q**i, q, (q ** (L - i - 1)) * ncol))
    return y.reshape(q**L, ncol)


def apply_layer(x: np.ndarray, spec: CircuitSpec, layer: int) -> np.ndarray:
    """Return ``W_layer @ x`` for a matrix whose rows live on the chain."""
    L, q = spec.L, spec.q
    for k, (i, j) in enumerate(spec.bonds(layer)):
        x = _apply_rows(x, spec.gate(layer, k), i, j, L, q)
    for i, u in spec.edge_ops(layer):
        x = _apply_site_rows(x, u, i, L, q)
    return x


def layer_matrix(spec: CircuitSpec, layer: int) -> np.ndarray:
    spec.check_capacity()
    return apply_layer(np.eye(spec.dim, dtype=complex), spec, layer)


@dataclass(frozen=True, eq=False)
class EvolutionOperator:
    u: np.ndarray = field(repr=False)
    spec: CircuitSpec
    t: int

    def unitarity_defect(self) -> float:
        return unitarity_defect(self.u)


def iter_evolution(spec: CircuitSpec, t_max: int, start: np.ndarray | None = None) -> Iterator[EvolutionOperator]:
    """Yield the evolution operator after 0, 1, ..., t_max layers.

    Arrays are never mutated in place, so yielded operators stay valid.
    """
    spec.check_capacity()
    if t_max < 0:
        raise InvalidInputError("t must be >= 0")
    u = np.eye(spec.dim, dtype=complex) if start is None else start
    yield EvolutionOperator(u, spec, 0)
    for layer in range(1, t_max + 1):
        u = apply_layer(u, spec, layer)
        yield EvolutionOperator(u, spec, layer)


def build_evolution(spec: CircuitSpec, t: int) -> EvolutionOperator:
    """Product of ``t`` brickwork layers, layer 1 applied first."""
    if t < 0:
        raise InvalidInputError("t must be >= 0")
    *_, last = iter_evolution(spec, t)
    return last


def embed_operator(op: np.ndarray, support: Sequence[int], L: int, q: int) -> np.ndarray:
    """Embed an operator acting on ``support`` (in the given order) into the full chain."""
    support = list(support)
    k = len(support)
    if len(set(support)) != k or any(s < 0 or s >= L for s in support):
        raise InvalidInputError(f"support {support} not within [0, {L})")
    op = np.asarray(op, dtype=complex)
    if op.shape != (q**k, q**k):
        raise InvalidInputError("operator shape does not match its support")
    rest = [s for s in range(L) if s not in support]
    full = np.kron(op, np.eye(q ** (L - k)))
    order = support + rest
    perm = np.argsort(order)
    t = full.reshape((q,) * (2 * L))
    t = t.transpose(list(perm) + [L + p for p in perm])
    return np.ascontiguousarray(t).reshape(q**L, q**L)


def heisenberg_evolve(op: np.ndarray, support: Sequence[int], spec: CircuitSpec, t: int) -> np.ndarray:
    """U^dagger (op x 1) U with U the t-layer evolution."""
    u = build_evolution(spec, t).u
    full = embed_operator(op, support, spec.L, spec.q)
    return u.conj().T @ full @ u
