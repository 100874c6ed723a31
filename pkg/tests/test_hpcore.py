import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import replica_purity
from hpdecode.brickwork import CircuitSpec, Floquet, RandomGates, build_evolution
from hpdecode.errors import InvalidInputError
from hpdecode.hpcore import (
    DecodingSeries,
    HPPartition,
    b_quantity,
    choi_purity,
    decoding_error,
    decoding_series,
    delta_from_otoc,
    mutual_information,
    otoc_average,
    saturation_window,
)
from hpdecode.qgates import haar_gate, identity_gate, random_dressing, xxz_gate

DU_GATE = xxz_gate(np.pi / 4, -0.3 * np.pi / 4, dressing=random_dressing(2, 1234))


def test_partition_sizes_and_validation():
    p = HPPartition(10, 2, 3, 3)
    assert (p.L_B, p.L_C, p.d_A, p.d_D, p.d_C) == (8, 7, 9, 27, 3**7)
    for bad in [(10, 0, 1), (10, 3, 2), (10, 6, 6), (4, 1, 5)]:
        with pytest.raises(InvalidInputError):
            HPPartition(*bad)


def test_partition_mismatch_rejected():
    spec = CircuitSpec(6, 2, "open", RandomGates(0))
    with pytest.raises(InvalidInputError):
        decoding_error(spec, HPPartition(8, 1, 1), 1)


@pytest.mark.parametrize("L,L_A,L_D", [(6, 1, 1), (6, 1, 3), (8, 2, 3), (7, 1, 2)])
def test_identity_purity(L, L_A, L_D):
    spec = CircuitSpec(L, 2, "open", Floquet(identity_gate()))
    p = HPPartition(L, L_A, L_D)
    u = build_evolution(spec, 3)
    assert abs(choi_purity(u, p) - 2.0 ** (-(p.L_C - L_A))) < 1e-14
    assert abs(decoding_error(spec, p, 3) - (4**L_A - 1)) < 1e-12


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 9), st.sampled_from([(1, 1), (1, 2), (2, 2), (1, 3), (2, 4)]))
def test_purity_matches_replica_oracle(seed, t, sizes):
    L = 6
    spec = CircuitSpec(L, 2, "open", RandomGates(seed))
    p = HPPartition(L, *sizes)
    u = build_evolution(spec, t)
    assert abs(choi_purity(u, p) - replica_purity(u.u, L, *sizes, 2)) < 1e-10


def test_purity_matches_oracle_qutrit_periodic():
    spec = CircuitSpec(4, 3, "periodic", RandomGates(3))
    p = HPPartition(4, 1, 2, 3)
    u = build_evolution(spec, 5)
    assert abs(choi_purity(u, p) - replica_purity(u.u, 4, 1, 2, 3)) < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 20))
def test_delta_within_bounds(seed, t):
    spec = CircuitSpec(8, 2, "open", RandomGates(seed))
    for s in decoding_series(spec, [HPPartition(8, 1, 1), HPPartition(8, 2, 3)], [t]):
        s.check()


def test_series_matches_pointwise():
    spec = CircuitSpec(6, 2, "open", RandomGates(9))
    p = HPPartition(6, 1, 2)
    s = decoding_series(spec, p, [5, 1, 3])[0]
    assert s.t.tolist() == [1, 3, 5]
    assert s.seed == 9 and s.method == "exact" and s.parity == "even"
    for t, d in zip(s.t, s.delta):
        assert abs(d - decoding_error(spec, p, int(t))) < 1e-13
    np.testing.assert_allclose(s.big_delta, (s.delta + 1) / 4)


def test_series_check_flags_out_of_range():
    s = DecodingSeries("exact", {}, HPPartition(4, 1, 1), [0, 1], [0.5, -0.1])
    with pytest.raises(AssertionError):
        s.check()


def test_saturation_window():
    w = list(saturation_window(12))
    assert w[0] == 60 and w[-1] == 120 and len(w) == 31


def test_du_dip_at_light_cone_time():
    L = 8
    spec = CircuitSpec(L, 2, "open", Floquet(DU_GATE))
    s = decoding_series(spec, HPPartition(L, 1, 1), range(L + 2))[0]
    # information sits in A's light ray until it reaches D
    assert np.all(np.abs(s.delta[: L - 1] - 3) < 1e-9)
    assert s.delta[L - 1] < 1e-9 and s.delta[L] < 1e-9
    assert s.delta[L + 1] > 0.1


def test_du_dip_shifts_with_parity():
    L = 8
    spec = CircuitSpec(L, 2, "open", Floquet(DU_GATE), parity="odd")
    s = decoding_series(spec, HPPartition(L, 1, 1), [L - 1, L, L + 1])[0]
    assert s.delta[0] > 1 and s.delta[1] < 1e-9 and s.delta[2] < 1e-9


def test_du_dip_with_edge_gates():
    from hpdecode.brickwork import FloquetWithEdges
    from hpdecode.qgates import haar_unitary

    rng = np.random.default_rng(5)
    L = 8
    spec = CircuitSpec(L, 2, "open", FloquetWithEdges(DU_GATE, (haar_unitary(2, rng), haar_unitary(2, rng))))
    assert decoding_error(spec, HPPartition(L, 1, 1), L - 1) < 1e-9


def test_du_purity_is_minimal_at_dip():
    L = 8
    p = HPPartition(L, 1, 1)
    u = build_evolution(CircuitSpec(L, 2, "open", Floquet(DU_GATE)), L - 1)
    assert abs(choi_purity(u, p) - 2.0 ** (-(p.L_A + p.L_C))) < 1e-12


def test_b_quantity():
    for L in (4, 6, 8):
        assert abs(b_quantity(DU_GATE, L) - 1) < 1e-9
    assert abs(b_quantity(identity_gate(), 6) - 4) < 1e-12
    g = xxz_gate(np.pi / 5, -0.3 * np.pi / 5)
    bs = [b_quantity(g, L) for L in (2, 4, 6, 8, 10)]
    assert all(b2 > b1 for b1, b2 in zip(bs, bs[1:]))
    assert bs[-1] < 4


def test_b_quantity_two_sites_is_gate_purity():
    # at L = 2 the transport time is 1 and B_1 = q^2 (1 - E) = b1 of the gate
    from hpdecode.qgates import operator_entanglement

    g = haar_gate(2, 17)
    assert abs(b_quantity(g, 2) - operator_entanglement(g.m).b1) < 1e-12


def test_otoc_t0_disjoint():
    spec = CircuitSpec(6, 2, "open", RandomGates(0))
    assert abs(otoc_average(spec, HPPartition(6, 1, 1), 0) - 1) < 1e-14
    assert abs(otoc_average(spec, HPPartition(6, 1, 2), 0, which="all") - 1) < 1e-14
    with pytest.raises(InvalidInputError):
        otoc_average(spec, HPPartition(6, 1, 1), 0, which="some")


@pytest.mark.parametrize("seed,t,sizes", [(1, 3, (1, 1)), (2, 7, (1, 2)), (3, 12, (2, 2)), (4, 5, (1, 3))])
def test_scrambling_identity(seed, t, sizes):
    L = 6
    spec = CircuitSpec(L, 2, "open", RandomGates(seed))
    p = HPPartition(L, *sizes)
    f = otoc_average(spec, p, t)
    assert abs(decoding_error(spec, p, t) - delta_from_otoc(p, f)) < 1e-9
    big = otoc_average(spec, p, t, which="all")
    assert abs(p.d_A**2 * big - 1 - decoding_error(spec, p, t)) < 1e-9


def test_scrambling_identity_qutrit():
    spec = CircuitSpec(4, 3, "open", RandomGates(8))
    p = HPPartition(4, 1, 1, 3)
    f = otoc_average(spec, p, 5)
    assert abs(decoding_error(spec, p, 5) - delta_from_otoc(p, f)) < 1e-9


def test_scrambled_sample_below_bound():
    L = 8
    spec = CircuitSpec(L, 2, "open", RandomGates(21))
    p = HPPartition(L, 1, 2)
    big = otoc_average(spec, p, 40, which="all")
    assert p.d_A**2 * big - 1 <= p.d_A**2 / p.d_D**2 + 0.05


def test_mutual_information_limits():
    L = 6
    spec = CircuitSpec(L, 2, "open", Floquet(identity_gate()))
    p = HPPartition(L, 2, 2)
    u = build_evolution(spec, 2)
    assert abs(mutual_information(u, p) - 2 * 2 * np.log(2)) < 1e-10
    assert abs(mutual_information(u, p, base="q") - 4) < 1e-10
    assert abs(mutual_information(u, p, base=2) - 4) < 1e-10
    du = build_evolution(CircuitSpec(8, 2, "open", Floquet(DU_GATE)), 7)
    assert abs(mutual_information(du, HPPartition(8, 1, 1))) < 1e-9


def test_capacity_decreases_with_L_D():
    L = 8
    spec = CircuitSpec(L, 2, "open", Floquet(xxz_gate(np.pi / 5, -0.3 * np.pi / 5, dressing=random_dressing(2, 1))))
    ss = decoding_series(spec, [HPPartition(L, 1, d) for d in (1, 2, 3, 4)], saturation_window(L))
    means = [s.delta.mean() for s in ss]
    assert all(b < a for a, b in zip(means, means[1:]))
