import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twoway.ld_core import (
    GF2Vector, LDNetwork, ModKChannel, TableLaw, adder_mac_law, cancel_self_interference,
    channel_output, check_class_conditions, iter_vectors, ld_law, modk_law, modk_output,
    multiplier_ic_law, multiplier_macbc_law, shift_apply,
)


def shift_matrix(N):
    """Explicit lower shift matrix: S[i+1, i] = 1."""
    S = np.zeros((N, N), dtype=np.int64)
    for i in range(N - 1):
        S[i + 1, i] = 1
    return S


def matrix_shift(x, n, N):
    M = np.linalg.matrix_power(shift_matrix(N), N - n) if N else np.zeros((0, 0), int)
    return tuple(int(v) for v in (M @ np.asarray(x, dtype=np.int64)) % 2)


def matrix_output(gains, inputs, k, N):
    y = np.zeros(N, dtype=np.int64)
    for (j, kk), n in gains.items():
        if kk == k:
            y = (y + np.asarray(matrix_shift(inputs[j], n, N))) % 2
    return tuple(int(v) for v in y)


# -- GF2Vector ---------------------------------------------------------------

def test_vector_rejects_non_binary():
    with pytest.raises(ValueError):
        GF2Vector((0, 2, 1))


def test_vector_xor_self_is_zero():
    v = GF2Vector((1, 0, 1, 1))
    assert (v + v).is_zero()
    assert str(v) == "1011"


def test_vector_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        GF2Vector((1, 0)) + GF2Vector((1,))


# -- shift_apply ---------------------------------------------------------------

@pytest.mark.parametrize("x, n, N, expected", [
    ((1, 0, 1), 3, 3, (1, 0, 1)),
    ((1, 0, 1), 0, 3, (0, 0, 0)),
    ((1, 1, 0), 2, 3, (0, 1, 1)),
])
def test_shift_examples(x, n, N, expected):
    assert shift_apply(x, n, N).bits == expected
    assert matrix_shift(x, n, N) == expected


def test_shift_matches_matrix_exhaustively():
    for N in range(1, 7):
        for x in itertools.product((0, 1), repeat=N):
            for n in range(N + 1):
                assert shift_apply(x, n, N).bits == matrix_shift(x, n, N)


def test_shift_composition_matches_matrix_power():
    for N in range(1, 7):
        S = shift_matrix(N)
        for x in itertools.product((0, 1), repeat=N):
            for n in range(N + 1):
                for m in range(N + 1):
                    twice = shift_apply(shift_apply(x, n, N), m, N).bits
                    M = np.linalg.matrix_power(S, 2 * N - n - m)
                    assert twice == tuple(int(v) for v in (M @ np.array(x)) % 2)


def test_shift_dimension_errors():
    with pytest.raises(ValueError, match="length 2, expected N=3"):
        shift_apply((1, 0), 1, 3)
    with pytest.raises(ValueError):
        shift_apply((1, 0, 0), 4, 3)


# -- channel_output ----------------------------------------------------------

def test_single_link_output():
    net = LDNetwork({(1, 2): 2, (9, 9): 3})
    assert channel_output(net, {1: (1, 0, 0), 9: (0, 0, 0)}, 2).bits == (0, 1, 0)


def test_equal_links_cancel():
    net = LDNetwork({(1, 2): 2, (3, 2): 2})
    assert channel_output(net, {1: (1, 1), 3: (1, 1)}, 2).is_zero()


def test_macbc_example_against_matrix():
    gains = {(1, 2): 2, (3, 2): 1}
    net = LDNetwork(gains)
    inputs = {1: (1, 1), 3: (0, 1)}
    got = channel_output(net, inputs, 2).bits
    assert got == matrix_output(gains, inputs, 2, 2) == (1, 1)


def test_missing_input_rejected():
    net = LDNetwork({(1, 2): 1, (3, 2): 1})
    with pytest.raises(KeyError):
        channel_output(net, {1: (1,)}, 2)


def test_zero_gain_link_is_explicit_but_silent():
    net = LDNetwork({(1, 2): 0, (3, 2): 2})
    assert net.gain(1, 2) == 0 and net.gain(2, 1) is None
    assert channel_output(net, {1: (1, 1), 3: (0, 0)}, 2).is_zero()


def test_network_json_roundtrip_and_n_check():
    net = LDNetwork({(1, 2): 3, (2, 1): 1, (2, 2): 2})
    doc = net.to_json()
    assert doc == {"N": 3, "gains": {"1,2": 3, "2,1": 1, "2,2": 2}}
    assert LDNetwork.from_json(doc).gains == net.gains
    with pytest.raises(ValueError):
        LDNetwork.from_json({"N": 5, "gains": {"1,2": 3}})
    with pytest.raises(ValueError):
        LDNetwork({(1, 2): -1})


vec4 = st.tuples(*[st.integers(0, 1)] * 4)


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(1, 4), st.integers(1, 4)), st.integers(0, 4),
                       min_size=1, max_size=10),
       st.lists(vec4, min_size=4, max_size=4), st.lists(vec4, min_size=4, max_size=4))
def test_output_is_linear(gains, a, b):
    gains[(1, 1)] = 4  # pin N = 4
    net = LDNetwork(gains)
    ia = dict(zip((1, 2, 3, 4), a))
    ib = dict(zip((1, 2, 3, 4), b))
    isum = {j: tuple(x ^ y for x, y in zip(ia[j], ib[j])) for j in ia}
    for k in (1, 2, 3, 4):
        lhs = channel_output(net, isum, k)
        rhs = channel_output(net, ia, k) + channel_output(net, ib, k)
        assert lhs == rhs
        assert lhs.bits == matrix_output(net.gains, isum, k, 4)


# -- self interference -------------------------------------------------------

def test_cancel_without_self_link_is_identity():
    net = LDNetwork({(1, 2): 2})
    y = GF2Vector((1, 0))
    assert cancel_self_interference(net, 2, y, (1, 1)) == y


def test_cancel_pure_self_signal():
    net = LDNetwork({(2, 2): 2, (1, 2): 1})
    x2 = (1, 1)
    y = channel_output(net, {1: (0, 0), 2: x2}, 2)
    assert cancel_self_interference(net, 2, y, x2).is_zero()


def test_cancel_z_three_terms():
    gains = {(1, 2): 3, (3, 2): 1, (2, 2): 2}
    net = LDNetwork(gains)
    x = {1: (1, 0, 1), 2: (1, 1, 0), 3: (1, 0, 0)}
    y = channel_output(net, x, 2)
    others = LDNetwork({(1, 2): 3, (3, 2): 1})
    assert cancel_self_interference(net, 2, y, x[2]) == channel_output(others, x, 2)


def test_cancelled_output_independent_of_own_input():
    for N in range(1, 5):
        net = LDNetwork({(1, 2): N, (3, 2): max(0, N - 1), (2, 2): max(0, N - 2)})
        for x1, x3 in itertools.product(iter_vectors(N), repeat=2):
            seen = set()
            for x2 in iter_vectors(N):
                y = channel_output(net, {1: x1, 2: x2, 3: x3}, 2)
                seen.add(cancel_self_interference(net, 2, y, x2))
            assert len(seen) == 1


# -- mod-k -------------------------------------------------------------------

def test_modk_examples():
    assert modk_output(ModKChannel(2, "macbc"), {1: 1, 2: 0, 3: 1}, 2) == 0
    assert modk_output(ModKChannel(5, "z"), {1: 0, 2: 0, 3: 0, 4: 0}, 3) == 0
    ic = ModKChannel(3, "ic")
    x = {1: 2, 3: 2, 2: 0, 4: 0}
    assert modk_output(ic, x, 2) == modk_output(ic, x, 4) == 1


def test_modk_rejects_out_of_range():
    with pytest.raises(ValueError):
        modk_output(ModKChannel(3, "macbc"), {1: 3, 2: 0}, 1)
    with pytest.raises(ValueError):
        ModKChannel(1, "macbc")


# -- truth tables and class conditions --------------------------------------

def test_table_law_rejects_incomplete_table():
    with pytest.raises(ValueError, match="incomplete table"):
        TableLaw({1: 2, 2: 2}, {1: ((1, 2), np.zeros((2, 1), dtype=int))})


def test_table_law_json_roundtrip():
    law = modk_law(3, "z")
    back = TableLaw.from_json(law.to_json())
    assert back.to_json() == law.to_json()


def test_ld_law_agrees_with_vectors():
    net = LDNetwork({(1, 2): 2, (3, 2): 1, (2, 1): 2, (2, 3): 1, (2, 2): 1})
    law = ld_law(net)
    for x1, x2, x3 in itertools.product(range(4), repeat=3):
        vec = {j: tuple((v >> (1 - i)) & 1 for i in range(2)) for j, v in ((1, x1), (2, x2), (3, x3))}
        y = channel_output(net, vec, 2).bits
        assert law.output(2, {1: x1, 2: x2, 3: x3}) == y[0] * 2 + y[1]


@pytest.mark.parametrize("kappa", [2, 3, 4, 5])
@pytest.mark.parametrize("model", ["macbc", "ic"])
def test_modk_satisfies_class_conditions(kappa, model):
    rep = check_class_conditions(modk_law(kappa, model), model)
    assert rep.all_hold, rep.conditions
    assert rep.witnesses["kappa"] == kappa
    if model == "macbc":
        assert rep.witnesses["x1_star"] == rep.witnesses["x3_star"] == 0


def test_mod2_macbc_inverse_tables_recover_inputs():
    law = modk_law(2, "macbc")
    rep = check_class_conditions(law, "macbc")
    g1 = rep.witnesses["inverses"]["G1"]
    for x1, x2 in itertools.product(range(2), repeat=2):
        y1 = law.output(1, {1: x1, 2: x2})
        assert g1[(x1, y1)] == x2


def test_multiplier_fails_invertibility():
    rep = check_class_conditions(multiplier_macbc_law(), "macbc")
    assert rep.conditions["P1"] and not rep.conditions["P2"]
    rep = check_class_conditions(multiplier_ic_law(), "ic")
    assert not rep.conditions["P2IC"]
    assert rep.conditions["common_output"]


def test_ternary_adder_fails_alphabet_restriction():
    rep = check_class_conditions(adder_mac_law(), "macbc")
    assert not rep.conditions["P1"]


def test_class_checker_rejects_large_alphabet_and_unknown_model():
    with pytest.raises(ValueError):
        check_class_conditions(modk_law(9, "macbc"), "macbc")
    with pytest.raises(ValueError):
        check_class_conditions(modk_law(2, "z"), "z")
