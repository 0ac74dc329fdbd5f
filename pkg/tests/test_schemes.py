import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from twoway.ld_core import LDNetwork
from twoway.rate_region import region_ld_ic_sym, region_ld_z
from twoway.schemes import (
    IC_GRID, TableEncoder, TimeShareConfig, ZTimeShareConfig, ic_level_table, ic_network,
    macbc_capacity, macbc_network, macbc_region_of, msg_ends, plan_macbc, plan_z_point,
    routing_network, run_ic_symmetric, run_macbc_timeshare, run_routing_demo, run_z_timeshare,
    simulate, z_network, z_one_shot,
)
from twoway.sym_curves import SymLDParams, csym_oneway_ic


def check_run(run, region=None):
    assert run.passed, run.decoded
    assert run.decoded == run.payloads
    assert all(r >= 0 for r in run.achieved_rates.values())
    if region is not None:
        pt = {"R" + m[1:]: r for m, r in run.achieved_rates.items()}
        assert region.contains(pt)


def test_msg_ends():
    assert msg_ends("M43") == (4, 3)
    with pytest.raises(ValueError):
        msg_ends("X12")


# -- MAC/BC ------------------------------------------------------------------

def test_macbc_half_shares_symmetric():
    net = macbc_network(2, 2, 2, 2)
    cfg = TimeShareConfig(F(1, 2), F(1, 2))
    assert cfg.blocklength == 2
    run = run_macbc_timeshare(net, cfg, {"M12": 2, "M32": 2, "M21": 2, "M23": 2})
    check_run(run, macbc_region_of(net))
    assert run.blocklength == 2
    assert run.achieved_rates == {"M12": 1, "M32": 1, "M21": 1, "M23": 1}
    assert run.non_adaptive


def test_macbc_single_user_corner():
    net = macbc_network(3, 2, 1, 1)
    cfg = TimeShareConfig(1, 0)
    assert macbc_capacity(net, cfg)["M12"] == 3 and macbc_capacity(net, cfg)["M32"] == 0
    run = run_macbc_timeshare(net, cfg, {"M12": 3, "M23": 1})
    check_run(run, macbc_region_of(net))


def test_mod2_scalar_sums():
    net = macbc_network(1, 1, 1, 1)
    run = run_macbc_timeshare(net, TimeShareConfig(F(1, 2), F(1, 2)),
                              {"M12": 1, "M32": 1, "M21": 1, "M23": 1})
    check_run(run)
    r = run.achieved_rates
    assert r["M12"] + r["M32"] == 1 and r["M21"] + r["M23"] == 1


def test_macbc_self_interference_is_cancelled():
    net = macbc_network(2, 1, 2, 2, self_gains=(2, 2, 2))
    cfg = plan_macbc(net, {"R12": 2, "R21": 1, "R23": 1})
    run = run_macbc_timeshare(net, cfg, {"M12": 2 * cfg.blocklength,
                                         "M21": cfg.blocklength, "M23": cfg.blocklength})
    check_run(run, macbc_region_of(net))


def test_macbc_rejects_outside_region():
    net = macbc_network(2, 2, 2, 2)
    with pytest.raises(ValueError, match="outside"):
        run_macbc_timeshare(net, TimeShareConfig(F(1, 2), F(1, 2)), {"M12": 3, "M32": 2})
    with pytest.raises(ValueError):
        plan_macbc(net, {"R12": 2, "R32": 1})


def test_macbc_config_validation():
    with pytest.raises(ValueError):
        TimeShareConfig(F(3, 2), 0)
    net = macbc_network(2, 2, 2, 2)
    with pytest.raises(ValueError):
        run_macbc_timeshare(net, TimeShareConfig(F(1, 2), 0), {"M12": 1}, blocklength=3)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=4, max_size=4), st.data())
def test_macbc_hits_random_vertex(g, data):
    net = macbc_network(*g, self_gains=(1, 1, 1))
    verts = macbc_region_of(net).vertices()
    v = data.draw(st.sampled_from(verts))
    target = v.as_dict()
    cfg = plan_macbc(net, target)
    L = cfg.blocklength
    sizes = {"M" + c[1:]: int(r * L) for c, r in target.items()}
    run = run_macbc_timeshare(net, cfg, sizes)
    check_run(run, macbc_region_of(net))
    assert {"R" + m[1:]: r for m, r in run.achieved_rates.items()} == target


# -- Z -----------------------------------------------------------------------

def test_z_unit_gains_thirds():
    net = z_network(1, 1, 1, 1, 1, 1)
    cfg = ZTimeShareConfig(
        ((F(1, 3), (1, 0, 0)), (F(1, 3), (0, 1, 0)), (F(1, 3), (0, 0, 1))),
        ((F(1, 3), (1, 0, 0)), (F(1, 3), (0, 1, 0)), (F(1, 3), (0, 0, 1))))
    assert cfg.blocklength == 3
    run = run_z_timeshare(net, cfg, {m: 1 for m in ("M12", "M32", "M34", "M21", "M23", "M43")})
    check_run(run, region_ld_z(1, 1, 1, 1, 1, 1))
    r = run.achieved_rates
    assert r["M12"] + r["M32"] + r["M34"] == 1
    assert r["M21"] + r["M23"] + r["M43"] == 1


def test_z_degenerate_end_link():
    net = z_network(2, 1, 0, 0, 1, 2)
    region = region_ld_z(2, 1, 0, 0, 1, 2)
    for v in region.vertices():
        target = v.as_dict()
        run = run_z_timeshare(net, plan_z_point(net, target),
                              {"M" + c[1:]: int(r) for c, r in target.items()})
        check_run(run, region)


def test_z_vertex_two_zero_two():
    region = region_ld_z(2, 1, 3, 0, 0, 0)
    verts = {v.values for v in region.vertices()}
    assert (2, 0, 2, 0, 0, 0) in verts
    net = z_network(2, 1, 3, 0, 0, 0)
    target = {"R12": 2, "R34": 2}
    run = run_z_timeshare(net, plan_z_point(net, target), {"M12": 2, "M34": 2})
    check_run(run, region)


def test_z_one_shot_pareto_is_region_vertices():
    net = z_network(2, 1, 3, 1, 2, 2)
    _, pareto = z_one_shot(net, "fwd")
    region = region_ld_z(2, 1, 3, 1, 2, 2).restrict(("R12", "R32", "R34"))
    for counts in pareto:
        assert region.contains(counts)


def test_z_rejects_bad_config():
    net = z_network(1, 1, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        ZTimeShareConfig(((F(1, 2), (1, 0, 0)),), ((1, (1, 0, 0)),))
    with pytest.raises(ValueError, match="outside"):
        run_z_timeshare(net, ZTimeShareConfig(((1, (1, 0, 0)),), ((1, (1, 0, 0)),)),
                        {"M12": 1, "M32": 1})
    with pytest.raises(ValueError, match="integral"):
        plan_z_point(net, {"R12": F(1, 2)})


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=6, max_size=6), st.data())
def test_z_hits_random_vertex(g, data):
    net = z_network(*g, self_gains=(1, 1, 1, 1))
    region = region_ld_z(*g)
    v = data.draw(st.sampled_from(region.vertices()))
    target = v.as_dict()
    run = run_z_timeshare(net, plan_z_point(net, target),
                          {"M" + c[1:]: int(r) for c, r in target.items()})
    check_run(run, region)


# -- symmetric IC ------------------------------------------------------------

@pytest.mark.parametrize("p, q, rate", [(4, 0, 4), (3, 6, 3), (4, 2, 2), (6, 4, 4), (4, 4, 2)])
def test_ic_examples(p, q, rate):
    run = run_ic_symmetric(SymLDParams(p, q))
    check_run(run, region_ld_ic_sym(p, q))
    assert run.notes["per_user_rate"] == rate == run.notes["capacity"]
    assert run.non_adaptive


def test_ic_grid_with_self_interference():
    for a in IC_GRID:
        for p in range(1, 7):
            q = a * p
            if q.denominator != 1:
                continue
            run = run_ic_symmetric(SymLDParams(p, int(q)), self_gain=p)
            check_run(run, region_ld_ic_sym(p, int(q)))
            assert run.notes["per_user_rate"] == csym_oneway_ic(a) * p


def test_ic_level_table_shapes():
    L, rows_a, rows_b = ic_level_table(4, 6)
    assert L == 2 and len(rows_a) == len(rows_b) == 2
    assert all(len(r) == 6 for r in rows_a + rows_b)
    with pytest.raises(ValueError, match="no level table"):
        ic_level_table(5, 2)


def test_ic_rejects_target_above_capacity():
    with pytest.raises(ValueError):
        run_ic_symmetric(SymLDParams(4, 2), target=F(5, 2))


# -- routing demo ------------------------------------------------------------

def test_routing_topology():
    net = routing_network(1)
    assert net.gain(1, 2) == 0 and net.gain(3, 4) == 0
    assert net.gain(1, 4) == net.gain(4, 3) == net.gain(3, 2) == 1


def test_routing_demo_rate():
    run = run_routing_demo()
    check_run(run)
    assert run.achieved_rates["M12"] == F(1, 3)
    assert not run.non_adaptive
    assert run.notes["nonadaptive_rate_bound"] == 0
    assert run.notes["nonadaptive_positive_rate_possible"] is False


def test_routing_demo_longer_block_and_mirror():
    run = run_routing_demo(k=2, blocklength=6)
    check_run(run)
    assert run.achieved_rates["M12"] == F(2 * 4, 6)
    mirror = run_routing_demo(mirrored=True)
    check_run(mirror)
    assert mirror.achieved_rates["M34"] == F(1, 3)
    with pytest.raises(ValueError):
        run_routing_demo(blocklength=2)


# -- engine ------------------------------------------------------------------

def test_transcript_jsonl():
    run = run_macbc_timeshare(macbc_network(1, 1, 1, 1), TimeShareConfig(F(1, 2), F(1, 2)),
                              {"M12": 1, "M32": 1, "M21": 1, "M23": 1})
    lines = run.transcript_jsonl().splitlines()
    recs = [json.loads(x) for x in lines]
    assert len(recs) == run.blocklength * len(run.network.nodes)
    assert {"t", "node"} <= set(recs[0])


def test_same_seed_same_transcript():
    args = (macbc_network(2, 1, 2, 1), TimeShareConfig(F(1, 2), F(1, 2)), {"M12": 3, "M21": 3})
    a = run_macbc_timeshare(*args, seed=5)
    b = run_macbc_timeshare(*args, seed=5)
    assert a.transcript_jsonl() == b.transcript_jsonl()


def test_simulate_flags_decode_failure():
    # two users on the same single level: receiver 2 cannot separate them
    net = LDNetwork({(1, 2): 1, (3, 2): 1})
    table = {1: [[("M12", 0)]], 3: [[("M32", 0)]], 2: [[None]]}
    run = simulate(net, TableEncoder(table, {}), {"M12": 1, "M32": 1}, 1)
    assert not run.passed and run.status == "FAILED"
