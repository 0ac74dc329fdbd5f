import json

import pytest

from twoway.cli import main
from twoway.ld_core import modk_law


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_region_mod2_vertices(capsys):
    code, out, _ = run(capsys, "region", "mod2-macbc")
    assert code == 0
    assert len(out.splitlines()) == 10


def test_region_files(tmp_path, capsys):
    code, _, _ = run(capsys, "region", "ld-ic-sym", "--gains", "p=2,q=1", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads((tmp_path / "region.json").read_text())
    assert len(doc["ineqs"]) == 14
    assert (tmp_path / "vertices.csv").read_text().startswith("R12,R34,R21,R43\n")


def test_region_params_file(tmp_path, capsys):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"n12": 3, "n32": 1, "n21": 2, "n23": 2}))
    code, out, _ = run(capsys, "region", "ld-macbc", "--params", str(p), "--format", "json")
    assert code == 0
    assert {q["label"]: q["b"] for q in json.loads(out)["ineqs"]}["fwd.sum"] == "3/1"


def test_region_kappa3(capsys):
    code, out, _ = run(capsys, "region", "modk", "--kappa", "3", "--topology", "ic",
                       "--format", "json")
    assert code == 0
    assert float(json.loads(out)["ineqs"][0]["b"]) == pytest.approx(1.584962500721156)


def test_invalid_gain_is_validation_error(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, out, err = run(capsys, "region", "ld-macbc", "--gains", "n12=-1,n32=1,n21=2,n23=2",
                         "--out", str(out_dir))
    assert code == 1 and "n12" in err and out == ""
    assert not out_dir.exists()


def test_bad_subcommand_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["region", "bogus"])
    assert exc.value.code == 1


def test_curve_default_grid(capsys):
    code, out, _ = run(capsys, "curve")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 38
    assert "0.666667,0.666667,0.666667,0.666667,0.666667" in lines
    assert lines[5].split(",")[3] == "OPEN"  # alpha = 1/3


def test_curve_range_grid_matches_default(capsys):
    _, default, _ = run(capsys, "curve")
    code, ranged, _ = run(capsys, "curve", "--alphas", "0:3:37")
    assert code == 0 and ranged == default


def test_curve_rejects_bad_grid(capsys):
    assert run(capsys, "curve", "--alphas", "1/2,x")[0] == 1
    assert run(capsys, "curve", "--alphas", "-1")[0] == 1


def test_gaps_sweep_files(tmp_path, capsys):
    code, _, err = run(capsys, "gaps", "--snr-grid", "0:60:10", "--inr-grid", "0:60:10",
                       "--out", str(tmp_path))
    assert code == 0 and "0 failures" in err
    summary = json.loads((tmp_path / "gaps_summary.json").read_text())
    assert summary["all_pass"] and summary["points"] == 100


def test_gaps_single_point(capsys):
    code, out, _ = run(capsys, "gaps", "--snr", "100", "--inr", "1000")
    doc = json.loads(out)
    assert code == 0 and doc["regime"] == "strong"
    assert doc["max_gap"] == pytest.approx(0.3961, abs=1e-4)


def test_simulate_macbc(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "macbc", "--gains", "n12=2,n32=2,n21=2,n23=2",
                       "--target", "R12=1,R32=1,R21=1,R23=1", "--out", str(tmp_path))
    assert code == 0 and "PASSED" in err
    res = json.loads((tmp_path / "run.json").read_text())
    assert res["achieved_rates"]["M12"] == "1/1" and res["non_adaptive"]
    lines = (tmp_path / "transcript.jsonl").read_text().splitlines()
    assert len(lines) == 2 * 3


def test_simulate_outside_region(capsys):
    code, _, err = run(capsys, "simulate", "macbc", "--gains", "n12=1,n32=1,n21=1,n23=1",
                       "--target", "R12=1,R32=1")
    assert code == 1 and "outside" in err


def test_simulate_z_ic_routing(capsys):
    assert run(capsys, "simulate", "z", "--gains", "n12=2,n32=1,n34=3,n43=0,n23=0,n21=0",
               "--target", "R12=2,R34=2")[0] == 0
    code, out, _ = run(capsys, "simulate", "ic", "--p", "4", "--q", "2", "--format", "json")
    assert code == 0 and json.loads(out)["notes"]["per_user_rate"] == "2/1"
    code, out, _ = run(capsys, "simulate", "routing", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["achieved_rates"]["M12"] == "1/3" and not doc["non_adaptive"]


def test_simulate_network_file(tmp_path, capsys):
    f = tmp_path / "net.json"
    f.write_text(json.dumps({"N": 2, "gains": {"1,2": 2, "3,2": 1, "2,1": 1, "2,3": 2}}))
    code, _, _ = run(capsys, "simulate", "macbc", "--network", str(f), "--target", "R12=2,R23=2")
    assert code == 0


def test_same_seed_byte_identical(tmp_path, capsys):
    args = ["simulate", "macbc", "--gains", "n12=2,n32=1,n21=2,n23=1",
            "--target", "R12=1,R32=1/2,R21=1", "--blocklength", "2", "--seed", "3"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "b"))[0] == 0
    for name in ("run.json", "transcript.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_oracle_builtin_and_cache(tmp_path, capsys):
    cache = tmp_path / "cache"
    argv = ["oracle", "--channel", "mod2-macbc", "--n", "1", "--sizes", "2",
            "--cache-dir", str(cache)]
    code, out, _ = run(capsys, *argv)
    doc = json.loads(out)
    assert code == 0 and doc["equal"] == [True, True, True]
    assert len(list(cache.iterdir())) == 1
    code, out2, _ = run(capsys, *argv)
    assert out2 == out


def test_oracle_law_file(tmp_path, capsys):
    f = tmp_path / "law.json"
    f.write_text(json.dumps(modk_law(2, "ic").to_json()))
    code, out, _ = run(capsys, "oracle", "--law", str(f), "--model", "ic", "--n", "1",
                       "--class", "nonadaptive", "--no-cache")
    doc = json.loads(out)
    assert code == 0 and doc["class"] == "nonadaptive" and [2, 1, 2, 1] in doc["feasible"]


def test_oracle_budget_exit_code(tmp_path, capsys):
    code, out, err = run(capsys, "oracle", "--channel", "mod2-ic", "--n", "2", "--sizes", "4",
                         "--budget", "100", "--no-cache", "--out", str(tmp_path / "o"))
    assert code == 2 and "budget" in err and "partial" in err
    assert not (tmp_path / "o").exists()


def test_oracle_validation(capsys):
    assert run(capsys, "oracle", "--channel", "mod2-ic", "--sizes", "5", "--no-cache")[0] == 1
    assert run(capsys, "oracle", "--model", "ic", "--no-cache")[0] == 1


def test_macbc_gap(capsys):
    code, out, err = run(capsys, "macbc-gap")
    doc = json.loads(out)
    assert code == 0 and doc["mac_gap"] == pytest.approx(0.368, abs=1e-3) and doc["pass"]
    assert run(capsys, "macbc-gap", "--n1", "2", "--n3", "1")[0] == 1


def test_out_must_be_directory(tmp_path, capsys):
    f = tmp_path / "file"
    f.write_text("x")
    assert run(capsys, "curve", "--out", str(f))[0] == 1
    assert f.read_text() == "x"
