import json

import numpy as np
import pytest

from effsgd.avcov import Order
from effsgd.harness.cli import main
from effsgd.harness.config import ConfigError, ExperimentConfig, SequenceSpec
from effsgd.harness.plotting import emit_plot_script
from effsgd.harness.report import reproduce_slem_table, run_ordering_report
from effsgd.harness.runner import (CSV_HEADER, SgdTrace, checkpoints, mean_trace,
                                   run_experiment)


def small_cfg(**kw):
    base = dict(graph={"kind": "g2"},
                objective={"kind": "quadratic_scalar", "params": {"b": "degrees"}},
                sequences=[{"kind": "nbrw_walk"}, {"kind": "chain_walk", "kernel": "srw"}],
                horizon=200, replicas=5, seed=1)
    base.update(kw)
    return ExperimentConfig(**base)


def test_checkpoints():
    ck = checkpoints(1000)
    assert ck[0] == 1 and ck[-1] == 1000
    assert np.all(np.diff(ck) > 0)
    assert {2, 10, 100, 1000} <= set(ck.tolist())
    assert checkpoints(1).tolist() == [1]


def test_degenerate_run():
    cfg = small_cfg(horizon=1, replicas=1, sequences=[{"kind": "iid"}])
    tr = run_experiment(cfg)["iid"]
    assert tr.t.tolist() == [1]
    # theta_1 = b(X_1) for gamma_1 = 1
    b = np.array([4, 3, 2, 4, 3.0])
    assert tr.mse[0] in {(x - 3.2) ** 2 for x in b}


def test_mean_trace_is_arithmetic_mean():
    tr = run_experiment(small_cfg())["nbrw_walk"]
    singles = [SgdTrace.from_errors("r", tr.t, tr.per_replica[:, [r]], 1.0) for r in range(5)]
    m = mean_trace(singles)
    np.testing.assert_allclose(m.mse, tr.mse, rtol=1e-15)
    np.testing.assert_allclose(m.mse, tr.per_replica.mean(axis=1), rtol=1e-15)


def test_scaled_mse_definition():
    tr = run_experiment(small_cfg())["srw"]
    np.testing.assert_allclose(tr.scaled_mse, tr.mse / tr.t.astype(float) ** -0.9)


def test_deterministic_replay_and_csv(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_experiment(small_cfg(output_dir=str(a)))
    run_experiment(small_cfg(output_dir=str(b)))
    for name in ("nbrw_walk.csv", "srw.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
        assert (a / name).read_text().splitlines()[0] == CSV_HEADER
    meta = json.loads((a / "srw.json").read_text())
    assert meta["config_hash"] == small_cfg().config_hash()
    back = SgdTrace.read_csv(a / "srw.csv")
    assert back.t[-1] == 200


def test_config_roundtrip(tmp_path):
    cfg = small_cfg()
    cfg.save(tmp_path / "c.json")
    again = ExperimentConfig.load(tmp_path / "c.json")
    assert again.config_hash() == cfg.config_hash()
    assert again.sequences[1] == SequenceSpec("chain_walk", "srw", "srw")


@pytest.mark.parametrize("kw", [dict(horizon=0), dict(replicas=0), dict(sequences=[]),
                                dict(optimizer="lbfgs"), dict(graph={"kind": "nope"}),
                                dict(sequences=[{"kind": "chain_walk", "kernel": "bogus"}]),
                                dict(sequences=[{"kind": "iid"}, {"kind": "iid"}])])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        small_cfg(**kw)


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"horizon": 5, "colour": "red"})


def test_ordering_iid_vs_shuffle():
    cfg = small_cfg(sequences=[{"kind": "single_shuffle"}, {"kind": "iid"}])
    rep = run_ordering_report(cfg, simulate=False)
    assert rep.verdict is Order.ORDERED
    assert np.all(rep.sigma_a == 0) and np.all(rep.V_a == 0)
    np.testing.assert_allclose(rep.sigma_b, np.var([4, 3, 2, 4, 3.0]))


def test_ordering_nbrw_vs_srw_on_g2():
    rep = run_ordering_report(small_cfg(horizon=2000, replicas=20))
    assert rep.verdict is Order.ORDERED
    assert rep.trace_V[0] <= rep.trace_V[1]
    assert set(rep.plateau) == {"nbrw_walk", "srw"}


def test_ordering_kernel_vs_itself():
    cfg = small_cfg(sequences=[{"kind": "chain_walk", "kernel": "mhrw", "label": "a"},
                               {"kind": "chain_walk", "kernel": "mhrw", "label": "b"}])
    rep = run_ordering_report(cfg, simulate=False)
    np.testing.assert_array_equal(rep.sigma_a, rep.sigma_b)
    assert rep.verdict is Order.ORDERED


def test_ordering_rejects_law_mismatch():
    cfg = small_cfg(sequences=[{"kind": "chain_walk", "kernel": "mhrw"}, {"kind": "nbrw_walk"}])
    with pytest.raises(ConfigError):
        run_ordering_report(cfg, simulate=False)


def test_plot_script(tmp_path):
    p = emit_plot_script({"a": "a.csv", "b": "b.csv"}, tmp_path / "p.gp")
    text = p.read_text()
    assert text.count("'a.csv'") == 2 and "set logscale xy" in text
    p = emit_plot_script({"": "iid.csv"}, tmp_path / "q.gp")
    assert "title 'iid'" in p.read_text()
    four = {k: f"{k}.csv" for k in "abcd"}
    p = emit_plot_script(four, tmp_path / "r.gp", panels=[["a"], ["b"], ["c"], ["d"]])
    assert "layout 2,2" in p.read_text()
    with pytest.raises(ValueError):
        emit_plot_script({}, tmp_path / "s.gp")


def test_slem_table_rows():
    rows = reproduce_slem_table()
    assert len(rows) == 6 and all(r.fixture_ok for r in rows)
    by = {(r.graph, r.kernel): r for r in rows}
    assert abs(by[("G1", "mhrw")].constructed - 0.761) < 1e-3
    assert abs(by[("G2", "mhrw_modified")].constructed - 0.5) < 1e-3
    assert abs(by[("G2", "fmmc")].constructed - 0.408) < 0.02


def test_cli_commands(tmp_path, capsys):
    assert main(["slem", "--graph", "g2", "--kernel", "mhrw"]) == 0
    assert capsys.readouterr().out.strip() == "0.500000"
    out = tmp_path / "k.csv"
    assert main(["build-kernel", "--graph", "g1", "--out", str(out)]) == 0
    assert main(["slem", "--matrix", str(out)]) == 0
    assert main(["av", "--graph", "cycle:6", "--kernel", "nbrw", "--function", "degrees"]) == 0
    assert main(["fmmc", "--graph", "g2"]) == 0
    assert main(["gen-data", "--kind", "sum_nonconvex", "--n", "20", "--out", str(tmp_path / "d.npz")]) == 0
    cfg = small_cfg()
    cfg.save(tmp_path / "c.json")
    assert main(["run", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "run")]) == 0
    assert (tmp_path / "run" / "plot.gp").exists()
    assert main(["order", "--config", str(tmp_path / "c.json"), "--no-sim"]) == 0
    assert main(["clt-check", "--replicas", "50", "--horizon", "100"]) == 0
    assert main(["slem-table"]) == 0
