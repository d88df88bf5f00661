import json

import numpy as np
import pytest

from irs_swipt.baselines import SchemeId
from irs_swipt.channel import ExperimentConfig
from irs_swipt.cli import (EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, SweepSpec,
                           main, run_single, run_sweep, write_csv)


def small_cfg(**kw):
    params = dict(m=3, n=4, k_i=1, k_e=1, gamma=1.0, seed=0)
    params.update(kw)
    return ExperimentConfig(**params)


class TestRunSingle:
    def test_proposed_record(self):
        rec = run_single(small_cfg(), seed=1, scheme=SchemeId.Proposed)
        assert rec["scheme"] == "proposed"
        trace = rec["trace_w"]
        assert all(b >= a - 1e-9 * max(1.0, a) for a, b in zip(trace, trace[1:]))
        assert rec["config"]["m"] == 3
        json.dumps(rec)   # serializable

    def test_wpt_record_when_no_idr(self):
        rec = run_single(small_cfg(k_i=0, k_e=2), seed=1, scheme=SchemeId.Proposed)
        assert rec["objective_w"] > 0
        assert len(rec["theta"]) == 4

    def test_no_irs_empty_phases(self):
        rec = run_single(small_cfg(n=0), seed=1, scheme=SchemeId.NoIrs)
        assert rec["theta"] == []


class TestCliMain:
    def test_single_exit_ok(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"m": 3, "n": 4, "k_i": 1, "k_e": 1,
                                        "gamma_db": 0.0}))
        out = tmp_path / "out.json"
        code = main(["single", "--config", str(cfg_path), "--seed", "2",
                     "--out", str(out)])
        assert code == EXIT_OK
        rec = json.loads(out.read_text())
        assert rec["scheme"] == "proposed"

    def test_infeasible_exit_code(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"m": 3, "n": 4, "k_i": 1, "k_e": 1,
                                        "gamma": 1e9, "phase_restarts": 1}))
        code = main(["single", "--config", str(cfg_path), "--seed", "2"])
        assert code == EXIT_INFEASIBLE

    def test_malformed_config_names_key(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"m": 3, "n_elements": 4}))
        code = main(["single", "--config", str(cfg_path)])
        assert code == EXIT_CONFIG
        assert "n_elements" in capsys.readouterr().err

    def test_verify_suite(self, capsys):
        code = main(["verify", "numerics"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "[PASS]" in out


class TestSweep:
    def test_single_row(self, tmp_path):
        cfg = small_cfg(k_i=0, k_e=2, d_irs_ehr=2.0)
        spec = SweepSpec(variable="ap_irs_distance", values=[8.0], trials=2,
                         schemes=[SchemeId.Proposed],
                         output_path=str(tmp_path / "one.csv"))
        rows = run_sweep(spec, cfg, base_seed=3)
        assert len(rows) == 1
        assert rows[0].trials == 2
        assert rows[0].feasible_fraction == 1.0
        assert rows[0].mean_w > 0

    def test_csv_deterministic_across_threads(self, tmp_path):
        cfg = small_cfg(k_i=1, k_e=1, gamma=1.0)
        spec = SweepSpec(variable="sinr_target_db", values=[0.0, 3.0], trials=3,
                         schemes=[SchemeId.Proposed, SchemeId.SeparateBeams],
                         output_path="unused")
        paths = []
        for threads in (1, 2):
            rows = run_sweep(spec, cfg, base_seed=7, threads=threads)
            path = tmp_path / f"t{threads}.csv"
            write_csv(rows, path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_repeat_identical(self, tmp_path):
        cfg = small_cfg(k_i=0, k_e=2, d_irs_ehr=2.0)
        spec = SweepSpec(variable="ap_irs_distance", values=[6.0, 10.0], trials=2,
                         schemes=[SchemeId.Proposed, SchemeId.EigG],
                         output_path="unused")
        a = run_sweep(spec, cfg, base_seed=5)
        b = run_sweep(spec, cfg, base_seed=5)
        assert [r.csv() for r in a] == [r.csv() for r in b]

    def test_distance_guard(self):
        cfg = small_cfg(k_i=0, k_e=2, d_irs_ehr=2.0)
        spec = SweepSpec(variable="ap_irs_distance", values=[2.5], trials=1,
                         schemes=[SchemeId.Proposed], output_path="unused")
        with pytest.raises(ValueError):
            run_sweep(spec, cfg, base_seed=0)

    def test_infeasible_counted_not_fatal(self):
        cfg = small_cfg(k_i=1, k_e=1, phase_restarts=1)
        spec = SweepSpec(variable="sinr_target_db", values=[95.0], trials=2,
                         schemes=[SchemeId.Proposed], output_path="unused")
        rows = run_sweep(spec, cfg, base_seed=1)
        assert rows[0].feasible_fraction == 0.0
        assert np.isnan(rows[0].mean_w)

    def test_bad_spec_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec(variable="bandwidth", values=[1.0], trials=1,
                      schemes=[], output_path="x")
        with pytest.raises(ValueError):
            SweepSpec(variable="sinr_target_db", values=[], trials=1,
                      schemes=[], output_path="x")


def test_cli_wpt_sweep_end_to_end(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(["wpt-sweep", "--values", "6,9", "--trials", "2", "--seed", "4",
                 "--schemes", "proposed,no_irs", "--out", str(out)])
    assert code == EXIT_OK
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("scheme,value,")
    assert len(lines) == 1 + 2 * 2
