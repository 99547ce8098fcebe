import json

import numpy as np
import pytest

from vqnhite import bench, cli
from vqnhite.bench import RunConfig, emit_plot, read_data, run_benchmark, summarize, write_outputs
from vqnhite.trace import FidelityTrace

SMALL = dict(n_qubits=2, samples=1, fields=(0.3, -0.5))


class TestRunConfig:
    def test_json_round_trip(self):
        cfg = RunConfig(n_qubits=3, fields=(0.1, 0.2, 0.3), layout="all", ridge=1e-3)
        assert RunConfig.from_json(cfg.to_json()) == cfg

    @pytest.mark.parametrize(
        "bad",
        [
            dict(n_qubits=0),
            dict(layout="ring"),
            dict(method="adam"),
            dict(dbeta=0),
            dict(samples=0),
            dict(n_qubits=2, fields=(0.1,)),
            dict(mode="sampled"),
            dict(shots=-1),
            dict(target_mode="other"),
        ],
    )
    def test_validation(self, bad):
        with pytest.raises(ValueError):
            RunConfig(**bad)

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            RunConfig.from_dict({"n_qubits": 2, "qubits": 2})

    def test_seed_derivation(self):
        cfg = RunConfig(seed=7)
        seeds = {bench.sample_nn_seed(cfg, s) for s in range(20)}
        assert len(seeds) == 20
        assert bench.sample_nn_seed(cfg, 3) == bench.sample_nn_seed(RunConfig(seed=7), 3)
        assert np.array_equal(bench.fields_for(cfg, 0), bench.fields_for(cfg, 5))
        rs = RunConfig(resample_fields=True)
        assert not np.array_equal(bench.fields_for(rs, 0), bench.fields_for(rs, 1))


class TestBenchmark:
    def test_record_count(self):
        res = run_benchmark(RunConfig(**SMALL))
        assert len(res.trace.records) == 2 * 60
        assert not res.failures and res.ok
        assert {r.method for r in res.trace.records} == {"vite", "vqnhite"}

    def test_byte_identical_outputs(self, tmp_path):
        cfg = RunConfig(**{**SMALL, "samples": 2, "beta_max": 1.0})
        p1 = write_outputs(run_benchmark(cfg), tmp_path / "a" / "fid.csv")
        p2 = write_outputs(run_benchmark(cfg), tmp_path / "b" / "fid.csv")
        for kind in p1:
            assert p1[kind].read_bytes() == p2[kind].read_bytes()
        loaded = json.loads(p1["config"].read_text())
        assert RunConfig.from_dict(loaded["config"]) == cfg

    def test_summary_and_read_back(self, tmp_path):
        cfg = RunConfig(**{**SMALL, "samples": 3, "beta_max": 0.5})
        res = run_benchmark(cfg)
        paths = write_outputs(res, tmp_path / "fid.csv")
        back = read_data(paths["data"])
        assert np.allclose(back.fidelities(), res.trace.fidelities())
        rows = summarize(res.trace)
        assert len(rows) == 2 * 5 and all(r[2] == 3 for r in rows)

    def test_failure_fraction(self):
        res = bench.BenchmarkResult(RunConfig(samples=5), FidelityTrace(), [{"sample": 0}, {"sample": 1}])
        assert res.failure_fraction == pytest.approx(0.2) and not res.ok


class TestPlot:
    def test_labels_and_series(self, tmp_path):
        import matplotlib

        matplotlib.use("Agg")
        res = run_benchmark(RunConfig(**{**SMALL, "beta_max": 0.5}))
        out = emit_plot(res.trace, tmp_path / "f.svg")
        text = out.read_text()
        assert "VITE" in text and "VQNHITE" in text
        a = emit_plot(res.trace, tmp_path / "g.svg").read_bytes()
        assert a == out.read_bytes()

    def test_empty_trace(self, tmp_path):
        with pytest.raises(ValueError):
            emit_plot(FidelityTrace(), tmp_path / "e.svg")


class TestCLI:
    def test_parse_fields(self):
        assert cli.parse_fields("3") == (None, 3)
        assert cli.parse_fields("0.1,-0.2") == ((0.1, -0.2), 0)

    def test_evolve_stdout(self, capsys):
        assert cli.main(["evolve", "--n-qubits", "2", "--beta-max", "0.3", "--method", "vite"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "beta,method,sample,fidelity,energy" and len(lines) == 4

    def test_evolve_hamiltonian_file(self, tmp_path):
        ini = tmp_path / "h.ini"
        ini.write_text("[hamiltonian]\nn = 2\nJ = -1\nfields = 0.2, -0.1\n")
        out = tmp_path / "e.csv"
        assert cli.main(["evolve", "--hamiltonian", str(ini), "--beta-max", "0.2", "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 1 + 2 * 2

    def test_benchmark_and_plot(self, tmp_path, capsys):
        out = tmp_path / "r" / "fid.csv"
        rc = cli.main(
            ["benchmark", "--n-qubits", "2", "--samples", "2", "--beta-max", "2", "--out", str(out), "--fields", "0.3,-0.5"]
        )
        assert rc == 0
        assert "beta=2" in capsys.readouterr().out
        for p in bench.output_paths(out).values():
            assert p.exists()
        svg = tmp_path / "p.svg"
        assert cli.main(["plot", str(out), "--out", str(svg)]) == 0
        assert svg.exists()

    def test_benchmark_config_file(self, tmp_path):
        cfgp = tmp_path / "c.json"
        cfgp.write_text(RunConfig(**{**SMALL, "beta_max": 0.3, "method": "vite"}).to_json())
        out = tmp_path / "fid.csv"
        assert cli.main(["benchmark", "--config", str(cfgp), "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 1 + 3

    def test_failure_exit_code(self, tmp_path, monkeypatch):
        def failing(cfg, workers=1):
            return bench.BenchmarkResult(cfg, FidelityTrace(), [{"sample": s} for s in range(cfg.samples)])

        monkeypatch.setattr(bench, "run_benchmark", failing)
        rc = cli.main(["benchmark", "--n-qubits", "2", "--samples", "2", "--out", str(tmp_path / "f.csv")])
        assert rc == cli.EXIT_FAILURES

    def test_bad_input_exit_code(self, tmp_path):
        assert cli.main(["evolve", "--n-qubits", "2", "--fields", "0.1", "--beta-max", "0.2"]) == 2
        assert cli.main(["plot", str(tmp_path / "missing.csv")]) == 2

    def test_unknown_suite(self):
        with pytest.raises(SystemExit):
            cli.main(["verify", "--suite", "nope"])

    def test_verify_suite(self, capsys):
        assert cli.main(["verify", "--suite", "oracles"]) == 0
        assert "PASS" in capsys.readouterr().out
