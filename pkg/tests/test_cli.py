import json
import subprocess
import sys

import numpy as np
import pytest

from blockdict import (
    BlockDict,
    BlockStructure,
    read_matrix_text,
    rip_constant_exact,
    write_matrix_text,
)
from blockdict.cli import main

from conftest import make_equivalent_pair, make_rip_instance


def run_cli(args):
    return main([str(a) for a in args])


@pytest.fixture
def workdir(tmp_path):
    return tmp_path


def gen_files(workdir, seed=0):
    rc = run_cli([
        "gen", "--ambient-dim", 16, "--blocks", 6, "--alpha", 2, "--sparsity", 2,
        "--seed", seed, "--n-samples", 40,
        "--out-dict", workdir / "A.txt",
        "--out-codes", workdir / "X.txt",
        "--out-samples", workdir / "Y.txt",
    ])
    assert rc == 0


class TestGen:
    def test_writes_consistent_files(self, workdir):
        gen_files(workdir)
        A = read_matrix_text(workdir / "A.txt")
        X = read_matrix_text(workdir / "X.txt")
        Y = read_matrix_text(workdir / "Y.txt")
        assert A.shape == (16, 12)
        assert X.shape == (12, 40)
        assert Y.shape == (16, 40)
        assert np.max(np.abs(A @ X - Y)) < 1e-12

    def test_deterministic(self, workdir):
        gen_files(workdir, seed=5)
        first = (workdir / "A.txt").read_text()
        gen_files(workdir, seed=5)
        assert (workdir / "A.txt").read_text() == first

    def test_requires_an_output(self, workdir):
        rc = run_cli([
            "gen", "--ambient-dim", 16, "--blocks", 6, "--alpha", 2, "--sparsity", 2,
        ])
        assert rc == 2


class TestRip:
    def test_exact_matches_library(self, workdir, capsys):
        gen_files(workdir)
        rc = run_cli(["rip", workdir / "A.txt", "--alpha", 2, "--level", 4])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        A = BlockDict(BlockStructure(K=6, alpha=2, s=2), read_matrix_text(workdir / "A.txt"))
        assert payload["delta"] == pytest.approx(rip_constant_exact(A, 4).delta)
        assert payload["mode"] == "exact-enumeration"

    def test_sampled_mode_and_out_file(self, workdir):
        gen_files(workdir)
        out = workdir / "rip.json"
        rc = run_cli([
            "rip", workdir / "A.txt", "--alpha", 2, "--level", 4,
            "--mode", "sampled", "--samples", 5, "--seed", 3, "--out", out,
        ])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["mode"] == "sampled-lower-bound"
        assert payload["supports_examined"] == 5

    def test_capacity_exit_code(self, workdir):
        write_matrix_text(workdir / "big.txt", np.eye(40))
        rc = run_cli(["rip", workdir / "big.txt", "--alpha", 1, "--level", 20])
        assert rc == 3

    def test_bad_file_exit_code(self, workdir):
        rc = run_cli(["rip", workdir / "missing.txt", "--alpha", 2, "--level", 2])
        assert rc == 2


class TestCode:
    def test_omp_and_exhaustive_agree_on_planted(self, workdir, capsys):
        A, _, used = make_rip_instance(16, 6, 2, 2, seed=40)
        write_matrix_text(workdir / "A.txt", A.data)
        rng = np.random.default_rng(used)
        x = np.zeros(12)
        x[0:2] = rng.uniform(0.5, 1.0, 2)
        x[6:8] = rng.uniform(0.5, 1.0, 2)
        write_matrix_text(workdir / "y.txt", A.data @ x)
        for method in ("omp", "exhaustive"):
            rc = run_cli([
                "code", workdir / "A.txt", workdir / "y.txt",
                "--alpha", 2, "--sparsity", 2, "--method", method,
            ])
            assert rc == 0
            payload = json.loads(capsys.readouterr().out)
            assert payload["support"] == [1, 4]
            assert payload["residual_norm"] < 1e-10
            assert np.max(np.abs(np.array(payload["coefficients"]) - x)) < 1e-8


class TestEquiv:
    def test_equivalent_pair(self, workdir, capsys):
        A, B, perm, _, _ = make_equivalent_pair(16, 5, 2, 2, seed=41)
        write_matrix_text(workdir / "A.txt", A.data)
        write_matrix_text(workdir / "B.txt", B.data)
        rc = run_cli(["equiv", workdir / "A.txt", workdir / "B.txt", "--alpha", 2])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["status"] == "equivalent"
        assert payload["pi"] == list(perm.pi)

    def test_random_pair(self, workdir, capsys):
        rng = np.random.default_rng(0)
        write_matrix_text(workdir / "A.txt", rng.standard_normal((16, 10)))
        write_matrix_text(workdir / "B.txt", rng.standard_normal((16, 10)))
        rc = run_cli(["equiv", workdir / "A.txt", workdir / "B.txt", "--alpha", 2])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["status"] == "not-equivalent"


class TestKappa:
    def test_maps_support_through_permutation(self, workdir, capsys):
        A, B, perm, _, _ = make_equivalent_pair(16, 5, 2, 2, seed=42)
        write_matrix_text(workdir / "A.txt", A.data)
        write_matrix_text(workdir / "B.txt", B.data)
        rc = run_cli([
            "kappa", workdir / "A.txt", workdir / "B.txt",
            "--alpha", 2, "--support", "1,3", "--probes", 4, "--seed", 1,
        ])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["consistent"] is True
        assert payload["kappa"] == sorted([perm(1), perm(3)])

    def test_hypothesis_violation_exit_code(self, workdir):
        A, _, _ = make_rip_instance(16, 5, 2, 2, seed=43)
        rng = np.random.default_rng(7)
        write_matrix_text(workdir / "A.txt", A.data)
        write_matrix_text(workdir / "B.txt", rng.standard_normal((16, 10)))
        rc = run_cli([
            "kappa", workdir / "A.txt", workdir / "B.txt",
            "--alpha", 2, "--support", "1,3", "--probes", 4,
        ])
        assert rc == 4


class TestLearnAndExperiment:
    def make_config(self, workdir, **overrides):
        config = {
            "structure": {"K": 4, "alpha": 2, "s": 2, "beta": 1},
            "ambient_dim": 20,
            "n_samples": 50,
            "seed": 3,
            "learner_iterations": 5,
        }
        config.update(overrides)
        path = workdir / "config.json"
        path.write_text(json.dumps(config))
        return path

    def test_learn_writes_dictionary_and_trace(self, workdir, capsys):
        cfg = self.make_config(workdir)
        rng = np.random.default_rng(2)
        write_matrix_text(workdir / "Y.txt", rng.standard_normal((20, 50)))
        rc = run_cli([
            "learn", workdir / "Y.txt", "--config", cfg,
            "--out-dict", workdir / "B.txt",
        ])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["objectives"]) >= 1
        assert read_matrix_text(workdir / "B.txt").shape == (20, 8)

    def test_learn_csv_trace(self, workdir, capsys):
        cfg = self.make_config(workdir)
        rng = np.random.default_rng(2)
        write_matrix_text(workdir / "Y.txt", rng.standard_normal((20, 50)))
        rc = run_cli(["learn", workdir / "Y.txt", "--config", cfg, "--format", "csv"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "iteration,objective"

    def test_experiment_deterministic(self, workdir):
        cfg = self.make_config(workdir)
        out1 = workdir / "r1.json"
        out2 = workdir / "r2.json"
        assert run_cli(["experiment", "--config", cfg, "--out", out1]) == 0
        assert run_cli(["experiment", "--config", cfg, "--out", out2]) == 0
        r1 = json.loads(out1.read_text())
        r2 = json.loads(out2.read_text())
        r1.pop("wall_clock_sec")
        r2.pop("wall_clock_sec")
        assert r1 == r2

    def test_experiment_bad_config_exit_code(self, workdir):
        path = workdir / "config.json"
        path.write_text(json.dumps({"structure": {"K": 4, "alpha": 3, "s": 2},
                                    "ambient_dim": 5, "n_samples": 10, "seed": 0}))
        rc = run_cli(["experiment", "--config", path])
        assert rc == 2


class TestVerify:
    def test_equivalent_pair_report(self, workdir, capsys):
        A, B, _, _, _ = make_equivalent_pair(16, 5, 2, 2, seed=44)
        write_matrix_text(workdir / "A.txt", A.data)
        write_matrix_text(workdir / "B.txt", B.data)
        rc = run_cli([
            "verify", workdir / "A.txt", workdir / "B.txt",
            "--alpha", 2, "--sparsity", 2, "--probes", 3,
        ])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["hypothesis"]["holds"] is True
        assert payload["conclusion"]["status"] == "equivalent"
        assert payload["agreement"]["equal"] is True


def test_console_entry_point(tmp_path):
    # the installed script and python -m both expose the same CLI
    proc = subprocess.run(
        [sys.executable, "-m", "blockdict", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "experiment" in proc.stdout


def test_bad_subcommand_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
