"""Tests for the command line."""

import json

import numpy as np
import pytest

from measbench.chemistry.integrals import load_integrals
from measbench.chemistry.observables import build_ground_observables
from measbench.cli import main
from measbench.grouping import CovarianceTable, sorted_insertion
from measbench.metrics import ground_metric


class TestSmallCommands:
    """ncrit and qse-solve."""

    def test_ncrit(self, capsys):
        """Prints floor(qse / (mc - ground)) + 1."""
        assert main(["ncrit", "--mc", "1.2", "--ground", "0.2", "--qse", "10"]) == 0
        assert capsys.readouterr().out.strip() == "11"

    def test_ncrit_without_crossover(self, capsys):
        """MC no dearer than ground exits with status 1."""
        assert main(["ncrit", "--mc", "1", "--ground", "1", "--qse", "10"]) == 1
        assert "error" in capsys.readouterr().err

    def test_qse_solve(self, tmp_path, capsys):
        """Eigenvalues of the thresholded pencil, one per line."""
        np.save(tmp_path / "H.npy", np.diag([0.5, -0.25, 3.0]))
        np.save(tmp_path / "S.npy", np.diag([1.0, 1.0, 1e-12]))
        code = main(["qse-solve", "--hmat", str(tmp_path / "H.npy"), "--smat", str(tmp_path / "S.npy")])
        assert code == 0
        values = [float(line) for line in capsys.readouterr().out.split()]
        assert values == pytest.approx([-0.25, 0.5])

    def test_qse_solve_text_matrices(self, tmp_path, capsys):
        """Plain-text matrices are accepted too."""
        np.savetxt(tmp_path / "H.txt", np.eye(2))
        np.savetxt(tmp_path / "S.txt", np.eye(2))
        assert main(["qse-solve", "--hmat", str(tmp_path / "H.txt"), "--smat", str(tmp_path / "S.txt")]) == 0
        assert len(capsys.readouterr().out.split()) == 2


class TestHydrogenChainCommand:
    """hydrogen-chain writes generated integrals."""

    def test_writes_loadable_fcidump(self, tmp_path, capsys):
        """The written file loads with the chain's orbitals and electrons."""
        out = tmp_path / "h3p.fcidump"
        assert main(["hydrogen-chain", "--atoms", "3", "--charge", "1", "--out", str(out)]) == 0
        assert "E_HF" in capsys.readouterr().out
        integrals = load_integrals(out)
        assert (integrals.n_spatial, integrals.n_electrons) == (3, 2)

    def test_open_shell_fails(self, tmp_path, capsys):
        """An odd electron count exits with status 1."""
        out = tmp_path / "h3.fcidump"
        assert main(["hydrogen-chain", "--atoms", "3", "--out", str(out)]) == 1
        assert "closed shell" in capsys.readouterr().err
        assert not out.exists()


class TestPlanAndEvaluate:
    """plan writes a strategy document; evaluate scores it on exact states."""

    def test_ground_fc_si(self, h2_path, h2_hamiltonian, h2_bundle, tmp_path, capsys):
        """The CLI metric matches a directly built plan."""
        plan_path = tmp_path / "plan.json"
        result_path = tmp_path / "result.json"
        assert main([
            "plan", "--task", "ground", "--method", "fc-si",
            "--integrals", str(h2_path), "--out", str(plan_path),
        ]) == 0
        assert "groups=2" in capsys.readouterr().out
        assert main(["evaluate", "--plan", str(plan_path), "--out", str(result_path)]) == 0

        result = json.loads(result_path.read_text())
        observables = build_ground_observables(h2_hamiltonian)
        table = CovarianceTable.for_state(observables.paulis, h2_bundle.ground_proxy)
        direct = ground_metric(sorted_insertion(observables, "fc", table=table), h2_bundle.ground)
        assert result["metric"] == pytest.approx(direct.value, rel=1e-6)
        assert result["n_groups"] == 2

    def test_mapping_independent_method(self, h2_path, tmp_path, capsys):
        """Majorana shadows ignore --mapping bk."""
        plan_path = tmp_path / "plan.json"
        assert main([
            "plan", "--task", "mc", "--method", "majorana-cs", "--mapping", "bk",
            "--integrals", str(h2_path), "--ns", "3", "--out", str(plan_path),
        ]) == 0
        assert json.loads(plan_path.read_text())["mapping"] == "jw"
        assert main(["evaluate", "--plan", str(plan_path), "--epsilon", "1e-2"]) == 0
        assert "million" in capsys.readouterr().out

    def test_missing_plan(self, tmp_path):
        """Evaluating a missing document fails cleanly."""
        assert main(["evaluate", "--plan", str(tmp_path / "none.json")]) == 1


class TestBench:
    """The bench command."""

    def test_bench_writes_reports(self, h2_path, tmp_path):
        """A YAML config produces the three report files."""
        config = tmp_path / "bench.yaml"
        config.write_text(
            "name: h2-smoke\n"
            "molecules:\n"
            f"  - label: h2\n    integrals: {h2_path}\n    n_states: 3\n"
            "tasks: [ground, qse]\n"
            "methods: [qwc-si, fc-cs]\n"
        )
        out = tmp_path / "out"
        assert main(["bench", "--config", str(config), "--out-dir", str(out)]) == 0
        rows = (out / "results.csv").read_text().strip().splitlines()
        assert len(rows) == 1 + 4
        assert (out / "summary.md").read_text().startswith("# h2-smoke")
