"""
End-to-end tests of the kackit command line.

Generators write JSON to stdout and verifiers read it back, so most tests
chain two invocations the way a shell pipeline would.
"""

import json

import numpy as np
import pytest

from kackit.constants import EXIT_FALSIFIED, EXIT_INPUT_ERROR, EXIT_OK
from kackit.crossprod import group_action
from kackit.fdca import MMAlgebra
from kackit.serialization import to_json
from kackit.wha import cyclic_group, groupoid_algebra

C_IN_M2_PLUS_C = {"type": "embedding", "source": {"type": "algebra", "blocks": [1]}, "inclusion": [[2], [1]]}


class TestMarkov:
    @pytest.mark.quick
    def test_text_output(self, run_cli):
        result = run_cli(["markov", "--matrix", "[[2],[1]]"])
        assert result.code == EXIT_OK
        assert "t = (0.4, 0.2)" in result.stdout
        assert "||Lambda||^2 = 5" in result.stdout

    def test_json_output_from_embedding_file(self, run_cli, write_json):
        path = write_json("emb.json", C_IN_M2_PLUS_C)
        result = run_cli(["--json", "markov", "--embedding", path])
        assert result.code == EXIT_OK
        payload = result.json()
        assert payload["index"] == pytest.approx(5.0)
        assert payload["weights"] == pytest.approx([0.4, 0.2])
        assert payload["residual"] < 1e-9

    def test_disconnected_matrix_is_an_input_error(self, run_cli):
        result = run_cli(["markov", "--matrix", "[[1,0],[0,1]]"])
        assert result.code == EXIT_INPUT_ERROR
        assert "DisconnectedInclusion" in result.stderr


class TestBasisPipeline:
    """basis generate | basis verify."""

    @pytest.mark.parametrize(
        "argv", [["--kind", "dft", "--n", "4"], ["--kind", "pauli"], ["--kind", "weyl", "--n", "3"]]
    )
    def test_generated_bases_verify(self, run_cli, argv):
        generated = run_cli(["basis", "generate", *argv])
        assert generated.code == EXIT_OK
        verified = run_cli(["basis", "verify"], stdin=generated.stdout)
        assert verified.code == EXIT_OK, verified.stdout
        assert verified.stdout.startswith("basis: passed")

    def test_json_verdict(self, run_cli):
        generated = run_cli(["basis", "generate", "--kind", "matrix-units", "--blocks", "2", "1"])
        verified = run_cli(["--json", "basis", "verify"], stdin=generated.stdout)
        payload = verified.json()
        assert payload["passed"] is True
        assert payload["size"] == 5

    def test_false_claim_is_falsified(self, run_cli):
        data = json.loads(run_cli(["basis", "generate", "--kind", "dft", "--n", "3"]).stdout)
        data["elements"] = data["elements"][:2]
        result = run_cli(["basis", "verify"], stdin=json.dumps(data))
        assert result.code == EXIT_FALSIFIED
        assert "FAILED" in result.stdout

    def test_several_inputs_on_stdin(self, run_cli):
        first = json.loads(run_cli(["basis", "generate", "--kind", "dft", "--n", "2"]).stdout)
        second = json.loads(run_cli(["basis", "generate", "--kind", "pauli"]).stdout)
        result = run_cli(["--json", "basis", "verify"], stdin=json.dumps([first, second]))
        assert result.code == EXIT_OK
        assert [entry["passed"] for entry in result.json()] == [True, True]


class TestWeakHopfPipeline:
    """wha groupoid | wha check / biconnected / dual."""

    def test_groupoid_algebra_certifies(self, run_cli):
        generated = run_cli(["wha", "groupoid", "--kind", "pair", "--n", "2"])
        result = run_cli(["--json", "wha", "check"], stdin=generated.stdout)
        assert result.code == EXIT_OK
        assert result.json()["status"] == "weak-kac"

    def test_discrete_groupoid_is_not_biconnected(self, run_cli):
        generated = run_cli(["wha", "groupoid", "--kind", "discrete", "--n", "2"])
        result = run_cli(["wha", "biconnected"], stdin=generated.stdout)
        assert result.code == EXIT_FALSIFIED
        assert "biconnected: False" in result.stdout

    def test_group_is_biconnected(self, run_cli):
        generated = run_cli(["wha", "groupoid", "--kind", "cyclic", "--n", "3"])
        assert run_cli(["wha", "biconnected"], stdin=generated.stdout).code == EXIT_OK

    def test_dual_round_trip(self, run_cli):
        generated = run_cli(["wha", "groupoid", "--kind", "symmetric", "--n", "3"])
        dual = run_cli(["wha", "dual"], stdin=generated.stdout)
        assert dual.code == EXIT_OK
        assert run_cli(["wha", "check"], stdin=dual.stdout).code == EXIT_OK

    def test_groupoid_from_stdin(self, run_cli):
        groupoid = to_json(cyclic_group(2))
        generated = run_cli(["wha", "groupoid"], stdin=json.dumps(groupoid))
        assert generated.code == EXIT_OK
        assert json.loads(generated.stdout)["dim"] == 2


class TestSquares:
    def test_hadamard_square_commutes(self, run_cli):
        generated = run_cli(["square", "generate", "--kind", "hadamard", "--n", "3", "--conjugate-seed", "5"])
        result = run_cli(["--json", "square", "check"], stdin=generated.stdout)
        assert result.code == EXIT_OK
        payload = result.json()
        assert payload["commuting"] is True
        assert payload["nondegenerate"] is True

    def test_transfer(self, run_cli, write_json):
        square = run_cli(["square", "generate", "--kind", "tensor", "--n", "2", "--conjugate-seed", "1"]).stdout
        basis = write_json("basis.json", json.loads(run_cli(["basis", "generate", "--kind", "dft", "--n", "2"]).stdout))
        transferred = run_cli(["square", "transfer", "--basis", basis], stdin=square)
        assert transferred.code == EXIT_OK
        assert run_cli(["basis", "verify"], stdin=transferred.stdout).code == EXIT_OK


class TestTowerCommands:
    def test_basic_construction(self, run_cli, write_json):
        path = write_json("emb.json", C_IN_M2_PLUS_C)
        result = run_cli(["--json", "basic-construction", "--file", path])
        assert result.code == EXIT_OK
        payload = result.json()
        assert payload["blocks"] == [5]
        assert payload["tau"] == pytest.approx(0.2)
        assert payload["is_markov"] is True

    def test_depth(self, run_cli):
        result = run_cli(["depth", "--matrices", "[[[1,1,1]]]", "--index", "3"])
        assert result.code == EXIT_OK
        assert result.stdout.startswith("depth = 2")
        undetermined = run_cli(["depth", "--matrices", "[[[1,1]]]", "--index", "3"])
        assert undetermined.code == EXIT_FALSIFIED
        assert "undetermined" in undetermined.stdout

    def test_index_formula(self, run_cli):
        assert run_cli(["index-formula", "--weyl-order", "3", "--relcom-dim", "1", "--index", "3"]).code == EXIT_OK
        result = run_cli(["--json", "index-formula", "--weyl-order", "1", "--relcom-dim", "5"])
        assert result.code == EXIT_FALSIFIED
        assert result.json()["consistent"] is False

    def test_bratteli_dot(self, run_cli):
        result = run_cli(["bratteli", "--dot", "--matrix", "[[2],[1]]"])
        assert result.code == EXIT_OK
        assert result.stdout.startswith("graph bratteli {")
        assert 'b0 -- a0 [label="2"];' in result.stdout

    @pytest.mark.parametrize("matrix", ["[]", "5", "[[1.5]]", "[[1], [1, 2]]", '[["a"]]'])
    def test_malformed_matrix_is_an_input_error(self, run_cli, matrix):
        for command in ("bratteli", "markov"):
            result = run_cli([command, "--matrix", matrix])
            assert result.code == EXIT_INPUT_ERROR
            assert "matrix:" in result.stderr

    def test_malformed_source_dims(self, run_cli):
        result = run_cli(["bratteli", "--matrix", "[[2],[1]]", "--source-dims", "5"])
        assert result.code == EXIT_INPUT_ERROR
        assert "source_dims:" in result.stderr

    def test_fractional_depth_matrix(self, run_cli):
        result = run_cli(["depth", "--matrices", "[[[1.5]]]", "--index", "2"])
        assert result.code == EXIT_INPUT_ERROR
        assert "matrices[0]:" in result.stderr
        assert run_cli(["depth", "--matrices", "5", "--index", "2"]).code == EXIT_INPUT_ERROR


class TestCrossedProducts:
    @pytest.fixture
    def swap_action_file(self, write_json):
        acting = groupoid_algebra(cyclic_group(2))
        action = group_action(acting, MMAlgebra.commutative(2), [np.eye(2), [[0, 1], [1, 0]]])
        return write_json("action.json", to_json(action))

    def test_build(self, run_cli, swap_action_file):
        result = run_cli(["crossed-product", "build", "--file", swap_action_file])
        assert result.code == EXIT_OK
        payload = result.json()
        assert payload["type"] == "crossed_product"
        assert payload["result"]["dim"] == 4

    def test_minimality(self, run_cli, swap_action_file):
        result = run_cli(["--json", "crossed-product", "check-minimal", "--file", swap_action_file])
        assert result.code == EXIT_FALSIFIED
        assert result.json()["commutant_dim"] == 2


class TestWorkspace:
    """Named objects, global flags and error reporting."""

    def test_loaded_names_resolve(self, run_cli, write_json):
        algebra = write_json("algebra.json", {"type": "algebra", "blocks": [2, 1]})
        trace = write_json("trace.json", {"type": "trace", "algebra": {"ref": "A"}, "weights": [0.4, 0.2]})
        result = run_cli(["--json", "--load", f"A={algebra}", "watatani", "--file", trace])
        assert result.code == EXIT_OK
        assert result.json()["scalar"] == pytest.approx(5.0)

    def test_malformed_load(self, run_cli):
        result = run_cli(["--load", "no-separator", "markov", "--matrix", "[[1]]"])
        assert result.code == EXIT_INPUT_ERROR
        assert "NAME=PATH" in result.stderr

    def test_field_path_in_error(self, run_cli):
        broken = {"type": "trace", "algebra": {"type": "algebra"}, "weights": [1]}
        result = run_cli(["watatani"], stdin=json.dumps(broken))
        assert result.code == EXIT_INPUT_ERROR
        assert "algebra.blocks" in result.stderr

    def test_invalid_json(self, run_cli):
        result = run_cli(["basis", "verify"], stdin="{not json")
        assert result.code == EXIT_INPUT_ERROR
        assert "invalid JSON" in result.stderr

    def test_empty_stdin(self, run_cli):
        result = run_cli(["wha", "check"])
        assert result.code == EXIT_INPUT_ERROR

    def test_unknown_command(self, run_cli):
        assert run_cli(["hypergroup"]).code == EXIT_INPUT_ERROR

    def test_stats_go_to_stderr(self, run_cli):
        generated = run_cli(["basis", "generate", "--kind", "pauli"])
        result = run_cli(["--stats", "basis", "verify"], stdin=generated.stdout)
        assert result.code == EXIT_OK
        stats = json.loads(result.stderr.strip().splitlines()[-1])
        assert stats["check_performance"]["total_checks"] == 1

    def test_quiet_suppresses_text(self, run_cli):
        result = run_cli(["--quiet", "markov", "--matrix", "[[2],[1]]"])
        assert result.code == EXIT_OK
        assert result.stdout == ""

    def test_tolerance_flag(self, run_cli):
        generated = run_cli(["basis", "generate", "--kind", "weyl", "--n", "5"])
        assert run_cli(["--tol", "1e-30", "basis", "verify"], stdin=generated.stdout).code == EXIT_FALSIFIED
