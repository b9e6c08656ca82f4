"""CLI frontend: config resolution, report formats, reproducibility, and
the exit-code contract."""

import json
import subprocess
import sys

import numpy as np
import pytest

from andreief.cli import (
    CHEBYSHEV_FUNCTIONS,
    RunConfig,
    UsageError,
    main,
    parse_config,
)
from andreief.quadrature import Domain


def run_main(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, argv):
    code, out, err = run_main(capsys, argv)
    return code, json.loads(out), err


class TestParseConfig:
    def test_defaults(self):
        config = parse_config(["verify-andreief", "--ensemble", "gue-monomial", "--n", "3"])
        assert config.command == "verify-andreief"
        assert config.ensemble.name == "gue-monomial"
        assert config.ensemble.size == 3
        assert config.n_nodes == 40
        assert config.mc_samples == 0
        assert config.seed == 42
        assert config.tolerance == 1e-9
        assert config.format == "json"
        assert config.output_path is None
        assert config.timestamp is True

    def test_json_text_source(self):
        config = parse_config(
            '{"command": "partition", "ensemble": "legendre-monomial", "size": 4}'
        )
        assert config.command == "partition"
        assert config.ensemble.size == 4

    def test_text_requires_command(self):
        with pytest.raises(UsageError, match="must name a command"):
            parse_config('{"ensemble": "gue-monomial"}')

    def test_config_file_with_flag_override(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(
            json.dumps({"ensemble": "muttalib-borodin", "size": 3, "seed": 7})
        )
        config = parse_config(["verify-andreief", "--config", str(path)])
        assert config.ensemble.name == "muttalib-borodin"
        assert config.seed == 7
        override = parse_config(
            ["verify-andreief", "--config", str(path), "--n", "2", "--seed", "9"]
        )
        assert override.ensemble.size == 2
        assert override.seed == 9

    def test_missing_config_file(self):
        with pytest.raises(UsageError, match="cannot read config file"):
            parse_config(["verify-andreief", "--config", "/no/such/file.json"])

    def test_malformed_numeric_names_field(self):
        with pytest.raises(UsageError, match="invalid value for 'seed'"):
            parse_config('{"command": "partition", "seed": "soon"}')

    def test_invalid_json(self):
        with pytest.raises(UsageError, match="not valid JSON"):
            parse_config("{nope")

    def test_non_object_json(self):
        with pytest.raises(UsageError, match="flat JSON object"):
            parse_config("[1, 2]")

    def test_shifts_from_comma_string(self):
        config = parse_config(
            ["verify-andreief", "--ensemble", "shifted-gue", "--n", "2", "--shifts", "0.2,0.5"]
        )
        assert config.ensemble.right.shifts == (0.2, 0.5)
        assert config.ensemble_params["shifts"] == [0.2, 0.5]

    def test_shifts_from_json_list(self):
        config = parse_config(
            '{"command": "partition", "ensemble": "shifted-gue", "size": 2, "shifts": [0.1, 0.3]}'
        )
        assert config.ensemble.right.shifts == (0.1, 0.3)

    def test_bad_shifts(self):
        with pytest.raises(UsageError, match="invalid value for 'shifts'"):
            parse_config(["verify-andreief", "--ensemble", "shifted-gue", "--shifts", "a,b"])

    def test_unknown_command_in_text(self):
        with pytest.raises(UsageError, match="unknown command"):
            parse_config('{"command": "frobnicate"}')

    def test_unknown_ensemble_lists_builtins(self):
        with pytest.raises(ValueError, match="built-ins: uniform-monomial"):
            parse_config(["verify-andreief", "--ensemble", "nope"])

    def test_zero_theta_rejected(self):
        with pytest.raises(ValueError, match="theta must be positive"):
            parse_config(
                ["verify-andreief", "--ensemble", "muttalib-borodin", "--theta", "0"]
            )

    def test_two_factor_kernel_rejected(self):
        with pytest.raises(NotImplementedError, match="m >= 2 not implemented"):
            parse_config('{"command": "partition", "ensemble": "laguerre-product", "m": 2}')

    def test_invalid_tolerance(self):
        with pytest.raises(UsageError, match="tolerance must be positive"):
            parse_config(["verify-andreief", "--tolerance", "0"])

    def test_negative_mc_samples(self):
        with pytest.raises(UsageError, match="mc_samples must be non-negative"):
            parse_config(["verify-andreief", "--mc-samples", "-5"])

    def test_unknown_chebyshev_function(self):
        with pytest.raises(UsageError, match="unknown function 'tanh'"):
            parse_config(["verify-chebyshev", "--f", "tanh"])

    def test_unknown_format_in_file(self):
        with pytest.raises(UsageError, match="unknown format"):
            parse_config('{"command": "partition", "format": "yaml"}')

    def test_no_timestamp_from_file(self):
        config = parse_config('{"command": "partition", "no_timestamp": true}')
        assert config.timestamp is False

    def test_run_config_validates_directly(self):
        with pytest.raises(UsageError, match="n_nodes must be at least 1"):
            RunConfig(
                command="partition",
                ensemble=parse_config(["partition"]).ensemble,
                ensemble_params={},
                n_nodes=0,
            )


class TestExitCodes:
    def test_pass_is_zero(self, capsys):
        code, report, _ = run_json(
            capsys, ["verify-andreief", "--n", "2", "--no-timestamp"]
        )
        assert code == 0
        assert report["passed"] is True
        check = report["checks"][0]
        assert abs(check["lhs"] - 1.0 / 6.0) < 1e-12
        assert abs(check["rhs"] - 1.0 / 6.0) < 1e-12

    def test_identity_failure_is_one(self, capsys):
        # exact equality is impossible in floats, so an absurd tolerance
        # must surface as an identity failure, not an error
        code, report, _ = run_json(
            capsys,
            ["verify-andreief", "--n", "3", "--tolerance", "1e-30", "--no-timestamp"],
        )
        assert code == 1
        assert report["passed"] is False

    def test_usage_error_is_two(self, capsys):
        code, _, err = run_main(capsys, ["verify-andreief", "--ensemble", "nope"])
        assert code == 2
        assert "built-ins" in err

    def test_engine_error_is_two(self, capsys):
        code, _, err = run_main(
            capsys, ["verify-discrete", "--rows", "2", "--cols", "3"]
        )
        assert code == 2
        assert "at least as many rows" in err

    def test_odd_debruijn_size_is_two(self, capsys):
        code, _, err = run_main(capsys, ["verify-debruijn", "--n", "3"])
        assert code == 2
        assert "size must be even" in err

    def test_argparse_rejection_is_two(self, capsys):
        code, _, _ = run_main(capsys, ["verify-andreief", "--bogus"])
        assert code == 2

    def test_help_is_zero(self, capsys):
        code, out, _ = run_main(capsys, ["--help"])
        assert code == 0
        assert "verify-andreief" in out

    def test_unwritable_output_is_two(self, capsys):
        code, _, err = run_main(
            capsys,
            ["partition", "--output", "/no/such/dir/report.json", "--no-timestamp"],
        )
        assert code == 2
        assert "cannot write report" in err


class TestReports:
    def test_repeated_runs_byte_identical_json(self, capsys):
        argv = [
            "verify-andreief",
            "--n",
            "2",
            "--mc-samples",
            "20000",
            "--no-timestamp",
        ]
        _, first, _ = run_main(capsys, argv)
        _, second, _ = run_main(capsys, argv)
        assert first == second

    def test_repeated_runs_byte_identical_csv(self, capsys):
        argv = ["verify-discrete", "--format", "csv", "--no-timestamp"]
        _, first, _ = run_main(capsys, argv)
        _, second, _ = run_main(capsys, argv)
        assert first == second

    def test_timestamp_present_by_default(self, capsys):
        _, report, _ = run_json(capsys, ["partition"])
        assert "timestamp" in report

    def test_timestamp_isolated_by_flag(self, capsys):
        _, report, _ = run_json(capsys, ["partition", "--no-timestamp"])
        assert "timestamp" not in report

    def test_json_keys_canonical(self, capsys):
        _, out, _ = run_main(capsys, ["partition", "--no-timestamp"])
        report = json.loads(out)
        assert list(report) == sorted(report)
        assert list(report["config"]) == sorted(report["config"])
        assert list(report["checks"][0]) == sorted(report["checks"][0])

    def test_report_embeds_resolved_config(self, capsys):
        _, report, _ = run_json(
            capsys,
            [
                "verify-andreief",
                "--ensemble",
                "muttalib-borodin",
                "--n",
                "3",
                "--theta",
                "2.5",
                "--no-timestamp",
            ],
        )
        section = report["config"]
        assert section["ensemble"]["name"] == "muttalib-borodin"
        assert section["ensemble"]["theta"] == 2.5
        assert section["seed"] == 42
        assert section["tolerance"] == 1e-9
        assert section["n_nodes"] == 40

    def test_mc_row_reports_sigma(self, capsys):
        _, report, _ = run_json(
            capsys,
            ["verify-andreief", "--n", "2", "--mc-samples", "20000", "--no-timestamp"],
        )
        names = [c["name"] for c in report["checks"]]
        assert names == ["andreief-quadrature", "andreief-mc"]
        mc = report["checks"][1]
        assert mc["sigma"] > 0
        # pass rule is recomputable from the row alone
        assert mc["passed"] == (
            abs(mc["lhs"] - mc["rhs"]) <= 3.0 * mc["sigma"] + 1e-12
        )

    def test_csv_layout(self, capsys):
        code, out, _ = run_main(
            capsys, ["partition", "--format", "csv", "--no-timestamp"]
        )
        assert code == 0
        lines = out.strip().splitlines()
        comments = [l for l in lines if l.startswith("# ")]
        assert any(l.startswith("# config.seed=") for l in comments)
        assert any(l.startswith("# config.ensemble.name=") for l in comments)
        header_at = next(i for i, l in enumerate(lines) if not l.startswith("#"))
        assert lines[header_at] == "name,lhs,rhs,abs_gap,rel_gap,sigma,passed"
        row = lines[header_at + 1].split(",")
        assert row[0] == "partition-vs-gram-determinant"
        assert float(row[1]) == pytest.approx(1.0 / 6.0, rel=1e-12)
        assert row[6] == "true"

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "report.json"
        code, out, _ = run_main(
            capsys, ["partition", "--output", str(target), "--no-timestamp"]
        )
        assert code == 0
        assert out == ""
        report = json.loads(target.read_text())
        assert report["passed"] is True


class TestCommandPayloads:
    def test_chebyshev_co_monotone(self, capsys):
        code, report, _ = run_json(
            capsys, ["verify-chebyshev", "--f", "x", "--g", "x^2", "--no-timestamp"]
        )
        assert code == 0
        assert report["direction_reversed"] is False
        assert report["gap"] > 0

    def test_chebyshev_anti_monotone_still_passes(self, capsys):
        code, report, _ = run_json(
            capsys, ["verify-chebyshev", "--f", "x", "--g=-x", "--no-timestamp"]
        )
        assert code == 0
        assert report["direction_reversed"] is True
        assert report["gap"] == pytest.approx(-1.0 / 12.0, rel=1e-12)

    def test_chebyshev_identity_row(self, capsys):
        _, report, _ = run_json(
            capsys,
            ["verify-chebyshev", "--f", "exp", "--g", "cos", "--a", "0", "--b", "2", "--no-timestamp"],
        )
        check = report["checks"][0]
        assert check["name"] == "chebyshev-gap-identity"
        assert check["rel_gap"] <= 1e-12

    def test_function_catalogue_is_consistent(self):
        x = np.linspace(0.1, 0.9, 5)
        for name, fn in CHEBYSHEV_FUNCTIONS.items():
            values = np.asarray(fn(x), dtype=float)
            assert values.shape == x.shape
            assert np.all(np.isfinite(values)), name

    def test_discrete_reports_all_four_identities(self, capsys):
        code, report, _ = run_json(capsys, ["verify-discrete", "--no-timestamp"])
        assert code == 0
        names = [c["name"] for c in report["checks"]]
        assert names == [
            "cauchy-binet",
            "minor-summation",
            "discretization-bridge",
            "block-reclaims",
        ]
        assert report["bridge_bitwise"] is True
        assert all(c["passed"] for c in report["checks"])

    def test_discrete_exact_rows_have_zero_gap(self, capsys):
        _, report, _ = run_json(
            capsys, ["verify-discrete", "--rows", "5", "--cols", "4", "--no-timestamp"]
        )
        by_name = {c["name"]: c for c in report["checks"]}
        assert by_name["cauchy-binet"]["abs_gap"] == 0
        assert by_name["minor-summation"]["abs_gap"] == 0
        assert by_name["block-reclaims"]["abs_gap"] == 0

    def test_biorthogonalize_payload(self, capsys):
        code, report, _ = run_json(
            capsys,
            ["biorthogonalize", "--ensemble", "legendre-monomial", "--n", "3", "--no-timestamp"],
        )
        assert code == 0
        h = report["coefficients"]["h"]
        assert h == pytest.approx([2.0, 2.0 / 3.0, 8.0 / 45.0], rel=1e-10)
        c = np.array(report["coefficients"]["c"])
        assert np.allclose(np.diag(c), 1.0)
        names = [c["name"] for c in report["checks"]]
        assert "off-diagonal-residual" in names

    def test_partition_payload(self, capsys):
        code, report, _ = run_json(
            capsys, ["partition", "--ensemble", "uniform-monomial", "--n", "2", "--no-timestamp"]
        )
        assert code == 0
        assert report["value"] == pytest.approx(1.0 / 6.0, rel=1e-12)

    def test_debruijn_shared_rule_both_kernels(self, capsys):
        for kernel in ("difference", "sign"):
            code, report, _ = run_json(
                capsys,
                ["verify-debruijn", "--n", "4", "--kernel", kernel, "--n-nodes", "12", "--no-timestamp"],
            )
            assert code == 0
            assert report["checks"][0]["rel_gap"] <= 1e-12


class TestConsoleEntry:
    def test_module_invocation_matches_in_process(self, capsys):
        argv = ["partition", "--no-timestamp"]
        _, expected, _ = run_main(capsys, argv)
        proc = subprocess.run(
            [sys.executable, "-m", "andreief.cli", *argv],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout == expected

    def test_module_invocation_usage_error(self):
        proc = subprocess.run(
            [sys.executable, "-m", "andreief.cli", "verify-andreief", "--ensemble", "nope"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2
        assert "built-ins" in proc.stderr
