import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from contractloop.cli import main
from contractloop.store import ProjectStore

GOLDEN = Path(__file__).parent / "fixtures" / "golden"

INTENT = "Implement an ATM account with a guarded constructor"


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, project_dir, args, provider=True, **kwargs):
    base = ["--project", str(project_dir)]
    if provider:
        base += ["--provider", f"mock:{GOLDEN}"]
    return runner.invoke(main, base + args, catch_exceptions=False, **kwargs)


@pytest.fixture
def project(runner, tmp_path):
    project_dir = tmp_path / "proj"
    result = invoke(runner, project_dir, ["init"], provider=False)
    assert result.exit_code == 0
    return project_dir


@pytest.fixture
def converged_project(runner, project):
    result = invoke(runner, project, ["loop", INTENT, "--auto-approve",
                                      "--n-valid", "10", "--n-violating", "2"])
    assert result.exit_code == 0, result.output
    return project


class TestInit:
    def test_creates_project_file(self, project):
        assert (project / "project.json").exists()

    def test_refuses_existing(self, runner, project):
        result = invoke(runner, project, ["init"], provider=False)
        assert result.exit_code == 4

    def test_commands_require_project(self, runner, tmp_path):
        result = invoke(runner, tmp_path / "nowhere", ["report", "anything"],
                        provider=False)
        assert result.exit_code == 4
        assert "init" in result.output


class TestLoop:
    def test_golden_loop_converges(self, runner, project):
        result = invoke(runner, project, ["loop", INTENT, "--auto-approve",
                                          "--n-valid", "10", "--n-violating", "2"])
        assert result.exit_code == 0
        assert "terminal status: converged" in result.output

    def test_budget_zero_exits_with_violations_code(self, runner, project):
        result = invoke(runner, project, ["loop", INTENT, "--auto-approve",
                                          "--max-repair", "0",
                                          "--n-valid", "10", "--n-violating", "2"])
        assert result.exit_code == 3
        assert "budget_exhausted" in result.output

    def test_interactive_review_rejecting_all_degrades(self, runner, project):
        result = invoke(runner, project,
                        ["loop", INTENT, "--n-valid", "5", "--n-violating", "1"],
                        input="r\n" * 8)
        assert result.exit_code == 0, result.output
        assert "degraded_no_contracts" in result.output


class TestStepwiseCommands:
    def test_decompose_then_generate_then_review(self, runner, project):
        result = invoke(runner, project, ["decompose", INTENT])
        assert result.exit_code == 0
        assert "Account constructor" in result.output

        result = invoke(runner, project, ["contracts", "generate", "account-constructor"])
        assert result.exit_code == 0
        assert result.output.count("precondition") == 4

        result = invoke(runner, project, ["contracts", "review"], provider=False,
                        input="a\n" * 8)
        assert result.exit_code == 0
        assert "reviewed 8 contracts" in result.output

        store = ProjectStore.load(str(project / "project.json"))
        statuses = [r["status"] for r in store.nodes["contract"].values()]
        assert statuses.count("approved") == 8

    def test_review_with_nothing_pending(self, runner, project):
        result = invoke(runner, project, ["contracts", "review"], provider=False)
        assert result.exit_code == 0
        assert "no contracts awaiting review" in result.output

    def test_review_edit_path(self, runner, project):
        invoke(runner, project, ["decompose", INTENT])
        invoke(runner, project, ["contracts", "generate", "account-constructor"])
        # edit the first clause, approve the rest
        result = invoke(runner, project, ["contracts", "review"], provider=False,
                        input="e\npin >= 0\n" + "a\n" * 7)
        assert result.exit_code == 0
        store = ProjectStore.load(str(project / "project.json"))
        assert len(store.nodes["contract"]) == 9  # 8 originals + 1 revision
        revised = [r for r in store.nodes["contract"].values()
                   if r.get("revision_of")]
        assert len(revised) == 1
        assert revised[0]["status"] == "approved"
        assert revised[0]["provenance"] == "human_authored"


class TestVerify:
    def test_buggy_variant_exits_3_with_failure_table(self, runner, converged_project):
        result = invoke(runner, converged_project,
                        ["verify", "account-constructor", "--variant", "buggy"],
                        provider=False)
        assert result.exit_code == 3
        assert "missing_rejection" in result.output

    def test_fixed_variant_exits_0(self, runner, converged_project):
        result = invoke(runner, converged_project,
                        ["verify", "account-constructor", "--variant", "fixed"],
                        provider=False)
        assert result.exit_code == 0
        assert "failed: 0" in result.output

    def test_default_subject_is_latest_code_unit(self, runner, converged_project):
        # the golden loop's last artifact is the fixed variant
        result = invoke(runner, converged_project, ["verify", "account-constructor"],
                        provider=False)
        assert result.exit_code == 0


class TestReport:
    def test_prints_latest_summary(self, runner, converged_project):
        result = invoke(runner, converged_project, ["report", "account-constructor"],
                        provider=False)
        assert result.exit_code == 0
        assert "cases:" in result.output

    def test_json_output_parses(self, runner, converged_project):
        result = invoke(runner, converged_project,
                        ["report", "account-constructor", "--json"], provider=False)
        document = json.loads(result.output)
        assert "summary" in document

    def test_no_reports(self, runner, project):
        invoke(runner, project, ["decompose", INTENT])
        result = invoke(runner, project, ["report", "account-constructor"],
                        provider=False)
        assert result.exit_code == 0
        assert "no reports" in result.output


class TestTaskResolution:
    def test_unknown_task(self, runner, converged_project):
        result = invoke(runner, converged_project, ["report", "no-such-task"],
                        provider=False)
        assert result.exit_code == 4

    def test_full_id_accepted(self, runner, converged_project):
        store = ProjectStore.load(str(converged_project / "project.json"))
        task_id = next(iter(store.nodes["task"]))
        result = invoke(runner, converged_project, ["report", task_id], provider=False)
        assert result.exit_code == 0


class TestProviderSpec:
    def test_missing_provider(self, runner, project):
        result = invoke(runner, project, ["decompose", INTENT], provider=False)
        assert result.exit_code == 4
        assert "--provider" in result.output

    def test_unknown_provider_spec(self, runner, project, tmp_path):
        result = runner.invoke(
            main,
            ["--project", str(project), "--provider", "wat", "decompose", INTENT],
        )
        assert result.exit_code == 4

    def test_live_provider_needs_env(self, runner, project, monkeypatch):
        for variable in ("CONTRACTLOOP_BASE_URL", "CONTRACTLOOP_API_KEY",
                         "CONTRACTLOOP_MODEL"):
            monkeypatch.delenv(variable, raising=False)
        result = runner.invoke(
            main,
            ["--project", str(project), "--provider", "live", "decompose", INTENT],
        )
        assert result.exit_code == 4
        assert "CONTRACTLOOP_BASE_URL" in result.output
