"""CLI subcommands: determinism, exit codes, output shape."""

import json

import pytest

from regretkit.cli import main


@pytest.fixture
def problem_file(tmp_path, capsys):
    path = tmp_path / "demo.json"
    assert main(["generate", "--preset", "trend-10x5", "--seed", "4", "--out", str(path)]) == 0
    capsys.readouterr()
    return path


class TestValidate:
    def test_valid(self, problem_file, capsys):
        assert main(["validate", str(problem_file)]) == 0
        assert "ok:" in capsys.readouterr().out

    def test_broken_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"format": "gai-workbench-problem", "version": 1}')
        assert main(["validate", str(bad)]) == 1
        assert "invalid" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["validate", str(tmp_path / "none.json")]) == 1


class TestSolve:
    def test_prints_recommendation(self, problem_file, capsys):
        assert main(["solve", str(problem_file)]) == 0
        out = capsys.readouterr().out
        assert "recommendation:" in out
        assert "witness:" in out
        assert "minimax regret:" in out

    def test_singleton_space_zero(self, tmp_path, capsys):
        # degenerate priors pin the utility: minimax regret is zero
        from regretkit.simulate import GeneratorSpec, PriorSpec, generate_problem

        doc = generate_problem(
            GeneratorSpec(
                n_attributes=4, domain_range=(2, 2), window=2, overlap=1, seed=1,
                prior=PriorSpec(lvf_range=(0.5, 0.5), anchor_top_range=(2.0, 2.0),
                                anchor_bottom_range=(-1.0, -1.0)),
            )
        )
        path = tmp_path / "singleton.json"
        doc.save(path)
        assert main(["solve", str(path)]) == 0
        out = capsys.readouterr().out
        mmr = float(out.splitlines()[-2].split(":")[1])
        assert abs(mmr) < 1e-9

    def test_space_file(self, problem_file, tmp_path, capsys):
        from regretkit.document import load_problem

        base = main(["solve", str(problem_file)])
        first = capsys.readouterr().out
        doc = load_problem(problem_file)
        lo, hi = doc.anchor_priors[0][0, 0], doc.anchor_priors[1][0, 0]
        constraints = [
            {
                "type": "bound",
                "param": {"kind": "anchor_top", "factor": 0},
                "lo": None,
                "hi": (lo + hi) / 2,
            }
        ]
        extra = tmp_path / "space.json"
        extra.write_text(json.dumps(constraints))
        assert main(["solve", str(problem_file), "--space", str(extra)]) == 0
        second = capsys.readouterr().out
        mmr_first = float(first.splitlines()[-2].split(":")[1])
        mmr_second = float(second.splitlines()[-2].split(":")[1])
        assert mmr_second <= mmr_first + 1e-9


class TestElicit:
    def test_simulated_deterministic(self, problem_file, capsys):
        args = ["elicit", str(problem_file), "--simulate", "--seed", "7",
                "--max-queries", "6", "--strategy", "AB+LB"]
        assert main(args) == 0
        out1 = capsys.readouterr().out
        assert main(args) == 0
        out2 = capsys.readouterr().out
        assert out1 == out2
        lines = out1.strip().splitlines()
        assert lines[0] == "step,queryType,detail,answer,mmr,normalizedMmr"
        mmrs = [float(l.split(",")[-2]) for l in lines[1:-2]]
        assert all(b <= a + 1e-9 for a, b in zip(mmrs, mmrs[1:]))

    def test_seed_changes_trace(self, problem_file, capsys):
        args = lambda s: ["elicit", str(problem_file), "--simulate", "--seed", s,
                          "--max-queries", "4"]
        main(args("1"))
        out1 = capsys.readouterr().out
        main(args("2"))
        out2 = capsys.readouterr().out
        assert out1 != out2


class TestExperiment:
    def test_runs_and_emits_csv(self, tmp_path, capsys):
        spec = {
            "problem": {"preset": "trend-10x5", "seed": 11},
            "strategies": ["AB+LB"],
            "runs": 1,
            "max_queries": 3,
            "seed": 2,
        }
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(spec))
        assert main(["experiment", str(path)]) == 0
        out1 = capsys.readouterr().out
        assert out1.splitlines()[0] == "strategy,queryIndex,meanMMR,stddev,runs"
        assert main(["experiment", str(path)]) == 0
        assert capsys.readouterr().out == out1


class TestGenerate:
    def test_stdout_canonical(self, capsys):
        assert main(["generate", "--preset", "apartment-shape", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        obj = json.loads(out)
        assert obj["name"] == "apartment-shape"
        assert len(obj["feasibility"]["catalog"]) == 186
