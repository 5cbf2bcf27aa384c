import json
from pathlib import Path

import pytest

from bvbounds import cli
from bvbounds import scenarios as sc

GOLDEN = Path(__file__).parent / "golden"

GOLDEN_CASES = {
    "divergence_iso_normal": ["divergence", "--family", "iso-normal", "--theta", "0", "--theta-prime", "1", "--kind", "all"],
    "matrix_bernoulli": ["matrix", "--family", "bernoulli", "--points", "0.5;0.6;0.4"],
    "bound_iso_normal": ["bound", "--family", "iso-normal", "--theta", "0", "--theta-prime", "1"],
}


def run(argv, capsys):
    rc = cli.main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def close(a, b, path="$"):
    if isinstance(a, dict):
        assert set(a) == set(b), path
        for k in a:
            close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            close(x, y, f"{path}[{i}]")
    elif isinstance(a, float) and isinstance(b, float):
        assert a == pytest.approx(b, rel=1e-12, abs=1e-14), path
    else:
        assert a == b, path


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden_outputs(name, capsys):
    rc, out, _ = run(GOLDEN_CASES[name], capsys)
    assert rc == 0
    close(json.loads(out), json.loads((GOLDEN / f"{name}.json").read_text()))


def test_divergence_chi2_example(capsys):
    rc, out, _ = run(["divergence", "--family", "iso-normal", "--theta", "0", "--theta-prime", "1", "--kind", "chi2"], capsys)
    assert rc == 0
    assert "1.718281828459045" in out


def test_csv_format(capsys):
    rc, out, _ = run(["matrix", "--family", "poisson", "--points", "1;2;2", "--format", "csv"], capsys)
    assert rc == 0
    rows = [list(map(float, line.split(","))) for line in out.strip().splitlines()]
    assert rows == [[pytest.approx(1.718281828459045)] * 2] * 2


def test_monte_carlo_command_requires_seed(capsys):
    argv = ["estimate", "--family", "iso-normal", "--theta", "0,1", "--estimator", "soft-threshold",
            "--threshold", "1", "--reps", "2000"]
    rc, _, err = run(argv, capsys)
    assert rc == 2 and "seed" in err
    rc, out, _ = run(argv + ["--seed", "3"], capsys)
    assert rc == 0
    first = out
    rc, out, _ = run(argv + ["--seed", "3"], capsys)
    assert out == first


def test_small_reps_rejected(capsys):
    rc, _, err = run(["estimate", "--family", "iso-normal", "--theta", "0", "--seed", "1", "--reps", "10"], capsys)
    assert rc == 2 and "reps" in err


def test_bad_arguments_exit_2(capsys):
    assert run(["divergence", "--family", "nonsense", "--theta", "0", "--theta-prime", "1"], capsys)[0] == 2
    assert run(["no-such-command"], capsys)[0] == 2
    assert run(["divergence", "--family", "bernoulli", "--theta", "1.5", "--theta-prime", "0.5"], capsys)[0] == 2


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('seed = 1\n\n[family]\nkind = "iso-normal"\nsigmaa = 2.0\n')
    rc, _, err = run(["divergence", "--config", str(cfg), "--theta", "0", "--theta-prime", "1"], capsys)
    assert rc == 2
    assert "sigmaa" in err and "line 5" in err


def test_config_unknown_section_and_deep_nesting(tmp_path, capsys):
    cfg = tmp_path / "a.toml"
    cfg.write_text("[plotting]\ncolor = 1\n")
    assert run(["divergence", "--config", str(cfg)], capsys)[0] == 2
    cfg.write_text("[family.inner]\nkind = 1\n")
    assert run(["divergence", "--config", str(cfg)], capsys)[0] == 2


def test_config_supplies_values_and_flags_override(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('[family]\nkind = "iso-normal"\n\n[params]\ntheta = "0"\ntheta_prime = "1"\n\n[divergence]\nkind = "kl"\n')
    rc, out, _ = run(["divergence", "--config", str(cfg)], capsys)
    assert rc == 0 and json.loads(out)["result"]["value"] == pytest.approx(0.5)
    rc, out, _ = run(["divergence", "--config", str(cfg), "--theta-prime", "2"], capsys)
    assert json.loads(out)["result"]["value"] == pytest.approx(2.0)


def test_scenario_writes_outputs(tmp_path, capsys):
    rc, out, _ = run(["scenario", "--id", "bias-blowup", "--seed", "5", "--reps", "5000",
                      "--out-dir", str(tmp_path), "--plots"], capsys)
    assert rc == 0
    payload = json.loads(out)
    assert json.loads((tmp_path / "bias-blowup.json").read_text()) == payload
    assert (tmp_path / "bias-blowup_bounds.csv").read_text().startswith("id,inequality,lhs,rhs,slack,holds")
    assert (tmp_path / "bias-blowup_bias_blowup.csv").exists()
    assert (tmp_path / "bias-blowup_bias_blowup.svg").read_text().startswith("<svg")
    assert not list(tmp_path.glob("*.tmp*"))


def test_scenario_unknown_id(capsys):
    assert run(["scenario", "--id", "nope", "--seed", "1"], capsys)[0] == 2


def test_failed_verdict_exits_1(monkeypatch, capsys):
    def failing(seed=0, reps=None):
        res = sc.ScenarioResult("always-fails", {"seed": seed})
        res.check("impossible", False, "none")
        return res

    monkeypatch.setitem(sc.SCENARIOS, "always-fails", failing)
    rc, out, _ = run(["scenario", "--id", "always-fails", "--seed", "1"], capsys)
    assert rc == 1
    assert json.loads(out)["passed"] is False


def test_atomic_write_replaces_whole_file(tmp_path):
    p = tmp_path / "x.json"
    cli.atomic_write(p, "old")
    cli.atomic_write(p, "new")
    assert p.read_text() == "new"
    assert [q.name for q in tmp_path.iterdir()] == ["x.json"]


def test_verify_all(capsys):
    rc, out, _ = run(["verify-all", "--seed", "7"], capsys)
    assert rc == 0
