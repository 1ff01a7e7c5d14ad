import json

import numpy as np
import pytest

from seplind.cli import main
from seplind.observables import TimeSeries
from seplind.runner import (
    EXIT_ABORTS,
    EXIT_INVALID,
    ConfigError,
    compare,
    entanglement_detected,
    load_config,
    observable_slug,
    parse_config,
    run,
    with_overrides,
    write_outputs,
)

SMALL = """
scenario: bell_decay
evolution: {t_max: 1.0, tau: 0.2, n_trajectories: 100, seed: 4}
batches: 10
bootstrap_resamples: 30
"""


def ts(mean, sd, label=""):
    return TimeSeries(np.arange(len(mean)) * 0.1, mean, sd, label)


# -- parsing -----------------------------------------------------------------

def test_minimal_config_defaults():
    cfg = parse_config("scenario: bell_decay\n")
    assert cfg.engines == ("full_deterministic", "full_mcwf", "separable_mcwf", "oracles")
    assert cfg.evolution.t_max == 2.0 and cfg.evolution.tau == 0.2
    assert cfg.evolution.n_trajectories == 600 and cfg.evolution.seed == 0
    assert cfg.batches == 20 and cfg.bootstrap_resamples == 200
    assert cfg.observables == ("negativity", "population:00", "population:phi+,phi-", "population:11")
    assert cfg.raw["scenario"]["rates"] == [9.0, 1.0, 1.0, 9.0]


def test_swap_defaults():
    cfg = parse_config("scenario: {name: swap_exchange, gamma: 0.5}")
    assert cfg.scenario.parameters["gamma"] == 0.5
    assert "population:01" in cfg.observables


def test_rates_as_mapping():
    cfg = parse_config("scenario: {name: bell_decay, rates: {g_11_phiplus: 2}}")
    assert cfg.scenario.parameters["rates"] == [2.0, 1.0, 1.0, 9.0]


@pytest.mark.parametrize("text, path", [
    ("scenario: bell_decay\nevolution: {n_trajectories: 601}", "batches"),
    ("scenario: bell_decay\nfoo: 1", "foo"),
    ("scenario: bell_decay\nevolution: {tua: 0.1}", "evolution.tua"),
    ("scenario: {name: bell_decay, rates: [1, 2, 3]}", "scenario.rates"),
    ("scenario: {name: bell_decay, rates: [1, -2, 3, 4]}", "scenario.rates[1]"),
    ("scenario: nope", "scenario.name"),
    ("scenario: bell_decay\nengines: [full_mcwf, warp]", "engines[1]"),
    ("scenario: bell_decay\nobservables: [population:99]", "observables[0]"),
    ("scenario: bell_decay\nevolution: {t_max: 1.0, tau: 0.3}", "evolution"),
    ("scenario: {name: swap_exchange, rates: [1, 1, 1, 1]}", "scenario.rates"),
    ("scenario: custom", "scenario.model"),
])
def test_invalid_configs_name_the_field(text, path):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.path == path


def test_non_hermitian_custom_hamiltonian():
    text = json.dumps({
        "scenario": {
            "name": "custom",
            "model": {"dim_a": 1, "dim_b": 2, "hamiltonian": [[0, 1], [0, 0]]},
            "initial": {"psi_a": [1], "psi_b": [1, 0]},
        }
    })
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.path == "scenario.model" and "ermitian" in str(info.value)


def test_custom_complex_entries():
    text = json.dumps({
        "scenario": {
            "name": "custom",
            "model": {
                "dim_a": 2, "dim_b": 1,
                "hamiltonian": [[1, [0, -1]], [[0, 1], -1]],
                "lindblads": [[[0, 0.5], [0, 0]]],
            },
            "initial": {"psi_a": [[0, 1], 1], "psi_b": [1]},
        },
        "engines": ["full_deterministic"],
    })
    cfg = parse_config(text)
    assert cfg.scenario.model.hamiltonian[0, 1] == -1j
    assert np.allclose(cfg.scenario.initial.psi_a, np.array([1j, 1]) / np.sqrt(2))
    assert cfg.observables == ("negativity", "purity")


def test_invalid_yaml():
    with pytest.raises(ConfigError):
        parse_config("scenario: [unclosed")


def test_overrides():
    cfg = with_overrides(parse_config(SMALL), seed=9, output="elsewhere")
    assert cfg.evolution.seed == 9 and cfg.output == "elsewhere"


def test_observable_slug():
    assert observable_slug("population:phi+,phi-") == "population_phiplus_phiminus"


# -- comparison --------------------------------------------------------------

def test_compare_flags_significant_points():
    a = ts([0.0, 0.5, 0.5], [0.01, 0.01, 0.01], "a")
    b = ts([0.0, 0.45, 0.49], [0.01, 0.01, 0.01], "b")
    out = compare(a, b)
    assert out["significant"] == [False, True, False]
    assert out["band"][1] == pytest.approx(3 * np.hypot(0.01, 0.01))
    assert out["any_significant"]


def test_compare_zero_bands_flag_any_difference():
    out = compare(ts([0, 1], [0, 0]), ts([0, 1 + 1e-9], [0, 0]))
    assert out["significant"] == [False, True]


def test_compare_rejects_mismatched_grids():
    with pytest.raises(ValueError):
        compare(ts([0, 1], [0, 0]), ts([0, 1, 2], [0, 0, 0]))


def test_entanglement_detected():
    assert entanglement_detected(ts([0, 0.1, 0.0], [0, 0.01, 0]))
    assert not entanglement_detected(ts([0, 0.01, 0.0], [0, 0.01, 0]))


# -- runs --------------------------------------------------------------------

def test_oracle_only_run_uses_no_trajectories(tmp_path):
    cfg = parse_config("scenario: swap_exchange\nengines: [oracles]")
    res = run(cfg)
    assert res.manifest["engines"]["oracles"]["trajectories"] == 0
    assert set(e for e, _ in res.series) == {"oracle_full", "oracle_restricted"}
    assert all(np.all(s.stddev == 0) for s in res.series.values())


def test_custom_scenario_without_oracle():
    text = json.dumps({
        "scenario": {
            "name": "custom",
            "model": {"dim_a": 2, "dim_b": 2, "hamiltonian": np.kron(np.diag([1, -1]), np.eye(2)).tolist()},
            "initial": {"psi_a": [1, 1], "psi_b": [1, 0]},
        },
        "engines": ["oracles", "full_deterministic"],
    })
    res = run(parse_config(text))
    assert "note" in res.manifest["engines"]["oracles"]
    assert res.series[("full_deterministic", "purity")].mean == pytest.approx(1.0)


def test_bell_run_outputs(tmp_path):
    cfg = parse_config(SMALL)
    res = run(cfg)
    files = write_outputs(res, tmp_path)
    names = {p.name for p in files}
    assert "full_mcwf__negativity.csv" in names
    assert "oracle_full__population_phiplus_phiminus.csv" in names
    assert len(files) == 4 * 4
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["seed"] == 4 and manifest["config"]["batches"] == 10
    report = json.loads((tmp_path / "comparison.json").read_text())
    assert report["dynamical_entanglement_detected"] is True
    pairs = {(c["a"].split(":")[0], c["b"].split(":")[0]) for c in report["comparisons"]}
    assert ("full_mcwf", "separable_mcwf") in pairs
    # restricted dynamics never produces entanglement
    neg = res.series[("separable_mcwf", "negativity")]
    assert np.all(neg.mean < 1e-10)


def test_abort_fraction_exit_code():
    # XX + YY flips |01> but its reduced operators vanish on that state
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    flipflop = np.kron(sx, sx) + np.kron(sy, sy)
    text = json.dumps({
        "scenario": {
            "name": "custom",
            "model": {"dim_a": 2, "dim_b": 2, "lindblads": [[[[z.real, z.imag] for z in row] for row in flipflop]]},
            "initial": {"psi_a": [1, 0], "psi_b": [0, 1]},
        },
        "engines": ["separable_mcwf"],
        "evolution": {"n_trajectories": 40},
    })
    res = run(parse_config(text))
    assert res.exit_code == EXIT_ABORTS
    assert res.manifest["errors"] and res.manifest["engines"]["separable_mcwf"]["aborted"] > 0


def test_rerun_from_manifest_reproduces_csvs(tmp_path):
    first = tmp_path / "first"
    cfg = parse_config(SMALL)
    write_outputs(run(cfg), first)
    again = with_overrides(load_config(first / "manifest.json"), output=str(tmp_path / "second"))
    write_outputs(run(again), again.output)
    for p in first.glob("*.csv"):
        assert p.read_bytes() == (tmp_path / "second" / p.name).read_bytes()


def test_two_workers_match_one(tmp_path):
    cfg = parse_config(SMALL + "engines: [full_mcwf, separable_mcwf]\n")
    a, b = run(cfg, workers=1), run(cfg, workers=2)
    for key in a.series:
        assert a.series[key].to_csv() == b.series[key].to_csv()


# -- command line ------------------------------------------------------------

def test_cli_run(tmp_path, capsys):
    path = tmp_path / "cfg.yaml"
    path.write_text(SMALL)
    code = main(["run", str(path), "--out", str(tmp_path / "out"), "--seed", "2"])
    assert code == 0
    assert json.loads((tmp_path / "out" / "manifest.json").read_text())["seed"] == 2
    assert "dynamical entanglement detected: True" in capsys.readouterr().out


def test_cli_run_invalid(tmp_path, capsys):
    path = tmp_path / "cfg.yaml"
    path.write_text("scenario: bell_decay\nbatches: 7\n")
    assert main(["run", str(path)]) == EXIT_INVALID
    assert "batches" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.yaml")]) == EXIT_INVALID


def test_cli_oracle(tmp_path):
    out = tmp_path / "o"
    assert main(["oracle", "bell_decay", "--rates", "9", "1", "1", "9", "--out", str(out)]) == 0
    neg = TimeSeries.from_csv((out / "oracle_full__negativity.csv").read_text())
    assert len(neg.times) == 11 and neg.mean.max() > 0.1
    assert main(["oracle", "swap_exchange", "--gamma", "0.5", "--tau", "0.1", "--out", str(out)]) == 0


def test_cli_oracle_rejects_bad_grid(tmp_path):
    assert main(["oracle", "swap_exchange", "--tau", "0.3", "--out", str(tmp_path)]) == EXIT_INVALID


def test_cli_check(capsys):
    assert main(["check"]) == 0
    assert "0 failure(s)" in capsys.readouterr().out
