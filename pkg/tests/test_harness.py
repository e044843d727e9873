import numpy as np
import pytest

from coupledsys import parallel
from coupledsys.characteristic import CoupledSystem, dungey_transform
from coupledsys.errors import ConfigError, NotInSpace, ParameterOutOfRange
from coupledsys.harness.cli import build_parser, main, resolve_config
from coupledsys.harness.config import build_config, parse_initial, read_config_file
from coupledsys.harness.csvio import Summary, read_rows
from coupledsys.harness.rates import (
    difference_rate,
    difference_samples,
    operator_rate_discrete,
)
from coupledsys.fitting import dyadic_ladder
from coupledsys.lattice import LatticeState, save
from coupledsys.models import platoon, second_order


@pytest.fixture(autouse=True)
def _single_thread():
    yield
    parallel.set_threads(1)


# -- configuration --------------------------------------------------------

def test_config_file_sections_and_dashes(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("model = second-order\nn-max = 512\n\n[cor:frogs]\nn_max = 2048\n")
    assert read_config_file(path) == {"model": "second-order", "n_max": "512"}
    assert read_config_file(path, "cor:frogs")["n_max"] == "2048"


def test_config_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("colour = blue\n")
    with pytest.raises(ConfigError):
        read_config_file(path)


def test_precedence_flags_over_file_over_scenario(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("n_max = 777\nfrequencies = 64\n[cor:frogs]\nalpha = 0.3\n")
    args = build_parser().parse_args(["scenario", "cor:frogs", "--config", str(path), "--frequencies", "128"])
    cfg = resolve_config(args)
    assert cfg.n_max == 777  # file beats scenario default 4096
    assert cfg.frequencies == 128  # flag beats file
    assert cfg.model.params["alpha"] == 0.3  # scenario section beats scenario default
    assert cfg.initial == "delta"  # scenario default beats global default


@pytest.mark.parametrize("values", [{"frequencies": 1000}, {"n_max": 8}, {"threads": 0},
                                    {"method": "euler"}, {"n_max": "many"}])
def test_bad_config_values(values):
    with pytest.raises(ConfigError):
        build_config(values)


def test_norm_exponent_below_one_is_out_of_range():
    with pytest.raises(ParameterOutOfRange):
        build_config({"p": "0.5"})


def test_parse_initial_descriptors(tmp_path):
    assert parse_initial("delta", 2).at(0).tolist() == [1, 0]
    c = parse_initial("constant(2-1j)", 3)
    assert c.left_tail.tolist() == [2 - 1j, 0, 0] and c.width == 1
    w = parse_initial("window: 1,2 ; 3,4", 2)
    assert w.values.tolist() == [[1, 2], [3, 4]]
    a, b = parse_initial("perturbed(1, 9)", 2), parse_initial("perturbed(1,9)", 2)
    assert np.array_equal(a.values, b.values) and a.width == 16
    assert not np.array_equal(a.values, parse_initial("perturbed(1)", 2).values)
    save(w, tmp_path / "w.txt")
    assert np.array_equal(parse_initial(f"file:{tmp_path / 'w.txt'}", 2).values, w.values)
    with pytest.raises(ConfigError):
        parse_initial(f"file:{tmp_path / 'w.txt'}", 3)
    with pytest.raises(ConfigError):
        parse_initial("gaussian(1)", 1)
    with pytest.raises(NotInSpace):
        parse_initial("constant(1)", 1, p=2)


# -- rate measurements ----------------------------------------------------

def test_decoupled_system_decays_geometrically():
    system = CoupledSystem([[0.5]], [[0.0]])
    assert difference_rate(system, LatticeState.delta(), 1024).regime == "geometric"


def test_constant_kernel_data_has_zero_difference():
    z = LatticeState.constant([1.0, -0.25])
    samples = difference_samples(second_order(0.25), z, 256)
    assert all(v == 0 for _, v in samples)
    assert difference_rate(second_order(0.25), z, 256).regime == "zero"


def test_dungey_transform_keeps_the_half_rate():
    fit = operator_rate_discrete(dungey_transform(second_order(0.25), 0.2), 256, 10_000)
    assert -0.55 <= fit.slope <= -0.45


def test_summary_pass_logic():
    s = Summary()
    s.info("x", 1.0)
    s.check("y", 2.0, "<=3", True)
    assert s.passed
    s.check("z", 4.0, "<=3", False)
    assert not s.passed


# -- command line ---------------------------------------------------------

@pytest.fixture(scope="module")
def scenario_dirs(tmp_path_factory):
    base = tmp_path_factory.mktemp("scen")
    out = {}
    for name in ("cor:frogs", "cor:disc_contr", "cor:plat"):
        d = base / name.replace(":", "_")
        out[name] = (main(["scenario", name, "--out", str(d)]), d)
    return out


@pytest.mark.parametrize("name", ["cor:frogs", "cor:disc_contr", "cor:plat"])
def test_scenarios_pass_and_write_csv(scenario_dirs, name):
    status, d = scenario_dirs[name]
    assert status == 0
    headers = {
        "spectrum.csv": ["theta", "re", "im", "abs_phi", "source"],
        "cesaro.csv": ["n", "norm", "error"],
        "rates.csv": ["abscissa", "value"],
        "summary.csv": ["metric", "value", "threshold", "pass"],
        "trajectory.csv": ["step_or_time", "k", "comp", "re", "im"],
    }
    for fname, header in headers.items():
        assert (d / fname).read_text().splitlines()[0].split(",") == header
    assert all(r["pass"] == "true" for r in read_rows(d / "summary.csv"))


def test_frogs_cesaro_norms_are_exactly_one_over_n(scenario_dirs):
    _, d = scenario_dirs["cor:frogs"]
    rows = read_rows(d / "cesaro.csv")
    assert len(rows) >= 20
    assert all(float(r["norm"]) == 1 / int(r["n"]) for r in rows)


def test_platoon_profile_matches_reported_constant(scenario_dirs):
    _, d = scenario_dirs["cor:plat"]
    vals = {r["metric"]: float(r["value"]) for r in read_rows(d / "summary.csv")}
    assert vals["limit_profile_error"] <= 1e-8
    # the perturbed data has tails e0; c solves M·(c, -c/3, 0) = M·e0 in the first entry
    system = platoon(1.0)
    coupling = np.linalg.solve(system.diag.T, system.sub.T).T
    expected = (coupling @ [1, 0, 0])[0] / (coupling @ [1, -1 / 3, 0])[0]
    assert vals["profile_constant_re"] == pytest.approx(expected.real, abs=1e-12)


def test_empty_data_is_a_clean_success(tmp_path):
    assert main(["scenario", "cor:disc_contr", "--initial", "empty", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "cesaro.csv")
    assert rows and all(float(r["norm"]) == 0 for r in rows)


def test_subcommands_write_outputs(tmp_path):
    assert main(["verify", "--model", "platoon", "--out", str(tmp_path / "v")]) == 0
    assert main(["spectrum", "--model", "second-order", "--out", str(tmp_path / "s")]) == 0
    assert main(["simulate", "--model", "rendezvous", "--n-max", "64", "--out", str(tmp_path / "d")]) == 0
    assert main(["simulate", "--model", "platoon", "--t-max", "20", "--out", str(tmp_path / "c")]) == 0
    assert main(["cesaro", "--model", "rendezvous", "--n-max", "256", "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "d" / "trajectory.tails.csv").exists()
    assert len(read_rows(tmp_path / "s" / "spectrum.csv")) >= 1024
    assert [int(r["n"]) for r in read_rows(tmp_path / "r" / "cesaro.csv")] == dyadic_ladder(256)


@pytest.mark.parametrize("argv, code, tag", [
    (["verify", "--model", "rendezvous", "--alpha", "1.5"], 2, "ParameterOutOfRange"),
    (["cesaro", "--initial", "constant(1)", "--p", "2"], 2, "NotInSpace"),
    (["verify", "--frequencies", "100"], 2, "ConfigError"),
    (["simulate", "--model", "platoon", "--t-max", "1e7", "--method", "rk"], 4, "WindowOverflow"),
])
def test_exit_codes(tmp_path, capsys, argv, code, tag):
    assert main(argv + ["--out", str(tmp_path)]) == code
    assert f"error [{tag}]" in capsys.readouterr().err


def test_python_module_entry_point(tmp_path):
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "coupledsys", "verify", "--model", "second-order",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "special_form_param" in proc.stdout
