import math

import pytest

from filmcascade.config import ExperimentConfig, load_config, parse_config
from filmcascade.errors import ConfigError


def test_defaults_and_parsing():
    cfg = parse_config("""
[experiment]
kind = compare
seed = 7
[params]
delta = 0.2, 0.1, 0.05
epsilon = delta
alpha = pi/6
[initial]
modes = 1:0.1, 2:0.05:pi/2
[gates]
slope_min = 1.2
""")
    assert cfg.kind == "compare" and cfg.seed == 7
    assert cfg.deltas == (0.2, 0.1, 0.05)
    assert cfg.alpha == pytest.approx(math.pi / 6)
    assert cfg.modes == ((1, 0.1, 0.0), (2, 0.05, math.pi / 2))
    assert cfg.gates.slope_min == 1.2 and cfg.gates.slope_max == 2.5
    assert cfg.epsilon_for(0.05) == 0.05
    assert cfg.params_for(0.1).epsilon == 0.1


@pytest.mark.parametrize("text", [
    "[params]\nbogus = 1\n",
    "[nosuch]\nkind = compare\n",
    "[params]\ndelta = 0.1, 0.2\n",
    "[experiment]\nkind = dance\n",
    "[initial]\nmodes = 0:1\n",
    "[params]\nalpha = __import__('os')\n",
    "[run]\nhorizon = forever\n",
    "[output]\nformats = csv, pdf\n",
    "not an ini file",
])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_fixed_epsilon_and_inverse_horizon():
    cfg = parse_config("[params]\nepsilon = 0.05\n[run]\nhorizon = inverse_epsilon\n")
    assert cfg.epsilon_for(0.2) == 0.05
    assert cfg.time_scale(0.2) == pytest.approx(20.0)


def test_physical_section():
    cfg = parse_config("""
[physical]
rho = 1000
g = 9.8
alpha = pi/4
mu = 1e-3
sigma = 0.072
h0 = 1e-4
l0 = 1e-2
a0 = 1e-5
""")
    assert cfg.deltas == (pytest.approx(0.01),)
    assert cfg.params_for(0.01).U0 is not None
    with pytest.raises(ConfigError):
        parse_config("[physical]\nrho = 1000\n")


def test_overrides_and_files(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[experiment]\nseed = 1\n", encoding="utf-8")
    assert load_config(p, {"seed": 5, "out_dir": None}).seed == 5
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")
    assert ExperimentConfig().with_(nx=64).nx == 64
