import math
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from laxlab import config as cfgmod
from laxlab.errors import ParseError, ValidationError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

MINIMAL = """
[params]
m_s = 1.5
beta = 0.5

[grid]
n = 64
length = 20.0

[time]
dt = 0.05
t_end = 0.5
"""


def test_minimal_defaults():
    cfg = cfgmod.parse_config(MINIMAL)
    p = cfg.params
    assert p.lam == p.mu == 3.0
    assert p.m_f == 1.0 and p.g == 0.0 and p.theta0 == 0.0
    assert cfg.preset == "gaussian_packet" and cfg.seed == 0
    assert cfg.observers.connection == "a_x" and cfg.observers.stride == 1
    assert cfg.n_steps == 10


def test_theta_out_of_range():
    with pytest.raises(ValidationError) as exc:
        cfgmod.parse_config(MINIMAL.replace("beta = 0.5", "beta = 0.5\ntheta0 = 2.0"))
    assert exc.value.key == "params.theta0"


@pytest.mark.parametrize(
    "patch, key",
    [
        (("[time]", "[time]\nfoo = 1"), "time.foo"),
        (("dt = 0.05", "dt = 0.3"), "time.dt"),
        (("t_end = 0.5", "t_end = -1.0"), "time.t_end"),
        (("n = 64", "n = 4"), "grid.n"),
        (("n = 64", 'n = "many"'), "grid.n"),
        (("m_s = 1.5", "m_s = 0.0"), "params.m_s"),
    ],
)
def test_validation_names_key(patch, key):
    with pytest.raises(ValidationError) as exc:
        cfgmod.parse_config(MINIMAL.replace(*patch))
    assert exc.value.key == key


def test_cfl_override_allowed():
    text = MINIMAL.replace("dt = 0.05", "dt = 0.3\nallow_cfl_violation = true")
    assert cfgmod.parse_config(text).allow_cfl_violation


def test_observer_and_preset_validation():
    base = MINIMAL + "\n[observers]\n"
    with pytest.raises(ValidationError):
        cfgmod.parse_config(base + 'connection = "a_t"\n')
    with pytest.raises(ValidationError):
        cfgmod.parse_config(base + 'monodromy = ["0"]\n')
    with pytest.raises(ValidationError):
        cfgmod.parse_config(base + "charges = 9\n")
    with pytest.raises(ValidationError) as exc:
        cfgmod.parse_config(MINIMAL + '\n[initial]\npreset = "homogeneous"\nwidth = 2.0\n')
    assert exc.value.key == "initial.width"


def test_parse_error_reports_line():
    text = "[params]\nm_s = 1.0\nbeta = = 2\n"
    with pytest.raises(ParseError) as exc:
        cfgmod.parse_config(text)
    assert exc.value.line == 3


@pytest.mark.parametrize("name", ["minimal.toml", "packet.toml", "sinh_gordon.toml"])
def test_shipped_configs_round_trip(name):
    cfg = cfgmod.load_config(CONFIGS / name)
    assert cfgmod.parse_config(cfgmod.emit_config(cfg)) == cfg


@given(
    theta=st.floats(0, math.pi / 2),
    g=st.floats(-5, 5),
    n=st.integers(8, 512),
    seed=st.integers(0, 2**31),
    zr=st.floats(0.1, 5),
    zi=st.floats(-5, 5),
)
def test_round_trip_property(theta, g, n, seed, zr, zi):
    cfg = cfgmod.parse_config(MINIMAL)
    cfg = cfgmod.apply_overrides(cfg, theta0=theta, g=g, n=n, dt=0.25 * 20.0 / n, seed=seed)
    raw = cfgmod.to_dict(cfg)
    raw["observers"]["monodromy"] = [repr(complex(zr, zi))]
    cfg = cfgmod.from_dict(raw)
    again = cfgmod.parse_config(cfgmod.emit_config(cfg))
    assert again == cfg
    assert cfgmod.emit_config(again) == cfgmod.emit_config(cfg)


def test_overrides_take_precedence():
    cfg = cfgmod.load_config(CONFIGS / "packet.toml")
    out = cfgmod.apply_overrides(cfg, theta0=math.pi / 4, output_dir="elsewhere", n_max=2)
    assert out.params.theta0 == math.pi / 4
    assert out.output_dir == "elsewhere" and out.observers.charges == 2
    assert out.grid == cfg.grid
    assert cfgmod.with_theta(cfg, 0.3).params.theta0 == 0.3
