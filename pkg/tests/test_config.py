import pytest

from degenlab.config import load_config, parse_config_text
from degenlab.errors import ConfigError

MINIMAL = """
[problem a]
lambda = 1
T = 0.1
u0 = bump
u0.center = 2
g0 = zero

[run]
n_schedule = 10
grid_count = 60
dt = 0.01
"""


def test_minimal_config_parses():
    cfg = parse_config_text(MINIMAL)
    (p,) = cfg.problems
    assert p.name == "a" and p.lam == 1.0 and p.T == 0.1
    assert p.u0 == ("bump", {"center": 2.0})
    assert cfg.n_schedule == (10,) and cfg.grid_count == 60
    assert cfg.audits.empty and cfg.oracles == ()


def test_all_problems_reported_at_once():
    text = """
[problem a]
T = 1
u0 = nosuch
g0 = bump
g0.amplitude = 50

[run]
n_schedule = 1
dt = 0.1
grid_count = two

[audits]
lp = 0, 5
delta = 1.5

[oracles]
magic = yes

[extra]
"""
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    msgs = "\n".join(info.value.problems)
    for frag in ("nosuch", "grid_count", "n_schedule", "lp entry 5", "delta 1.5", "magic", "[extra]"):
        assert frag in msgs, frag
    assert len(info.value.problems) >= 7


def test_m_matrix_condition_rejected_before_compute():
    text = MINIMAL.replace("g0 = zero", "g0 = bump\ng0.amplitude = 200")
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert any("M-matrix" in p for p in info.value.problems)


def test_dt_must_divide_T():
    with pytest.raises(ConfigError) as info:
        parse_config_text(MINIMAL.replace("dt = 0.01", "dt = 0.03"))
    assert any("divide" in p for p in info.value.problems)


def test_missing_T_and_bad_theta():
    text = MINIMAL.replace("T = 0.1\n", "") + "\n[problem b]\nT = 1\nu0 = bump\ng0 = dipole\ntheta = 0.01\n"
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert any("T is required" in p for p in info.value.problems)
    assert any("theta" in p for p in info.value.problems)


def test_interior_and_converge_sections():
    text = MINIMAL + """
[audits]
interior = 0.05, 1, 2
tails_k = 1, 2

[converge]
mode = space
levels = 2
solution = zero
"""
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert any("levels" in p for p in info.value.problems)
    cfg = parse_config_text(text.replace("levels = 2", "levels = 3"))
    assert cfg.audits.interior == (0.05, 1.0, 2.0) and cfg.converge.solution == "zero"


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.ini")


def test_shipped_configs_validate():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs"
    files = sorted(root.glob("*.ini"))
    assert files
    for f in files:
        load_config(f)
