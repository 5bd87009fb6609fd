from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frontflow import anisotropy, config, experiments, norms

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@given(a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_linear_fit_exact_line(a, b):
    x = np.array([1.0, 2.0, 4.0])
    fa, fb, r2 = experiments.linear_fit_r2(x, a * x + b)
    assert fa == pytest.approx(a, abs=1e-9)
    assert fb == pytest.approx(b, abs=1e-9)
    assert r2 == pytest.approx(1.0) or abs(a) < 1e-12


def test_linear_fit_through_origin():
    a, b, r2 = experiments.linear_fit_r2([1, 2, 3], [2.1, 3.9, 6.0], through_origin=True)
    assert b == 0.0 and a == pytest.approx(2.0, rel=0.02) and 0.99 < r2 <= 1.0


def test_circle_law():
    assert experiments.circle_law(1.0, 0.25, 1.0, 0.5) == pytest.approx(np.sqrt(0.5))
    assert experiments.circle_law(1.0, 0.25, 1.0, 2.0) == 0.0


def test_random_specs_are_seeded_and_non_degenerate():
    desc = norms.pnorm(4.0)
    a = experiments.random_quadratic_specs(2, 4, 3, desc)
    b = experiments.random_quadratic_specs(2, 4, 3, desc)
    assert all(np.array_equal(x.m, y.m) and np.array_equal(x.p, y.p) for x, y in zip(a, b))


def test_wulff_diameter_euclidean():
    tab = anisotropy.build_direction_table(norms.euclidean(), 1.5, 256)
    mu = anisotropy.mobility_mu(norms.euclidean(), 1.5, [1, 0])
    assert experiments.wulff_diameter(2.0, tab) == pytest.approx(4 * mu, rel=1e-4)


def test_halved_domain_keeps_resolution_ratio():
    cfg = config.parse_config(CONFIGS / "shrink_circle.cfg")
    d2, h2 = experiments.halved_domain(cfg)
    assert h2 == cfg.get("flow", "h") / 2
    assert d2.cells == 800


def test_splitting_rejects_fractional_periods():
    cfg = config.parse_config(CONFIGS / "splitting.cfg")
    f0, tab = experiments.pde_setup(cfg, cfg.initial_set())
    with pytest.raises(config.ConfigError, match="periods"):
        experiments.splitting_run(f0, tab, cfg.forcing(), 0.2, 0.03, 1e-4)


def test_engine_requirements(tmp_path):
    cfg = config.parse_config(CONFIGS / "splitting.cfg")
    values = {s: dict(v) for s, v in cfg.values.items()}
    values["flow"]["engine"] = "threshold"
    bad = config.ExperimentConfig(values)
    with pytest.raises(config.ConfigError, match="flow.engine"):
        experiments.run_scenario("splitting", bad, tmp_path)
    with pytest.raises(config.ConfigError, match="unknown scenario"):
        experiments.run_scenario("nothing", cfg, tmp_path)


def test_shrink_circle_requires_euclidean(tmp_path):
    text = (CONFIGS / "shrink_circle.cfg").read_text().replace("kind = euclidean", "kind = pnorm\nq = 4.0")
    cfg = config.parse_config_text(text)
    with pytest.raises(config.ConfigError, match="euclidean"):
        experiments.run_scenario("shrink_circle", cfg, tmp_path)


def test_distance_requires_nesting(tmp_path):
    text = (CONFIGS / "distance.cfg").read_text().replace("outer = ball 0 0 1", "outer = ball 0.8 0 0.3")
    cfg = config.parse_config_text(text)
    with pytest.raises(config.ConfigError, match="contain"):
        experiments.run_scenario("distance", cfg, tmp_path)


def test_small_convexity_run(tmp_path):
    text = (CONFIGS / "convexity.cfg").read_text().replace("n_steps = 200", "n_steps = 10").replace("formats = csv pgm", "formats = csv grid")
    code, res = experiments.run_scenario("convexity", config.parse_config_text(text), tmp_path)
    assert code == 0
    assert len(res.rows) == 11
    assert sorted(p.name for p in tmp_path.glob("*.grid")) == ["frame_000000.grid"]


def test_threshold_wulff_engine(tmp_path):
    text = """[domain]
n = 2
extent = 1.0
cells = 100
margin = 2

[flow]
alpha = 1.5
h = 0.0064
engine = threshold

[norm]
kind = euclidean

[forcing]
kind = constant
value = 8.0

[initial]
set = ball 0 0 0.3

[output]
formats = csv

[scenario]
name = wulff
t_end = 0.064
tolerance = 10.0
"""
    code, res = experiments.run_scenario("wulff", config.parse_config_text(text), tmp_path)
    assert [round(r[0], 6) for r in res.rows] == [0.032, 0.064]
