from __future__ import annotations

from pathlib import Path

import pytest

from frontflow import config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

MINIMAL = """[domain]
n = 2
extent = 1.0
cells = 100

[flow]
alpha = 1.5
h = 0.0064

[norm]
kind = euclidean

[initial]
set = ball 0 0 0.5

[scenario]
name = shrink_circle
"""


def test_minimal_roundtrip():
    cfg = config.parse_config_text(MINIMAL)
    assert config.format_config(cfg) == MINIMAL
    assert cfg.get("domain", "margin") == 4
    assert cfg.get("flow", "engine") == "threshold"
    assert cfg.get("scenario", "tolerance") == 0.05


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.cfg")), ids=lambda p: p.stem)
def test_shipped_configs_canonical_fixed_point(path):
    cfg = config.parse_config(path)
    once = config.format_config(cfg)
    assert config.format_config(config.parse_config_text(once)) == once


def test_comments_and_blank_lines():
    text = "# header\n" + MINIMAL.replace("cells = 100", "cells = 100   # per axis")
    assert config.parse_config_text(text).get("domain", "cells") == 100


@pytest.mark.parametrize(
    "edit,message",
    [
        (("alpha = 1.5", "alpha = 2.0"), "alpha must be in [1,2)"),
        (("alpha = 1.5", "alpha = 0.5"), "alpha must be in [1,2)"),
        (("[initial]\nset = ball 0 0 0.5\n", ""), "missing section [initial]"),
        (("cells = 100", "cels = 100"), "<string>:4: unknown key domain.cels"),
        (("[norm]", "[norms]"), "unknown section [norms]"),
        (("cells = 100", "cells = many"), "<string>:4: cannot read 'many' as int"),
        (("cells = 100", "cells 100"), "<string>:4: expected 'key = value'"),
        (("cells = 100", "cells = 100\ncells = 101"), "set twice"),
        (("cells = 100", "cells = 20"), "grid too coarse"),
        (("kind = euclidean", "kind = pnorm"), "needs norm.q"),
        (("kind = euclidean", "kind = blob"), "unknown norm kind"),
        (("set = ball 0 0 0.5", "set = ball 0 0 0.99"), "margin"),
        (("name = shrink_circle", "name = nothing"), "unknown scenario"),
        (("name = shrink_circle", "name = wulff"), "missing required key scenario.t_end"),
        (("alpha = 1.5", "alpha = 1.0\nh = 0.3"), "set twice"),
        (("h = 0.0064", "h = 0.0001"), "grid too coarse"),
        (("[domain]", "n = 2\n[domain]"), "outside of any section"),
        (("[flow]", "[flow]\nengine = warp"), "flow.engine"),
    ],
)
def test_errors(edit, message):
    text = MINIMAL.replace(*edit)
    with pytest.raises(config.ConfigError) as exc:
        config.parse_config_text(text)
    assert message in str(exc.value)


def test_alpha_one_h_limit():
    text = MINIMAL.replace("alpha = 1.5", "alpha = 1.0").replace("h = 0.0064", "h = 0.2")
    with pytest.raises(config.ConfigError, match="1/\\(2e\\)"):
        config.parse_config_text(text)


def test_scenario_override():
    cfg = config.parse_config_text(MINIMAL)
    other = config.with_scenario(cfg, "convexity")
    assert other.scenario == "convexity"
    with_tol = config.parse_config_text(MINIMAL.replace("name = shrink_circle", "name = shrink_circle\ntolerance = 0.1"))
    with pytest.raises(config.ConfigError, match="does not apply"):
        config.with_scenario(with_tol, "convexity")


def test_typed_accessors():
    text = MINIMAL.replace("kind = euclidean", "kind = polygon\nvertices = 1 0 0 1 -1 0 0 -1")
    cfg = config.parse_config_text(text)
    assert cfg.norm().kind == "polygon"
    assert cfg.forcing().kind == "zero"
    assert cfg.params().beta == pytest.approx(0.08)
    assert cfg.domain().spacing == pytest.approx(0.02)


def test_missing_file(tmp_path):
    with pytest.raises(config.ConfigError, match="cannot read"):
        config.parse_config(tmp_path / "none.cfg")
