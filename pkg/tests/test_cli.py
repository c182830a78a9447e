import csv
import dataclasses
import io
import json
import math

import pytest

from plateau_lab.cli import artifacts
from plateau_lab.cli.main import main
from plateau_lab.cli.runner import build_config, load_config, merge_params, payload_text
from plateau_lab.cli.scenarios import CRITERIA, REGISTRY, Context
from plateau_lab.errors import ConfigError


def test_every_criterion_has_one_scenario():
    assert sorted(CRITERIA) == list(range(1, 15))
    assert len(set(CRITERIA.values())) == 14


def test_list(capsys):
    assert main(["list", "-v"]) == 0
    out = capsys.readouterr().out
    for name in REGISTRY:
        assert name in out


def test_table_csv(capsys):
    assert main(["table", "--norms", "linf", "l1", "--mu", "busemann", "mass-star"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [r["norm"] for r in rows] == ["linf", "l1"]
    assert float(rows[0]["busemann"]) == pytest.approx(math.pi / 4)
    assert float(rows[1]["mass-star"]) == pytest.approx(2.0)


def test_run_writes_artifacts(tmp_path, capsys):
    assert main(["run", "bidisc-linf", "--level", "3", "--out", str(tmp_path), "--tol-scale", "20"]) == 0
    d = json.loads((tmp_path / "bidisc-linf" / "result.json").read_text())
    assert d["config"]["params"]["level"] == 3
    assert d["config"]["tol_scale"] == 20.0
    assert all(a["pass"] for a in d["assertions"])
    assert set(d["provenance"]) == {"code_sha256", "config_sha256"}
    assert "PASS bidisc-linf" in capsys.readouterr().out


def test_failing_assertions_give_nonzero_exit(tmp_path):
    # level 2 areas are far from the disc values at the default tolerance
    assert main(["run", "bidisc-linf", "--level", "2", "--out", str(tmp_path)]) == 1


def test_run_is_bit_reproducible(tmp_path):
    for sub in ("a", "b"):
        assert main(["run", "bidisc-l1", "--level", "3", "--out", str(tmp_path / sub), "--tol-scale", "20"]) == 0
    a = (tmp_path / "a" / "bidisc-l1" / "result.json").read_bytes()
    b = (tmp_path / "b" / "bidisc-l1" / "result.json").read_bytes()
    assert a == b


def test_config_file(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[run]\nscenario = "injective-filling"\nseed = 3\n\n[params]\nn = 2\nlevel = 2\n')
    rc = build_config(config_path=cfg)
    assert rc.scenario == "injective-filling" and rc.seed == 3 and rc.params["n"] == 2
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "injective-filling" / "result.json").exists()


@pytest.mark.parametrize("text", [
    '[run]\nscenario = "injective-filling"\nspeed = 1\n',
    '[other]\nx = 1\n',
    '[run]\nscenario = "injective-filling"\n[params]\nn = "many"\n',
    '[run]\nscenario = "injective-filling"\n[params]\nwidth = 3\n',
    '[run]\nscenario = "nope"\n',
    '[run]\nseed = "zero"\n',
    'not toml at all [',
])
def test_bad_configs(tmp_path, text):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(text)
    with pytest.raises(ConfigError):
        build_config(config_path=cfg)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_level_and_mu_mapping():
    assert build_config("euclidean-circle", level=3).params["levels"] == [3]
    assert build_config("isoperimetric-circle", mu="mass-star").params["mu"] == "mass-star"
    with pytest.raises(ConfigError):
        build_config("seminorm-sandwich", level=3)
    with pytest.raises(ConfigError):
        build_config("seminorm-sandwich", mu="busemann")
    with pytest.raises(ConfigError):
        merge_params("seminorm-sandwich", {"n": [1]})


def test_plot_round_trip(tmp_path):
    assert main(["run", "injective-filling", "--level", "2", "--out", str(tmp_path)]) == 0
    maps = list(tmp_path.rglob("*.map.json"))
    assert [m.name for m in maps] == ["square_fill.map.json"]
    out = tmp_path / "x.svg"
    assert main(["plot", str(maps[0]), "--out", str(out)]) == 0
    assert out.read_text().startswith("<?xml")


def test_svg_hatches_degenerate_triangles():
    from plateau_lab.mesh import make_disc_mesh
    from plateau_lab.plmap import affine_map, identity_map
    from plateau_lab.target import EuclideanSpace

    m = make_disc_mesh(2)
    flat = artifacts.plot_map_svg(affine_map(m, EuclideanSpace(2), [[1.0, 0.0], [0.0, 0.0]]))
    assert flat.count('fill="url(#hatch)"') == len(m.triangles)
    round_ = artifacts.plot_map_svg(identity_map(m, EuclideanSpace(2)))
    assert 'fill="url(#hatch)"' not in round_
    # conformal map: a single colour
    fills = {line.split('fill="')[1].split('"')[0] for line in round_.splitlines() if line.startswith("<polygon")}
    assert len(fills - {"none"}) == 1


def test_plain_json_values():
    import numpy as np

    out = artifacts.dumps({"a": np.float64(math.nan), "b": np.arange(2), "c": np.bool_(True), "d": math.inf})
    assert json.loads(out) == {"a": "nan", "b": [0, 1], "c": True, "d": "inf"}


def test_context_assertions():
    ctx = Context(tol_scale=2.0)
    assert ctx.close("x", 1.0, 1.1, 0.06)
    assert not ctx.at_most("y", 2.0, 1.0)
    assert ctx.at_least("z", 1.0, 0.5)
    assert not ctx.passed
    assert [a["name"] for a in ctx.assertions] == ["x", "y", "z"]


def test_payload_text_is_deterministic():
    assert payload_text("injective-filling", {"n": 3, "level": 2}) == payload_text("injective-filling",
                                                                                      {"n": 3, "level": 2})


def test_errors_become_failed_assertions(monkeypatch):
    from plateau_lab.cli import runner

    def boom(p, ctx):
        raise RuntimeError("no")

    monkeypatch.setitem(REGISTRY, "injective-filling", dataclasses.replace(REGISTRY["injective-filling"], run=boom))
    d = json.loads(runner.payload_text("injective-filling"))
    assert d["assertions"][-1]["name"] == "completed_without_error"
    assert d["results"]["error"]["type"] == "RuntimeError"
