import json

import pytest

from quadvar import config, output
from quadvar.variance import ConfigError


def test_parse_and_resolve(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# acceptance run\nK = 16\ntheta = 0.6   # inline comment\n\nx = 10\npoly = 1, 1, 1\n")
    cfg = config.load_config(path, env={})
    assert (cfg.K, cfg.theta, cfg.X) == (16.0, 0.6, 10.0)
    assert str(cfg.poly) == str(config.KEYS["poly"]("1, 1, 1"))


def test_env_overrides_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("K = 16\ntheta = 0.6\nX = 10\n")
    typed, sources = config.resolve(config.parse_config(path.read_text()), env={"QUADVAR_THETA": "0.7"})
    assert typed["theta"] == 0.7 and sources["theta"] == "QUADVAR_THETA" and sources["K"] == "file"
    with pytest.raises(ConfigError):
        config.load_config(path, env={"QUADVAR_THETA": "0.2"})


@pytest.mark.parametrize(
    "text",
    ["K 16\n", "K = 16\nK = 17\n", "bogus = 1\n", "K =\n", "K = 16\ntheta = 0.6\n", "K = abc\ntheta=0.6\nX=1\n"],
)
def test_syntax_errors(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(config.ConfigSyntaxError):
        config.load_config(path, env={})


def test_number_formatting():
    assert output.fmt_value(1 / 3) == "0.333333333333"
    assert output.fmt_value(123456789.123456789) == "123456789.123"
    assert output.fmt_value(True) == "true" and output.fmt_value(None) == "null"
    assert output.fmt_fixed(-1.0000000001) == "-1.000000"
    assert output.fmt_fixed(-1e-12) == "0.000000"
    assert output.fmt_complex(complex(-0.0, -1e-13)) == "0.000000 + 0.000000i"
    assert output.fmt_complex(complex(1.5, -2.25)) == "1.500000 - 2.250000i"


def test_json_csv_text():
    rows = [{"c": 1, "r": 2 / 3, "ok": True}, {"c": 2, "r": float("nan"), "extra": "x"}]
    data = json.loads(output.to_json({"rows": rows}))
    assert data["rows"][0]["r"] == 0.666666666667 and data["rows"][1]["r"] is None
    csv_text = output.to_csv(rows)
    assert csv_text.splitlines() == ["c,r,ok,extra", "1,0.666666666667,true,", "2,nan,,x"]
    text = output.to_text(rows, {"max": 0.5})
    lines = text.splitlines()
    assert len({len(line) for line in lines[:3]}) == 1 and lines[-1] == "max: 0.5"
