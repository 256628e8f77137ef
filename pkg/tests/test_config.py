import pandas as pd
import pytest

from bullhurst.config import load_config, parse_config_text
from bullhurst.errors import ConfigError


MINIMAL = """\
data.daily = daily.csv
data.macro = macro.csv
data.recessions = recessions.csv
oos.start = 2002-02
pipeline.seed = 7
"""


@pytest.fixture
def config_dir(tmp_path):
    (tmp_path / "daily.csv").write_text("date,close,volume\n")
    (tmp_path / "macro.csv").write_text("yyyymm\n")
    (tmp_path / "recessions.csv").write_text("start,end\n")
    return tmp_path


def write_cfg(config_dir, text):
    p = config_dir / "run.cfg"
    p.write_text(text)
    return p


class TestParse:
    def test_minimal(self, config_dir):
        cfg = load_config(write_cfg(config_dir, MINIMAL))
        assert cfg.seed == 7
        assert cfg.oos_start == pd.Period("2002-02", "M")
        assert cfg.fdmaa.window == 215
        assert cfg.allocation.kappa == 5.0

    def test_comments_and_blanks(self):
        values = parse_config_text("# a comment\n\npipeline.seed = 3\n")
        assert values == {"pipeline.seed": 3}

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config_text("pipeline.seed = 3\nnot.a.key = 1\n")

    def test_bad_value_reports_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config_text("pipeline.seed = soon\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("pipeline.seed = 3\npipeline.seed = 4\n")

    def test_missing_required(self, config_dir):
        with pytest.raises(ConfigError, match="pipeline.seed"):
            load_config(write_cfg(config_dir, "data.daily = daily.csv\n"
                                              "data.macro = macro.csv\n"
                                              "data.recessions = recessions.csv\n"
                                              "oos.start = 2002-02\n"))

    def test_missing_file_names_key(self, config_dir):
        text = MINIMAL.replace("macro.csv", "nope.csv")
        with pytest.raises(ConfigError, match="data.macro"):
            load_config(write_cfg(config_dir, text))

    def test_relative_paths_resolved_against_config(self, config_dir):
        cfg = load_config(write_cfg(config_dir, MINIMAL))
        assert cfg.daily_path == config_dir / "daily.csv"


class TestOverrides:
    def test_environment_override(self, config_dir, monkeypatch):
        monkeypatch.setenv("BULLHURST_PIPELINE_SEED", "99")
        cfg = load_config(write_cfg(config_dir, MINIMAL))
        assert cfg.seed == 99

    def test_explicit_override_beats_environment(self, config_dir, monkeypatch):
        monkeypatch.setenv("BULLHURST_PIPELINE_SEED", "99")
        cfg = load_config(write_cfg(config_dir, MINIMAL),
                          overrides={"pipeline.seed": 123})
        assert cfg.seed == 123

    def test_bad_environment_value(self, config_dir, monkeypatch):
        monkeypatch.setenv("BULLHURST_HURST_WINDOW", "tiny")
        with pytest.raises(ConfigError, match="BULLHURST_HURST_WINDOW"):
            load_config(write_cfg(config_dir, MINIMAL))

    def test_hurst_keys_feed_estimator_config(self, config_dir):
        text = MINIMAL + "hurst.window = 100\nhurst.n_max = 20\nhurst.phi = 10\n"
        cfg = load_config(write_cfg(config_dir, text))
        assert cfg.fdmaa.window == 100
        assert cfg.fdmaa.n_max == 20
