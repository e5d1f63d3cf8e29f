import pytest

from aspector.config import Config, ConfigError, load_config, parse_config_text


def test_defaults():
    c = Config()
    assert (c.K, c.sigma, c.m, c.n, c.N, c.k) == (0.1, 0.35, 8, 8, 50, 1)
    assert (c.candidate_cap, c.session_gap_seconds, c.variant, c.topic_T) == (30, 1800, "indicator", 32)


def test_file_then_overrides(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# tuned\nK = 0.5\nsigma=0.2\n\nvariant=average\n")
    c = load_config(p, {"sigma": 0.3, "m": None})
    assert (c.K, c.sigma, c.m, c.variant) == (0.5, 0.3, 8, "average")


@pytest.mark.parametrize("text", ["K=-1", "sigma=2", "variant=median", "m=0", "bogus=1", "K=abc", "novalue"])
def test_rejects_bad_values(tmp_path, text):
    p = tmp_path / "c.cfg"
    p.write_text(text + "\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_parse_text():
    assert parse_config_text("a=1\n # x\nb = two words\n") == {"a": "1", "b": "two words"}
