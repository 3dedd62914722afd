import pytest

from lulc.config import KEYS, PipelineConfig
from lulc.errors import ConfigError


def test_defaults():
    cfg = PipelineConfig()
    assert cfg.swarm.swarm_size == 30 and cfg.swarm.archive_size == 20
    assert cfg.swarm.max_iterations == 100 and cfg.swarm.inertia == 0.7
    assert cfg.train.optimizer == "adaptive_moment" and cfg.train.learning_rate == 1e-3
    assert cfg.split.train_fraction == 0.7
    assert cfg.features.hog.cell_size == 7


def test_seed_propagation_and_override():
    cfg = PipelineConfig.from_text("run.seed = 11\ntrain.seed = 3\n")
    assert cfg.swarm.seed == 11 and cfg.split.seed == 11
    assert cfg.train.seed == 3


def test_parse_types_and_comments():
    cfg = PipelineConfig.from_text(
        "# comment\nhog.signed = true   # trailing\nglcm.offsets = 0:1, 2:-1\n"
        "gabor.scales = 2\ngabor.wavelengths = 4, 8\n"
    )
    assert cfg.features.hog.signed is True
    assert cfg.features.glcm.offsets == ((0, 1), (2, -1))
    assert cfg.features.gabor.wavelengths == (4.0, 8.0)


@pytest.mark.parametrize(
    "text, match",
    [
        ("hog.cell = 3", "unknown key"),
        ("hog.cell_size 3", "expected"),
        ("hog.cell_size = x", "bad value"),
        ("swarm.inertia = 2", "inertia"),
        ("gabor.scales = 3", "wavelengths"),
        ("dataset.source = ftp", "dataset.source"),
        ("train.hidden_dim = 0", "hidden_dim"),
    ],
)
def test_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        PipelineConfig.from_text(text)


def test_effective_config_roundtrip(tmp_path):
    cfg = PipelineConfig.from_text("run.seed = 5\nswarm.optimizer = hgo_off\nnormalize.mode = sigmoid\n")
    text = cfg.to_text()
    assert len(text.splitlines()) == len(KEYS)
    assert "swarm.seed = 5" in text
    (tmp_path / "c.txt").write_text(text)
    back = PipelineConfig.from_file(tmp_path / "c.txt")
    assert back.to_text() == text
    assert back.swarm == cfg.swarm and back.train == cfg.train and back.features == cfg.features


def test_overrides():
    cfg = PipelineConfig().with_overrides(run__seed=4, swarm__optimizer="plain_pso")
    assert cfg.swarm.seed == 4 and cfg.swarm.optimizer == "plain_pso"
    with pytest.raises(ConfigError):
        PipelineConfig().with_overrides(nope__x=1)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        PipelineConfig.from_file(tmp_path / "missing.txt")
