import subprocess
import sys

import numpy as np
import pytest

from lulc import pipeline
from lulc.cli import main
from lulc.features import load_features
from lulc.hgpso import load_mask
from lulc.lstm import load_model

SMALL = """\
swarm.swarm_size = 6
swarm.archive_size = 4
swarm.max_iterations = 5
train.epochs = 3
train.hidden_dim = 6
"""


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    assert main(["synth", "--out", str(root / "data"), "--per-class", "5", "--seed", "1"]) == 0
    cfg = root / "small.cfg"
    cfg.write_text(SMALL + f"dataset.path = {root / 'data'}\n")
    return root, cfg


def _run(*args):
    return main([str(a) for a in args])


def test_synth_layout(corpus):
    root, _ = corpus
    dirs = sorted(p.name for p in (root / "data").iterdir())
    assert dirs == ["checker", "hstripes", "noise", "vstripes"]
    assert len(list((root / "data" / "noise").glob("*.png"))) == 5


def test_extract_shape_and_rerun(corpus, tmp_path):
    _, cfg = corpus
    assert _run("extract", "--config", cfg, "--out", tmp_path / "a") == 0
    assert _run("extract", "--config", cfg, "--out", tmp_path / "b") == 0
    fm = load_features(tmp_path / "a" / "features.lulcf")
    assert fm.values.shape == (20, 324 + 40960 + 7 * 3)
    a = (tmp_path / "a" / "features.lulcf").read_bytes()
    assert a == (tmp_path / "b" / "features.lulcf").read_bytes()
    log = (tmp_path / "a" / "extract.log").read_text()
    assert "dim.hog 324" in log and "dim.lgbphs 40960" in log and "time.features" in log
    assert (tmp_path / "a" / "classes.txt").read_text().split() == ["checker", "hstripes", "noise", "vstripes"]


def test_extract_missing_dataset(tmp_path, capsys):
    assert _run("extract", "--out", tmp_path / "x") != 0
    assert "[extract]" in capsys.readouterr().err
    assert _run("extract", "--out", tmp_path / "x", "--data", tmp_path / "nowhere") != 0
    err = capsys.readouterr().err
    assert "[extract]" in err and "nowhere" in err


def test_bad_config_exits_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("hog.nope = 1\n")
    assert _run("extract", "--config", bad, "--out", tmp_path) != 0
    assert "[config]" in capsys.readouterr().err


@pytest.fixture(scope="module")
def extracted(corpus, tmp_path_factory):
    _, cfg = corpus
    out = tmp_path_factory.mktemp("ex")
    assert _run("extract", "--config", cfg, "--out", out) == 0
    return out / "features.lulcf"


def test_select_outputs(corpus, extracted, tmp_path):
    _, cfg = corpus
    out = tmp_path / "s"
    assert _run("select", "--config", cfg, "--features", extracted, "--out", out) == 0
    trace = (out / "trace.csv").read_text().splitlines()
    assert len(trace) == 1 + 5 + 1  # header, init, 5 iterations
    mask, tags = load_mask(out / "mask.txt")
    sel = load_features(out / "selected.lulcf")
    assert sel.n_features == int(mask.sum())
    assert sel.column_tags == [t for t, m in zip(tags, mask) if m]


def test_select_seed_contract(corpus, extracted, tmp_path):
    _, cfg = corpus
    for name, seed in (("a", 0), ("b", 0), ("c", 9)):
        assert _run("select", "--config", cfg, "--features", extracted, "--out", tmp_path / name, "--seed", seed) == 0
    trace = {n: (tmp_path / n / "trace.csv").read_bytes() for n in "abc"}
    assert trace["a"] == trace["b"]
    assert trace["a"] != trace["c"]


@pytest.mark.parametrize("optimizer", ["plain_pso", "hgo_off"])
def test_select_ablation_flags(corpus, extracted, tmp_path, optimizer):
    _, cfg = corpus
    assert _run("select", "--config", cfg, "--features", extracted, "--out", tmp_path, "--optimizer", optimizer) == 0
    assert (tmp_path / "mask.txt").exists()


def test_train_eval_and_dimension_mismatch(corpus, extracted, tmp_path, capsys):
    _, cfg = corpus
    out = tmp_path / "t"
    assert _run("select", "--config", cfg, "--features", extracted, "--out", out) == 0
    assert _run("train", "--config", cfg, "--out", out) == 0
    assert _run("eval", "--config", cfg, "--out", out, "--subset", "train") == 0
    rows = (out / "report.csv").read_text().splitlines()
    assert [r.split(",")[0] for r in rows[1:]] == ["checker", "hstripes", "noise", "vstripes", "overall"]
    assert (out / "loss_trace.csv").read_text().splitlines()[0] == "epoch,loss"

    capsys.readouterr()
    model = load_model(out / "model.lulcm")
    assert _run("eval", "--config", cfg, "--out", out, "--features", extracted) != 0
    err = capsys.readouterr().err
    assert "[eval]" in err and str(model.feature_dim) in err and "41305" in err


def test_loaded_model_eval_equals_in_memory(corpus, extracted, tmp_path):
    from lulc.config import PipelineConfig
    from lulc.ingest import split_indices
    from lulc.lstm import predict_logits, save_model, train

    _, cfg_path = corpus
    cfg = PipelineConfig.from_file(cfg_path)
    fm = load_features(extracted)
    tr, te = split_indices(fm.row_labels, cfg.split)
    model, _ = train(fm.rows(tr), cfg.train, cfg.timesteps, cfg.hidden_dim, 4)
    save_model(model, tmp_path / "m.lulcm")
    back = load_model(tmp_path / "m.lulcm")
    assert predict_logits(back, fm.rows(te)).tobytes() == predict_logits(model, fm.rows(te)).tobytes()
    names = ["checker", "hstripes", "noise", "vstripes"]
    a = pipeline.evaluate(back, fm.rows(te), names)
    b = pipeline.evaluate(model, fm.rows(te), names)
    assert a.per_class == b.per_class and a.overall == b.overall
    assert a.confusion.counts.tobytes() == b.confusion.counts.tobytes()


def test_pipeline_artifacts_and_manifest(corpus, tmp_path):
    _, cfg = corpus
    assert _run("pipeline", "--config", cfg, "--out", tmp_path / "p1") == 0
    first = (tmp_path / "p1" / "manifest.txt").read_text()
    assert _run("pipeline", "--config", cfg, "--out", tmp_path / "p1") == 0
    assert (tmp_path / "p1" / "manifest.txt").read_text() == first
    names = {p.name for p in (tmp_path / "p1").iterdir()}
    assert names == {
        "features.lulcf", "features.csv", "classes.txt", "extract.log", "mask.txt", "trace.csv",
        "selected.lulcf", "model.lulcm", "loss_trace.csv", "report.csv", "confusion.csv",
        "config.effective.txt", "manifest.txt",
    }
    m1 = first
    listed = [line.split()[1] for line in m1.splitlines()]
    assert "extract.log" not in listed and "model.lulcm" in listed
    for line in m1.splitlines():
        digest, name = line.split()
        assert pipeline.sha256(tmp_path / "p1" / name) == digest


def test_effective_config_reproduces_run(corpus, tmp_path):
    _, cfg = corpus
    assert _run("pipeline", "--config", cfg, "--out", tmp_path / "a", "--seed", 3) == 0
    eff = tmp_path / "a" / "config.effective.txt"
    assert "run.seed = 3" in eff.read_text()
    # the echoed config carries run.out; reuse it with a fresh output directory
    assert _run("pipeline", "--config", eff, "--out", tmp_path / "b") == 0
    a = (tmp_path / "a" / "manifest.txt").read_text().splitlines()
    b = (tmp_path / "b" / "manifest.txt").read_text().splitlines()
    strip = lambda lines: [l for l in lines if not l.endswith("config.effective.txt")]
    assert strip(a) == strip(b)


def test_skip_select_trains_on_full_set(corpus, tmp_path):
    _, cfg = corpus
    assert _run("pipeline", "--config", cfg, "--out", tmp_path, "--skip-select") == 0
    assert not (tmp_path / "selected.lulcf").exists()
    assert load_model(tmp_path / "model.lulcm").feature_dim == 41305


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "lulc", "extract", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode != 0
    assert "[extract]" in proc.stderr


def test_extract_from_raw_tensor(tmp_path):
    from lulc.ingest import write_raw_tensor
    from lulc.synth import synth_dataset

    write_raw_tensor(synth_dataset(2, 28, 4, seed=5), tmp_path / "t.bin", tmp_path / "m.csv")
    cfg = tmp_path / "raw.cfg"
    cfg.write_text(f"dataset.source = raw\ndataset.path = {tmp_path / 't.bin'}\ndataset.manifest = {tmp_path / 'm.csv'}\n")
    assert _run("extract", "--config", cfg, "--out", tmp_path / "o") == 0
    fm = load_features(tmp_path / "o" / "features.lulcf")
    assert fm.values.shape == (8, 324 + 40960 + 28)
    np.testing.assert_array_equal(fm.row_labels, [0, 0, 1, 1, 2, 2, 3, 3])
