# tests/integration/test_pipeline.py

import csv
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from morphforge.cli import main
from morphforge.detectors.base import read_feature_csv
from morphforge.imagekit.io import load_image
from morphforge.schemas.manifest import read_manifest, read_variants

pytestmark = pytest.mark.slow

RUN_CONF = """\
seed = 3
synthetic_subjects = 60
synthetic_size = 48
face_size = 48
net_channels = 4, 4
opt_max_iters = 3
apcer_targets = 0.1, 0.05
"""


def _rows(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


@pytest.fixture(scope="module")
def experiment(tmp_path_factory) -> dict[str, Path]:
    """Run every stage once through the command line on a synthetic set."""
    root = tmp_path_factory.mktemp("experiment")
    config = root / "run.conf"
    config.write_text(RUN_CONF)
    data, run = root / "data", root / "run"
    common = ["--config", str(config), "--workers", "1"]

    steps = [
        ["synth", "--out", str(data)],
        ["split", "--manifest", str(data / "manifest.csv")],
        ["morph", "--manifest", str(data / "manifest.csv"), "--out", str(run)],
        ["enhance", "--out", str(run)],
        ["post", "--out", str(run)],
        ["features", "--out", str(run)],
        ["train", "--out", str(run), "--mode", "g11"],
        ["train", "--out", str(run), "--mode", "g12"],
        ["eval", "--out", str(run), "--mode", "g11"],
        ["eval", "--out", str(run), "--mode", "g12"],
    ]
    for step in steps:
        assert main(step + common) == 0, f"step {step[0]} failed"
    return {"root": root, "config": config, "data": data, "run": run}


class TestPipeline:
    """End-to-end run from synthetic faces to detector reports."""

    def test_split_is_subject_disjoint(self, experiment):
        """Test sixty subjects split 42/12/6."""
        entries = read_manifest(experiment["data"] / "manifest.csv")
        assert len(entries) == 60
        assert Counter(entry.split for entry in entries) == {"train": 42, "test": 12, "val": 6}

    def test_every_variant_listed(self, experiment):
        """Test every derived variant exists once per simple morph and every image is on disk."""
        variants = read_variants(experiment["run"] / "variants.csv")
        counts = Counter(entry.variant for entry in variants)
        assert counts["genuine"] == 60
        assert counts["simple"] > 0
        for derived in ("improved", "sharp", "hequ", "imp_hequ"):
            assert counts[derived] == counts["simple"]
        for entry in variants:
            assert (experiment["run"] / entry.image_path).is_file()

    def test_morphs_stay_inside_their_split(self, experiment):
        """Test both sources of a morph share its split."""
        variants = read_variants(experiment["run"] / "variants.csv")
        split_of = {entry.id: entry.split for entry in variants if entry.variant == "genuine"}
        for entry in variants:
            if entry.is_morph:
                assert split_of[entry.source_a] == split_of[entry.source_b] == entry.split

    def test_enhancement_traces_never_increase(self, experiment):
        """Test no enhancement trace goes up."""
        traces = sorted((experiment["run"] / "traces").glob("*.csv"))
        assert traces
        for trace in traces:
            losses = [float(row["loss"]) for row in _rows(trace)]
            assert losses
            assert all(b <= a * (1 + 1e-9) for a, b in zip(losses, losses[1:]))

    def test_hequ_moves_histogram_toward_source_a(self, experiment):
        """Test HEQU output is closer to source A's histogram than the simple morph."""
        run = experiment["run"]
        variants = {entry.id: entry for entry in read_variants(run / "variants.csv")}
        checked = 0
        for entry in variants.values():
            if entry.variant != "hequ":
                continue
            simple = variants[entry.id.removesuffix("__hequ")]
            reference = np.sort(load_image(run / variants[entry.source_a].image_path).data, axis=None)
            before = np.sort(load_image(run / simple.image_path).data, axis=None)
            after = np.sort(load_image(run / entry.image_path).data, axis=None)
            assert np.abs(after - reference).mean() <= np.abs(before - reference).mean() + 1 / 255
            checked += 1
        assert checked

    def test_features_cover_every_image(self, experiment):
        """Test the feature file has one 59-value row per image."""
        samples = read_feature_csv(experiment["run"] / "features_lbp59.csv")
        variants = read_variants(experiment["run"] / "variants.csv")
        assert sorted(s.sample_id for s in samples) == sorted(e.id for e in variants)
        assert all(len(s.features.values) == 59 for s in samples)

    @pytest.mark.parametrize("mode", ["g11", "g12"])
    def test_reports_written(self, experiment, mode):
        """Test the model and every report exist with rates in range."""
        run = experiment["run"]
        prefix = f"{mode}_lbp59_linear_"
        assert (run / f"model_{mode}_lbp59_linear.cnwt").is_file()
        assert (run / f"{prefix}det.svg").is_file()

        default = _rows(run / f"{prefix}default_threshold.csv")
        assert len(default) == 1
        rates = [float(value) for key, value in default[0].items() if key != "threshold"]
        assert all(0.0 <= rate <= 1.0 for rate in rates)

        points = _rows(run / f"{prefix}bpcer_at_apcer.csv")
        assert {row["variant"] for row in points} >= {"simple", "improved", "all"}
        for row in points:
            if row["achieved"] == "true":
                assert float(row["apcer"]) <= float(row["apcer_target"])

    def test_simple_morphs_detected(self, experiment):
        """A g11 detector separates genuine faces from simple morphs at its default threshold."""
        row = _rows(experiment["run"] / "g11_lbp59_linear_default_threshold.csv")[0]
        assert float(row["bpcer"]) <= 0.2
        assert float(row["apcer_simple"]) <= 0.2

    def test_improved_in_training_helps(self, experiment):
        """Test training with improved morphs lowers their APCER."""
        run = experiment["run"]
        g11 = _rows(run / "g11_lbp59_linear_default_threshold.csv")[0]
        g12 = _rows(run / "g12_lbp59_linear_default_threshold.csv")[0]
        assert float(g12["apcer_improved"]) <= float(g11["apcer_improved"])

    def test_retraining_is_byte_identical(self, experiment):
        """Test retraining and re-evaluating reproduce the same bytes."""
        run, root = experiment["run"], experiment["root"]
        model = root / "retrained.cnwt"
        common = ["--config", str(experiment["config"]), "--features", str(run / "features_lbp59.csv")]
        assert main(["train", "--mode", "g11", "--model", str(model)] + common) == 0
        assert model.read_bytes() == (run / "model_g11_lbp59_linear.cnwt").read_bytes()

        out = root / "again"
        assert main(["eval", "--mode", "g11", "--model", str(model), "--out", str(out)] + common) == 0
        for name in ("default_threshold.csv", "bpcer_at_apcer.csv", "scores.csv"):
            first = (run / f"g11_lbp59_linear_{name}").read_bytes()
            assert (out / f"g11_lbp59_linear_{name}").read_bytes() == first

    def test_mar_from_similarities(self, experiment):
        """Test MAR from a similarity file."""
        similarities = experiment["root"] / "similarities.csv"
        similarities.write_text(
            "morph_id,variant,similarity_a,similarity_b\n"
            "m1,simple,0.9,0.8\n"
            "m2,simple,0.9,0.2\n"
            "m1,improved,0.9,0.7\n"
        )
        out = experiment["root"] / "mar"
        code = main(
            ["mar", "--similarities", str(similarities), "--out", str(out), "--config", str(experiment["config"])]
        )
        assert code == 0
        rows = _rows(out / "mar.csv")
        assert [row["variant"] for row in rows] == ["simple", "improved"]
        assert float(rows[0]["mar@0.5"]) == 0.5
        assert float(rows[1]["mar@0.5"]) == 1.0


class TestDeterminism:
    """Repeated runs give the same files."""

    def test_synthetic_set_repeats(self, tmp_path):
        """Test the same seed writes byte-identical synthetic data."""
        config = tmp_path / "run.conf"
        config.write_text("synthetic_subjects = 4\nsynthetic_size = 32\n")
        for name in ("first", "second"):
            assert main(["synth", "--config", str(config), "--out", str(tmp_path / name), "--seed", "9"]) == 0

        first = sorted(p.relative_to(tmp_path / "first") for p in (tmp_path / "first").rglob("*.*"))
        second = sorted(p.relative_to(tmp_path / "second") for p in (tmp_path / "second").rglob("*.*"))
        assert first == second
        for relative in first:
            assert (tmp_path / "first" / relative).read_bytes() == (tmp_path / "second" / relative).read_bytes()

    def test_morphs_repeat(self, tmp_path):
        """Test morph generation repeats byte for byte."""
        config = tmp_path / "run.conf"
        config.write_text("synthetic_subjects = 8\nsynthetic_size = 32\nface_size = 32\n")
        data = tmp_path / "data"
        common = ["--config", str(config), "--workers", "1"]
        assert main(["synth", "--out", str(data)] + common) == 0
        assert main(["split", "--manifest", str(data / "manifest.csv")] + common) == 0
        for name in ("a", "b"):
            assert main(["morph", "--manifest", str(data / "manifest.csv"), "--out", str(tmp_path / name)] + common) == 0

        assert (tmp_path / "a" / "variants.csv").read_text() == (tmp_path / "b" / "variants.csv").read_text()
        for morph in (tmp_path / "a" / "morphs").glob("*.png"):
            assert morph.read_bytes() == (tmp_path / "b" / "morphs" / morph.name).read_bytes()
