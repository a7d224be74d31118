# tests/test_dataset.py

from collections import Counter

import numpy as np
import pytest

from morphforge.core.exceptions import ConfigError, ManifestError, PairingError
from morphforge.schemas.manifest import read_manifest, write_manifest
from morphforge.schemas.run_config import RunConfig
from morphforge.services.dataset import plan_pairs, split_counts, split_dataset, split_manifest


class TestSplitDataset:
    """Test subject-disjoint splitting."""

    def test_counts_7_2_1(self, manifest_factory):
        """Test ten subjects split 7/2/1."""
        entries = manifest_factory([(f"s{k:02d}", "f", "synthA") for k in range(10)])
        result = split_dataset(entries, (0.7, 0.2, 0.1), seed=0)
        assert Counter(entry.split for entry in result) == {"train": 7, "test": 2, "val": 1}

    def test_everything_train(self, manifest_factory):
        """Test a ratio of 1 puts every subject in train."""
        entries = manifest_factory([(f"s{k}", "m", "synthA") for k in range(5)])
        result = split_dataset(entries, (1.0, 0.0, 0.0), seed=3)
        assert {entry.split for entry in result} == {"train"}

    def test_deterministic(self, manifest_factory):
        """Test the same seed gives the same split."""
        entries = manifest_factory([(f"s{k:02d}", "f", "synthA") for k in range(20)])
        first = split_dataset(entries, (0.7, 0.2, 0.1), seed=11)
        second = split_dataset(entries, (0.7, 0.2, 0.1), seed=11)
        assert [e.split for e in first] == [e.split for e in second]

    def test_subjects_never_straddle_splits(self, manifest_factory):
        """Test all images of a subject land in one split and input order is kept."""
        entries = manifest_factory([(f"s{k:02d}", "f", "synthA") for k in range(12)], images=3)
        result = split_dataset(entries, (0.5, 0.25, 0.25), seed=2)
        by_subject: dict[str, set[str]] = {}
        for entry in result:
            by_subject.setdefault(entry.subject_id, set()).add(entry.split)
        assert all(len(splits) == 1 for splits in by_subject.values())
        assert [e.id for e in result] == [e.id for e in entries]

    def test_every_positive_bucket_filled(self):
        """Test every split with a positive ratio gets at least one subject."""
        assert split_counts(3, (0.7, 0.2, 0.1)) == [1, 1, 1]
        assert split_counts(10, (0.7, 0.2, 0.1)) == [7, 2, 1]
        assert sum(split_counts(17, (0.7, 0.2, 0.1))) == 17

    def test_too_few_subjects(self, manifest_factory):
        """Test fewer subjects than positive splits is an error."""
        entries = manifest_factory([("s1", "f", "synthA"), ("s2", "f", "synthA")])
        with pytest.raises(ManifestError):
            split_dataset(entries, (0.7, 0.2, 0.1), seed=0)

    def test_bad_ratios(self, manifest_factory):
        """Test ratios that do not sum to 1 are rejected."""
        entries = manifest_factory([("s1", "f", "synthA")])
        with pytest.raises(ConfigError):
            split_dataset(entries, (0.7, 0.2, 0.2), seed=0)

    def test_split_manifest_rewrites_paths(self, tmp_path, manifest_factory):
        """Test the written manifest keeps image paths valid from its new directory."""
        source = tmp_path / "data" / "manifest.csv"
        source.parent.mkdir()
        write_manifest(manifest_factory([(f"s{k}", "f", "synthA") for k in range(10)]), source)
        out = tmp_path / "run" / "split.csv"
        out.parent.mkdir()

        entries = split_manifest(RunConfig(seed=4), source, out)

        assert read_manifest(out) == entries
        assert entries[0].image_path == str((tmp_path / "data").resolve() / "images" / "s0_0.png")


class TestPlanPairs:
    """Test balanced greedy pairing."""

    def test_two_subjects(self, manifest_factory):
        """Test two compatible subjects form one pair."""
        entries = manifest_factory([("a", "f", "synthA"), ("b", "f", "synthA")])
        plan = plan_pairs(entries, "train", pairs_wanted=1)
        assert plan.pairs == [("a_0", "b_0")]
        assert plan.usage == {"a": 1, "b": 1}

    def test_four_subjects_used_once(self, manifest_factory):
        """Test four subjects pair up without reuse."""
        entries = manifest_factory([(s, "m", "synthA") for s in ("a", "b", "c", "d")])
        plan = plan_pairs(entries, "train", pairs_wanted=2)
        assert plan.pairs == [("a_0", "b_0"), ("c_0", "d_0")]
        assert set(plan.usage.values()) == {1}

    def test_incompatible_source_db(self, manifest_factory):
        """Test subjects from different databases never pair."""
        entries = manifest_factory([("a", "f", "synthA"), ("b", "f", "synthB")])
        with pytest.raises(PairingError):
            plan_pairs(entries, "train", pairs_wanted=1)

    def test_other_splits_ignored(self, manifest_factory):
        """Test only the requested split is paired."""
        entries = manifest_factory([("a", "f", "synthA"), ("b", "f", "synthA")], split="test")
        with pytest.raises(PairingError):
            plan_pairs(entries, "train", pairs_wanted=1)

    def test_exhaustion_stops_plan(self, manifest_factory):
        """Test the plan stops when no compatible pair is left."""
        entries = manifest_factory([("a", "f", "synthA"), ("b", "f", "synthA")])
        plan = plan_pairs(entries, "train", pairs_wanted=5)
        assert len(plan.pairs) == 1

    def test_images_used_round_robin(self, manifest_factory):
        """Test images of a subject are used in turn."""
        entries = manifest_factory([(s, "f", "synthA") for s in ("a", "b", "c")], images=2)
        plan = plan_pairs(entries, "train", pairs_wanted=3)
        used = Counter(image for pair in plan.pairs for image in pair)
        assert max(used.values()) == 1
        assert plan.spread == 0

    @pytest.mark.parametrize("seed", range(8))
    def test_random_manifests_stay_balanced(self, manifest_factory, seed):
        """Test random manifests keep pair usage balanced and attributes matched."""
        rng = np.random.default_rng(seed)
        subjects = [
            (f"s{k:02d}", str(rng.choice(["m", "f"])), str(rng.choice(["synthA", "synthB"])))
            for k in range(int(rng.integers(6, 16)))
        ]
        entries = manifest_factory(subjects)
        attributes = {subject: (gender, db) for subject, gender, db in subjects}
        try:
            plan = plan_pairs(entries, "train", pairs_wanted=int(rng.integers(1, 20)), seed=seed)
        except PairingError:
            return

        assert plan.spread <= 1
        seen = set()
        for image_a, image_b in plan.pairs:
            subject_a, subject_b = image_a.rsplit("_", 1)[0], image_b.rsplit("_", 1)[0]
            assert subject_a != subject_b
            assert attributes[subject_a] == attributes[subject_b]
            key = frozenset((subject_a, subject_b))
            assert key not in seen
            seen.add(key)
        assert plan.seed == seed
