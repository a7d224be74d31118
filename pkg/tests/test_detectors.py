# tests/test_detectors.py

import logging

import numpy as np
import pytest

from morphforge.core.container import write_container
from morphforge.core.exceptions import FeatureError, TrainingError
from morphforge.detectors import (
    BsifExtractor,
    EdgeFeatureExtractor,
    ExtractorOptions,
    FeatureVector,
    LabeledSample,
    LbpExtractor,
    LinearModel,
    TreeModel,
    TreeNode,
    bsif_histogram,
    generate_bsif_bank,
    get_extractor,
    lbp_histogram,
    load_bsif_bank,
    load_model,
    read_feature_csv,
    save_bsif_bank,
    save_model,
    score,
    train_linear,
    train_tree,
    write_feature_csv,
)
from morphforge.detectors.bsif import BIT_LENGTH, FILTER_SIZE, BsifFilterBank, bsif_codes
from morphforge.detectors.edges import block_dct, block_idct, dct_recompress, edge_feature_stats, quantization_table
from morphforge.detectors.lbp import UNIFORM_BINS, lbp_codes, transitions
from morphforge.detectors.tree import best_split, float32_thresholds
from morphforge.imagekit.image import Image


def _sample(values, scheme: str, attack: bool, sample_id: str = "") -> LabeledSample:
    label, variant = ("attack", "simple") if attack else ("bona_fide", "genuine")
    return LabeledSample(FeatureVector(values, scheme), label, variant, sample_id=sample_id)


def _edgefeat_samples(rows: np.ndarray, labels: np.ndarray) -> list[LabeledSample]:
    """Embed 2-D points into the first two edgefeat slots."""
    samples = []
    for k, (row, attack) in enumerate(zip(rows, labels)):
        values = np.zeros(6)
        values[: len(row)] = row
        samples.append(_sample(values, "edgefeat", bool(attack), sample_id=f"s{k}"))
    return samples


def _brute_force_lbp(plane: np.ndarray) -> np.ndarray:
    # east, north-east, north, north-west, west, south-west, south, south-east
    offsets = [(0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1)]
    uniform = [p for p in range(256) if bin(p ^ (((p >> 1) | ((p & 1) << 7)) & 0xFF)).count("1") <= 2]
    bins = {pattern: k for k, pattern in enumerate(uniform)}
    counts = np.zeros(59)
    height, width = plane.shape
    for y in range(1, height - 1):
        for x in range(1, width - 1):
            pattern = 0
            for bit, (dy, dx) in enumerate(offsets):
                if plane[y + dy, x + dx] >= plane[y, x]:
                    pattern |= 1 << bit
            counts[bins.get(pattern, 58)] += 1
    return counts / counts.sum()


class TestFeatureTypes:
    """Test feature vectors and feature files."""

    def test_length_must_match_scheme(self):
        """Test vector length must match the scheme."""
        with pytest.raises(FeatureError):
            FeatureVector(np.zeros(58), "lbp59")

    def test_histograms_non_negative(self):
        """Test histogram features cannot be negative."""
        values = np.full(59, 1 / 59)
        values[0] = -0.01
        with pytest.raises(FeatureError):
            FeatureVector(values, "lbp59")

    def test_edge_features_may_be_negative(self):
        """Test edge features may be negative."""
        assert FeatureVector([1, 2, 3, 4, -0.5, 0.5], "edgefeat").values[4] == -0.5

    def test_unknown_scheme(self):
        """Test an unknown scheme is rejected."""
        with pytest.raises(FeatureError):
            FeatureVector(np.zeros(6), "hog")

    @pytest.mark.parametrize(
        "label, variant",
        [("bona_fide", "simple"), ("attack", "genuine"), ("attack", "blurred")],
    )
    def test_variant_label_consistency(self, label, variant):
        """Test variant and label must agree."""
        with pytest.raises(FeatureError):
            LabeledSample(FeatureVector(np.zeros(6), "edgefeat"), label, variant)

    def test_feature_csv_round_trip(self, tmp_path):
        """Test writing and reading a feature file."""
        samples = [
            _sample(np.array([1.0, 2.0, 3.0, 4.0, 0.5, -0.25]), "edgefeat", True, "m1"),
            _sample(np.array([5.0, 0.0, 5.0, 1.0, 0.0, 0.125]), "edgefeat", False, "b1"),
        ]
        path = tmp_path / "features.csv"
        assert write_feature_csv(samples, path) == 2
        assert path.read_text().splitlines()[0] == "edgefeat,attack,simple,m1,,1,2,3,4,0.5,-0.25"

        loaded = read_feature_csv(path)
        assert [(s.label, s.variant, s.sample_id) for s in loaded] == [
            ("attack", "simple", "m1"),
            ("bona_fide", "genuine", "b1"),
        ]
        assert np.array_equal(loaded[0].features.values, samples[0].features.values)

    def test_feature_csv_bad_value(self, tmp_path):
        """Test a non-numeric value is reported with its line."""
        path = tmp_path / "features.csv"
        path.write_text("edgefeat,attack,simple,m1,,1,2,x,4,5,6\n")
        with pytest.raises(FeatureError, match=":1:"):
            read_feature_csv(path)


class TestLbp:
    """Test uniform LBP histograms."""

    def test_exactly_58_uniform_patterns(self):
        """Test there are 58 uniform patterns plus one shared bin."""
        uniform = [p for p in range(256) if transitions(p) <= 2]
        assert len(uniform) == 58
        assert sorted(UNIFORM_BINS[uniform].tolist()) == list(range(58))
        assert UNIFORM_BINS.max() == 58

    def test_transitions(self):
        """Test bit transition counts."""
        assert transitions(0b00000000) == 0
        assert transitions(0b11111111) == 0
        assert transitions(0b00001111) == 2
        assert transitions(0b01010101) == 8

    def test_constant_image(self):
        """Test a constant image puts every pixel in one bin."""
        hist = lbp_histogram(Image.constant(8, 8, 0.4)).values
        # all neighbours tie with the center, pattern 255 is the last uniform bin
        assert hist[57] == 1.0
        assert hist.sum() == 1.0

    def test_bit_order(self):
        """Test neighbour bit positions."""
        plane = np.zeros((3, 3))
        plane[1, 2] = 1.0  # east neighbour only
        plane[1, 1] = 0.5
        assert lbp_codes(plane)[0, 0] == 0b00000001
        plane[1, 2], plane[0, 1] = 0.0, 1.0  # north neighbour only
        assert lbp_codes(plane)[0, 0] == 0b00000100

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_brute_force(self, seed):
        """Test the histogram against a per-pixel loop."""
        plane = np.random.default_rng(seed).random((16, 16))
        hist = lbp_histogram(Image(plane[np.newaxis])).values
        assert np.array_equal(hist, _brute_force_lbp(plane))
        assert abs(hist.sum() - 1.0) < 1e-9

    def test_too_small(self):
        """Test images under 3x3 are rejected."""
        with pytest.raises(FeatureError):
            lbp_histogram(Image.constant(2, 5, 0.5))

    def test_color_input_uses_gray(self, color_image):
        """Test color images are converted to gray."""
        assert len(LbpExtractor().extract(color_image)) == 59


class TestBsif:
    """Test BSIF codes and filter banks."""

    @staticmethod
    def _raw_codes(plane: np.ndarray, filters: np.ndarray) -> np.ndarray:
        valid = plane.shape[0] - FILTER_SIZE + 1
        expected = np.zeros((valid, valid), dtype=np.int64)
        for y in range(valid):
            for x in range(valid):
                window = plane[y:y + FILTER_SIZE, x:x + FILTER_SIZE]
                for k in range(BIT_LENGTH):
                    if float(np.sum(window * filters[k])) > 0.0:
                        expected[y, x] += 1 << k
        return expected

    def test_bank_is_zero_mean_and_orthonormal(self):
        """Seeded filters sum to exactly zero and are orthonormal."""
        bank = generate_bsif_bank(12)
        vectors = bank.filters.reshape(BIT_LENGTH, -1)
        assert np.all(vectors.sum(axis=1) == 0.0)
        assert np.max(np.abs(vectors @ vectors.T - np.eye(BIT_LENGTH))) < 1e-4
        assert bank.source == "seeded(12)"

    def test_bank_is_seeded(self):
        """Same seed gives the same bank, another seed another one."""
        assert np.array_equal(generate_bsif_bank(3).filters, generate_bsif_bank(3).filters)
        assert not np.array_equal(generate_bsif_bank(3).filters, generate_bsif_bank(4).filters)

    def test_bank_round_trip(self, tmp_path):
        """A saved bank loads back bit-identically."""
        bank = generate_bsif_bank(12)
        path = tmp_path / "bank.cnwt"
        save_bsif_bank(bank, path)
        loaded = load_bsif_bank(path)
        assert loaded.filters.tobytes() == bank.filters.tobytes()
        assert loaded.source == "loaded"

    def test_load_rejects_filters_with_mean(self, tmp_path):
        """Random filters are neither zero-mean nor orthonormal."""
        rng = np.random.default_rng(0)
        path = tmp_path / "random.cnwt"
        write_container(
            path,
            {f"bsif.filter{k:02d}": rng.random((FILTER_SIZE, FILTER_SIZE)).astype(np.float32) for k in range(BIT_LENGTH)},
        )
        with pytest.raises(FeatureError, match="zero-mean"):
            load_bsif_bank(path)

    def test_rejects_non_orthonormal_filters(self):
        """Zero-mean filters that are not unit length are refused."""
        filters = generate_bsif_bank(12).filters * 2.0
        with pytest.raises(FeatureError, match="orthonormal"):
            BsifFilterBank(filters)

    def test_constant_image(self):
        """Zero-sum filters send every flat window to code 0."""
        hist = bsif_histogram(Image.constant(16, 16, 0.7), generate_bsif_bank(12)).values
        assert len(hist) == 4096
        assert hist[0] == 1.0

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_brute_force(self, seed):
        """Codes equal a per-pixel sum(window * filter) > 0 loop."""
        bank = generate_bsif_bank(12)
        plane = np.random.default_rng(seed).random((16, 16))
        assert np.array_equal(bsif_codes(plane, bank), self._raw_codes(plane, bank.filters))

        hist = bsif_histogram(Image(plane[np.newaxis]), bank).values
        assert abs(hist.sum() - 1.0) < 1e-9

    def test_filters_with_small_mean_use_raw_response(self):
        """A bank inside the zero-mean tolerance still follows the raw sign rule."""
        bank = BsifFilterBank(generate_bsif_bank(12).filters + 5e-7)
        assert np.all(bank.filter_sums > 0)
        plane = 0.5 + 1e-4 * np.random.default_rng(3).standard_normal((16, 16))
        assert np.array_equal(bsif_codes(plane, bank), self._raw_codes(plane, bank.filters))

    def test_too_small(self):
        """Test images under 11x11 are rejected."""
        with pytest.raises(FeatureError):
            bsif_histogram(Image.constant(10, 10, 0.5), generate_bsif_bank(1))

    def test_extractor_defaults_to_seeded_bank(self):
        """Test the extractor builds a seeded bank by default."""
        extractor = get_extractor("bsif4096", ExtractorOptions(bsif_seed=5))
        assert isinstance(extractor, BsifExtractor)
        assert extractor.bank.source == "seeded(5)"


class TestEdgeFeatures:
    """Test edge and corner statistics around recompression."""

    def test_constant_image(self):
        """Test a constant image gives all-zero features."""
        assert not np.any(edge_feature_stats(Image.constant(24, 24, 0.5)).values)

    def test_invariant_to_constant_shift(self):
        """Test a brightness shift changes nothing."""
        plane = np.random.default_rng(3).uniform(0.3, 0.6, (32, 32))
        base = edge_feature_stats(Image(plane[np.newaxis]), quality=75).values
        shifted = edge_feature_stats(Image(plane[np.newaxis] + 16 / 255), quality=75).values
        assert np.array_equal(base, shifted)

    def test_near_lossless_at_quality_100(self):
        """Test quality 100 barely changes the edge count."""
        for seed in range(10):
            plane = np.random.default_rng(seed).random((32, 32))
            values = edge_feature_stats(Image(plane[np.newaxis]), quality=100).values
            assert abs(values[4]) <= 0.05

    def test_quantization_table(self):
        """Test table scaling by quality."""
        assert np.all(quantization_table(100) == 1.0)
        assert quantization_table(50)[0, 0] == 16.0
        assert quantization_table(75)[0, 0] == 8.0
        with pytest.raises(ValueError):
            quantization_table(0)

    def test_quality_100_round_trip(self, rng):
        """Test quality 100 recompression stays within two levels."""
        img = Image(rng.random((1, 32, 32)))
        assert np.max(np.abs(dct_recompress(img, 100).data - img.data)) < 2 / 255

    def test_constant_blocks_stay_constant(self):
        """Test flat blocks stay flat."""
        out = dct_recompress(Image.constant(16, 16, 0.37), quality=75).data
        assert np.ptp(out) < 1e-9
        # only the DC coefficient moves, by at most half a quantization step
        assert abs(out[0, 0, 0] - 0.37) <= 8.0 / (2 * 8 * 255) + 1e-9

    def test_dct_matches_naive_transform(self, rng):
        """Test the block DCT against the textbook sum."""
        block = rng.random((8, 8))

        def c(k: int) -> float:
            return np.sqrt(1 / 8) if k == 0 else np.sqrt(2 / 8)

        naive = np.zeros((8, 8))
        for u in range(8):
            for v in range(8):
                for y in range(8):
                    for x in range(8):
                        naive[u, v] += (
                            c(u) * c(v) * block[y, x]
                            * np.cos((2 * y + 1) * u * np.pi / 16)
                            * np.cos((2 * x + 1) * v * np.pi / 16)
                        )
        assert np.allclose(block_dct(block)[0, 0], naive, atol=1e-9)

    def test_dct_inverse(self, rng):
        """Test the inverse DCT recovers the plane."""
        plane = rng.random((16, 24))
        assert np.max(np.abs(block_idct(block_dct(plane)) - plane)) < 1e-4

    def test_unaligned_image(self, rng):
        """Test sizes not divisible by 8 are kept."""
        img = Image(rng.random((3, 13, 10)))
        assert dct_recompress(img).shape == (3, 13, 10)

    def test_extractor_quality_validated(self):
        """Test quality is validated."""
        with pytest.raises(ValueError):
            EdgeFeatureExtractor(quality=101)


class TestLinearModel:
    """Test hinge-loss linear training."""

    GRID = np.stack(np.meshgrid(np.linspace(-3, 3, 41), np.linspace(-3, 3, 41)), -1).reshape(-1, 2)

    @staticmethod
    def _separable(rng, n: int = 40):
        attacks = np.column_stack([rng.uniform(1.5, 3.0, n), rng.normal(0, 1, n)])
        bona_fide = np.column_stack([rng.uniform(-3.0, -1.5, n), rng.normal(0, 1, n)])
        rows = np.vstack([attacks, bona_fide])
        labels = np.array([True] * n + [False] * n)
        return rows, labels

    @classmethod
    def _grid_points(cls) -> np.ndarray:
        points = np.zeros((len(cls.GRID), 6))
        points[:, :2] = cls.GRID
        return points

    def test_separable_training_accuracy(self, rng):
        """A separable toy set is classified without error."""
        rows, labels = self._separable(rng)
        samples = _edgefeat_samples(rows, labels)
        model = train_linear(samples, lam=0.01, epochs=100, seed=0)
        predicted = [score(model, s.features) > 0 for s in samples]
        assert predicted == labels.tolist()

    def test_deterministic(self, rng):
        """Same data and seed give a bitwise-identical model."""
        samples = _edgefeat_samples(*self._separable(rng))
        first = train_linear(samples, seed=4)
        second = train_linear(samples, seed=4)
        assert first.weights.tobytes() == second.weights.tobytes()
        assert first.bias == second.bias

    @pytest.mark.parametrize("seed", range(5))
    def test_duplicated_samples_keep_boundary(self, seed):
        """Repeating every sample leaves the model and its grid classifications unchanged."""
        rng = np.random.default_rng(seed)
        rows, labels = self._separable(rng)
        model = train_linear(_edgefeat_samples(rows, labels), seed=1)
        doubled = train_linear(_edgefeat_samples(np.vstack([rows, rows]), np.concatenate([labels, labels])), seed=1)

        assert model.weights.tobytes() == doubled.weights.tobytes()
        assert model.bias == doubled.bias
        points = self._grid_points()
        assert np.array_equal(model.decision(points) > 0, doubled.decision(points) > 0)

    def test_duplicated_overlapping_samples_keep_boundary(self, rng):
        """The same holds when the classes overlap and the hinge stays active."""
        rows = np.vstack([rng.normal(0.5, 1.0, (30, 2)), rng.normal(-0.5, 1.0, (30, 2))])
        labels = np.array([True] * 30 + [False] * 30)
        order = rng.permutation(120)
        model = train_linear(_edgefeat_samples(rows, labels), seed=2)
        doubled = train_linear(
            _edgefeat_samples(np.vstack([rows, rows])[order], np.concatenate([labels, labels])[order]), seed=7
        )
        points = self._grid_points()
        assert np.array_equal(model.decision(points) > 0, doubled.decision(points) > 0)

    def test_invariant_to_feature_rescaling(self, rng):
        """Power-of-two feature scales are absorbed by standardization."""
        rows, labels = self._separable(rng)
        scales = np.array([4.0, 0.25])
        model = train_linear(_edgefeat_samples(rows, labels), seed=1)
        rescaled = train_linear(_edgefeat_samples(rows * scales, labels), seed=1)

        points = self._grid_points()
        scaled_points = points.copy()
        scaled_points[:, :2] *= scales
        assert np.array_equal(model.decision(points) > 0, rescaled.decision(scaled_points) > 0)

    def test_arbitrary_rescaling_keeps_classifications(self, rng):
        """Any positive per-feature scale leaves grid classifications unchanged away from the boundary."""
        rows = np.vstack([rng.normal(0.6, 1.0, (40, 2)), rng.normal(-0.6, 1.0, (40, 2))])
        labels = np.array([True] * 40 + [False] * 40)
        scales = np.array([3.7, 0.013])
        model = train_linear(_edgefeat_samples(rows, labels), seed=1)
        rescaled = train_linear(_edgefeat_samples(rows * scales, labels), seed=1)

        points = self._grid_points()
        scaled_points = points.copy()
        scaled_points[:, :2] *= scales
        original = model.decision(points)
        clear = np.abs(original) > 1e-4
        assert clear.mean() > 0.95
        assert np.array_equal(original[clear] > 0, rescaled.decision(scaled_points)[clear] > 0)

    def test_single_class(self):
        """One class only cannot be trained."""
        samples = _edgefeat_samples(np.ones((4, 2)), np.array([True] * 4))
        with pytest.raises(TrainingError):
            train_linear(samples)

    def test_invalid_lambda(self, rng):
        """Lambda must be positive."""
        with pytest.raises(TrainingError):
            train_linear(_edgefeat_samples(*self._separable(rng)), lam=0.0)

    def test_zero_variance_features_get_unit_scale(self, rng):
        """Constant features are standardized with scale 1."""
        model = train_linear(_edgefeat_samples(*self._separable(rng)))
        assert np.all(model.scale[2:] == 1.0)


class TestTreeModel:
    """Test gain-ratio trees and reduced-error pruning."""

    @staticmethod
    def _brute_force_split(x: np.ndarray, y: np.ndarray, min_leaf: int):
        def bits(a: int, b: int) -> float:
            return -sum(c / (a + b) * np.log2(c / (a + b)) for c in (a, b) if c)

        n, attacks = len(y), int(np.count_nonzero(y > 0))
        candidates = []
        for feature in range(x.shape[1]):
            values = np.unique(x[:, feature])
            for low in values[:-1]:
                left = x[:, feature] <= low
                n_left = int(left.sum())
                if n_left < min_leaf or n - n_left < min_leaf:
                    continue
                a_left = int(np.count_nonzero(y[left] > 0))
                a_right = attacks - a_left
                children = n_left / n * bits(n_left - a_left, a_left) + (n - n_left) / n * bits(
                    n - n_left - a_right, a_right
                )
                gain = bits(n - attacks, attacks) - children
                if gain > 1e-12:
                    candidates.append((feature, low, gain / bits(n_left, n - n_left)))
        if not candidates:
            return None
        top = max(ratio for _, _, ratio in candidates)
        return next(c for c in candidates if c[2] >= top - 1e-12)

    @pytest.mark.parametrize("seed", range(12))
    def test_best_split_matches_brute_force(self, seed):
        """The vectorized search picks the same cut and ratio as scoring every cut one by one."""
        rng = np.random.default_rng(seed)
        x = np.round(rng.random((40, 3)), 1)
        y = np.where(rng.random(40) < 0.4 + 0.3 * x[:, seed % 3], 1.0, -1.0)
        min_leaf = 1 + seed % 4

        expected = self._brute_force_split(x, y, min_leaf)
        found = best_split(x, y, min_leaf)
        if expected is None:
            assert found is None
            return
        feature, threshold, ratio = found
        assert feature == expected[0]
        assert ratio == pytest.approx(expected[2], rel=1e-9)
        assert np.array_equal(x[:, feature] <= threshold, x[:, feature] <= expected[1])
        assert float(np.float32(threshold)) == threshold

    def test_no_split_without_gain(self):
        """Labels independent of every feature give no split."""
        x = np.array([[0.0], [0.0], [1.0], [1.0]])
        assert best_split(x, np.array([1.0, -1.0, 1.0, -1.0]), 1) is None

    def test_float32_thresholds_between_close_values(self):
        """Thresholds stay inside each gap; a gap with no float32 inside gives NaN."""
        low = np.array([0.2, 1.0 + 1e-12, 1.0])
        high = np.array([0.4, 1.0 + 2e-12, np.nextafter(np.float32(1.0), np.float32(2.0)).astype(np.float64)])
        thresholds = float32_thresholds(low, high)
        assert thresholds[0] == float(np.float32(0.3))
        assert np.isnan(thresholds[1])
        assert thresholds[2] == 1.0

    def test_single_split_at_midpoint(self):
        """Test one split at the midpoint between classes."""
        samples = _edgefeat_samples(
            np.array([[0.2], [0.4], [0.6], [0.8]]), np.array([False, False, True, True])
        )
        model = train_tree(samples, min_leaf=1)
        assert model.root.feature == 0
        assert model.root.threshold == 0.5
        assert model.root.left.is_leaf and model.root.right.is_leaf
        assert model.root.left.label == "bona_fide"
        assert model.root.right.label == "attack"

    def test_pure_children_become_leaves(self):
        """Test pure children stop growing."""
        samples = _edgefeat_samples(
            np.array([[0.1], [0.2], [0.3], [0.7], [0.8], [0.9]]),
            np.array([False, False, False, True, True, True]),
        )
        model = train_tree(samples, max_depth=8, min_leaf=1)
        assert model.root.depth() == 1
        assert model.root.right.confidence == 1.0
        assert score(model, samples[-1].features) == 1.0
        assert score(model, samples[0].features) == 0.0

    def test_depth_limit(self, rng):
        """Test depth stays within the limit."""
        rows = rng.random((60, 4))
        samples = _edgefeat_samples(rows, rng.random(60) < 0.5)
        assert train_tree(samples, max_depth=2).root.depth() <= 2

    def test_pruning_never_increases_prune_error(self, rng):
        """Test pruning never adds prune-set errors."""
        rows = rng.random((120, 4))
        labels = (rows[:, 0] + 0.3 * rng.standard_normal(120)) > 0.5
        prune_rows = rng.random((60, 4))
        prune_labels = (prune_rows[:, 0] + 0.3 * rng.standard_normal(60)) > 0.5
        samples = _edgefeat_samples(rows, labels)
        prune_set = _edgefeat_samples(prune_rows, prune_labels)

        unpruned = train_tree(samples, max_depth=6, min_leaf=1)
        pruned = train_tree(samples, max_depth=6, min_leaf=1, prune_set=prune_set)

        def errors(model: TreeModel) -> int:
            return sum(
                (model.leaf_for(s.features.values).label == "attack") != s.is_attack for s in prune_set
            )

        assert pruned.pruned and not unpruned.pruned
        assert errors(pruned) <= errors(unpruned)
        assert pruned.node_count <= unpruned.node_count

    def test_empty_prune_set(self, rng, caplog):
        """Test an empty prune set leaves the tree unpruned with a warning."""
        samples = _edgefeat_samples(rng.random((20, 2)), np.arange(20) % 2 == 0)
        with caplog.at_level(logging.WARNING):
            model = train_tree(samples, prune_set=[])
        assert not model.pruned
        assert "unpruned" in caplog.text

    def test_single_class(self):
        """Test one class only cannot be trained."""
        with pytest.raises(TrainingError):
            train_tree(_edgefeat_samples(np.ones((4, 1)), np.array([False] * 4)))


class TestScoring:
    """Test model scoring and model files."""

    def test_zero_linear_model(self, rng):
        """Test an all-zero linear model scores 0."""
        model = LinearModel(np.zeros(6), 0.0, np.zeros(6), np.ones(6), "edgefeat")
        assert score(model, FeatureVector(rng.random(6), "edgefeat")) == 0.0

    def test_linear_score_monotone_in_feature(self):
        """Test the linear score grows with a positively weighted feature."""
        weights = np.zeros(6)
        weights[1] = 1.0
        model = LinearModel(weights, 0.0, np.full(6, 2.0), np.full(6, 3.0), "edgefeat")
        scores = [score(model, FeatureVector([0, v, 0, 0, 0, 0], "edgefeat")) for v in (-1.0, 0.0, 5.0)]
        assert scores == sorted(scores)
        assert scores[1] == pytest.approx(-2.0 / 3.0)

    def test_constant_tree(self, rng):
        """Test a leaf-only tree scores its confidence."""
        model = TreeModel(root=TreeNode(label="attack", confidence=0.8), scheme="lbp59", max_depth=0)
        values = rng.random(59)
        assert score(model, FeatureVector(values / values.sum(), "lbp59")) == 0.8

    def test_scheme_mismatch(self):
        """Test the model and feature schemes must match."""
        model = LinearModel(np.zeros(6), 0.0, np.zeros(6), np.ones(6), "edgefeat")
        with pytest.raises(FeatureError):
            score(model, FeatureVector(np.full(59, 1 / 59), "lbp59"))

    def test_model_files_score_identically(self, tmp_path, rng):
        """Test saved and reloaded models score the same."""
        rows = rng.random((50, 3))
        samples = _edgefeat_samples(rows, rows[:, 0] > 0.5)
        for name, model in (
            ("linear", train_linear(samples)),
            ("tree", train_tree(samples, prune_set=samples[:20])),
        ):
            path = tmp_path / f"{name}.model"
            save_model(model, path)
            loaded = load_model(path)
            assert type(loaded) is type(model)
            assert loaded.scheme == "edgefeat"
            for sample in samples:
                assert score(loaded, sample.features) == score(model, sample.features)

    def test_model_file_needs_scheme(self, tmp_path):
        """Test a container without a scheme tag is not a model."""
        path = tmp_path / "bank.cnwt"
        save_bsif_bank(generate_bsif_bank(1), path)
        with pytest.raises(TrainingError):
            load_model(path)


class TestExtractorRegistry:
    """Test extractor lookup."""

    @pytest.mark.parametrize(
        "scheme, extractor_cls",
        [("lbp59", LbpExtractor), ("bsif4096", BsifExtractor), ("edgefeat", EdgeFeatureExtractor)],
    )
    def test_lookup(self, scheme, extractor_cls):
        """Test each scheme maps to its extractor and length."""
        extractor = get_extractor(scheme)
        assert isinstance(extractor, extractor_cls)
        assert extractor.length == len(extractor.extract(Image.constant(16, 16, 0.5)))

    def test_unknown_scheme(self):
        """Test an unknown scheme is rejected."""
        with pytest.raises(FeatureError):
            get_extractor("hog")
