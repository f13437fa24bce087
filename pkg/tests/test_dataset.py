import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultdiag.dataset import (
    LABEL_NAMES,
    Dataset,
    DatasetError,
    LabeledSample,
    Scaler,
    SimulationSetup,
    apply,
    build_dataset,
    load_csv,
    normalize,
    save_csv,
    split,
    vibration_path,
)
from faultdiag.features import FEATURE_NAMES, FeatureVector
from faultdiag.mlc import Severity, iso_severity_lookup


def synthetic(labels, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(
        [
            LabeledSample(i, FeatureVector(rng.normal(size=27)), ub, mis, Severity.GOOD, (1.0, 1.0, 0.5))
            for i, (ub, mis) in enumerate(labels)
        ]
    )


def balanced(n_per=16):
    return synthetic([lab for lab in [(0, 0), (1, 0), (0, 1), (1, 1)] for _ in range(n_per)])


@pytest.fixture(scope="module")
def ds():
    return build_dataset(seed=42)


class TestBuild:
    def test_size_and_balance(self, ds):
        assert len(ds) == 64
        assert ds.X.shape == (64, 27)
        assert ds.Y[:, 0].sum() == 32 and ds.Y[:, 1].sum() == 32
        combos, counts = np.unique(ds.Y, axis=0, return_counts=True)
        assert len(combos) == 4 and set(counts) == {16}
        assert np.all(np.isfinite(ds.X))

    def test_severity_matches_iso_lookup(self, ds):
        for s in ds.samples:
            assert s.severity == iso_severity_lookup(s.vibration[0])
            assert s.vibration[0] == max(s.vibration[1:])

    def test_originals_only(self):
        small = build_dataset(per_condition=0, seed=42)
        assert len(small) == 4
        assert [tuple(y) for y in small.Y] == [(0, 0), (1, 0), (0, 1), (1, 1)]

    def test_originals_are_shared_with_full_build(self, ds):
        small = build_dataset(per_condition=0, seed=42)
        # sample ids differ between builds, so compare the healthy original (id 0)
        np.testing.assert_array_equal(small.X[0], ds.X[0])

    def test_deterministic(self):
        a = build_dataset(per_condition=1, seed=3)
        b = build_dataset(per_condition=1, seed=3)
        c = build_dataset(per_condition=1, seed=4)
        np.testing.assert_array_equal(a.X, b.X)
        assert not np.array_equal(a.X, c.X)

    def test_bad_arguments(self):
        with pytest.raises(DatasetError):
            build_dataset(per_condition=-1)
        with pytest.raises(DatasetError):
            SimulationSetup(severity_levels=())
        with pytest.raises(DatasetError):
            SimulationSetup(machines=())


class TestContainer:
    def test_duplicate_ids(self):
        fv = FeatureVector(np.zeros(27))
        with pytest.raises(DatasetError):
            Dataset([LabeledSample(1, fv, 0, 0, 0), LabeledSample(1, fv, 1, 0, 0)])

    def test_empty(self):
        with pytest.raises(DatasetError):
            Dataset([])

    def test_bad_label(self):
        with pytest.raises(DatasetError):
            LabeledSample(0, FeatureVector(np.zeros(27)), 2, 0, 0)


class TestNormalize:
    def test_hand_example(self):
        sc = Scaler([0.0, 10.0, 5.0], [2.0, 20.0, 5.0])
        np.testing.assert_allclose(sc.transform([[1.0, 10.0, 5.0], [3.0, 25.0, 9.0]]), [[0.5, 0.0, 0.0], [1.5, 1.5, 0.0]])

    def test_train_lands_in_unit_interval(self):
        data = balanced()
        scaler, scaled = normalize(data)
        assert scaled.X.min() == 0.0 and scaled.X.max() == 1.0
        np.testing.assert_allclose(scaled.X.min(axis=0), 0.0)
        np.testing.assert_allclose(scaled.X.max(axis=0), 1.0)

    def test_fit_on_train_only(self):
        train, test = split(balanced(), 0.8, 1)
        scaler, _ = normalize(train)
        np.testing.assert_array_equal(scaler.min, train.X.min(axis=0))
        out = apply(scaler, test).X
        np.testing.assert_allclose(out, (test.X - scaler.min) / (scaler.max - scaler.min))

    def test_round_trip_dict(self):
        sc = Scaler([0.0, 1.0], [2.0, 3.0])
        back = Scaler.from_dict(sc.to_dict())
        np.testing.assert_array_equal(back.min, sc.min)
        np.testing.assert_array_equal(back.max, sc.max)

    def test_inverted(self):
        with pytest.raises(DatasetError):
            Scaler([1.0], [0.0])

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 500), a=st.floats(0.1, 100), b=st.floats(-100, 100))
    def test_affine_invariance(self, seed, a, b):
        data = balanced(4)
        shifted = data.with_features(a * data.X + b)
        _, s1 = normalize(data)
        _, s2 = normalize(shifted)
        np.testing.assert_allclose(s1.X, s2.X, atol=1e-9)


class TestSplit:
    def test_sizes_64(self):
        train, test = split(balanced(), 0.8, 42)
        assert (len(train), len(test)) == (51, 13)
        assert set(train.ids).isdisjoint(test.ids)
        assert set(train.ids) | set(test.ids) == set(range(64))

    def test_stratified(self):
        train, test = split(balanced(), 0.8, 42)
        _, counts = np.unique(test.Y, axis=0, return_counts=True)
        assert len(counts) == 4 and counts.max() - counts.min() <= 1

    @pytest.mark.parametrize("n,frac,expect", [(10, 0.75, 8), (10, 0.25, 3), (64, 0.5, 32), (5, 0.3, 2)])
    def test_round_half_up(self, n, frac, expect):
        data = synthetic([(i % 2, 0) for i in range(n)])
        train, _ = split(data, frac, 0)
        assert len(train) == expect

    def test_deterministic_and_seeded(self):
        a, _ = split(balanced(), 0.8, 42)
        b, _ = split(balanced(), 0.8, 42)
        c, _ = split(balanced(), 0.8, 43)
        assert list(a.ids) == list(b.ids)
        assert set(a.ids) != set(c.ids)

    def test_bad_fraction(self):
        for f in (0.0, 1.0, 1.5):
            with pytest.raises(DatasetError):
                split(balanced(), f)

    def test_unstratifiable_warns(self):
        # three pairs cannot each keep a member on both sides with only two training slots
        data = synthetic([(0, 0), (0, 0), (1, 0), (1, 0), (0, 1), (0, 1)])
        with pytest.warns(UserWarning):
            train, test = split(data, 0.3, 0)
        assert len(train) == 2 and len(test) == 4


class TestCsv:
    def test_round_trip(self, ds, tmp_path):
        path = save_csv(ds, tmp_path / "d.csv")
        header = path.read_text().splitlines()[0].split(",")
        assert header == ["id", *FEATURE_NAMES, *LABEL_NAMES, "Severity"]
        assert len(header) == 31
        back = load_csv(path)
        np.testing.assert_allclose(back.X, ds.X, atol=5e-7)
        np.testing.assert_array_equal(back.Y, ds.Y)
        np.testing.assert_array_equal(back.severities, ds.severities)
        np.testing.assert_allclose(back.X_vib, ds.X_vib, atol=5e-7)
        assert vibration_path(path).exists()

    def test_byte_identical_rebuild(self, ds, tmp_path):
        a = save_csv(ds, tmp_path / "a.csv").read_bytes()
        b = save_csv(build_dataset(seed=42), tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_missing_column_named(self, ds, tmp_path):
        path = save_csv(ds, tmp_path / "d.csv")
        lines = path.read_text().splitlines()
        lines[0] = lines[0].replace("gen_vib_kurtosis", "gen_vib_kurt")
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DatasetError, match="gen_vib_kurtosis"):
            load_csv(path)

    def test_bad_row_reported(self, ds, tmp_path):
        path = save_csv(ds, tmp_path / "d.csv")
        lines = path.read_text().splitlines()
        lines[3] = lines[3].replace(lines[3].split(",")[2], "abc", 1)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DatasetError, match="row 4"):
            load_csv(path)

    def test_short_row(self, ds, tmp_path):
        path = save_csv(ds, tmp_path / "d.csv")
        lines = path.read_text().splitlines()
        lines[2] = ",".join(lines[2].split(",")[:-2])
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DatasetError, match="row 3"):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError):
            load_csv(tmp_path / "nope.csv")

    def test_severity_label_text(self, ds, tmp_path):
        path = save_csv(ds, tmp_path / "d.csv")
        labels = {line.rsplit(",", 1)[1] for line in path.read_text().splitlines()[1:]}
        assert labels <= {s.label for s in Severity}


class TestWorkedExamples:
    def _one_column(self, values):
        X = np.zeros((len(values), 27))
        X[:, 0] = values
        return synthetic([(0, 0)] * len(values)).with_features(X)

    def test_column_2_4_6(self):
        scaler, scaled = normalize(self._one_column([2.0, 4.0, 6.0]))
        np.testing.assert_allclose(scaled.X[:, 0], [0.0, 0.5, 1.0])
        assert scaler.transform(np.r_[8.0, np.zeros(26)])[0] == 1.5

    def test_constant_column_maps_to_zero(self):
        _, scaled = normalize(self._one_column([3.0, 3.0, 3.0]))
        assert not scaled.X.any()

    def test_half_split_per_condition(self):
        train, test = split(balanced(), 0.5, 9)
        for combo in [(0, 0), (1, 0), (0, 1), (1, 1)]:
            n_train = int(np.sum(np.all(train.Y == combo, axis=1)))
            assert abs(n_train - 8) <= 1

    def test_severity_text_parses(self):
        assert Severity.parse("Good") is Severity.GOOD
        assert Severity.parse("'Good'") is Severity.GOOD
