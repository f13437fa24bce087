import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from faultdiag.dataset import SimulationSetup, build_reference, default_scenarios, simulate_run
from faultdiag.features import (
    FEATURE_NAMES,
    N_FEATURES,
    SIGNATURES,
    Baseline,
    FaultSignature,
    FeatureError,
    FeatureVector,
    build_feature_vector,
    entropy_deviation,
    form_factor,
    kurtosis,
    preprocess,
    signature_distance,
    spectral_entropy,
)
from faultdiag.sigsim import NoiseSpec, SignalRecord
from faultdiag.spectral import PsdEstimate, fft_magnitude

FS = 10000.0


def record(x, units="mm_per_s"):
    x = np.asarray(x, dtype=float)
    return SignalRecord("ch", FS, len(x) / FS, x, units)


def sine(freq=25.0, amp=1.0, n=20000, offset=0.0):
    return offset + amp * np.sin(2 * np.pi * freq * np.arange(n) / FS)


def flat_psd(n):
    return PsdEstimate(np.arange(n, dtype=float), np.ones(n), "multitaper")


class TestPreprocess:
    def test_vibration_mean_removed(self):
        out = preprocess(record(sine(offset=4.0)))
        assert abs(out.samples.mean()) < 1e-12

    def test_current_unit_fundamental(self):
        out = preprocess(record(sine(60.0, 7.3, offset=0.2), "ampere"), 60.0)
        assert fft_magnitude(out).at(60.0) == pytest.approx(1.0, rel=1e-12)

    def test_current_needs_supply(self):
        with pytest.raises(FeatureError):
            preprocess(record(sine(), "ampere"))

    def test_zero_fundamental(self):
        with pytest.raises(FeatureError):
            preprocess(record(np.zeros(100), "ampere"), 60.0)


class TestTimeDomain:
    def test_form_factor_sine_against_quadrature(self):
        ms, _ = integrate.quad(lambda t: np.sin(t) ** 2, 0, 2 * np.pi)
        ma, _ = integrate.quad(lambda t: abs(np.sin(t)), 0, 2 * np.pi, points=[np.pi])
        oracle = np.sqrt(ms / (2 * np.pi)) / (ma / (2 * np.pi))
        # 400 samples per period: the sampled mean of |sin| carries O(1/n^2) bias
        assert form_factor(sine()) == pytest.approx(oracle, rel=1e-4)
        assert oracle == pytest.approx(np.pi / (2 * np.sqrt(2)), rel=1e-9)

    def test_form_factor_square_wave(self):
        assert form_factor(np.sign(sine(25.0, 1.0, 20000) + 1e-15)) == pytest.approx(1.0)

    def test_form_factor_zero(self):
        with pytest.raises(FeatureError):
            form_factor(np.zeros(10))

    def test_kurtosis_closed_forms(self):
        assert kurtosis(sine()) == pytest.approx(1.5, abs=1e-3)
        assert kurtosis([1.0, -1.0]) == 1.0

    def test_kurtosis_gaussian_and_uniform(self):
        rng = np.random.default_rng(0)
        assert kurtosis(rng.normal(size=1_000_000)) == pytest.approx(3.0, abs=0.05)
        assert kurtosis(rng.uniform(-1, 1, 200_000)) == pytest.approx(1.8, abs=0.02)

    def test_kurtosis_degenerate(self):
        with pytest.raises(FeatureError):
            kurtosis([1.0])
        with pytest.raises(FeatureError):
            kurtosis(np.ones(10))

    @settings(max_examples=30, deadline=None)
    @given(c=st.floats(1e-3, 1e3), seed=st.integers(0, 999))
    def test_scale_invariance(self, c, seed):
        x = np.random.default_rng(seed).normal(size=200)
        assert form_factor(c * x) == pytest.approx(form_factor(x), rel=1e-9)
        assert kurtosis(c * x) == pytest.approx(kurtosis(x), rel=1e-9)


class TestEntropy:
    def test_flat_spectrum(self):
        assert spectral_entropy(flat_psd(100)) == pytest.approx(np.log(100))

    def test_single_bin(self):
        p = np.zeros(50)
        p[7] = 3.0
        assert spectral_entropy(PsdEstimate(np.arange(50.0), p, "periodogram")) == 0.0

    def test_zero_power(self):
        with pytest.raises(FeatureError):
            spectral_entropy(PsdEstimate(np.arange(5.0), np.zeros(5), "periodogram"))

    def test_deviation_against_baseline(self):
        base = Baseline({"v": flat_psd(100)})
        assert entropy_deviation(flat_psd(100), base, "v") == pytest.approx(0.0)
        assert entropy_deviation(flat_psd(10), base, "v") == pytest.approx(np.log(10) - np.log(100))
        with pytest.raises(FeatureError):
            entropy_deviation(flat_psd(10), base, "missing")


class TestSignatures:
    @pytest.mark.parametrize("sig", SIGNATURES)
    def test_own_profile_has_zero_distance(self, sig):
        assert signature_distance(sig.profile(), sig) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_profile(self):
        ub = SIGNATURES[1]
        assert signature_distance([1.0, 0.0, 0.0], ub) == pytest.approx(np.sqrt(2))

    def test_hand_computed(self):
        mis = FaultSignature("misalignment", ((0.5, 0.5), (1.0, 1.0), (2.0, 1.0)))
        obs = np.array([0.0, 1.0, 0.0])
        ref = np.array([0.5, 1.0, 1.0]) / 1.5
        assert signature_distance(obs, mis) == pytest.approx(np.linalg.norm(obs - ref))

    @settings(max_examples=50, deadline=None)
    @given(
        peaks=st.lists(st.floats(1e-6, 1e3), min_size=3, max_size=3),
        c=st.floats(1e-3, 1e3),
    )
    def test_bounded_and_scale_free(self, peaks, c):
        for sig in SIGNATURES:
            d = signature_distance(peaks, sig)
            assert 0.0 <= d <= np.sqrt(2) + 1e-12
            assert signature_distance(np.array(peaks) * c, sig) == pytest.approx(d, abs=1e-9)

    def test_validation(self):
        with pytest.raises(FeatureError):
            FaultSignature("bearing", ((1.0, 1.0),))
        with pytest.raises(FeatureError):
            FaultSignature("healthy", ((1.0, 1.0),))
        with pytest.raises(FeatureError):
            FaultSignature("unbalance")
        with pytest.raises(FeatureError):
            signature_distance([0.0, 0.0, 0.0], SIGNATURES[0])
        with pytest.raises(FeatureError):
            signature_distance([1.0, 2.0], SIGNATURES[0])


def test_feature_vector_validation():
    with pytest.raises(FeatureError):
        FeatureVector(np.zeros(26))
    with pytest.raises(FeatureError, match="gen_ia_pk1x"):
        FeatureVector(np.r_[np.nan, np.zeros(26)])
    fv = FeatureVector(np.arange(27.0))
    assert list(fv.as_dict()) == list(FEATURE_NAMES)


@pytest.fixture(scope="module")
def pipeline_parts():
    setup = SimulationSetup()
    noise = NoiseSpec(0.05, 10, 20, 5.0, 500.0, 0.05, 1.0)
    baseline = build_reference(setup, noise, 42)
    scen = {s.name: s for s in default_scenarios()}

    def features(name, sample_id=1, disturbed=False, scale=1.0):
        cur, vib = simulate_run(setup, scen[name], noise, 42, sample_id, disturbed)
        if scale != 1.0:
            cur = [c.with_samples(c.samples * scale) for c in cur]
        return build_feature_vector(cur, vib, baseline, setup.machines)

    return features


class TestFeatureVector:
    def test_shape_and_finite(self, pipeline_parts):
        fv = pipeline_parts("combined", disturbed=True)
        assert fv.values.shape == (N_FEATURES,)
        assert np.all(np.isfinite(fv.values))

    def test_current_scale_robustness(self, pipeline_parts):
        # currents are normalized to the fundamental, so a gain change must not move features
        a = pipeline_parts("misalignment").values
        b = pipeline_parts("misalignment", scale=3.7).values
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-12)

    def test_distances_pick_the_fault(self, pipeline_parts):
        idx = {n: FEATURE_NAMES.index(n) for n in ("dist_healthy", "dist_unbalance", "dist_misalignment")}
        ub = pipeline_parts("unbalance").values
        mis = pipeline_parts("misalignment").values
        healthy = pipeline_parts("healthy").values
        assert ub[idx["dist_unbalance"]] < ub[idx["dist_misalignment"]]
        assert mis[idx["dist_misalignment"]] < mis[idx["dist_unbalance"]]
        assert healthy[idx["dist_healthy"]] < min(healthy[idx["dist_unbalance"]], healthy[idx["dist_misalignment"]])

    def test_fault_raises_1x_peak(self, pipeline_parts):
        i = FEATURE_NAMES.index("gen_ia_pk1x")
        assert pipeline_parts("unbalance").values[i] > 4 * pipeline_parts("healthy").values[i]

    def test_wrong_channel_count(self, pipeline_parts):
        with pytest.raises(FeatureError):
            build_feature_vector([], [], Baseline({}), ())


class TestWorkedExamples:
    def test_constant_vibration_preprocesses_to_zero(self):
        assert not preprocess(record(np.full(500, 2.5))).samples.any()

    def test_preprocess_idempotent(self):
        x = sine(60.0)
        out = preprocess(record(x, "ampere"), 60.0)
        np.testing.assert_allclose(out.samples, x, atol=1e-9)
        again = preprocess(out, 60.0)
        np.testing.assert_allclose(again.samples, out.samples, atol=1e-9)

    def test_current_with_amplitude_five(self):
        out = preprocess(record(sine(60.0, 5.0), "ampere"), 60.0)
        assert fft_magnitude(out).at(60.0) == pytest.approx(1.0, abs=1e-6)

    def test_form_factor_constant_and_gaussian(self):
        assert form_factor(np.full(10, -3.0)) == 1.0
        g = np.random.default_rng(1).normal(size=1_000_000)
        assert form_factor(g) == pytest.approx(np.sqrt(np.pi / 2), abs=0.01)

    def test_uniform_against_single_bin_baseline(self):
        single = np.zeros(100)
        single[0] = 1.0
        base = Baseline({"v": PsdEstimate(np.arange(100.0), single, "multitaper")})
        assert base.entropies["v"] == 0.0
        assert entropy_deviation(flat_psd(100), base, "v") == pytest.approx(np.log(100), abs=1e-12)

    def test_self_deviation_is_zero(self):
        psd = PsdEstimate(np.arange(50.0), np.random.default_rng(2).uniform(size=50), "multitaper")
        assert abs(entropy_deviation(psd, Baseline({"v": psd}), "v")) <= 1e-12

    def test_disturbances_raise_entropy(self):
        from faultdiag.sigsim import inject_disturbances
        from faultdiag.spectral import multitaper_psd

        base_sig = record(sine(25.0))
        noisy = inject_disturbances(base_sig, NoiseSpec(0.0, 10, 20, 5.0, 500.0, 0.1, 0.5), 4)
        baseline = Baseline({"v": multitaper_psd(base_sig)})
        assert entropy_deviation(multitaper_psd(noisy), baseline, "v") > 0

    def test_proportional_profile(self):
        mis = SIGNATURES[2]
        assert signature_distance(7.5 * mis.profile(), mis) == pytest.approx(0.0, abs=1e-12)


def test_noiseless_healthy_run():
    setup = SimulationSetup(vib_noise=NoiseSpec(0.0, 0, 0))
    quiet = NoiseSpec(0.0, 0, 0)
    baseline = build_reference(setup, quiet, 1)
    scen = {s.name: s for s in default_scenarios()}
    out = {}
    for name in ("healthy", "combined"):
        cur, vib = simulate_run(setup, scen[name], quiet, 1, 0, False)
        out[name] = build_feature_vector(cur, vib, baseline, setup.machines).values
    healthy, combined = out["healthy"], out["combined"]
    # spectral block stays at the leakage floor, well below any fault response
    assert np.all(healthy[:18] < 0.1 * combined[:18])
    assert healthy[24] < min(healthy[25], healthy[26])
