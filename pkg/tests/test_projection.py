import numpy as np
import pytest

from dbl.audio import AudioClip, StemPair, apply_gain_db, mix
from dbl.errors import NoSignalError, ShapeMismatchError
from dbl.loudness import dialogue_activity, measure_ld
from dbl.projection import Projector, project, projected_ld

from conftest import FS, normalized_stem_pair, white_noise

TAPS = 128  # short filters keep unit tests fast; defaults covered in acceptance


@pytest.fixture(scope="module")
def refs():
    fg = white_noise(1.0, rms=0.1, seed=60)
    bg = white_noise(1.0, rms=0.1, seed=61)
    return StemPair(fg, bg)


def rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x**2)))


class TestProject:
    def test_member_of_subspace_comes_back_clean(self, refs):
        dec = project(refs.fg, refs, TAPS)
        assert rms(dec.fg_part.data - refs.fg.data) < 1e-6
        assert rms(dec.bg_part.data) < 1e-6
        assert rms(dec.artifact.data) < 1e-6

    def test_known_mixture_coefficients_recovered(self, refs):
        sig = AudioClip(0.5 * refs.fg.data + 0.2 * refs.bg.data, FS)
        dec = project(sig, refs, TAPS)
        assert rms(dec.fg_part.data) / rms(refs.fg.data) == pytest.approx(0.5, rel=0.01)
        assert rms(dec.bg_part.data) / rms(refs.bg.data) == pytest.approx(0.2, rel=0.01)
        assert rms(dec.artifact.data) < 0.01 * rms(sig.data)

    def test_independent_noise_lands_in_artifact(self, refs):
        noise = white_noise(1.0, rms=0.05, seed=62)
        sig = mix(refs.fg, noise)
        dec = project(sig, refs, TAPS)
        ratio = np.sum(dec.artifact.data**2) / np.sum(noise.data**2)
        assert ratio == pytest.approx(1.0, abs=0.05)

    def test_reconstruction_identity(self, refs):
        sig = AudioClip(0.3 * refs.fg.data + 0.7 * refs.bg.data, FS)
        dec = project(sig, refs, TAPS)
        recon = dec.fg_part.data + dec.bg_part.data + dec.artifact.data
        assert rms(recon - sig.data) < 1e-6 * rms(sig.data)

    def test_idempotence(self, refs):
        sig = mix(refs.fg, white_noise(1.0, rms=0.05, seed=63))
        first = project(sig, refs, TAPS)
        second = project(first.fg_part, refs, TAPS)
        rel = rms(second.fg_part.data - first.fg_part.data) / rms(first.fg_part.data)
        assert rel < 1e-6

    def test_energy_pythagoras(self, refs):
        sig = mix(refs.fg, white_noise(1.0, rms=0.05, seed=64))
        dec = project(sig, refs, TAPS)
        proj = dec.fg_part.data + dec.bg_part.data
        lhs = np.sum(sig.data**2)
        rhs = np.sum(proj**2) + np.sum(dec.artifact.data**2)
        assert abs(lhs - rhs) / lhs < 1e-5

    def test_normal_equations_solved(self, refs):
        dec = project(refs.fg, refs, TAPS)
        assert dec.normal_eq_residual < 1e-6

    def test_filtered_reference_is_captured(self, refs):
        # a short FIR of the FG ref lies inside the span
        fir = np.array([0.7, 0.0, -0.2, 0.1])
        filtered = np.apply_along_axis(lambda r: np.convolve(r, fir)[: refs.fg.n_samples], 1, refs.fg.data)
        dec = project(AudioClip(filtered, FS), refs, TAPS)
        assert rms(dec.artifact.data) < 1e-6 * rms(filtered)
        assert rms(dec.bg_part.data) < 1e-6 * rms(filtered)

    def test_stereo_cross_channel_leakage_allowed(self):
        stems = normalized_stem_pair(duration_s=1.0, channels=2, seed=65)
        swapped = AudioClip(stems.fg.data[::-1].copy(), FS)  # L/R swap of FG
        dec = project(swapped, stems, TAPS)
        assert rms(dec.artifact.data) < 1e-6 * rms(swapped.data)
        assert rms(dec.fg_part.data - swapped.data) < 1e-6 * rms(swapped.data)

    def test_shape_mismatch(self, refs):
        with pytest.raises(ShapeMismatchError):
            project(white_noise(0.5, seed=66), refs, TAPS)

    def test_all_zero_refs_rejected(self):
        zero = AudioClip(np.zeros((1, FS)), FS)
        with pytest.raises(NoSignalError):
            project(white_noise(1.0, seed=67), StemPair(zero, zero), TAPS)

    def test_bad_filter_len(self, refs):
        with pytest.raises(ValueError):
            project(refs.fg, refs, 0)

    def test_projector_reuse_matches_one_shot(self, refs):
        projector = Projector(refs, TAPS)
        sig = AudioClip(0.4 * refs.fg.data + 0.3 * refs.bg.data, FS)
        a = projector.project(sig)
        b = project(sig, refs, TAPS)
        assert np.array_equal(a.fg_part.data, b.fg_part.data)
        assert np.array_equal(a.artifact.data, b.artifact.data)


class TestNormalEquationsOracle:
    def test_gram_and_rhs_match_explicit_design_matrix(self):
        # brute force: build the delayed-reference design matrix A and
        # compare A'A and A'sig against the FFT-based assembly
        n, flen = 400, 8
        rng = np.random.default_rng(71)
        fg = AudioClip(rng.standard_normal((1, n)), FS)
        bg = AudioClip(rng.standard_normal((1, n)), FS)
        sig = AudioClip(rng.standard_normal((1, n)), FS)
        projector = Projector(StemPair(fg, bg), flen)

        columns = []
        for ref in (fg.data[0], bg.data[0]):
            for k in range(flen):
                col = np.zeros(n)
                col[k:] = ref[: n - k]
                columns.append(col)
        design = np.column_stack(columns)
        assert np.allclose(projector._gram, design.T @ design, atol=1e-8)

        dec = projector.project(sig)
        coeffs = np.linalg.lstsq(design, sig.data[0], rcond=None)[0]
        fitted = design @ coeffs
        assert np.allclose(dec.fg_part.data[0] + dec.bg_part.data[0], fitted, atol=1e-6)


class TestProjectedLd:
    def test_consistent_with_direct_measurement(self):
        stems = normalized_stem_pair(duration_s=1.5, ld_lu=10.0, seed=68)
        mask = dialogue_activity(stems.fg)
        direct = measure_ld(stems, mask)
        via_projection = projected_ld(mix(stems.fg, stems.bg), stems, mask, TAPS)
        assert via_projection == pytest.approx(direct, abs=0.2)

    def test_attenuation_shifts_projected_ld(self):
        stems = normalized_stem_pair(duration_s=1.5, ld_lu=0.0, seed=69)
        mask = dialogue_activity(stems.fg)
        base = projected_ld(mix(stems.fg, stems.bg), stems, mask, TAPS)
        nine = projected_ld(
            mix(stems.fg, apply_gain_db(stems.bg, -9.0)), stems, mask, TAPS
        )
        assert nine - base == pytest.approx(9.0, abs=0.2)

    def test_fg_only_mix_raises_no_signal(self):
        stems = normalized_stem_pair(duration_s=1.0, ld_lu=0.0, seed=70)
        mask = dialogue_activity(stems.fg)
        with pytest.raises(NoSignalError):
            projected_ld(stems.fg, stems, mask, TAPS)
