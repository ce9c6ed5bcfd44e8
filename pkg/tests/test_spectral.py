import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from frele.errors import InvalidInput, InvalidSpectrum, ShapeMismatch, TooFewBins
from frele.spectral import (
    Spectrum,
    band_partition,
    band_rmse,
    band_rmse_arrays,
    fft,
    full_spectrum,
    ifft,
    irfft,
    irfft_array,
    rdft_naive,
    rfft,
    rfft_adjoint,
    rfft_array,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


class TestNaive:
    def test_impulse(self):
        np.testing.assert_allclose(rdft_naive([1, 0, 0, 0]).bins, [1, 1, 1], atol=1e-15)

    def test_constant(self):
        np.testing.assert_allclose(rdft_naive([2, 2, 2, 2]).bins, [8, 0, 0], atol=1e-15)

    def test_quarter_wave(self):
        np.testing.assert_allclose(rdft_naive([0, 1, 0, -1]).bins, [0, -2j, 0], atol=1e-15)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInput):
            rdft_naive([1.0, np.inf])
        with pytest.raises(InvalidInput):
            rfft([np.nan])


class TestFast:
    def test_matches_naive_256(self, rng):
        x = rng.normal(size=256)
        assert np.max(np.abs(rfft(x).bins - rdft_naive(x).bins)) < 1e-9

    def test_single_sample(self):
        assert rfft([7.0]).bins.tolist() == [7.0]

    @pytest.mark.parametrize("n", [2, 3, 5, 7, 12, 96, 97, 100, 131, 250, 4096])
    def test_lengths(self, n, rng):
        x = rng.normal(size=n)
        assert np.max(np.abs(rfft(x).bins - rdft_naive(x).bins)) < 1e-9

    @given(st.integers(1, 64).flatmap(lambda n: st.tuples(arrays(float, n, elements=finite), arrays(float, n, elements=finite))), finite, finite)
    def test_linearity(self, xy, a, b):
        x, y = xy
        lhs = rfft(a * x + b * y).bins
        rhs = a * rfft(x).bins + b * rfft(y).bins
        assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1.0, np.abs(rhs).max())

    def test_complex_fft_roundtrip(self, rng):
        z = rng.normal(size=(3, 45)) + 1j * rng.normal(size=(3, 45))
        np.testing.assert_allclose(ifft(fft(z)), z, atol=1e-12)

    def test_axis(self, rng):
        x = rng.normal(size=(4, 10, 3))
        F = rfft_array(x, axis=1)
        assert F.shape == (4, 6, 3)
        np.testing.assert_allclose(F[2, :, 1], rfft(x[2, :, 1]).bins, atol=1e-12)


class TestInverse:
    def test_round_trip_100(self, rng):
        x = rng.normal(size=100)
        assert np.max(np.abs(irfft(rfft(x)) - x)) < 1e-9

    def test_dc_only(self):
        np.testing.assert_allclose(irfft(Spectrum([8, 0, 0], 4)), [2, 2, 2, 2], atol=1e-15)

    def test_quarter_wave(self):
        np.testing.assert_allclose(irfft(Spectrum([0, -2j, 0], 4)), [0, 1, 0, -1], atol=1e-15)

    def test_inconsistent_length(self):
        with pytest.raises(InvalidSpectrum):
            Spectrum([1, 2, 3, 4], 4)
        with pytest.raises(InvalidSpectrum):
            irfft_array(np.zeros(4), 4)

    def test_dc_must_be_real(self):
        with pytest.raises(InvalidSpectrum):
            Spectrum([1j, 0, 0], 4)


class TestProperties:
    def test_parseval_hand_example(self):
        s = rfft([1.0, 2.0, 3.0, 4.0])
        full = full_spectrum(s)
        assert np.sum(np.abs(full) ** 2) == pytest.approx(120.0, rel=1e-12)
        assert np.sum(np.abs(full) ** 2) / 4 == pytest.approx(30.0, rel=1e-12)

    @given(st.integers(1, 200).flatmap(lambda n: arrays(float, n, elements=finite)))
    def test_parseval(self, x):
        energy = float(np.sum(x * x))
        spec_energy = float(np.sum(np.abs(full_spectrum(rfft(x))) ** 2)) / x.shape[0]
        assert spec_energy == pytest.approx(energy, rel=1e-9, abs=1e-9)

    @given(st.integers(1, 200).flatmap(lambda n: arrays(float, n, elements=finite)))
    def test_dc_and_nyquist_real(self, x):
        s = rfft(x)
        assert s.bins[0].imag == 0.0
        if x.shape[0] % 2 == 0:
            assert s.bins[-1].imag == 0.0

    def test_adjoint_identity(self, rng):
        # <g, F x>_R == <adjoint(g), x> for the real inner product on C^B
        for n in (1, 2, 7, 16, 96):
            x = rng.normal(size=n)
            g = rng.normal(size=n // 2 + 1) + 1j * rng.normal(size=n // 2 + 1)
            lhs = np.sum((np.conj(g) * rfft_array(x)).real)
            assert lhs == pytest.approx(np.dot(rfft_adjoint(g, n), x), rel=1e-10, abs=1e-10)


class TestBands:
    @pytest.mark.parametrize(
        "B, lf, mf, hf",
        [(49, (0, 5), (5, 25), (25, 49)), (10, (0, 1), (1, 5), (5, 10)), (3, (0, 1), (1, 2), (2, 3))],
    )
    def test_examples(self, B, lf, mf, hf):
        p = band_partition(B)
        assert (p.lf.start, p.lf.stop) == lf
        assert (p.mf.start, p.mf.stop) == mf
        assert (p.hf.start, p.hf.stop) == hf

    def test_cover_all_sizes(self):
        for B in range(3, 4097):
            p = band_partition(B)
            assert p.lf.start == 0 and p.lf.stop == p.mf.start and p.mf.stop == p.hf.start and p.hf.stop == B
            assert len(p.lf) > 0 and len(p.mf) > 0 and len(p.hf) > 0

    def test_exact_ceiling(self):
        # 0.1 * 30 is 3.0000000000000004 in floating point; the boundary must still be 3
        assert band_partition(30).lf == range(0, 3)

    def test_too_few(self):
        with pytest.raises(TooFewBins):
            band_partition(2)


class TestBandRMSE:
    def test_identical(self, rng):
        specs = [rfft(rng.normal(size=8)) for _ in range(3)]
        r = band_rmse(specs, specs, band_partition(5))
        assert r.as_row() == (0.0, 0.0, 0.0, 0.0)

    def test_hand_example(self):
        r = band_rmse([Spectrum([1, 0, 0], 4)], [Spectrum([0, 0, 0], 4)], band_partition(3))
        assert r.lf_rmse == 1.0 and r.mf_rmse == 0.0 and r.hf_rmse == 0.0
        assert r.gf_rmse == pytest.approx(math.sqrt(1 / 3))

    def test_global_is_not_band_average(self, rng):
        t = rng.normal(size=(5, 11)) + 0j
        p = rng.normal(size=(5, 11)) + 0j
        part = band_partition(11)
        r = band_rmse_arrays(t, p, part)
        assert r.gf_rmse == pytest.approx(math.sqrt(np.mean(np.abs(t - p) ** 2)))

    def test_mismatch(self):
        with pytest.raises(ShapeMismatch):
            band_rmse([Spectrum([1, 0, 0], 4)], [], band_partition(3))
        with pytest.raises(ShapeMismatch):
            band_rmse_arrays(np.zeros((2, 3)), np.zeros((2, 4)), band_partition(3))
