"""Real-input DFTs, frequency bands and band-wise spectral error.

Two independent routes compute the same one-sided spectrum: ``rdft_naive``
evaluates the defining sum directly, ``rfft`` runs a mixed-radix FFT
(radix-2 splits, small odd factors as dense DFTs, Bluestein's chirp-z
algorithm for large odd factors). The
array functions transform along an arbitrary axis so that batches of
``[n, S, C]`` windows can be handled in one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InvalidInput, InvalidSpectrum, ShapeMismatch, TooFewBins


def n_bins(n: int) -> int:
    return n // 2 + 1


@dataclass(frozen=True)
class Spectrum:
    """One-sided spectrum of a real sequence of length ``origin_length``."""

    bins: np.ndarray
    origin_length: int

    def __post_init__(self):
        bins = np.array(self.bins, dtype=complex).reshape(-1)
        n = int(self.origin_length)
        if n < 1 or bins.shape[0] != n_bins(n):
            raise InvalidSpectrum(f"{bins.shape[0]} bins inconsistent with origin length {n}")
        if not np.all(np.isfinite(bins)):
            raise InvalidSpectrum("spectrum has non-finite bins")
        tol = 1e-9 * max(1.0, float(np.max(np.abs(bins))))
        if abs(bins[0].imag) > tol or (n % 2 == 0 and abs(bins[-1].imag) > tol):
            raise InvalidSpectrum("DC and Nyquist bins of a real signal must be real")
        bins.setflags(write=False)
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "origin_length", n)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.bins)

    def __len__(self) -> int:
        return self.bins.shape[0]


def _as_real_signal(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 1:
        raise InvalidInput(f"expected a nonempty 1-D signal, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("signal contains non-finite values")
    return x


def rdft_naive(x) -> Spectrum:
    """Direct evaluation of ``sum_n x[n] exp(-2 pi i k n / N)`` for ``k < N//2 + 1``."""
    x = _as_real_signal(x)
    n = x.shape[0]
    bins = np.empty(n_bins(n), dtype=complex)
    for k in range(bins.shape[0]):
        # k*t mod N keeps the phase argument small and exact
        phase = (k * np.arange(n)) % n
        ang = -2.0 * math.pi * phase / n
        bins[k] = complex(math.fsum(x * np.cos(ang)), math.fsum(x * np.sin(ang)))
    bins[0] = bins[0].real
    if n % 2 == 0:
        bins[-1] = bins[-1].real
    return Spectrum(bins, n)


# ---------------------------------------------------------------- fast path


@lru_cache(maxsize=64)
def _bitrev(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@lru_cache(maxsize=64)
def _twiddles(m: int) -> np.ndarray:
    return np.exp(-2j * np.pi * np.arange(m) / (2 * m))


def _fft_pow2(a: np.ndarray) -> np.ndarray:
    """Iterative radix-2 decimation-in-time FFT along the last axis."""
    n = a.shape[-1]
    lead = a.shape[:-1]
    a = a[..., _bitrev(n)]
    m = 1
    while m < n:
        blk = a.reshape(lead + (n // (2 * m), 2, m))
        even = blk[..., 0, :]
        odd = blk[..., 1, :] * _twiddles(m)
        a = np.concatenate([even + odd, even - odd], axis=-1).reshape(lead + (n,))
        m *= 2
    return a


@lru_cache(maxsize=64)
def _bluestein_plan(n: int) -> tuple[np.ndarray, np.ndarray, int]:
    m = 1 << (2 * n - 1).bit_length()
    k = np.arange(n)
    # k^2 mod 2n keeps the chirp phase accurate for large n
    chirp = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
    b = np.zeros(m, dtype=complex)
    b[:n] = np.conj(chirp)
    b[m - n + 1 :] = np.conj(chirp[1:])[::-1]
    return chirp, _fft_pow2(b), m


_DENSE_ODD_MAX = 64


@lru_cache(maxsize=64)
def _dft_matrix(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(-2j * np.pi * ((k[:, None] * k[None, :]) % n) / n)


def _bluestein(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    chirp, fb, m = _bluestein_plan(n)
    pad = np.zeros(a.shape[:-1] + (m,), dtype=complex)
    pad[..., :n] = a * chirp
    conv = _ifft_pow2(_fft_pow2(pad) * fb)
    return conv[..., :n] * chirp


def _fft_last(a: np.ndarray) -> np.ndarray:
    """Mixed-radix FFT along the last axis.

    Powers of two go through the iterative radix-2 kernel. Other even lengths
    split into even/odd halves recursively; the remaining odd factor is done
    as a small dense DFT, or with Bluestein's algorithm once it is large.
    """
    a = a.astype(complex, copy=False)
    n = a.shape[-1]
    if n == 1:
        return a.copy()
    if n & (n - 1) == 0:
        return _fft_pow2(a)
    if n % 2 == 0:
        even = _fft_last(a[..., 0::2])
        odd = _fft_last(a[..., 1::2]) * _twiddles(n // 2)
        return np.concatenate([even + odd, even - odd], axis=-1)
    if n <= _DENSE_ODD_MAX:
        return a @ _dft_matrix(n).T
    return _bluestein(a)


def _ifft_pow2(a: np.ndarray) -> np.ndarray:
    return np.conj(_fft_pow2(np.conj(a))) / a.shape[-1]


def fft(a, axis: int = -1) -> np.ndarray:
    """Complex forward DFT (no normalization) along ``axis``."""
    a = np.moveaxis(np.asarray(a, dtype=complex), axis, -1)
    return np.moveaxis(_fft_last(a), -1, axis)


def ifft(a, axis: int = -1) -> np.ndarray:
    """Inverse of :func:`fft` (normalized by 1/N)."""
    a = np.moveaxis(np.asarray(a, dtype=complex), axis, -1)
    out = np.conj(_fft_last(np.conj(a))) / a.shape[-1]
    return np.moveaxis(out, -1, axis)


def rfft_array(x, axis: int = -1) -> np.ndarray:
    """One-sided spectrum of real data along ``axis`` (length N -> N//2 + 1)."""
    x = np.asarray(x, dtype=float)
    xl = np.moveaxis(x, axis, -1)
    n = xl.shape[-1]
    out = _fft_last(xl)[..., : n_bins(n)].copy()
    out[..., 0] = out[..., 0].real
    if n % 2 == 0:
        out[..., -1] = out[..., -1].real
    return np.moveaxis(out, -1, axis)


def irfft_array(s, n: int, axis: int = -1) -> np.ndarray:
    """Real signal of length ``n`` whose one-sided spectrum is ``s``."""
    s = np.moveaxis(np.asarray(s, dtype=complex), axis, -1)
    if s.shape[-1] != n_bins(n):
        raise InvalidSpectrum(f"{s.shape[-1]} bins inconsistent with length {n}")
    full = np.zeros(s.shape[:-1] + (n,), dtype=complex)
    full[..., : s.shape[-1]] = s
    tail = n - s.shape[-1]
    if tail > 0:
        full[..., s.shape[-1] :] = np.conj(s[..., 1 : tail + 1][..., ::-1])
    out = ifft(full).real
    return np.moveaxis(out, -1, axis)


def rfft_adjoint(g, n: int, axis: int = -1) -> np.ndarray:
    """Adjoint of the one-sided real DFT.

    For a real function ``f`` of the spectrum ``F = rfft(x)`` with complex
    gradient ``g = df/dRe F + i df/dIm F``, returns ``df/dx``, which is
    ``Re(sum_k g_k exp(+2 pi i k n / N))``.
    """
    g = np.moveaxis(np.asarray(g, dtype=complex), axis, -1)
    full = np.zeros(g.shape[:-1] + (n,), dtype=complex)
    full[..., : g.shape[-1]] = g
    out = (ifft(full) * n).real
    return np.moveaxis(out, -1, axis)


def rfft(x) -> Spectrum:
    x = _as_real_signal(x)
    return Spectrum(rfft_array(x), x.shape[0])


def irfft(s: Spectrum) -> np.ndarray:
    if not isinstance(s, Spectrum):
        raise InvalidSpectrum("expected a Spectrum")
    return irfft_array(s.bins, s.origin_length)


def full_spectrum(s: Spectrum) -> np.ndarray:
    """Two-sided spectrum rebuilt from conjugate symmetry."""
    n = s.origin_length
    full = np.zeros(n, dtype=complex)
    full[: len(s)] = s.bins
    tail = n - len(s)
    if tail > 0:
        full[len(s) :] = np.conj(s.bins[1 : tail + 1][::-1])
    return full


# ------------------------------------------------------------------- bands


@dataclass(frozen=True)
class BandPartition:
    lf: range
    mf: range
    hf: range
    bin_count: int

    @property
    def bands(self) -> dict[str, range]:
        return {"lf": self.lf, "mf": self.mf, "hf": self.hf}


def _ceil_frac(frac: float, b: int) -> int:
    return math.ceil(Fraction(str(frac)) * b)


def band_partition(B: int, lf_frac: float = 0.1, mf_frac: float = 0.5) -> BandPartition:
    """Low band is the lowest ``lf_frac`` of bins, mid runs to ``mf_frac``, high is the rest."""
    if B < 3:
        raise TooFewBins(f"need at least 3 bins, got {B}")
    if not 0.0 < lf_frac < mf_frac < 1.0:
        raise InvalidInput("need 0 < lf_frac < mf_frac < 1")
    a = _ceil_frac(lf_frac, B)
    b = _ceil_frac(mf_frac, B)
    if not 0 < a < b < B:
        raise TooFewBins(f"fractions ({lf_frac}, {mf_frac}) leave an empty band for B={B}")
    return BandPartition(range(0, a), range(a, b), range(b, B), B)


@dataclass(frozen=True)
class BandReport:
    lf_rmse: float
    mf_rmse: float
    hf_rmse: float
    gf_rmse: float

    COLUMNS = ("lf", "mf", "hf", "gf")

    def as_row(self) -> tuple[float, float, float, float]:
        return (self.lf_rmse, self.mf_rmse, self.hf_rmse, self.gf_rmse)


def band_rmse_arrays(target: np.ndarray, pred: np.ndarray, partition: BandPartition, axis: int = -1) -> BandReport:
    """Band RMSE for spectra stored with the bin index on ``axis``."""
    target = np.moveaxis(np.asarray(target, dtype=complex), axis, -1)
    pred = np.moveaxis(np.asarray(pred, dtype=complex), axis, -1)
    if target.shape != pred.shape:
        raise ShapeMismatch(f"target {target.shape} vs prediction {pred.shape}")
    if target.shape[-1] != partition.bin_count:
        raise ShapeMismatch(f"spectra have {target.shape[-1]} bins, partition expects {partition.bin_count}")
    sq = np.abs(target - pred) ** 2
    vals = [math.sqrt(float(np.mean(sq[..., band.start : band.stop]))) for band in partition.bands.values()]
    return BandReport(*vals, math.sqrt(float(np.mean(sq))))


def band_rmse(targets: Sequence[Spectrum], preds: Sequence[Spectrum], p: BandPartition) -> BandReport:
    if len(targets) != len(preds) or not targets:
        raise ShapeMismatch(f"{len(targets)} target spectra vs {len(preds)} predictions")
    t = np.stack([s.bins for s in targets]) if _same_len(targets) else None
    q = np.stack([s.bins for s in preds]) if _same_len(preds) else None
    if t is None or q is None:
        raise ShapeMismatch("spectra in a list must share a bin count")
    return band_rmse_arrays(t, q, p)


def _same_len(specs: Sequence[Spectrum]) -> bool:
    return len({len(s) for s in specs}) == 1
