"""FreLE: time-domain loss plus a rescaled frequency-domain MAE.

Predictions and targets are arrays shaped ``[S, C]`` or ``[n, S, C]`` (time on
axis -2). Spectra are taken per channel along time, giving ``[..., B, C]``
with ``B = S // 2 + 1``.

Every frequency-side modification (implicit peak rescale, the simplified
adaptive normalization, amplitude pruning) is expressed as a real,
nonnegative per-bin weight ``w`` computed from the *target* spectrum alone and
applied to both spectra. The frequency loss is then ``mean |w * (F - F_hat)|``
and its gradient is exact for fixed ``w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, InvalidIndex, InvalidInput, ShapeMismatch
from .spectral import Spectrum, n_bins, rfft_adjoint, rfft_array

AN_EPS = 1e-8
TIME_LOSSES = ("mae", "mse")


@dataclass(frozen=True)
class FreLEConfig:
    """Loss settings.

    ``eta=None`` means "use the bin count B of the horizon", so the peak factor
    ``i / eta`` lies in (0, 1]. ``retention`` is the adaptive form of
    amplitude pruning: each target spectrum keeps its ``retention`` fraction
    of largest bins (``epsilon_xi`` is the fixed-threshold form).
    """

    delta: float = 0.3
    d: int = 5
    eta: float | None = None
    implicit_enabled: bool = True
    an_enabled: bool = False
    epsilon_xi: float | None = None
    retention: float | None = None
    time_loss_kind: str = "mse"

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigError(f"delta must be in [0, 1], got {self.delta}")
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError(f"frequency width d must be an integer >= 1, got {self.d}")
        if self.eta is not None and not self.eta > 0:
            raise ConfigError(f"eta must be > 0, got {self.eta}")
        if self.implicit_enabled and self.an_enabled:
            raise ConfigError("implicit rescaling and adaptive normalization are mutually exclusive")
        if self.epsilon_xi is not None and self.epsilon_xi < 0:
            raise ConfigError("epsilon_xi must be >= 0")
        if self.retention is not None and not 0.0 <= self.retention <= 1.0:
            raise ConfigError("retention must be in [0, 1]")
        if self.epsilon_xi is not None and self.retention is not None:
            raise ConfigError("give either epsilon_xi or retention, not both")
        if self.time_loss_kind not in TIME_LOSSES:
            raise ConfigError(f"time_loss_kind must be one of {TIME_LOSSES}")

    def eta_for(self, bins: int) -> float:
        return float(bins) if self.eta is None else float(self.eta)


@dataclass(frozen=True)
class LossBreakdown:
    time_loss: float
    freq_loss: float
    combined: float


def _pair(X, Xhat) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    Xhat = np.asarray(Xhat, dtype=float)
    if X.shape != Xhat.shape:
        raise ShapeMismatch(f"target {X.shape} vs prediction {Xhat.shape}")
    if X.size == 0:
        raise ShapeMismatch("empty arrays")
    return X, Xhat


# ------------------------------------------------------------------ time side


def time_loss(X, Xhat, kind: str = "mae") -> tuple[float, np.ndarray]:
    """Mean absolute or squared error and its gradient w.r.t. ``Xhat``.

    The MAE subgradient is taken as 0 where ``Xhat == X``.
    """
    X, Xhat = _pair(X, Xhat)
    diff = Xhat - X
    n = diff.size
    if kind == "mae":
        return float(np.mean(np.abs(diff))), np.sign(diff) / n
    if kind == "mse":
        return float(np.mean(diff * diff)), 2.0 * diff / n
    raise ConfigError(f"unknown time loss {kind!r}")


# ------------------------------------------------------------ peak detection


def _window_extent(d: int) -> tuple[int, int]:
    return d // 2, (d + 1) // 2


def local_maxima_mask(A, d: int, axis: int = -1) -> np.ndarray:
    """Boolean mask of local maxima along ``axis``.

    Bin ``i`` qualifies when ``A[i]`` equals the maximum over
    ``A[i - floor(d/2)] .. A[i + ceil(d/2)]``, the window clamped to the
    array. Bin 0 takes part as a neighbour but is never selected itself.
    """
    if d < 1:
        raise InvalidInput("d must be >= 1")
    A = np.moveaxis(np.asarray(A, dtype=float), axis, -1)
    b = A.shape[-1]
    lo, hi = _window_extent(int(d))
    pad = np.full(A.shape[:-1] + (b + lo + hi,), -np.inf)
    pad[..., lo : lo + b] = A
    wmax = pad[..., 0:b]
    for j in range(1, lo + hi + 1):
        wmax = np.maximum(wmax, pad[..., j : j + b])
    mask = A >= wmax
    mask[..., 0] = False
    return np.moveaxis(mask, -1, axis)


def local_maxima(A, d: int) -> np.ndarray:
    """Ascending indices of the local maxima of a 1-D amplitude vector."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 1 or A.shape[0] < 1:
        raise InvalidInput("expected a nonempty 1-D amplitude vector")
    return np.flatnonzero(local_maxima_mask(A, d))


def peak_factors(B: int, eta: float) -> np.ndarray:
    """Per-bin factor ``i / eta`` applied at selected peaks."""
    return np.arange(B, dtype=float) / float(eta)


def implicit_rescale(s: Spectrum, maxima, eta: float) -> Spectrum:
    """Multiply the bins at ``maxima`` by ``i / eta``; everything else is kept."""
    if not eta > 0:
        raise InvalidInput("eta must be > 0")
    idx = np.asarray(list(maxima), dtype=np.int64)
    if idx.size and (idx.min() < 1 or idx.max() >= len(s)):
        raise InvalidIndex(f"maxima must lie in [1, {len(s)}), got {idx.tolist()}")
    bins = np.array(s.bins)
    bins[idx] = bins[idx] * (idx / float(eta))
    return Spectrum(bins, s.origin_length)


# ----------------------------------------------------------------- pruning


def threshold_for_retention(amplitudes, num: float, axis: int = -1) -> np.ndarray:
    """Smallest threshold keeping at most ``floor(num * B)`` bins along ``axis``.

    Bins survive when their amplitude is ``>=`` the threshold, so the returned
    value sits one ulp above the first amplitude that has to go.
    """
    if not 0.0 <= num <= 1.0:
        raise InvalidInput("num must be in [0, 1]")
    A = np.moveaxis(np.asarray(amplitudes, dtype=float), axis, -1)
    b = A.shape[-1]
    keep = int(math.floor(num * b + 1e-9))
    if keep >= b:
        return np.zeros(A.shape[:-1])
    desc = -np.sort(-A, axis=-1)
    return np.nextafter(desc[..., keep], np.inf)


def amplitude_filter(s: Spectrum, epsilon_xi: float) -> tuple[Spectrum, float]:
    """Zero bins with modulus below ``epsilon_xi``; also return the surviving fraction."""
    if epsilon_xi < 0:
        raise InvalidInput("epsilon_xi must be >= 0")
    keep = s.amplitudes >= epsilon_xi
    bins = np.where(keep, s.bins, 0.0)
    return Spectrum(bins, s.origin_length), float(np.mean(keep))


# ------------------------------------------------------------ frequency side


def spectral_weights(F_target: np.ndarray, cfg: FreLEConfig, axis: int = -2) -> np.ndarray:
    """Real per-bin weights derived from the target spectrum (see module doc)."""
    F = np.moveaxis(np.asarray(F_target), axis, -1)
    amp = np.abs(F)
    b = F.shape[-1]
    w = np.ones(F.shape)
    if cfg.epsilon_xi is not None:
        w = w * (amp >= cfg.epsilon_xi)
    elif cfg.retention is not None:
        eps = threshold_for_retention(amp, cfg.retention)
        w = w * (amp >= eps[..., None])
    if cfg.implicit_enabled:
        peaks = local_maxima_mask(amp, cfg.d)
        w = np.where(peaks, w * peak_factors(b, cfg.eta_for(b)), w)
    elif cfg.an_enabled:
        w = w / (amp + AN_EPS)
    return np.moveaxis(w, -1, axis)


def freq_loss_arrays(F, Fhat, weights=None) -> float:
    F = np.asarray(F, dtype=complex)
    Fhat = np.asarray(Fhat, dtype=complex)
    if F.shape != Fhat.shape:
        raise ShapeMismatch(f"spectra {F.shape} vs {Fhat.shape}")
    D = F - Fhat if weights is None else weights * (F - Fhat)
    return float(np.mean(np.abs(D)))


def freq_loss(F: Sequence[Spectrum], Fhat: Sequence[Spectrum]) -> float:
    """Mean complex modulus ``|F[k] - F_hat[k]|`` over every bin of every spectrum."""
    if len(F) != len(Fhat) or not F:
        raise ShapeMismatch(f"{len(F)} spectra vs {len(Fhat)}")
    total, count = 0.0, 0
    for a, b in zip(F, Fhat):
        if len(a) != len(b):
            raise ShapeMismatch(f"bin counts {len(a)} vs {len(b)}")
        total += float(np.sum(np.abs(a.bins - b.bins)))
        count += len(a)
    return total / count


# ------------------------------------------------------------------ combined


def target_spectrum(X) -> np.ndarray:
    """Per-channel one-sided spectra of a target block, ``[..., B, C]``."""
    return rfft_array(np.asarray(X, dtype=float), axis=-2)


def frele_value_and_grad(
    X,
    Xhat,
    cfg: FreLEConfig,
    F_target: np.ndarray | None = None,
    weights: np.ndarray | None = None,
    need_grad: bool = True,
) -> tuple[LossBreakdown, np.ndarray | None]:
    """Loss breakdown and gradient w.r.t. ``Xhat``.

    ``F_target``/``weights`` may be passed in precomputed; they depend on the
    target only, which lets the trainer cache them per dataset.
    """
    X, Xhat = _pair(X, Xhat)
    if X.ndim < 2:
        raise ShapeMismatch("expected [S, C] or [n, S, C] arrays")
    S = X.shape[-2]
    if F_target is None:
        F_target = target_spectrum(X)
    if weights is None:
        weights = spectral_weights(F_target, cfg)
    if F_target.shape[-2] != n_bins(S):
        raise ShapeMismatch("cached target spectrum does not match the horizon")
    F_pred = rfft_array(Xhat, axis=-2)
    D = weights * (F_target - F_pred)
    mod = np.abs(D)
    lf = float(np.mean(mod))
    lt, gt = time_loss(X, Xhat, cfg.time_loss_kind)
    combined = cfg.delta * lf + (1.0 - cfg.delta) * lt
    out = LossBreakdown(lt, lf, combined)
    if not need_grad:
        return out, None
    grad = (1.0 - cfg.delta) * gt
    if cfg.delta > 0.0:
        safe = np.where(mod > 0, mod, 1.0)
        unit = np.where(mod > 0, D / safe, 0.0)
        g_spec = -weights * unit / mod.size
        grad = grad + cfg.delta * rfft_adjoint(g_spec, S, axis=-2)
    return out, grad


def frele_loss(X, Xhat, cfg: FreLEConfig) -> LossBreakdown:
    return frele_value_and_grad(X, Xhat, cfg, need_grad=False)[0]


def frele_gradient(X, Xhat, cfg: FreLEConfig) -> np.ndarray:
    return frele_value_and_grad(X, Xhat, cfg)[1]
