"""Least-squares decomposition of a remix against reference stems.

A signal channel is projected onto the joint subspace spanned by
0..filter_len-1 sample delays of every reference channel (foreground and
background together), then the projected part is split by source through
the per-source filter coefficients. The residual is the artifact
component. Normal equations use the block-Toeplitz Gram matrix built from
FFT correlations, corrected so inner products run over the signal window
only (exact orthogonal projection, hence exact idempotence and energy
split), with trace-scaled diagonal regularization and a Cholesky solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as _linalg
from scipy import signal as _signal
from scipy.linalg import toeplitz

from .audio import AudioClip, StemPair
from .errors import NoSignalError, ShapeMismatchError, SingularSystemError
from .loudness import GatingMask, measure_ld

BASE_REGULARIZATION = 1e-9
MAX_REG_RETRIES = 3
NEGLIGIBLE_COMPONENT_REL_RMS = 1e-7


@dataclass(frozen=True)
class Decomposition:
    """Signal split into foreground, background, and artifact parts.

    fg_part + bg_part + artifact reconstructs the input sample-exactly;
    normal_eq_residual is the relative residual of the solved system
    (worst channel).
    """

    fg_part: AudioClip
    bg_part: AudioClip
    artifact: AudioClip
    filter_len: int
    normal_eq_residual: float

    def component_rms(self) -> dict:
        return {
            "fg": _rms(self.fg_part.data),
            "bg": _rms(self.bg_part.data),
            "artifact": _rms(self.artifact.data),
        }


def _rms(a: np.ndarray) -> float:
    return float(np.sqrt(np.mean(a**2)))


class Projector:
    """Prefactorized projection against one pair of reference stems.

    Building the Gram matrix and its Cholesky factor is the expensive
    part; reuse one Projector to decompose many remixes of the same item.
    """

    def __init__(self, refs: StemPair, filter_len: int = 512):
        if filter_len < 1:
            raise ValueError("filter_len must be >= 1")
        self.refs = refs
        self.filter_len = filter_len
        self._n = refs.fg.n_samples
        refchans = np.vstack([refs.fg.data, refs.bg.data])
        if not np.any(refchans):
            raise NoSignalError("reference stems are all zero")
        self._n_fg = refs.fg.n_channels
        self._refchans = refchans
        self._nref = refchans.shape[0]

        flen = filter_len
        if self._n <= flen:
            raise ShapeMismatchError(
                f"signal length {self._n} must exceed filter_len {flen}"
            )
        n_fft = 1 << int(np.ceil(np.log2(self._n + flen - 1)))
        self._n_fft = n_fft
        sf = np.fft.rfft(refchans, n=n_fft, axis=1)
        self._sf = sf

        dim = self._nref * flen
        gram = np.empty((dim, dim))
        for i in range(self._nref):
            for j in range(i, self._nref):
                ssf = np.fft.irfft(sf[i] * np.conj(sf[j]), n=n_fft)
                block = toeplitz(np.concatenate(([ssf[0]], ssf[-1 : -flen : -1])), r=ssf[:flen])
                # restrict the inner products to the N-sample window: the
                # full correlation also counts products landing past the
                # signal end, which would leave projections with an
                # unrepresentable tail and break exact idempotence
                block = block - self._end_correction(i, j)
                gram[i * flen : (i + 1) * flen, j * flen : (j + 1) * flen] = block
                if i != j:
                    gram[j * flen : (j + 1) * flen, i * flen : (i + 1) * flen] = block.T
        self._gram = gram

        lam = BASE_REGULARIZATION * np.trace(gram) / dim
        if lam <= 0.0:
            lam = BASE_REGULARIZATION
        for attempt in range(MAX_REG_RETRIES + 1):
            try:
                self._cho = _linalg.cho_factor(
                    gram + lam * np.eye(dim), lower=True, check_finite=False
                )
                self._lam = lam
                break
            except np.linalg.LinAlgError:
                lam *= 10.0
        else:
            raise SingularSystemError(
                f"Gram matrix stayed non-positive-definite up to lambda={lam:g}"
            )

    def _suffix_table(self, i: int, j: int) -> np.ndarray:
        """table[d, t] = sum over the last t samples r of ref_i[r]*ref_j[r-d]."""
        flen = self.filter_len
        table = np.zeros((flen, flen))
        if flen == 1:
            return table
        n = self._n
        ri = self._refchans[i]
        rj_ext = np.concatenate([np.zeros(flen - 1), self._refchans[j]])
        tail_r = np.arange(n - flen + 1, n)
        for d in range(flen):
            q = ri[tail_r] * rj_ext[tail_r - d + flen - 1]
            table[d, 1:] = np.cumsum(q[::-1])
        return table

    def _end_correction(self, i: int, j: int) -> np.ndarray:
        """Products the full correlation counts beyond the signal end."""
        flen = self.filter_len
        s_ij = self._suffix_table(i, j)
        s_ji = s_ij if i == j else self._suffix_table(j, i)
        lag_k, lag_l = np.indices((flen, flen))
        delta = lag_l - lag_k
        overlap = np.minimum(lag_k, lag_l)
        return np.where(delta >= 0, s_ij[np.abs(delta), overlap], s_ji[np.abs(delta), overlap])

    def project(self, signal: AudioClip) -> Decomposition:
        if (
            signal.sample_rate != self.refs.fg.sample_rate
            or signal.n_samples != self._n
            or signal.n_channels != self.refs.fg.n_channels
        ):
            raise ShapeMismatchError("signal does not match the reference stems")
        flen = self.filter_len
        n = self._n
        fg_part = np.zeros((signal.n_channels, n))
        bg_part = np.zeros((signal.n_channels, n))
        worst_residual = 0.0
        for ch in range(signal.n_channels):
            sef = np.fft.rfft(signal.data[ch], n=self._n_fft)
            rhs = np.empty(self._nref * flen)
            for i in range(self._nref):
                ssef = np.fft.irfft(self._sf[i] * np.conj(sef), n=self._n_fft)
                rhs[i * flen : (i + 1) * flen] = np.concatenate(
                    ([ssef[0]], ssef[-1 : -flen : -1])
                )
            coeffs = _linalg.cho_solve(self._cho, rhs, check_finite=False)
            denom = float(np.linalg.norm(rhs))
            if denom > 0.0:
                resid = float(
                    np.linalg.norm(self._gram @ coeffs + self._lam * coeffs - rhs) / denom
                )
                worst_residual = max(worst_residual, resid)
            per_ref = coeffs.reshape(self._nref, flen)
            for i in range(self._nref):
                contrib = _signal.fftconvolve(per_ref[i], self._refchans[i])[:n]
                if i < self._n_fg:
                    fg_part[ch] += contrib
                else:
                    bg_part[ch] += contrib

        sr = signal.sample_rate
        fg_clip = AudioClip(fg_part, sr)
        bg_clip = AudioClip(bg_part, sr)
        artifact = AudioClip(signal.data - fg_part - bg_part, sr)
        return Decomposition(
            fg_part=fg_clip,
            bg_part=bg_clip,
            artifact=artifact,
            filter_len=flen,
            normal_eq_residual=worst_residual,
        )


def project(signal: AudioClip, refs: StemPair, filter_len: int = 512) -> Decomposition:
    """One-shot decomposition; see Projector for the reusable form."""
    return Projector(refs, filter_len).project(signal)


def projected_ld(
    mix: AudioClip,
    refs: StemPair,
    mask: GatingMask,
    filter_len: int = 512,
    decomposition: Decomposition | None = None,
) -> float:
    """Gated LD between the projected FG and BG parts of a remix.

    A component whose RMS is negligible relative to the mix (below
    NEGLIGIBLE_COMPONENT_REL_RMS) is treated as absent and raises
    NoSignalError: its loudness would be dominated by regularization
    leakage, not signal.
    """
    dec = decomposition if decomposition is not None else project(mix, refs, filter_len)
    mix_rms = _rms(mix.data)
    for name, part in (("FG", dec.fg_part), ("BG", dec.bg_part)):
        if _rms(part.data) < NEGLIGIBLE_COMPONENT_REL_RMS * mix_rms:
            raise NoSignalError(f"projected {name} component is negligible")
    return measure_ld(StemPair(dec.fg_part, dec.bg_part), mask)
