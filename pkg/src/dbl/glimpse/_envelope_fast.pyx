# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled envelope kernel: one pass per band, no intermediate arrays."""

import numpy as np

from libc.math cimport sqrt


def band_frame_rms(const double[::1] x,
                   const double complex[::1] poles,
                   const double[::1] norms,
                   const double[::1] lp_b,
                   const double[::1] lp_a,
                   Py_ssize_t frame_len):
    """Per-band smoothed-envelope RMS per frame for one channel.

    Mirrors the scipy backend: four cascaded complex one-pole stages,
    2*norm*Re(.), half-wave rectification, transposed direct-form-II
    biquad low-pass, RMS over frame_len-sample frames (last one partial).
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t n_bands = poles.shape[0]
    cdef Py_ssize_t n_frames = (n + frame_len - 1) // frame_len
    out = np.zeros((n_bands, n_frames))
    cdef double[:, ::1] out_v = out
    cdef double complex p, y1, y2, y3, y4
    cdef double b0 = lp_b[0], b1 = lp_b[1], b2 = lp_b[2]
    cdef double a1 = lp_a[1], a2 = lp_a[2]
    cdef double z1, z2, v, s, acc, scale
    cdef Py_ssize_t i, f, k, start, stop

    for i in range(n_bands):
        p = poles[i]
        scale = 2.0 * norms[i]
        y1 = 0; y2 = 0; y3 = 0; y4 = 0
        z1 = 0.0; z2 = 0.0
        for f in range(n_frames):
            start = f * frame_len
            stop = start + frame_len
            if stop > n:
                stop = n
            acc = 0.0
            for k in range(start, stop):
                y1 = x[k] + p * y1
                y2 = y1 + p * y2
                y3 = y2 + p * y3
                y4 = y3 + p * y4
                v = scale * y4.real
                if v < 0.0:
                    v = 0.0
                s = b0 * v + z1
                z1 = b1 * v - a1 * s + z2
                z2 = b2 * v - a2 * s
                acc += s * s
            out_v[i, f] = sqrt(acc / (stop - start))
    return out
