# -*- coding: utf-8 -*-
"""Uniform STFT front end shared by encoder and decoder.

Fixed geometry: 256-sample sqrt-Hann analysis and synthesis windows at hop
128, giving 129 complex bins, with 8 hops grouped into one 1024-sample
parameter frame.  The windows satisfy w^2[n] + w^2[n+hop] = 1 exactly, so
the forward/inverse pair reconstructs perfectly; the transform's internal
delay is compensated inside :func:`tf_inverse`, so the round trip is
sample-aligned (reported latency 0).

Channels are processed independently; state is carried in the frame arrays
only, so distinct streams can be transformed in parallel.
"""
import numpy as np

SAMPLE_RATE = 48000
WINDOW = 256
HOP = 128
NUM_BINS = WINDOW // 2 + 1
SUBFRAMES_PER_FRAME = 8
FRAME_SAMPLES = HOP * SUBFRAMES_PER_FRAME
LATENCY = 0

_window = np.sin(np.pi * (np.arange(WINDOW) + 0.5) / WINDOW)


def bin_frequencies(sample_rate=SAMPLE_RATE):
    """Center frequency in Hz of each STFT bin."""
    return np.arange(NUM_BINS) * sample_rate / WINDOW


def num_frames(num_samples):
    """Parameter frames produced for a signal of given length."""
    hops = int(np.ceil(num_samples / HOP)) + 1
    return int(np.ceil(hops / SUBFRAMES_PER_FRAME))


def tf_forward(pcm, sample_rate=SAMPLE_RATE):
    """Transform multichannel PCM to parameter-frame-grouped spectra.

    Parameters
    ----------
    pcm : (channels, samples) array_like
    sample_rate : int
        Must be 48000; no resampling in scope.

    Returns
    -------
    frames : (num_frames, 8, 129, channels) np.ndarray, complex
    """
    if sample_rate != SAMPLE_RATE:
        raise ValueError(f"unsupported sample rate {sample_rate}, "
                         f"expected {SAMPLE_RATE}")
    pcm = np.atleast_2d(np.asarray(pcm, dtype=float))
    n = pcm.shape[1]
    hops = num_frames(n) * SUBFRAMES_PER_FRAME
    # Front padding hides the window ramp-in; the tail padding completes
    # the last parameter frame.
    total = (hops - 1) * HOP + WINDOW
    xp = np.zeros((pcm.shape[0], total))
    xp[:, WINDOW - HOP:WINDOW - HOP + n] = pcm
    segs = np.lib.stride_tricks.sliding_window_view(
        xp, WINDOW, axis=1)[:, ::HOP, :]
    spec = np.fft.rfft(segs * _window, axis=2)
    nf = hops // SUBFRAMES_PER_FRAME
    spec = spec.reshape(pcm.shape[0], nf, SUBFRAMES_PER_FRAME, NUM_BINS)
    return np.transpose(spec, (1, 2, 3, 0))


def tf_inverse(frames, num_samples):
    """Overlap-add resynthesis; inverse of :func:`tf_forward`.

    Parameters
    ----------
    frames : (num_frames, 8, 129, channels) complex array
    num_samples : int
        Length of the original signal to crop to.

    Returns
    -------
    pcm : (channels, num_samples) np.ndarray
    """
    frames = np.asarray(frames)
    if frames.ndim != 4 or frames.shape[1] != SUBFRAMES_PER_FRAME \
            or frames.shape[2] != NUM_BINS:
        raise ValueError("frames do not match the transform geometry")
    nf, _, _, nch = frames.shape
    hops = nf * SUBFRAMES_PER_FRAME
    spec = np.transpose(frames, (3, 0, 1, 2)).reshape(nch, hops, NUM_BINS)
    segs = np.fft.irfft(spec, n=WINDOW, axis=2) * _window
    total = (hops - 1) * HOP + WINDOW
    out = np.zeros((nch, total))
    # At 50% overlap the even-indexed segments tile the output without
    # overlapping each other, and likewise the odd ones.
    even = segs[:, 0::2, :].reshape(nch, -1)
    out[:, :even.shape[1]] += even
    if hops > 1:
        odd = segs[:, 1::2, :].reshape(nch, -1)
        out[:, HOP:HOP + odd.shape[1]] += odd
    start = WINDOW - HOP
    if start + num_samples > total:
        raise ValueError("requested more samples than the frames cover")
    return out[:, start:start + num_samples]
