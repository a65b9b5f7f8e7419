"""Resonance-dip detection on magnitude spectra."""

from __future__ import annotations

import numpy as np

DEFAULT_PROMINENCE_DB = 1.0
DEFAULT_MIN_SEPARATION_PTS = 50
DEFAULT_BASELINE_WINDOW_PTS = 201


def running_median(values, window):
    """Running median with edge reflection.

    For long traces the median is evaluated on a strided set of anchor
    points and linearly interpolated between them; the baseline it feeds is
    a slowly varying background, so the stride loses nothing while keeping
    wide-scan calls cheap.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    if n == 0:
        return values.copy()
    if window == 1 or n == 1:
        return values.copy()
    half = window // 2
    padded = np.pad(values, half, mode="reflect")
    stride = max(1, window // 16)
    anchors = np.arange(0, n, stride)
    if anchors[-1] != n - 1:
        anchors = np.append(anchors, n - 1)
    windows = np.lib.stride_tricks.sliding_window_view(padded, window)
    med = np.median(windows[anchors], axis=1)
    if stride == 1:
        return med
    return np.interp(np.arange(n), anchors, med)


def find_resonances(freq, s21_mag, prominence_db=DEFAULT_PROMINENCE_DB,
                    min_separation_pts=DEFAULT_MIN_SEPARATION_PTS,
                    baseline_window_pts=DEFAULT_BASELINE_WINDOW_PTS):
    """Locate notch dips in an |S21| trace.

    Converts to dB, subtracts a running-median baseline, and returns the
    frequencies of local minima at least ``prominence_db`` below that
    baseline, separated by at least ``min_separation_pts`` grid points
    (deepest dip wins inside an exclusion window). Result is sorted
    ascending.
    """
    freq = np.asarray(freq, dtype=float)
    mag = np.asarray(s21_mag, dtype=float)
    if freq.shape != mag.shape:
        raise ValueError("freq and s21_mag must have equal length")
    if freq.size < baseline_window_pts:
        raise ValueError("trace shorter than the baseline window")

    db = 20.0 * np.log10(np.clip(mag, 1e-12, None))
    depth = running_median(db, baseline_window_pts) - db  # positive at dips

    inner = depth[1:-1]
    is_min = (inner >= depth[:-2]) & (inner > depth[2:]) & (inner >= prominence_db)
    candidates = np.nonzero(is_min)[0] + 1
    if candidates.size == 0:
        return []

    order = candidates[np.argsort(-depth[candidates], kind="stable")]
    kept = []
    for idx in order:
        if all(abs(idx - k) >= min_separation_pts for k in kept):
            kept.append(idx)
    return sorted(float(freq[i]) for i in kept)
