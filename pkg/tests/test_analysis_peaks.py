from __future__ import annotations

import numpy as np
import pytest

from hallab.analysis import find_resonances, running_median
from hallab.virtlab import Background, ResonatorSpec, s21_response


def test_flat_trace_has_no_candidates():
    freq = np.linspace(4e9, 5e9, 2001)
    assert find_resonances(freq, np.full(2001, 0.9)) == []


def test_running_median_tracks_slow_background():
    x = np.linspace(0.0, 1.0, 3000)
    slow = 1.0 + 0.2 * x
    rng = np.random.Generator(np.random.PCG64(0))
    noisy = slow + rng.normal(0, 0.001, x.size)
    baseline = running_median(noisy, 201)
    assert np.max(np.abs(baseline - slow)) < 0.01


def test_single_deep_notch_found_within_two_grid_points(single_resonator_config):
    cfg = single_resonator_config
    spec = cfg.resonators[0]
    freq = np.linspace(spec.f_r - 50e6, spec.f_r + 50e6, 4001)
    rng = np.random.Generator(np.random.PCG64(5))
    trace = s21_response(freq, cfg.resonators, cfg.background)
    trace = trace + rng.normal(0, 1e-3, freq.size) \
        + 1j * rng.normal(0, 1e-3, freq.size)
    hits = find_resonances(freq, np.abs(trace))
    assert len(hits) == 1
    grid = freq[1] - freq[0]
    assert abs(hits[0] - spec.f_r) <= 2 * grid


def test_count_matches_resonators_in_range():
    resonators = tuple(
        ResonatorSpec(f_r=f, q_i=2.0e4, q_c=8.0e3)
        for f in (4.2e9, 4.7e9, 5.2e9, 5.7e9, 6.2e9, 6.7e9, 7.2e9, 7.7e9)
    )
    background = Background(a=0.98, alpha=0.2)
    rng = np.random.Generator(np.random.PCG64(9))

    def scan(f0, f1, points):
        freq = np.linspace(f0, f1, points)
        trace = s21_response(freq, resonators, background)
        noise = rng.normal(0, 0.001, (2, points))
        return freq, np.abs(trace + noise[0] + 1j * noise[1])

    narrow = scan(4.0e9, 6.0e9, 6001)
    wide = scan(4.0e9, 8.0e9, 12001)
    assert len(find_resonances(*narrow)) == 4
    assert len(find_resonances(*wide)) == 8


def test_min_separation_suppresses_neighbors():
    freq = np.linspace(0, 1, 1000)
    mag = np.ones(1000)
    mag[400] = 0.5   # ~6 dB dip
    mag[420] = 0.6   # shallower dip within the exclusion window
    hits = find_resonances(freq, mag, min_separation_pts=50,
                           baseline_window_pts=201)
    assert hits == [pytest.approx(freq[400])]


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        find_resonances(np.arange(10.0), np.arange(9.0))
