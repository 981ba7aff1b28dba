import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from conftest import random_qpsk
from optofdm.metrics import (
    MetricsRecord, ber_count, evm, link_metrics, papr, per_subcarrier_snr_db, power_spectrum,
    q_from_ber, q_from_evm,
)
from optofdm.tx import qpsk_demod


def test_evm_examples(rng):
    ref = random_qpsk(rng, 1000)
    assert evm(ref, ref) == 0.0
    assert evm(1.1 * ref, ref) == pytest.approx(0.1)
    noise = (rng.normal(size=100_000) + 1j * rng.normal(size=100_000)) * np.sqrt(0.01 / 2)
    ref = random_qpsk(rng, 100_000)
    assert evm(ref + noise, ref) == pytest.approx(0.1, rel=0.05)
    with pytest.raises(ValueError):
        evm([], [])
    with pytest.raises(ValueError):
        evm([1, 2], [1])


def test_q_from_evm():
    assert q_from_evm(0.1) == pytest.approx(20.0)
    assert q_from_evm(1.0) == 0.0
    with pytest.raises(ValueError):
        q_from_evm(0.0)


def test_q_from_ber_against_normal_quantile():
    for ber in (1e-3, 1e-6, 0.1, 0.3):
        # Q = Phi^{-1}(1 - ber) for a Gaussian decision variable
        assert q_from_ber(ber) == pytest.approx(20 * math.log10(norm.isf(ber)), abs=1e-9)
    assert q_from_ber(1e-3) == pytest.approx(9.80, abs=0.01)


def test_q_from_ber_half_and_range():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        assert q_from_ber(0.5) == -math.inf
    assert any(issubclass(x.category, RuntimeWarning) for x in w)
    for bad in (0.0, 0.6, -1e-3):
        with pytest.raises(ValueError):
            q_from_ber(bad)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-12, 0.49), st.floats(1e-12, 0.49))
def test_q_ber_monotone(a, b):
    if a < b:
        assert q_from_ber(a) >= q_from_ber(b)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-6, 10.0), st.floats(1e-6, 10.0))
def test_q_evm_monotone(a, b):
    if a < b:
        assert q_from_evm(a) > q_from_evm(b)


def test_papr_examples():
    assert papr(np.ones(16)) == pytest.approx(0.0)
    n = np.arange(4096)
    assert papr(np.cos(2 * np.pi * 8 * n / 4096)) == pytest.approx(10 * math.log10(2), abs=1e-6)
    x = np.zeros(100)
    x[3] = 1.0
    assert papr(x) == pytest.approx(20.0)


def test_ber_count_examples():
    assert ber_count([0, 1, 1, 0], [0, 1, 1, 0]) == (0.0, 4)
    assert ber_count([1, 1, 1, 1], [0, 1, 1, 0]) == (0.5, 4)
    assert ber_count([1, 0], [0, 1]) == (1.0, 2)
    with pytest.raises(ValueError):
        ber_count([0], [0, 1])
    with pytest.raises(ValueError):
        ber_count([], [])


@pytest.mark.parametrize("snr_db", [6.0, 8.0, 10.0, 12.0, 14.0])
def test_q_conventions_agree_on_awgn(snr_db):
    rng = np.random.default_rng(int(snr_db * 10))
    n = 2_000_000
    ref = random_qpsk(rng, n)
    sigma = np.sqrt(10 ** (-snr_db / 10) / 2)
    rx = ref + sigma * (rng.normal(size=n) + 1j * rng.normal(size=n))
    ber, _ = ber_count(qpsk_demod(rx), qpsk_demod(ref))
    assert abs(q_from_evm(evm(rx, ref)) - q_from_ber(ber)) < 0.5


def test_per_subcarrier_snr(rng):
    ref = random_qpsk(rng, (2000, 4))
    rx = ref + np.array([0.1, 0.01, 0.1, 0.01]) * random_qpsk(rng, (2000, 4))
    np.testing.assert_allclose(per_subcarrier_snr_db(rx, ref), [20, 40, 20, 40], atol=1e-9)


def test_power_spectrum_peak(rng):
    fs = 1e9
    t = np.arange(1 << 14) / fs
    f, p = power_spectrum(np.sin(2 * np.pi * 100e6 * t) + 1e-3 * rng.normal(size=t.size), fs, 1024)
    assert f[np.argmax(p)] == pytest.approx(100e6, abs=fs / 1024)
    assert f.min() == 0 and f.max() == pytest.approx(fs / 2)


def test_link_metrics_bound_and_equality(rng):
    ref = random_qpsk(rng, 500)
    bits = qpsk_demod(ref)
    m = link_metrics(ref + 0.05 * random_qpsk(rng, 500), ref, bits, bits, rng.normal(size=64))
    assert m.bit_errors == 0 and m.q_ber_is_bound and not m.q_ber_reliable
    assert m.bits_counted == 1000
    assert np.isfinite(m.q_ber_db)
    assert m.q_evm_db == pytest.approx(q_from_evm(m.evm_rms))
    assert isinstance(m, MetricsRecord) and m == m


def test_link_metrics_clamps_ber(rng):
    ref = random_qpsk(rng, 200)
    bits = qpsk_demod(ref)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = link_metrics(-ref, ref, 1 - bits, bits, rng.normal(size=64))
    assert m.ber == 0.5 and m.ber_clamped and m.q_ber_db == -math.inf
