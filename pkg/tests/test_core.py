import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_dft, brute_idft, random_qpsk
from optofdm.core import (
    Format, LayerSpec, OfdmConfig, RealWaveform, SymbolFrame, Unit, add_cp, clip_negative, dft,
    frames_to_waveform, hermitian_map, idft_real, is_hermitian, layer_sets_partition,
    layer_subcarriers, remove_cp, waveform_to_frames,
)
from optofdm.exceptions import ConfigError, ContractError


def random_hermitian(rng, N, n=1):
    frame = SymbolFrame(np.arange(1, N // 2), random_qpsk(rng, (n, N // 2 - 1)))
    return hermitian_map(frame, N)


# ---- configuration -------------------------------------------------------

def test_default_configs():
    dco = OfdmConfig.dco()
    assert (dco.fft_size, dco.data_band, dco.format, dco.cp_len) == (256, 63, Format.DCO, 0)
    laco = OfdmConfig.laco()
    assert [l.symbols_per_frame for l in laco.layers] == [32, 16, 8]
    assert laco.n_data_subcarriers == 56


@pytest.mark.parametrize("kw", [
    dict(fft_size=200), dict(fft_size=256, data_band=128), dict(data_band=0),
    dict(cp_len=256), dict(cp_len=-1), dict(sample_rate=0.0),
])
def test_config_invariants(kw):
    with pytest.raises(ConfigError):
        OfdmConfig(**kw)


def test_laco_layers_must_be_disjoint_and_in_band():
    a = LayerSpec.build(1, 64)
    with pytest.raises(ConfigError):
        OfdmConfig(256, 64, Format.LACO, (a, a))
    with pytest.raises(ConfigError):
        OfdmConfig(256, 32, Format.LACO, (a,))
    with pytest.raises(ConfigError):
        OfdmConfig(256, 64, Format.LACO, ())


# ---- hermitian map and transforms -----------------------------------------

def test_hermitian_map_single_bin():
    s = (1 + 1j) / np.sqrt(2)
    spec = hermitian_map(SymbolFrame([1], [[s]]), 8)[0]
    assert spec[1] == s and spec[7] == np.conj(s)
    assert np.all(spec[[0, 2, 3, 4, 5, 6]] == 0)


def test_hermitian_map_empty_frame():
    spec = hermitian_map(SymbolFrame([], np.zeros((1, 0))), 8)
    assert spec.shape == (1, 8) and not spec.any()


def test_hermitian_map_idft_matches_direct_sum():
    s = (1 + 1j) / np.sqrt(2)
    x = idft_real(hermitian_map(SymbolFrame([1], [[s]]), 8))[0]
    n = np.arange(8)
    # direct 8-point inverse sum over bins 1 and 7 only
    direct = (s * np.exp(2j * np.pi * n / 8) + np.conj(s) * np.exp(-2j * np.pi * n / 8)) / 8
    np.testing.assert_allclose(x, direct.real, atol=1e-15)
    shape = np.cos(2 * np.pi * n / 8) - np.sin(2 * np.pi * n / 8)
    np.testing.assert_allclose(x, shape * np.sqrt(2) / 8, atol=1e-15)


@pytest.mark.parametrize("idx", [[0], [4], [9]])
def test_hermitian_map_rejects_bad_index(idx):
    with pytest.raises(ConfigError):
        hermitian_map(SymbolFrame(idx, [[1.0]]), 8)


def test_idft_zero():
    assert not idft_real(np.zeros(16, complex)).any()


def test_idft_rejects_non_hermitian():
    spec = np.zeros(16, complex)
    spec[1] = 1.0
    with pytest.raises(ContractError):
        idft_real(spec)


def test_transforms_against_brute_force(rng):
    X = random_hermitian(rng, 64, 3)
    x = idft_real(X)
    np.testing.assert_allclose(x, brute_idft(X).real, atol=1e-12)
    np.testing.assert_allclose(dft(x), brute_dft(x), atol=1e-10)


def test_round_trip_and_parseval(rng):
    X = random_hermitian(rng, 256, 4)
    x = idft_real(X)
    err = np.max(np.abs(dft(x) - X)) / np.max(np.abs(X))
    assert err < 1e-9
    lhs = np.sum(x**2, axis=-1)
    rhs = np.sum(np.abs(X) ** 2, axis=-1) / 256
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9)


def test_dft_reshapes_serial_waveform(rng):
    x = rng.normal(size=512)
    np.testing.assert_allclose(dft(x, 256), np.fft.fft(x.reshape(2, 256), axis=-1))
    with pytest.raises(ConfigError):
        dft(x[:500], 256)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_hermitian_map_always_real(log_n, seed, n_sym):
    N = 2**log_n
    r = np.random.default_rng(seed)
    k = r.choice(np.arange(1, N // 2), size=r.integers(0, N // 2), replace=False) if N > 2 else []
    sym = r.normal(size=(n_sym, len(k))) + 1j * r.normal(size=(n_sym, len(k)))
    spec = hermitian_map(SymbolFrame(k, sym), N)
    assert is_hermitian(spec)
    x = idft_real(spec)
    assert x.dtype == np.float64 and np.all(np.isfinite(x))


# ---- layers ---------------------------------------------------------------

def test_layer_subcarriers_examples():
    assert layer_subcarriers(1, 64) == list(range(1, 64, 2))
    assert layer_subcarriers(3, 64) == [4, 12, 20, 28, 36, 44, 52, 60]
    assert layer_subcarriers(4, 4) == []
    assert [len(layer_subcarriers(l, 64)) for l in (1, 2, 3)] == [32, 16, 8]
    with pytest.raises(ConfigError):
        layer_subcarriers(0, 64)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.integers(1, 600))
def test_layer_index_structure(l, B):
    idx = layer_subcarriers(l, B)
    assert idx == sorted(idx)
    for k in idx:
        q, r = divmod(k, 2 ** (l - 1))
        assert r == 0 and q % 2 == 1 and 1 <= k <= B


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 512))
def test_layer_sets_partition_band(B):
    sets = layer_sets_partition(B)
    flat = [k for s in sets for k in s]
    assert len(flat) == len(set(flat))
    # every index 1..B has a unique 2-adic valuation, so the sets tile the band
    assert sorted(flat) == list(range(1, B + 1))


def layer_frame(rng, l, N=256, B=64, n=1):
    idx = layer_subcarriers(l, B)
    return idft_real(hermitian_map(SymbolFrame(idx, random_qpsk(rng, (n, len(idx)))), N)), idx


@pytest.mark.parametrize("l", [1, 2, 3])
def test_anti_periodicity(rng, l):
    x, _ = layer_frame(rng, l, n=100)
    P = 256 >> l
    np.testing.assert_allclose(np.roll(x, -P, axis=-1), -x, atol=1e-9)
    assert LayerSpec.build(l, 64).antiperiod(256) == P


@pytest.mark.parametrize("l", [1, 2, 3])
def test_clipping_halves_own_bins(rng, l):
    x, idx = layer_frame(rng, l, n=20)
    X = dft(x)
    C = dft(clip_negative(x))
    np.testing.assert_allclose(C[:, idx], 0.5 * X[:, idx], atol=1e-9)


@pytest.mark.parametrize("l", [2, 3])
def test_clipping_noise_skips_lower_layers(rng, l):
    x, _ = layer_frame(rng, l, n=20)
    C = dft(clip_negative(x))
    for m in range(1, l):
        assert np.max(np.abs(C[:, layer_subcarriers(m, 127)])) < 1e-9


def test_layer1_clipping_noise_on_even_bins_only(rng):
    x, idx = layer_frame(rng, 1, n=20)
    C = dft(clip_negative(x))
    X = dft(x)
    odd = np.arange(1, 256, 2)
    np.testing.assert_allclose(C[:, odd], 0.5 * X[:, odd], atol=1e-9)
    even = np.arange(0, 256, 2)
    assert np.max(np.abs(C[:, even])) > 1e-3


# ---- clipping and cyclic prefix ------------------------------------------

def test_clip_negative_examples():
    np.testing.assert_array_equal(clip_negative([-1.0, 0.0, 2.0]), [0.0, 0.0, 2.0])
    x = np.array([0.0, 1.5, 3.0])
    np.testing.assert_array_equal(clip_negative(x), x)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=64))
def test_clip_negative_idempotent(values):
    once = clip_negative(values)
    np.testing.assert_array_equal(clip_negative(once), once)
    assert np.all(once >= 0)


def test_cp_examples():
    np.testing.assert_array_equal(add_cp([1, 2, 3, 4], 2), [3, 4, 1, 2, 3, 4])
    np.testing.assert_array_equal(add_cp([1, 2, 3, 4], 0), [1, 2, 3, 4])
    with pytest.raises(ConfigError):
        add_cp([1, 2, 3, 4], 4)
    with pytest.raises(ConfigError):
        remove_cp([1, 2, 3, 4], 4, 4)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 15), st.integers(0, 2**32 - 1))
def test_cp_round_trip(n_sym, cp, seed):
    N = 16
    x = np.random.default_rng(seed).normal(size=n_sym * N)
    y = add_cp(x, cp, N)
    assert y.size == n_sym * (N + cp)
    np.testing.assert_array_equal(remove_cp(y, cp, N), x)
    frames = x.reshape(n_sym, N)
    np.testing.assert_array_equal(waveform_to_frames(frames_to_waveform(frames, cp), N, cp), frames)


# ---- data containers -----------------------------------------------------

def test_real_waveform_rejects_non_finite():
    with pytest.raises(ContractError):
        RealWaveform([0.0, np.nan])
    w = RealWaveform([1.0, 2.0], 10.0, "volts")
    assert w.unit is Unit.VOLTS and len(w) == 2


def test_symbol_frame_shape_check():
    with pytest.raises(ConfigError):
        SymbolFrame([1, 2], np.zeros((3, 3)))
    assert SymbolFrame([1, 2], np.zeros(6)).n_ofdm_symbols == 3
