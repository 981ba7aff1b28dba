import pytest

from optofdm.harness.config import CALIBRATED_THERMAL_NOISE_A, ExperimentConfig
from optofdm.harness.link import run_link


def test_dco_one_tap_q_at_0dbm():
    # the default thermal noise is pinned so that this point sits near 16 dB
    cfg = ExperimentConfig()
    assert cfg.rxfe.thermal_noise_rms == CALIBRATED_THERMAL_NOISE_A
    m = run_link(cfg, fmt="dco", rop_dbm=0.0, equalizer="one_tap")
    assert m.bits_counted >= 100_000
    assert m.q_evm_db == pytest.approx(16.0, abs=0.5)


def test_calibration_point_is_thermal_limited():
    cfg = ExperimentConfig()
    noisy = run_link(cfg, fmt="dco", rop_dbm=0.0, equalizer="one_tap").q_evm_db
    quiet = run_link(cfg.with_overrides({"rxfe.thermal_noise_rms": "0"}), fmt="dco", rop_dbm=0.0,
                     equalizer="one_tap").q_evm_db
    assert quiet > noisy + 10
