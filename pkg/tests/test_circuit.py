import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import phases, seeds
from qutritchip.analysis.bell import CglmpSetting, cglmp_kets
from qutritchip.circuit import (A1_OUTCOME_MODES, CGLMP_A1_SETTING, IDENTITY_SETTING, KS_F_SETTING,
                                HeaterCalibration, PhaseSetting, decompose_unitary,
                                diagonal_phase_distance, multiport_unitary, mzi_unitary,
                                phase_to_power, power_to_phase, row_overlaps, wdm_transmission)
from qutritchip.errors import DomainError
from qutritchip.experiment import coincidence_probs
from qutritchip.qcore import fourier3, is_unitary, max_entangled, random_unitary

six_phases = st.lists(phases, min_size=6, max_size=6)


def test_heater_calibration():
    cal = HeaterCalibration(42.0)
    assert phase_to_power(0.0, cal) == 0.0
    assert phase_to_power(2 * np.pi, cal) == pytest.approx(42.0)
    assert power_to_phase(phase_to_power(1.234, cal), cal) == pytest.approx(1.234, abs=1e-12)
    with pytest.raises(DomainError):
        power_to_phase(-1.0, cal)
    with pytest.raises(DomainError):
        HeaterCalibration(0.0)


def test_mzi_extremes():
    p = np.abs(mzi_unitary(np.pi)) ** 2
    assert np.allclose(p, np.eye(2))
    assert np.allclose(np.abs(mzi_unitary(0.0)) ** 2, [[0, 1], [1, 0]])
    assert np.allclose(np.abs(mzi_unitary(np.pi / 2)[:, 0]) ** 2, [0.5, 0.5])


@given(phases)
def test_mzi_unitary(theta):
    assert is_unitary(mzi_unitary(theta), 1e-12)


def test_wdm_loss():
    assert wdm_transmission(3.0) == pytest.approx(0.501, abs=1e-3)


def test_identity_setting():
    u = multiport_unitary(IDENTITY_SETTING)
    assert np.allclose(u, np.diag([1, -1, 1]))
    assert diagonal_phase_distance(u, np.eye(3)) < 1e-12


@given(six_phases)
def test_multiport_unitary_always_unitary(vals):
    assert is_unitary(multiport_unitary(PhaseSetting(*vals)))


def test_phase_setting_canonical_and_json():
    s = PhaseSetting(-np.pi / 2, 7.0, 0, 0, 0, 0)
    assert 0 <= s.z1 < 2 * np.pi and s.z1 == pytest.approx(1.5 * np.pi)
    assert PhaseSetting.from_json(s.to_json()) == s
    t = PhaseSetting.from_json(s.to_json(prefix="I", units="pi"))
    assert np.allclose(t.as_array(), s.as_array())
    q = PhaseSetting.from_json({"Pz1": 0.5, "Py1": 1, "Pz2": 0, "Py2": 0, "Pz3": 0, "Py3": 0,
                                "units": "pi"})
    assert q.z1 == pytest.approx(np.pi / 2)
    with pytest.raises(KeyError):
        PhaseSetting.from_json(json.dumps({"Sz1": 0}))
    with pytest.raises(DomainError):
        PhaseSetting(np.nan)


def test_cglmp_a1_setting_matches_bases():
    u = multiport_unitary(CGLMP_A1_SETTING)
    target = cglmp_kets(CglmpSetting("A", 1)).conj()
    ov = row_overlaps(u[list(A1_OUTCOME_MODES)], target)
    assert np.all(ov >= 1 - 2e-2)


def test_ks_setting_routes_f_to_port_3():
    f = np.array([1, -1, 1]) / np.sqrt(3)
    out = multiport_unitary(KS_F_SETTING) @ f
    assert abs(out[1]) ** 2 >= 0.999   # mode 1 leaves through port 3


def test_decompose_identity_and_fourier():
    assert diagonal_phase_distance(multiport_unitary(decompose_unitary(np.eye(3))), np.eye(3)) < 1e-12
    f = fourier3()
    assert diagonal_phase_distance(multiport_unitary(decompose_unitary(f)), f) < 1e-12


def test_decompose_haar_round_trip():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        u = random_unitary(3, rng)
        v = multiport_unitary(decompose_unitary(u))
        assert np.all(row_overlaps(v, u) >= 1 - 1e-9)
        assert diagonal_phase_distance(v, u) < 1e-8


@given(six_phases)
def test_recompose_settings(vals):
    u = multiport_unitary(PhaseSetting(*vals))
    assert diagonal_phase_distance(multiport_unitary(decompose_unitary(u)), u) < 1e-8


@given(seeds, st.lists(phases, min_size=3, max_size=3))
def test_output_phases_do_not_change_statistics(seed, ph):
    rng = np.random.default_rng(seed)
    u, v = random_unitary(3, rng), random_unitary(3, rng)
    d = np.diag(np.exp(1j * np.asarray(ph)))
    psi = max_entangled()
    assert np.max(np.abs(coincidence_probs(psi, d @ u, v) - coincidence_probs(psi, u, v))) < 1e-12
    assert np.max(np.abs(coincidence_probs(psi, u, d @ v) - coincidence_probs(psi, u, v))) < 1e-12
