import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import seeds
from oracles import cut_sensitivity_oracle
from qutritchip.analysis import bell, contextuality as ks, metrology, mub, qkd
from qutritchip.errors import UndefinedConditionalError
from qutritchip.experiment import NoiseModel, build_state, coincidence_probs
from qutritchip.qcore import (is_unitary, max_entangled, random_density, white_noise_for_fidelity,
                              white_noise_state)

PSI = max_entangled()
P_PAPER = white_noise_for_fidelity(0.9550)


def random_product(rng):
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    b = rng.normal(size=3) + 1j * rng.normal(size=3)
    return np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b))


# ------------------------------------------------------------------ CGLMP

def test_cglmp_bases():
    k = bell.cglmp_kets(bell.CglmpSetting("A", 1))
    assert np.allclose(k[0], np.ones(3) / np.sqrt(3))
    for party, idx in bell.OFFSETS:
        assert is_unitary(bell.cglmp_bases(bell.CglmpSetting(party, idx)))
    with pytest.raises(ValueError):
        bell.CglmpSetting("A", 3)


def test_cglmp_ideal_table():
    rows = bell.cglmp_table(bell.all_tables(PSI))
    for n, (label, val) in enumerate(rows):
        assert val == pytest.approx(0.8293 if n % 2 == 0 else 0.1111, abs=5e-4), label
    assert bell.cglmp_i3(bell.all_tables(PSI)) == pytest.approx(2.8729, abs=1e-3)


def test_cglmp_mixed_and_noisy():
    mixed = bell.all_tables(np.eye(9) / 9)
    assert all(np.allclose(t, 1 / 9) for t in mixed.values())
    assert bell.cglmp_i3(mixed) == pytest.approx(0, abs=1e-12)
    i3 = bell.cglmp_i3(bell.all_tables(white_noise_state(PSI, P_PAPER)))
    assert 2.70 <= i3 <= 2.76


def test_cglmp_product_states_respect_bound():
    rng = np.random.default_rng(99)
    worst = max(bell.cglmp_i3(bell.all_tables(random_product(rng))) for _ in range(1000))
    assert worst <= 2 + 1e-9


@given(seeds)
def test_cglmp_shared_relabelling(seed):
    t = bell.all_tables(random_density(9, np.random.default_rng(seed)))
    shifted = {ab: np.roll(np.roll(x, 1, axis=0), 1, axis=1) for ab, x in t.items()}
    assert bell.cglmp_i3(shifted) == pytest.approx(bell.cglmp_i3(t), abs=1e-12)


# --------------------------------------------------------------------- KS

def test_ks_vectors():
    assert np.vdot(ks.KET_A0, ks.KET_A1) == pytest.approx(-0.5)
    assert np.vdot(ks.KET_I, ks.KET_F) == pytest.approx(1 / 3)
    for v in (ks.KET_I, ks.KET_F, ks.KET_A0, ks.KET_A1):
        assert np.linalg.norm(v) == pytest.approx(1)
    for p in ks.ks_projectors().values():
        assert np.allclose(p @ p, p)


def test_ks_values():
    lhs, cond = ks.ks_lhs(PSI)
    assert lhs == pytest.approx(1 / 9, abs=1e-12)
    assert [cond[k] for k in ("D1_A", "T0_A", "T1_A")] == pytest.approx([1 / 9, 0, 0], abs=1e-12)
    assert ks.ks_lhs(np.eye(9) / 9)[0] == pytest.approx(-1 / 3, abs=1e-12)
    assert ks.ks_lhs(white_noise_state(PSI, P_PAPER))[0] == pytest.approx(0.085, abs=0.02)


def test_ks_undefined_conditional():
    orth = np.kron([1, 0, 0], np.array([1, -1, 0]) / np.sqrt(2))
    with pytest.raises(UndefinedConditionalError):
        ks.ks_lhs(orth)


@given(seeds)
def test_ks_classical_states_do_not_violate(seed):
    w = np.random.default_rng(seed).dirichlet(np.ones(9))
    assert ks.ks_lhs(np.diag(w))[0] <= 0


def test_ks_contexts_realize_projectors():
    for c in ks.ks_contexts():
        exact = ks.ks_lhs(PSI)[1][c.name]
        p = coincidence_probs(PSI, c.u_alice, c.u_bob)
        assert p[c.alice_mode, c.bob_mode] / p[:, c.bob_mode].sum() == pytest.approx(exact, abs=1e-3)


def test_no_signalling():
    exact = [ks.ContextCounts(c, coincidence_probs(PSI, c.u_alice, c.u_bob) * 1e6)
             for c in ks.ks_contexts()]
    assert all(v < 1e-12 for _, v in ks.no_signalling_checks(exact))
    sim = ks.simulate_contexts(PSI, 5000, 7, NoiseModel(white_noise_weight=P_PAPER))
    diffs = [v for _, v in ks.no_signalling_checks(sim)]
    assert max(diffs) < 0.05
    lhs, _ = ks.ks_lhs_from_counts(sim)
    assert lhs == pytest.approx(0.0886, abs=0.03)


# -------------------------------------------------------------------- MUB

def test_mub_unbiased():
    m = mub.mub_bases()
    for j in range(1, 5):
        for k in range(1, 5):
            ov = np.abs(m.normalized(j).conj() @ m.normalized(k).T) ** 2
            assert np.allclose(ov, np.eye(3) if j == k else 1 / 3, atol=1e-12)


def test_mub_correlations():
    m = mub.mub_bases()
    noisy = white_noise_state(PSI, P_PAPER)
    for k in range(1, 5):
        u_s, u_i = m.signal_unitary(k), m.idler_unitary(k)
        assert mub.correlation_coefficient(coincidence_probs(PSI, u_s, u_i), k) == pytest.approx(1)
        assert mub.correlation_coefficient(coincidence_probs(np.eye(9) / 9, u_s, u_i), k) == pytest.approx(1 / 3)
        assert 0.85 <= mub.correlation_coefficient(coincidence_probs(noisy, u_s, u_i), k) <= 0.99
    with pytest.raises(UndefinedConditionalError):
        mub.correlation_coefficient(np.zeros((3, 3)))


def test_mub_balancing_from_singles():
    eff = np.array([1.0, 0.8, 0.5, 1.0, 0.7, 0.6])
    p = coincidence_probs(PSI, *[f(1) for f in (mub.mub_bases().signal_unitary, mub.mub_bases().idler_unitary)])
    raw = 1e6 * p * np.outer(eff[0::2], eff[1::2])
    singles = 1e6 / 3 * eff
    est = mub.efficiencies_from_singles(singles)
    assert np.allclose(mub.balance_counts(raw, est) / 1e6, p * eff[0::2].max() * eff[1::2].max())


# -------------------------------------------------------------------- QKD

def test_qkd():
    assert qkd.qkd_error_rate(1.0) == 0.0
    assert qkd.qkd_error_rate(0.9550) == pytest.approx(0.03375, abs=1e-15)
    assert qkd.SECURITY_BOUND == 0.1595
    assert qkd.qkd_report(0.9550)["secure"]
    assert not qkd.qkd_report(0.7)["secure"]
    with pytest.raises(ValueError):
        qkd.qkd_error_rate(1.2)


# -------------------------------------------------------------- metrology

def test_benchmarks():
    x = np.linspace(-np.pi, np.pi, 20001)
    assert metrology.curve_sensitivity(x, metrology.two_path_curve(x)) == pytest.approx(0.5, abs=1e-6)
    assert metrology.curve_sensitivity(x, metrology.three_path_curve(x)) == pytest.approx(0.78, abs=5e-3)
    assert metrology.TWO_PATH_BENCHMARK == 0.5 and metrology.THREE_PATH_BENCHMARK == 0.78


def test_ideal_cut_sensitivity():
    scan = metrology.sensitivity_scan()
    s = scan.averages["pairs"]
    assert s > metrology.TWO_PATH_BENCHMARK and s > metrology.THREE_PATH_BENCHMARK
    assert s == pytest.approx(cut_sensitivity_oracle(), rel=0.01)
    assert scan.averages["fit"] == pytest.approx(cut_sensitivity_oracle(), rel=0.01)


@given(st.floats(1e-3, 1e3))
def test_sensitivity_scale_invariant(c):
    x = np.linspace(-np.pi / 2, np.pi / 2, 1001)
    y = metrology.three_path_curve(2 * x)
    assert metrology.curve_sensitivity(x, c * y) == pytest.approx(metrology.curve_sensitivity(x, y), rel=1e-12)


def test_coarse_grid_warns():
    x = np.linspace(0, np.pi, 20)
    with pytest.warns(RuntimeWarning):
        metrology.curve_sensitivity(x, np.cos(2 * x) + 2, np.pi)


def test_derivative_needs_uniform_grid():
    with pytest.raises(ValueError):
        metrology.derivative([0, 1, 3, 4, 5, 6], np.zeros(6))


def test_map_triple_degeneracy():
    g = np.linspace(-np.pi, np.pi, 13)
    groups = metrology.degenerate_groups(metrology.pump_phase_map(g, g))
    assert sorted(map(len, groups)) == [3, 3, 3]
    assert ["14", "32", "56"] in groups


def test_paper_noise_cut():
    scan = metrology.sensitivity_scan(noise=NoiseModel(white_noise_weight=P_PAPER))
    assert abs(scan.averages["pairs"] - 1.476) <= 0.1
    assert abs(scan.averages["fit"] - 1.476) <= 0.1
