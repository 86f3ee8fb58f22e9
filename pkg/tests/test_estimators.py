import numpy as np
import pytest

from itwa_engine.errors import ValidationError
from itwa_engine.estimators import (
    ObservableSeries,
    effective_sample_size,
    energy_observable,
    jackknife_error,
    log_partition_ratio,
    magnetization_sq,
    magnetization_sq_values,
    reweighted_mean,
    transverse_magnetization,
    window_average,
)
from itwa_engine.phasespace import SQRT3, SpinEnsembleState
from itwa_engine.sde import WeightedSnapshot


def snapshot_from_u(u, log_w=None, tau=1.0):
    u = np.atleast_2d(np.asarray(u, dtype=float))
    theta = np.arccos(u)
    state = SpinEnsembleState(theta, np.zeros_like(theta))
    if log_w is None:
        log_w = np.zeros(u.shape[0])
    return WeightedSnapshot(tau=tau, state=state, log_weights=np.asarray(log_w, float))


def test_reweighted_mean_equal_weights_is_plain_mean():
    v = np.array([1.0, 2.0, 5.0, -3.0])
    assert np.isclose(reweighted_mean(v, np.zeros(4)), v.mean())


def test_reweighted_mean_shift_invariance():
    rng = np.random.default_rng(1)
    v = rng.normal(size=100)
    lw = rng.normal(size=100)
    a = reweighted_mean(v, lw)
    b = reweighted_mean(v, lw + 123.456)
    c = reweighted_mean(v, lw - 987.0)
    assert np.isclose(a, b) and np.isclose(a, c)


def test_reweighted_mean_weighted_pair():
    # (1*1 + 3*3) / (1 + 3) = 2.5
    assert np.isclose(reweighted_mean([1.0, 3.0], [0.0, np.log(3.0)]), 2.5)


def test_reweighted_mean_consistent_with_independent_weights():
    # values independent of weights: the ratio estimator converges to the
    # plain mean, here 0, within its own jackknife error bar
    rng = np.random.default_rng(8)
    v = rng.normal(size=10_000)
    lw = rng.normal(size=10_000)
    est = reweighted_mean(v, lw)
    err = jackknife_error(v, lw)
    assert abs(est) < 3.0 * err


def test_reweighted_mean_extreme_weights_stable():
    # weights spanning hundreds of decades must not overflow
    v = np.array([1.0, 2.0])
    lw = np.array([0.0, -2000.0])
    assert np.isclose(reweighted_mean(v, lw), 1.0)


def test_input_validation():
    with pytest.raises(ValidationError):
        reweighted_mean([], [])
    with pytest.raises(ValidationError):
        reweighted_mean([1.0, 2.0], [0.0])
    with pytest.raises(ValidationError):
        reweighted_mean([np.nan, 1.0], [0.0, 0.0])
    with pytest.raises(ValidationError):
        reweighted_mean([1.0], [-np.inf])
    with pytest.raises(ValidationError):
        jackknife_error([1.0], [0.0])


def test_effective_sample_size_limits():
    assert np.isclose(effective_sample_size(np.zeros(50)), 50.0)
    # one dominant weight
    lw = np.full(50, -100.0)
    lw[0] = 0.0
    assert effective_sample_size(lw) < 1.001
    # shift invariance
    rng = np.random.default_rng(2)
    lw = rng.normal(size=30)
    assert np.isclose(effective_sample_size(lw), effective_sample_size(lw + 55.0))


def test_jackknife_frozen_value():
    # unweighted mean of (1, 2, 3): leave-one-out spread gives sqrt(1/3)
    err = jackknife_error([1.0, 2.0, 3.0], np.zeros(3))
    assert np.isclose(err, 0.5773502691896257)


def test_jackknife_scales_with_sqrt_n():
    rng = np.random.default_rng(3)
    v = rng.normal(size=4000)
    err = jackknife_error(v, np.zeros(4000))
    assert np.isclose(err, v.std(ddof=1) / np.sqrt(4000), rtol=1e-3)


def test_jackknife_matches_weighted_bootstrap_scale():
    rng = np.random.default_rng(4)
    v = rng.normal(size=2000)
    lw = rng.normal(scale=0.5, size=2000)
    err = jackknife_error(v, lw)
    # crude bootstrap reference
    boots = []
    for _ in range(200):
        idx = rng.integers(0, 2000, size=2000)
        boots.append(reweighted_mean(v[idx], lw[idx]))
    assert np.isclose(err, np.std(boots), rtol=0.2)


def test_observable_series_validation():
    kw = dict(value=[1.0, 2.0], stderr=[0.1, 0.1], ess=[5.0, 5.0], n_traj=[10, 10])
    ObservableSeries(tau=[0.5, 1.0], **kw)
    with pytest.raises(ValidationError):
        ObservableSeries(tau=[1.0, 0.5], **kw)
    with pytest.raises(ValidationError):
        ObservableSeries(tau=[0.5, 1.0], value=[1.0], stderr=[0.1, 0.1],
                         ess=[5.0, 5.0], n_traj=[10, 10])
    with pytest.raises(ValidationError):
        ObservableSeries(tau=[0.5, 1.0], value=[1.0, 2.0], stderr=[-0.1, 0.1],
                         ess=[5.0, 5.0], n_traj=[10, 10])
    with pytest.raises(ValidationError):
        ObservableSeries(tau=[0.5, 1.0], value=[1.0, 2.0], stderr=[0.1, 0.1],
                         ess=[50.0, 5.0], n_traj=[10, 10])


def test_magnetization_sq_classical_configs():
    # fully aligned classical configuration: m^2 = 1; balanced: (N - N)/N^2 = 0
    n = 6
    up = np.full((1, n), 1 / SQRT3)
    assert np.isclose(magnetization_sq_values(snapshot_from_u(up))[0], 1.0)
    neel = np.tile([1 / SQRT3, -1 / SQRT3], n // 2)[None, :]
    assert np.isclose(magnetization_sq_values(snapshot_from_u(neel))[0], 0.0)


def test_magnetization_sq_single_spin_is_unity():
    # sigma_z^2 = 1 exactly, for any angle
    rng = np.random.default_rng(5)
    u = rng.uniform(-1, 1, size=(20, 1))
    vals = magnetization_sq_values(snapshot_from_u(u))
    assert np.allclose(vals, 1.0)


def test_transverse_magnetization_site_average():
    theta = np.array([[np.pi / 2, np.pi / 2]])
    phi = np.array([[0.0, np.pi]])
    snap = WeightedSnapshot(tau=0.0, state=SpinEnsembleState(theta, phi),
                            log_weights=np.zeros(1))
    value, _ = transverse_magnetization(snap)
    assert np.isclose(value, 0.0, atol=1e-12)


def test_window_average_constant_series():
    s = ObservableSeries(tau=[1.0, 2.0, 3.0, 4.0], value=[5.0] * 4,
                         stderr=[0.2] * 4, ess=[10.0] * 4, n_traj=[20] * 4)
    value, err = window_average(s, 2.0, 4.0)
    assert value == 5.0
    assert np.isclose(err, 0.2)  # scatter is zero; propagated stderr survives
    with pytest.raises(ValidationError):
        window_average(s, 10.0, 12.0)


def test_window_average_uses_scatter_when_larger():
    s = ObservableSeries(tau=[1.0, 2.0, 3.0], value=[1.0, 5.0, 9.0],
                         stderr=[0.01] * 3, ess=[10.0] * 3, n_traj=[20] * 3)
    value, err = window_average(s, 1.0, 3.0)
    assert value == 5.0
    assert np.isclose(err, np.std([1.0, 5.0, 9.0], ddof=1) / np.sqrt(3))


def test_log_partition_ratio_recovers_offset():
    # equal unshifted weights L: log mean exp(L) = L
    state = SpinEnsembleState(np.ones((4, 2)), np.zeros((4, 2)))
    snap = WeightedSnapshot(tau=1.0, state=state, log_weights=np.zeros(4),
                            log_weight_offset=7.25)
    assert np.isclose(log_partition_ratio(snap), 7.25)


def test_log_partition_ratio_k4_enumeration():
    # draw configurations of the complete graph on 4 vertices uniformly and
    # weight each by exp(-tau E); the estimator must converge to
    # log(Z(tau)/Z(0)) from the 16-configuration enumeration
    energies = np.array([6.0] * 2 + [0.0] * 8 + [-2.0] * 6)  # J = 1
    tau = 1.0
    rng = np.random.default_rng(2)
    e = rng.choice(energies, size=400_000)
    lw = -tau * e
    offset = float(lw.max())
    state = SpinEnsembleState(np.ones((e.size, 1)), np.zeros((e.size, 1)))
    snap = WeightedSnapshot(tau=tau, state=state, log_weights=lw - offset,
                            log_weight_offset=offset)
    want = np.log(np.exp(-tau * energies).mean())
    assert abs(log_partition_ratio(snap) - want) < 0.01
