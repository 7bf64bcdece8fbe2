import math

import numpy as np
import pytest

from spmilb.linklevel import SystemConfig
from spmilb.simulator import TrialStats, _frame_samples, mc_frame_stats, mc_milb, run_trials

SP = SystemConfig(K=12, L=8, N=6, P=2.0, sigma2=1.0, alpha=0.4)


def test_workers_do_not_change_results():
    a = mc_frame_stats(SP, 600, seed=5)
    b = mc_frame_stats(SP, 600, seed=5, workers=4)
    for k in a:
        assert a[k].mean == b[k].mean and a[k].stderr == b[k].stderr


def test_milb_workers_do_not_change_results():
    cfg = SP.replace(N=10)
    assert mc_milb(cfg, 300, 2).mean == mc_milb(cfg, 300, 2, workers=3).mean


def test_prefix_property():
    # trial i depends only on (seed, i): the first 300 samples of a longer run are identical
    short = run_trials(_frame_samples(SP, None), 300, 9)
    long = run_trials(_frame_samples(SP, None), 700, 9)
    np.testing.assert_array_equal(short["sigma_v2"], long["sigma_v2"][:300])


def test_seed_changes_results():
    assert mc_frame_stats(SP, 200, 1)["sigma_v2"].mean != mc_frame_stats(SP, 200, 2)["sigma_v2"].mean


def test_per_trial_trace_identity():
    s = run_trials(_frame_samples(SP, None), 200, 4)
    total = s["r1"] + s["r2"] + s["r3"] + 2 * (s["r4"] + s["r5"] + s["r6"])
    np.testing.assert_allclose(total / (SP.N * SP.L), s["sigma_v2"], rtol=1e-10)


def test_trial_stats():
    st = TrialStats.from_samples("x", [1.0, 2.0, 3.0, 4.0], 0, SP)
    assert st.mean == 2.5 and st.trials == 4
    assert st.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert st.deviation(2.5 + 2 * st.stderr) == pytest.approx(2.0)
    assert TrialStats.from_samples("x", [1.0, 1.0], 0, SP).deviation(2.0) == math.inf
    assert st.to_dict()["config"]["K"] == 12


def test_minimum_trials():
    with pytest.raises(ValueError):
        mc_frame_stats(SP, 50, 0)


def test_mc_examples():
    cfg = SystemConfig(K=40, L=30, N=60, P=1.0, sigma2=1.0, alpha=0.5)
    st = mc_frame_stats(cfg, 2000, seed=31)
    assert st["error_variance"].deviation(26 / 41) <= 3
    assert st["sigma_v2"].deviation(10.577632361689467) <= 3
