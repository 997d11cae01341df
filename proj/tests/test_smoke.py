import math

import pytest

import clustersync


def test_settling_time():
    assert clustersync.settling_time(8.0, 2.0, 0.5) == pytest.approx(2.0)
    assert clustersync.settling_time(0.0, 2.0, 0.5) == 0.0


def test_eta_k():
    import numpy as np

    Q = np.eye(2)
    assert clustersync.eta_k(Q, -0.8, [0, 2, 5], [1, 3]) == pytest.approx(0.52)


def test_psi():
    import numpy as np

    v = clustersync.psi(np.array([1.0, 0.0]), 2.0, 1e-10)
    assert v[0] == pytest.approx(0.25)
    assert v[1] == 0.0
    assert clustersync.psi(np.array([1.0, 0.0]), 0.0, 1e-10).tolist() == [0.0, 0.0]


def test_select_pinned_nodes():
    import numpy as np

    picked = clustersync.select_pinned_nodes(np.array([3.0, 1.0, 2.0]), [0, 3], -0.8, [2])
    assert picked == [[1, 3]]


def test_power_mean_check():
    assert clustersync.power_mean_check([[3.0, 4.0]], 1.0)


def test_preset_config_shape():
    cfg = clustersync.preset_config("case2")
    assert cfg["network"]["n"] == 2
    assert cfg["network"]["partition"] == [0, 2, 5]
    assert cfg["controller"]["type"] == "pinning_impulsive"
    assert cfg["controller"]["gains"] == [-0.8]
    assert cfg["controller"]["rho"] == [1, 3]


def test_run_preset_and_digest():
    out = clustersync.run_preset("case2", T=1.0)
    assert out["summary"]["final_max_error"] < 5.0
    assert len(out["times"]) == len(out["V"]) == len(out["limit"])
    assert out["limit"][0] == "-"
    assert "+" in out["limit"]

    cfg = clustersync.preset_config("case2")
    assert len(clustersync.config_digest(cfg)) == 16


def test_run_config_dict():
    cfg = clustersync.preset_config("case1")
    cfg["integrator"]["T"] = 0.2
    out = clustersync.run(cfg)
    assert out["summary"]["settling"] is None


def test_check_requires_criteria():
    with pytest.raises(clustersync.ClusterSyncError):
        clustersync.check(clustersync.preset_config("case1"))


def test_parse_error_paths():
    cfg = clustersync.preset_config("case1")
    del cfg["network"]["G"]
    with pytest.raises(clustersync.ClusterSyncError, match="network.G"):
        clustersync.run(cfg)
