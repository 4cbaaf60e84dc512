import numpy as np
import pytest

from mmwavesim.topology import (NetworkLayout, deploy_grid_bs, deploy_uniform_ues,
                                distance_3d, link_distances)


def test_grid_2x2_centers():
    pos = deploy_grid_bs(300.0, 2, 2)
    assert pos.shape == (4, 3)
    xy = {(p[0], p[1]) for p in pos}
    assert xy == {(75.0, 75.0), (75.0, 225.0), (225.0, 75.0), (225.0, 225.0)}
    assert np.all(pos[:, 2] == 10.0)


def test_grid_single_cell_center():
    pos = deploy_grid_bs(300.0, 1, 1)
    assert pos.shape == (1, 3)
    assert tuple(pos[0, :2]) == (150.0, 150.0)


def test_grid_1x2_centers():
    # one row of two columns: x splits the side, y sits mid-height
    pos = deploy_grid_bs(100.0, 1, 2)
    assert [tuple(p[:2]) for p in pos] == [(25.0, 50.0), (75.0, 50.0)]


def test_grid_row_major_order():
    pos = deploy_grid_bs(120.0, 2, 3)
    # index r*cols + c, x advances with c, y with r
    assert tuple(pos[0, :2]) == (20.0, 30.0)
    assert tuple(pos[2, :2]) == (100.0, 30.0)
    assert tuple(pos[3, :2]) == (20.0, 90.0)


def test_grid_rejects_bad_dims():
    with pytest.raises(ValueError):
        deploy_grid_bs(300.0, 0, 2)
    with pytest.raises(ValueError):
        deploy_grid_bs(-10.0, 2, 2)


def test_grid_deterministic():
    a = deploy_grid_bs(300.0, 2, 2)
    b = deploy_grid_bs(300.0, 2, 2)
    assert np.array_equal(a, b)


def test_uniform_ues_in_bounds_and_height():
    rng = np.random.default_rng(3)
    pos = deploy_uniform_ues(300.0, 200, rng)
    assert pos.shape == (200, 3)
    assert np.all(pos[:, :2] >= 0) and np.all(pos[:, :2] <= 300)
    assert np.all(pos[:, 2] == 1.5)


def test_uniform_ues_mean_position():
    rng = np.random.default_rng(11)
    pos = deploy_uniform_ues(300.0, 100000, rng)
    # mean of U(0, 300) is 150, std of the mean ~ 0.27
    assert abs(pos[:, 0].mean() - 150.0) < 2.0
    assert abs(pos[:, 1].mean() - 150.0) < 2.0


def test_uniform_ues_rejects_nonpositive_count():
    with pytest.raises(ValueError):
        deploy_uniform_ues(300.0, 0, np.random.default_rng(0))


def test_distance_identical_points():
    p = np.array([10.0, 20.0, 1.5])
    assert distance_3d(p, p) == 0.0


def test_distance_pure_height():
    a = np.array([50.0, 50.0, 10.0])
    b = np.array([50.0, 50.0, 1.5])
    assert distance_3d(a, b) == pytest.approx(8.5)


def test_distance_3_4_5():
    a = np.array([0.0, 0.0, 0.0])
    b = np.array([30.0, 40.0, 0.0])
    assert distance_3d(a, b) == pytest.approx(50.0)


def test_link_distances_shape_and_values():
    layout = NetworkLayout(
        area_side=300.0,
        bs_positions=deploy_grid_bs(300.0, 2, 2),
        ue_positions=np.array([[75.0, 75.0, 1.5], [225.0, 225.0, 1.5]]),
    )
    d = link_distances(layout)
    assert d.shape == (2, 4)
    # UE 0 sits under BS 0: distance is the height gap
    assert d[0, 0] == pytest.approx(8.5)
    assert d[0, 3] == pytest.approx(np.sqrt(150.0**2 + 150.0**2 + 8.5**2))
    # distinct heights keep every link distance positive
    assert np.all(d > 0)


def test_layout_rejects_out_of_bounds():
    with pytest.raises(ValueError):
        NetworkLayout(area_side=300.0,
                      bs_positions=deploy_grid_bs(300.0, 2, 2),
                      ue_positions=np.array([[301.0, 10.0, 1.5]]))


def test_layout_rejects_bad_shapes():
    with pytest.raises(ValueError):
        NetworkLayout(area_side=300.0,
                      bs_positions=np.zeros((2, 2)),
                      ue_positions=np.array([[1.0, 1.0, 1.5]]))
