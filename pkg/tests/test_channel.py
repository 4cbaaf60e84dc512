import numpy as np
import pytest
from scipy import stats

from mmwavesim.channel import (AngleSpreads, ArrayGeometry, ChannelFileError,
                               ChannelRealization, ClusterSet, LinkState,
                               DEFAULT_PROPAGATION, array_response, assemble_channel,
                               export_channels, import_channels, los_probability,
                               mean_path_loss_db, path_loss_db, sample_cluster_set,
                               sample_link_state)

WAVELENGTH = DEFAULT_PROPAGATION.wavelength_m


def single_path_clusters(aoa_az, aoa_el, aod_az, aod_el):
    return ClusterSet(gains=np.array([1.0]),
                      aoa_azimuth=np.array([[aoa_az]]), aoa_elevation=np.array([[aoa_el]]),
                      aod_azimuth=np.array([[aod_az]]), aod_elevation=np.array([[aod_el]]),
                      subpath_phases=None)


class TestLosProbability:
    def test_below_breakpoint_is_exactly_one(self):
        for d in (1.0, 10.0, 26.9, 27.0):
            assert los_probability(d) == 1.0

    def test_reference_value_at_71m(self):
        assert los_probability(71.0) == pytest.approx(0.369984, abs=1e-6)

    def test_monotone_decreasing_beyond_breakpoint(self):
        d = np.linspace(27.0, 500.0, 300)
        p = np.array([los_probability(x) for x in d])
        assert np.all(np.diff(p) < 0)
        assert np.all((p > 0) & (p <= 1))

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(ValueError):
            los_probability(0.0)

    def test_link_state_frequencies(self):
        rng = np.random.default_rng(5)
        n = 20000
        hits = sum(sample_link_state(71.0, rng) is LinkState.LOS for _ in range(n))
        p = los_probability(71.0)
        # 4-sigma binomial band
        assert abs(hits / n - p) < 4 * np.sqrt(p * (1 - p) / n)


class TestPathLoss:
    def test_free_space_reference_at_1m(self):
        # 20*log10(4*pi/lambda) at 28 GHz
        assert mean_path_loss_db(1.0, LinkState.LOS) == pytest.approx(61.391, abs=0.001)
        assert mean_path_loss_db(1.0, LinkState.NLOS) == pytest.approx(61.391, abs=0.001)

    def test_slope_per_decade(self):
        for state, n in ((LinkState.LOS, 2.1), (LinkState.NLOS, 3.4)):
            step = (mean_path_loss_db(100.0, state) - mean_path_loss_db(10.0, state))
            assert step == pytest.approx(10.0 * n, abs=1e-9)

    def test_mean_strictly_increasing(self):
        d = np.linspace(1.0, 400.0, 200)
        for state in LinkState:
            pl = np.array([mean_path_loss_db(x, state) for x in d])
            assert np.all(np.diff(pl) > 0)

    def test_shadowing_statistics(self):
        rng = np.random.default_rng(17)
        n = 100000
        draws = np.array([path_loss_db(50.0, LinkState.NLOS, rng) for _ in range(n)])
        mean = mean_path_loss_db(50.0, LinkState.NLOS)
        assert abs(draws.mean() - mean) < 0.15
        assert draws.std() == pytest.approx(9.7, abs=0.15)

    def test_rejects_distance_below_reference(self):
        with pytest.raises(ValueError):
            mean_path_loss_db(0.5, LinkState.LOS)


class TestArrayResponse:
    def test_unit_modulus(self):
        geom = ArrayGeometry(8, 8, WAVELENGTH)
        rng = np.random.default_rng(2)
        a = array_response(geom, rng.uniform(0, 2 * np.pi, 50), rng.uniform(0, np.pi, 50))
        assert a.shape == (64, 50)
        assert np.allclose(np.abs(a), 1.0)

    def test_broadside_all_ones(self):
        geom = ArrayGeometry(8, 8, WAVELENGTH)
        assert np.allclose(array_response(geom, 0.0, np.pi / 2), 1.0)

    def test_element_phase_layout(self):
        # flattened index u*V + v; phase = pi*(u*sin(az)sin(el) + v*cos(el))
        geom = ArrayGeometry(3, 4, WAVELENGTH)
        az, el = 0.7, 1.1
        a = array_response(geom, az, el)
        for u in range(3):
            for v in range(4):
                expect = np.exp(1j * np.pi * (u * np.sin(az) * np.sin(el) + v * np.cos(el)))
                assert a[u * 4 + v] == pytest.approx(expect)

    def test_ula_ignores_azimuth_only_through_sin(self):
        # 4x1 panel: phase depends on u*sin(az)*sin(el) only
        geom = ArrayGeometry(4, 1, WAVELENGTH)
        a = array_response(geom, 0.3, np.pi / 2)
        expect = np.exp(1j * np.pi * np.arange(4) * np.sin(0.3))
        assert np.allclose(a, expect)

    def test_rejects_bad_geometry(self):
        with pytest.raises(ValueError):
            ArrayGeometry(0, 4, WAVELENGTH)
        with pytest.raises(ValueError):
            ArrayGeometry(4, 1, WAVELENGTH, spacing_wavelengths=0.0)


class TestClusterSampling:
    def test_gains_normalized_and_positive(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            cs = sample_cluster_set(4, 7, rng)
            assert cs.gains.shape == (4,)
            assert np.all(cs.gains > 0)
            assert cs.gains.sum() == pytest.approx(1.0, abs=1e-12)

    def test_angle_ranges(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            cs = sample_cluster_set(4, 7, rng)
            for az in (cs.aoa_azimuth, cs.aod_azimuth):
                assert np.all((az >= 0) & (az < 2 * np.pi))
            for el in (cs.aoa_elevation, cs.aod_elevation):
                assert np.all((el >= 0) & (el <= np.pi))
            assert np.all((cs.subpath_phases >= 0) & (cs.subpath_phases < 2 * np.pi))

    def test_cluster_center_azimuths_uniform(self):
        # one subpath per cluster keeps the Laplacian offset small enough
        # to treat centers as the dominant term; test the centers directly
        # by regenerating with zero spread
        rng = np.random.default_rng(21)
        spreads = AngleSpreads(azimuth_subpath_std=0.0, elevation_subpath_std=0.0)
        draws = np.concatenate(
            [sample_cluster_set(4, 1, rng, spreads).aod_azimuth.ravel() for _ in range(2000)])
        _, pvalue = stats.kstest(draws / (2 * np.pi), "uniform")
        assert pvalue > 1e-3

    def test_elevations_near_horizon(self):
        rng = np.random.default_rng(23)
        spreads = AngleSpreads()
        cs = sample_cluster_set(64, 7, rng, spreads)
        # centers within pi/2 +/- range; Laplacian tails stay tiny
        assert np.all(np.abs(cs.aoa_elevation - np.pi / 2) < spreads.elevation_range + 0.5)

    def test_phase_toggle_leaves_other_draws_unchanged(self):
        a = sample_cluster_set(4, 7, np.random.default_rng(42), subpath_phase=True)
        b = sample_cluster_set(4, 7, np.random.default_rng(42), subpath_phase=False)
        assert b.subpath_phases is None
        assert np.array_equal(a.gains, b.gains)
        assert np.array_equal(a.aoa_azimuth, b.aoa_azimuth)
        assert np.array_equal(a.aod_elevation, b.aod_elevation)

    def test_validation_rejects_bad_gains(self):
        with pytest.raises(ValueError):
            ClusterSet(gains=np.array([0.6, 0.6]),
                       aoa_azimuth=np.zeros((2, 1)), aoa_elevation=np.zeros((2, 1)),
                       aod_azimuth=np.zeros((2, 1)), aod_elevation=np.zeros((2, 1)))


class TestAssembleChannel:
    def test_single_path_outer_product(self):
        bs = ArrayGeometry(8, 8, WAVELENGTH)
        ue = ArrayGeometry(4, 1, WAVELENGTH)
        cs = single_path_clusters(0.5, 1.4, 2.5, 1.6)
        ch = assemble_channel(cs, bs, ue, path_loss_db=0.0)
        a_ue = array_response(ue, 0.5, 1.4)
        a_bs = array_response(bs, 2.5, 1.6)
        assert np.allclose(ch.matrix, np.outer(a_ue, a_bs.conj()))
        assert np.linalg.norm(ch.matrix) == pytest.approx(np.sqrt(4 * 64))

    def test_path_loss_scales_amplitude(self):
        bs = ArrayGeometry(8, 8, WAVELENGTH)
        ue = ArrayGeometry(4, 1, WAVELENGTH)
        cs = single_path_clusters(0.5, 1.4, 2.5, 1.6)
        h0 = assemble_channel(cs, bs, ue, path_loss_db=0.0).matrix
        h60 = assemble_channel(cs, bs, ue, path_loss_db=60.0).matrix
        assert np.allclose(h60, 1e-3 * h0)

    def test_boresight_rotates_arrival_azimuth(self):
        bs = ArrayGeometry(8, 8, WAVELENGTH)
        ue = ArrayGeometry(4, 1, WAVELENGTH)
        cs = single_path_clusters(1.0, 1.5, 2.0, 1.5)
        rotated = assemble_channel(cs, bs, ue, 0.0, ue_boresight=0.4).matrix
        shifted = assemble_channel(single_path_clusters(0.6, 1.5, 2.0, 1.5), bs, ue, 0.0).matrix
        assert np.allclose(rotated, shifted)

    def test_expected_squared_norm(self):
        # each weighted outer product has squared norm N*M*gain_c/(C*L);
        # i.i.d. subpath phases kill the cross terms in expectation, so
        # E||H_ss||_F^2 = N*M*sum_{c,l} gain_c/(C*L) = N*M/C with gains
        # summing to 1
        bs = ArrayGeometry(8, 8, WAVELENGTH)
        ue = ArrayGeometry(4, 1, WAVELENGTH)
        rng = np.random.default_rng(31)
        norms = []
        for _ in range(400):
            cs = sample_cluster_set(4, 7, rng)
            h = assemble_channel(cs, bs, ue, path_loss_db=0.0).matrix
            norms.append(np.linalg.norm(h) ** 2)
        assert np.mean(norms) == pytest.approx(4 * 64 / 4, rel=0.15)

    def test_generated_channels_finite_nonzero(self):
        bs = ArrayGeometry(8, 8, WAVELENGTH)
        ue = ArrayGeometry(4, 1, WAVELENGTH)
        rng = np.random.default_rng(37)
        for _ in range(100):
            cs = sample_cluster_set(4, 7, rng)
            h = assemble_channel(cs, bs, ue, path_loss_db=rng.uniform(60, 140)).matrix
            assert np.all(np.isfinite(h.real)) and np.all(np.isfinite(h.imag))
            assert np.linalg.norm(h) > 0

    def test_literal_mode_drops_phases(self):
        bs = ArrayGeometry(8, 8, WAVELENGTH)
        ue = ArrayGeometry(4, 1, WAVELENGTH)
        cs = sample_cluster_set(4, 7, np.random.default_rng(41), subpath_phase=False)
        assert cs.subpath_phases is None
        h = assemble_channel(cs, bs, ue, path_loss_db=0.0).matrix
        # rebuild by direct summation of the defining equation
        ref = np.zeros((4, 64), dtype=complex)
        for c in range(4):
            for sp in range(7):
                au = array_response(ue, cs.aoa_azimuth[c, sp], cs.aoa_elevation[c, sp])
                ab = array_response(bs, cs.aod_azimuth[c, sp], cs.aod_elevation[c, sp])
                ref += np.sqrt(cs.gains[c]) * np.outer(au, ab.conj())
        assert np.allclose(h, ref / np.sqrt(28))


class TestChannelFile:
    def make_set(self, n_ue=2, n_bs=2, seed=3):
        bs = ArrayGeometry(4, 2, WAVELENGTH)
        ue = ArrayGeometry(2, 1, WAVELENGTH)
        rng = np.random.default_rng(seed)
        out = {}
        for k in range(n_ue):
            for j in range(n_bs):
                cs = sample_cluster_set(3, 2, rng)
                state = LinkState.LOS if rng.random() < 0.5 else LinkState.NLOS
                out[(k, j)] = assemble_channel(cs, bs, ue, rng.uniform(60, 120), state)
        return out

    def test_round_trip_bit_exact(self, tmp_path):
        channels = self.make_set()
        path = tmp_path / "channels.jsonl"
        export_channels(path, channels)
        loaded = import_channels(path, 2, 2, 2, 8)
        assert set(loaded) == set(channels)
        for key, ch in channels.items():
            got = loaded[key]
            assert np.array_equal(got.matrix, ch.matrix)
            assert got.link_state is ch.link_state
            assert got.path_loss_db == ch.path_loss_db

    def test_missing_link_names_it(self, tmp_path):
        channels = self.make_set()
        del channels[(1, 0)]
        path = tmp_path / "channels.jsonl"
        export_channels(path, channels)
        with pytest.raises(ChannelFileError, match=r"ue=1, bs=0"):
            import_channels(path, 2, 2, 2, 8)

    def test_dimension_mismatch_names_link(self, tmp_path):
        channels = self.make_set()
        path = tmp_path / "channels.jsonl"
        export_channels(path, channels)
        with pytest.raises(ChannelFileError, match=r"ue=0, bs=0"):
            import_channels(path, 2, 2, 4, 8)

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "channels.jsonl"
        path.write_text('{"ue": 0, "bs": 0\n')
        with pytest.raises(ChannelFileError, match="line 1"):
            import_channels(path, 1, 1, 2, 8)

    def test_duplicate_link_rejected(self, tmp_path):
        channels = self.make_set(n_ue=1, n_bs=1)
        path = tmp_path / "channels.jsonl"
        export_channels(path, channels)
        path.write_text(path.read_text() * 2)
        with pytest.raises(ChannelFileError, match="duplicate"):
            import_channels(path, 1, 1, 2, 8)

    def test_non_finite_entry_rejected(self, tmp_path):
        path = tmp_path / "channels.jsonl"
        record = ('{"ue": 0, "bs": 0, "n_rx": 1, "n_tx": 1, "state": "LoS", '
                  '"path_loss_db": 70.0, "h": [NaN, 0.0]}')
        path.write_text(record + "\n")
        with pytest.raises(ChannelFileError, match="non-finite"):
            import_channels(path, 1, 1, 1, 1)


def test_channel_realization_rejects_non_2d():
    with pytest.raises(ValueError):
        ChannelRealization(matrix=np.zeros(4), link_state=LinkState.LOS, path_loss_db=70.0)
