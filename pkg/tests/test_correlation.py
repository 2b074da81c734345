import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fascopula.chan_gen import generate_copula, generate_physical, GeneratorConfig
from fascopula.correlation import (
    CorrelationMatrix,
    FasGeometry,
    empirical_pearson,
    envelope_correlation,
    gain_correlation,
    jakes_matrix,
    normal_scores_correlation,
    write_matrix_csv,
)
from fascopula.nakagami import NakagamiParams


class TestFasGeometry:
    def test_fields_and_spacing(self):
        geom = FasGeometry(n_ports=11, aperture=5.0)
        assert geom.port_spacing == pytest.approx(0.5)

    def test_single_port_allowed(self):
        assert FasGeometry(n_ports=1, aperture=2.0).port_spacing == 0.0

    @pytest.mark.parametrize("n,w", [(0, 1.0), (-2, 1.0), (2, -0.1), (2, np.inf)])
    def test_invalid(self, n, w):
        with pytest.raises(ValueError):
            FasGeometry(n_ports=n, aperture=w)


class TestCorrelationMatrix:
    def test_valid(self):
        m = CorrelationMatrix(level="coefficient",
                              entries=np.array([[1.0, 0.2], [0.2, 1.0]]))
        assert m.n_ports == 2

    def test_rejects_bad_level(self):
        with pytest.raises(ValueError):
            CorrelationMatrix(level="magic", entries=np.eye(2))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            CorrelationMatrix(level="gain",
                              entries=np.array([[1.0, 0.2], [0.4, 1.0]]))

    def test_rejects_non_unit_diagonal(self):
        with pytest.raises(ValueError):
            CorrelationMatrix(level="gain",
                              entries=np.array([[0.9, 0.2], [0.2, 1.0]]))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            CorrelationMatrix(level="coefficient",
                              entries=np.array([[1.0, 1.5], [1.5, 1.0]]))


class TestJakesMatrix:
    def test_colocated_ports(self):
        m = jakes_matrix(FasGeometry(n_ports=2, aperture=0.0))
        assert m.entries == pytest.approx(np.ones((2, 2)))

    def test_half_wavelength_pair(self):
        m = jakes_matrix(FasGeometry(n_ports=2, aperture=0.5))
        assert m.entries[0, 1] == pytest.approx(oracles.j0_ref(np.pi), abs=1e-12)
        assert m.entries[0, 1] == pytest.approx(-0.30425, abs=1e-4)

    def test_sparse_adjacent_entry(self):
        m = jakes_matrix(FasGeometry(n_ports=10, aperture=3.5))
        assert m.entries[0, 1] == pytest.approx(-0.0201, abs=5e-4)

    def test_single_port(self):
        m = jakes_matrix(FasGeometry(n_ports=1, aperture=3.0))
        assert m.entries.shape == (1, 1)
        assert m.entries[0, 0] == 1.0

    def test_matches_bessel_law_everywhere(self):
        geom = FasGeometry(n_ports=7, aperture=2.3)
        m = jakes_matrix(geom).entries
        for a in range(7):
            for b in range(7):
                expected = oracles.j0_ref(2.0 * np.pi * abs(a - b) * 2.3 / 6.0)
                assert m[a, b] == pytest.approx(expected if a != b else 1.0, abs=1e-12)

    def test_toeplitz_and_bounds(self):
        m = jakes_matrix(FasGeometry(n_ports=9, aperture=1.7)).entries
        for lag in range(1, 9):
            diag = np.diagonal(m, offset=lag)
            assert np.max(np.abs(diag - diag[0])) == 0.0
        assert np.all(m >= -0.4028)
        assert np.all(m <= 1.0)


class TestGainCorrelation:
    def test_identity(self):
        src = CorrelationMatrix(level="coefficient", entries=np.eye(3))
        assert gain_correlation(src).entries == pytest.approx(np.eye(3))

    def test_square_law(self):
        src = jakes_matrix(FasGeometry(n_ports=2, aperture=0.5))
        gained = gain_correlation(src)
        assert gained.level == "gain"
        assert gained.entries[0, 1] == pytest.approx(0.09257, abs=1e-4)
        assert gained.entries[0, 1] == pytest.approx(src.entries[0, 1] ** 2, abs=1e-15)

    def test_all_ones(self):
        src = jakes_matrix(FasGeometry(n_ports=3, aperture=0.0))
        assert gain_correlation(src).entries == pytest.approx(np.ones((3, 3)))

    def test_nonnegative_range(self):
        src = jakes_matrix(FasGeometry(n_ports=12, aperture=4.0))
        gained = gain_correlation(src).entries
        assert np.all((gained >= 0.0) & (gained <= 1.0))


class TestEnvelopeCorrelation:
    def test_zero_maps_to_zero(self):
        src = CorrelationMatrix(level="gain", entries=np.eye(4))
        mapped = envelope_correlation(src, m=2.0)
        assert mapped.entries == pytest.approx(np.eye(4))

    def test_one_maps_to_one(self):
        src = CorrelationMatrix(level="gain", entries=np.ones((2, 2)))
        mapped = envelope_correlation(src, m=3.0)
        assert mapped.entries == pytest.approx(np.ones((2, 2)), abs=1e-12)

    def test_reference_value(self):
        src = CorrelationMatrix(level="gain",
                                entries=np.array([[1.0, 0.25], [0.25, 1.0]]))
        mapped = envelope_correlation(src, m=1.0)
        assert mapped.entries[0, 1] == pytest.approx(0.23254, abs=1e-4)
        assert mapped.entries[0, 1] == pytest.approx(
            oracles.envelope_corr_ref(1.0, 0.25), abs=1e-10
        )

    def test_matches_oracle_across_shapes(self):
        for m in (0.5, 1.0, 3.0, 6.5):
            for x in (0.0, 0.1, 0.5, 0.9, 1.0):
                src = CorrelationMatrix(
                    level="gain", entries=np.array([[1.0, x], [x, 1.0]])
                )
                got = envelope_correlation(src, m=m).entries[0, 1]
                assert got == pytest.approx(oracles.envelope_corr_ref(m, x), abs=1e-10)

    def test_entrywise_monotone(self):
        lo = CorrelationMatrix(level="gain",
                               entries=np.array([[1.0, 0.2], [0.2, 1.0]]))
        hi = CorrelationMatrix(level="gain",
                               entries=np.array([[1.0, 0.6], [0.6, 1.0]]))
        a = envelope_correlation(lo, m=3.0).entries
        b = envelope_correlation(hi, m=3.0).entries
        assert np.all(b >= a)

    def test_nonnegative_for_any_jakes_input(self):
        # squaring makes every envelope-level entry nonnegative even where
        # the coefficient matrix is negative
        for n, w in [(10, 3.5), (8, 2.5), (5, 0.7), (12, 1.3)]:
            coeff = jakes_matrix(FasGeometry(n_ports=n, aperture=w))
            assert np.any(coeff.entries < 0.0) or w < 0.4
            mapped = envelope_correlation(gain_correlation(coeff), m=3.0)
            assert np.all(mapped.entries >= 0.0)
            assert np.all(mapped.entries <= 1.0)

    def test_domain(self):
        src = CorrelationMatrix(level="gain", entries=np.eye(2))
        with pytest.raises(ValueError):
            envelope_correlation(src, m=0.4)

    @given(st.floats(0.5, 20.0), st.floats(0.0, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_output_in_unit_interval(self, m, x):
        src = CorrelationMatrix(level="gain", entries=np.array([[1.0, x], [x, 1.0]]))
        val = envelope_correlation(src, m=m).entries[0, 1]
        assert -1e-12 <= val <= 1.0 + 1e-12


class TestNormalScoresCorrelation:
    def test_independent_ports(self):
        rng = np.random.default_rng(0)
        k = 40_000
        samples = rng.gamma(3.0, size=(k, 3))
        est = normal_scores_correlation(samples)
        assert est.level == "normal_scores"
        off = est.entries[~np.eye(3, dtype=bool)]
        assert np.max(np.abs(off)) < 3.0 / np.sqrt(k)

    def test_degenerate_column_rejected(self):
        samples = np.ones((500, 2))
        with pytest.raises(ValueError):
            normal_scores_correlation(samples)

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError):
            normal_scores_correlation(np.random.default_rng(1).random((50, 2)))

    def test_round_trip_through_copula_sampler(self):
        # sample the Gaussian copula at a known covariance, then recover it
        target = np.array(
            [[1.0, 0.55, 0.1], [0.55, 1.0, -0.3], [0.1, -0.3, 1.0]]
        )
        cov = CorrelationMatrix(level="normal_scores", entries=target)
        geom = FasGeometry(n_ports=3, aperture=1.0)
        params = NakagamiParams(m=3.0, mu=1.0)
        ens = generate_copula(geom, params, cov, seed=11, n_samples=1_000_000)
        est = normal_scores_correlation(ens.envelopes)
        assert np.max(np.abs(est.entries - target)) < 0.01

    def test_output_is_psd(self):
        rng = np.random.default_rng(5)
        base = rng.standard_normal((5000, 1))
        samples = np.hstack([base + 0.01 * rng.standard_normal((5000, 1))
                             for _ in range(4)])
        est = normal_scores_correlation(samples)
        assert np.linalg.eigvalsh(est.entries).min() >= 0.0


class TestEmpiricalPearson:
    def test_identical_scaled_columns(self):
        col = np.random.default_rng(2).gamma(2.0, size=(1000, 1))
        samples = np.hstack([col, 2.0 * col])
        est = empirical_pearson(samples)
        assert est.entries[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_independent_columns(self):
        rng = np.random.default_rng(3)
        k = 30_000
        samples = rng.gamma(3.0, size=(k, 2))
        for transform in ("envelope", "gain"):
            est = empirical_pearson(samples, transform=transform)
            assert abs(est.entries[0, 1]) < 3.0 / np.sqrt(k)

    def test_accepts_channel_ensemble(self):
        geom = FasGeometry(n_ports=2, aperture=0.5)
        params = NakagamiParams(m=2.0, mu=1.0)
        ens = generate_physical(
            GeneratorConfig(geom=geom, params=params, seed=4, n_samples=20_000)
        )
        direct = empirical_pearson(ens.envelopes)
        wrapped = empirical_pearson(ens)
        assert direct.entries == pytest.approx(wrapped.entries)

    def test_gain_transform_squares_first(self):
        rng = np.random.default_rng(9)
        samples = rng.gamma(3.0, size=(5000, 2))
        manual = np.corrcoef(samples.T ** 2)[0, 1]
        est = empirical_pearson(samples, transform="gain")
        assert est.entries[0, 1] == pytest.approx(manual, abs=1e-12)

    def test_unknown_transform(self):
        with pytest.raises(ValueError):
            empirical_pearson(np.random.default_rng(0).random((200, 2)),
                              transform="log")


class TestPhysicalEnsembleCorrelation:
    def test_envelope_matches_hypergeometric_map(self):
        # moderate-size version of the generator correlation-fidelity claim
        geom = FasGeometry(n_ports=4, aperture=1.0)
        params = NakagamiParams(m=3.0, mu=1.0)
        ens = generate_physical(
            GeneratorConfig(geom=geom, params=params, seed=21, n_samples=400_000)
        )
        predicted = envelope_correlation(gain_correlation(jakes_matrix(geom)), 3.0)
        measured = empirical_pearson(ens, transform="envelope")
        assert np.max(np.abs(measured.entries - predicted.entries)) < 0.01

    def test_gain_matches_squared_bessel(self):
        geom = FasGeometry(n_ports=4, aperture=1.0)
        params = NakagamiParams(m=2.0, mu=1.0)
        ens = generate_physical(
            GeneratorConfig(geom=geom, params=params, seed=22, n_samples=400_000)
        )
        predicted = gain_correlation(jakes_matrix(geom))
        measured = empirical_pearson(ens, transform="gain")
        assert np.max(np.abs(measured.entries - predicted.entries)) < 0.01


class TestMatrixCsv:
    def test_round_trip_layout(self, tmp_path):
        m = jakes_matrix(FasGeometry(n_ports=3, aperture=0.8))
        path = tmp_path / "matrix.csv"
        write_matrix_csv(m, path)
        lines = path.read_text().splitlines()
        meta = json.loads(lines[0].lstrip("# "))
        assert meta["level"] == "coefficient"
        assert lines[1].split(",") == ["port_1", "port_2", "port_3"]
        parsed = np.array([[float(v) for v in line.split(",")] for line in lines[2:]])
        assert parsed == pytest.approx(m.entries, abs=1e-8)
