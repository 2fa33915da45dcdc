import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pinlab.errors import ValidationError
from pinlab.precipitates import (
    PrecipitateConfig,
    build_field,
    empty_potential,
    eval_phi,
    grid_coords,
    plane_hit_statistics,
    ramp_profile,
    sample_config,
    slice_glide_plane,
    torus_dist,
    with_strength_bounds,
)


def make_field(seed=7, R=0.1, lam=1.0, beta=0.5, count=1, y_window=10.0,
               phi_lower=1.0, phi_upper=1.0, epsilon=None):
    cfg = sample_config(seed, R, lam, beta, count, y_window)
    cfg = with_strength_bounds(cfg, phi_lower, phi_upper)
    return build_field(cfg, epsilon=epsilon)


class TestSampling:
    def test_single_center_in_window(self):
        cfg = sample_config(seed=7, R=0.1, lam=1.0, beta=0.5, count=1, y_window=10.0)
        (x1, x2, y) = cfg.centers[0]
        assert -1.0 <= x1 <= 1.0 and -1.0 <= x2 <= 1.0
        assert 0.2 <= y <= 10.0

    def test_min_spacing(self):
        cfg = sample_config(seed=7, R=0.1, lam=1.0, beta=0.5, count=5, y_window=10.0)
        ys = np.sort(cfg.centers[:, 2])
        # spacing rule: 2 * R^(1-beta) = 2 * 0.1^0.5
        assert np.diff(ys).min() >= 2.0 * 0.1 ** 0.5 - 1e-12
        assert np.all(ys == cfg.centers[:, 2])  # sorted as returned

    def test_deterministic(self):
        a = sample_config(3, 0.05, 0.5, 0.3, 4, 5.0)
        b = sample_config(3, 0.05, 0.5, 0.3, 4, 5.0)
        assert np.array_equal(a.centers, b.centers)

    def test_distribution_x1_kolmogorov_smirnov(self):
        n = 10_000
        xs = np.concatenate([
            sample_config(s, 0.1, 1.0, 0.5, 10, 50.0).centers[:, 0]
            for s in range(n // 10)])
        xs.sort()
        ecdf = np.arange(1, n + 1) / n
        cdf = (xs + 1.0) / 2.0
        ks = np.max(np.abs(ecdf - cdf))
        assert ks < 1.63 / np.sqrt(n)  # 99% K-S band for Unif([-1, 1])

    @pytest.mark.parametrize("kwargs,field", [
        (dict(R=0.7), "R"),
        (dict(lam=1.5), "lambda"),
        (dict(beta=1.5), "beta"),
        (dict(count=0), "count"),
        (dict(y_window=0.1), "y_window"),
        (dict(count=50, y_window=1.0), "y_window"),
    ])
    def test_rejects_bad_parameters(self, kwargs, field):
        base = dict(seed=1, R=0.1, lam=1.0, beta=0.5, count=1, y_window=10.0)
        base.update(kwargs)
        with pytest.raises(ValidationError, match=field):
            sample_config(**base)

    def test_config_invariant_checks(self):
        with pytest.raises(ValidationError, match="x1, x2"):
            PrecipitateConfig(R=0.1, lam=1.0, beta=0.5, phi_lower=1.0, phi_upper=1.0,
                              centers=np.array([[1.5, 0.0, 0.5]]), y_window=5.0, seed=0)
        with pytest.raises(ValidationError, match="spacing"):
            PrecipitateConfig(R=0.1, lam=1.0, beta=0.5, phi_lower=1.0, phi_upper=1.0,
                              centers=np.array([[0.0, 0.0, 0.5], [0.0, 0.0, 0.55]]),
                              y_window=5.0, seed=0)


class TestEvalPhi:
    def test_plateau_value_at_center(self):
        field = make_field(phi_lower=0.5, phi_upper=2.0)
        assert eval_phi(field, field.config.centers[0]) == pytest.approx(2.0)

    def test_zero_outside_support(self):
        field = make_field(count=3, y_window=20.0)
        c = field.config.centers
        pts = np.column_stack([c[:, 0], c[:, 1], c[:, 2] + field.config.R * 1.001])
        assert np.all(eval_phi(field, pts) == 0.0)

    def test_ramp_midline_matches_axis_polynomial(self):
        field = make_field(lam=0.5, epsilon=0.25)
        c = field.config.centers[0]
        d = field.plateau + field.ramp / 2.0
        got = eval_phi(field, [c[0], c[1], c[2] + d])
        s = 0.5  # midline of the cubic ramp
        expected = field.strengths[0] * (s * s * (3 - 2 * s))
        assert got == pytest.approx(expected, rel=1e-12)
        assert 0.0 < got < field.strengths[0]

    def test_bounds_and_inner_plateau(self):
        field = make_field(seed=11, R=0.08, lam=0.6, count=4, y_window=15.0,
                           phi_lower=0.5, phi_upper=2.0)
        rng = np.random.default_rng(0)
        pts = np.column_stack([rng.uniform(-1, 1, 4000), rng.uniform(-1, 1, 4000),
                               rng.uniform(0, 15, 4000)])
        vals = eval_phi(field, pts)
        assert np.all(vals >= 0.0) and np.all(vals <= 2.0 + 1e-12)
        # on every inner plateau cube the potential delivers >= phi_lower
        for center, s in zip(field.config.centers, field.strengths):
            offs = rng.uniform(-field.plateau, field.plateau, size=(50, 3))
            inner = eval_phi(field, center + offs)
            assert np.all(inner >= field.config.phi_lower - 1e-12)
            assert np.allclose(inner, s)

    def test_lipschitz_constant(self):
        field = make_field(seed=5, R=0.1, lam=0.5, count=2, y_window=10.0,
                           phi_lower=1.0, phi_upper=1.0)
        L = field.lipschitz_bound
        assert L == pytest.approx(1.5 * 1.0 / field.ramp)
        rng = np.random.default_rng(42)
        c = field.config.centers[0]
        p = c + rng.uniform(-2 * field.support, 2 * field.support, size=(5000, 3))
        q = p + rng.uniform(-field.ramp, field.ramp, size=(5000, 3))
        dv = np.abs(eval_phi(field, p) - eval_phi(field, q))
        dist = np.linalg.norm(p - q, axis=1)
        assert np.all(dv <= L * dist * (1 + 1e-9))

    def test_no_overlap_between_bumps(self):
        field = make_field(seed=2, R=0.1, count=3, y_window=10.0)
        c = field.config.centers
        # max of sums equals max of individual peaks: supports are disjoint in y
        assert eval_phi(field, c).max() == pytest.approx(field.strengths.max())


class TestGlideSlice:
    def test_empty_when_plane_misses(self):
        field = make_field(seed=9, R=0.05, count=2, y_window=10.0)
        x2s = field.config.centers[:, 1]
        varpi = None
        for cand in np.linspace(-1, 1, 400):
            if np.all(torus_dist(x2s, cand) > 2 * 0.05):
                varpi = cand
                break
        s = slice_glide_plane(field, varpi)
        assert s.count == 0
        assert s.eval(0.3, 5.0) == 0.0

    def test_central_cut_full_widths(self):
        field = make_field(seed=4, R=0.1, lam=1.0)
        varpi = field.config.centers[0, 1]
        s = slice_glide_plane(field, varpi)
        assert s.count == 1
        assert s.amplitude[0] == pytest.approx(field.strengths[0])
        assert s.inner_half_width == pytest.approx(0.75 * 0.1)
        assert s.outer_half_width == pytest.approx(0.1)  # support reaches R at lam = 1

    def test_membership_rule(self):
        field = make_field(seed=4, R=0.1, lam=1.0)
        x2 = field.config.centers[0, 1]
        inside = slice_glide_plane(field, (x2 + 0.099 + 1.0) % 2.0 - 1.0)
        outside = slice_glide_plane(field, (x2 + 0.101 + 1.0) % 2.0 - 1.0)
        assert inside.count == 1 and outside.count == 0

    def test_slice_matches_field_exactly(self):
        field = make_field(seed=13, R=0.1, lam=0.7, count=3, y_window=12.0,
                           phi_lower=0.5, phi_upper=2.0)
        rng = np.random.default_rng(7)
        for varpi in rng.uniform(-1, 1, 12):
            s = slice_glide_plane(field, varpi)
            x1 = rng.uniform(-1, 1, 300)
            y = rng.uniform(0, 12, 300)
            pts = np.column_stack([x1, np.full_like(x1, varpi), y])
            assert np.array_equal(s.eval(x1, y), eval_phi(field, pts))

    def test_hit_fraction_monte_carlo(self):
        # single obstacle: chance a random plane cuts the support is `support`
        field = make_field(seed=21, R=0.1, lam=1.0)
        rng = np.random.default_rng(3)
        n = 10_000
        hits = sum(slice_glide_plane(field, v).count > 0 for v in rng.uniform(-1, 1, n))
        p = field.support / 2.0 * 2.0  # hit interval 2*support over circumference 2
        sigma = np.sqrt(p * (1 - p) / n)
        assert abs(hits / n - p) < 3 * sigma


class TestPlaneHitStatistics:
    def test_no_precipitates(self):
        rep = plane_hit_statistics(0.1, 1.0, 0, 100, seed=0)
        assert rep.fraction == 0.0

    def test_single_matches_geometric_oracle(self):
        rep = plane_hit_statistics(0.1, 1.0, 1, 10_000, seed=1)
        sigma = np.sqrt(0.1 * 0.9 / 10_000)
        assert abs(rep.fraction - rep.p_single) < 3 * sigma
        assert rep.p_single == pytest.approx(0.1)

    def test_many_precipitates_almost_sure(self):
        rep = plane_hit_statistics(0.1, 1.0, 200, 10_000, seed=2)
        assert rep.fraction >= 0.999
        assert rep.p_any > 1 - 1e-8


class TestGriddedPotential:
    def test_matches_pointwise_eval(self):
        field = make_field(seed=6, R=0.1, lam=0.8, count=2, y_window=10.0)
        N = 64
        pot = field.on_grid(N)
        x = grid_coords(N)
        u = np.full((N, N), field.config.centers[0, 2])
        grid_vals = pot.at_heights(u)
        xx, yy = np.meshgrid(x, x, indexing="ij")
        pts = np.stack([xx, yy, u], axis=-1)
        assert np.allclose(grid_vals, eval_phi(field, pts), atol=1e-14)

    def test_crossed_and_faces(self):
        field = make_field(seed=6, R=0.1, count=2, y_window=10.0)
        pot = field.on_grid(32)
        u = np.zeros((32,) * 2)
        assert not pot.crossed(u).any()
        assert pot.lowest_face_above(0.0) == pytest.approx(
            field.config.centers[0, 2] - field.support)
        u_high = np.full((32, 32), field.config.centers[:, 2].max() + 0.2)
        assert pot.crossed(u_high).all()

    def test_empty_potential(self):
        pot = empty_potential(16, 1)
        assert pot.at_heights(np.ones(16)).max() == 0.0
        assert pot.lowest_face_above(0.0) == np.inf


@given(d=st.floats(0, 0.5), plateau=st.floats(0.01, 0.2), ramp=st.floats(0.01, 0.2))
@settings(max_examples=200, deadline=None)
def test_ramp_profile_shape(d, plateau, ramp):
    v = ramp_profile(d, plateau, ramp)
    assert 0.0 <= v <= 1.0
    if d <= plateau:
        assert v == 1.0
    if d >= plateau + ramp:
        assert v == 0.0


@given(a=st.floats(-1, 1), b=st.floats(-1, 1))
@settings(max_examples=200, deadline=None)
def test_torus_dist_range_and_symmetry(a, b):
    d = torus_dist(a, b)
    assert 0.0 <= d <= 1.0
    assert d == pytest.approx(torus_dist(b, a))
