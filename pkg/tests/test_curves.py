"""Curve-flow tests: curvature, moments, evolution invariants, and the
self-similarity residual.

The flat-circle and ellipse values are closed-form; the moment formulas
were checked against the parallel-axis identities.
"""

import numpy as np
import pytest

from clawkit.curves import (CurveState, CurveStabilityError,
                            DegenerateTangentError, SelfIntersectionError,
                            curve_from_polar, curve_from_samples,
                            curvature_profile, evolve, fit_self_similar,
                            mkdv_residual, moments, resample_uniform_arclength,
                            self_intersects, self_similar_residual)


def circle(N, R=1.0, center=0.0):
    th = 2 * np.pi * np.arange(N) / N
    return curve_from_samples(center.real if hasattr(center, "real") else 0.0
                              + R * np.cos(th), R * np.sin(th))


def make_circle(N, R=1.0, cx=0.0, cy=0.0):
    th = 2 * np.pi * np.arange(N) / N
    return curve_from_samples(cx + R * np.cos(th), cy + R * np.sin(th))


class TestCurvature:
    def test_circle(self):
        c = make_circle(256, R=2.0)
        k, k1 = curvature_profile(c)
        assert np.max(np.abs(k - 0.5)) < 1e-8
        assert np.max(np.abs(k1)) < 1e-8

    def test_ellipse_closed_form(self):
        N = 512
        th = 2 * np.pi * np.arange(N) / N
        e = curve_from_samples(2 * np.cos(th), np.sin(th))
        k, _ = curvature_profile(e)
        # k = a b / (a^2 sin^2 + b^2 cos^2)^(3/2) with (a, b) = (2, 1)
        exact = 2.0 / (4 * np.sin(th) ** 2 + np.cos(th) ** 2) ** 1.5
        assert np.max(np.abs(k - exact)) < 1e-6
        assert abs(k[0] - 2.0) < 1e-6  # the point (2, 0)

    def test_orientation_flip(self):
        # Traversal-signed convention: at the same geometric point the
        # reversed curve has k -> -k, while k1 = dk/ds picks up two sign
        # flips (k and the arclength direction) and is pointwise invariant.
        N = 256
        th = 2 * np.pi * np.arange(N) / N
        r = 1 + 0.1 * np.cos(3 * th) + 0.05 * np.sin(2 * th)
        fwd = curve_from_samples(r * np.cos(th), r * np.sin(th))
        rev = curve_from_samples(r[::-1] * np.cos(th[::-1]),
                                 r[::-1] * np.sin(th[::-1]))
        k_f, k1_f = curvature_profile(fwd)
        k_r, k1_r = curvature_profile(rev)
        # rev sample j sits at fwd sample N-1-j
        assert np.max(np.abs(k_r + k_f[::-1])) < 1e-7
        assert np.max(np.abs(k1_r - k1_f[::-1])) < 1e-6

    def test_degenerate_tangent(self):
        z = np.ones(64, dtype=complex)  # all samples identical
        with pytest.raises((DegenerateTangentError, Exception)):
            curvature_profile(CurveState(z))


class TestMoments:
    def test_unit_circle(self):
        mo = moments(make_circle(256))
        assert abs(mo.length - 2 * np.pi) < 1e-10
        assert abs(mo.area - np.pi) < 1e-10
        assert abs(mo.moment_x) < 1e-12 and abs(mo.moment_y) < 1e-12
        assert abs(mo.moment_r2 - np.pi / 2) < 1e-10
        assert not mo.degenerate

    def test_parallel_axis(self):
        mo = moments(make_circle(256, cx=1.0))
        assert abs(mo.moment_x - np.pi) < 1e-10
        assert abs(mo.moment_r2 - 3 * np.pi / 2) < 1e-10

    def test_degenerate_flagged(self):
        th = 2 * np.pi * np.arange(64) / 64
        flat = curve_from_samples(np.cos(th), 1e-9 * np.sin(th),
                                  require_simple=False)
        assert moments(flat).degenerate


class TestSelfIntersection:
    def test_figure_eight_rejected(self):
        th = 2 * np.pi * np.arange(128) / 128
        with pytest.raises(SelfIntersectionError):
            curve_from_samples(np.sin(2 * th), np.sin(th))

    def test_simple_accepted(self):
        c = curve_from_polar(lambda th: 1 + 0.1 * np.cos(3 * th), 128)
        assert not self_intersects(c)


class TestResample:
    def test_uniform_after_resample(self):
        c = curve_from_polar(lambda th: 1 + 0.2 * np.cos(2 * th), 256)
        r = resample_uniform_arclength(c)
        from clawkit.curves import metric
        g = metric(r)
        assert np.max(np.abs(g - g.mean())) / g.mean() < 1e-8
        # sample 0 anchored
        assert abs(r.z[0] - c.z[0]) < 1e-10
        # same geometry: moments unchanged
        m0, m1 = moments(c), moments(r)
        assert abs(m0.area - m1.area) < 1e-10
        assert abs(m0.length - m1.length) < 1e-10


class TestEvolve:
    def test_circle_stationary(self):
        c = make_circle(512)
        traj = evolve(c, T=1.0, filter_modes=16)
        disp = np.max(np.abs(traj.states[-1].z - traj.states[0].z))
        assert disp < 1e-10

    def test_stability_guard(self):
        c = make_circle(256)
        with pytest.raises(CurveStabilityError):
            evolve(c, T=0.1, dt=1.0)

    def test_perturbed_circle_invariants_short(self):
        c = curve_from_polar(lambda th: 1 + 0.1 * np.cos(3 * th), 256)
        traj = evolve(c, T=0.05, filter_modes=30)
        base = np.array(moments(traj.states[0]).as_tuple())
        for s in traj.states[1:]:
            now = np.array(moments(s).as_tuple())
            rel = np.abs(now - base) / np.maximum(np.abs(base), 1e-8)
            assert np.all(rel < 1e-4)
        assert not traj.flagged

    def test_rigid_motion_equivariance(self):
        c = curve_from_polar(lambda th: 1 + 0.1 * np.cos(3 * th), 256)
        alpha, shift = 0.7, 0.3 + 0.2j
        moved = CurveState(c.z * np.exp(1j * alpha) + shift)
        t1 = evolve(c, T=0.1, dt=2e-5, filter_modes=30)
        t2 = evolve(moved, T=0.1, dt=2e-5, filter_modes=30)
        err = np.max(np.abs(t2.states[-1].z
                            - (t1.states[-1].z * np.exp(1j * alpha) + shift)))
        assert err < 1e-8

    def test_redistribution_geometrically_inert(self):
        c = curve_from_polar(lambda th: 1 + 0.1 * np.cos(3 * th), 256)
        with_r = evolve(c, T=0.05, dt=2e-5, filter_modes=30, redistribute=True)
        without = evolve(c, T=0.05, dt=2e-5, filter_modes=30, redistribute=False)
        m1 = np.array(moments(with_r.states[-1]).as_tuple())
        m2 = np.array(moments(without.states[-1]).as_tuple())
        assert np.max(np.abs(m1 - m2)) < 1e-6

    def test_mkdv_residual_decays_under_refinement(self):
        residuals = []
        for N, dt in ((128, 2e-5), (256, 1e-5), (512, 5e-6)):
            c = curve_from_polar(lambda th: 1 + 0.1 * np.cos(3 * th), N)
            traj = evolve(c, T=0.02, dt=dt, record_every=25)
            residuals.append(mkdv_residual(traj))
        assert residuals[1] < residuals[0]
        assert residuals[2] < residuals[1]
        assert residuals[2] < 0.5 * residuals[0]


class TestSelfSimilar:
    def test_circle_exact(self):
        c = make_circle(256, R=2.0)
        assert self_similar_residual(c, a0=-1.0 / (4 * 16)) < 1e-8

    def test_circle_wrong_a0(self):
        c = make_circle(256, R=2.0)
        assert abs(self_similar_residual(c, a0=0.0) - 1.0 / 64) < 1e-10

    def test_circle_fit(self):
        c = make_circle(256, R=2.0)
        a0, a1, a2, residual = fit_self_similar(c)
        assert residual < 1e-8

    def test_ellipse_not_self_similar(self):
        for N in (256, 512, 1024):
            th = 2 * np.pi * np.arange(N) / N
            e = curve_from_samples(2 * np.cos(th), np.sin(th))
            _, _, _, residual = fit_self_similar(e)
            assert residual > 1e-2
