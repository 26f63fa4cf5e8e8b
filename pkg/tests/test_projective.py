import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from scflow import projective as P
from scflow.sc_check import real_gradient, symplecticity_check
from scflow.scales import BandVector, level_norm, omega
from conftest import rand_vec

d = BandVector.delta
NU = P.schrodinger.NU
R2 = math.sqrt(2)


def probe(rng, band, *slots):
    g = rand_vec(rng, band)
    x = g * (0.5 / level_norm(g, NU, 0))
    for a in slots:
        x = x + d(a, band)
    return P.ray_of(x)


class TestRays:
    def test_ray_of_examples(self):
        assert np.array_equal(P.ray_of(2 * d(0)).rep.coeffs, d(0).coeffs)
        r = P.ray_of(d(0) + d(1)).rep
        assert r[0] == pytest.approx(1 / R2) and r[1] == pytest.approx(1 / R2)
        assert P.ray_of(1j * d(3)).rep[3] == 1j

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            P.ray_of(BandVector.zeros(2))
        with pytest.raises(ValueError):
            P.RayPoint(2 * d(0))

    def test_phase_invariance(self, rng):
        x = rand_vec(rng, 4)
        assert P.ray_distance(P.ray_of(x), P.ray_of(np.exp(0.7j) * 3 * x)) <= 1e-15

    def test_phase_fixed(self, rng):
        p = P.phase_fixed(P.ray_of(rand_vec(rng, 3)), 1)
        assert p.rep[1].imag == 0 and p.rep[1].real > 0 and p.anchor == 1


class TestAffine:
    def test_examples(self):
        assert level_norm(P.affine_chart(0, P.ray_of(d(0))), NU, 0) == 0
        u = P.affine_chart(0, P.ray_of(d(0) + 2 * d(1)))
        assert u[0] == pytest.approx(2.0, rel=1e-15)

    def test_outside_domain(self):
        with pytest.raises(P.ChartDomainError):
            P.affine_chart(0, P.ray_of(d(1)))

    def test_roundtrip(self, rng):
        for a in (-2, 0, 3):
            p = probe(rng, 4, a)
            u = P.affine_chart(a, p, band=4)
            assert P.ray_distance(P.affine_chart_inverse(a, u), p) <= 1e-12


class TestDarboux:
    def test_examples(self):
        assert level_norm(P.darboux_chart(0, P.ray_of(d(0))), NU, 0) == 0
        u = P.darboux_chart(0, P.ray_of((d(0) + d(1)) / R2))
        assert u[0] == pytest.approx(1 / R2, rel=1e-15)
        assert level_norm(u, NU, 0) ** 2 == pytest.approx(0.5, rel=1e-15)

    def test_slot_bookkeeping(self):
        assert P.chart_slots(0, 2).tolist() == [-2, -1, 1, 2, 3]
        assert P.chart_slots(-2, 2).tolist() == [-1, 0, 1, 2, 3]

    @given(st.integers(0, 2 ** 31), st.integers(-3, 3))
    def test_roundtrip_and_ball(self, seed, a):
        rng = np.random.default_rng(seed)
        p = probe(rng, 4, a)
        u = P.darboux_chart(a, p, band=4)
        r = level_norm(u, NU, 0)
        assert r < 1
        assert abs(r ** 2 + abs(p.rep[a]) ** 2 - 1) <= 1e-12
        q = P.darboux_chart_inverse(a, u)
        assert P.ray_distance(p, q) <= 1e-12
        assert level_norm(P.darboux_chart(a, q, band=4) - u, NU, 0) <= 1e-12

    def test_inverse_rejects_outside_ball(self):
        with pytest.raises(P.ChartDomainError):
            P.darboux_chart_inverse(0, 1.5 * d(0))


class TestTransitions:
    def test_same_chart_is_identity(self, rng):
        u = P.darboux_chart(1, probe(rng, 3, 1), band=3)
        assert level_norm(P.transition(1, 1, u) - u, NU, 0) <= 1e-15

    def test_zero_to_one_closed_form(self):
        # mass on slot 0 : chart-0 coordinate u_0 (original index 1)
        c = 0.6 * np.exp(0.4j)
        u = BandVector.delta(0, 1, c)
        v = P.transition(0, 1, u)
        x = np.zeros(5, complex)
        x[2], x[3] = math.sqrt(1 - abs(c) ** 2), c
        expected = P.darboux_chart(1, P.RayPoint(BandVector(x)), band=1)
        assert level_norm(v - expected, NU, 0) <= 1e-15
        assert level_norm(P.transition(1, 0, v) - u, NU, 0) <= 1e-15
        # in chart 1 the ray's slot-1 coordinate is real: |c|, the rest picks up the phase
        assert v[0] == pytest.approx(math.sqrt(1 - abs(c) ** 2) * abs(c) / c, rel=1e-14)

    def test_band_preserved(self, rng):
        u = P.darboux_chart(-1, probe(rng, 5, -1, 2), band=5)
        assert P.transition(-1, 2, u).band == 5

    @pytest.mark.parametrize("a,b", [(-2, 2), (0, 1), (1, -1)])
    def test_symplectic(self, rng, a, b):
        u = P.darboux_chart(a, probe(rng, 6, a, b), band=6)
        assert symplecticity_check(lambda v: P.transition(a, b, v), u, 6, 1e-5) <= 1e-5

    def test_affine_transition_is_not_symplectic(self, rng):
        a, b = P.ChartId(0, "affine"), P.ChartId(1, "affine")
        u = P.affine_chart(0, probe(rng, 3, 0, 1), band=3)
        assert symplecticity_check(lambda v: P.transition(a, b, v), u, 3, 1e-5) > 1e-3


class TestReduced:
    def test_momentum_examples(self):
        assert P.momentum_map(BandVector.zeros(1)) == 0.5
        assert P.momentum_map(d(0)) == 0
        assert P.momentum_map(2 * d(0)) == -1.5

    def test_reduced_flow_examples(self, rng):
        p = P.ray_of(rand_vec(rng, 3))
        assert P.ray_distance(P.reduced_flow(0, p), p) <= 1e-15
        q = P.ray_of(d(1))
        assert P.ray_distance(P.reduced_flow(2.2, q), q) <= 1e-15
        r = P.reduced_flow(math.pi, P.ray_of(d(0) + d(1)))
        assert P.ray_distance(r, P.ray_of(d(0) - d(1))) <= 1e-15

    def test_equivariance(self, rng):
        x = rand_vec(rng, 6)
        for t in (0.1, 1, 10, 100):
            a = P.reduced_flow(t, P.ray_of((2 - 3j) * x))
            assert P.ray_distance(a, P.reduced_flow(t, P.ray_of(x))) <= 1e-12

    def test_field_examples(self):
        assert level_norm(P.reduced_field_chart(2, BandVector.zeros(3)), NU, 0) == 0
        u = d(0, 2)
        assert level_norm(P.reduced_field_chart(0, u) + 1j * u, NU, 0) == 0

    def test_hamiltonian_examples(self):
        assert P.reduced_hamiltonian(P.ray_of(d(1))) == 0.5
        assert P.reduced_hamiltonian(P.ray_of(2 * d(1))) == 0.5
        assert P.reduced_hamiltonian(P.ray_of(d(0))) == 0
        assert level_norm(P.reduced_dh_chart(1, BandVector.zeros(2)).rep, NU, 0) == 0

    @pytest.mark.parametrize("a", [-2, 0, 2])
    def test_chart_flow_closed_form(self, rng, a):
        u = P.darboux_chart(a, probe(rng, 6, a), band=6)
        for t in (0.1, 1.0, 10.0):
            assert level_norm(P.chart_flow(a, t, u) - P.chart_phase_map(a, t, u), NU, 0) <= 1e-12

    @pytest.mark.parametrize("a", [-1, 0, 1])
    def test_chart_field_fd(self, rng, a):
        u = P.darboux_chart(a, probe(rng, 6, a), band=6)
        e = 1e-6
        fd = (P.chart_flow(a, e, u) - P.chart_flow(a, -e, u)) / (2 * e)
        assert level_norm(fd - P.reduced_field_chart(a, u), NU, 0) <= 1e-6

    @pytest.mark.parametrize("a", [-1, 0, 2])
    def test_reduced_gradient(self, rng, a):
        u = P.darboux_chart(a, probe(rng, 5, a), band=5)
        g = real_gradient(lambda v: P.reduced_hamiltonian_chart(a, v), u, 5)
        assert np.max(np.abs(g - P.reduced_dh_chart(a, u).rep.to_real())) <= 1e-6
        xi = rand_vec(rng, 5)
        lhs = -P.reduced_dh_chart(a, u).action(xi)
        assert lhs == pytest.approx(omega(xi, P.reduced_field_chart(a, u)), abs=1e-12)

    def test_energy_conserved_on_rays(self, rng):
        p = P.ray_of(rand_vec(rng, 8))
        for t in (0.1, 1, 10, 100):
            assert abs(P.reduced_hamiltonian(P.reduced_flow(t, p)) - P.reduced_hamiltonian(p)) <= 1e-10

    def test_momentum_level_is_unit_sphere(self, rng):
        x = rand_vec(rng, 4)
        x = x / level_norm(x, NU, 0)
        assert abs(P.momentum_map(x)) <= 1e-15


class TestChartSwitching:
    def test_best_chart_ties(self):
        assert P.best_chart(P.ray_of(d(-1) + d(1))) == -1
        assert P.best_chart(P.ray_of(d(-2) + d(1) + d(2))) == 1

    def test_trajectory_reanchors(self):
        # two modes with equal weight: the ray stays put in |x_n| so no switch
        p = P.ray_of(d(0) + 0.5 * d(3))
        steps = list(P.chart_trajectory(p, [0.0, 1.0, 2.0], threshold=0.1))
        assert [a for _, a, _, _ in steps] == [0, 0, 0]
        steps = list(P.chart_trajectory(p, [0.0], threshold=0.95))
        assert steps[0][1] == 0

    def test_switch_below_threshold(self):
        p = P.ray_of(0.3 * d(0) + d(2))
        # first anchor is argmax (2), and a threshold above |x_2| forces re-anchoring each step
        out = list(P.chart_trajectory(p, [0.0, 0.5], threshold=0.99))
        assert all(a == 2 for _, a, _, _ in out)

    def test_csv_constant_ray(self):
        text = P.ray_trajectory_csv(P.ray_of(d(1)), [0.0, 1.0, 2.0])
        rows = text.strip().splitlines()
        assert rows[0].startswith("t,chart,re_-1,im_-1")
        assert len({r.split(",", 1)[1] for r in rows[1:]}) == 1
