import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from scflow import schrodinger as S
from scflow.scales import BandVector, level_norm, omega
from conftest import rand_vec
from strategies import band_vectors

d = BandVector.delta
NU = S.NU


def test_hamiltonian_examples():
    assert S.hamiltonian(BandVector.zeros(4)) == 0
    assert S.hamiltonian(d(1)) == 0.5
    assert S.hamiltonian(3 * d(2)) == 18


def test_dh_examples():
    assert level_norm(S.dh(BandVector.zeros(3)).rep, NU, 0) == 0
    assert S.dh(d(1)).action(d(1)) == 1
    assert np.array_equal(S.dh(d(2)).rep.coeffs, (4 * d(2)).coeffs)


def test_vector_field_examples():
    assert level_norm(S.vector_field(BandVector.zeros(2)), NU, 0) == 0
    assert S.vector_field(d(1))[1] == -1j
    for xi, expected in ((d(1), -1.0), (1j * d(1), 0.0)):
        assert -S.dh(d(1)).action(xi) == expected
        assert omega(xi, -1j * d(1)) == expected


def test_flow_examples():
    x = d(0) + (1 - 2j) * d(3)
    assert np.array_equal(S.flow(0, x).coeffs, x.coeffs)
    assert level_norm(S.flow(math.pi, d(1)) + d(1), NU, 0) <= 1e-15
    assert S.flow(12.3, d(0))[0] == 1


@given(band_vectors(), band_vectors())
def test_omega_gradient(u, xi):
    lhs = -S.dh(u).action(xi)
    rhs = omega(xi, S.vector_field(u))
    assert abs(lhs - rhs) <= 1e-12 * (1 + level_norm(u, NU, 2) * level_norm(xi, NU, 0))


@given(band_vectors(), st.sampled_from([0.1, 1.0, 10.0, 100.0]))
def test_conservation(u, t):
    v = S.flow(t, u)
    h = S.hamiltonian(u)
    assert abs(S.hamiltonian(v) - h) <= 1e-10 * (1 + h)
    for s in range(-2, 4):
        assert level_norm(v, NU, s) == pytest.approx(level_norm(u, NU, s), rel=1e-12, abs=1e-300)


def test_flow_residual_delta1():
    for t in (0.0, 0.7):
        for delta in (1e-1, 1e-2, 1e-3):
            # exact: |sin(delta)/delta - 1|
            assert S.flow_residual(t, delta, d(1)) == pytest.approx(abs(math.sin(delta) / delta - 1), rel=1e-6, abs=1e-13)


def test_flow_residual_zero_and_slope():
    assert S.flow_residual(0.3, 1e-2, BandVector.zeros(3)) == 0
    tab = S.flow_residual_table(0.3, d(1) + d(2), [1e-1, 1e-2, 1e-3, 1e-4])
    assert tab.slope == pytest.approx(2.0, abs=0.1)
    with pytest.raises(ValueError):
        S.flow_residual(0.3, 0.0, d(1))


def test_flow_tangent_examples(rng):
    assert level_norm(S.flow_tangent(1.0, rand_vec(rng, 3), 0.0, BandVector.zeros(3)), NU, 0) == 0
    v = S.flow_tangent(0.0, d(1), 1.0, BandVector.zeros(1))
    assert level_norm(v + 1j * d(1), NU, 0) == 0


def test_flow_tangent_against_joint_fd(rng):
    u, xi = rand_vec(rng, 4), rand_vec(rng, 4)
    t, h, e = 0.8, 0.6, 1e-6
    fd = (S.flow(t + e * h, u + e * xi) - S.flow(t - e * h, u - e * xi)) / (2 * e)
    ex = S.flow_tangent(t, u, h, xi)
    assert level_norm(fd - ex, NU, 0) <= 1e-6 * level_norm(ex, NU, 0)


def test_system_bundle():
    sys_ = S.SchrodingerSystem()
    assert sys_.hamiltonian(d(1)) == 0.5 and sys_.nu == NU


def test_trajectory_csv():
    text = S.trajectory_csv(d(1, 1), [0.0, math.pi])
    rows = [r.split(",") for r in text.strip().splitlines()]
    assert rows[0] == ["t", "re_-1", "im_-1", "re_0", "im_0", "re_1", "im_1", "energy"]
    assert float(rows[1][5]) == 1 and float(rows[2][5]) == -1
    assert S.trajectory_csv(d(1), []).count("\n") == 1
