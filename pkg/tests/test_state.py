"""Material model and stress housing."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mesobench.mesh import build_grid
from mesobench.state import CellState, MaterialModel, split_stress, total_stress, von_mises


def test_material_validation():
    MaterialModel("ok", 2.7, 72.0, 26.0, 0.25)
    for bad in [
        dict(rho0=0.0), dict(K=-1.0), dict(G=0.0), dict(sigma_y=0.0), dict(hardening=-1.0),
    ]:
        kwargs = dict(name="bad", rho0=2.7, K=72.0, G=26.0, sigma_y=0.25)
        kwargs.update(bad)
        with pytest.raises(ValueError):
            MaterialModel(**kwargs)


def test_derived_elastic_constants():
    m = MaterialModel("al", 2.7, 72.0, 26.0, 0.25)
    E = m.youngs_modulus
    nu = m.poisson_ratio
    assert E == pytest.approx(9 * 72.0 * 26.0 / (3 * 72.0 + 26.0))
    assert nu == pytest.approx((3 * 72.0 - 2 * 26.0) / (2 * (3 * 72.0 + 26.0)))
    assert m.longitudinal_speed == pytest.approx(np.sqrt((72.0 + 4 * 26.0 / 3) / 2.7))


def test_initial_cell_state():
    g = build_grid(3, 2, 1.5, 2.0)
    m = MaterialModel("al", 2.7, 72.0, 26.0, 0.25)
    c = CellState.initial(g, m)
    assert np.allclose(c.rho, 2.7)
    assert np.allclose(c.V, 0.5)
    assert np.allclose(c.cell_mass(), 2.7 * 0.5)
    assert np.all(c.eq_plastic == 0.0)


class TestStressHousing:
    def test_compose_then_split_binary_exact(self):
        # binary-representable values: composing and re-splitting must be
        # lossless bit for bit
        p = np.array([0.5, -0.25, 2.0])
        sxx = np.array([0.125, 0.5, -1.0])
        syy = np.array([-0.0625, 0.25, 0.75])
        sxy = np.array([0.25, 0.0, 0.5])
        szz = -(sxx + syy)
        cells = _cells_with(p, sxx, syy, sxy, szz)
        gxx, gyy, gxy, gzz = total_stress(cells)
        p2, (rxx, ryy, rxy, rzz) = split_stress(gxx, gyy, gxy, gzz)
        assert np.array_equal(p2, p)
        assert np.array_equal(rxx, sxx)
        assert np.array_equal(ryy, syy)
        assert np.array_equal(rxy, sxy)
        assert np.array_equal(rzz, szz)

    @settings(max_examples=50, deadline=None)
    @given(
        p=st.floats(-5, 5, allow_nan=False),
        a=st.floats(-2, 2, allow_nan=False),
        b=st.floats(-2, 2, allow_nan=False),
        c=st.floats(-2, 2, allow_nan=False),
    )
    def test_round_trip_general_floats(self, p, a, b, c):
        sxx = np.array([a])
        syy = np.array([b])
        szz = -(sxx + syy)
        cells = _cells_with(np.array([p]), sxx, syy, np.array([c]), szz)
        p2, (rxx, ryy, rxy, rzz) = split_stress(*total_stress(cells))
        scale = abs(p) + abs(a) + abs(b) + abs(c) + 1.0
        assert abs(p2[0] - p) <= 1e-14 * scale
        assert abs(rxx[0] - a) <= 1e-14 * scale
        assert abs(rzz[0] - szz[0]) <= 1e-14 * scale

    def test_deviator_trace_preserved(self):
        sxx, syy, sxy = np.array([1.0]), np.array([-0.25]), np.array([0.5])
        szz = -(sxx + syy)
        assert abs(sxx + syy + szz) <= 1e-10 * (abs(sxx) + abs(syy) + abs(szz))


def _cells_with(p, sxx, syy, sxy, szz):
    n = len(p)
    z = np.zeros(n)
    one = np.ones(n)
    return CellState(
        sxx=sxx, syy=syy, sxy=sxy, szz=szz, pressure=p, q=z.copy(),
        rho=one * 2.7, V=one.copy(), V0=one.copy(), h=one.copy(),
        ep_xx=z.copy(), ep_yy=z.copy(), ep_xy=z.copy(), ep_zz=z.copy(),
        eq_plastic=z.copy(),
    )


def test_von_mises_uniaxial():
    # deviator of uniaxial stress sigma: s = (2/3, -1/3, -1/3) sigma
    sigma = 0.9
    vm = von_mises(np.array([2 * sigma / 3]), np.array([-sigma / 3]),
                   np.array([-sigma / 3]), np.array([0.0]))
    assert vm[0] == pytest.approx(sigma)


def test_von_mises_pure_shear():
    tau = 0.4
    vm = von_mises(np.array([0.0]), np.array([0.0]), np.array([0.0]), np.array([tau]))
    assert vm[0] == pytest.approx(np.sqrt(3.0) * tau)
