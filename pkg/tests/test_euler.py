import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpetpf.errors import CflViolation, InvalidInput, NonPhysicalState
from fpetpf.euler import (
    FlowState,
    GasConstants,
    Grid,
    advance,
    check_physical,
    entropy,
    pressure,
    rhs,
    stable_dt,
    step,
    total_conserved,
)
from oracles import exact_sod_density

GAS = GasConstants()


def line_state(rho, m, E, n=8):
    grid = Grid.uniform_1d(n)
    q = np.stack([np.full(n, rho), np.full(n, m), np.full(n, E)])
    return FlowState(grid, q)


def sod(n, x0=0.5):
    grid = Grid.uniform_1d(n)
    x = grid.axes[0]
    return FlowState.from_primitive(grid, np.where(x <= x0, 1.0, 0.125), 0.0, np.where(x <= x0, 1.0, 0.1), GAS)


class TestConstants:
    def test_gamma_must_exceed_one(self):
        with pytest.raises(InvalidInput):
            GasConstants(1.0)

    def test_grid_needs_seven_nodes(self):
        with pytest.raises(InvalidInput):
            Grid.uniform_1d(6)

    def test_spacing(self):
        assert Grid.uniform_1d(11).spacing == pytest.approx((0.1,))
        assert Grid.uniform_2d(21, 11, upper=(2.0, 2.0)).spacing == pytest.approx((0.1, 0.2))

    def test_state_shape_checked(self):
        with pytest.raises(InvalidInput):
            FlowState(Grid.uniform_1d(8), np.ones((3, 9)))


class TestPressureEntropy:
    def test_pressure_at_rest(self):
        assert np.all(pressure(line_state(1.0, 0.0, 2.5), GAS) == pytest.approx(1.0))

    def test_pressure_sod_right_state(self):
        assert np.allclose(pressure(line_state(0.125, 0.0, 0.25), GAS), 0.1)

    def test_pressure_with_kinetic_term(self):
        assert np.allclose(pressure(line_state(1.0, 1.0, 3.0), GAS), 1.0)

    def test_negative_pressure_names_node(self):
        s = line_state(1.0, 0.0, 2.5)
        s.q[2, 5] = -1.0
        with pytest.raises(NonPhysicalState) as info:
            pressure(s, GAS)
        assert info.value.index == (5,)
        assert info.value.quantity == "pressure"

    def test_zero_density_rejected(self):
        s = line_state(1.0, 0.0, 2.5)
        s.q[0, 3] = 0.0
        with pytest.raises(NonPhysicalState) as info:
            check_physical(s.q, 1.4)
        assert info.value.quantity == "density"

    def test_entropy_values(self):
        assert np.allclose(entropy(line_state(1.0, 0.0, 2.5), GAS), 0.0)
        s = line_state(0.125, 0.0, 0.25)
        assert np.allclose(entropy(s, GAS), np.log(0.1 / 0.125 ** 1.4))

    def test_entropy_log_shift(self):
        a = line_state(0.7, 0.0, 1.3)
        b = line_state(0.7, 0.0, 1.3 * np.e)
        assert np.allclose(entropy(b, GAS) - entropy(a, GAS), 1.0)


class TestRhs:
    def test_constant_state_has_zero_tendency(self):
        s = line_state(1.3, 0.4, 3.1, n=32)
        assert np.max(np.abs(rhs(s, GAS))) < 1e-13

    def test_constant_2d(self):
        grid = Grid.uniform_2d(9, 12)
        s = FlowState.from_primitive(grid, 1.2, np.array([0.3, -0.2])[:, None, None], 0.8, GAS)
        assert np.max(np.abs(rhs(s, GAS))) < 1e-13

    def test_sod_tendency_is_local(self):
        n = 101
        s = sod(n)
        r = rhs(s, GAS)
        active = np.flatnonzero(np.any(np.abs(r) > 0, axis=0))
        mid = 50
        assert active.min() >= mid - 3 and active.max() <= mid + 4

    def test_fifth_order_on_smooth_advection(self):
        errors = []
        for n in (81, 161, 321):
            grid = Grid.uniform_1d(n)
            x = grid.axes[0]
            s = FlowState.from_primitive(grid, 1 + 0.2 * np.sin(2 * np.pi * x), 1.0, 1.0, GAS)
            d = 0.4 * np.pi * np.cos(2 * np.pi * x)
            exact = np.stack([-d, -d, -0.5 * d])
            inner = (x >= 0.2) & (x <= 0.8)
            errors.append(np.max(np.abs(rhs(s, GAS) - exact)[:, inner]))
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(orders >= 4.0), orders

    def test_2d_reduces_to_1d_along_each_axis(self):
        n = 31
        s1 = sod(n)
        grid = Grid.uniform_2d(n, 9)
        q = np.zeros((4, n, 9))
        q[0] = s1.rho[:, None]
        q[1] = s1.q[1][:, None]
        q[3] = s1.energy[:, None]
        r2 = rhs(FlowState(grid, q), GAS)
        r1 = rhs(s1, GAS)
        assert np.allclose(r2[0], r1[0][:, None], atol=1e-12)
        assert np.allclose(r2[3], r1[2][:, None], atol=1e-12)
        # transposed orientation
        qt = np.stack([q[0].T, q[2].T, q[1].T, q[3].T])
        rt = rhs(FlowState(Grid.uniform_2d(9, n), qt), GAS)
        assert np.allclose(rt[0], r1[0][None, :], atol=1e-12)


class TestStepping:
    def test_constant_state_step(self):
        s = line_state(1.0, 0.5, 2.0, n=16)
        out = step(s, 0.001, GAS)
        assert np.allclose(out.q, s.q, atol=1e-14)
        assert out.t == pytest.approx(0.001)

    def test_cfl_violation(self):
        s = sod(51)
        with pytest.raises(CflViolation):
            step(s, 10 * stable_dt(s, GAS), GAS)

    def test_advance_to_same_time_is_identity(self):
        s = sod(51)
        out = advance(s, 0.0, GAS)
        assert np.array_equal(out.q, s.q)

    def test_advance_lands_exactly(self):
        out = advance(sod(51), 0.0123, GAS)
        assert out.t == 0.0123

    def test_backwards_rejected(self):
        s = sod(51)
        with pytest.raises(InvalidInput):
            advance(s, -1.0, GAS)

    def test_fixed_schedule_halves_compose(self):
        s = sod(101)
        dt = 0.5 * stable_dt(s, GAS) / 2  # conservative fixed substep
        full = advance(s, 40 * dt, GAS, dt=dt)
        half = advance(advance(s, 20 * dt, GAS, dt=dt), 40 * dt, GAS, dt=dt)
        assert np.array_equal(full.q, half.q)

    def test_deterministic(self):
        a = advance(sod(201), 0.05, GAS)
        b = advance(sod(201), 0.05, GAS)
        assert np.array_equal(a.q, b.q)

    def test_mass_conserved_before_waves_hit_boundary(self):
        s = sod(401)
        m0 = total_conserved(s)
        out = advance(s, 0.1, GAS)
        m1 = total_conserved(out)
        assert abs(m1[0] - m0[0]) / m0[0] < 1e-10
        assert abs(m1[2] - m0[2]) / m0[2] < 1e-10

    def test_sod_against_textbook_density(self):
        s = advance(sod(501), 0.2, GAS)
        x = s.grid.axes[0]
        l1 = np.sum(np.abs(s.rho - exact_sod_density(x, 0.2))) * s.grid.spacing[0]
        assert l1 < 5e-3

    def test_sod_has_five_regions(self):
        from fpetpf.harness.diagnostics import feature_count

        s = advance(sod(501), 0.2, GAS)
        rho = s.rho
        # four transitions: rarefaction head and tail, contact, shock
        plateaus = [rho[50], rho[300], rho[400], rho[480]]
        assert plateaus[0] == pytest.approx(1.0, abs=1e-6)
        assert plateaus[1] == pytest.approx(0.42632, abs=5e-3)
        assert plateaus[2] == pytest.approx(0.26557, abs=5e-3)
        assert plateaus[3] == pytest.approx(0.125, abs=1e-6)
        assert feature_count(rho, 0.2 * np.max(np.abs(np.diff(rho)))) == 2


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(-2.0, 2.0), st.floats(0.1, 5.0))
def test_primitive_round_trip(rho, u, p):
    s = FlowState.from_primitive(Grid.uniform_1d(8), rho, u, p, GAS)
    assert np.allclose(pressure(s, GAS), p, rtol=1e-10)
    assert np.allclose(s.velocity[0], u, rtol=1e-12, atol=1e-14)
