"""
Pytest suite for information functionals and flow diagnostics
"""
import math

import numpy as np
import pytest

from diagnostics import (coupling_mass, entropy_dissipation, fisher_rao_dissipation, fisher_rao_norm,
                         grid_entropy, grid_fisher_information, half_flow, half_flow_functionals,
                         log_domain_summary, periodic_heat_flow, relative_entropy, t_eps_operator)
from kernels import DomainSpec, build_kernel_matrix
from problem import random_instance
from sinkhorn_core import Potentials, Scalings


class TestFunctionals:
    def test_relative_entropy_zero_at_reference(self):
        ref = np.array([0.2, 0.3, 0.5])
        assert relative_entropy(ref, ref) == 0.0

    def test_relative_entropy_value(self):
        assert relative_entropy([1.0, 2.0], [2.0, 1.0]) == pytest.approx(math.log(2.0), rel=1e-14)

    def test_mass_corrected(self):
        # sum(ref - sigma) = 1.5 - 3.0
        value = relative_entropy([1.0, 2.0], [1.0, 0.5], mass_corrected=True)
        assert value == pytest.approx(2.0 * math.log(4.0) - 1.5, rel=1e-14)

    def test_zero_entries_allowed(self):
        assert relative_entropy([0.0, 1.0], [0.5, 0.5]) == pytest.approx(math.log(2.0))

    def test_relative_entropy_errors(self):
        with pytest.raises(ValueError, match="length mismatch"):
            relative_entropy([1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            relative_entropy([1.0], [0.0])

    def test_fisher_rao_norm(self):
        assert fisher_rao_norm([1.0, 2.0], [1.0, 4.0]) == pytest.approx(2.0)
        with pytest.raises(ValueError):
            fisher_rao_norm([1.0], [0.0])

    def test_coupling_mass_at_unit_scalings(self):
        problem = random_instance(0, 4, DomainSpec.euclidean(1), 0.05)
        S = Scalings(np.ones(4), np.ones(4))
        assert coupling_mass(S, problem.kernel) == pytest.approx(problem.kernel.entries.sum(), rel=1e-14)


class TestHalfFlows:
    @pytest.fixture(scope="class", params=range(5))
    def setup(self, request):
        problem = random_instance(request.param, 6, DomainSpec.euclidean(1), 0.05)
        rng = np.random.default_rng(request.param)
        S = Scalings(rng.uniform(0.5, 2.0, 6), rng.uniform(0.5, 2.0, 6))
        return problem, S

    @pytest.mark.parametrize("frozen", ['b', 'a'])
    def test_functional_non_increasing(self, setup, frozen):
        problem, S = setup
        _, history = half_flow(S, problem.kernel, problem.mass0, problem.mass1, 1e-3, 1000, frozen)
        steps = np.diff(history)
        assert np.all(steps <= 1e-13), f"functional increased by {steps.max():.3e}"

    @pytest.mark.parametrize("frozen", ['b', 'a'])
    def test_dissipation_is_descent_rate(self, setup, frozen):
        problem, S = setup
        ds = 1e-6
        _, history = half_flow(S, problem.kernel, problem.mass0, problem.mass1, ds, 1, frozen)
        rate = (history[1] - history[0]) / ds
        dissipation = fisher_rao_dissipation(S, problem.kernel, problem.mass0, problem.mass1, frozen)
        assert rate == pytest.approx(-dissipation, rel=1e-4)

    def test_functionals_vanish_at_fixed_point(self):
        from sinkhorn_core import SolveConfig, solve
        problem = random_instance(9, 6, DomainSpec.euclidean(1), 0.05)
        result = solve(problem, SolveConfig(tol=1e-12))
        f1, f2 = half_flow_functionals(result.scalings, problem.kernel, problem.mass0, problem.mass1)
        assert abs(f1) < 1e-12 and abs(f2) < 1e-12

    def test_log_domain_summary_matches_scalings(self, setup):
        problem, S = setup
        K, m0, m1 = problem.kernel, problem.mass0, problem.mass1
        c, f1, f2 = log_domain_summary(S.to_potentials(), K, m0, m1)
        assert c == pytest.approx(coupling_mass(S, K), rel=1e-12)
        expected = half_flow_functionals(S, K, m0, m1)
        assert f1 == pytest.approx(expected[0], rel=1e-9, abs=1e-13)
        assert f2 == pytest.approx(expected[1], rel=1e-9, abs=1e-13)

    def test_log_domain_summary_with_extreme_potentials(self, setup):
        """exp(g) underflows to zero; the summary is non-finite instead of raising"""
        problem, _ = setup
        P = Potentials(np.full(6, 900.0), np.full(6, -900.0))
        c, f1, f2 = log_domain_summary(P, problem.kernel, problem.mass0, problem.mass1)
        assert np.isfinite(c)
        P = Potentials(np.full(6, 900.0), np.full(6, 800.0))
        c, f1, f2 = log_domain_summary(P, problem.kernel, problem.mass0, problem.mass1)
        assert not np.isfinite(c)

    def test_bad_frozen(self, setup):
        problem, S = setup
        with pytest.raises(ValueError):
            half_flow(S, problem.kernel, problem.mass0, problem.mass1, 1e-3, 1, frozen='c')


class TestTEpsOperator:
    @pytest.fixture(scope="class")
    def kernel(self):
        xs = np.linspace(0.0, 1.0, 8, endpoint=False)
        return build_kernel_matrix(DomainSpec.torus([1.0]), 0.02, xs, xs)

    def test_constants_map_to_zero(self, kernel):
        np.testing.assert_allclose(t_eps_operator(kernel, np.full(8, 3.0)), 0.0, atol=1e-13)

    def test_shift_invariance(self, kernel):
        f = np.sin(2 * np.pi * kernel.xs[:, 0])
        np.testing.assert_allclose(t_eps_operator(kernel, f + 5.0), t_eps_operator(kernel, f), atol=1e-12)

    def test_directional_derivative(self, kernel):
        """Central difference against (K~(e^f v)) / (K~ e^f) - v"""
        rng = np.random.default_rng(3)
        f, v = rng.normal(size=8), rng.normal(size=8)
        step = 1e-5
        fd = (t_eps_operator(kernel, f + step * v) - t_eps_operator(kernel, f - step * v)) / (2 * step)
        smooth = kernel.row_normalized().entries
        exact = (smooth @ (np.exp(f) * v)) / (smooth @ np.exp(f)) - v
        np.testing.assert_allclose(fd, exact, atol=1e-6)

    def test_vanishes_when_kernel_is_identity(self):
        """Well separated points and tiny eps give K~ = I up to rounding"""
        xs = np.linspace(0.0, 1.0, 8, endpoint=False)
        K = build_kernel_matrix(DomainSpec.torus([1.0]), 1e-6, xs, xs)
        f = np.sin(2 * np.pi * xs)
        np.testing.assert_allclose(t_eps_operator(K, f), 0.0, atol=1e-12)

    def test_needs_square_kernel(self):
        K = build_kernel_matrix(DomainSpec.euclidean(1), 0.1, [0.0, 1.0], [0.5])
        with pytest.raises(ValueError):
            t_eps_operator(K, np.zeros(2))


class TestHeatFlowEntropy:
    @pytest.fixture(scope="class")
    def density(self):
        n = 256
        dx = 1.0 / n
        x = (np.arange(n) + 0.5) * dx
        return 1.0 + 0.5 * np.cos(2 * np.pi * x) + 0.2 * np.sin(6 * np.pi * x), dx

    def test_mass_preserved(self, density):
        rho, dx = density
        evolved = periodic_heat_flow(rho, dx, 0.01)
        assert evolved.sum() * dx == pytest.approx(rho.sum() * dx, rel=1e-12)

    def test_entropy_decays_at_fisher_rate(self, density):
        rho, dx = density
        rate, fisher = entropy_dissipation(rho, dx, t0=0.005, dt=1e-6)
        assert rate < 0
        assert abs(rate + fisher) <= 0.02 * fisher

    def test_uniform_density(self):
        rho = np.ones(64)
        assert grid_entropy(rho, 1.0 / 64) == pytest.approx(0.0, abs=1e-15)
        assert grid_fisher_information(rho, 1.0 / 64, periodic=True) == 0.0

    def test_nonpositive_density(self):
        with pytest.raises(ValueError):
            grid_entropy(np.array([1.0, 0.0]), 0.5)


if __name__ == "__main__":
    pytest.main([__file__, "-v", "--html=report.html"])
