import itertools
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from replicalc.algebra import Polynomial
from replicalc.errors import CapacityError, DomainError
from replicalc.graph import parse
from replicalc.numerics import _kernels
from replicalc.numerics.checks import (
    beta_derivative_check,
    beta_second_derivative_ratio,
    effective_beta,
    effective_beta_check,
    first_derivative,
    fourth_derivative,
    lambda_derivative_check,
    rate_trend,
    richardson,
    second_derivative,
)
from replicalc.numerics.evaluate import (
    averaged_deformed_expect,
    deformed_expect,
    log_partition_average,
    quenched_expect,
    thermal_expect,
)
from replicalc.numerics.model import (
    KernelMode,
    SpinModel,
    configurations,
    diagonal_value,
    gibbs_state,
    kernel_matrix,
    overlap_kernel,
    pair_signs,
)
from replicalc.numerics.quadrature import (
    QuadratureSpec,
    coupling_chunks,
    gauss_hermite,
    gaussian_chunks,
)

SMALL = QuadratureSpec(nodes_per_dim=12)


# -- model --------------------------------------------------------------------

def test_overlap_kernel_examples():
    assert overlap_kernel([1, 1, -1], [1, -1, -1]) == pytest.approx(1 / 9)
    assert overlap_kernel([1, -1, 1, 1], [1, -1, 1, 1]) == 1
    assert overlap_kernel([1, 1], [1, 1], KernelMode.EXACT) == pytest.approx(1 / 4)
    with pytest.raises(DomainError):
        overlap_kernel([1, 1], [1, 1, 1])


def test_exact_kernel_is_the_deformation_covariance():
    # Cov(K(s), K(t)) with K = -N^-1 sum_{i<j} J'_ij s_i s_j is N^-2 sum_{i<j} s_i s_j t_i t_j
    n = 4
    s = configurations(n)
    ps = pair_signs(n)
    cov = ps @ ps.T / n**2
    assert np.allclose(cov, kernel_matrix(n, KernelMode.EXACT))


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("mode", list(KernelMode))
def test_kernels_are_psd(n, mode):
    assert np.linalg.eigvalsh(kernel_matrix(n, mode)).min() >= -1e-10


@pytest.mark.parametrize("n", [2, 3, 5])
def test_exact_diagonal_is_constant(n):
    k = kernel_matrix(n, KernelMode.EXACT)
    assert np.allclose(np.diag(k), (1 - 1 / n) / 2)
    assert diagonal_value(n, KernelMode.EXACT) == pytest.approx((1 - 1 / n) / 2)
    assert diagonal_value(n, KernelMode.IDEALIZED) == 1


def test_gibbs_infinite_temperature():
    st_ = gibbs_state(SpinModel.sample(4, 0.0, seed=1))
    assert np.allclose(st_.weights, 1 / 16)
    assert st_.free_energy_density == pytest.approx(math.log(2))


@pytest.mark.parametrize("j, beta", [(0.7, 0.4), (-1.3, 1.1), (0.0, 2.0)])
def test_gibbs_two_spins(j, beta):
    st_ = gibbs_state(SpinModel(2, (j,), beta))
    a = beta * j / math.sqrt(2)
    assert st_.log_z == pytest.approx(math.log(2 * math.exp(a) + 2 * math.exp(-a)), rel=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 7), st.floats(0, 3), st.integers(0, 10**6))
def test_gibbs_weights_normalized(n, beta, seed):
    m = SpinModel.sample(n, beta, seed)
    st_ = gibbs_state(m)
    assert abs(st_.weights.sum() - 1) < 1e-12
    # weights follow exp(-beta H)
    e = m.energies()
    ref = np.exp(-beta * e - np.max(-beta * e))
    assert np.allclose(st_.weights, ref / ref.sum(), rtol=1e-10, atol=1e-15)


def test_spin_model_validation():
    with pytest.raises(DomainError):
        SpinModel(1, (), 1.0)
    with pytest.raises(DomainError):
        SpinModel(3, (0.1,), 1.0)
    with pytest.raises(DomainError):
        SpinModel(2, (0.1,), -1.0)
    with pytest.raises(CapacityError):
        SpinModel(15, tuple([0.0] * 105), 1.0)


# -- contraction kernels ----------------------------------------------------

def brute_thermal(g, couplings, n, mode):
    """Direct sum over all replica configurations of the edge product."""
    signs = pair_signs(n)
    w = np.exp(signs @ couplings)
    w /= w.sum()
    k = kernel_matrix(n, mode)
    d = diagonal_value(n, mode)
    vs = sorted(g.vertices)
    total = 0.0
    for assign in itertools.product(range(len(w)), repeat=len(vs)):
        a = dict(zip(vs, assign))
        val = math.prod(w[x] for x in assign)
        for (u, v), m in g.edges:
            val *= (d if u == v else k[a[u], a[v]]) ** m
        total += val
    return total


GRAPHS = [
    "(1,2)",
    "(1,2)^3",
    "(1,2)(2,3)(3,4)(4,1)",
    "(1,2)(1,3)(1,4)(2,3)(2,4)(3,4)",  # K4: needs the einsum fallback
    "(1,1)(1,2)^2(3,4)",
    "(1,2)(2,3)(3,1)(4,5)^2",
    "(1,2)(1,3)(1,4)(1,5)",
    "(2,2)(3,3)",
]


@pytest.mark.parametrize("text", GRAPHS)
@pytest.mark.parametrize("mode", list(KernelMode))
def test_kernel_routes_match_brute_force(text, mode):
    n = 3
    g = parse(text)
    rng = np.random.default_rng(7)
    couplings = 0.8 * rng.standard_normal((3, 3))
    ref = np.array([brute_thermal(g, c, n, mode) for c in couplings])
    np_route = thermal_expect(g, couplings, n, mode, use_numba=False)
    assert np.allclose(np_route, ref, rtol=1e-11, atol=1e-15)
    if _kernels.HAVE_NUMBA:
        nb_route = thermal_expect(g, couplings, n, mode, use_numba=True)
        assert np.allclose(nb_route, ref, rtol=1e-11, atol=1e-15)


def test_relabeled_polynomial_same_value():
    # exchangeability: the raw relabeled graph, summed directly, matches the engine value
    g = parse("(1,2)(2,3)^2(4,5)")
    h = g.relabel({1: 9, 2: 4, 3: 1, 4: 7, 5: 2})
    c = np.array([0.3, -0.5, 0.9])
    assert brute_thermal(h, c, 3, KernelMode.EXACT) == pytest.approx(thermal_expect(g, c, 3)[0], rel=1e-12)


def test_polynomial_combination():
    c = np.array([[0.2, -0.4, 0.6]])
    p = Polynomial.parse("3(1,2)^2 - 1/2(1,2)(3,4) + 2")
    expect = 3 * thermal_expect("(1,2)^2", c, 3) - 0.5 * thermal_expect("(1,2)(3,4)", c, 3) + 2
    assert thermal_expect(p, c, 3) == pytest.approx(expect, rel=1e-13)


def test_legs_rejected():
    with pytest.raises(DomainError):
        quenched_expect("(1,2)(1)(2)", 3, 0.5, SMALL)


def test_numba_flag_forces_numpy():
    code = (
        "from replicalc.numerics import _kernels, quenched_expect, QuadratureSpec;"
        "print(_kernels.backend(), repr(quenched_expect('(1,2)(2,3)', 3, 0.7, QuadratureSpec(nodes_per_dim=8))))"
    )
    env = dict(os.environ, REPLICALC_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, value = out.stdout.split()
    assert name == "numpy"
    assert float(value) == pytest.approx(quenched_expect("(1,2)(2,3)", 3, 0.7, QuadratureSpec(nodes_per_dim=8)), rel=1e-13)


# -- quadrature -------------------------------------------------------------

def test_gauss_hermite_moments():
    x, w = gauss_hermite(20)
    assert w.sum() == pytest.approx(1, abs=1e-14)
    assert w @ x**2 == pytest.approx(1, abs=1e-13)
    assert w @ x**4 == pytest.approx(3, abs=1e-12)


def test_nodes_reduced_to_point_budget():
    spec = QuadratureSpec(nodes_per_dim=20, max_points=1_000_000)
    assert spec.nodes_for(3) == 20
    assert spec.nodes_for(6) == 10
    assert spec.uses_quadrature(6)
    assert not QuadratureSpec().uses_quadrature(10)


def test_capacity_without_mc():
    with pytest.raises(CapacityError):
        list(gaussian_chunks(10, QuadratureSpec()))


def test_mc_fallback_is_seeded():
    spec = QuadratureSpec(mc_samples=5000, seed=3)
    a = np.concatenate([p for p, _ in gaussian_chunks(10, spec)])
    b = np.concatenate([p for p, _ in gaussian_chunks(10, spec)])
    assert np.array_equal(a, b) and a.shape == (5000, 10)


def test_coupling_chunks_match_flat_grid():
    spec = QuadratureSpec(nodes_per_dim=7, chunk=50)
    rng = np.random.default_rng(0)
    lin = rng.standard_normal((4, 3))
    off = rng.standard_normal(3)
    f = lambda g: np.sin(g).sum(axis=1)
    blocked = sum(float(w @ f(g)) for g, w in coupling_chunks(lin, spec, off))
    flat = sum(float(w @ f(off + x @ lin)) for x, w in gaussian_chunks(4, spec))
    assert blocked == pytest.approx(flat, rel=1e-13)


# -- expectations -------------------------------------------------------------

def test_quenched_constant_and_infinite_temperature():
    assert quenched_expect("1", 3, 0.6, SMALL) == pytest.approx(1)
    assert quenched_expect("(1,2)", 3, 0.0, SMALL, KernelMode.IDEALIZED) == pytest.approx(1 / 3)


def test_deformed_expect_zero_lambda_and_parity():
    m = SpinModel.sample(3, 0.7, seed=5)
    base = thermal_expect("(1,2)(2,3)", m.effective_couplings(), 3)[0]
    assert deformed_expect("(1,2)(2,3)", 0.0, m, SMALL) == pytest.approx(base, rel=1e-13)
    assert deformed_expect("(1,2)(2,3)", 0.4, m, SMALL) == pytest.approx(
        deformed_expect("(1,2)(2,3)", -0.4, m, SMALL), rel=1e-13
    )


def test_effective_temperature_two_spins():
    quad = QuadratureSpec()
    lhs = averaged_deformed_expect("(1,2)", 0.3, 2, 0.4, quad)
    bt = effective_beta(0.4, 0.3, 2)
    assert bt == pytest.approx(math.sqrt(0.205))
    assert lhs == pytest.approx(quenched_expect("(1,2)", 2, bt, quad), rel=1e-9)


def test_log_partition_average():
    assert log_partition_average(3, 0.0, SMALL) == pytest.approx(math.log(2))
    # annealed bound: Av log Z <= log Av Z = N log 2 + beta^2 (N-1)/4
    n, beta = 3, 0.8
    assert log_partition_average(n, beta, SMALL) * n <= n * math.log(2) + beta**2 * (n - 1) / 4


# -- finite-difference helpers and check guards ------------------------------

def test_stencils_on_polynomials():
    # 5-point stencils are exact through degree 4; one Richardson step makes d4 exact through degree 7
    q = lambda x: x**4 - 2 * x**3 + x
    assert first_derivative(q, 0.5, 1e-2) == pytest.approx(4 * 0.5**3 - 6 * 0.5**2 + 1, rel=1e-11)
    assert second_derivative(q, 0.5, 1e-2) == pytest.approx(12 * 0.5**2 - 12 * 0.5, rel=1e-8)
    f = lambda x: x**6 - 2 * x**3 + x
    h = 0.05
    d4 = richardson(fourth_derivative(f, 0.5, 2 * h), fourth_derivative(f, 0.5, h), 2)
    assert d4 == pytest.approx(360 * 0.5**2, rel=1e-10)


def test_check_guards():
    with pytest.raises(DomainError):
        lambda_derivative_check("(1,2)", 2, 0.5, 3, quad=SMALL)
    with pytest.raises(DomainError):
        lambda_derivative_check("(1,2)", 2, 0.5, 6, quad=SMALL)
    with pytest.raises(DomainError):
        beta_derivative_check("(1,2)", 2, 0.0, quad=SMALL)
    with pytest.raises(DomainError):
        beta_second_derivative_ratio("(1,2)", 2, -1.0, quad=SMALL)


def test_constant_monomial():
    rep = beta_derivative_check("1", 3, 0.5, quad=SMALL)
    assert rep.passed and rep.rhs == 0 and abs(rep.lhs) < 1e-12
    ratio = beta_second_derivative_ratio("1", 3, 0.5, quad=SMALL)
    assert ratio.passed is None and ratio.details["verdict"] == "undefined"


def test_small_checks_pass_at_two_spins():
    assert effective_beta_check("(1,2)", 2, 0.4, 0.0, SMALL).rel_error < 1e-12
    assert lambda_derivative_check("(1,2)", 2, 0.4, 2, quad=SMALL).passed
    assert beta_derivative_check("(1,2)(3,4)", 2, 0.4, quad=SMALL).passed
    rho = beta_second_derivative_ratio("(1,2)", 2, 0.4, quad=SMALL)
    assert rho.passed and rho.details["verdict"] == "1"


def test_rate_trend_edge_cases():
    single = rate_trend("(1,2)", [3], 0.5, SMALL)
    assert single.passed is None and single.details["trend_delta"] == "n/a"
    assert len(single.details["table"]) == 1
    cold = rate_trend("(1,2)", [2, 3], 0.0, SMALL)
    assert all(math.isfinite(r["E_delta"]) for r in cold.details["table"])
