"""Forward/inverse transforms, closed forms, quadrant probabilities."""

import math

import numpy as np
import pytest

from tomobell.errors import (
    AccuracyError,
    DomainError,
    NormalizationError,
    UnsupportedStateError,
)
from tomobell.special import gauss_legendre
from tomobell.states import (
    ExplicitFock,
    FockPairSuperposition,
    PairCoherent,
    SqueezedVacuum,
    density_matrix,
)
from tomobell.tomography import (
    GaussianTomogramParams,
    SignBinnedProbs,
    SymplecticSetting,
    epr_marginal_density,
    fock_quadrature_density,
    inverse_fourier_wigner,
    kernel_reconstruct_density,
    pair_coherent_integral_direct,
    pair_coherent_integral_series,
    radon_forward,
    radon_forward_symplectic,
    sign_binned_closed_form,
    sign_binned_numeric,
    tomogram_closed_form,
    vacuum_quadrature_density,
)


# ---------------------------------------------------------------------------
# closed-form tomograms
# ---------------------------------------------------------------------------


def test_gaussian_params_validation():
    par = GaussianTomogramParams.from_squeezing(0.5, 0.3)
    assert par.norm == pytest.approx(math.sqrt(par.a**2 - par.b**2))
    with pytest.raises(DomainError):
        GaussianTomogramParams(1.0, 1.5, 0.1)
    with pytest.raises(DomainError):
        GaussianTomogramParams(-1.0, 0.0, 1.0)


def test_tomogram_vacuum_angle_independent():
    state = SqueezedVacuum(0.0)
    for t1, t2 in ((0.0, 0.0), (0.7, -0.2), (2.0, 1.3)):
        val = tomogram_closed_form(state, 0.4, t1, -0.3, t2)
        want = (2.0 / math.pi) * math.exp(-2.0 * (0.16 + 0.09))
        assert val == pytest.approx(want, rel=1e-13)


def test_tomogram_fock_pair_hermite_zero():
    # H_1(0) = 0 kills the cross term; in this convention the value is 1/pi
    # (twice the natural-unit 1/(2 pi), the Jacobian of X -> sqrt(2) X)
    val = tomogram_closed_form(FockPairSuperposition(1), 0.0, 0.8, 0.0, 0.8)
    assert val == pytest.approx(1.0 / math.pi, rel=1e-13)


def test_tomogram_depends_on_angle_sum_only():
    for state in (SqueezedVacuum(0.54), FockPairSuperposition(2), PairCoherent(0.9)):
        base = tomogram_closed_form(state, 0.6, 0.3, -0.4, 0.5)
        for delta in (0.2, -1.1, 2.5):
            shifted = tomogram_closed_form(state, 0.6, 0.3 + delta, -0.4, 0.5 - delta)
            assert shifted == pytest.approx(base, rel=1e-12)


@pytest.mark.parametrize("s", [0.25, 0.5, 1.0])
@pytest.mark.parametrize("theta_sum", [0.0, math.pi / 4, math.pi / 2])
def test_tomogram_squeezed_matches_radon(s, theta_sum):
    state = SqueezedVacuum(math.tanh(s))
    xs = np.linspace(-2.0, 2.0, 9)
    t1 = 0.2
    t2 = theta_sum - t1
    closed = tomogram_closed_form(state, xs[:, None], t1, xs[None, :], t2)
    numeric = radon_forward(state, xs[:, None], t1, xs[None, :], t2)
    assert np.max(np.abs(closed - numeric)) < 1e-6


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tomogram_fock_pair_matches_radon(n):
    # the oracle fixing the cos n(theta1 + theta2) angle argument
    state = FockPairSuperposition(n)
    for x1, t1, x2, t2 in ((0.7, 0.5, -0.4, 0.3), (0.0, 1.1, 1.2, -0.6)):
        closed = tomogram_closed_form(state, x1, t1, x2, t2)
        numeric = radon_forward(state, x1, t1, x2, t2)
        assert closed == pytest.approx(numeric, abs=1e-8)


def test_tomogram_pair_coherent_matches_radon():
    state = PairCoherent(1.05)
    closed = tomogram_closed_form(state, 0.5, 0.0, 0.5, 0.0)
    numeric = radon_forward(state, 0.5, 0.0, 0.5, 0.0, order=64, tol=1e-7)
    assert closed == pytest.approx(numeric, abs=1e-5)


@pytest.mark.parametrize(
    "state", [SqueezedVacuum(0.54), FockPairSuperposition(3), PairCoherent(1.05)]
)
def test_tomogram_normalization(state):
    rule = gauss_legendre(160, -6.0, 6.0)
    vals = tomogram_closed_form(state, rule.nodes[:, None], 0.4, rule.nodes[None, :], -0.9)
    integral = float(rule.weights @ vals @ rule.weights)
    assert integral == pytest.approx(1.0, abs=1e-6)


def test_tomogram_rejects_explicit_fock():
    dm = density_matrix(SqueezedVacuum(0.0), 4)
    with pytest.raises(UnsupportedStateError):
        tomogram_closed_form(ExplicitFock(dm), 0.0, 0.0, 0.0, 0.0)


def test_wigner_marginal_is_tomogram_marginal():
    # integrating the squeezed-vacuum Wigner function over (p1, q2, p2)
    # must reproduce the X2-marginal of the tomogram at theta1 = 0: a
    # Gaussian of variance cosh(2s)/4
    from tomobell.states import wigner

    s = 0.5
    state = SqueezedVacuum(math.tanh(s))
    rule = gauss_legendre(64, -5.0, 5.0)
    y = rule.nodes
    w = rule.weights
    p1, q2, p2 = np.meshgrid(y, y, y, indexing="ij")
    var = math.cosh(2.0 * s) / 4.0
    for q1 in (0.0, 0.4, -0.9):
        vals = wigner(state, q1, p1, q2, p2)
        marginal = float(np.einsum("i,j,k,ijk->", w, w, w, vals))
        want = math.exp(-0.5 * q1 * q1 / var) / math.sqrt(2.0 * math.pi * var)
        assert marginal == pytest.approx(want, rel=1e-8)


def test_radon_homogeneity():
    # w(lambda X, lambda mu, lambda nu) = w(X, mu, nu) / |lambda| per mode
    state = SqueezedVacuum(math.tanh(0.5))
    base = radon_forward_symplectic(
        state, 0.7, SymplecticSetting(0.9, 0.3), 0.4, SymplecticSetting(0.2, -0.8)
    )
    for lam in (0.5, 1.7):
        scaled = radon_forward_symplectic(
            state,
            lam * 0.7,
            SymplecticSetting(lam * 0.9, lam * 0.3),
            0.4,
            SymplecticSetting(0.2, -0.8),
        )
        assert scaled == pytest.approx(base / abs(lam), rel=1e-7)


def test_symplectic_setting_validation():
    with pytest.raises(DomainError):
        SymplecticSetting(0.0, 0.0)
    s = SymplecticSetting.from_angle(math.pi / 3)
    assert s.scale == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# pair-coherent angular integral
# ---------------------------------------------------------------------------


def test_pair_coherent_integral_r_to_zero():
    val = pair_coherent_integral_direct(0.3, 0.2, -0.8, 0.6, 1e-8)
    assert val == pytest.approx(2.0 * math.pi, abs=1e-6)
    assert pair_coherent_integral_series(0.3, -0.8, 0.4, 1e-10) == pytest.approx(
        2.0 * math.pi, abs=1e-6
    )


def test_pair_coherent_series_first_term_algebra():
    # the n = 1 contribution is 2 pi * 2 X1 X2 alpha^2
    x1, x2, phi0, r = 0.9, -1.3, 0.35, 0.8
    alpha2 = (r * np.exp(-1j * phi0)) ** 2
    zeroth = pair_coherent_integral_series(x1, x2, phi0, r, terms=0)
    first = pair_coherent_integral_series(x1, x2, phi0, r, terms=1)
    assert zeroth == pytest.approx(2.0 * math.pi)
    assert first - zeroth == pytest.approx(2.0 * math.pi * 2.0 * x1 * x2 * alpha2, rel=1e-12)


def test_pair_coherent_series_vs_direct():
    for x1, x2, theta1, theta2, r in (
        (3.0, 3.0, 1.0, 0.4, 1.5),
        (-2.0, 1.0, 2.4, -0.9, 1.0),
        (0.0, 0.0, math.pi, 0.0, 0.7),  # alpha^2 = -r^2, alternating series
    ):
        direct = pair_coherent_integral_direct(x1, theta1, x2, theta2, r, order=512)
        series = pair_coherent_integral_series(x1, x2, 0.5 * (theta1 + theta2), r)
        assert abs(direct - series) < 1e-8


def test_pair_coherent_integral_order_guard():
    with pytest.raises(DomainError):
        pair_coherent_integral_direct(0.0, 0.0, 0.0, 0.0, 1.0, order=32)


# ---------------------------------------------------------------------------
# sign-binned probabilities
# ---------------------------------------------------------------------------


def test_sign_binned_numeric_product_density():
    def density(x1, x2):
        return (2.0 / math.pi) * np.exp(-2.0 * x1**2 - 2.0 * x2**2)

    probs = sign_binned_numeric(density, 0.0, 0.0)
    for v in probs.as_tuple():
        assert v == pytest.approx(0.25, abs=1e-10)


def test_sign_binned_closed_vs_numeric_squeezed():
    state = SqueezedVacuum(math.tanh(0.5))
    t1, t2 = 0.3, -0.3  # theta1 + theta2 = 0
    closed = sign_binned_closed_form(state, t1, t2)
    numeric = sign_binned_numeric(
        lambda x1, x2: tomogram_closed_form(state, x1, t1, x2, t2), t1, t2
    )
    for a, b in zip(closed.as_tuple(), numeric.as_tuple()):
        assert a == pytest.approx(b, abs=1e-8)


def test_sign_binned_closed_vs_numeric_fock_pair():
    state = FockPairSuperposition(1)
    t1, t2 = 0.4, 0.35
    closed = sign_binned_closed_form(state, t1, t2)
    numeric = sign_binned_numeric(
        lambda x1, x2: tomogram_closed_form(state, x1, t1, x2, t2), t1, t2
    )
    for a, b in zip(closed.as_tuple(), numeric.as_tuple()):
        assert a == pytest.approx(b, abs=1e-8)
    # the oscillation argument is theta1 + theta2, not theta1 - theta2
    diff_arg = 0.25 + math.cos(t1 - t2) / (2.0 * math.pi)
    assert abs(closed.w_pp - diff_arg) > 1e-3


def test_sign_binned_closed_vs_numeric_pair_coherent():
    state = PairCoherent(1.05)
    t1, t2 = 0.9, 0.4
    closed = sign_binned_closed_form(state, t1, t2)
    numeric = sign_binned_numeric(
        lambda x1, x2: tomogram_closed_form(state, x1, t1, x2, t2), t1, t2, scale=1.2
    )
    for a, b in zip(closed.as_tuple(), numeric.as_tuple()):
        assert a == pytest.approx(b, abs=1e-6)


def test_sign_binned_squeezed_special_points():
    # theta1 + theta2 = pi/2 makes b = 0, so all four quadrants are 1/4
    state = SqueezedVacuum(0.54)
    probs = sign_binned_closed_form(state, math.pi / 4, math.pi / 4)
    for v in probs.as_tuple():
        assert v == pytest.approx(0.25, abs=1e-14)
    # strong squeezing at theta1 + theta2 = 0: perfect sign anti-correlation
    strong = sign_binned_closed_form(SqueezedVacuum(math.tanh(6.0)), 0.0, 0.0)
    assert strong.w_pp == pytest.approx(0.0, abs=1e-4)
    assert strong.w_pm == pytest.approx(0.5, abs=1e-4)
    # limit value arctan(sinh 2s) -> pi/2
    s = 6.0
    assert strong.w_pp == pytest.approx(
        0.25 - math.atan(math.sinh(2.0 * s)) / (2.0 * math.pi), abs=1e-12
    )


def test_sign_binned_pair_coherent_r_to_zero():
    probs = sign_binned_closed_form(PairCoherent(1e-4), 0.7, 0.2)
    for v in probs.as_tuple():
        assert v == pytest.approx(0.25, abs=1e-6)


def test_sign_binned_sum_and_symmetry():
    for state in (SqueezedVacuum(0.96), FockPairSuperposition(3), PairCoherent(1.3)):
        for theta_sum in (0.0, 1.0, 2.7, 5.5):
            probs = sign_binned_closed_form(state, theta_sum, 0.0)
            assert sum(probs.as_tuple()) == pytest.approx(1.0, abs=1e-9)
            assert probs.w_pp == pytest.approx(probs.w_mm, abs=1e-12)
            assert probs.w_pm == pytest.approx(probs.w_mp, abs=1e-12)


def test_sign_binned_never_exceeds_half_for_a_and_b():
    grid = np.linspace(0.0, 2.0 * math.pi, 90, endpoint=False)
    for state in (SqueezedVacuum(0.96), FockPairSuperposition(5)):
        worst = max(
            max(sign_binned_closed_form(state, s, 0.0).as_tuple()) for s in grid
        )
        assert worst <= 0.5 + 1e-9


def test_sign_binned_probs_validation():
    with pytest.raises(NormalizationError):
        SignBinnedProbs(0.3, 0.3, 0.3, 0.3, 0.0, 0.0).validate()
    with pytest.raises(NormalizationError):
        SignBinnedProbs(1.2, -0.2, 0.0, 0.0, 0.0, 0.0).validate()


def test_sign_binned_numeric_normalization_error():
    def off_density(x1, x2):  # integrates to 2, an error signal
        return (4.0 / math.pi) * np.exp(-2.0 * x1**2 - 2.0 * x2**2)

    with pytest.raises(NormalizationError):
        sign_binned_numeric(off_density, 0.0, 0.0)


# ---------------------------------------------------------------------------
# inverse transforms
# ---------------------------------------------------------------------------


def _tomogram_grid(density, nx=241, ntheta=48):
    x = np.linspace(-6.0, 6.0, nx)
    theta = np.linspace(0.0, math.pi, ntheta, endpoint=False)
    values = np.repeat(np.asarray(density(x))[:, None], ntheta, axis=1)
    return values, x, theta


def test_inverse_fourier_vacuum():
    values, x, theta = _tomogram_grid(vacuum_quadrature_density)
    q = np.linspace(-2.5, 2.5, 51)
    wig, raw = inverse_fourier_wigner(values, x, theta, q, q)
    assert abs(raw - 1.0) < 0.05
    assert wig[25, 25] == pytest.approx(2.0 / math.pi, rel=0.01)


def test_inverse_fourier_squeezed_marginal():
    lam = math.tanh(0.3)
    values, x, theta = _tomogram_grid(lambda xs: epr_marginal_density(lam, xs))
    q = np.linspace(-2.5, 2.5, 51)
    wig, _ = inverse_fourier_wigner(values, x, theta, q, q)
    # partial-trace oracle: W(0, 0) = (2/pi) sum_n (-1)^n c_n^2
    from tomobell.states import schmidt_coefficients

    c = schmidt_coefficients(SqueezedVacuum(lam), 80).coefficients
    oracle = (2.0 / math.pi) * float(np.sum((-1.0) ** np.arange(80) * c**2))
    assert oracle == pytest.approx(2.0 / (math.pi * math.cosh(0.6)), rel=1e-12)
    assert wig[25, 25] == pytest.approx(oracle, rel=0.01)


def test_inverse_fourier_real_surface():
    values, x, theta = _tomogram_grid(lambda xs: fock_quadrature_density(1, xs))
    q = np.linspace(-2.0, 2.0, 41)
    wig, _ = inverse_fourier_wigner(values, x, theta, q, q)
    assert wig.dtype.kind == "f"
    assert wig[20, 20] < 0.0  # single photon is negative at the origin


def test_inverse_fourier_normalization_error():
    values, x, theta = _tomogram_grid(lambda xs: 2.0 * vacuum_quadrature_density(xs))
    q = np.linspace(-2.5, 2.5, 51)
    with pytest.raises(AccuracyError):
        inverse_fourier_wigner(values, x, theta, q, q)


def test_kernel_matrix_element_vs_expm_oracle():
    # brute-force oracle: exponentiate beta a^dag - conj(beta) a on a large
    # truncation and read off the same matrix elements
    from scipy.linalg import expm

    from tomobell.tomography import kernel_fock_matrix_element

    dim = 40
    lower = np.diag(np.sqrt(np.arange(1, dim)), 1)  # annihilation operator
    for k, theta in ((0.8, 0.0), (2.5, 1.1), (4.0, -2.0)):
        beta = -0.5j * k * np.exp(1j * theta)
        disp = expm(beta * lower.conj().T - np.conj(beta) * lower)
        for m in range(4):
            for n in range(4):
                got = complex(kernel_fock_matrix_element(m, n, k, theta))
                assert got == pytest.approx(disp[m, n], abs=1e-12)


def test_kernel_reconstruct_vacuum():
    rho, diag = kernel_reconstruct_density(
        vacuum_quadrature_density, 6)
    assert rho[0, 0].real == pytest.approx(1.0, abs=0.02)
    off = rho - np.diag(rho.diagonal())
    assert np.max(np.abs(off)) < 2e-2
    assert diag["step_norms"][-1] < diag["step_norms"][0]


def test_kernel_reconstruct_single_photon():
    rho, _ = kernel_reconstruct_density(
        lambda x, t=0.0: fock_quadrature_density(1, x, t), 6
    )
    assert rho[1, 1].real == pytest.approx(1.0, abs=0.05)
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-12


def test_kernel_reconstruct_guards():
    with pytest.raises(DomainError):
        kernel_reconstruct_density(vacuum_quadrature_density, 11)
    with pytest.raises(NormalizationError):
        kernel_reconstruct_density(
            lambda x, t=0.0: 0.5 * vacuum_quadrature_density(x, t), 4
        )
