"""Pseudospin operators, CHSH functionals, Bell-angle optimization."""

import math

import numpy as np
import pytest

from tomobell.bell import (
    BellAnglesQuadrature,
    PseudospinSettings,
    chsh,
    closed_form_correlation,
    correlation_pseudospin,
    correlation_tomographic,
    maximize_chsh,
    pair_coherent_bessel_coefficient,
    pair_coherent_sx_report,
    pseudospin_matrices,
)
from tomobell.errors import AccuracyError, DimensionError, DomainError, NormalizationError
from tomobell.special import bessel_i0, bessel_j0
from tomobell.states import (
    FockPairSuperposition,
    PairCoherent,
    SqueezedVacuum,
    density_matrix,
    schmidt_coefficients,
)
from tomobell.tomography import SignBinnedProbs, sign_binned_closed_form

X_AXIS = np.array([1.0, 0.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])


def xz(theta):
    return np.array([math.sin(theta), 0.0, math.cos(theta)])


# ---------------------------------------------------------------------------
# pseudospin operators
# ---------------------------------------------------------------------------


def test_pseudospin_cutoff_two_is_pauli():
    ops = pseudospin_matrices(2)
    assert np.array_equal(ops.sx, np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.array_equal(ops.sy, np.array([[0, -1j], [1j, 0]]))
    assert np.array_equal(ops.sz, np.diag([1.0 + 0j, -1.0]))


@pytest.mark.parametrize("cutoff", [2, 4, 64])
def test_pseudospin_spin_half_algebra(cutoff):
    ops = pseudospin_matrices(cutoff)
    ident = np.eye(cutoff)
    assert np.max(np.abs(ops.sx @ ops.sy - ops.sy @ ops.sx - 2j * ops.sz)) <= 1e-12
    assert np.max(np.abs(ops.sy @ ops.sz - ops.sz @ ops.sy - 2j * ops.sx)) <= 1e-12
    assert np.max(np.abs(ops.sz @ ops.sx - ops.sx @ ops.sz - 2j * ops.sy)) <= 1e-12
    for m in (ops.sx, ops.sy, ops.sz):
        assert np.max(np.abs(m @ m - ident)) <= 1e-12
        assert np.max(np.abs(m - m.conj().T)) == 0.0


def test_pseudospin_cross_mode_commutators_vanish():
    ops = pseudospin_matrices(4)
    ident = np.eye(4)
    a = np.kron(ops.sx, ident)
    b = np.kron(ident, ops.sy)
    assert np.max(np.abs(a @ b - b @ a)) == 0.0


def test_pseudospin_sz_parity_diagonal():
    ops = pseudospin_matrices(6)
    assert np.array_equal(ops.sz.diagonal().real, np.array([1, -1, 1, -1, 1, -1]))


def test_pseudospin_odd_cutoff_rejected():
    with pytest.raises(DomainError):
        pseudospin_matrices(5)
    with pytest.raises(DomainError):
        pseudospin_matrices(0)


# ---------------------------------------------------------------------------
# correlations
# ---------------------------------------------------------------------------


def test_correlation_vacuum_zz():
    dm = density_matrix(SqueezedVacuum(0.0), 4)
    assert correlation_pseudospin(dm, Z_AXIS, Z_AXIS) == pytest.approx(1.0, abs=1e-14)


def test_correlation_matches_closed_form_squeezed():
    state = SqueezedVacuum(0.54)
    dm = density_matrix(state, 64)
    for tu, tv in ((0.3, 1.1), (1.2, -0.4), (math.pi, math.pi / 4)):
        fock = correlation_pseudospin(dm, xz(tu), xz(tv))
        assert fock == pytest.approx(closed_form_correlation(state, tu, tv), abs=1e-6)


def test_correlation_matches_closed_form_fock_pair():
    for n in (1, 2):
        state = FockPairSuperposition(n)
        dm = density_matrix(state, 16)
        for tu, tv in ((0.3, 1.0), (2.2, -0.5)):
            fock = correlation_pseudospin(dm, xz(tu), xz(tv))
            assert fock == pytest.approx(closed_form_correlation(state, tu, tv), abs=1e-12)


def test_correlation_dimension_guard():
    dm = density_matrix(SqueezedVacuum(0.3), 8)
    ops = pseudospin_matrices(4)
    with pytest.raises(DimensionError):
        correlation_pseudospin(dm, X_AXIS, X_AXIS, ops=ops)


def test_pseudospin_settings_validation():
    with pytest.raises(DomainError):
        PseudospinSettings([1, 1, 0], [1, 0, 0], [0, 0, 1], [0, 1, 0])
    settings = PseudospinSettings.coplanar(0.3, 1.0, -0.5, 2.0)
    for vec in (settings.u, settings.up, settings.v, settings.vp):
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)
        assert vec[1] == 0.0


def test_closed_form_correlation_values():
    assert closed_form_correlation(SqueezedVacuum(0.0), math.pi / 2, math.pi / 2) == pytest.approx(0.0)
    assert closed_form_correlation(FockPairSuperposition(1), 0.7, 0.7) == pytest.approx(1.0)
    assert closed_form_correlation(FockPairSuperposition(3), 0.7, 0.2) == pytest.approx(
        math.cos(0.7) * math.cos(0.2)
    )
    r = 1.05
    want = pair_coherent_bessel_coefficient(r)
    got = closed_form_correlation(PairCoherent(r), math.pi / 2, math.pi / 2)
    assert got == pytest.approx(want, rel=1e-12)
    assert want == pytest.approx(
        r * r * (1.0 - bessel_j0(2 * r * r) / bessel_i0(2 * r * r)), rel=1e-13
    )


def test_pair_coherent_sx_discrepancy_report():
    report = pair_coherent_sx_report(1.05, 64)
    # the Bessel-ratio coefficient exceeds 1, impossible for unit-norm dichotomic
    # observables; the Fock expectation stays physical
    assert report.bessel > 1.0
    assert abs(report.fock) <= 1.0
    assert not report.agrees(1e-6)
    # independent Schmidt-sum oracle for Tr[rho Sx Sx] = 2 sum c_{2j} c_{2j+1}
    c = schmidt_coefficients(PairCoherent(1.05), 64).coefficients
    oracle = 2.0 * float(np.sum(c[0:-1:2] * c[1::2]))
    assert report.fock == pytest.approx(oracle, abs=1e-12)


def test_correlation_bounds():
    # |E| <= 1 for unit-norm observables and unit-trace PSD states,
    # up to the truncation deficit
    rng = np.random.default_rng(7)
    states = [SqueezedVacuum(0.9), FockPairSuperposition(2), PairCoherent(1.3)]
    for state in states:
        dm = density_matrix(state, 32)
        for _ in range(4):
            tu, tv = rng.uniform(0.0, 2.0 * math.pi, size=2)
            e_ps = correlation_pseudospin(dm, xz(tu), xz(tv))
            assert abs(e_ps) <= 1.0 + dm.trace_deficit + 1e-12
            probs = sign_binned_closed_form(state, tu, tv)
            assert abs(correlation_tomographic(probs)) <= 1.0 + 1e-12


def test_correlation_tomographic():
    flat = SignBinnedProbs(0.25, 0.25, 0.25, 0.25, 0.0, 0.0)
    assert correlation_tomographic(flat) == 0.0
    perfect = SignBinnedProbs(0.5, 0.0, 0.0, 0.5, 0.0, 0.0)
    assert correlation_tomographic(perfect) == 1.0
    with pytest.raises(NormalizationError):
        correlation_tomographic(SignBinnedProbs(0.5, 0.5, 0.5, 0.5, 0.0, 0.0))


def test_correlation_tomographic_squeezed_closed_form():
    # E = -(2/pi) arctan(b/N), a function of theta1 + theta2 alone
    state = SqueezedVacuum(math.tanh(1.0))
    probs = sign_binned_closed_form(state, 0.2, -0.2)
    want = -(2.0 / math.pi) * math.atan(math.sinh(2.0))
    assert correlation_tomographic(probs) == pytest.approx(want, rel=1e-12)


# ---------------------------------------------------------------------------
# CHSH combination and optimization
# ---------------------------------------------------------------------------


def test_chsh_combination():
    assert chsh(1.0, 1.0, 1.0, 1.0) == 2.0
    assert chsh(0.5, -0.5, 0.25, 0.75) == abs(0.5 - 0.5 + 0.25 - 0.75)


def test_chsh_squeezed_algebraic_reduction():
    # at theta_v = pi/4, theta_u' = -pi/2, theta_v' = -pi/4 the pseudospin
    # combination collapses to sqrt(2) |cos(theta_u) - K|, maximal at
    # theta_u = pi with value sqrt(2) (1 + K), K = 2 lam / (1 + lam^2)
    for lam in (0.2, 0.54, 0.96):
        state = SqueezedVacuum(lam)
        k = 2.0 * lam / (1.0 + lam * lam)
        val = chsh(
            closed_form_correlation(state, math.pi, math.pi / 4),
            closed_form_correlation(state, math.pi, -math.pi / 4),
            closed_form_correlation(state, -math.pi / 2, math.pi / 4),
            closed_form_correlation(state, -math.pi / 2, -math.pi / 4),
        )
        assert val == pytest.approx(math.sqrt(2.0) * (1.0 + k), abs=1e-12)


def test_chsh_squeezed_monotone_in_lambda():
    lams = np.linspace(0.0, 0.999, 25)
    values = []
    for lam in lams:
        state = SqueezedVacuum(float(lam))
        values.append(
            chsh(
                closed_form_correlation(state, math.pi, math.pi / 4),
                closed_form_correlation(state, math.pi, -math.pi / 4),
                closed_form_correlation(state, -math.pi / 2, math.pi / 4),
                closed_form_correlation(state, -math.pi / 2, -math.pi / 4),
            )
        )
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-3)


def test_maximize_chsh_tsirelson():
    _, val = maximize_chsh(lambda t1, t2: math.cos(t1 - t2))
    assert val == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-6)


def test_maximize_chsh_product_form():
    _, val = maximize_chsh(lambda t1, t2: math.cos(t1) * math.cos(t2))
    assert val == pytest.approx(2.0, abs=1e-6)


def test_maximize_chsh_random_product_forms_stay_local():
    # E(t1, t2) = f(t1) g(t2) with |f|, |g| <= 1 admits a local model
    rng = np.random.default_rng(20240817)
    for _ in range(6):
        cf = rng.uniform(-1.0, 1.0, size=3)
        cg = rng.uniform(-1.0, 1.0, size=3)
        cf /= np.sum(np.abs(cf))
        cg /= np.sum(np.abs(cg))

        def f(t, c=cf):
            return c[0] + c[1] * math.cos(t) + c[2] * math.sin(2.0 * t)

        def g(t, c=cg):
            return c[0] + c[1] * math.cos(t) + c[2] * math.sin(2.0 * t)

        _, val = maximize_chsh(lambda t1, t2: f(t1) * g(t2), grid_points=16)
        assert val <= 2.0 + 1e-6


def test_maximize_chsh_rejects_non_finite():
    with pytest.raises(AccuracyError):
        maximize_chsh(lambda t1, t2: math.nan, grid_points=4)


def test_bell_angles_reduced():
    angles = BellAnglesQuadrature(-math.pi, 5.0 * math.pi, 0.5, -0.5)
    red = angles.reduced()
    for v in (red.theta1, red.theta1p, red.theta2, red.theta2p):
        assert 0.0 <= v < 2.0 * math.pi
    with pytest.raises(DomainError):
        BellAnglesQuadrature(math.inf, 0.0, 0.0, 0.0)


def test_bell_angles_pairs_order():
    angles = BellAnglesQuadrature(1.0, 2.0, 3.0, 4.0)
    assert angles.pairs() == ((1.0, 3.0), (1.0, 4.0), (2.0, 3.0), (2.0, 4.0))
