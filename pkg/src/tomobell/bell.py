"""CHSH functionals in the tomographic and pseudospin formulations.

Both formulations share the same combination

    B = | E(a, b) + E(a, b') + E(a', b) - E(a', b') |,

with E either the sign-binned expectation w_pp - w_pm - w_mp + w_mm or the
pseudospin correlation Tr[rho (u . S^(1)) (v . S^(2))].

The pair-coherent Bessel-ratio coefficient c(r) = r^2 (1 -
J0(2 r^2)/I0(2 r^2)) exceeds 1 for r near 1.05, which is impossible for
unit-norm dichotomic observables; ``pair_coherent_sx_report`` exposes it
side by side with the Fock-basis value Tr[rho Sx Sx] so the discrepancy is
reported rather than silently resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from . import states as st
from .errors import AccuracyError, DimensionError, DomainError, UnsupportedStateError
from .special import bessel_i0, bessel_j0

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BellAnglesQuadrature:
    """Four homodyne measurement settings (theta1, theta1p, theta2, theta2p)."""

    theta1: float
    theta1p: float
    theta2: float
    theta2p: float

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if not math.isfinite(v):
                raise DomainError(f"Bell angle {name} must be finite, got {v}")

    def reduced(self) -> "BellAnglesQuadrature":
        """Angles reduced mod 2 pi for reporting."""
        return BellAnglesQuadrature(
            self.theta1 % TWO_PI,
            self.theta1p % TWO_PI,
            self.theta2 % TWO_PI,
            self.theta2p % TWO_PI,
        )

    def pairs(self):
        """The four (theta1, theta2) settings in CHSH order (ab, ab', a'b, a'b')."""
        return (
            (self.theta1, self.theta2),
            (self.theta1, self.theta2p),
            (self.theta1p, self.theta2),
            (self.theta1p, self.theta2p),
        )


def _unit_vector(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise DimensionError(f"{name} must be a 3-vector, got shape {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise DomainError(f"{name} must have unit norm, |{name}| = {np.linalg.norm(v)}")
    return v


@dataclass(frozen=True)
class PseudospinSettings:
    """Four unit vectors in R^3 for the pseudospin CHSH test."""

    u: np.ndarray
    up: np.ndarray
    v: np.ndarray
    vp: np.ndarray

    def __post_init__(self):
        for name in ("u", "up", "v", "vp"):
            object.__setattr__(self, name, _unit_vector(getattr(self, name), name))

    @classmethod
    def coplanar(cls, theta_u, theta_up, theta_v, theta_vp) -> "PseudospinSettings":
        """Vectors in the x-z plane; theta is the angle from the z axis."""
        return cls(
            _xz_vector(theta_u), _xz_vector(theta_up), _xz_vector(theta_v), _xz_vector(theta_vp)
        )


def _xz_vector(theta: float) -> np.ndarray:
    return np.array([math.sin(theta), 0.0, math.cos(theta)])


@dataclass(frozen=True)
class PseudospinOps:
    """Per-mode pseudospin matrices on an even Fock truncation."""

    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    cutoff: int

    def dotted(self, vec) -> np.ndarray:
        """The matrix vec . S for a unit 3-vector."""
        vec = _unit_vector(vec, "direction")
        return vec[0] * self.sx + vec[1] * self.sy + vec[2] * self.sz


@lru_cache(maxsize=16)
def pseudospin_matrices(cutoff: int) -> PseudospinOps:
    """Pseudospin operators Sx, Sy, Sz truncated at an even cutoff.

    Sx = sum |2n><2n+1| + h.c., Sy = -i sum (|2n><2n+1| - h.c.),
    Sz = sum (-1)^n |n><n|.  Even cutoffs keep the (2n, 2n+1) pairing
    intact, so Sx^2 = Sy^2 = Sz^2 = 1 and [Sx, Sy] = 2 i Sz hold exactly
    on the truncated space.
    """
    if cutoff < 2 or cutoff % 2 != 0:
        raise DomainError(f"pseudospin operators need an even cutoff >= 2, got {cutoff}")
    sx = np.zeros((cutoff, cutoff), dtype=complex)
    sy = np.zeros((cutoff, cutoff), dtype=complex)
    for n in range(0, cutoff - 1, 2):
        sx[n, n + 1] = sx[n + 1, n] = 1.0
        sy[n, n + 1] = -1j
        sy[n + 1, n] = 1j
    sz = np.diag((-1.0 + 0j) ** np.arange(cutoff))
    for m in (sx, sy, sz):
        m.setflags(write=False)
    return PseudospinOps(sx, sy, sz, cutoff)


def correlation_pseudospin(rho: st.DensityMatrix, u, v, ops: PseudospinOps | None = None) -> float:
    """E(u, v) = Tr[rho (u . S^(1)) (v . S^(2))] on the truncated Fock space."""
    if ops is None:
        ops = pseudospin_matrices(rho.cutoff)
    if ops.cutoff != rho.cutoff:
        raise DimensionError(
            f"operator cutoff {ops.cutoff} does not match density matrix cutoff {rho.cutoff}"
        )
    a = ops.dotted(u)
    b = ops.dotted(v)
    n = rho.cutoff
    rho4 = rho.entries.reshape(n, n, n, n)
    # Tr[rho (A x B)] = sum rho[(n1 n2), (m1 m2)] A[m1, n1] B[m2, n2]
    partial = np.einsum("abcd,ca->bd", rho4, a)
    val = complex(np.einsum("bd,db->", partial, b))
    if abs(val.imag) > 1e-10:
        raise AccuracyError(f"pseudospin correlation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def closed_form_correlation(state, theta_u: float, theta_v: float) -> float:
    """Coplanar pseudospin correlation closed forms of the benchmark states.

    Squeezed vacuum:  cos tu cos tv + (2 lam / (1 + lam^2)) sin tu sin tv.
    Fock pair:        cos(tu - tv) for n = 1, cos tu cos tv for n > 1.
    Pair coherent:    cos tu cos tv + r^2 (1 - J0(2 r^2)/I0(2 r^2))
                      sin tu sin tv; see pair_coherent_sx_report for its
                      Fock-basis check.
    """
    cu, su = math.cos(theta_u), math.sin(theta_u)
    cv, sv = math.cos(theta_v), math.sin(theta_v)
    if isinstance(state, st.SqueezedVacuum):
        k = 2.0 * state.lam / (1.0 + state.lam**2)
        return cu * cv + k * su * sv
    if isinstance(state, st.FockPairSuperposition):
        if state.n == 1:
            return math.cos(theta_u - theta_v)
        return cu * cv
    if isinstance(state, st.PairCoherent):
        return cu * cv + pair_coherent_bessel_coefficient(state.r) * su * sv
    raise UnsupportedStateError(
        f"no closed-form correlation for {type(state).__name__}"
    )


def pair_coherent_bessel_coefficient(r: float) -> float:
    """The Bessel-ratio x-x coefficient c(r) = r^2 (1 - J0/I0)(2 r^2)."""
    x = 2.0 * r * r
    return r * r * (1.0 - bessel_j0(x) / bessel_i0(x))


@dataclass(frozen=True)
class PairCoherentSxReport:
    """Side-by-side values of the Bessel-ratio c(r) and the Fock-basis oracle."""

    r: float
    cutoff: int
    bessel: float
    fock: float

    @property
    def difference(self) -> float:
        return self.bessel - self.fock

    def agrees(self, tol: float = 1e-6) -> bool:
        return abs(self.difference) <= tol


def pair_coherent_sx_report(r: float, cutoff: int = 64) -> PairCoherentSxReport:
    """Compare the Bessel-ratio c(r) with Tr[rho Sx Sx] from the density matrix."""
    dm = st.density_matrix(st.PairCoherent(r), cutoff)
    x_axis = np.array([1.0, 0.0, 0.0])
    fock = correlation_pseudospin(dm, x_axis, x_axis)
    return PairCoherentSxReport(r, cutoff, pair_coherent_bessel_coefficient(r), fock)


def correlation_tomographic(probs) -> float:
    """E = w_pp - w_pm - w_mp + w_mm from validated sign-binned probabilities."""
    probs.validate()
    return probs.w_pp - probs.w_pm - probs.w_mp + probs.w_mm


def chsh(e_ab: float, e_abp: float, e_apb: float, e_apbp: float) -> float:
    """The CHSH combination |E(a,b) + E(a,b') + E(a',b) - E(a',b')|."""
    return abs(e_ab + e_abp + e_apb - e_apbp)


def maximize_chsh(
    correlation,
    *,
    grid_points: int = 24,
    refine: bool = True,
    xatol: float = 1e-9,
    fatol: float = 1e-13,
    max_iter: int = 4000,
):
    """Maximize the CHSH value over four angles for E(theta1, theta2).

    A coarse deterministic search tabulates E on a ``grid_points``^2 angle
    grid (so the full grid_points^4 CHSH lattice costs only grid_points^2
    correlation evaluations) and the best cell seeds a Nelder-Mead
    refinement.  Returns (BellAnglesQuadrature, value).
    """
    thetas = np.arange(grid_points) * (TWO_PI / grid_points)
    table = np.empty((grid_points, grid_points))
    for i, t1 in enumerate(thetas):
        for j, t2 in enumerate(thetas):
            table[i, j] = correlation(t1, t2)
    if not np.all(np.isfinite(table)):
        raise AccuracyError("correlation returned non-finite values on the search grid")

    combo = (
        table[:, None, :, None]
        + table[:, None, None, :]
        + table[None, :, :, None]
        - table[None, :, None, :]
    )
    flat = np.abs(combo).ravel()
    best = int(np.argmax(flat))
    i, j, k, l = np.unravel_index(best, combo.shape)
    start = np.array([thetas[i], thetas[j], thetas[k], thetas[l]])
    best_val = float(flat[best])

    if refine:

        def negative(x):
            return -chsh(
                correlation(x[0], x[2]),
                correlation(x[0], x[3]),
                correlation(x[1], x[2]),
                correlation(x[1], x[3]),
            )

        res = minimize(
            negative,
            start,
            method="Nelder-Mead",
            options={
                "xatol": xatol,
                "fatol": fatol,
                "maxiter": max_iter,
                "maxfev": max_iter,
            },
        )
        if -res.fun >= best_val:
            best_val = float(-res.fun)
            start = np.asarray(res.x, dtype=float)

    angles = BellAnglesQuadrature(start[0], start[1], start[2], start[3])
    return angles, best_val
