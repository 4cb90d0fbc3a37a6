"""Benchmark two-mode states: Schmidt vectors, density matrices, Wigner functions.

Quadrature convention, fixed once and used everywhere in the package: the
vacuum variance of every rotated quadrature X(theta) = q cos(theta) +
p sin(theta) is 1/4, so the single-mode vacuum Wigner function is
W(q, p) = (2/pi) exp(-2 q^2 - 2 p^2).  The squeezed-vacuum formulas are
native to this convention.  The Fock-pair and pair-coherent closed forms
are natively written in units where the vacuum variance is 1/2; they are
mapped here by scaling the arguments by sqrt(2) and multiplying by the
Jacobian (a factor 2 per mode for Wigner functions, sqrt(2) per quadrature
for tomograms).  Sign-binned probabilities and every Bell quantity are
invariant under that rescaling.

All three benchmark states are Schmidt-diagonal, |psi> = sum_n c_n |n>|n>:

    squeezed vacuum      c_n = sqrt(1 - lam^2) lam^n        (lam = tanh s)
    Fock pair (|00>+|nn>)/sqrt(2)   c_k = (delta_k0 + delta_kn)/sqrt(2)
    pair coherent        c_n = r^{2n} / (n! sqrt(I0(2 r^2)))

Density matrices are stored truncated at a per-mode cutoff; the probability
mass lost to truncation is reported as ``trace_deficit``, never silently
renormalized away.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError, DimensionError, DomainError, UnsupportedStateError
from .special import bessel_i0, laguerre

HERMITICITY_TOL = 1e-12
DIAGONAL_TOL = 1e-12
TRACE_TOL = 1e-9

#: Default per-mode Fock cutoff for density matrices.
DEFAULT_CUTOFF = 64

#: Default node count for each angular integral of the pair-coherent Wigner.
DEFAULT_ANGULAR_ORDER = 128

_MAX_BLOCK = 1 << 22  # complex workspace cap for chunked evaluations


@dataclass(frozen=True)
class SqueezedVacuum:
    """Two-mode squeezed vacuum with lam = tanh(s) in [0, 1)."""

    lam: float

    def __post_init__(self):
        if not (0.0 <= self.lam < 1.0):
            raise DomainError(f"squeezed vacuum requires 0 <= lambda < 1, got {self.lam}")

    @property
    def s(self) -> float:
        """Squeezing parameter s = atanh(lambda)."""
        return math.atanh(self.lam)


@dataclass(frozen=True)
class FockPairSuperposition:
    """The superposition (|00> + |nn>)/sqrt(2) with n >= 1."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DomainError(f"Fock pair superposition requires integer n >= 1, got {self.n}")


@dataclass(frozen=True)
class PairCoherent:
    """Phase-averaged pair of equal-amplitude coherent states, r > 0."""

    r: float

    def __post_init__(self):
        if not (self.r > 0.0 and math.isfinite(self.r)):
            raise DomainError(f"pair-coherent state requires r > 0, got {self.r}")


class DensityMatrix:
    """Truncated two-mode Fock-basis density matrix.

    ``entries`` has shape (cutoff^2, cutoff^2) with flat index
    i = n1 * cutoff + n2 (row-major, kron-compatible).  Construction
    validates hermiticity, nonnegative diagonal, and trace + trace_deficit
    = 1 within fixed tolerances.
    """

    def __init__(self, cutoff: int, entries: np.ndarray, trace_deficit: float):
        entries = np.asarray(entries, dtype=complex)
        dim = cutoff * cutoff
        if entries.shape != (dim, dim):
            raise DimensionError(
                f"entries shape {entries.shape} does not match cutoff {cutoff} (expected {(dim, dim)})"
            )
        defect = _hermiticity_defect(entries)
        if defect > HERMITICITY_TOL:
            raise DomainError(f"density matrix not hermitian: max defect {defect:.3e}")
        diag = entries.diagonal().real
        if diag.min() < -DIAGONAL_TOL:
            raise DomainError(f"density matrix has negative diagonal entry {diag.min():.3e}")
        trace = float(diag.sum())
        if abs(trace + trace_deficit - 1.0) > TRACE_TOL:
            raise DomainError(
                f"trace {trace:.12f} + deficit {trace_deficit:.3e} deviates from 1"
            )
        self.cutoff = int(cutoff)
        self.entries = entries
        self.trace_deficit = float(trace_deficit)
        self.entries.setflags(write=False)

    def trace(self) -> float:
        return float(self.entries.diagonal().real.sum())

    def to_json_dict(self) -> dict:
        """Serialize as {cutoff, entries: [(i, j, re, im), ...], trace_deficit}.

        Only nonzero entries are written; the full matrix is recovered by
        zero-filling.
        """
        i_idx, j_idx = np.nonzero(self.entries)
        vals = self.entries[i_idx, j_idx]
        quads = [
            [int(i), int(j), float(v.real), float(v.imag)]
            for i, j, v in zip(i_idx, j_idx, vals)
        ]
        return {
            "cutoff": self.cutoff,
            "entries": quads,
            "trace_deficit": self.trace_deficit,
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "DensityMatrix":
        cutoff = int(payload["cutoff"])
        dim = cutoff * cutoff
        entries = np.zeros((dim, dim), dtype=complex)
        for i, j, re, im in payload["entries"]:
            entries[int(i), int(j)] = complex(re, im)
        return cls(cutoff, entries, float(payload["trace_deficit"]))

    def save(self, path: str) -> None:
        """Atomic JSON write (temp file + rename)."""
        payload = json.dumps(self.to_json_dict())
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path: str) -> "DensityMatrix":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class ExplicitFock:
    """A generic two-mode state given directly by its Fock density matrix."""

    dm: DensityMatrix


TwoModeState = Union[SqueezedVacuum, FockPairSuperposition, PairCoherent, ExplicitFock]


@dataclass(frozen=True)
class SchmidtVector:
    """Real Schmidt coefficients c_n of |psi> = sum_n c_n |n>|n>."""

    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "coefficients", coeffs)
        total = float(np.sum(coeffs**2))
        if total > 1.0 + 1e-12:
            raise DomainError(f"Schmidt weights sum to {total} > 1")
        coeffs.setflags(write=False)

    @property
    def deficit(self) -> float:
        """Probability mass beyond the truncation, 1 - sum c_n^2."""
        return max(0.0, 1.0 - float(np.sum(self.coefficients**2)))


def _hermiticity_defect(entries: np.ndarray, block: int = 256) -> float:
    """max |rho - rho^dagger| computed in row blocks to bound peak memory."""
    worst = 0.0
    n = entries.shape[0]
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = entries[start:stop, :] - entries[:, start:stop].conj().T
        worst = max(worst, float(np.abs(diff).max()))
    return worst


def schmidt_coefficients(state: TwoModeState, cutoff: int = DEFAULT_CUTOFF) -> SchmidtVector:
    """Schmidt coefficients of a benchmark state, truncated at ``cutoff``."""
    if cutoff < 2:
        raise DomainError(f"cutoff must be >= 2, got {cutoff}")
    if isinstance(state, SqueezedVacuum):
        n = np.arange(cutoff)
        coeffs = math.sqrt(1.0 - state.lam**2) * state.lam**n
        return SchmidtVector(coeffs)
    if isinstance(state, FockPairSuperposition):
        coeffs = np.zeros(cutoff)
        coeffs[0] = 1.0 / math.sqrt(2.0)
        if state.n < cutoff:
            coeffs[state.n] = 1.0 / math.sqrt(2.0)
        return SchmidtVector(coeffs)
    if isinstance(state, PairCoherent):
        norm = math.sqrt(bessel_i0(2.0 * state.r**2))
        coeffs = np.empty(cutoff)
        term = 1.0
        coeffs[0] = term
        for n in range(1, cutoff):
            term *= state.r**2 / n
            coeffs[n] = term
        return SchmidtVector(coeffs / norm)
    raise UnsupportedStateError(
        f"schmidt_coefficients needs a pure benchmark state, got {type(state).__name__}"
    )


def density_matrix(state: TwoModeState, cutoff: int = DEFAULT_CUTOFF) -> DensityMatrix:
    """Truncated |psi><psi| of a benchmark state (or pass-through for ExplicitFock)."""
    if isinstance(state, ExplicitFock):
        if state.dm.cutoff != cutoff:
            raise DimensionError(
                f"explicit density matrix has cutoff {state.dm.cutoff}, requested {cutoff}"
            )
        return state.dm
    schmidt = schmidt_coefficients(state, cutoff)
    psi = np.zeros(cutoff * cutoff)
    idx = np.arange(cutoff)
    psi[idx * cutoff + idx] = schmidt.coefficients
    entries = np.outer(psi, psi).astype(complex)
    return DensityMatrix(cutoff, entries, schmidt.deficit)


def partial_trace(dm: DensityMatrix, keep_mode: int = 0) -> np.ndarray:
    """Single-mode reduced density matrix (plain cutoff x cutoff array)."""
    n = dm.cutoff
    rho4 = dm.entries.reshape(n, n, n, n)
    if keep_mode == 0:
        return np.einsum("abcb->ac", rho4)
    if keep_mode == 1:
        return np.einsum("abad->bd", rho4)
    raise DomainError(f"keep_mode must be 0 or 1, got {keep_mode}")


# ---------------------------------------------------------------------------
# Wigner functions
# ---------------------------------------------------------------------------


def wigner(state, q1, p1, q2, p2, *, angular_order: int = DEFAULT_ANGULAR_ORDER):
    """Two-mode Wigner function W(q1, p1, q2, p2), normalized to 1.

    Accepts scalars or broadcastable arrays.  For the pair-coherent state
    the two angular integrals are evaluated with a periodic trapezoid rule
    of ``angular_order`` nodes each (>= 16).
    """
    if isinstance(state, SqueezedVacuum):
        return _wigner_squeezed_vacuum(state.s, q1, p1, q2, p2)
    if isinstance(state, FockPairSuperposition):
        return _wigner_fock_pair(state.n, q1, p1, q2, p2)
    if isinstance(state, PairCoherent):
        return _wigner_pair_coherent(state.r, q1, p1, q2, p2, angular_order)
    raise UnsupportedStateError(
        f"wigner is defined for the benchmark states, got {type(state).__name__}"
    )


def _wigner_squeezed_vacuum(s, q1, p1, q2, p2):
    em, ep = math.exp(-2.0 * s), math.exp(2.0 * s)
    q1, p1, q2, p2 = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (q1, p1, q2, p2))
    )
    val = (4.0 / math.pi**2) * np.exp(
        -em * ((q1 - q2) ** 2 + (p1 + p2) ** 2) - ep * ((q1 + q2) ** 2 + (p1 - p2) ** 2)
    )
    return float(val) if val.ndim == 0 else val


def _wigner_fock_pair(n, q1, p1, q2, p2):
    q1, p1, q2, p2 = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (q1, p1, q2, p2))
    )
    z = (q1 - 1j * p1) * (q2 - 1j * p2)
    cross = 2.0 * (4.0**n / math.factorial(n)) * (z**n).real
    lag = laguerre(n, 4.0 * (q1**2 + p1**2)) * laguerre(n, 4.0 * (q2**2 + p2**2))
    gauss = np.exp(-2.0 * (q1**2 + p1**2 + q2**2 + p2**2))
    val = (2.0 / math.pi**2) * (1.0 + cross + lag) * gauss
    return float(val) if val.ndim == 0 else val


def _wigner_pair_coherent(r, q1, p1, q2, p2, order):
    if order < 16:
        raise ConfigError(
            f"pair-coherent Wigner needs angular quadrature order >= 16, got {order}"
        )
    q1, p1, q2, p2 = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (q1, p1, q2, p2))
    )
    shape = q1.shape
    flat = [np.ravel(v) for v in (q1, p1, q2, p2)]
    npts = flat[0].size

    phi = np.arange(order) * (2.0 * math.pi / order)
    weight = (2.0 * math.pi / order) ** 2
    circ = np.exp(-2.0 * r * r * np.cos(phi[:, None] - phi[None, :])).astype(complex)
    eip = np.exp(1j * phi)
    eim = eip.conj()

    prefactor = 1.0 / (math.pi**4 * bessel_i0(2.0 * r * r))
    out = np.empty(npts)
    chunk = max(1, _MAX_BLOCK // order)
    for start in range(0, npts, chunk):
        stop = min(start + chunk, npts)
        a1 = flat[0][start:stop] - 1j * flat[1][start:stop]  # q1 - i p1
        a2 = flat[2][start:stop] - 1j * flat[3][start:stop]  # q2 - i p2
        f = np.exp(2.0 * r * (a1[:, None] * eip[None, :] + a2[:, None] * eim[None, :]))
        g = np.exp(
            2.0 * r * (a1.conj()[:, None] * eim[None, :] + a2.conj()[:, None] * eip[None, :])
        )
        angular = np.einsum("pj,pj->p", f @ circ, g) * weight
        gauss = np.exp(
            -2.0
            * (
                flat[0][start:stop] ** 2
                + flat[1][start:stop] ** 2
                + flat[2][start:stop] ** 2
                + flat[3][start:stop] ** 2
            )
        )
        out[start:stop] = prefactor * angular.real * gauss
    out = out.reshape(shape)
    return float(out) if out.ndim == 0 else out
