"""Exact algebra of finite coherent-state superpositions.

A pure state is stored as an explicit superposition ``sum_i c_i |a_i>`` of
coherent states and an operator as a sum of dyads ``sum_k c_k |a_k><b_k|``.
Every inner product reduces to the analytic coherent-state overlap

    <a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a)*b),

so normalization, beamsplitter evolution, partial traces and homodyne
quadrature densities all come out in closed form.  No Fock-space truncation
is ever needed: the two-dimensional span of {|alpha>, |-alpha>} that carries
the key and the cat states is handled exactly.

Conventions: a beamsplitter of transmittance T maps ``|a>|0> ->
|sqrt(T) a> |-sqrt(1-T) a>`` (intensity convention, T + R = 1) and the
quadrature X(theta) has vacuum variance 1/2, so a coherent state |alpha>
with real alpha peaks at <alpha> = sqrt(2)*alpha for theta = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CoherentKet",
    "CoherentOperator",
    "TwoModeCoherentOperator",
    "ProductCoherentKet",
    "overlap",
    "make_cat",
    "normalize",
    "ket_to_operator",
    "beamsplitter",
    "partial_trace",
    "quadrature_wavefunction",
    "quadrature_pdf",
    "default_grid",
    "gram_matrix",
    "wcp_states",
]

_SQRT2 = math.sqrt(2.0)
_NORM_FLOOR = 1e-30

GRID_POINTS = 4096
GRID_PADDING = 6.0


def _as_complex(z, what: str) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{what} must be finite, got {z!r}")
    return z


def _abs2(z: complex) -> float:
    return z.real * z.real + z.imag * z.imag


def overlap(a, b) -> complex:
    """Coherent-state inner product <a|b>.

    Returns exactly 1 for a == b (the exponent cancels identically), and
    |<a|b>| <= 1 always.  The key-state overlap kappa = |<alpha|-alpha>| =
    exp(-2 |alpha|^2) is a special case.
    """
    a = _as_complex(a, "amplitude")
    b = _as_complex(b, "amplitude")
    return complex(np.exp(-0.5 * _abs2(a) - 0.5 * _abs2(b) + a.conjugate() * b))


@dataclass(frozen=True)
class CoherentKet:
    """Finite superposition of single-mode coherent states.

    ``terms`` is an ordered tuple of (coefficient, amplitude) pairs; the ket
    is ``sum_i c_i |a_i>``.  Terms are kept exact and never merged.
    """

    terms: tuple[tuple[complex, complex], ...]

    def __init__(self, terms: Iterable[tuple[complex, complex]]):
        cleaned = tuple(
            (_as_complex(c, "coefficient"), _as_complex(a, "amplitude"))
            for c, a in terms
        )
        if not cleaned:
            raise ValueError("CoherentKet needs at least one term")
        object.__setattr__(self, "terms", cleaned)

    def norm_sq(self) -> float:
        """Squared norm sum_ij conj(c_i) c_j <a_i|a_j> (real by construction)."""
        total = 0.0 + 0.0j
        for ci, ai in self.terms:
            for cj, aj in self.terms:
                total += ci.conjugate() * cj * overlap(ai, aj)
        return total.real

    def overlap_with(self, other: "CoherentKet") -> complex:
        total = 0.0 + 0.0j
        for ci, ai in self.terms:
            for cj, aj in other.terms:
                total += ci.conjugate() * cj * overlap(ai, aj)
        return total


@dataclass(frozen=True)
class ProductCoherentKet:
    """Multi-mode product superposition; amplitudes are per-mode tuples.

    Used for the weak-coherent-pulse signal set, where each state is a
    two-mode product |alpha>_1 |beta>_2.  Overlaps factor mode by mode.
    """

    terms: tuple[tuple[complex, tuple[complex, ...]], ...]

    def __init__(self, terms: Iterable[tuple[complex, Sequence[complex]]]):
        cleaned = []
        n_modes = None
        for c, amps in terms:
            amps = tuple(_as_complex(a, "amplitude") for a in amps)
            if n_modes is None:
                n_modes = len(amps)
            elif len(amps) != n_modes:
                raise ValueError("all terms must have the same number of modes")
            cleaned.append((_as_complex(c, "coefficient"), amps))
        if not cleaned:
            raise ValueError("ProductCoherentKet needs at least one term")
        object.__setattr__(self, "terms", tuple(cleaned))

    def overlap_with(self, other: "ProductCoherentKet") -> complex:
        total = 0.0 + 0.0j
        for ci, amps_i in self.terms:
            for cj, amps_j in other.terms:
                factor = ci.conjugate() * cj
                for ai, aj in zip(amps_i, amps_j, strict=True):
                    factor *= overlap(ai, aj)
                total += factor
        return total

    def norm_sq(self) -> float:
        return self.overlap_with(self).real


@dataclass(frozen=True)
class CoherentOperator:
    """Operator as a finite sum of coherent dyads c |ket_amp><bra_amp|."""

    dyads: tuple[tuple[complex, complex, complex], ...]

    def __init__(self, dyads: Iterable[tuple[complex, complex, complex]]):
        cleaned = tuple(
            (
                _as_complex(c, "coefficient"),
                _as_complex(k, "amplitude"),
                _as_complex(b, "amplitude"),
            )
            for c, k, b in dyads
        )
        if not cleaned:
            raise ValueError("CoherentOperator needs at least one dyad")
        object.__setattr__(self, "dyads", cleaned)

    def trace(self) -> complex:
        return sum(c * overlap(b, k) for c, k, b in self.dyads)

    def hermiticity_defect(self) -> float:
        """Max residual when matching each dyad against its adjoint partner."""
        worst = 0.0
        for c, k, b in self.dyads:
            best = math.inf
            for c2, k2, b2 in self.dyads:
                residual = max(abs(c2 - c.conjugate()), abs(k2 - b), abs(b2 - k))
                best = min(best, residual)
            worst = max(worst, best)
        return worst

    def max_amplitude(self) -> float:
        return max(max(abs(k), abs(b)) for _, k, b in self.dyads)


@dataclass(frozen=True)
class TwoModeCoherentOperator:
    """Two-mode operator: dyads c |ka>_a |kb>_b <ba|_a <bb|_b."""

    dyads: tuple[tuple[complex, complex, complex, complex, complex], ...]

    def __init__(self, dyads):
        cleaned = tuple(
            tuple(_as_complex(z, "dyad entry") for z in d) for d in dyads
        )
        if not cleaned:
            raise ValueError("TwoModeCoherentOperator needs at least one dyad")
        if any(len(d) != 5 for d in cleaned):
            raise ValueError("two-mode dyads are 5-tuples (c, ka, kb, ba, bb)")
        object.__setattr__(self, "dyads", cleaned)

    def trace(self) -> complex:
        return sum(
            c * overlap(ba, ka) * overlap(bb, kb)
            for c, ka, kb, ba, bb in self.dyads
        )


def make_cat(alpha, parity: str) -> CoherentKet:
    """Normalized cat state (|alpha> + |-alpha>)/sqrt(2(1+kappa)) (``even``)
    or (|alpha> - |-alpha>)/sqrt(2(1-kappa)) (``odd``).

    The even cat is the key-check state transmitted in the conjugate basis;
    kappa = exp(-2 |alpha|^2).  Odd parity with alpha = 0 is degenerate
    (zero norm) and rejected.
    """
    alpha = _as_complex(alpha, "alpha")
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    sign = 1.0 if parity == "even" else -1.0
    raw = CoherentKet([(1.0, alpha), (sign, -alpha)])
    if parity == "odd" and raw.norm_sq() <= _NORM_FLOOR:
        raise ValueError("odd cat is degenerate at alpha = 0")
    return normalize(raw)


def normalize(ket: CoherentKet) -> CoherentKet:
    """Rescale to unit norm; coefficient ratios are preserved."""
    nsq = ket.norm_sq()
    if nsq <= _NORM_FLOOR:
        raise ValueError(f"cannot normalize a ket with squared norm {nsq:g}")
    scale = 1.0 / math.sqrt(nsq)
    return CoherentKet([(c * scale, a) for c, a in ket.terms])


def ket_to_operator(ket: CoherentKet) -> CoherentOperator:
    """Outer product |ket><ket|; n terms give n^2 dyads."""
    return CoherentOperator(
        [
            (ci * cj.conjugate(), ai, aj)
            for ci, ai in ket.terms
            for cj, aj in ket.terms
        ]
    )


def beamsplitter(op: CoherentOperator, transmittance: float) -> TwoModeCoherentOperator:
    """Mix mode a with a vacuum ancilla on a beamsplitter of transmittance T.

    Each dyad amplitude a maps to (sqrt(T) a, -sqrt(1-T) a) on the
    transmitted/reflected modes; coefficients are untouched, so the total
    trace is preserved.
    """
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {transmittance!r}")
    t = math.sqrt(transmittance)
    r = -math.sqrt(1.0 - transmittance)
    return TwoModeCoherentOperator(
        [(c, t * k, r * k, t * b, r * b) for c, k, b in op.dyads]
    )


def partial_trace(op: TwoModeCoherentOperator, keep: str) -> CoherentOperator:
    """Trace out one mode: tr |k><b| = <b|k> folds into the coefficient."""
    if keep not in ("a", "b"):
        raise ValueError(f"keep must be 'a' or 'b', got {keep!r}")
    dyads = []
    for c, ka, kb, ba, bb in op.dyads:
        if keep == "a":
            dyads.append((c * overlap(bb, kb), ka, ba))
        else:
            dyads.append((c * overlap(ba, ka), kb, bb))
    return CoherentOperator(dyads)


def quadrature_wavefunction(amplitude, theta: float, q):
    """<q_theta|amplitude> for the rotated quadrature X(theta).

    psi(q) = pi^(-1/4) exp(-q^2/2 + sqrt(2) a' q - a'^2/2 - |a|^2/2) with
    a' = amplitude * exp(-i theta).  Vectorized over q.
    """
    amplitude = _as_complex(amplitude, "amplitude")
    rotated = amplitude * np.exp(-1j * theta)
    q = np.asarray(q, dtype=float)
    return np.pi ** -0.25 * np.exp(
        -0.5 * q * q
        + _SQRT2 * rotated * q
        - 0.5 * rotated * rotated
        - 0.5 * _abs2(amplitude)
    )


def quadrature_pdf(op: CoherentOperator, theta: float, q):
    """Probability density of measuring X(theta) = q on a unit-trace operator.

    Summed dyad by dyad as c * psi_ket(q) * conj(psi_bra(q)); the imaginary
    residue of a Hermitian operator cancels and tiny negative excursions from
    rounding are clamped to zero.  Accepts a scalar or an array of q values.
    """
    q_arr = np.asarray(q, dtype=float)
    total = np.zeros(q_arr.shape, dtype=complex)
    for c, k, b in op.dyads:
        total += (
            c
            * quadrature_wavefunction(k, theta, q_arr)
            * np.conj(quadrature_wavefunction(b, theta, q_arr))
        )
    density = np.clip(total.real, 0.0, None)
    if np.ndim(q) == 0:
        return float(density)
    return density


def default_grid(op: CoherentOperator, points: int = GRID_POINTS) -> np.ndarray:
    """Quadrature grid spanning +-(sqrt(2) max|amp| + 6); Gaussian tails
    outside are below 1e-15."""
    half_width = _SQRT2 * op.max_amplitude() + GRID_PADDING
    return np.linspace(-half_width, half_width, points)


def gram_matrix(kets: Sequence) -> np.ndarray:
    """Hermitian Gram matrix G[i, j] = <ket_i|ket_j>.

    Accepts any mix of kets exposing ``overlap_with`` with compatible mode
    structure.  For normalized inputs the diagonal is 1 and the smallest
    eigenvalue is strictly positive iff the states are linearly independent.
    """
    n = len(kets)
    gram = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            gram[i, j] = kets[i].overlap_with(kets[j])
    return gram


def wcp_states(alpha) -> list[ProductCoherentKet]:
    """The four weak-coherent-pulse signal states |alpha>_1 |beta>_2 with
    beta in {alpha, -alpha, i alpha, -i alpha}.

    Each is a normalized two-mode product; their Gram matrix quantifies the
    linear independence that opens the multi-photon loophole.
    """
    alpha = _as_complex(alpha, "alpha")
    return [
        ProductCoherentKet([(1.0, (alpha, beta))])
        for beta in (alpha, -alpha, 1j * alpha, -1j * alpha)
    ]
