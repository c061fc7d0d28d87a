"""Entropy, Bayes mutual information and the security trade-off curves.

The information exclusion bound I(A) + I(B) <= log2(N) for complementary
observables is what limits the sum of Bob's and Eve's knowledge to one bit
in a qubit-sized signal space.  This module provides the generic Bayes
mutual information over a discrete channel, the bound checker, and the two
curve families: information versus Bob's error probability (symmetric
attack) and information versus fringe visibility (beamsplitter attack on
cat states).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measurement import gaussian_error_prob

__all__ = [
    "DiscreteChannel",
    "InfoMetrics",
    "binary_entropy",
    "mutual_information",
    "exclusion_check",
    "tradeoff_fig1",
    "leakage_vs_visibility",
    "bob_info_vs_visibility",
]

_TOL = 1e-12


def binary_entropy(q: float) -> float:
    """H(q) = -q log2 q - (1-q) log2 (1-q) in bits, with 0 log 0 := 0."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {q!r}")
    if q == 0.0 or q == 1.0:
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


@dataclass(frozen=True)
class DiscreteChannel:
    """Prior distribution p_i plus conditional outcome matrix P(j|i)."""

    priors: np.ndarray
    conditionals: np.ndarray

    def __init__(self, priors, conditionals):
        priors = np.asarray(priors, dtype=float)
        conditionals = np.asarray(conditionals, dtype=float)
        if priors.ndim != 1 or conditionals.ndim != 2:
            raise ValueError("priors must be a vector, conditionals a matrix")
        if conditionals.shape[0] != priors.size:
            raise ValueError("one conditional row per prior is required")
        if np.any(priors < -_TOL) or np.any(conditionals < -_TOL):
            raise ValueError("probabilities must be nonnegative")
        if abs(priors.sum() - 1.0) > _TOL:
            raise ValueError(f"priors sum to {priors.sum()!r}, expected 1")
        row_sums = conditionals.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > _TOL):
            raise ValueError("conditional rows must each sum to 1")
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "conditionals", conditionals)


def _entropy_bits(p: np.ndarray) -> float:
    mask = p > 0
    return float(-(p[mask] * np.log2(p[mask])).sum())


def mutual_information(channel: DiscreteChannel) -> float:
    """Shannon mutual information H(input) - H(input|outcome) in bits.

    Computed through the Bayes posterior Q(i|j) = P(j|i) p_i / q_j; for a
    binary symmetric channel with uniform priors this reduces to 1 - H(q).
    """
    priors = channel.priors
    joint = priors[:, None] * channel.conditionals
    outcome = joint.sum(axis=0)
    h_final = 0.0
    for j in range(outcome.size):
        if outcome[j] <= 0:
            continue
        h_final += outcome[j] * _entropy_bits(joint[:, j] / outcome[j])
    return max(0.0, _entropy_bits(priors) - h_final)


def exclusion_check(i_a: float, i_b: float, dim: int) -> bool:
    """True iff i_a + i_b <= log2(dim) within 1e-12 slack."""
    if i_a < 0 or i_b < 0:
        raise ValueError("information gains must be nonnegative")
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim!r}")
    return i_a + i_b <= math.log2(dim) + _TOL


@dataclass(frozen=True)
class InfoMetrics:
    """One point of the security trade-off: error rates, informations, gains."""

    q_e_bob: float
    q_e_eve: float
    i_ab: float
    i_ae: float
    g_bob: float
    g_eve: float

    @property
    def info_sum(self) -> float:
        return self.i_ab + self.i_ae


def tradeoff_fig1(n_points: int) -> list[InfoMetrics]:
    """Trade-off curve of the optimal symmetric attack on a single qubit.

    Sweeps Bob's error probability over [0, 1/2]; the visibility V = 1 - 2Q
    fixes Eve's error (1 - sqrt(1 - V^2))/2, the informations 1 - H(.), and
    the gains (G_B, G_E) = (V, sqrt(1 - V^2)) on the unit circle.
    """
    if n_points < 2:
        raise ValueError(f"need at least 2 grid points, got {n_points}")
    points = []
    for q_bob in np.linspace(0.0, 0.5, n_points):
        visibility = 1.0 - 2.0 * q_bob
        g_eve = math.sqrt(max(0.0, 1.0 - visibility * visibility))
        q_eve = 0.5 * (1.0 - g_eve)
        points.append(
            InfoMetrics(
                q_e_bob=float(q_bob),
                q_e_eve=q_eve,
                i_ab=1.0 - binary_entropy(float(q_bob)),
                i_ae=1.0 - binary_entropy(q_eve),
                g_bob=visibility,
                g_eve=g_eve,
            )
        )
    return points


def leakage_vs_visibility(v_b: float) -> float:
    """Upper bound on Eve's information given an observed fringe visibility.

    I_AE = 1 - H((1 - sqrt(1 - V_B^2))/2): the beamsplitter attack saturates
    the distinguishability-visibility complementarity, so a pristine fringe
    (V_B = 1) certifies zero leakage and a destroyed fringe leaks everything.
    """
    if not 0.0 <= v_b <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v_b!r}")
    distinguishability = math.sqrt(max(0.0, 1.0 - v_b * v_b))
    return 1.0 - binary_entropy(0.5 * (1.0 - distinguishability))


def bob_info_vs_visibility(v_b: float, mean_photon: float) -> float:
    """Bob's information on the sifted key at an observed visibility.

    Inverts V_B = exp(-2 (1-T) |alpha|^2) for the tapped transmittance T and
    evaluates 1 - H of his Gaussian-tail error at the attenuated amplitude.
    Only v_b >= kappa = exp(-2 |alpha|^2) is physical (T >= 0); at v_b =
    kappa Bob receives vacuum and his information vanishes.
    """
    if mean_photon <= 0:
        raise ValueError(f"mean photon number must be > 0, got {mean_photon!r}")
    kappa = math.exp(-2.0 * mean_photon)
    if v_b > 1.0 + _TOL or v_b < kappa - _TOL:
        raise ValueError(
            f"visibility {v_b!r} outside the physical range [{kappa:.6g}, 1]"
        )
    v_b = min(max(v_b, kappa), 1.0)
    transmittance = 1.0 + math.log(v_b) / (2.0 * mean_photon)
    transmittance = min(max(transmittance, 0.0), 1.0)
    mean_amp = math.sqrt(2.0 * transmittance * mean_photon)
    return 1.0 - binary_entropy(gaussian_error_prob(mean_amp))
