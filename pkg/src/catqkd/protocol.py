"""End-to-end Monte Carlo sessions of the three-state coherent QKD protocol.

Alice sends |+-alpha> key pulses and cat-state check pulses; the channel
composes an optional beamsplitter attack of transmittance T with a loss
beamsplitter of transmittance eps*eta; Bob homodynes a random quadrature
(theta = 0 decodes the key, theta = pi/2 reveals the fringe).  Sifting keeps
key pulses measured at theta = 0 and check pulses measured at theta = pi/2.
The session then estimates the QBER from a disclosed key fraction, fits the
fringe visibility from the check outcomes, and issues a security verdict by
comparing Bob's information 1 - H(QBER) against the leakage bound implied by
the loss-corrected visibility.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .coherent import (
    CoherentKet,
    CoherentOperator,
    beamsplitter,
    ket_to_operator,
    make_cat,
    overlap,
    partial_trace,
)
from .infotheory import binary_entropy, leakage_vs_visibility
from .measurement import (
    VisibilityEstimate,
    estimate_visibility,
    helstrom_error,
    inverse_cdf_table,
    threshold_decide,
)

__all__ = [
    "ConfigError",
    "SessionConfig",
    "PulseRecord",
    "QberEstimate",
    "SecurityReport",
    "SessionTranscript",
    "VERDICT_SECURE",
    "VERDICT_INSECURE",
    "VERDICT_INCONCLUSIVE",
    "MIN_ALPHA",
    "min_alpha_ok",
    "effective_transmittance",
    "bob_marginal",
    "run_session",
    "sift",
    "analyze_security",
]

THETA_KEY = 0.0
THETA_CHECK = math.pi / 2.0

VERDICT_SECURE = "secure_margin"
VERDICT_INSECURE = "insecure"
VERDICT_INCONCLUSIVE = "inconclusive"

# Smallest amplitude with at least one full fringe oscillation inside the
# Gaussian contour: pi / (4 sqrt(2 ln 2)).
MIN_ALPHA = math.pi / (4.0 * math.sqrt(2.0 * math.log(2.0)))

PULSES_CSV_HEADER = ["index", "subset", "alice_bit", "theta", "outcome", "kept", "bob_bit"]

_CONFIG_FIELDS = (
    "n_pulses",
    "alpha",
    "decoy_fraction",
    "cat_parity",
    "channel_transmittance",
    "detector_efficiency",
    "attack_T",
    "qber_disclosure_fraction",
    "rng_seed",
)


class ConfigError(ValueError):
    """Invalid session configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _require_number(value, field_name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field_name, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(field_name, f"must be finite, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class SessionConfig:
    """Parameters of one protocol session.

    ``attack_T`` is the eavesdropper's beamsplitter transmittance; None means
    no eavesdropper.  ``decoy_fraction`` is the probability that a pulse
    carries the cat check state instead of a key bit.
    """

    n_pulses: int
    alpha: float
    decoy_fraction: float = 0.5
    cat_parity: str = "even"
    channel_transmittance: float = 1.0
    detector_efficiency: float = 1.0
    attack_T: Optional[float] = None
    qber_disclosure_fraction: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if isinstance(self.n_pulses, bool) or not isinstance(self.n_pulses, int):
            raise ConfigError("n_pulses", f"expected an integer, got {self.n_pulses!r}")
        if self.n_pulses < 100:
            raise ConfigError("n_pulses", f"must be >= 100, got {self.n_pulses}")
        if _require_number(self.alpha, "alpha") <= 0:
            raise ConfigError("alpha", f"must be > 0, got {self.alpha!r}")
        d = _require_number(self.decoy_fraction, "decoy_fraction")
        if not 0.0 < d < 1.0:
            raise ConfigError("decoy_fraction", f"must lie in (0, 1), got {d!r}")
        if self.cat_parity not in ("even", "odd"):
            raise ConfigError(
                "cat_parity", f"must be 'even' or 'odd', got {self.cat_parity!r}"
            )
        eps = _require_number(self.channel_transmittance, "channel_transmittance")
        if not 0.0 <= eps <= 1.0:
            raise ConfigError(
                "channel_transmittance", f"must lie in [0, 1], got {eps!r}"
            )
        eta = _require_number(self.detector_efficiency, "detector_efficiency")
        if not 0.0 <= eta <= 1.0:
            raise ConfigError("detector_efficiency", f"must lie in [0, 1], got {eta!r}")
        if self.attack_T is not None:
            t = _require_number(self.attack_T, "attack_T")
            if not 0.0 <= t <= 1.0:
                raise ConfigError("attack_T", f"must lie in [0, 1], got {t!r}")
        q = _require_number(self.qber_disclosure_fraction, "qber_disclosure_fraction")
        if not 0.0 < q <= 1.0:
            raise ConfigError(
                "qber_disclosure_fraction", f"must lie in (0, 1], got {q!r}"
            )
        if isinstance(self.rng_seed, bool) or not isinstance(self.rng_seed, int):
            raise ConfigError("rng_seed", f"expected an integer, got {self.rng_seed!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", f"expected a JSON object, got {type(data).__name__}")
        for key in data:
            if key not in _CONFIG_FIELDS:
                raise ConfigError(key, "unknown configuration field")
        for required in ("n_pulses", "alpha"):
            if required not in data:
                raise ConfigError(required, "required field is missing")
        return cls(**data)

    @classmethod
    def from_json_file(cls, path) -> "SessionConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError("config", f"file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in _CONFIG_FIELDS}

    @property
    def mean_amp(self) -> float:
        """Homodyne displacement <alpha> = sqrt(2) |alpha| of a key pulse."""
        return math.sqrt(2.0) * abs(self.alpha)


@dataclass(frozen=True, slots=True)
class PulseRecord:
    index: int
    subset: str  # "key" or "decoy"
    alice_bit: Optional[int]
    theta: float
    outcome: float
    kept_after_sift: bool
    eve_guess: Optional[int]


@dataclass(frozen=True)
class QberEstimate:
    """Empirical bit error rate over the disclosed key sample."""

    q_hat: float
    n_bits: int

    @property
    def std_err(self) -> float:
        if self.n_bits <= 0:
            return math.inf
        return math.sqrt(max(self.q_hat * (1.0 - self.q_hat), 0.0) / self.n_bits)


@dataclass(frozen=True)
class SecurityReport:
    """Information balance and verdict of a session.

    ``secure_margin`` requires i_ab to clear i_ae with both 2-standard-error
    bands separated; overlapping bands give ``inconclusive``.  ``flag``
    carries the reason whenever the verdict was forced (e.g. no usable check
    pulses).
    """

    i_ab_hat: float
    i_ae_bound: float
    margin: float
    verdict: str
    i_ab_stderr: float = math.nan
    i_ae_stderr: float = math.nan
    flag: Optional[str] = None


def min_alpha_ok(alpha: float) -> bool:
    """True iff the fringe shows at least one oscillation inside the Gaussian
    envelope, i.e. alpha > pi/(4 sqrt(2 ln 2)) ~ 0.667."""
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha!r}")
    return alpha > MIN_ALPHA


def effective_transmittance(config: SessionConfig) -> float:
    """Overall intensity transmittance eps * eta * T (T = 1 with no attack)."""
    attack_t = 1.0 if config.attack_T is None else config.attack_T
    return config.channel_transmittance * config.detector_efficiency * attack_t


def bob_marginal(state: CoherentKet, config: SessionConfig) -> CoherentOperator:
    """Bob's received operator: attack beamsplitter (Eve keeps the reflected
    mode), then a loss beamsplitter of transmittance eps*eta (environment
    traced out)."""
    op = ket_to_operator(state)
    if config.attack_T is not None:
        op = partial_trace(beamsplitter(op, config.attack_T), keep="a")
    loss = config.channel_transmittance * config.detector_efficiency
    if loss < 1.0:
        op = partial_trace(beamsplitter(op, loss), keep="a")
    return op


def _eve_error_rate(config: SessionConfig) -> float:
    """Helstrom error of Eve's optimal measurement on her reflected mode."""
    reflected = math.sqrt(1.0 - config.attack_T) * config.alpha
    return helstrom_error(abs(overlap(reflected, -reflected)))


class SessionTranscript:
    """Complete record of one session: per-pulse data, sifted and final keys,
    QBER and visibility estimates, and the security report.

    Per-pulse data is held columnar (numpy arrays); ``pulses`` materializes
    the record view on first access.
    """

    def __init__(
        self,
        config: SessionConfig,
        decoy_mask: np.ndarray,
        alice_bits: np.ndarray,
        theta_idx: np.ndarray,
        outcomes: np.ndarray,
        kept_mask: np.ndarray,
        eve_guesses: np.ndarray,
        sifted_key_alice: str,
        sifted_key_bob: str,
        final_key_alice: str,
        final_key_bob: str,
        qber: QberEstimate,
        visibility: Optional[VisibilityEstimate],
        report: SecurityReport,
    ):
        self.config = config
        self.decoy_mask = decoy_mask
        self.alice_bits = alice_bits
        self.theta_idx = theta_idx
        self.outcomes = outcomes
        self.kept_mask = kept_mask
        self.eve_guesses = eve_guesses
        self.sifted_key_alice = sifted_key_alice
        self.sifted_key_bob = sifted_key_bob
        self.final_key_alice = final_key_alice
        self.final_key_bob = final_key_bob
        self.qber = qber
        self.visibility = visibility
        self.report = report

    @property
    def qber_hat(self) -> float:
        return self.qber.q_hat

    @cached_property
    def pulses(self) -> tuple[PulseRecord, ...]:
        thetas = (THETA_KEY, THETA_CHECK)
        records = []
        for i in range(self.config.n_pulses):
            is_decoy = bool(self.decoy_mask[i])
            guess = int(self.eve_guesses[i])
            records.append(
                PulseRecord(
                    index=i,
                    subset="decoy" if is_decoy else "key",
                    alice_bit=None if is_decoy else int(self.alice_bits[i]),
                    theta=thetas[self.theta_idx[i]],
                    outcome=float(self.outcomes[i]),
                    kept_after_sift=bool(self.kept_mask[i]),
                    eve_guess=None if guess < 0 else guess,
                )
            )
        return tuple(records)

    def summary_dict(self) -> dict:
        vis = self.visibility
        return {
            "config": self.config.to_dict(),
            "n_pulses": self.config.n_pulses,
            "n_sifted": len(self.sifted_key_alice),
            "n_disclosed": self.qber.n_bits,
            "n_decoy_kept": int(np.count_nonzero(self.decoy_mask & (self.theta_idx == 1))),
            "qber_hat": self.qber.q_hat,
            "visibility": None
            if vis is None
            else {
                "v_hat": vis.v_hat,
                "std_err": vis.std_err,
                "n_samples": vis.n_samples,
                "fringe_freq": vis.fringe_freq,
            },
            "report": {
                "i_ab_hat": self.report.i_ab_hat,
                "i_ae_bound": self.report.i_ae_bound,
                "margin": self.report.margin,
                "i_ab_stderr": self.report.i_ab_stderr,
                "i_ae_stderr": self.report.i_ae_stderr,
                "verdict": self.report.verdict,
                "flag": self.report.flag,
            },
            "sifted_key_alice": self.sifted_key_alice,
            "sifted_key_bob": self.sifted_key_bob,
            "final_key_alice": self.final_key_alice,
            "final_key_bob": self.final_key_bob,
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary_dict(), fh, indent=2)
            fh.write("\n")

    def write_pulses_csv(self, path) -> None:
        """Per-pulse CSV; theta prints as ``0`` or ``pi/2``, absent bits as
        empty fields, floats in shortest round-trip form."""
        theta_labels = ("0", "pi/2")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(PULSES_CSV_HEADER)
            for i in range(self.config.n_pulses):
                is_decoy = bool(self.decoy_mask[i])
                kept = bool(self.kept_mask[i])
                outcome = float(self.outcomes[i])
                bob_bit = ""
                if kept and not is_decoy:
                    bob_bit = str(threshold_decide(outcome))
                writer.writerow(
                    [
                        i,
                        "decoy" if is_decoy else "key",
                        "" if is_decoy else str(int(self.alice_bits[i])),
                        theta_labels[self.theta_idx[i]],
                        repr(outcome),
                        "1" if kept else "0",
                        bob_bit,
                    ]
                )


def sift(pulses) -> tuple[list[int], list[int], list[float]]:
    """Setting reconciliation: key pulses measured at theta = 0 become sifted
    bit pairs (Bob decodes by thresholding); check pulses measured at
    theta = pi/2 contribute their outcomes to the fringe sample; everything
    else is discarded."""
    alice_bits: list[int] = []
    bob_bits: list[int] = []
    decoy_outcomes: list[float] = []
    for pulse in pulses:
        if pulse.subset == "key" and pulse.theta == THETA_KEY:
            alice_bits.append(pulse.alice_bit)
            bob_bits.append(threshold_decide(pulse.outcome))
        elif pulse.subset == "decoy" and pulse.theta == THETA_CHECK:
            decoy_outcomes.append(pulse.outcome)
    return alice_bits, bob_bits, decoy_outcomes


def _info_bob(q: float) -> float:
    return 1.0 - binary_entropy(min(max(q, 0.0), 1.0))


def _leakage_clamped(v: float) -> float:
    return leakage_vs_visibility(min(max(v, 0.0), 1.0))


def analyze_security(
    qber: Optional[QberEstimate],
    visibility: Optional[VisibilityEstimate],
    config: SessionConfig,
    flag: Optional[str] = None,
) -> SecurityReport:
    """Information balance from the observed QBER and fringe visibility.

    The leakage bound uses the loss-corrected visibility v_hat / exp(-2 (1 -
    eps*eta) |alpha|^2): locally measurable loss and inefficiency are
    subtracted, while any further visibility deficit stays attributed to the
    eavesdropper.  Standard errors propagate by symmetric finite differences;
    the verdict requires the 2-standard-error bands to separate.
    """
    if qber is None or qber.n_bits == 0 or visibility is None:
        return SecurityReport(
            i_ab_hat=math.nan,
            i_ae_bound=math.nan,
            margin=math.nan,
            verdict=VERDICT_INCONCLUSIVE,
            flag=flag or "missing estimates",
        )

    i_ab = _info_bob(qber.q_hat)
    dq = qber.std_err
    i_ab_err = 0.5 * abs(_info_bob(qber.q_hat + dq) - _info_bob(qber.q_hat - dq))

    correction = math.exp(
        2.0
        * (1.0 - config.channel_transmittance * config.detector_efficiency)
        * config.alpha**2
    )
    v_corr = min(max(visibility.v_hat * correction, 0.0), 1.0)
    dv = visibility.std_err * correction
    i_ae = _leakage_clamped(v_corr)
    i_ae_err = 0.5 * abs(_leakage_clamped(v_corr - dv) - _leakage_clamped(v_corr + dv))

    margin = i_ab - i_ae
    if i_ab - 2.0 * i_ab_err > i_ae + 2.0 * i_ae_err:
        verdict = VERDICT_SECURE
    elif i_ab + 2.0 * i_ab_err < i_ae - 2.0 * i_ae_err:
        verdict = VERDICT_INSECURE
    else:
        verdict = VERDICT_INCONCLUSIVE
    return SecurityReport(
        i_ab_hat=i_ab,
        i_ae_bound=i_ae,
        margin=margin,
        verdict=verdict,
        i_ab_stderr=i_ab_err,
        i_ae_stderr=i_ae_err,
        flag=flag,
    )


def run_session(config: SessionConfig) -> SessionTranscript:
    """Simulate one full protocol session; deterministic for a given seed.

    Pulse subsets, Alice's bits, Bob's theta choices and one inverse-CDF
    uniform per pulse are drawn up front in a fixed order, so the transcript
    is bit-identical across runs with the same config.  Eve's key guesses are
    Bernoulli draws at her Helstrom error rate, which reproduces the outcome
    statistics of her optimal measurement.
    """
    if not min_alpha_ok(config.alpha):
        warnings.warn(
            f"alpha = {config.alpha:g} is below the fringe-resolution threshold "
            f"{MIN_ALPHA:.5f}; visibility estimates will be unreliable",
            stacklevel=2,
        )

    n = config.n_pulses
    rng = np.random.default_rng(config.rng_seed)
    decoy_mask = rng.random(n) < config.decoy_fraction
    alice_bits = rng.integers(0, 2, size=n).astype(np.int8)
    theta_idx = rng.integers(0, 2, size=n).astype(np.uint8)
    u_outcome = rng.random(n)
    attack = config.attack_T is not None
    u_eve = rng.random(n) if attack else None

    key_states = (
        CoherentKet([(1.0, config.alpha)]),
        CoherentKet([(1.0, -config.alpha)]),
    )
    cat = make_cat(config.alpha, config.cat_parity)
    marginals = {
        ("key", 0): bob_marginal(key_states[0], config),
        ("key", 1): bob_marginal(key_states[1], config),
        ("decoy", None): bob_marginal(cat, config),
    }

    outcomes = np.empty(n, dtype=float)
    thetas = (THETA_KEY, THETA_CHECK)
    for (kind, bit), op in marginals.items():
        for t_idx, theta in enumerate(thetas):
            if kind == "key":
                mask = ~decoy_mask & (alice_bits == bit) & (theta_idx == t_idx)
            else:
                mask = decoy_mask & (theta_idx == t_idx)
            if not mask.any():
                continue
            grid, cdf = inverse_cdf_table(op, theta)
            outcomes[mask] = np.interp(u_outcome[mask], cdf, grid)

    eve_guesses = np.full(n, -1, dtype=np.int8)
    if attack:
        flips = u_eve < _eve_error_rate(config)
        key_mask_all = ~decoy_mask
        eve_guesses[key_mask_all] = alice_bits[key_mask_all] ^ flips[key_mask_all]

    kept_key = ~decoy_mask & (theta_idx == 0)
    kept_decoy = decoy_mask & (theta_idx == 1)
    kept_mask = kept_key | kept_decoy

    sift_alice = alice_bits[kept_key]
    sift_bob = (outcomes[kept_key] < 0).astype(np.int8)
    decoy_outcomes = outcomes[kept_decoy]

    # QBER estimation consumes a disclosed random subset of the sifted key.
    n_sift = int(sift_alice.size)
    flag: Optional[str] = None
    if n_sift > 0:
        n_disclose = min(
            n_sift, max(1, round(config.qber_disclosure_fraction * n_sift))
        )
        disclosed = np.zeros(n_sift, dtype=bool)
        disclosed[rng.choice(n_sift, size=n_disclose, replace=False)] = True
        qber = QberEstimate(
            q_hat=float(np.mean(sift_alice[disclosed] != sift_bob[disclosed])),
            n_bits=n_disclose,
        )
        final_alice = sift_alice[~disclosed]
        final_bob = sift_bob[~disclosed]
    else:
        qber = QberEstimate(q_hat=math.nan, n_bits=0)
        final_alice = sift_alice
        final_bob = sift_bob
        flag = "no sifted key bits"

    # Fringe frequency from the calibrated effective transmittance; an
    # attack that removes the signal entirely (T = 0) leaves no fringe to
    # calibrate against, so fall back to the loss-only nominal frequency.
    t_eff = effective_transmittance(config)
    loss_only = config.channel_transmittance * config.detector_efficiency
    fringe_freq = 2.0 * math.sqrt(t_eff if t_eff > 0 else loss_only) * config.mean_amp

    visibility: Optional[VisibilityEstimate] = None
    if decoy_outcomes.size == 0:
        flag = flag or "no check pulses kept; visibility undefined"
    elif fringe_freq <= 0:
        flag = flag or "zero effective transmittance; visibility undefined"
    else:
        try:
            visibility = estimate_visibility(decoy_outcomes, fringe_freq)
        except ValueError as exc:
            flag = flag or f"visibility estimation failed: {exc}"

    report = analyze_security(qber if n_sift else None, visibility, config, flag=flag)

    def key_str(bits: np.ndarray) -> str:
        return "".join("1" if b else "0" for b in bits)

    return SessionTranscript(
        config=config,
        decoy_mask=decoy_mask,
        alice_bits=alice_bits,
        theta_idx=theta_idx,
        outcomes=outcomes,
        kept_mask=kept_mask,
        eve_guesses=eve_guesses,
        sifted_key_alice=key_str(sift_alice),
        sifted_key_bob=key_str(sift_bob),
        final_key_alice=key_str(final_alice),
        final_key_bob=key_str(final_bob),
        qber=qber,
        visibility=visibility,
        report=report,
    )
