"""Finitely squeezed square-lattice GKP qubits and their homodyne statistics.

Conventions
-----------
* Position wavefunction of a codeword: a sum of Gaussian peaks
  ``exp(-(q - n sqrt(pi))**2 / (2 sigma1**2))`` at ``n = 2t + L`` weighted by the
  envelope ``exp(-pi sigma2**2 n**2 / 2)``.
* Displacements applied to states (``predisp``, :func:`displace`) are complex
  *quadrature shifts*: ``beta = dq + 1j*dp`` moves q by ``dq`` and p by ``dp``.
  A logical X is therefore ``displace(s, sqrt(pi))``.
* :func:`peak_overlap` works in ladder-operator units, ``mu = (q + 1j*p)/sqrt(2)``.
* Measurement functions take ``sigma`` as the standard deviation of one
  homodyne peak. For a :class:`GkpState` this is ``sigma1/sqrt(2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.special import erf, erfc, ndtr

from .errors import ParameterError, UnsupportedError

SQRT_PI = math.sqrt(math.pi)
HALF_CELL = SQRT_PI / 2
DROPPED_WEIGHT_TOL = 1e-12

__all__ = [
    "SQRT_PI",
    "HALF_CELL",
    "GkpState",
    "DisplacementNoiseModel",
    "MeasurementWindow",
    "MeasurementProbs",
    "DecodedOutcome",
    "choose_t_max",
    "peak_overlap",
    "normalize",
    "state_overlap",
    "cross_width_overlap",
    "displace",
    "logical_z",
    "homodyne_pdf",
    "decode_outcome",
    "bound_probs",
    "upper_bounds",
    "exact_probs",
    "apply_variance_map",
    "sample_homodyne",
    "VARIANCE_CHANNELS",
]


def _dropped_weight(sigma2: float, t_max: int) -> float:
    total = 0.0
    for L in (0, 1):
        t = t_max + 1
        while True:
            terms = [math.exp(-math.pi * sigma2**2 * (2 * s + L) ** 2) for s in (t, -t)]
            total += sum(terms)
            if max(terms) < 1e-300 or t > t_max + 100000:
                break
            t += 1
    return total


def choose_t_max(sigma2: float) -> int:
    """Smallest peak index meeting the dropped-envelope-weight tolerance."""
    if not sigma2 > 0:
        raise ParameterError(f"sigma2 must be positive, got {sigma2!r}")
    t_max = math.ceil(5.0 / (sigma2 * 2 * SQRT_PI)) + 2
    while _dropped_weight(sigma2, t_max) >= DROPPED_WEIGHT_TOL:
        t_max += 1
    return t_max


def peak_overlap(mu_a, mu_b, s):
    """<g_s| D(mu_a)^dag D(mu_b) |g_s> for a Gaussian of amplitude width ``s``.

    ``|g_s>`` has wavefunction ``exp(-x**2/(2 s**2))`` (normalised). Broadcasts.
    """
    mu_a = np.asarray(mu_a, dtype=complex)
    mu_b = np.asarray(mu_b, dtype=complex)
    diff = mu_b - mu_a
    q = math.sqrt(2) * diff.real
    p = math.sqrt(2) * diff.imag
    phase = np.exp(1j * np.imag(np.conj(mu_a) * mu_b))
    return phase * np.exp(-(q**2) / (4 * s**2) - (p**2) * s**2 / 4)


@dataclass(frozen=True)
class GkpState:
    """``scale * D(predisp) (b0 |0~> + b1 |1~>)`` with unit-norm codewords |L~>.

    ``scale`` is the physical normalisation, set by :func:`normalize`.
    """

    b0: complex
    b1: complex
    sigma1: float
    sigma2: float
    predisp: complex = 0j
    t_max: int | None = None
    scale: float = 1.0

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ParameterError("sigma1 and sigma2 must be positive")
        object.__setattr__(self, "predisp", complex(self.predisp))
        if self.t_max is None:
            object.__setattr__(self, "t_max", choose_t_max(self.sigma2))
        elif self.t_max < 1:
            raise ParameterError("t_max must be >= 1")
        if abs(self.b0) == 0 and abs(self.b1) == 0:
            raise ParameterError("logical coefficients are both zero")

    @classmethod
    def logical(cls, L: int, sigma: float, predisp: complex = 0j) -> "GkpState":
        b = (1.0, 0.0) if L == 0 else (0.0, 1.0)
        return normalize(cls(b[0], b[1], sigma, sigma, predisp))

    @classmethod
    def from_coeffs(cls, b0, b1, sigma: float, predisp: complex = 0j, sigma2: float | None = None):
        n = math.sqrt(abs(b0) ** 2 + abs(b1) ** 2)
        return normalize(cls(b0 / n, b1 / n, sigma, sigma if sigma2 is None else sigma2, predisp))

    @property
    def peak_std(self) -> float:
        """Standard deviation of a single peak in the q-homodyne distribution."""
        return self.sigma1 / math.sqrt(2)

    @cached_property
    def _codeword_norms(self) -> tuple[float, float]:
        norms = []
        for L in (0, 1):
            n = 2 * np.arange(-self.t_max, self.t_max + 1) + L
            env = np.exp(-math.pi * self.sigma2**2 * n**2 / 2)
            dq = (n[:, None] - n[None, :]) * SQRT_PI
            gram = np.exp(-(dq**2) / (4 * self.sigma1**2))
            norms.append(1.0 / math.sqrt(float(env @ gram @ env)))
        return norms[0], norms[1]

    @cached_property
    def peaks(self) -> tuple[np.ndarray, np.ndarray]:
        """Peak centres (ladder units) and complex amplitudes of the ket."""
        t = np.arange(-self.t_max, self.t_max + 1)
        n = np.concatenate([2 * t, 2 * t + 1])
        env = np.exp(-math.pi * self.sigma2**2 * n**2 / 2)
        nu0, nu1 = self._codeword_norms
        logical = np.concatenate([np.full(t.size, self.b0 * nu0), np.full(t.size, self.b1 * nu1)])
        qc = n * SQRT_PI
        # D(P) D(mu_n) = exp(i Im(mu_P conj(mu_n))) D(mu_P + mu_n)
        phase = np.exp(1j * self.predisp.imag * qc / 2)
        centres = (qc + complex(self.predisp)) / math.sqrt(2)
        coefs = self.scale * logical * env * phase
        keep = coefs != 0
        return centres[keep], coefs[keep]

    def norm_sq(self) -> float:
        return float(state_overlap(self, self).real)

    def wavefunction(self, x) -> np.ndarray:
        """Position-space wavefunction evaluated at ``x``."""
        x = np.asarray(x, dtype=float)[..., None]
        mu, c = self.peaks
        qb = math.sqrt(2) * mu.real
        pb = math.sqrt(2) * mu.imag
        s = self.sigma1
        amp = (math.pi * s**2) ** -0.25 * np.exp(
            -((x - qb) ** 2) / (2 * s**2) + 1j * pb * x - 0.5j * pb * qb
        )
        return amp @ c


def state_overlap(a: GkpState, b: GkpState) -> complex:
    """<a|b> as an envelope-weighted double sum of peak overlaps."""
    if not math.isclose(a.sigma1, b.sigma1, rel_tol=0, abs_tol=1e-15):
        raise UnsupportedError("overlaps between states of unequal peak width are not supported")
    mu_a, ca = a.peaks
    mu_b, cb = b.peaks
    kern = peak_overlap(mu_a[:, None], mu_b[None, :], a.sigma1)
    return complex(np.conj(ca) @ kern @ cb)


def _packet_overlap(mu_a, sa, mu_b, sb):
    """<g_sa(mu_a)|g_sb(mu_b)> for Gaussian packets of possibly different widths."""
    qa, pa = math.sqrt(2) * mu_a.real, math.sqrt(2) * mu_a.imag
    qb, pb = math.sqrt(2) * mu_b.real, math.sqrt(2) * mu_b.imag
    A = 0.5 / sa**2 + 0.5 / sb**2
    B = qa / sa**2 + qb / sb**2 + 1j * (pb - pa)
    C = -(qa**2) / (2 * sa**2) - qb**2 / (2 * sb**2) + 0.5j * (pa * qa - pb * qb)
    return math.sqrt(2 * sa * sb / (sa**2 + sb**2)) * np.exp(B**2 / (4 * A) + C)


def cross_width_overlap(a: GkpState, b: GkpState) -> complex:
    """<a|b> without the equal-width restriction (used for high-squeezing references)."""
    mu_a, ca = a.peaks
    mu_b, cb = b.peaks
    kern = _packet_overlap(mu_a[:, None], a.sigma1, mu_b[None, :], b.sigma1)
    return complex(np.conj(ca) @ kern @ cb)


def normalize(state: GkpState) -> GkpState:
    """Return the same state rescaled to unit physical norm."""
    unscaled = replace(state, scale=1.0)
    nrm = unscaled.norm_sq()
    if not nrm > 0:
        raise ParameterError("state has zero norm")
    return replace(state, scale=1.0 / math.sqrt(nrm))


def displace(state: GkpState, beta: complex) -> GkpState:
    """Apply D(beta) (quadrature-shift convention), keeping the exact phase."""
    beta = complex(beta)
    if beta == 0:
        return state
    # D(b) D(P) = exp(i Im(b conj(P)) / 2) D(b + P) in quadrature units
    ph = np.exp(0.5j * (beta * np.conj(state.predisp)).imag)
    return replace(state, b0=state.b0 * ph, b1=state.b1 * ph, predisp=state.predisp + beta)


def logical_z(state: GkpState) -> GkpState:
    """Logical Pauli Z: each peak picks up exp(i sqrt(pi) q_peak)."""
    ph = np.exp(1j * SQRT_PI * state.predisp.real)
    return replace(state, b0=state.b0 * ph, b1=-state.b1 * ph)


@dataclass(frozen=True)
class DisplacementNoiseModel:
    """Gaussian random-displacement description of an approximate GKP state."""

    sigma_u: float
    sigma_v: float

    def __post_init__(self):
        if not (self.sigma_u > 0 and self.sigma_v > 0):
            raise ParameterError("displacement deviations must be positive")

    def density(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return np.exp(-(u**2) / (2 * self.sigma_u**2) - v**2 / (2 * self.sigma_v**2)) / (
            2 * math.pi * self.sigma_u * self.sigma_v
        )

    def sample(self, rng: np.random.Generator, size=None):
        return rng.normal(0.0, self.sigma_u, size), rng.normal(0.0, self.sigma_v, size)


@dataclass(frozen=True)
class MeasurementWindow:
    """Rejection half-window ``v`` around each cell boundary."""

    v: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.v < HALF_CELL):
            raise ParameterError(f"window v must lie in [0, sqrt(pi)/2), got {self.v!r}")

    @property
    def accept_halfwidth(self) -> float:
        return HALF_CELL - self.v


class MeasurementProbs(NamedTuple):
    p_c: float
    p_f: float
    p_discard: float

    @property
    def success(self) -> float:
        return self.p_c + self.p_f


class DecodedOutcome(NamedTuple):
    bit: int
    fractional: float
    accepted: bool


def _as_window(window) -> MeasurementWindow:
    return window if isinstance(window, MeasurementWindow) else MeasurementWindow(float(window))


def homodyne_pdf(x, sigma: float, L: int, t_max: int = 10):
    """q-homodyne density of logical state L: equal-weight comb of Gaussians."""
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    x = np.asarray(x, dtype=float)
    k = np.arange(-t_max, t_max + 1)
    mu = (2 * k + L) * SQRT_PI
    z = (x[..., None] - mu) / sigma
    # the common exp(-sigma^2/2) weight cancels against the normalisation
    dens = np.exp(-0.5 * z**2) / (sigma * math.sqrt(2 * math.pi))
    return dens.sum(axis=-1) / k.size


def decode_outcome(x, window) -> DecodedOutcome:
    """Bin a homodyne outcome to the nearest lattice point and apply the window."""
    w = _as_window(window)
    n = math.floor(x / SQRT_PI + 0.5)
    frac = x - n * SQRT_PI
    return DecodedOutcome(n % 2, frac, abs(frac) <= w.accept_halfwidth)


def decode_outcomes(x, window):
    """Vectorised :func:`decode_outcome`; returns (bits, fractional, accepted) arrays."""
    w = _as_window(window)
    x = np.asarray(x, dtype=float)
    n = np.floor(x / SQRT_PI + 0.5)
    frac = x - n * SQRT_PI
    return (n.astype(np.int64) % 2), frac, np.abs(frac) <= w.accept_halfwidth


def bound_probs(sigma: float, window) -> MeasurementProbs:
    """Closed-form lower bounds (P_c, P_f) and P_discard = 1 - P_c - P_f.

    ``sigma = 0`` returns the noiseless limit.
    """
    w = _as_window(window)
    if sigma < 0 or not math.isfinite(sigma):
        raise ParameterError("sigma must be non-negative")
    if sigma == 0:
        return MeasurementProbs(1.0, 0.0, 0.0)
    k = sigma * math.sqrt(2)
    p_c = float(erf((HALF_CELL - w.v) / k))
    # erfc difference keeps precision when both arguments are deep in the tail
    p_f = float(erfc((HALF_CELL + w.v) / k) - erfc((3 * HALF_CELL - w.v) / k))
    return MeasurementProbs(p_c, p_f, 1.0 - p_c - p_f)


def upper_bounds(sigma: float, window) -> tuple[float, float]:
    """Upper bounds on the exact (P_correct, P_flip)."""
    w = _as_window(window)
    k = sigma * math.sqrt(2)
    p_c = float(erf((HALF_CELL - w.v) / k))
    tail = 0.5 * float(erfc((3 * HALF_CELL + w.v) / k))
    return tail + 2 * p_c, float(erfc((HALF_CELL + w.v) / k))


def exact_probs(sigma: float, L: int, window) -> MeasurementProbs:
    """Lattice-summed probabilities of correct decoding, logical flip and discard.

    Every peak of the comb sees the same period-2 sqrt(pi) decoding pattern, so
    the sums reduce to a single centred Gaussian integrated over all accepted
    even bins (correct), odd bins (flip) and rejection bands (discard). The
    result does not depend on ``L``.
    """
    w = _as_window(window)
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    if L not in (0, 1):
        raise ParameterError("L must be 0 or 1")
    J = math.ceil(12 * sigma / (2 * SQRT_PI)) + 2
    n = np.arange(-2 * J, 2 * J + 1)
    centre = n * SQRT_PI
    h = w.accept_halfwidth
    inside = ndtr((centre + h) / sigma) - ndtr((centre - h) / sigma)
    edges = (n[:-1] + 0.5) * SQRT_PI
    bands = ndtr((edges + w.v) / sigma) - ndtr((edges - w.v) / sigma)
    p_correct = float(inside[n % 2 == 0].sum())
    p_flip = float(inside[n % 2 == 1].sum())
    return MeasurementProbs(p_correct, p_flip, float(bands.sum()))


VARIANCE_CHANNELS = ("pure_loss", "ps_amp", "pre_amp_loss", "post_amp_loss", "appendix_d_loss")


def apply_variance_map(sigma_sq, channel: str, param: float):
    """Peak variance after a Gaussian channel.

    ``param`` is the transmissivity eta for the loss variants and the gain G
    for ``ps_amp``.
    """
    if channel == "ps_amp":
        if not (param >= 1 and math.isfinite(param)):
            raise ParameterError(f"gain must be >= 1, got {param!r}")
        return param * sigma_sq + (param - 1) / 2
    if channel not in VARIANCE_CHANNELS:
        raise ParameterError(f"unknown channel {channel!r}")
    eta = param
    if not (0 < eta <= 1):
        raise ParameterError(f"transmissivity must lie in (0, 1], got {eta!r}")
    if channel == "pure_loss":
        return eta * sigma_sq + (1 - eta) / 2
    if channel == "pre_amp_loss":
        return sigma_sq + (1 - eta)
    if channel == "post_amp_loss":
        return sigma_sq + (1 - eta) / eta
    return eta * sigma_sq + (1 - eta)


def sample_homodyne(sigma: float, L: int, seed=None, size: int = 1, t_max: int = 10):
    """Draw q-homodyne outcomes of logical state L (deterministic for a fixed seed)."""
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    k = rng.integers(-t_max, t_max + 1, size=size)
    return (2 * k + L) * SQRT_PI + sigma * rng.standard_normal(size)
