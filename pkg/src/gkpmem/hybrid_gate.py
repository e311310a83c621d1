"""Memory-controlled displacement of a GKP mode via a cavity-reflected coherent pulse."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import gkp_state as gs
from .cavity_io import CavityParams, dephasing_lambda, scattering_coeffs
from .errors import ParameterError
from .gkp_state import SQRT_PI, GkpState

__all__ = [
    "MemoryQubit",
    "GateConfig",
    "HybridState",
    "VARIANTS",
    "required_amplitude",
    "pulse_constraint",
    "pulse_regime_ok",
    "apply_gate",
    "phase_damping_kraus",
    "apply_phase_damping",
    "circuit_model_apply",
    "gate_coefficients",
]

VARIANTS = ("CX", "CZ", "CX_hex")
PULSE_RATIO_LIMIT = 0.1
DEFAULT_ETA_BS = 0.99

_PREDISP = {"CX": SQRT_PI / 2, "CZ": 1j * SQRT_PI / 2}


class MemoryQubit:
    """2x2 density matrix of the memory qubit."""

    def __init__(self, rho, atol: float = 1e-12):
        rho = np.array(rho, dtype=complex)
        if rho.shape != (2, 2):
            raise ParameterError("memory state must be a 2x2 matrix")
        if not np.allclose(rho, rho.conj().T, atol=atol):
            raise ParameterError("memory state is not Hermitian")
        if abs(np.trace(rho) - 1) > atol:
            raise ParameterError("memory state does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < -atol:
            raise ParameterError("memory state is not positive semidefinite")
        self.rho = rho

    @classmethod
    def from_amplitudes(cls, c0: complex, c1: complex) -> "MemoryQubit":
        v = np.array([c0, c1], dtype=complex)
        v /= np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    def pure_amplitudes(self, tol: float = 1e-9) -> np.ndarray:
        """Ket (c0, c1) for a pure state, with c0 real and non-negative."""
        w, v = np.linalg.eigh(self.rho)
        if w[-1] < 1 - tol:
            raise ParameterError("memory state is not pure")
        ket = v[:, -1]
        if abs(ket[0]) > 0:
            ket = ket * np.exp(-1j * np.angle(ket[0]))
        return ket

    def __repr__(self):
        return f"MemoryQubit({self.rho.tolist()!r})"


def required_amplitude(eta_bs: float, variant: str = "CX") -> complex:
    """Coherent amplitude whose beamsplitter kick alpha*sqrt(1-eta) is half a lattice step."""
    if not (0 < eta_bs < 1):
        raise ParameterError(f"beamsplitter reflectivity must lie in (0, 1), got {eta_bs!r}")
    base = math.sqrt(math.pi / (1 - eta_bs)) / 2
    if variant == "CX":
        return complex(base)
    if variant == "CZ":
        return 1j * base
    if variant == "CX_hex":
        return 0.5 * math.sqrt(math.pi / math.sqrt(3)) * ((math.sqrt(3) - 1j) / 2) / math.sqrt(1 - eta_bs)
    raise ParameterError(f"unknown gate variant {variant!r}")


def pulse_constraint(eta_bs: float, kappa_tau: float) -> float:
    """Photons per cavity lifetime, pi/(4(1-eta) kappa tau); must be << 1."""
    if not (eta_bs < 1 and kappa_tau > 0):
        raise ParameterError("need eta_bs < 1 and kappa_tau > 0")
    return math.pi / (4 * (1 - eta_bs) * kappa_tau)


def pulse_regime_ok(eta_bs: float, kappa_tau: float, limit: float = PULSE_RATIO_LIMIT) -> bool:
    return pulse_constraint(eta_bs, kappa_tau) < limit


@dataclass(frozen=True)
class GateConfig:
    cavity: CavityParams
    eta_bs: float = DEFAULT_ETA_BS
    variant: str = "CX"
    alpha: complex | None = None
    # broaden GKP peaks by the leakage through the (1 - eta_bs) port
    leakage: bool = False

    def __post_init__(self):
        if not (0 < self.eta_bs < 1):
            raise ParameterError(f"eta_bs must lie in (0, 1), got {self.eta_bs!r}")
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown gate variant {self.variant!r}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", required_amplitude(self.eta_bs, self.variant))

    @property
    def kick(self) -> complex:
        return self.alpha * math.sqrt(1 - self.eta_bs)


@dataclass
class HybridState:
    """Joint memory-GKP state sum_ij w_ij |i><j| (x) D(beta_i)|base><base|D(beta_j)^dag."""

    base: GkpState
    beta0: complex
    beta1: complex
    weights: np.ndarray = field(repr=False)

    @property
    def betas(self) -> tuple[complex, complex]:
        return self.beta0, self.beta1

    def branch(self, i: int) -> GkpState:
        return gs.displace(self.base, self.betas[i])

    def trace(self) -> float:
        return float(np.real(self.weights[0, 0] + self.weights[1, 1]))

    def memory_state(self) -> np.ndarray:
        """Reduced memory density matrix (GKP traced out)."""
        k0, k1 = self.branch(0), self.branch(1)
        ov = gs.state_overlap(k1, k0)  # tr(D0 rho D1^dag) = <k1|k0>
        rho = self.weights.copy()
        rho[0, 1] *= ov
        rho[1, 0] *= np.conj(ov)
        return rho

    def logical_matrix(self, reference_sigma: float | None = None) -> np.ndarray:
        """Joint state restricted to span{|i>_M |L~>_G}, as a 4x4 matrix."""
        s = self.base.sigma1 if reference_sigma is None else reference_sigma
        code = [GkpState.logical(0, s), GkpState.logical(1, s)]
        amps = np.array([[gs.state_overlap(c, self.branch(i)) for c in code] for i in range(2)])
        out = np.zeros((4, 4), dtype=complex)
        for i in range(2):
            for j in range(2):
                out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = self.weights[i, j] * np.outer(amps[i], amps[j].conj())
        return out


def gate_coefficients(cfg: GateConfig) -> tuple[complex, complex, float]:
    """(r0, r1, |lambda|) for the configured cavity and pulse amplitude."""
    r0 = scattering_coeffs(cfg.cavity, coupled=False).r
    r1 = scattering_coeffs(cfg.cavity, coupled=True).r
    lam = dephasing_lambda(cfg.alpha, cfg.cavity)
    return r0, r1, abs(lam)


def phase_damping_kraus(epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    if not (0 <= epsilon <= 1):
        raise ParameterError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    k0 = np.array([[1, 0], [0, epsilon]], dtype=complex)
    k1 = np.array([[0, 0], [0, math.sqrt(1 - epsilon**2)]], dtype=complex)
    return k0, k1


def apply_phase_damping(rho: np.ndarray, epsilon: float) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in phase_damping_kraus(epsilon))


def _prepare_base(gkp: GkpState, cfg_variant: str, eta_bs: float, leakage: bool) -> GkpState:
    expected = _PREDISP.get(cfg_variant)
    if expected is not None and abs(gkp.predisp - expected) > 1e-9:
        warnings.warn(
            f"GKP input for {cfg_variant} is expected to be pre-displaced by {expected}; got {gkp.predisp}",
            stacklevel=3,
        )
    if not leakage:
        return gkp
    var = gs.apply_variance_map(gkp.sigma1**2 / 2, "pure_loss", eta_bs)
    return gs.normalize(GkpState(gkp.b0, gkp.b1, math.sqrt(2 * var), gkp.sigma2, gkp.predisp, gkp.t_max))


def _build(mem: MemoryQubit, base: GkpState, r0: complex, r1: complex, lam_abs: float, kick: complex):
    betas = (np.conj(r0) * kick, np.conj(r1) * kick)
    # two cavity passes: coherences pick up |lambda|^2
    weights = apply_phase_damping(mem.rho, lam_abs**2)
    return HybridState(base, complex(betas[0]), complex(betas[1]), weights)


def apply_gate(mem: MemoryQubit, gkp: GkpState, cfg: GateConfig) -> HybridState:
    """Run the two-pass cavity interaction and the beamsplitter kick.

    Pauli bookkeeping on the memory is folded in, so ideal coefficients
    (r0, r1, lambda) = (-1, 1, 1) give a CNOT from memory onto the GKP qubit.
    """
    target = required_amplitude(cfg.eta_bs, cfg.variant)
    if abs(cfg.alpha - target) > 1e-9 * abs(target):
        warnings.warn(f"alpha={cfg.alpha} differs from the {cfg.variant} amplitude {target}", stacklevel=2)
    r0, r1, lam_abs = gate_coefficients(cfg)
    base = _prepare_base(gkp, cfg.variant, cfg.eta_bs, cfg.leakage)
    return _build(mem, base, r0, r1, lam_abs, cfg.kick)


def circuit_model_apply(
    mem: MemoryQubit,
    gkp: GkpState,
    r0: complex,
    r1: complex,
    lambda_abs: float,
    kick: complex = SQRT_PI / 2,
) -> HybridState:
    """Phase-rotation / dephasing circuit fed with explicit coefficients."""
    if not (0 <= lambda_abs <= 1):
        raise ParameterError("|lambda| must lie in [0, 1]")
    return _build(mem, gkp, r0, r1, lambda_abs, kick)
