"""Teleportation-based state transfer between the memory and a GKP qubit."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import gkp_state as gs
from .cavity_io import CavityParams
from .errors import ConditioningError, ParameterError
from .gkp_state import SQRT_PI, GkpState, MeasurementWindow
from .hybrid_gate import (
    GateConfig,
    HybridState,
    MemoryQubit,
    apply_gate,
    circuit_model_apply,
    gate_coefficients,
)

__all__ = [
    "GateCoefficients",
    "GkpMixture",
    "TransductionResult",
    "PAULI_STATES",
    "mem_to_gkp",
    "gkp_to_mem",
    "mean_fidelity",
    "mean_pauli_fidelity",
]

_S = 1 / math.sqrt(2)
PAULI_STATES = {
    "Z+": (1.0, 0.0),
    "Z-": (0.0, 1.0),
    "X+": (_S, _S),
    "X-": (_S, -_S),
    "Y+": (_S, 1j * _S),
    "Y-": (_S, -1j * _S),
}


class GateCoefficients(NamedTuple):
    """Explicit gate description, bypassing the cavity model."""

    r0: complex = -1.0
    r1: complex = 1.0
    lambda_abs: float = 1.0
    kick: complex = SQRT_PI / 2


Gate = GateConfig | GateCoefficients


def _run_gate(mem: MemoryQubit, gkp: GkpState, gate: Gate) -> HybridState:
    if isinstance(gate, GateConfig):
        return apply_gate(mem, gkp, gate)
    return circuit_model_apply(mem, gkp, gate.r0, gate.r1, gate.lambda_abs, gate.kick)


def _lambda_abs(gate: Gate) -> float:
    if isinstance(gate, GateConfig):
        return gate_coefficients(gate)[2]
    return float(gate.lambda_abs)


@dataclass
class GkpMixture:
    """Operator sum_k c_k |left_k><right_k| on the GKP mode."""

    terms: list = field(default_factory=list)

    def trace(self) -> float:
        return float(sum(c * gs.state_overlap(r, l) for c, l, r in self.terms).real)

    def expectation(self, ket: GkpState) -> float:
        """<ket|rho|ket>; ``ket`` may have a different peak width."""
        ov = gs.cross_width_overlap
        return float(sum(c * ov(ket, l) * ov(r, ket) for c, l, r in self.terms).real)

    def scaled(self, s: complex) -> "GkpMixture":
        return GkpMixture([(s * c, l, r) for c, l, r in self.terms])

    def logical_z(self) -> "GkpMixture":
        return GkpMixture([(c, gs.logical_z(l), gs.logical_z(r)) for c, l, r in self.terms])

    def __add__(self, other: "GkpMixture") -> "GkpMixture":
        return GkpMixture(self.terms + other.terms)


@dataclass
class TransductionResult:
    out_state: object
    fidelity: float
    success_prob: float
    outcome: int | None


def _pure(mem) -> tuple[MemoryQubit, np.ndarray]:
    if not isinstance(mem, MemoryQubit):
        mem = MemoryQubit.from_amplitudes(*mem)
    return mem, mem.pure_amplitudes()


def _conditional_gkp(hyb: HybridState, m: int) -> GkpMixture:
    """Unnormalised GKP state after the memory X-basis readout gives m."""
    kets = [hyb.branch(0), hyb.branch(1)]
    terms = []
    for i in range(2):
        for j in range(2):
            w = hyb.weights[i, j]
            if w != 0:
                terms.append((0.5 * (-1) ** (m * (i + j)) * w, kets[i], kets[j]))
    return GkpMixture(terms)


def mem_to_gkp(
    mem_in,
    gate: Gate,
    sigma: float,
    m: int | None = None,
    p_meas: float = 0.0,
    reference_sigma: float | None = None,
) -> TransductionResult:
    """Teleport the memory state onto a GKP qubit of width ``sigma``.

    ``m`` selects one readout outcome; ``None`` averages the Pauli-corrected
    output over both outcomes with their probabilities. ``p_meas`` is the
    memory readout error. Fidelity is taken against the normalised
    finite-width codeword c0|0~> + c1|1~> of width ``reference_sigma``
    (default ``sigma``).
    """
    if not (0 <= p_meas <= 0.5):
        raise ParameterError("p_meas must lie in [0, 0.5]")
    mem, amps = _pure(mem_in)
    ancilla = GkpState.logical(0, sigma, predisp=SQRT_PI / 2)
    if isinstance(gate, GateConfig) and gate.variant != "CX":
        raise ParameterError("state transfer is defined for the CX gate")
    hyb = _run_gate(mem, ancilla, gate)
    s_ref = hyb.base.sigma1 if reference_sigma is None else reference_sigma
    target = GkpState.from_coeffs(amps[0], amps[1], s_ref)

    outcomes = (0, 1) if m is None else (m,)
    total = GkpMixture()
    fid = 0.0
    prob = 0.0
    for k in outcomes:
        raw = _conditional_gkp(hyb, k)
        p_k = raw.trace()
        if p_k <= 0:
            continue
        rho = raw.scaled(1.0 / p_k)
        if k == 1:
            rho = rho.logical_z()
        rho = rho.scaled(1 - p_meas) + rho.logical_z().scaled(p_meas)
        # peak-level Z is unitary only up to the tiny branch cross-overlaps
        rho = rho.scaled(1.0 / rho.trace())
        f_k = rho.expectation(target)
        if m is None:
            fid += p_k * f_k
            prob += p_k
            total = total + rho.scaled(p_k)
        else:
            fid, prob, total = f_k, p_k, rho
    if m is None:
        fid /= prob
        total = total.scaled(1.0 / prob)
    return TransductionResult(total, float(min(max(fid, 0.0), 1.0)), float(prob), m)


def gkp_to_mem(
    gkp_coeffs: Sequence[complex],
    gate: Gate,
    sigma: float,
    window=0.0,
    m: int | None = None,
) -> TransductionResult:
    """Teleport GKP logical coefficients onto the memory with post-selected readout.

    The homodyne peak standard deviation is ``sigma/sqrt(2)`` for a GKP state
    of width parameter ``sigma``.
    """
    w = window if isinstance(window, MeasurementWindow) else MeasurementWindow(float(window))
    c = np.asarray(gkp_coeffs, dtype=complex)
    c = c / np.linalg.norm(c)
    lam2 = _lambda_abs(gate) ** 2
    probs = gs.bound_probs(sigma / math.sqrt(2), w)
    succ = probs.p_c + probs.p_f
    if succ <= 0:
        raise ConditioningError("no homodyne outcome survives post-selection")
    sign = 1 if m in (None, 0) else -1
    rho = np.outer(c, c.conj()).astype(complex)
    rho[0, 1] *= sign * lam2
    rho[1, 0] *= sign * lam2
    z = np.diag([1.0, -1.0])
    if sign < 0:
        rho = z @ rho @ z  # Pauli-frame correction
    rho = (probs.p_c * rho + probs.p_f * z @ rho @ z) / succ
    fid = float(np.real(c.conj() @ rho @ c))
    return TransductionResult(MemoryQubit(rho, atol=1e-10), min(max(fid, 0.0), 1.0), succ, m)


def mean_fidelity(direction: str, gate: Gate, sigma: float, window=0.0, p_meas: float = 0.0) -> float:
    """Arithmetic mean fidelity over the six Pauli eigenstates."""
    fids = []
    for c0, c1 in PAULI_STATES.values():
        if direction == "M->G":
            fids.append(mem_to_gkp((c0, c1), gate, sigma, p_meas=p_meas).fidelity)
        elif direction == "G->M":
            fids.append(gkp_to_mem((c0, c1), gate, sigma, window).fidelity)
        else:
            raise ParameterError(f"direction must be 'M->G' or 'G->M', got {direction!r}")
    return float(np.mean(fids))


def _point(args):
    direction, C, zeta, sigma, eta_bs, da, dc, window, p_meas = args
    cav = CavityParams.from_cooperativity(C, zeta, da, dc)
    return mean_fidelity(direction, GateConfig(cav, eta_bs=eta_bs), sigma, window, p_meas)


def mean_pauli_fidelity(
    direction: str,
    C_values: Sequence[float],
    zeta: float,
    sigma: float,
    eta_bs: float = 0.99,
    delta_a_over_gamma: float = 5.0,
    delta_c_over_kappa: float = 0.0,
    window=0.0,
    p_meas: float = 0.0,
    jobs: int = 1,
) -> list[tuple[float, float]]:
    """Mean Pauli-eigenstate fidelity along a cooperativity sweep, as (C, F) pairs."""
    tasks = [
        (direction, float(C), zeta, sigma, eta_bs, delta_a_over_gamma, delta_c_over_kappa, window, p_meas)
        for C in C_values
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            vals = list(pool.map(_point, tasks))
    else:
        vals = [_point(t) for t in tasks]
    return [(t[1], v) for t, v in zip(tasks, vals)]
