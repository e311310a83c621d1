"""GKP-assisted entanglement swap between two memories: fidelity, hashing rate, loss envelope."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import erfc, xlogy

from . import gkp_state as gs
from .errors import ConditioningError, ParameterError
from .gkp_state import HALF_CELL, MeasurementProbs, MeasurementWindow

__all__ = [
    "DV_RATE_CAP",
    "V_MAX_FRACTION",
    "TwoMemoryState",
    "RatePoint",
    "bell_state",
    "swap_state",
    "swap_fidelity",
    "bell_weights",
    "hashing_bound",
    "hashing_from_x",
    "x_ratio",
    "rate",
    "rate_envelope",
    "threshold_x",
    "repeaterless_bound",
    "db_to_eta",
]

DV_RATE_CAP = 0.5
V_MAX_FRACTION = 1 - 1e-4
COARSE_POINTS = 64

_I2 = np.eye(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_X2 = np.kron(_I2, _X)
_Z1 = np.kron(_Z, _I2)

_BELL = {
    "phi+": np.array([1, 0, 0, 1]) / math.sqrt(2),
    "phi-": np.array([1, 0, 0, -1]) / math.sqrt(2),
    "psi+": np.array([0, 1, 1, 0]) / math.sqrt(2),
    "psi-": np.array([0, 1, -1, 0]) / math.sqrt(2),
}


class TwoMemoryState:
    """Density matrix on M1 (x) M2."""

    def __init__(self, rho, atol: float = 1e-10):
        rho = np.array(rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ParameterError("two-memory state must be 4x4")
        if not np.allclose(rho, rho.conj().T, atol=atol):
            raise ParameterError("state is not Hermitian")
        if abs(np.trace(rho) - 1) > atol:
            raise ParameterError("state does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < -atol:
            raise ParameterError("state is not positive semidefinite")
        self.rho = rho

    def __repr__(self):
        return f"TwoMemoryState({self.rho.round(12).tolist()!r})"


def bell_state(name: str = "phi+") -> TwoMemoryState:
    try:
        v = _BELL[name]
    except KeyError:
        raise ParameterError(f"unknown Bell state {name!r}") from None
    return TwoMemoryState(np.outer(v, v.conj()))


def bell_weights(state: TwoMemoryState) -> dict[str, float]:
    """Populations of the four Bell states."""
    return {k: float(np.real(v.conj() @ state.rho @ v)) for k, v in _BELL.items()}


def _probs(probs) -> tuple[float, float]:
    p_c, p_f = float(probs[0]), float(probs[1])
    if not (p_c + p_f > 0):
        raise ConditioningError("P_c + P_f = 0: the swap is never heralded")
    return p_c, p_f


def swap_state(bell_in: TwoMemoryState, probs: MeasurementProbs) -> TwoMemoryState:
    """Post-selected state after the dual-homodyne swap with Pauli-frame errors."""
    p_c, p_f = _probs(probs)
    rho = bell_in.rho
    zx = _Z1 @ _X2
    out = (
        p_c**2 * rho
        + p_c * p_f * (_X2 @ rho @ _X2 + _Z1 @ rho @ _Z1)
        + p_f**2 * zx @ rho @ zx.conj().T
    ) / (p_c + p_f) ** 2
    out /= np.trace(out).real
    return TwoMemoryState(out)


def swap_fidelity(probs) -> float:
    p_c, p_f = _probs(probs)
    return p_c**2 / (p_c + p_f) ** 2


def hashing_bound(probs) -> float:
    """1 + sum p log2 p over the Bell-diagonal weights; may be negative."""
    p_c, p_f = _probs(probs)
    s = (p_c + p_f) ** 2
    p = np.array([p_c**2, p_c * p_f, p_c * p_f, p_f**2]) / s
    return float(1 + np.sum(xlogy(p, p)) / math.log(2))


def hashing_from_x(x: float) -> float:
    """Same quantity written in terms of x = P_f/P_c."""
    x = float(x)
    if x < 0:
        raise ParameterError("x must be non-negative")
    if x == 0:
        return 1.0
    return 1 + (2 * x / (x + 1)) * math.log2(x) - 2 * math.log2(1 + x)


def x_ratio(sigma: float, window) -> float:
    """P_f/P_c from the error-function closed form."""
    w = window if isinstance(window, MeasurementWindow) else MeasurementWindow(float(window))
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    k = sigma * math.sqrt(2)
    num = erfc((HALF_CELL + w.v) / k) - erfc((3 * HALF_CELL - w.v) / k)
    den = 1 - erfc((HALF_CELL - w.v) / k)
    if not den > 0:
        raise ConditioningError("P_c underflows to zero; x diverges")
    return float(num / den)


def threshold_x() -> float:
    """Unique root in (0, 1) of the hashing bound as a function of x."""
    return float(brentq(hashing_from_x, 1e-3, 0.5, xtol=1e-14, rtol=1e-15))


def repeaterless_bound(eta_total: float) -> float:
    """-log2(1 - sqrt(eta)); returns inf at eta = 1."""
    if not (0 < eta_total <= 1):
        raise ParameterError(f"eta_total must lie in (0, 1], got {eta_total!r}")
    if eta_total == 1:
        return math.inf
    return -math.log2(1 - math.sqrt(eta_total))


def db_to_eta(db: float) -> float:
    if db < 0:
        raise ParameterError("loss in dB must be non-negative")
    return 10 ** (-db / 10)


@dataclass(frozen=True)
class RatePoint:
    half_loss_db: float
    sigma0_sq: float
    v: float
    p_c: float
    p_f: float
    fidelity: float
    hashing: float
    rate: float
    d2_bound: float

    def as_dict(self) -> dict:
        return asdict(self)


def _raw(sigma0_sq: float, eta: float, v: float, loss_map: str):
    var = gs.apply_variance_map(sigma0_sq, loss_map, eta)
    probs = gs.bound_probs(math.sqrt(var), MeasurementWindow(v))
    return probs, (probs.p_c + probs.p_f) ** 2 * hashing_bound(probs)


def rate(sigma0_sq: float, half_loss_eta: float, window=0.0, loss_map: str = "pure_loss") -> RatePoint:
    """Heralded hashing rate when each arm passes transmissivity ``half_loss_eta``."""
    if sigma0_sq < 0:
        raise ParameterError("sigma0_sq must be non-negative")
    v = window.v if isinstance(window, MeasurementWindow) else float(window)
    probs, r = _raw(sigma0_sq, half_loss_eta, v, loss_map)
    return RatePoint(
        half_loss_db=abs(10 * math.log10(half_loss_eta)),
        sigma0_sq=sigma0_sq,
        v=v,
        p_c=probs.p_c,
        p_f=probs.p_f,
        fidelity=swap_fidelity(probs),
        hashing=hashing_bound(probs),
        rate=max(0.0, r),
        d2_bound=repeaterless_bound(half_loss_eta**2),
    )


def _optimise_v(args) -> RatePoint:
    db, v_max, sigma0_sq, loss_map = args
    eta = db_to_eta(db)

    def neg(v):
        return -_raw(sigma0_sq, eta, v, loss_map)[1]

    grid = np.linspace(0.0, v_max, COARSE_POINTS)
    vals = np.array([neg(v) for v in grid])
    i = int(np.argmin(vals))
    best_v, best = grid[i], vals[i]
    if 0 < i < COARSE_POINTS - 1 and vals[i] < min(vals[i - 1], vals[i + 1]):
        res = minimize_scalar(neg, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden",
                              options={"xtol": 1e-10})
        if res.fun < best and 0 <= res.x <= v_max:
            best_v, best = float(res.x), float(res.fun)
    elif i in (0, COARSE_POINTS - 1):
        j = 1 if i == 0 else COARSE_POINTS - 2
        lo, hi = sorted((grid[i], grid[j]))
        res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        if res.fun < best:
            best_v, best = float(res.x), float(res.fun)
    return rate(sigma0_sq, eta, float(best_v), loss_map)


def rate_envelope(
    half_loss_db: Sequence[float],
    v_max_fraction: float = V_MAX_FRACTION,
    sigma0_sq: float = 0.0,
    loss_map: str = "pure_loss",
    jobs: int = 1,
) -> list[RatePoint]:
    """Rate maximised over the window v in [0, v_max_fraction * sqrt(pi)/2] at each loss."""
    if not (0 <= v_max_fraction < 1):
        raise ParameterError("v_max_fraction must lie in [0, 1)")
    tasks = [(float(db), v_max_fraction * HALF_CELL, sigma0_sq, loss_map) for db in half_loss_db]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_optimise_v, tasks))
    return [_optimise_v(t) for t in tasks]
