"""Dephasing and duration scaling for GKP cluster generation with one memory."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError
from .gaussian_chi import beamsplitter_compose, chi_thermal_coherent

__all__ = ["SeqIntMetrics", "RecIntMetrics", "seq_int_metrics", "rec_int_metrics"]

EPS_MAX = 0.1


@dataclass(frozen=True)
class SeqIntMetrics:
    dephasing: float
    duration: float


@dataclass(frozen=True)
class RecIntMetrics:
    dephasing: float
    duration: float
    per_pass_gkp_variance_added: tuple[float, ...]


def _check(n: int, lambda_abs: float, tau: float):
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    if not (0 <= lambda_abs <= 1):
        raise ParameterError(f"|lambda| must lie in [0, 1], got {lambda_abs!r}")
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau!r}")


def seq_int_metrics(n: int, lambda_abs: float, tau: float) -> SeqIntMetrics:
    """One two-pass gate per edge: |lambda|^(2n) dephasing over 3 n tau."""
    _check(n, lambda_abs, tau)
    return SeqIntMetrics(lambda_abs ** (2 * n), 3 * n * tau)


def rec_int_metrics(
    n: int,
    lambda_abs: float,
    tau: float,
    eps: float,
    nbar: float = 0.0,
    gkp_nbar: float | None = None,
) -> RecIntMetrics:
    """One memory-entangled pulse reused across n GKP modes.

    The pulse is tracked as a thermal Gaussian kernel. At each pass it meets a
    GKP mode on a beamsplitter of transmissivity ``eps``; the GKP mode picks
    up eps times the pulse's current ``a`` parameter, and the pulse is
    rethermalised by the leaked GKP mode, modelled as thermal with occupation
    ``gkp_nbar`` (defaults to ``nbar``).
    """
    _check(n, lambda_abs, tau)
    if not (0 < eps <= EPS_MAX):
        raise ParameterError(f"eps must lie in (0, {EPS_MAX}], got {eps!r}")
    if nbar < 0:
        raise ParameterError("nbar must be non-negative")
    gkp_nbar = nbar if gkp_nbar is None else gkp_nbar
    if gkp_nbar < 0:
        raise ParameterError("gkp_nbar must be non-negative")

    pulse = chi_thermal_coherent(nbar)
    gkp_proxy = chi_thermal_coherent(gkp_nbar)
    added = []
    for _ in range(int(n)):
        # mode c: the GKP mode (port a, reflectivity 1 - eps); mode d: the pulse
        gkp_out, pulse = beamsplitter_compose(gkp_proxy, pulse, 1 - eps)
        added.append(gkp_out.a - (1 - eps) * gkp_proxy.a)
    return RecIntMetrics(lambda_abs**2, (n + 2) * tau, tuple(added))
