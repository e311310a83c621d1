"""Single-sided atom-cavity scattering coefficients and the pulse dephasing factor.

All rates are angular frequencies (rad/s); detunings follow
``delta_a = omega_a - omega`` and ``delta_c = omega_c - omega``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParameterError

__all__ = [
    "CavityParams",
    "ScatteringCoeffs",
    "reduced_coeffs",
    "scattering_coeffs",
    "raw_coeffs",
    "coherent_overlap",
    "dephasing_lambda",
    "dephasing_lambda_spectral",
]


@dataclass(frozen=True)
class CavityParams:
    g: float
    kappa_c: float
    kappa_l: float
    gamma_m: float
    delta_a: float = 0.0
    delta_c: float = 0.0

    def __post_init__(self):
        for name in ("g", "kappa_c", "gamma_m"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ParameterError(f"{name} must be positive and finite, got {val!r}")
        if not (self.kappa_l >= 0 and math.isfinite(self.kappa_l)):
            raise ParameterError(f"kappa_l must be >= 0, got {self.kappa_l!r}")
        if not (math.isfinite(self.delta_a) and math.isfinite(self.delta_c)):
            raise ParameterError("detunings must be finite")

    @property
    def kappa(self) -> float:
        return self.kappa_c + self.kappa_l

    @property
    def cooperativity(self) -> float:
        return 4.0 * self.g**2 / (self.kappa * self.gamma_m)

    @property
    def zeta(self) -> float:
        return self.kappa_c / self.kappa

    @classmethod
    def from_cooperativity(
        cls,
        C: float,
        zeta: float,
        delta_a_over_gamma: float = 0.0,
        delta_c_over_kappa: float = 0.0,
        gamma_m: float = 1.0,
        kappa: float = 1.0,
    ) -> "CavityParams":
        """Build parameters from the dimensionless (C, zeta) description."""
        if not (C > 0):
            raise ParameterError(f"cooperativity must be positive, got {C!r}")
        if not (0 < zeta <= 1):
            raise ParameterError(f"zeta must lie in (0, 1], got {zeta!r}")
        g = math.sqrt(C * kappa * gamma_m / 4.0)
        return cls(
            g=g,
            kappa_c=zeta * kappa,
            kappa_l=(1.0 - zeta) * kappa,
            gamma_m=gamma_m,
            delta_a=delta_a_over_gamma * gamma_m,
            delta_c=delta_c_over_kappa * kappa,
        )


class ScatteringCoeffs(NamedTuple):
    r: complex
    l_c: complex
    l_a: complex

    def total_power(self) -> float:
        return abs(self.r) ** 2 + abs(self.l_c) ** 2 + abs(self.l_a) ** 2


def reduced_coeffs(C, zeta, delta_a_over_gamma=0.0, delta_c_over_kappa=0.0, one_minus_zeta=None):
    """Dimensionless (r, l_c, l_a); broadcasts over array inputs.

    ``C = 0`` is allowed here and describes the uncoupled memory level.
    ``one_minus_zeta`` may be passed when it is known more accurately than
    ``1 - zeta`` (zeta close to 1).
    """
    C = np.asarray(C, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    loss = 1.0 - zeta if one_minus_zeta is None else np.asarray(one_minus_zeta, dtype=float)
    atom = 1.0 - 2j * np.asarray(delta_a_over_gamma, dtype=float)
    denom = 1.0 - 2j * np.asarray(delta_c_over_kappa, dtype=float) + C / atom
    r = 1.0 - 2.0 * zeta / denom
    l_c = -2.0 * np.sqrt(zeta * loss) / denom
    l_a = -2j * np.sqrt(zeta * C) / (atom * denom)
    return r, l_c, l_a


def scattering_coeffs(params: CavityParams, coupled: bool) -> ScatteringCoeffs:
    """Scattering coefficients seen by a pulse when the memory is in |1> (coupled) or |0>."""
    C = params.cooperativity if coupled else 0.0
    r, l_c, l_a = reduced_coeffs(
        C, params.zeta, params.delta_a / params.gamma_m, params.delta_c / params.kappa,
        one_minus_zeta=params.kappa_l / params.kappa,
    )
    return ScatteringCoeffs(complex(r), complex(l_c), complex(l_a))


def raw_coeffs(params: CavityParams, coupled: bool) -> ScatteringCoeffs:
    """Same coefficients written directly in terms of g, kappa_c, kappa_l, gamma_m."""
    g2 = params.g**2 if coupled else 0.0
    atom = params.gamma_m / 2 - 1j * params.delta_a
    den = params.kappa / 2 - 1j * params.delta_c + g2 / atom
    r = 1 - params.kappa_c / den
    l_c = -math.sqrt(params.kappa_l * params.kappa_c) / den
    g = math.sqrt(g2)
    l_a = (-1j * g * math.sqrt(params.gamma_m * params.kappa_c) / atom) / den
    return ScatteringCoeffs(complex(r), complex(l_c), complex(l_a))


def coherent_overlap(beta, gamma):
    """<beta|gamma> for coherent states."""
    beta = np.asarray(beta, dtype=complex)
    gamma = np.asarray(gamma, dtype=complex)
    return np.exp(-0.5 * abs(beta) ** 2 - 0.5 * abs(gamma) ** 2 + np.conj(beta) * gamma)


def dephasing_lambda(alpha: complex, params: CavityParams) -> complex:
    """Single-pass coherence factor lambda for a monochromatic pulse of amplitude alpha.

    lambda = <l_c1 alpha | l_c0 alpha> * <l_a1 alpha | 0>, where the superscript
    labels the uncoupled (0) / coupled (1) memory level.
    """
    c0 = scattering_coeffs(params, coupled=False)
    c1 = scattering_coeffs(params, coupled=True)
    lam = coherent_overlap(c1.l_c * alpha, c0.l_c * alpha) * coherent_overlap(c1.l_a * alpha, 0.0)
    return complex(lam)


def dephasing_lambda_spectral(alpha: complex, params: CavityParams, offsets, weights, spectrum) -> complex:
    """Pulse-shape averaged lambda.

    ``offsets`` are angular-frequency offsets from the carrier (rad/s),
    ``weights`` the quadrature weights and ``spectrum`` the sampled amplitude
    profile f. The profile is renormalised so that sum(w |f|^2) = 1; each
    spectral slice contributes the log of its coherent overlaps.
    """
    offsets = np.asarray(offsets, dtype=float)
    weights = np.asarray(weights, dtype=float)
    f = np.asarray(spectrum, dtype=complex)
    norm = np.sum(weights * abs(f) ** 2)
    if not norm > 0:
        raise ParameterError("spectrum has zero weight")
    dens = weights * abs(f) ** 2 / norm
    da = (params.delta_a - offsets) / params.gamma_m
    dc = (params.delta_c - offsets) / params.kappa
    _, lc0, _ = reduced_coeffs(0.0, params.zeta, da, dc)
    _, lc1, la1 = reduced_coeffs(params.cooperativity, params.zeta, da, dc)
    # log <b|g> per unit |alpha f|^2
    kern = (
        -0.5 * abs(lc1) ** 2 - 0.5 * abs(lc0) ** 2 + np.conj(lc1) * lc0
        - 0.5 * abs(la1) ** 2
    )
    return complex(np.exp(abs(alpha) ** 2 * np.sum(dens * kern)))
