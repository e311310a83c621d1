"""Anti-normally ordered characteristic functions of Gaussian kernels.

A kernel is stored through the parameters of its exponent

    -a|z|^2 + conj(d) z - d_right conj(z) + c z^2 + conj(c) conj(z)^2 + extra

with ``d_right = d`` for Hermitian operators. The coherent projector
|alpha><beta| is the one asymmetric member used here.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UnsupportedError

__all__ = [
    "GaussianChi",
    "Decomposition",
    "chi_thermal_coherent",
    "chi_vacuum",
    "chi_coherent_projector",
    "beamsplitter_compose",
    "decompose_displacement",
    "sequential_compose",
    "verification_report",
]

_REASSEMBLY_TOL = 1e-12


@dataclass(frozen=True)
class GaussianChi:
    a: float
    d: complex = 0j
    c: complex = 0j
    extra: complex = 0j
    d_right: complex | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "d", complex(self.d))
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "extra", complex(self.extra))
        dr = self.d if self.d_right is None else complex(self.d_right)
        object.__setattr__(self, "d_right", dr)

    def exponent(self, z):
        z = np.asarray(z, dtype=complex)
        zc = np.conj(z)
        return (
            -self.a * abs(z) ** 2
            + np.conj(self.d) * z
            - self.d_right * zc
            + self.c * z**2
            + np.conj(self.c) * zc**2
            + self.extra
        )

    def __call__(self, z):
        return np.exp(self.exponent(z))

    def scaled(self, k: float) -> "GaussianChi":
        """Kernel of z -> chi(k z) for real k."""
        return GaussianChi(k * k * self.a, k * self.d, k * k * self.c, self.extra, k * self.d_right)

    def __mul__(self, other: "GaussianChi") -> "GaussianChi":
        return GaussianChi(
            self.a + other.a,
            self.d + other.d,
            self.c + other.c,
            self.extra + other.extra,
            self.d_right + other.d_right,
        )

    def divide(self, other: "GaussianChi") -> "GaussianChi":
        return GaussianChi(
            self.a - other.a,
            self.d - other.d,
            self.c - other.c,
            self.extra - other.extra,
            self.d_right - other.d_right,
        )

    def params(self) -> np.ndarray:
        return np.array([self.a, self.d, self.c, self.extra, self.d_right], dtype=complex)

    def max_param_diff(self, other: "GaussianChi") -> float:
        return float(np.max(np.abs(self.params() - other.params())))


def chi_thermal_coherent(nbar: float, beta: complex = 0j) -> GaussianChi:
    """Displaced thermal state D(beta) rho_th(nbar) D(beta)^dag."""
    if not (nbar >= 0 and math.isfinite(nbar)):
        raise ParameterError(f"nbar must be >= 0, got {nbar!r}")
    return GaussianChi(1.0 + nbar, beta)


def chi_vacuum() -> GaussianChi:
    return GaussianChi(1.0)


def chi_coherent_projector(alpha: complex, beta: complex) -> GaussianChi:
    """Kernel of the operator |alpha><beta|."""
    alpha, beta = complex(alpha), complex(beta)
    extra = beta.conjugate() * alpha - abs(beta) ** 2 / 2 - abs(alpha) ** 2 / 2
    return GaussianChi(1.0, beta, 0j, extra, alpha)


def _check_eta(eta: float, open_interval: bool = False):
    lo_ok = eta > 0 if open_interval else eta >= 0
    hi_ok = eta < 1 if open_interval else eta <= 1
    if not (lo_ok and hi_ok):
        raise ParameterError(f"eta out of range: {eta!r}")


def beamsplitter_compose(chi_a: GaussianChi, chi_b: GaussianChi, eta: float):
    """Output kernels (c, d) of a beamsplitter with reflectivity eta on inputs (a, b)."""
    _check_eta(eta)
    s, t = math.sqrt(eta), math.sqrt(1 - eta)
    chi_c = chi_a.scaled(s) * chi_b.scaled(t)
    chi_d = chi_a.scaled(-t) * chi_b.scaled(s)
    return chi_c, chi_d


@dataclass(frozen=True)
class Decomposition:
    """Output mode as pure loss, then thermal noise, then displacement."""

    chi_a: GaussianChi
    loss_part: GaussianChi
    thermal_part: GaussianChi
    displacement_part: GaussianChi
    loss: float
    added_nbar: float

    @property
    def displacement(self) -> complex:
        return self.displacement_part.d

    def reassemble(self) -> GaussianChi:
        return self.loss_part * self.thermal_part * self.displacement_part


def decompose_displacement(chi_c: GaussianChi, eta: float, nbar: float, beta: complex) -> Decomposition:
    """Factor the beamsplitter output fed by a thermal-coherent ancilla (nbar, beta)."""
    _check_eta(eta, open_interval=True)
    eps = 1 - eta
    thermal = GaussianChi(nbar * eps)
    disp = GaussianChi(0.0, math.sqrt(eps) * complex(beta))
    vac_loss = GaussianChi(eps)
    scaled_a = chi_c.divide(thermal).divide(disp).divide(vac_loss)
    chi_a = scaled_a.scaled(1 / math.sqrt(eta))
    if chi_a.a < 1 - 1e-9:
        raise UnsupportedError(
            "input kernel is not a beamsplitter output of a physical Gaussian mode with this ancilla"
        )
    dec = Decomposition(chi_a, scaled_a * vac_loss, thermal, disp, eps, nbar * eps)
    if dec.reassemble().max_param_diff(chi_c) > _REASSEMBLY_TOL * max(1.0, np.max(np.abs(chi_c.params()))):
        raise UnsupportedError("factorisation does not reproduce the input kernel")
    return dec


def sequential_compose(
    chi_a: GaussianChi,
    chi_a_prime: GaussianChi,
    chi_b: GaussianChi,
    eta: float,
    reduced: bool = False,
) -> GaussianChi:
    """Mode a' after the ancilla b has first been mixed with a, then with a'.

    The exact form chains two beamsplitters; ``reduced`` keeps only the
    first-order terms in eps = 1 - eta, dropping the contribution of mode a.
    """
    _check_eta(eta)
    if reduced:
        eps = 1 - eta
        return chi_a_prime.scaled(math.sqrt(eta)) * chi_b.scaled(math.sqrt(eps))
    _, chi_d = beamsplitter_compose(chi_a, chi_b, eta)
    return beamsplitter_compose(chi_a_prime, chi_d, eta)[0]


def verification_report(seed: int = 0, trials: int = 100) -> list[tuple[str, bool, float]]:
    """Self-checks of the decomposition algebra as (name, passed, worst deviation)."""
    rng = np.random.default_rng(seed)
    out = []

    worst = 0.0
    for _ in range(trials):
        eta = rng.uniform(0.5, 0.999)
        nbar = rng.uniform(0, 3)
        beta = complex(rng.normal(), rng.normal())
        chi_a = chi_thermal_coherent(rng.uniform(0, 3), complex(rng.normal(), rng.normal()))
        chi_c = beamsplitter_compose(chi_a, chi_thermal_coherent(nbar, beta), eta)[0]
        dec = decompose_displacement(chi_c, eta, nbar, beta)
        worst = max(worst, dec.reassemble().max_param_diff(chi_c), dec.chi_a.max_param_diff(chi_a))
    out.append(("decomposition reassembly", worst <= 1e-12, worst))

    worst = 0.0
    for _ in range(trials):
        eta = rng.uniform(0, 1)
        ka = chi_thermal_coherent(rng.uniform(0, 3), complex(rng.normal(), rng.normal()))
        kb = chi_thermal_coherent(rng.uniform(0, 3), complex(rng.normal(), rng.normal()))
        c, d = beamsplitter_compose(ka, kb, eta)
        worst = max(worst, abs(c.a + d.a - ka.a - kb.a))
    out.append(("beamsplitter energy balance", worst <= 1e-12, worst))

    worst = 0.0
    for _ in range(trials):
        alpha = complex(rng.normal(), rng.normal())
        proj = chi_coherent_projector(alpha, alpha)
        worst = max(worst, proj.max_param_diff(chi_thermal_coherent(0.0, alpha)))
    out.append(("coherent projector diagonal", worst <= 1e-12, worst))

    worst = 0.0
    for eps in (1e-2, 1e-3, 1e-4):
        nb = 0.5
        ka, kap, kb = chi_thermal_coherent(nb), chi_thermal_coherent(nb), chi_thermal_coherent(nb, 0.3)
        exact = sequential_compose(ka, kap, kb, 1 - eps)
        red = sequential_compose(ka, kap, kb, 1 - eps, reduced=True)
        worst = max(worst, exact.max_param_diff(red) / eps)
    out.append(("sequential reduced form is first order", worst <= 10.0, worst))

    val = abs(complex(cmath.exp(chi_thermal_coherent(1.0, 0.5 + 0.5j).extra)) - 1)
    out.append(("normalisation chi(0) = 1", val <= 1e-15, val))
    return out
