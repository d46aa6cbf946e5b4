"""Parameter types and the raw-to-effective parameter algebra.

All quantities are plain dimensionless numbers measured in a frequency unit of
the caller's choosing. Nothing here attaches physical units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .exceptions import DetuningTooSmall, NonPositiveOmegaA, ParameterError

#: Required ratio Delta / max(g13, Omega23) for adiabatic elimination.
LARGE_DETUNING_RATIO = 10.0


def _check_finite(obj) -> None:
    for f in fields(obj):
        value = getattr(obj, f.name)
        if isinstance(value, float) and not math.isfinite(value):
            raise ParameterError(f"{f.name} must be finite, got {value!r}")


def _check_atom_count(N) -> None:
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ParameterError(f"atom number N must be a positive integer, got {N!r}")


@dataclass(frozen=True)
class RawPhysicalParams:
    """Laboratory-level inputs of the two-component condensate in a cavity."""

    g13: float
    Omega23: float
    Delta: float
    omega_cavity: float
    omega_cl: float
    omega_mw: float
    Omega_mw: float
    nu1: float
    nu2: float
    omega1: float
    omega2: float
    eta1: float
    eta2: float
    eta12: float
    N: int

    def __post_init__(self):
        _check_finite(self)
        _check_atom_count(self.N)
        _check_detuning(self.g13, self.Omega23, self.Delta)


@dataclass(frozen=True)
class ModelParams:
    """The five numbers of the effective Hamiltonian plus the atom number.

    ``lam`` is the collective cavity coupling. Only real couplings are
    accepted; a phase ``exp(i*theta)`` on the coupling leaves ``beta``
    unchanged and multiplies ``alpha`` by ``exp(-i*theta)``, so the
    magnitude carries all the ground-state information.
    """

    omega_a: float
    omega_b: float
    eta: float
    lam: float
    Omega: float
    N: int = 1

    def __post_init__(self):
        _check_finite(self)
        _check_atom_count(self.N)
        if not self.omega_a > 0:
            raise NonPositiveOmegaA(f"omega_a must be positive, got {self.omega_a!r}")

    @property
    def w(self) -> float:
        return compute_w(self).w


@dataclass(frozen=True)
class CompositeCoupling:
    w: float


def _check_detuning(g13: float, Omega23: float, Delta: float) -> None:
    if Delta == 0:
        raise ZeroDivisionError("single-photon detuning Delta must be nonzero")
    if Delta < LARGE_DETUNING_RATIO * max(g13, Omega23):
        raise DetuningTooSmall(
            f"Delta={Delta!r} is below {LARGE_DETUNING_RATIO:g} * max(g13, Omega23)"
        )


def derive_effective_coupling(g13: float, Omega23: float, Delta: float) -> float:
    """Two-photon Raman coupling ``g13 * Omega23 / Delta``."""
    _check_detuning(g13, Omega23, Delta)
    return g13 * Omega23 / Delta


def derive_model_params(raw: RawPhysicalParams) -> ModelParams:
    """Map laboratory inputs to the effective Hamiltonian parameters.

    The atomic splitting includes the collisional shift
    ``(N - 1)/2 * (eta2 - eta1)``; the collective collision parameter is
    ``((eta1 + eta2)/2 - eta12) * N`` and the collective coupling is
    ``lambda_eff * sqrt(N)``. Frequencies are then shifted into the frame
    rotating with the microwave and classical fields.
    """
    N = raw.N
    omega_0 = (raw.nu2 + raw.omega2 - raw.nu1 - raw.omega1
               + 0.5 * (N - 1) * (raw.eta2 - raw.eta1))
    eta = (0.5 * (raw.eta1 + raw.eta2) - raw.eta12) * N
    lam = derive_effective_coupling(raw.g13, raw.Omega23, raw.Delta) * math.sqrt(N)
    omega_a = raw.omega_cavity - raw.omega_mw - raw.omega_cl
    if not omega_a > 0:
        raise NonPositiveOmegaA(
            f"omega - omega_mw - omega_cl = {omega_a!r} must be positive"
        )
    return ModelParams(
        omega_a=omega_a,
        omega_b=omega_0 - raw.omega_mw,
        eta=eta,
        lam=lam,
        Omega=raw.Omega_mw,
        N=N,
    )


def compute_w(params: ModelParams) -> CompositeCoupling:
    """Composite coupling ``w = eta + lam**2 / omega_a``."""
    return CompositeCoupling(params.eta + params.lam * params.lam / params.omega_a)
