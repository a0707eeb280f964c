"""Vapor, buffer-gas and relaxation model for the alkali cell.

Everything here is a closed-form scalar model: saturated vapor density from
log10 P = A - B/T, the pressure/temperature scaling of the diffusion
coefficient, the composite decoherence rate assembled from spin-destruction
and spin-exchange collision rates, on-resonance optical thickness, pump
saturation, the noble-gas magnetization proxy, and the dirty-wall effective
cell radius used to fit the temperature dependence of the linewidths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "GasSpec",
    "RateTable",
    "vapor_density",
    "diffusion_coefficient",
    "total_decoherence_rate",
    "optical_thickness",
    "pump_polarization",
    "noble_gas_magnetization",
    "effective_radius",
    "K_BOLTZMANN",
    "TORR_TO_PA",
    "P_REF_TORR",
    "T_REF_K",
]

K_BOLTZMANN = 1.380649e-23  # J/K
TORR_TO_PA = 101325.0 / 760.0
P_REF_TORR = 760.0
T_REF_K = 273.15


@dataclass(frozen=True)
class GasSpec:
    """Buffer-gas and vapor parameters.

    Defaults: 500 torr neon buffer + 20 torr nitrogen quench gas, cesium
    vapor-pressure constants (liquid phase, log10 P[torr] = A - B/T), a
    Cs-in-Ne diffusion coefficient at STP reference, and the cesium
    gyromagnetic ratio scale.  All are per-cell configuration, not constants
    of nature.
    """

    buffer_pressure_torr: float = 500.0
    quench_pressure_torr: float = 20.0
    vapor_pressure_a: float = 4.165
    vapor_pressure_b: float = 3830.0
    diffusion_ref: float = 2.0e-5  # m^2/s at 760 torr, 273.15 K
    sigma_pump: float = 1.0e-17  # on-resonance scattering cross-section, m^2
    k_spin_exchange: float = 1.0  # normalized units for the M proxy
    gyromagnetic_ratio: float = 2.2e10  # rad/s/T

    def __post_init__(self):
        if self.buffer_pressure_torr < 0 or self.quench_pressure_torr < 0:
            raise ValueError("pressures must be >= 0")
        if self.diffusion_ref <= 0:
            raise ValueError("diffusion_ref must be > 0")
        if self.sigma_pump <= 0:
            raise ValueError("sigma_pump must be > 0")


@dataclass(frozen=True)
class RateTable:
    """Relaxation rates (1/s) entering the composite decoherence rate.

    epsilon is the polarization-dependent slowing-down factor; q_se scales
    the alkali-alkali spin-exchange broadening.  Both are scenario scalars.
    """

    sd_cs_ne: float = 0.0
    sd_cs_n2: float = 0.0
    sd_cs_cs: float = 0.0
    se_cs_ne: float = 0.0
    se_cs_cs: float = 0.0
    pump: float = 0.0
    gradient: float = 0.0
    epsilon: float = 1.0
    q_se: float = 1.0

    def __post_init__(self):
        rates = (
            self.sd_cs_ne,
            self.sd_cs_n2,
            self.sd_cs_cs,
            self.se_cs_ne,
            self.se_cs_cs,
            self.pump,
            self.gradient,
        )
        if any(r < 0 for r in rates):
            raise ValueError("rates must be >= 0")
        if self.epsilon <= 0 or self.q_se <= 0:
            raise ValueError("epsilon and q_se must be > 0")


def vapor_density(temperature: float, gas: GasSpec) -> float:
    """Alkali number density N_A (1/m^3) from log10 P[torr] = A - B/T."""
    if temperature <= 0:
        raise ValueError("temperature must be > 0 K")
    p_torr = 10.0 ** (gas.vapor_pressure_a - gas.vapor_pressure_b / temperature)
    return p_torr * TORR_TO_PA / (K_BOLTZMANN * temperature)


def diffusion_coefficient(temperature: float, gas: GasSpec) -> float:
    """D = D_ref (P_ref / P_buffer) (T / T_ref)^(3/2), m^2/s."""
    if gas.buffer_pressure_torr <= 0:
        raise ValueError("buffer pressure must be > 0 for diffusion scaling")
    return (
        gas.diffusion_ref
        * (P_REF_TORR / gas.buffer_pressure_torr)
        * (temperature / T_REF_K) ** 1.5
    )


def total_decoherence_rate(rates: RateTable) -> float:
    """Gamma = (1/eps)(SD rates + SE_Cs-Ne + pump) + (1/q_se) SE_Cs-Cs + grad."""
    return (
        (rates.sd_cs_ne + rates.sd_cs_n2 + rates.sd_cs_cs + rates.se_cs_ne + rates.pump)
        / rates.epsilon
        + rates.se_cs_cs / rates.q_se
        + rates.gradient
    )


def optical_thickness(density: float, gas: GasSpec, radius: float) -> float:
    """On-resonance optical thickness b0 = 2 N_A sigma R of a homogeneous cloud."""
    return 2.0 * density * gas.sigma_pump * radius


def pump_polarization(power: float, saturation_power: float) -> float:
    """Saturating alkali polarization p_A = P / (P + P_sat), in [0, 1)."""
    if power < 0:
        raise ValueError("power must be >= 0")
    if saturation_power <= 0:
        raise ValueError("saturation power must be > 0")
    return power / (power + saturation_power)


def noble_gas_magnetization(gas: GasSpec, density: float, polarization: float) -> float:
    """Noble-gas magnetization proxy M = k_SE N_A p_A (normalized units)."""
    if not 0.0 <= polarization <= 1.0:
        raise ValueError("polarization must be in [0, 1]")
    return gas.k_spin_exchange * density * polarization


def effective_radius(
    temperature: float,
    radius: float,
    gas: GasSpec,
    eta: float,
    *,
    density_ref: float = 1.0e15,
) -> float:
    """Dirty-wall effective radius R_eff = R / (1 + eta N_A(T)/N_ref).

    eta = 0 leaves the geometric radius; increasing vapor density shrinks the
    effective cell, mimicking alkali deposits at the walls.
    """
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return radius / (1.0 + eta * vapor_density(temperature, gas) / density_ref)
