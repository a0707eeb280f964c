"""Coupled two-mode non-Hermitian dynamics.

The two longest-lived spatial modes evolve under

    d/dt (c1, c2) = [[E0 + Delta, J], [J, E0 - Delta]] (c1, c2) + (g1, g2)

with E0 = (i w1 - G1 + i w2 - G2)/2, Delta = (i w1 - G1 - i w2 + G2)/2, and J
the inhomogeneity coupling.  Eigenvalues are E0 +/- sqrt(Delta^2 + J^2); the
pair coalesces (exceptional point) when Delta^2 + J^2 = 0.

The gain-free propagator is closed form,

    c(t) = e^(E0 t) [cosh(mu t) I + sinh(mu t)/mu * M] c(0),

with mu = sqrt(Delta^2 + J^2) and M the traceless part of the matrix; with a
source term the equations are integrated by adaptive Runge-Kutta.  The pump
sweep rebuilds the system at every power (coupling, light shift, broadening,
spin-exchange shift and gain all track the pump polarization) and reads out
excitation numbers after a fixed interrogation time.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from spindiff.signals import LorentzianComponent

__all__ = [
    "CoupledSystem",
    "ModeAmplitudes",
    "SweepPoint",
    "PumpSweepConfig",
    "EigenDecomposition",
    "build_system",
    "system_matrix",
    "eigenvalues",
    "mode_displacements",
    "evolve",
    "exchange_trace",
    "excitation_number",
    "pump_sweep",
]

_COALESCENCE_RTOL = 1e-12


@dataclass(frozen=True)
class CoupledSystem:
    """Parameters of the two-mode model: common rate E0, half-difference
    Delta, coupling J and additive gain vector."""

    e0: complex
    delta: complex
    coupling: complex
    gain: tuple[complex, complex] = (0j, 0j)

    @property
    def has_gain(self) -> bool:
        return self.gain[0] != 0 or self.gain[1] != 0

    def mode_rates(self) -> tuple[complex, complex]:
        """Back out (i w1 - G1, i w2 - G2); exact inverse of build_system."""
        return self.e0 + self.delta, self.e0 - self.delta


@dataclass(frozen=True)
class ModeAmplitudes:
    c1: complex
    c2: complex
    time: float = 0.0

    def __post_init__(self):
        if not (cmath.isfinite(self.c1) and cmath.isfinite(self.c2)):
            raise ValueError("amplitudes must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2], dtype=complex)


class EigenDecomposition(NamedTuple):
    values: tuple[complex, complex]
    coalesced: bool


@dataclass(frozen=True)
class SweepPoint:
    """One pump power of the sweep: excitation numbers, resonance
    frequencies/linewidths (Hz), phases, and the coupling classifier."""

    power: float
    n1: float
    n2: float
    f1_hz: float
    f2_hz: float
    g1_hz: float
    g2_hz: float
    phi1: float
    phi2: float
    j_over_delta: float
    regime: str
    abs_j: float = 0.0
    displacement1: float = 0.0
    displacement2: float = 0.0

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("excitation numbers must be >= 0")


def build_system(
    omega1: float,
    omega2: float,
    gamma1: float,
    gamma2: float,
    coupling: complex = 0j,
    gain: tuple[complex, complex] = (0j, 0j),
) -> CoupledSystem:
    """Assemble the coupled system from per-mode frequencies and decay rates."""
    if gamma1 <= 0 or gamma2 <= 0:
        raise ValueError("decay rates must be > 0")
    r1 = 1j * omega1 - gamma1
    r2 = 1j * omega2 - gamma2
    return CoupledSystem(
        e0=(r1 + r2) / 2.0,
        delta=(r1 - r2) / 2.0,
        coupling=complex(coupling),
        gain=(complex(gain[0]), complex(gain[1])),
    )


def system_matrix(system: CoupledSystem) -> np.ndarray:
    return np.array(
        [
            [system.e0 + system.delta, system.coupling],
            [system.coupling, system.e0 - system.delta],
        ],
        dtype=complex,
    )


def eigenvalues(system: CoupledSystem) -> EigenDecomposition:
    """E0 +/- sqrt(Delta^2 + J^2), descending real part (ties by imaginary
    part); coalescence flag marks an exceptional point."""
    mu = cmath.sqrt(system.delta**2 + system.coupling**2)
    lam = [system.e0 + mu, system.e0 - mu]
    lam.sort(key=lambda z: (-z.real, -z.imag))
    coalesced = abs(mu) < _COALESCENCE_RTOL * max(abs(system.e0), 1e-300)
    return EigenDecomposition(values=(lam[0], lam[1]), coalesced=coalesced)


def _eigvecs_sorted(system: CoupledSystem):
    vals, vecs = np.linalg.eig(system_matrix(system))
    order = np.argsort([(-v.real, -v.imag) for v in vals], axis=0)[:, 0]
    return vals[order], vecs[:, order]


def mode_displacements(system: CoupledSystem, z_overlap: float) -> tuple[float, float]:
    """<z> of each hybridized eigenmode, given the bare-mode matrix element
    <s1|z|s2> (the diagonal elements vanish by parity)."""
    _, vecs = _eigvecs_sorted(system)
    out = []
    for m in range(2):
        v = vecs[:, m]
        num = 2.0 * (np.conj(v[0]) * v[1]).real * z_overlap
        out.append(float(num / (abs(v[0]) ** 2 + abs(v[1]) ** 2)))
    return out[0], out[1]


def _sinhc(z: complex) -> complex:
    """sinh(z)/z with the small-argument series."""
    if abs(z) < 1e-6:
        z2 = z * z
        return 1.0 + z2 / 6.0 + z2 * z2 / 120.0
    return cmath.sinh(z) / z


def _propagator(system: CoupledSystem, t: float) -> np.ndarray:
    mu = cmath.sqrt(system.delta**2 + system.coupling**2)
    ch = cmath.cosh(mu * t)
    sh_t = t * _sinhc(mu * t)  # sinh(mu t)/mu, finite at mu -> 0
    m_traceless = np.array(
        [[system.delta, system.coupling], [system.coupling, -system.delta]],
        dtype=complex,
    )
    return cmath.exp(system.e0 * t) * (ch * np.eye(2) + sh_t * m_traceless)


def evolve(
    system: CoupledSystem,
    c0: ModeAmplitudes,
    t: float,
    *,
    method: str = "auto",
    rtol: float = 1e-10,
) -> ModeAmplitudes:
    """Propagate the amplitudes for time t.

    method="auto" uses the closed-form propagator when the system has no
    gain and adaptive Runge-Kutta otherwise; "closed" and "rk" force a path
    ("closed" rejects systems with gain).
    """
    if t < 0:
        raise ValueError("time must be >= 0")
    if method not in ("auto", "closed", "rk"):
        raise ValueError(f"unknown method {method!r}")
    if method == "closed" and system.has_gain:
        raise ValueError("closed-form propagator does not support gain")
    if method == "auto":
        method = "rk" if system.has_gain else "closed"
    if t == 0:
        return ModeAmplitudes(c0.c1, c0.c2, c0.time)

    if method == "closed":
        c = _propagator(system, t) @ c0.as_array()
        return ModeAmplitudes(complex(c[0]), complex(c[1]), c0.time + t)

    a = system_matrix(system)
    g = np.array(system.gain, dtype=complex)

    def rhs(_t, y):
        c = y[:2] + 1j * y[2:]
        dc = a @ c + g
        return np.concatenate([dc.real, dc.imag])

    y0 = np.concatenate([c0.as_array().real, c0.as_array().imag])
    sol = solve_ivp(rhs, (0.0, t), y0, method="RK45", rtol=rtol, atol=1e-14)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    c = sol.y[:2, -1] + 1j * sol.y[2:, -1]
    return ModeAmplitudes(complex(c[0]), complex(c[1]), c0.time + t)


def exchange_trace(
    system: CoupledSystem, c0: ModeAmplitudes, times: Sequence[float]
) -> np.ndarray:
    """|c1|^2 and |c2|^2 on a time grid (closed form, gain-free), shape (n, 2)."""
    if system.has_gain:
        raise ValueError("exchange trace is defined for the gain-free system")
    out = np.empty((len(times), 2))
    for i, t in enumerate(times):
        c = _propagator(system, float(t)) @ c0.as_array()
        out[i, 0] = abs(c[0]) ** 2
        out[i, 1] = abs(c[1]) ** 2
    return out


def excitation_number(component: LorentzianComponent) -> float:
    """Excitation number of a fitted resonance, N = pi |A| Gamma.

    This is the frequency integral of the magnitude-squared complex
    Lorentzian normalized by the peak magnitude |A|; integrating the X/Y
    quadratures directly gives the same value.
    """
    return math.pi * component.amplitude * component.linewidth


# ---------------------------------------------------------------------------
# pump-power sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PumpSweepConfig:
    """Fully resolved constants for one pump sweep.

    The harness assembles this from the scenario: light-shift/broadening
    slopes fold kappa_shift/kappa_broad with the per-mode effective pump
    intensity at unit power, the coupling folds J_scale with the vapor
    density, gains fold the pump projections, and the spin-exchange shift
    folds kappa_SE with the magnetization proxy at full polarization.
    """

    powers: tuple[float, ...]          # W, ascending
    saturation_power: float            # W
    gamma1: float                      # 1/s, base decay of mode 1
    gamma2: float                      # 1/s, base decay of mode 2
    omega1: float = 0.0                # rad/s detuning at zero power
    omega2: float = 0.0
    coupling_max: float = 0.0          # |J| at p_A = 1 (J_scale * N_A), 1/s
    coupling_phase: float = math.pi / 2  # arg(J); pi/2 for a frequency-type gradient
    shift_slope1: float = 0.0          # rad/s per W (light shift)
    shift_slope2: float = 0.0
    broad_slope1: float = 0.0          # 1/s per W (power broadening)
    broad_slope2: float = 0.0
    se_shift_max: float = 0.0          # rad/s at p_A = 1, applied with opposite sign
    gain1: float = 0.0                 # 1/s at p_A = 1
    gain2: float = 0.0
    init_amplitude: complex = 1.0 + 0j  # c(0) = (init * p_A, 0)
    interrogation_time: float = 1.0    # s
    z_overlap: float = 0.0             # <s1|z|s2>, for displacement reporting

    def __post_init__(self):
        if len(self.powers) == 0:
            raise ValueError("power grid must be nonempty")
        if any(b > a for a, b in zip(self.powers[1:], self.powers[:-1])):
            raise ValueError("power grid must be ascending")
        if self.saturation_power <= 0:
            raise ValueError("saturation power must be > 0")
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ValueError("decay rates must be > 0")


def system_at_power(cfg: PumpSweepConfig, power: float) -> tuple[CoupledSystem, float]:
    """Coupled system at one pump power; returns (system, p_A)."""
    p_a = power / (power + cfg.saturation_power)
    j = cfg.coupling_max * p_a * cmath.exp(1j * cfg.coupling_phase)
    # light shift up, spin-exchange shift down: the two compete across the cell
    w1 = cfg.omega1 + cfg.shift_slope1 * power - cfg.se_shift_max * p_a
    w2 = cfg.omega2 + cfg.shift_slope2 * power - cfg.se_shift_max * p_a
    g1 = cfg.gamma1 + cfg.broad_slope1 * power
    g2 = cfg.gamma2 + cfg.broad_slope2 * power
    gain = (cfg.gain1 * p_a, cfg.gain2 * p_a)
    return build_system(w1, w2, g1, g2, j, gain), p_a


def pump_sweep(cfg: PumpSweepConfig) -> list[SweepPoint]:
    """Evolve the pump-dependent system over the power grid and read out
    per-mode excitation numbers, frequencies, linewidths and phases."""
    points = []
    for power in cfg.powers:
        system, p_a = system_at_power(cfg, power)
        c0 = ModeAmplitudes(cfg.init_amplitude * p_a, 0j)
        if power == 0 and not system.has_gain:
            c = c0
        else:
            c = evolve(system, c0, cfg.interrogation_time)
        g1 = cfg.gamma1 + cfg.broad_slope1 * power
        g2 = cfg.gamma2 + cfg.broad_slope2 * power
        n1 = math.pi * abs(c.c1) * g1
        n2 = math.pi * abs(c.c2) * g2
        lam = eigenvalues(CoupledSystem(system.e0, system.delta, system.coupling)).values
        jod = abs(system.coupling / system.delta) if system.delta != 0 else math.inf
        d1, d2 = mode_displacements(system, cfg.z_overlap)
        points.append(
            SweepPoint(
                power=power,
                n1=n1,
                n2=n2,
                f1_hz=lam[0].imag / (2 * math.pi),
                f2_hz=lam[1].imag / (2 * math.pi),
                g1_hz=-lam[0].real / (2 * math.pi),
                g2_hz=-lam[1].real / (2 * math.pi),
                phi1=cmath.phase(c.c1) if c.c1 != 0 else 0.0,
                phi2=cmath.phase(c.c2) if c.c2 != 0 else 0.0,
                j_over_delta=jod,
                regime="coupled" if jod > 1 else "independent",
                abs_j=abs(system.coupling),
                displacement1=d1,
                displacement2=d2,
            )
        )
    return points
