"""Lock-in spectrum synthesis and composite line-shape fitting.

The demodulated magnetic-resonance signal of mode m is a complex Lorentzian

    X + iY = A e^(i phi) * Gamma / (Gamma + i (f - f0))

with half-width Gamma (Hz), so a composite trace is a sum of such components
plus a constant complex background.  Fitting inverts that model with damped
least squares over all parameters; peak-picking with linewidth halving seeds
the overlapping narrow/wide decomposition that a naive two-peak search misses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

__all__ = [
    "LorentzianComponent",
    "Spectrum",
    "FitResult",
    "FitError",
    "complex_lorentzian",
    "synthesize_spectrum",
    "fit_lorentzians",
    "spearman",
    "asymptotic_linear_fit",
]


def _wrap_phase(phi: float) -> float:
    """Wrap into (-pi, pi]."""
    w = math.fmod(phi + math.pi, 2 * math.pi)
    if w <= 0:
        w += 2 * math.pi
    return w - math.pi


@dataclass(frozen=True)
class LorentzianComponent:
    """One fitted resonance: amplitude, half-width (Hz), center (Hz), phase."""

    amplitude: float
    linewidth: float
    center: float
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.linewidth <= 0:
            raise ValueError("linewidth must be > 0")
        object.__setattr__(self, "phase", _wrap_phase(self.phase))


@dataclass(frozen=True)
class Spectrum:
    """Lock-in X/Y arrays on a strictly increasing frequency grid."""

    frequency: np.ndarray
    x: np.ndarray
    y: np.ndarray
    noise: float = 0.0

    def __post_init__(self):
        f = np.asarray(self.frequency, dtype=float)
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if len(self.x) != len(f) or len(self.y) != len(f):
            raise ValueError("X/Y length must match the grid")


class FitError(RuntimeError):
    """Fit did not converge; carries the last iterate and cost."""

    def __init__(self, message, components=None, cost=None):
        super().__init__(message)
        self.components = components
        self.cost = cost


@dataclass
class FitResult:
    components: list[LorentzianComponent]
    background: complex
    residual_rms: float
    overfit_warning: bool = False
    cost_trace: list[float] = field(default_factory=list)


def complex_lorentzian(freq, component: LorentzianComponent):
    """A e^(i phi) Gamma / (Gamma + i (f - f0))."""
    f = np.asarray(freq, dtype=float)
    return (
        component.amplitude
        * np.exp(1j * component.phase)
        * component.linewidth
        / (component.linewidth + 1j * (f - component.center))
    )


def synthesize_spectrum(
    components,
    background: complex = 0.0,
    grid=None,
    noise: float = 0.0,
    seed: int | None = None,
) -> Spectrum:
    """Sum of complex Lorentzians plus background, with seeded Gaussian noise
    added independently to X and Y.  Deterministic for a fixed seed."""
    f = np.asarray(grid, dtype=float)
    s = np.full(f.shape, complex(background), dtype=complex)
    for comp in components:
        s = s + complex_lorentzian(f, comp)
    x, y = s.real.copy(), s.imag.copy()
    if noise > 0:
        rng = np.random.default_rng(seed)
        x = x + rng.normal(0.0, noise, size=f.shape)
        y = y + rng.normal(0.0, noise, size=f.shape)
    return Spectrum(frequency=f, x=x, y=y, noise=noise)


def _model(params, f, n_comp):
    s = np.full(f.shape, params[-2] + 1j * params[-1], dtype=complex)
    for j in range(n_comp):
        a, g, f0, phi = params[4 * j : 4 * j + 4]
        s = s + a * np.exp(1j * phi) * g / (g + 1j * (f - f0))
    return s


def _residuals(params, f, x, y, n_comp):
    s = _model(params, f, n_comp)
    return np.concatenate([s.real - x, s.imag - y])


def _initial_guess(spec: Spectrum, n_comp: int):
    f, x, y = spec.frequency, spec.x, spec.y
    n_edge = max(3, len(f) // 10)
    bg = complex(
        np.median(np.concatenate([x[:n_edge], x[-n_edge:]])),
        np.median(np.concatenate([y[:n_edge], y[-n_edge:]])),
    )
    mag = np.abs(x + 1j * y - bg)
    i_pk = int(np.argmax(mag))
    a_pk = max(mag[i_pk], 1e-12)
    # half-power span around the main peak
    above = mag > a_pk / math.sqrt(2)
    left = i_pk
    while left > 0 and above[left - 1]:
        left -= 1
    right = i_pk
    while right < len(f) - 1 and above[right + 1]:
        right += 1
    width = max((f[right] - f[left]) / 2.0, 2.0 * (f[1] - f[0]))
    phase0 = math.atan2(y[i_pk] - bg.imag, x[i_pk] - bg.real)

    # nested components share the peak position; widths halve successively so
    # overlapping narrow/wide pairs are separable from the start
    params = []
    for j in range(n_comp):
        params += [a_pk / n_comp, width / (2.0**j), f[i_pk], phase0]
    params += [bg.real, bg.imag]
    return np.array(params), i_pk, a_pk


def fit_lorentzians(spec: Spectrum, n_components: int, *, max_iter: int = 500) -> FitResult:
    """Damped least-squares fit of n complex Lorentzians plus a constant
    complex background.

    Converged when the relative cost change drops below 1e-10 (or the
    iteration cap is reached, which raises FitError with the last iterate).
    Components are returned sorted by ascending linewidth, ties by center.
    """
    if n_components < 1:
        raise ValueError("need at least one component")
    f, x, y = spec.frequency, spec.x, spec.y
    p0, i_pk, a_pk = _initial_guess(spec, n_components)

    n_par = 4 * n_components + 2
    lo = np.full(n_par, -np.inf)
    hi = np.full(n_par, np.inf)
    span = f[-1] - f[0]
    for j in range(n_components):
        lo[4 * j + 0] = 0.0  # amplitude
        lo[4 * j + 1] = (f[1] - f[0]) / 10.0  # linewidth
        hi[4 * j + 1] = 10.0 * span
        lo[4 * j + 2] = f[0] - span  # center
        hi[4 * j + 2] = f[-1] + span
    p0 = np.clip(p0, lo + 1e-15, hi - 1e-15)

    res = least_squares(
        _residuals,
        p0,
        args=(f, x, y, n_components),
        bounds=(lo, hi),
        method="trf",
        ftol=1e-10,
        xtol=1e-14,
        gtol=1e-14,
        max_nfev=max_iter * n_par,
    )
    if not res.success and res.status == 0:
        comps = _collect(res.x, n_components)
        raise FitError("fit did not converge within the iteration budget",
                       components=comps, cost=res.cost)

    comps = _collect(res.x, n_components)
    background = complex(res.x[-2], res.x[-1])
    rms = math.sqrt(np.mean(res.fun**2))
    # more components than resolvable peaks: amplitudes collapse toward zero
    overfit = any(c.amplitude < 1e-3 * a_pk for c in comps)
    return FitResult(
        components=comps,
        background=background,
        residual_rms=rms,
        overfit_warning=overfit,
        cost_trace=[float(res.cost)],
    )


def _collect(params, n_comp) -> list[LorentzianComponent]:
    comps = []
    for j in range(n_comp):
        a, g, f0, phi = params[4 * j : 4 * j + 4]
        if a < 0:
            a, phi = -a, phi + math.pi
        comps.append(LorentzianComponent(float(a), float(g), float(f0), float(phi)))
    comps.sort(key=lambda c: (c.linewidth, c.center))
    return comps


def _average_ranks(v: np.ndarray) -> np.ndarray:
    """Fractional ranks, ties averaged."""
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v), dtype=float)
    i = 0
    sorted_v = v[order]
    while i < len(v):
        j = i
        while j + 1 < len(v) and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman rank correlation: Pearson correlation of averaged ranks.

    Returns NaN for a constant input (rank variance zero); callers should
    treat NaN as the degenerate-input flag.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("inputs must have equal length")
    if len(x) < 3:
        raise ValueError("need at least 3 points")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sx = math.sqrt(np.sum(dx * dx))
    sy = math.sqrt(np.sum(dy * dy))
    if sx == 0.0 or sy == 0.0:
        return float("nan")
    return float(np.sum(dx * dy) / (sx * sy))


def asymptotic_linear_fit(powers, values, tail_fraction: float = 0.5):
    """OLS slope/intercept over the top `tail_fraction` of the power range.

    The tail is selected on the power axis (not by point count), so a
    low-power plateau is excluded once tail_fraction is small enough.
    """
    p = np.asarray(powers, dtype=float)
    v = np.asarray(values, dtype=float)
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must be in (0, 1]")
    cut = p.max() - tail_fraction * (p.max() - p.min())
    sel = p >= cut
    if sel.sum() < 3:
        raise ValueError("fewer than 3 points in the requested tail")
    slope, intercept = np.polyfit(p[sel], v[sel], 1)
    return float(slope), float(intercept)
