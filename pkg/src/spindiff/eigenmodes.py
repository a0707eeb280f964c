"""Diffusive eigenmodes of a buffered vapor cell.

The transverse spin excitation S obeys dS/dt = D lap(S) - Gamma S, so the
stationary spatial modes are Helmholtz eigenfunctions.  For a spherical cell
they factorize into spherical Bessel functions and real spherical harmonics,

    s_nlp(r, theta, phi) = j_l(k_nl r) Y_lp(theta, phi),

with the wavenumbers k_nl fixed by the mixed (Robin) wall condition

    -j_l(kR) / j_l'(kR) = (2/3) * (1 + e^(-1/N)) / (1 - e^(-1/N)) * lambda * k.

lambda = 0 recovers Dirichlet walls (fully depolarizing), a large wall factor
approaches Neumann walls.  A rectangular wafer cell is handled with pure
Dirichlet walls, where the spectrum is closed-form.

Each returned mode is L2-normalized over the cell volume; its decay rate is
Gamma_m = D k_m^2 + Gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "CellSpec",
    "BoxSpec",
    "ModeIndex",
    "BoxModeIndex",
    "Mode",
    "spherical_j",
    "spherical_j_derivative",
    "real_spherical_harmonic",
    "harmonic_labels",
    "robin_wall_factor",
    "solve_sphere_roots",
    "solve_box_modes",
    "make_mode",
    "make_mode_catalog",
    "mode_value",
    "overlap_integral",
    "radial_norm_integral",
    "catalog_csv_rows",
    "SolverError",
    "QuadratureOrderError",
]

L_MAX = 3

# Orientation labels of the real spherical-harmonic basis, by degree l.
# Label -> |m| rank used for the |p-rank| <= l invariant.
_HARMONIC_RANK = {
    0: {"s": 0},
    1: {"z": 0, "x": 1, "y": 1},
    2: {"z2": 0, "xz": 1, "yz": 1, "x2y2": 2, "xy": 2},
    3: {"z3": 0, "xz2": 1, "yz2": 1, "zx2y2": 2, "xyz": 2, "x3": 3, "y3": 3},
}


class SolverError(RuntimeError):
    """Root bracketing/refinement failed after scanning the search window."""


class QuadratureOrderError(ValueError):
    """Requested quadrature order is below the supported minimum."""


# ---------------------------------------------------------------------------
# spherical Bessel functions, closed trigonometric forms
# ---------------------------------------------------------------------------

# Below this argument the trig forms lose digits to cancellation; switch to
# the ascending series.
_SERIES_CUTOFF = 0.5


def _series_j(l: int, x):
    # j_l(x) = sum_k (-1)^k x^(2k+l) / (2^k k! (2l+2k+1)!!)
    x = np.asarray(x, dtype=float)
    dfact = math.prod(range(2 * l + 1, 0, -2))  # (2l+1)!!
    term = x**l / dfact
    out = term.copy()
    for k in range(1, 12):
        term = term * (-(x * x)) / (2 * k * (2 * l + 2 * k + 1))
        out += term
    return out


def _series_j_derivative(l: int, x):
    x = np.asarray(x, dtype=float)
    dfact = math.prod(range(2 * l + 1, 0, -2))
    if l == 0:
        out = np.zeros_like(x)
        term = np.ones_like(x) / dfact
    else:
        out = l * x ** (l - 1) / dfact
        term = x**l / dfact
    for k in range(1, 12):
        term = term * (-(x * x)) / (2 * k * (2 * l + 2 * k + 1))
        out += (2 * k + l) * term / np.where(x == 0.0, 1.0, x)
    return out


def _trig_j(l: int, x):
    s, c = np.sin(x), np.cos(x)
    if l == 0:
        return s / x
    if l == 1:
        return s / x**2 - c / x
    if l == 2:
        return (3 / x**3 - 1 / x) * s - 3 * c / x**2
    # l == 3
    return (15 / x**4 - 6 / x**2) * s - (15 / x**3 - 1 / x) * c


def spherical_j(l: int, x):
    """Spherical Bessel function of the first kind, l in 0..3, x >= 0.

    Closed trigonometric forms with an ascending-series fallback near x = 0.
    """
    if l not in range(L_MAX + 1):
        raise ValueError(f"unsupported order l={l}; supported: 0..{L_MAX}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("argument must be non-negative")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    if np.any(small):
        out[small] = _series_j(l, x[small])
    if np.any(~small):
        out[~small] = _trig_j(l, x[~small])
    return out[0] if scalar else out


def spherical_j_derivative(l: int, x):
    """d/dx j_l(x), same domain restrictions as :func:`spherical_j`."""
    if l not in range(L_MAX + 1):
        raise ValueError(f"unsupported order l={l}; supported: 0..{L_MAX}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("argument must be non-negative")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    if np.any(small):
        out[small] = _series_j_derivative(l, x[small])
    big = ~small
    if np.any(big):
        xb = x[big]
        if l == 0:
            out[big] = -_trig_j(1, xb)
        else:
            # j_l' = j_{l-1} - (l+1)/x j_l
            out[big] = _trig_j(l - 1, xb) - (l + 1) / xb * _trig_j(l, xb)
    return out[0] if scalar else out


def _j_extended(l: int, x):
    """j_l for internal use with l in -1..4 (Lommel norms, recurrences)."""
    x = np.asarray(x, dtype=float)
    if l == -1:
        return np.cos(x) / x
    if l <= L_MAX:
        return spherical_j(l, x)
    # l == 4 via upward recurrence j_4 = (7/x) j_3 - j_2
    return (7.0 / x) * spherical_j(3, x) - spherical_j(2, x)


# ---------------------------------------------------------------------------
# real spherical harmonics, orthonormal on the unit sphere
# ---------------------------------------------------------------------------

_SQ = math.sqrt


def real_spherical_harmonic(l: int, label: str, theta, phi):
    """Real orthonormal spherical harmonic Y_l^label(theta, phi).

    The basis is labeled by Cartesian orientation (the l=1 "z" harmonic is
    proportional to cos(theta)), so the harmonic coupled by a z-gradient is
    unambiguous.
    """
    if l not in _HARMONIC_RANK or label not in _HARMONIC_RANK[l]:
        raise ValueError(f"no real harmonic with l={l}, label={label!r}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    if l == 0:
        return np.broadcast_to(_SQ(1 / (4 * math.pi)), np.broadcast(theta, phi).shape).copy()
    if l == 1:
        if label == "z":
            return _SQ(3 / (4 * math.pi)) * ct
        if label == "x":
            return _SQ(3 / (4 * math.pi)) * st * np.cos(phi)
        return _SQ(3 / (4 * math.pi)) * st * np.sin(phi)
    if l == 2:
        if label == "z2":
            return _SQ(5 / (16 * math.pi)) * (3 * ct**2 - 1)
        if label == "xz":
            return _SQ(15 / (4 * math.pi)) * st * ct * np.cos(phi)
        if label == "yz":
            return _SQ(15 / (4 * math.pi)) * st * ct * np.sin(phi)
        if label == "x2y2":
            return _SQ(15 / (16 * math.pi)) * st**2 * np.cos(2 * phi)
        return _SQ(15 / (16 * math.pi)) * st**2 * np.sin(2 * phi)
    # l == 3
    if label == "z3":
        return _SQ(7 / (16 * math.pi)) * (5 * ct**3 - 3 * ct)
    if label == "xz2":
        return _SQ(21 / (32 * math.pi)) * st * (5 * ct**2 - 1) * np.cos(phi)
    if label == "yz2":
        return _SQ(21 / (32 * math.pi)) * st * (5 * ct**2 - 1) * np.sin(phi)
    if label == "zx2y2":
        return _SQ(105 / (16 * math.pi)) * st**2 * ct * np.cos(2 * phi)
    if label == "xyz":
        return _SQ(105 / (16 * math.pi)) * st**2 * ct * np.sin(2 * phi)
    if label == "x3":
        return _SQ(35 / (32 * math.pi)) * st**3 * np.cos(3 * phi)
    return _SQ(35 / (32 * math.pi)) * st**3 * np.sin(3 * phi)


def harmonic_labels(l: int) -> tuple[str, ...]:
    """Orientation labels available at degree l, z-type first."""
    return tuple(_HARMONIC_RANK[l])


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CellSpec:
    """Spherical cell: radius, mean-free path and wall parameter of Eq.-style
    Robin condition.  N <~ 1 for an uncoated cell; lambda_mfp = 0 gives
    Dirichlet walls."""

    radius: float
    mean_free_path: float = 0.0
    wall_parameter: float = 1.0
    geometry: str = field(default="sphere", init=False)

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be > 0")
        if self.mean_free_path < 0:
            raise ValueError("mean_free_path must be >= 0")
        if self.wall_parameter <= 0:
            raise ValueError("wall_parameter must be > 0")


@dataclass(frozen=True)
class BoxSpec:
    """Rectangular cell with Dirichlet walls (wafer geometry)."""

    lx: float
    ly: float
    lz: float
    geometry: str = field(default="box", init=False)

    def __post_init__(self):
        if min(self.lx, self.ly, self.lz) <= 0:
            raise ValueError("all edge lengths must be > 0")


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Sphere mode index: radial n >= 0, degree l >= 0, orientation label p."""

    n: int
    l: int
    p: str

    def __post_init__(self):
        if self.n < 0 or self.l < 0:
            raise ValueError("indices must be non-negative")
        if self.l not in _HARMONIC_RANK or self.p not in _HARMONIC_RANK[self.l]:
            raise ValueError(f"invalid orientation label {self.p!r} for l={self.l}")

    @property
    def rank(self) -> int:
        return _HARMONIC_RANK[self.l][self.p]

    def __str__(self) -> str:
        return f"s{self.n}{self.l}{self.p}"


@dataclass(frozen=True)
class BoxModeIndex:
    nx: int
    ny: int
    nz: int

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError("box indices start at 1")

    def __str__(self) -> str:
        return f"b{self.nx}{self.ny}{self.nz}"


@dataclass(frozen=True)
class Mode:
    """One diffusive eigenmode: index, wavenumber, decay rate Gamma_m,
    precession frequency omega_m, and the L2 normalization constant."""

    index: ModeIndex
    k: float
    decay_rate: float
    frequency: float = 0.0
    norm: float = 1.0

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("wavenumber must be > 0")
        if self.decay_rate < 0:
            raise ValueError("decay rate must be >= 0")


# ---------------------------------------------------------------------------
# Robin boundary condition and root solving
# ---------------------------------------------------------------------------


def robin_wall_factor(cell: CellSpec, k: float) -> float:
    """Right-hand side of the wall condition:
    (2/3) * (1 + e^(-1/N)) / (1 - e^(-1/N)) * lambda * k."""
    if cell.wall_parameter <= 0:
        raise ValueError("wall parameter must be > 0")
    e = math.exp(-1.0 / cell.wall_parameter)
    return (2.0 / 3.0) * (1 + e) / (1 - e) * cell.mean_free_path * k


def _wall_slope(cell: CellSpec) -> float:
    """Dimensionless a such that the wall condition reads
    -j_l(x)/j_l'(x) = a*x in x = kR units."""
    e = math.exp(-1.0 / cell.wall_parameter)
    return (2.0 / 3.0) * (1 + e) / (1 - e) * cell.mean_free_path / cell.radius


def _residual(l: int, a: float):
    """Pole-free form of the wall condition: f(x) = j_l(x) + a x j_l'(x)."""

    def f(x):
        return spherical_j(l, x) + a * x * spherical_j_derivative(l, x)

    return f


def _ratio_form(l: int, a: float):
    """Literal form -j_l/j_l' - a x; has poles at zeros of j_l'."""

    def g(x):
        jp = spherical_j_derivative(l, x)
        return -spherical_j(l, x) / jp - a * x

    return g


def solve_sphere_roots(cell: CellSpec, l: int, count: int, *, x_max: float = 200.0) -> np.ndarray:
    """First `count` wavenumbers k_nl of the Robin problem, strictly increasing.

    Brackets are located by scanning the ratio form of the wall condition;
    sign flips caused by poles of j_l/j_l' (zeros of j_l') are rejected by
    requiring the pole-free residual j_l + a x j_l' to change sign over the
    same bracket.  Genuine brackets are refined to ~1e-15 relative.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    a = _wall_slope(cell)
    fres = _residual(l, a)
    frat = _ratio_form(l, a)

    roots_x: list[float] = []
    step = math.pi / 64
    # l >= 1 residuals vanish like x^l at the origin: start clear of it.
    x0 = 1e-4 if l == 0 else 1e-2
    xs = np.arange(x0, x_max, step)
    rat = frat(xs)
    res = fres(xs)
    for i in range(len(xs) - 1):
        if len(roots_x) >= count:
            break
        g0, g1 = rat[i], rat[i + 1]
        if not np.isfinite(g0) or not np.isfinite(g1) or g0 * g1 > 0:
            continue
        r0, r1 = res[i], res[i + 1]
        if r0 * r1 > 0:
            # pole of -j_l/j_l' crossed, not an eigenvalue
            continue
        x_root = brentq(fres, xs[i], xs[i + 1], xtol=1e-300, rtol=4 * np.finfo(float).eps)
        roots_x.append(float(x_root))
    if len(roots_x) < count:
        raise SolverError(
            f"found only {len(roots_x)}/{count} roots for l={l} scanning kR in "
            f"(0, {x_max}); widen x_max or check wall parameters"
        )
    return np.array(roots_x[:count]) / cell.radius


def solve_box_modes(box: BoxSpec, count: int) -> list[tuple[BoxModeIndex, float]]:
    """First `count` Dirichlet modes of the rectangular cell, ascending k.

    k = pi sqrt((nx/Lx)^2 + (ny/Ly)^2 + (nz/Lz)^2); ties are broken by
    descending lexicographic index order, so a cube's second mode is (2,1,1).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    nmax = 2
    while True:
        cands = []
        for nx in range(1, nmax + 1):
            for ny in range(1, nmax + 1):
                for nz in range(1, nmax + 1):
                    k = math.pi * math.sqrt(
                        (nx / box.lx) ** 2 + (ny / box.ly) ** 2 + (nz / box.lz) ** 2
                    )
                    cands.append((k, (-nx, -ny, -nz), BoxModeIndex(nx, ny, nz)))
        cands.sort()
        # guard: the highest wanted k must not depend on the enumeration cut
        k_guard = math.pi * (nmax + 1) / max(box.lx, box.ly, box.lz)
        if len(cands) >= count and cands[count - 1][0] < k_guard:
            return [(idx, k) for k, _, idx in cands[:count]]
        nmax += 2


# ---------------------------------------------------------------------------
# normalized mode functions
# ---------------------------------------------------------------------------


def radial_norm_integral(l: int, k: float, radius: float) -> float:
    """int_0^R j_l(kr)^2 r^2 dr via the Lommel closed form
    (R^3/2) [j_l(kR)^2 - j_{l-1}(kR) j_{l+1}(kR)]."""
    x = k * radius
    return (radius**3 / 2.0) * (
        spherical_j(l, x) ** 2 - float(_j_extended(l - 1, x)) * float(_j_extended(l + 1, x))
    )


def make_mode(
    cell: CellSpec,
    index: ModeIndex,
    k: float,
    *,
    diffusion: float = 0.0,
    base_rate: float = 0.0,
    frequency: float = 0.0,
) -> Mode:
    """Assemble a normalized Mode with Gamma_m = D k^2 + Gamma."""
    norm = 1.0 / math.sqrt(radial_norm_integral(index.l, k, cell.radius))
    return Mode(
        index=index,
        k=k,
        decay_rate=diffusion * k**2 + base_rate,
        frequency=frequency,
        norm=norm,
    )


def make_mode_catalog(
    cell: CellSpec,
    *,
    n_radial: int = 3,
    l_max: int = L_MAX,
    diffusion: float = 0.0,
    base_rate: float = 0.0,
    frequency: float = 0.0,
) -> list[Mode]:
    """All modes with n < n_radial, l <= l_max, every orientation, sorted by
    ascending k (then index)."""
    modes = []
    for l in range(l_max + 1):
        ks = solve_sphere_roots(cell, l, n_radial)
        for n, k in enumerate(ks):
            for p in harmonic_labels(l):
                modes.append(
                    make_mode(
                        cell,
                        ModeIndex(n, l, p),
                        float(k),
                        diffusion=diffusion,
                        base_rate=base_rate,
                        frequency=frequency,
                    )
                )
    modes.sort(key=lambda m: (m.k, m.index))
    return modes


def mode_value(mode: Mode, cell: CellSpec, point: tuple[float, float, float]):
    """Normalized mode amplitude s_nlp at spherical point (r, theta, phi).

    Accepts arrays; raises for r outside the cell.
    """
    r, theta, phi = point
    r = np.asarray(r, dtype=float)
    if np.any(r > cell.radius * (1 + 1e-12)) or np.any(r < 0):
        raise ValueError("radial coordinate outside the cell")
    jl = spherical_j(mode.index.l, mode.k * r)
    return mode.norm * jl * real_spherical_harmonic(mode.index.l, mode.index.p, theta, phi)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

_MIN_ORDER = (8, 4, 4)


def _gl_grid(cell: CellSpec, order: tuple[int, int, int]):
    """Gauss-Legendre tensor grid over the ball, with volume weights."""
    nr, nt, npts = order
    if nr < _MIN_ORDER[0] or nt < _MIN_ORDER[1] or npts < _MIN_ORDER[2]:
        raise QuadratureOrderError(f"quadrature order {order} below minimum {_MIN_ORDER}")
    xr, wr = np.polynomial.legendre.leggauss(nr)
    r = 0.5 * cell.radius * (xr + 1.0)
    wr = 0.5 * cell.radius * wr
    xt, wt = np.polynomial.legendre.leggauss(nt)
    th = 0.5 * math.pi * (xt + 1.0)
    wt = 0.5 * math.pi * wt
    xp, wp = np.polynomial.legendre.leggauss(npts)
    ph = math.pi * (xp + 1.0)
    wp = math.pi * wp
    R, T, P = np.meshgrid(r, th, ph, indexing="ij")
    W = (
        wr[:, None, None]
        * wt[None, :, None]
        * wp[None, None, :]
        * R**2
        * np.sin(T)
    )
    return R, T, P, W


def overlap_integral(
    m1: Mode,
    m2: Mode,
    cell: CellSpec,
    weight: Callable | None = None,
    order: tuple[int, int, int] = (64, 32, 32),
) -> complex:
    """int s_1(r) * w(r) * s_2(r) dV over the cell by Gauss-Legendre product
    quadrature in (r, theta, phi).

    `weight` is called with spherical coordinate arrays (r, theta, phi) and
    may return complex values; None means w = 1.  Modes are real, so no
    conjugation is needed on m1.
    """
    R, T, P, W = _gl_grid(cell, order)
    v1 = mode_value(m1, cell, (R, T, P))
    v2 = mode_value(m2, cell, (R, T, P))
    integrand = v1 * v2
    if weight is not None:
        integrand = integrand * weight(R, T, P)
    return complex(np.sum(integrand * W))


def z_weight(r, theta, phi):
    """Cartesian z as a spherical-coordinate weight (gradient coupling)."""
    return r * np.cos(theta)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def catalog_csv_rows(modes: Sequence[Mode], cell: CellSpec) -> list[str]:
    """CSV lines (n, l, p, kR, k, gamma_m, norm) for a mode catalog."""
    rows = ["n,l,p,kR,k_per_m,gamma_m_per_s,norm"]
    for m in modes:
        rows.append(
            f"{m.index.n},{m.index.l},{m.index.p},"
            f"{m.k * cell.radius:.12g},{m.k:.12g},{m.decay_rate:.12g},{m.norm:.12g}"
        )
    return rows
