"""Closed-form energies, adiabatic work, scaling fits, power optimum, bounds.

Everything here is a pure function of a cycle configuration or of sweep
data; nothing mutates shared state, so sweeps can evaluate these in
parallel and reduce in grid order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cycle import CycleConfig, GroundState
from .dynamics import (
    FixedDuration,
    ToSteadyState,
    apply_block_propagator,
    ramp_block_propagators,
    steady_state_direct,
)
from .model import CriticalExponents, gap, ground_state_energy, momentum_grid, tim_mode

__all__ = [
    "ScalingFit",
    "BoundResult",
    "UnusableWindowError",
    "appendix_energies",
    "w_infinity",
    "predicted_work_exponent",
    "fit_kz_exponent",
    "adiabatic_floor_time",
    "power_curve",
    "tau_opt",
    "eta_at_max_power",
    "efficiency_bound",
    "generalized_eta_power",
]


class UnusableWindowError(ValueError):
    """The requested fit window leaves too few or invalid points."""


@dataclass(frozen=True)
class ScalingFit:
    """Result of a log-log least-squares fit of excess work against tau2."""

    exponent: float
    amplitude: float
    residual: float
    window: tuple[float, float]
    n_points: int
    predicted: float | None = None


@dataclass(frozen=True)
class BoundResult:
    """Extremal gaps, effective temperatures and the efficiency ceiling."""

    delta_max: float
    delta_min: float
    t_max: float
    t_min: float
    eta_max: float
    delta_min_source: str  # "grid" or "continuum"


def appendix_energies(
    length: int, h1: float, h2: float, mu_e: float
) -> tuple[float, float, float]:
    """Closed-form corner energies in the strong-field regime.

    Returns (E_B, E_C, E_D); valid for |h1|, |h2| >> 1 with a two-rate
    energizing bath at mu' = 1 (documented, not enforced).
    """
    if not 0.0 < mu_e <= 1.0:
        raise ValueError(f"mu_e must lie in (0, 1], got {mu_e}")
    beta = (mu_e - 1.0) / (mu_e + 1.0)
    return length * h1 * beta, length * h2 * beta, -length * abs(h2)


def _two_rate(bath) -> tuple[float, float]:
    if bath.kappa1 != bath.kappa3 or bath.kappa2 != bath.kappa4:
        raise ValueError("bath is not of the two-rate (mu, mu') form")
    return bath.kappa1, bath.kappa2


def _energizing_corner_energies(cfg: CycleConfig) -> tuple[float, float]:
    """Exact E_B and E_C from the energizing steady state plus the first ramp."""
    ks = momentum_grid(cfg.length)
    rho_b = np.stack(
        [
            steady_state_direct(tim_mode(cfg.h1, k).matrix4(), cfg.energizing, cfg.fermion_sign)
            for k in ks
        ]
    )
    u_12 = ramp_block_propagators(ks, cfg.h1, cfg.h2, cfg.tau1, eta=cfg.unitary_eta)
    rho_c = apply_block_propagator(u_12, rho_b)
    h1s = np.stack([tim_mode(cfg.h1, k).matrix4() for k in ks])
    h2s = np.stack([tim_mode(cfg.h2, k).matrix4() for k in ks])
    e_b = float(np.einsum("mij,mji->", h1s, rho_b).real)
    e_c = float(np.einsum("mij,mji->", h2s, rho_c).real)
    return e_b, e_c


def _check_relaxing_reaches_ground(cfg: CycleConfig) -> None:
    if isinstance(cfg.relaxing_policy, GroundState):
        return
    if cfg.relaxing is None:
        raise ValueError("no relaxing bath configured")
    ks = momentum_grid(cfg.length)
    worst = 1.0
    for k in ks:
        mode = tim_mode(cfg.h2, k)
        rho = steady_state_direct(mode.matrix4(), cfg.relaxing, cfg.fermion_sign)
        _, vecs = np.linalg.eigh(mode.matrix4())
        g = vecs[:, 0]
        worst = min(worst, float((g.conj() @ rho @ g).real))
    if worst < cfg.ground_population_min:
        raise ValueError(
            "relaxing bath does not reach the ground state: worst mode ground "
            f"population {worst:.6f} < required {cfg.ground_population_min}"
        )


def w_infinity(cfg: CycleConfig, method: str = "numeric") -> float:
    """Adiabatic-limit output work -(E_B - E_A^G + E_D^G - E_C).

    "numeric" combines exact dissipative steady states with exact
    ground-state energies and is valid for every engine class whose relaxing
    stroke ends in the ground state (asserted).  "analytic" uses the
    strong-field closed forms and is restricted to h1 >= 5, h2 <= -1,
    h1 >= |h2|.
    """
    if method == "numeric":
        _check_relaxing_reaches_ground(cfg)
        e_b, e_c = _energizing_corner_energies(cfg)
        e_a_g = ground_state_energy(cfg.h1, cfg.length)
        e_d_g = ground_state_energy(cfg.h2, cfg.length)
        return -(e_b - e_a_g + e_d_g - e_c)
    if method == "analytic":
        if not (cfg.h1 >= 5.0 and cfg.h2 <= -1.0 and cfg.h1 >= abs(cfg.h2)):
            raise ValueError(
                "analytic adiabatic work requires h1 >= 5, h2 <= -1 and "
                f"h1 >= |h2|; got h1={cfg.h1}, h2={cfg.h2}"
            )
        mu, mu_p = _two_rate(cfg.energizing)
        return -(2.0 * cfg.length / (mu + mu_p)) * (mu * cfg.h1 - mu_p * abs(cfg.h2))
    raise ValueError(f"unknown method {method!r}")


def predicted_work_exponent(exponents: CriticalExponents) -> float:
    """Power-law exponent of the excess work in the ramp duration."""
    nu, z, d = exponents.nu, exponents.z, exponents.d
    if exponents.x == 2:
        return -nu * (d + z) / (nu * z + 1.0)
    return -nu * d / (nu * z + 1.0)


def adiabatic_floor_time(cfg: CycleConfig) -> float:
    """Ramp duration beyond which the slowest mode turns adiabatic.

    Past this time the excess work of a finite chain decays exponentially
    instead of following the universal power law, so scaling fits should not
    include slower ramps.  For a mode whose level crossing lies inside the
    ramp the scale is set by the Landau-Zener exponent pi b^2 tau / (2 dh);
    for uncrossed modes by the sudden-approximation parameter 2 dh / gap^2.
    """
    dh = abs(cfg.h1 - cfg.h2)
    lo, hi = min(cfg.h1, cfg.h2), max(cfg.h1, cfg.h2)
    floor = 0.0
    for k in momentum_grid(cfg.length):
        crossing = -np.cos(k)
        if lo < crossing < hi:
            b = 2.0 * np.sin(k)
            t = dh / (np.pi * b * b)
        else:
            g = min(gap(tim_mode(cfg.h1, k)), gap(tim_mode(cfg.h2, k)))
            t = 2.0 * dh / (g * g)
        floor = max(floor, float(t))
    return floor


def fit_kz_exponent(
    points,
    w_inf: float,
    window: tuple[float, float] | None = None,
    exponents: CriticalExponents | None = None,
) -> ScalingFit:
    """Ordinary least squares of log(W - W_inf) against log tau2.

    ``points`` is a sequence of (tau2, W) pairs.  All points inside the
    window must have positive excess work W - W_inf; fewer than 5 usable
    points or a nonpositive excess raises UnusableWindowError.
    """
    pts = sorted((float(t), float(w)) for t, w in points)
    if window is None:
        window = (pts[0][0], pts[-1][0])
    lo, hi = float(window[0]), float(window[1])
    sel = [(t, w) for t, w in pts if lo <= t <= hi]
    if len(sel) < 5:
        raise UnusableWindowError(
            f"window [{lo}, {hi}] contains {len(sel)} points; at least 5 required"
        )
    taus = np.array([t for t, _ in sel])
    excess = np.array([w - w_inf for _, w in sel])
    if np.any(excess <= 0.0):
        raise UnusableWindowError(
            "nonpositive excess work in window; wrong W_inf or outside the "
            "universal-scaling regime"
        )
    x = np.log(taus)
    y = np.log(excess)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return ScalingFit(
        exponent=float(slope),
        amplitude=float(np.exp(intercept)),
        residual=float(np.sqrt(np.mean(resid**2))),
        window=(lo, hi),
        n_points=len(sel),
        predicted=predicted_work_exponent(exponents) if exponents is not None else None,
    )


def power_curve(
    w_inf: float, amplitude: float, exponents: CriticalExponents, tau2: float
) -> float:
    """Model output power W_inf / tau2 + R tau2^-(nu d + x nu z + 1)/(nu z + 1)."""
    if tau2 <= 0:
        raise ValueError("tau2 must be positive")
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    nu, z, d, x = exponents.nu, exponents.z, exponents.d, exponents.x
    expo = -(nu * d + x * nu * z + 1.0) / (nu * z + 1.0)
    return w_inf / tau2 + amplitude * tau2**expo


def tau_opt(w_inf: float, amplitude: float, exponents: CriticalExponents) -> float:
    """Ramp duration maximizing the model power curve."""
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    if w_inf >= 0:
        raise ValueError("w_inf must be negative (engine convention)")
    nu, z, d, x = exponents.nu, exponents.z, exponents.d, exponents.x
    denom = nu * d + (x - 1) * nu * z
    if denom == 0:
        raise ValueError("degenerate exponent combination: nu d + (x-1) nu z = 0")
    base = amplitude * (nu * d + x * nu * z + 1.0) / (abs(w_inf) * (nu * z + 1.0))
    return base ** ((nu * z + 1.0) / denom)


def eta_at_max_power(
    cfg: CycleConfig,
    w_inf: float,
    amplitude: float,
    exponents: CriticalExponents,
) -> float:
    """Efficiency at the model power maximum.

    The excess work at the optimum is amplitude * tau_opt^(predicted
    exponent), with the amplitude calibrated from the work-scaling fit.
    """
    t_opt = tau_opt(w_inf, amplitude, exponents)
    e_ex = amplitude * t_opt ** predicted_work_exponent(exponents)
    e_b, _ = _energizing_corner_energies(cfg)
    e_a_g = ground_state_energy(cfg.h1, cfg.length)
    return -(w_inf + e_ex) / (e_b - e_a_g - e_ex)


def efficiency_bound(
    cfg: CycleConfig,
    exponents: CriticalExponents | None = None,
    critical_field: float = 1.0,
) -> BoundResult:
    """Efficiency ceiling from extremal gaps and bath-rate ratios.

    Requires gain/loss ratios defining positive effective temperatures:
    kappa2 > kappa1 > 0 for the energizing bath, and the same for the
    relaxing bath except that kappa2 = 0 is accepted as the zero-temperature
    limit (T_min = 0, so the ceiling degenerates to 1).  Both baths must
    drive the two fermions at a common gain/loss ratio.
    """
    z = exponents.z if exponents is not None else 1.0
    ke1, ke2 = cfg.energizing.kappa1, cfg.energizing.kappa2
    if not (ke2 > ke1 > 0):
        raise ValueError(
            f"energizing bath needs kappa2 > kappa1 > 0, got ({ke1}, {ke2})"
        )
    if abs(ke1 * cfg.energizing.kappa4 - ke2 * cfg.energizing.kappa3) > 1e-12 * max(
        ke1, ke2
    ):
        raise ValueError("energizing bath drives the two fermions at different ratios")

    ks = momentum_grid(cfg.length)
    delta_max = max(gap(tim_mode(cfg.h1, k)) for k in ks)
    delta_min = min(gap(tim_mode(cfg.h2, k)) for k in ks)
    source = "grid"
    if abs(abs(cfg.h2) - critical_field) < 1e-12:
        continuum = (2.0 * np.pi / cfg.length) ** z
        if continuum < delta_min:
            delta_min, source = continuum, "continuum"
    t_max = delta_max / math.log(ke2 / ke1)

    if cfg.relaxing is None:
        raise ValueError("efficiency bound requires a relaxing bath")
    kr1, kr2 = cfg.relaxing.kappa1, cfg.relaxing.kappa2
    if kr2 == 0.0:
        if kr1 <= 0:
            raise ValueError("relaxing bath has no loss rate")
        t_min = 0.0
    else:
        if not (kr2 > kr1 > 0):
            raise ValueError(
                f"relaxing bath needs kappa2 > kappa1 > 0 (or kappa2 = 0), got ({kr1}, {kr2})"
            )
        if abs(kr1 * cfg.relaxing.kappa4 - kr2 * cfg.relaxing.kappa3) > 1e-12 * max(
            kr1, kr2
        ):
            raise ValueError("relaxing bath drives the two fermions at different ratios")
        t_min = delta_min / math.log(kr2 / kr1)

    return BoundResult(
        delta_max=delta_max,
        delta_min=delta_min,
        t_max=t_max,
        t_min=t_min,
        eta_max=1.0 - t_min / t_max,
        delta_min_source=source,
    )


def generalized_eta_power(
    length: int, h1: float, h2: float, mu_e: float, mu_r: float, tau_total: float
) -> tuple[float, float]:
    """Strong-field efficiency and power of the two-bath engine.

    Valid when both fields are deep in the paramagnetic phase and no
    critical point is crossed (documented, not enforced).
    """
    eta = 1.0 - h2 / h1
    alpha = (mu_e - 1.0) / (mu_e + 1.0) - (mu_r - 1.0) / (mu_r + 1.0)
    power = -(length * (h1 - h2) / tau_total) * alpha
    return eta, power
