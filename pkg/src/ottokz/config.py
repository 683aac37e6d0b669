"""Flat INI-style configuration files mapped onto CycleConfig and SweepSpec.

Sections: [medium], [baths], [strokes], [integrator], [sweep].  Unknown keys
are errors so that typos do not silently fall back to defaults.  All keys
are documented in docs/config.md.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass

from .cycle import CycleConfig, GroundState
from .dynamics import BathSpec, FixedDuration, ToSteadyState

__all__ = ["ConfigError", "SweepSpec", "LoadedConfig", "load_config", "config_hash"]


class ConfigError(ValueError):
    """Configuration file is missing, malformed or inconsistent."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class SweepSpec:
    """Grid over tau2 (log-spaced) or h2 (linear)."""

    axis: str
    start: float
    stop: float
    points: int | None = None  # tau2 axis
    step: float | None = None  # h2 axis

    def grid(self) -> list[float]:
        import numpy as np

        if self.axis == "tau2":
            return [float(v) for v in np.logspace(np.log10(self.start), np.log10(self.stop), self.points)]
        vals = []
        v = self.start
        # inclusive linear grid; tolerate float drift at the endpoint
        while v <= self.stop + 1e-9 * max(1.0, abs(self.step)):
            vals.append(round(v, 12))
            v += self.step
        return vals


@dataclass(frozen=True)
class LoadedConfig:
    cycle: CycleConfig
    sweep: SweepSpec | None
    resolved: str  # canonical key=value text, input to the config hash


_KNOWN = {
    "medium": {"length", "h1", "h2"},
    "baths": {
        "mu_e",
        "mu_prime_e",
        "mu_r",
        "mu_prime_r",
        "kappa_e_1",
        "kappa_e_2",
        "kappa_e_3",
        "kappa_e_4",
        "kappa_r_1",
        "kappa_r_2",
        "kappa_r_3",
        "kappa_r_4",
    },
    "strokes": {
        "tau1",
        "tau2",
        "energizing_policy",
        "relaxing_policy",
        "energizing_tau",
        "relaxing_tau",
        "steady_state_tol",
        "steady_state_method",
        "tau_e_effective",
        "tau_r_effective",
    },
    "integrator": {
        "unitary_eta",
        "max_cycles",
        "cycle_tol",
        "ground_population_min",
        "fermion_sign",
    },
    "sweep": {"axis", "start", "stop", "points", "step"},
}

_REQUIRED = {"medium": ("length", "h1", "h2"), "strokes": ("tau1", "tau2")}


def _get(parser, section, key, conv, problems, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            problems.append(f"[{section}] missing required key '{key}'")
        return default
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except (TypeError, ValueError):
        problems.append(f"[{section}] {key} = {raw!r} is not a valid {conv.__name__}")
        return default


def _bath(parser, problems, suffix: str, label: str) -> BathSpec | None:
    sec = "baths"
    mu_key, mup_key = f"mu_{suffix}", f"mu_prime_{suffix}"
    kappa_keys = [f"kappa_{suffix}_{j}" for j in (1, 2, 3, 4)]
    has_mu = parser.has_option(sec, mu_key) or parser.has_option(sec, mup_key)
    has_kappa = any(parser.has_option(sec, k) for k in kappa_keys)
    if has_mu and has_kappa:
        problems.append(f"[baths] give either mu_{suffix}/mu_prime_{suffix} or kappa_{suffix}_1..4, not both")
        return None
    if has_kappa:
        vals = [_get(parser, sec, k, float, problems, required=True) for k in kappa_keys]
        if any(v is None for v in vals):
            return None
        try:
            return BathSpec(*vals, label=label)
        except ValueError as exc:
            problems.append(f"[baths] {exc}")
            return None
    if has_mu:
        mu = _get(parser, sec, mu_key, float, problems, required=True)
        mup = _get(parser, sec, mup_key, float, problems, required=True)
        if mu is None or mup is None:
            return None
        try:
            return BathSpec.tim(mu, mup, label=label)
        except ValueError as exc:
            problems.append(f"[baths] {exc}")
            return None
    return None


def _policy(name: str, tau, tol, method, problems, where: str):
    if name == "steady":
        return ToSteadyState(tol=tol, method=method)
    if name == "fixed":
        if tau is None:
            problems.append(f"[strokes] {where}_policy = fixed requires {where}_tau")
            return None
        try:
            return FixedDuration(tau)
        except ValueError as exc:
            problems.append(f"[strokes] {exc}")
            return None
    if name == "ground":
        return GroundState()
    problems.append(f"[strokes] {where}_policy must be steady, fixed or ground, got {name!r}")
    return None


def load_config(path: str) -> LoadedConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc

    problems: list[str] = []
    for section in parser.sections():
        if section not in _KNOWN:
            problems.append(f"unknown section [{section}]")
            continue
        for key in parser.options(section):
            if key not in _KNOWN[section]:
                problems.append(f"unknown key '{key}' in section [{section}]")
    for section, keys in _REQUIRED.items():
        for key in keys:
            if not parser.has_option(section, key):
                problems.append(f"[{section}] missing required key '{key}'")

    length = _get(parser, "medium", "length", int, problems)
    h1 = _get(parser, "medium", "h1", float, problems)
    h2 = _get(parser, "medium", "h2", float, problems)
    tau1 = _get(parser, "strokes", "tau1", float, problems)
    tau2 = _get(parser, "strokes", "tau2", float, problems)

    steady_tol = _get(parser, "strokes", "steady_state_tol", float, problems, default=1e-10)
    steady_method = _get(parser, "strokes", "steady_state_method", str, problems, default="direct")
    e_tau = _get(parser, "strokes", "energizing_tau", float, problems)
    r_tau = _get(parser, "strokes", "relaxing_tau", float, problems)
    e_policy_name = _get(parser, "strokes", "energizing_policy", str, problems, default="steady")
    r_policy_name = _get(parser, "strokes", "relaxing_policy", str, problems, default="steady")

    energizing = _bath(parser, problems, "e", "energizing")
    relaxing = _bath(parser, problems, "r", "relaxing")
    if energizing is None:
        problems.append("[baths] energizing bath is required (mu_e and mu_prime_e, or kappa_e_1..4)")
    e_policy = _policy(e_policy_name, e_tau, steady_tol, steady_method, problems, "energizing")
    r_policy = _policy(r_policy_name, r_tau, steady_tol, steady_method, problems, "relaxing")
    if relaxing is None and not isinstance(r_policy, GroundState):
        problems.append("[baths] relaxing bath is required unless relaxing_policy = ground")

    unitary_eta = _get(parser, "integrator", "unitary_eta", float, problems, default=0.5)
    max_cycles = _get(parser, "integrator", "max_cycles", int, problems, default=10)
    cycle_tol = _get(parser, "integrator", "cycle_tol", float, problems, default=1e-10)
    ground_min = _get(parser, "integrator", "ground_population_min", float, problems, default=0.95)
    fermion_sign = _get(parser, "integrator", "fermion_sign", int, problems, default=-1)
    tau_e_eff = _get(parser, "strokes", "tau_e_effective", float, problems, default=0.0)
    tau_r_eff = _get(parser, "strokes", "tau_r_effective", float, problems, default=0.0)

    sweep = None
    if parser.has_section("sweep"):
        axis = _get(parser, "sweep", "axis", str, problems, required=True)
        start = _get(parser, "sweep", "start", float, problems, required=True)
        stop = _get(parser, "sweep", "stop", float, problems, required=True)
        points = _get(parser, "sweep", "points", int, problems)
        step = _get(parser, "sweep", "step", float, problems)
        if axis not in ("tau2", "h2"):
            problems.append(f"[sweep] axis must be tau2 or h2, got {axis!r}")
        elif axis == "tau2":
            if points is None or points < 2:
                problems.append("[sweep] tau2 sweeps need points >= 2 (log-spaced grid)")
            if start is not None and stop is not None and not 0 < start < stop:
                problems.append("[sweep] tau2 sweeps need 0 < start < stop")
        else:
            if step is None or step <= 0:
                problems.append("[sweep] h2 sweeps need a positive step (linear grid)")
            if start is not None and stop is not None and start > stop:
                problems.append("[sweep] start must not exceed stop")
        if not problems:
            sweep = SweepSpec(axis=axis, start=start, stop=stop, points=points, step=step)

    if problems:
        raise ConfigError(problems)

    try:
        cycle = CycleConfig(
            length=length,
            h1=h1,
            h2=h2,
            tau1=tau1,
            tau2=tau2,
            energizing=energizing,
            relaxing=relaxing,
            energizing_policy=e_policy,
            relaxing_policy=r_policy,
            max_cycles=max_cycles,
            cycle_tol=cycle_tol,
            tau_e_effective=tau_e_eff,
            tau_r_effective=tau_r_eff,
            ground_population_min=ground_min,
            unitary_eta=unitary_eta,
            fermion_sign=fermion_sign,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    resolved = _resolve_text(cycle, sweep)
    return LoadedConfig(cycle=cycle, sweep=sweep, resolved=resolved)


def _resolve_text(cycle: CycleConfig, sweep: SweepSpec | None) -> str:
    """Canonical text of the fully resolved configuration."""
    items = [
        ("length", cycle.length),
        ("h1", cycle.h1),
        ("h2", cycle.h2),
        ("tau1", cycle.tau1),
        ("tau2", cycle.tau2),
        ("energizing", cycle.energizing),
        ("relaxing", cycle.relaxing),
        ("energizing_policy", cycle.energizing_policy),
        ("relaxing_policy", cycle.relaxing_policy),
        ("max_cycles", cycle.max_cycles),
        ("cycle_tol", cycle.cycle_tol),
        ("tau_e_effective", cycle.tau_e_effective),
        ("tau_r_effective", cycle.tau_r_effective),
        ("ground_population_min", cycle.ground_population_min),
        ("unitary_eta", cycle.unitary_eta),
        ("fermion_sign", cycle.fermion_sign),
        ("sweep", sweep),
    ]
    return "\n".join(f"{k} = {v!r}" for k, v in items)


def config_hash(resolved: str) -> str:
    return hashlib.sha256(resolved.encode("utf-8")).hexdigest()
