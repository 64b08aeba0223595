"""
Crank-Nicolson integrator for constant-coefficient effective PDEs on a periodic box.

Spatial operators are the central stencils D1, D2 and the five-point D3; on a
periodic grid they are circulant, so each step is a pointwise division in
Fourier space.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import fft

from constants import (
    BOX_NU_MULTIPLE,
    COURANT_TARGET,
    ENERGY_AUDIT_RTOL,
    MIN_POINTS,
    POINTS_PER_NU,
)
from effective import Cascade, EffectivePde, Term, energy_rate_coefficient

_log = logging.getLogger(__name__)


class SolverConfigError(ValueError):
    def __init__(self, reason: str, mode: Optional[int] = None):
        self.reason = reason
        self.mode = mode
        suffix = "" if mode is None else f" (mode {mode})"
        super().__init__(f"{reason}{suffix}")


class SolverDivergenceError(ArithmeticError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite field after step {step}")


@dataclass(frozen=True)
class SimConfig:
    domain_length: float
    n_points: int
    dt: float
    t_end: float
    snapshot_times: Tuple[float, ...]
    x0: float
    nu: float

    def __post_init__(self) -> None:
        if self.n_points < MIN_POINTS or self.n_points % 2:
            raise SolverConfigError(f"n_points must be even and >= {MIN_POINTS}, got {self.n_points}")
        for name in ("domain_length", "dt", "nu"):
            if not getattr(self, name) > 0.0:
                raise SolverConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.t_end >= 0.0:
            raise SolverConfigError(f"t_end must be non-negative, got {self.t_end!r}")
        times = tuple(float(t) for t in self.snapshot_times)
        if any(t < 0.0 or t > self.t_end * (1.0 + 1e-12) for t in times):
            raise SolverConfigError("snapshot times must lie in [0, t_end]")
        object.__setattr__(self, "snapshot_times", tuple(sorted(times)))
        if self.nu / self.dx < POINTS_PER_NU:
            _log.warning(
                "Gaussian width nu=%.4g is resolved by only %.1f points (want >= %d)",
                self.nu,
                self.nu / self.dx,
                POINTS_PER_NU,
            )

    @property
    def dx(self) -> float:
        return self.domain_length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dx

    @classmethod
    def for_pde(
        cls,
        pde: EffectivePde,
        nu: float,
        t_end: float,
        n_points: int = 512,
        x0: Optional[float] = None,
        n_snapshots: int = 5,
        domain_length: Optional[float] = None,
    ) -> "SimConfig":
        """Box of at least 40 nu centred on x0, dt from the advective Courant target."""
        length = domain_length if domain_length is not None else BOX_NU_MULTIPLE * nu
        dx = length / n_points
        speed = abs(pde.coeff_x / pde.coeff_t)
        dt = t_end / 200.0 if t_end > 0.0 else dx
        if speed > 0.0:
            dt = min(dt, COURANT_TARGET * dx / speed)
        if t_end > 0.0:
            dt = t_end / math.ceil(t_end / dt)
        if x0 is None:
            x0 = (n_points // 2) * dx
        snapshots = tuple(np.linspace(0.0, t_end, n_snapshots)) if n_snapshots > 1 else (t_end,)
        return cls(
            domain_length=length,
            n_points=n_points,
            dt=dt,
            t_end=t_end,
            snapshot_times=snapshots,
            x0=x0,
            nu=nu,
        )


@dataclass(frozen=True)
class Diagnostics:
    mass: float
    energy: float
    centroid: float
    energy_skewness: float
    third_moment: float


@dataclass(frozen=True)
class FieldState:
    time: float
    values: np.ndarray
    dx: float
    diagnostics: Optional[Diagnostics] = None
    step_index: int = 0

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dx


# operators


@dataclass(frozen=True)
class _Symbols:
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray


def _stencil_symbols(n: int, dx: float) -> _Symbols:
    theta = 2.0 * math.pi * fft.rfftfreq(n)
    return _Symbols(
        d1=1j * np.sin(theta) / dx,
        d2=(2.0 * np.cos(theta) - 2.0) / dx ** 2,
        d3=1j * (np.sin(2.0 * theta) - 2.0 * np.sin(theta)) / dx ** 3,
    )


@dataclass(frozen=True)
class _Operator:
    symbols: _Symbols
    mass: np.ndarray
    rhs: np.ndarray


def _operator(pde: EffectivePde, n: int, dx: float) -> _Operator:
    s = _stencil_symbols(n, dx)
    mass = pde.coeff_t + pde.coeff_txx * s.d2
    singular = np.flatnonzero(np.abs(mass) <= 1e-14 * abs(pde.coeff_t))
    if singular.size:
        raise SolverConfigError("mass operator coeff_t + coeff_txx D2 is singular", mode=int(singular[0]))
    rhs = -pde.coeff_x * s.d1 - pde.coeff_xx * s.d2 - pde.coeff_xxx * s.d3
    return _Operator(s, mass, rhs)


def _advance(op: _Operator, u_hat: np.ndarray, dt: float, f_hat: Optional[np.ndarray]) -> np.ndarray:
    half = 0.5 * dt * op.rhs
    numerator = (op.mass + half) * u_hat
    if f_hat is not None:
        numerator = numerator + dt * f_hat
    return numerator / (op.mass - half)


# diagnostics


def _wrapped_offsets(x: np.ndarray, origin: float, length: float) -> np.ndarray:
    return (x - origin + 0.5 * length) % length - 0.5 * length


def _centre_and_moment(x: np.ndarray, weight: np.ndarray, length: float) -> Tuple[float, float]:
    total = weight.sum()
    if total == 0.0:
        return float("nan"), 0.0
    origin = x[int(np.argmax(np.abs(weight)))]
    offsets = _wrapped_offsets(x, origin, length)
    centre = origin + float((offsets * weight).sum() / total)
    offsets = _wrapped_offsets(x, centre, length)
    third = float((offsets ** 3 * weight).sum() / total)
    return centre % length, third


def _energy(u_hat: np.ndarray, n: int, dx: float, coeff_t: float, coeff_txx: float, d2: np.ndarray) -> float:
    weights = np.full(u_hat.shape, 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    density = (coeff_t + coeff_txx * d2) * np.abs(u_hat) ** 2 * weights
    return float(0.5 * dx * density.sum() / n)


def diagnostics_for(
    values: np.ndarray, dx: float, coeff_t: float, coeff_txx: float = 0.0, symbols: Optional[_Symbols] = None
) -> Diagnostics:
    """Mass, energy (coeff_t Theta^2 - coeff_txx Theta_X^2)/2, centroid and third moments."""
    n = values.size
    length = n * dx
    x = np.arange(n) * dx
    if symbols is None:
        symbols = _stencil_symbols(n, dx)
    u_hat = fft.rfft(values)
    centroid, third = _centre_and_moment(x, values, length)
    _, energy_skewness = _centre_and_moment(x, values * values, length)
    return Diagnostics(
        mass=float(values.sum() * dx),
        energy=_energy(u_hat, n, dx, coeff_t, coeff_txx, symbols.d2),
        centroid=centroid,
        energy_skewness=energy_skewness,
        third_moment=third,
    )


# time stepping


def _state(pde: EffectivePde, op: _Operator, time: float, values: np.ndarray, dx: float, index: int) -> FieldState:
    if not np.all(np.isfinite(values)):
        raise SolverDivergenceError(index)
    return FieldState(time, values, dx, diagnostics_for(values, dx, pde.coeff_t, pde.coeff_txx, op.symbols), index)


def initial_state(pde: EffectivePde, config: SimConfig) -> FieldState:
    offsets = _wrapped_offsets(config.x, config.x0, config.domain_length)
    values = np.exp(-((offsets / config.nu) ** 2))
    return FieldState(0.0, values, config.dx, diagnostics_for(values, config.dx, pde.coeff_t, pde.coeff_txx))


def step(pde: EffectivePde, state: FieldState, dt: float) -> FieldState:
    """
    One Crank-Nicolson step of (coeff_t + coeff_txx D2) dTheta/dtau = K Theta + F
    with K = -coeff_x D1 - coeff_xx D2 - coeff_xxx D3.
    """
    n = state.values.size
    op = _operator(pde, n, state.dx)
    f_hat = None
    if pde.source is not None:
        f_hat = fft.rfft(pde.source(state.x, state.time + 0.5 * dt))
    values = fft.irfft(_advance(op, fft.rfft(state.values), dt, f_hat), n=n)
    return _state(pde, op, state.time + dt, values, state.dx, state.step_index + 1)


def run(pde: EffectivePde, config: SimConfig, record_all: bool = False) -> List[FieldState]:
    """
    Integrates from the Gaussian initial field to t_end. Snapshot times are hit
    exactly by shortening the step before each; with record_all every step is kept.
    """
    n, dx = config.n_points, config.dx
    op = _operator(pde, n, dx)
    x = config.x
    state = initial_state(pde, config)
    u_hat = fft.rfft(state.values)
    wanted = set(config.snapshot_times)

    states: List[FieldState] = []
    if record_all or 0.0 in wanted:
        states.append(state)
    time = 0.0
    index = 0
    for target in sorted(wanted | {config.t_end}):
        while target - time > 1e-12 * max(1.0, config.t_end):
            dt = min(config.dt, target - time)
            f_hat = None
            if pde.source is not None:
                f_hat = fft.rfft(pde.source(x, time + 0.5 * dt))
            u_hat = _advance(op, u_hat, dt, f_hat)
            time += dt
            index += 1
            if not np.all(np.isfinite(u_hat)):
                raise SolverDivergenceError(index)
            if record_all:
                states.append(_state(pde, op, time, fft.irfft(u_hat, n=n), dx, index))
        time = target
        if not record_all and target in wanted and target > 0.0:
            states.append(_state(pde, op, target, fft.irfft(u_hat, n=n), dx, index))
    return states


def scheme_dispersion(pde: EffectivePde, kappa: float, dx: float, dt: float) -> complex:
    """Omega with exp(i Omega dt) equal to the one-step amplification of exp(-i kappa X) on the grid."""
    theta = -kappa * dx
    d1 = 1j * math.sin(theta) / dx
    d2 = (2.0 * math.cos(theta) - 2.0) / dx ** 2
    d3 = 1j * (math.sin(2.0 * theta) - 2.0 * math.sin(theta)) / dx ** 3
    mass = pde.coeff_t + pde.coeff_txx * d2
    rhs = -pde.coeff_x * d1 - pde.coeff_xx * d2 - pde.coeff_xxx * d3
    amplification = (mass + 0.5 * dt * rhs) / (mass - 0.5 * dt * rhs)
    return complex(np.log(amplification) / (1j * dt))


# oracles and transforms


def gaussian_solution(pde: EffectivePde, config: SimConfig, t: float, images: int = 3) -> np.ndarray:
    """Advected and diffused Gaussian for coeff_t dT + coeff_x dT/dX + coeff_xx d2T/dX2 = 0."""
    if pde.coeff_xxx != 0.0 or pde.coeff_txx != 0.0:
        raise SolverConfigError("gaussian_solution only covers convection-diffusion equations")
    speed = pde.coeff_x / pde.coeff_t
    diffusivity = -pde.coeff_xx / pde.coeff_t
    width2 = config.nu ** 2 + 4.0 * diffusivity * t
    centre = config.x0 + speed * t
    x = config.x
    out = np.zeros_like(x)
    for m in range(-images, images + 1):
        out += np.exp(-((x - centre + m * config.domain_length) ** 2) / width2)
    return out * config.nu / math.sqrt(width2)


def mirror(state: FieldState, x0: float) -> FieldState:
    """Reflection X -> 2 x0 - X on the periodic grid; x0 must be a grid node."""
    position = x0 / state.dx
    i0 = int(round(position))
    if abs(position - i0) > 1e-9:
        raise SolverConfigError(f"mirror centre {x0} is not a grid node")
    n = state.values.size
    indices = (2 * i0 - np.arange(n)) % n
    return FieldState(state.time, state.values[indices], state.dx, None, state.step_index)


def l2_error(values: np.ndarray, reference: np.ndarray, dx: float) -> float:
    return float(math.sqrt(dx * np.sum((values - reference) ** 2)))


# energy audit


@dataclass
class EnergyAudit:
    passed: bool
    monotone: bool
    max_rel_error: float
    worst_step: int
    tolerance: float = ENERGY_AUDIT_RTOL
    rates: List[Dict[str, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "passed": self.passed,
            "monotone": self.monotone,
            "max_rel_error": self.max_rel_error,
            "worst_step": self.worst_step,
            "tolerance": self.tolerance,
        }


def _gradient_norm(values: np.ndarray, dx: float) -> float:
    n = values.size
    k = 2.0 * math.pi * fft.rfftfreq(n, d=dx)
    grad = fft.irfft(1j * k * fft.rfft(values), n=n)
    return float(dx * np.sum(grad * grad))


def energy_audit(pde: EffectivePde, states: Sequence[FieldState], tolerance: float = ENERGY_AUDIT_RTOL) -> EnergyAudit:
    """
    Compares (E_{n+1} - E_n)/dt with -D int (dTheta/dX)^2 at the step midpoint,
    D = -coeff_xx. Needs consecutive states (run(..., record_all=True)).
    """
    if pde.source is not None:
        raise SolverConfigError("energy audit needs an unforced equation")
    if len(states) < 2:
        return EnergyAudit(True, True, 0.0, -1, tolerance)
    diffusion = energy_rate_coefficient(pde)
    monotone = True
    worst = -1
    worst_error = 0.0
    rates = []
    for i in range(len(states) - 1):
        a, b = states[i], states[i + 1]
        dt = b.time - a.time
        if dt <= 0.0:
            continue
        rate = (b.diagnostics.energy - a.diagnostics.energy) / dt
        midpoint = 0.5 * (a.values + b.values)
        predicted = -diffusion * _gradient_norm(midpoint, a.dx)
        error = abs(rate - predicted) / max(abs(predicted), 1e-300)
        if predicted == 0.0 and rate == 0.0:
            error = 0.0
        if b.diagnostics.energy > a.diagnostics.energy * (1.0 + 1e-13) + 1e-300:
            monotone = False
        rates.append({"time": 0.5 * (a.time + b.time), "rate": rate, "predicted": predicted, "rel_error": error})
        if error > worst_error:
            worst_error, worst = error, b.step_index
    passed = monotone and worst_error <= tolerance
    if not passed:
        _log.warning("energy audit failed: max rel error %.3e at step %d, monotone=%s", worst_error, worst, monotone)
    return EnergyAudit(passed, monotone, worst_error, worst, tolerance, rates)


# three-level cascade


def _term_symbol(term: Term, mu: np.ndarray, s: _Symbols) -> np.ndarray:
    space = {0: 1.0, 1: s.d1, 2: s.d2, 3: s.d3}[term.space]
    return term.coefficient * mu ** term.time * space


def run_cascade(cascade: Cascade, config: SimConfig) -> List[FieldState]:
    """
    T0, T1, T2 of the unforced cascade from T0(0) = Gaussian, T1(0) = T2(0) = 0,
    integrated exactly in time per grid mode. Returns T0 + eta T1 + eta^2 T2.
    """
    if cascade.scales is None:
        raise SolverConfigError("cascade needs its scale set to map the grid")
    scales = cascade.scales
    n = config.n_points
    s = _stencil_symbols(n, config.dx * scales.kappa_star)
    gamma0, a_x, a_xx = cascade.levels[0].operator
    lam = -(a_x * s.d1 + a_xx * s.d2)
    mu = lam / gamma0
    first = sum((_term_symbol(t, mu, s) for t in cascade.levels[1].field_sources.get(0, ())), np.zeros_like(mu))
    second = sum((_term_symbol(t, mu, s) for t in cascade.levels[2].field_sources.get(0, ())), np.zeros_like(mu))
    eta = cascade.eta

    offsets = _wrapped_offsets(config.x, config.x0, config.domain_length)
    theta0 = np.exp(-((offsets / config.nu) ** 2))
    t0_hat = fft.rfft(theta0)
    a_t_dim = gamma0 * scales.gamma_star

    states = []
    for time in config.snapshot_times:
        t = time * scales.omega_star
        growth = np.exp(mu * t)
        level1 = first / gamma0 * t
        level2 = second / gamma0 * t + (first / gamma0) ** 2 * t * t / 2.0
        total = (1.0 + eta * level1 + eta * eta * level2) * growth * t0_hat
        values = scales.theta_to_dim(fft.irfft(total, n=n))
        if not np.all(np.isfinite(values)):
            raise SolverDivergenceError(0)
        states.append(FieldState(time, values, config.dx, diagnostics_for(values, config.dx, a_t_dim)))
    return states


# tables


def snapshots_table(states: Sequence[FieldState], x: np.ndarray) -> pd.DataFrame:
    parts = [pd.DataFrame({"time": s.time, "x": x, "theta": s.values}) for s in states]
    if not parts:
        return pd.DataFrame(columns=["time", "x", "theta"])
    return pd.concat(parts, ignore_index=True)


def diagnostics_table(states: Sequence[FieldState]) -> pd.DataFrame:
    rows = []
    for s in states:
        d = s.diagnostics
        rows.append(
            {
                "time": s.time,
                "mass": d.mass,
                "energy": d.energy,
                "centroid": d.centroid,
                "energy_skewness": d.energy_skewness,
                "third_moment": d.third_moment,
            }
        )
    return pd.DataFrame(rows, columns=["time", "mass", "energy", "centroid", "energy_skewness", "third_moment"])
