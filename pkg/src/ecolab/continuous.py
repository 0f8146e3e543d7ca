"""Continuous-time community dynamics.

The classical two-species predator-prey system, its multi-species
extension over the full interaction vocabulary, functional responses,
the mutualism-parasitism continuum, and the fixed/adaptive Runge-Kutta
integrators that drive them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (
    FunctionalResponse,
    HollingTypeII,
    IntegratorConfig,
    InteractionKind,
    InteractionSpec,
    IvlevResponse,
    LinearResponse,
    Role,
    Scenario,
    SpeciesSpec,
    Trajectory,
    TROPHIC_KINDS,
    validate_scenario,
)

__all__ = [
    "LotkaVolterraParams",
    "ContinuumParams",
    "lv_derivative",
    "lv_equilibrium",
    "lv_first_integral",
    "functional_response",
    "continuum_interaction",
    "community_rhs",
    "glv_derivative",
    "IntegrationResult",
    "integrate",
    "integrate_report",
    "DivergenceError",
    "StepSizeUnderflowError",
    "NonFiniteDerivativeError",
    "DIVERGENCE_LIMIT",
]

#: Integration aborts once any density exceeds this bound (unbounded
#: mutualism without self-limitation is the textbook way to get here).
DIVERGENCE_LIMIT = 1e12


class DivergenceError(RuntimeError):
    """A density ran away past DIVERGENCE_LIMIT."""

    def __init__(self, time: float, state: np.ndarray):
        self.time = time
        self.state = np.asarray(state)
        super().__init__(f"divergence at t={time:g}: state={np.asarray(state)}")


class StepSizeUnderflowError(RuntimeError):
    """The adaptive controller could not find an acceptable step."""


class NonFiniteDerivativeError(RuntimeError):
    """The right-hand side produced NaN or infinity."""

    def __init__(self, time: float, state: np.ndarray):
        self.time = time
        self.state = np.asarray(state)
        super().__init__(f"non-finite derivative at t={time:g}: state={np.asarray(state)}")


@dataclass(frozen=True)
class LotkaVolterraParams:
    """Parameters of the classical predator-prey pair.

    dx/dt = prey_growth*x - encounter_rate*x*y
    dy/dt = -predator_decline*y + predator_gain*x*y
    """

    prey_growth: float
    encounter_rate: float
    predator_decline: float
    predator_gain: float

    def __post_init__(self) -> None:
        for name in ("prey_growth", "encounter_rate", "predator_decline", "predator_gain"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a finite value > 0, got {value!r}")


def _check_density(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    if value < 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return value


def lv_derivative(x: float, y: float, p: LotkaVolterraParams) -> tuple[float, float]:
    """Vector field of the two-species predator-prey system.

    The terms are evaluated in the same grouping that the generalized
    community derivative uses, so the two agree bit for bit on the
    matching configuration.
    """
    x = _check_density("prey density", x)
    y = _check_density("predator density", y)
    dx = p.prey_growth * x - p.encounter_rate * x * y
    dy = -p.predator_decline * y + p.predator_gain * x * y
    return dx, dy


def lv_equilibrium(p: LotkaVolterraParams) -> tuple[float, float]:
    """Interior coexistence equilibrium (prey, predator)."""
    return p.predator_decline / p.predator_gain, p.prey_growth / p.encounter_rate


def lv_first_integral(x: float, y: float, p: LotkaVolterraParams) -> float:
    """Conserved quantity of the predator-prey flow.

    V(x, y) = predator_gain*x - predator_decline*ln(x)
              + encounter_rate*y - prey_growth*ln(y)

    V is constant along exact orbits and attains its global minimum over
    the open positive quadrant at the interior equilibrium, which makes
    it the natural drift oracle for integrator accuracy checks.
    """
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError("densities must be finite")
    if x <= 0 or y <= 0:
        raise ValueError("first integral requires x > 0 and y > 0")
    return (
        p.predator_gain * x
        - p.predator_decline * math.log(x)
        + p.encounter_rate * y
        - p.prey_growth * math.log(y)
    )


def _response_value(fr: FunctionalResponse, x: float) -> float:
    # bare formula, no domain check: root finding and finite differences
    # probe slightly negative states
    if isinstance(fr, LinearResponse):
        return fr.rate * x
    if isinstance(fr, HollingTypeII):
        return fr.rate * x / (1.0 + fr.rate * fr.handling * x)
    if isinstance(fr, IvlevResponse):
        return fr.rate * (1.0 - math.exp(-fr.saturation * x))
    raise TypeError(f"unknown functional response {fr!r}")


def functional_response(fr: FunctionalResponse, x: float) -> float:
    """Per-predator consumption rate at prey density x.

    All variants are 0 at x = 0 and monotone non-decreasing in x.
    """
    x = _check_density("prey density", x)
    return _response_value(fr, x)


@dataclass(frozen=True)
class ContinuumParams:
    """Dial for the mutualism-parasitism continuum of one species pair.

    alpha = +1 is pure mutualism (+, +), alpha = -1 pure parasitism
    (+ to the beneficiary, - to the partner), 0 is commensalism.
    Positive self-limitation on both species is required because the
    mutualistic end diverges without it.
    """

    alpha: float
    base_strength: float
    self_limitation_i: float
    self_limitation_j: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and -1.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [-1, 1], got {self.alpha!r}")
        if not (math.isfinite(self.base_strength) and self.base_strength > 0):
            raise ValueError("base_strength must be > 0")
        for name in ("self_limitation_i", "self_limitation_j"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be > 0 (needed for boundedness)")


def continuum_interaction(species_i: str, species_j: str, p: ContinuumParams) -> InteractionSpec:
    """Community-matrix entry for one pair on the mutualism-parasitism dial.

    Species i is the fixed beneficiary: it always gains
    base_strength * x_i * x_j.  The partner's term interpolates linearly
    from +base_strength (alpha = 1) through 0 (commensalism at alpha = 0)
    to -base_strength (alpha = -1).

    Nonnegative alpha is stored as a symbiosis entry.  Negative alpha
    becomes a parasitism entry whose victim-side harm rate
    |alpha|*base_strength lives in the linear response, with the
    conversion coefficient 1/|alpha| restoring the beneficiary's gain.
    """
    s = p.base_strength
    if p.alpha >= 0.0:
        return InteractionSpec(
            species_i=species_i,
            species_j=species_j,
            kind=InteractionKind.SYMBIOSIS,
            coeff_i=s,
            coeff_j=p.alpha * s,
            continuum_alpha=p.alpha,
            continuum_strength=s,
        )
    harm = -p.alpha * s
    return InteractionSpec(
        species_i=species_i,
        species_j=species_j,
        kind=InteractionKind.PARASITISM,
        coeff_i=1.0 / -p.alpha,
        coeff_j=0.0,
        response=LinearResponse(harm),
        continuum_alpha=p.alpha,
        continuum_strength=s,
    )


def community_rhs(scenario: Scenario) -> Callable[[np.ndarray], np.ndarray]:
    """Compile the scenario into a derivative function over state vectors.

    Each species i follows

        dx_i/dt = (+-) r_i x_i - s_i x_i^2 + coupling terms,

    with + for producers and - for consumers.  Predation and parasitism
    subtract response(x_victim) * x_aggressor from the victim and add
    conversion * response(x_victim) * x_aggressor to the aggressor;
    competition subtracts and symbiosis/cooperation adds the mass-action
    term coeff * x_i * x_j on each side with its own coefficient.

    On a two-species predation pair with a linear response and no
    self-limitation this reproduces `lv_derivative` exactly.
    """
    index = {sp.id: k for k, sp in enumerate(scenario.species)}
    n = len(scenario.species)
    growth = [
        (sp.growth_rate if sp.role == Role.PRODUCER else -sp.growth_rate)
        for sp in scenario.species
    ]
    limit = [sp.self_limitation for sp in scenario.species]
    trophic = []
    mass_action = []
    for entry in scenario.interactions:
        i, j = index[entry.species_i], index[entry.species_j]
        if entry.kind in TROPHIC_KINDS:
            trophic.append((i, j, entry.coeff_i, entry.response))
        elif entry.kind == InteractionKind.COMPETITION:
            mass_action.append((i, j, -entry.coeff_i, -entry.coeff_j))
        else:
            mass_action.append((i, j, entry.coeff_i, entry.coeff_j))

    def rhs(state: np.ndarray) -> np.ndarray:
        x = [float(v) for v in state]
        d = [0.0] * n
        for k in range(n):
            d[k] = growth[k] * x[k]
            if limit[k] != 0.0:
                d[k] -= limit[k] * x[k] * x[k]
        for agg, victim, conversion, response in trophic:
            consumed = _response_value(response, x[victim])
            d[victim] -= consumed * x[agg]
            d[agg] += conversion * consumed * x[agg]
        for i, j, ci, cj in mass_action:
            d[i] += ci * x[i] * x[j]
            d[j] += cj * x[i] * x[j]
        return np.array(d, dtype=float)

    return rhs


def glv_derivative(state: Sequence[float], scenario: Scenario) -> np.ndarray:
    """Generalized community derivative at one state vector."""
    state = np.asarray(state, dtype=float)
    if state.shape != (len(scenario.species),):
        raise ValueError(
            f"state has {state.shape[0] if state.ndim == 1 else state.shape} entries, "
            f"scenario declares {len(scenario.species)} species"
        )
    if np.any(state < 0):
        raise ValueError("state densities must be >= 0")
    return community_rhs(scenario)(state)


@dataclass(frozen=True)
class IntegrationResult:
    """Trajectory plus the bookkeeping the run produced."""

    trajectory: Trajectory
    extinctions: tuple[tuple[str, float], ...] = ()
    warnings: tuple[str, ...] = ()


def _clamp_extinctions(state, t, epsilon, names, extinct, extinctions):
    """Clamp sub-epsilon or negative densities to exactly 0, once per species."""
    for k in range(state.shape[0]):
        v = state[k]
        if v != 0.0 and v < epsilon:
            state[k] = 0.0
            if k not in extinct:
                extinct.add(k)
                extinctions.append((names[k], t))


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + (0.5 * h) * k1)
    k3 = f(y + (0.5 * h) * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), (k1, k2, k3, k4)


def _integrate_rk4(f, y0, cfg, horizon, names):
    h = cfg.step
    n_full = int(math.floor(horizon / h + 1e-9))
    remainder = horizon - n_full * h
    if remainder < 1e-12 * max(1.0, horizon):
        remainder = 0.0
    extinct: set[int] = set()
    extinctions: list[tuple[str, float]] = []
    y = y0.copy()
    _clamp_extinctions(y, 0.0, cfg.extinction_epsilon, names, extinct, extinctions)
    times = [0.0]
    states = [y.copy()]
    steps = [(k, h) for k in range(n_full)]
    if remainder > 0.0:
        steps.append((n_full, remainder))
    for k, hk in steps:
        t_next = horizon if (hk != h or (k + 1 == n_full and remainder == 0.0)) else (k + 1) * h
        y_next, ks = _rk4_step(f, y, hk)
        for stage in ks:
            if not np.all(np.isfinite(stage)):
                raise NonFiniteDerivativeError(k * h, y)
        _clamp_extinctions(y_next, t_next, cfg.extinction_epsilon, names, extinct, extinctions)
        if np.max(y_next) > DIVERGENCE_LIMIT:
            raise DivergenceError(t_next, y_next)
        times.append(t_next)
        states.append(y_next.copy())
        y = y_next
    return times, states, extinctions


# Runge-Kutta-Fehlberg 4(5) tableau.
_RKF_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_RKF_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_RKF_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_RKF_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)


def _integrate_rk45(f, y0, cfg, horizon, names):
    t = 0.0
    y = y0.copy()
    h = min(cfg.step, horizon)
    extinct: set[int] = set()
    extinctions: list[tuple[str, float]] = []
    _clamp_extinctions(y, 0.0, cfg.extinction_epsilon, names, extinct, extinctions)
    times = [0.0]
    states = [y.copy()]
    err_prev = 1.0
    while t < horizon * (1.0 - 1e-14):
        h = min(h, horizon - t)
        if h < 1e-14 * max(1.0, abs(t)):
            raise StepSizeUnderflowError(f"step size underflow at t={t:g}")
        ks = []
        for s in range(6):
            ys = y.copy()
            for j, a in enumerate(_RKF_A[s]):
                ys = ys + (h * a) * ks[j]
            k = f(ys)
            if not np.all(np.isfinite(k)):
                raise NonFiniteDerivativeError(t, ys)
            ks.append(k)
        y5 = y.copy()
        y4 = y.copy()
        for b5, b4, k in zip(_RKF_B5, _RKF_B4, ks):
            y5 = y5 + (h * b5) * k
            y4 = y4 + (h * b4) * k
        if np.any(y5 < 0.0) and np.min(y5) < -cfg.extinction_epsilon:
            h *= 0.5
            continue
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.sqrt(np.mean(((y5 - y4) / scale) ** 2)))
        if err <= 1.0:
            t = t + h
            y = y5
            _clamp_extinctions(y, t, cfg.extinction_epsilon, names, extinct, extinctions)
            if np.max(y) > DIVERGENCE_LIMIT:
                raise DivergenceError(t, y)
            times.append(t)
            states.append(y.copy())
            factor = 0.9 * err ** -0.14 * err_prev ** 0.08 if err > 0 else 5.0
            err_prev = max(err, 1e-10)
        else:
            factor = max(0.2, 0.9 * err ** -0.2)
        h *= min(5.0, max(0.2, factor))
    if times[-1] != horizon:
        times[-1] = horizon
    return times, states, extinctions


def integrate_report(
    scenario: Scenario,
    derivative_fn: Callable[[np.ndarray], np.ndarray] | None = None,
) -> IntegrationResult:
    """Integrate a validated scenario and report extinctions alongside.

    Samples sit at the integrator's accepted steps (every `step` for
    rk4_fixed, the accepted adaptive steps plus the horizon endpoint for
    rk45_adaptive).  The run is deterministic for identical inputs.
    """
    validate_scenario(scenario)
    f = derivative_fn if derivative_fn is not None else community_rhs(scenario)
    y0 = scenario.initial_state()
    names = tuple(sp.id for sp in scenario.species)
    cfg = scenario.integrator
    if cfg.method == "rk4_fixed":
        times, states, extinctions = _integrate_rk4(f, y0, cfg, scenario.horizon, names)
    else:
        times, states, extinctions = _integrate_rk45(f, y0, cfg, scenario.horizon, names)
    trajectory = Trajectory(names, np.array(times), np.array(states))
    return IntegrationResult(trajectory=trajectory, extinctions=tuple(extinctions))


def integrate(
    scenario: Scenario,
    derivative_fn: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Trajectory:
    """Integrate a validated scenario; see `integrate_report` for details."""
    return integrate_report(scenario, derivative_fn).trajectory


def lv_scenario(
    p: LotkaVolterraParams,
    initial: tuple[float, float],
    horizon: float = 100.0,
    step: float = 0.01,
    prey_id: str = "prey",
    predator_id: str = "predator",
) -> Scenario:
    """Two-species community scenario equivalent to the classical pair.

    The predator's gain coefficient factors as conversion * encounter.
    The conversion stored here is the float quotient, so the scenario
    reproduces `lv_derivative` to roundoff; for bit-exact reduction pick
    parameters whose conversion is a power of two.
    """
    conversion = p.predator_gain / p.encounter_rate
    return Scenario(
        species=(
            SpeciesSpec(id=prey_id, role=Role.PRODUCER, growth_rate=p.prey_growth),
            SpeciesSpec(
                id=predator_id, role=Role.CONSUMER, trophic_level=1, growth_rate=p.predator_decline
            ),
        ),
        interactions=(
            InteractionSpec(
                species_i=predator_id,
                species_j=prey_id,
                kind=InteractionKind.PREDATION,
                coeff_i=conversion,
                response=LinearResponse(p.encounter_rate),
            ),
        ),
        initial_densities={prey_id: initial[0], predator_id: initial[1]},
        integrator=IntegratorConfig(method="rk4_fixed", step=step),
        horizon=horizon,
    )
