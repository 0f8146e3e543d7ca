"""Fixed points, local stability, oscillation diagnostics and parameter sweeps."""

from __future__ import annotations

import itertools
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .core import (
    InteractionKind,
    InteractionSpec,
    LinearResponse,
    Role,
    Scenario,
    Trajectory,
    validate_scenario,
)
from .continuous import (
    ContinuumParams,
    community_rhs,
    continuum_interaction,
    integrate_report,
)

__all__ = [
    "Classification",
    "classify",
    "jacobian_of",
    "jacobian_at",
    "find_fixed_points",
    "StabilityReport",
    "stability_report",
    "analyze_scenario",
    "oscillation_period",
    "set_parameter",
    "PointSummary",
    "SweepReport",
    "sweep",
    "sweep_epidemic",
    "worker_count",
]


class Classification(str, Enum):
    STABLE_NODE = "stable_node"
    STABLE_FOCUS = "stable_focus"
    CENTER_LIKE = "center_like"
    UNSTABLE_NODE = "unstable_node"
    UNSTABLE_FOCUS = "unstable_focus"
    SADDLE = "saddle"
    UNDETERMINED = "undetermined"


def classify(eigenvalues: Sequence[complex], tol: float = 1e-7) -> Classification:
    """Label a fixed point from the eigenvalues of its Jacobian.

    Real parts beyond +-tol decide stable/unstable (opposite signs give a
    saddle); any imaginary part beyond tol marks a focus.  When the
    largest real part sits inside the tolerance band and imaginary parts
    are present the honest answer is "center_like": finite precision
    cannot tell a true center from a very weak focus.
    """
    ev = [complex(v) for v in eigenvalues]
    if not ev:
        raise ValueError("need at least one eigenvalue")
    re = [v.real for v in ev]
    rotating = any(abs(v.imag) > tol for v in ev)
    re_max, re_min = max(re), min(re)
    if re_max < -tol:
        return Classification.STABLE_FOCUS if rotating else Classification.STABLE_NODE
    if re_max > tol:
        if re_min < -tol:
            return Classification.SADDLE
        return Classification.UNSTABLE_FOCUS if rotating else Classification.UNSTABLE_NODE
    return Classification.CENTER_LIKE if rotating else Classification.UNDETERMINED


def jacobian_of(
    fn: Callable[[np.ndarray], np.ndarray],
    point: Sequence[float],
    fd_step: float = 1e-5,
) -> np.ndarray:
    """Central-difference Jacobian with per-axis step fd_step*max(1, |x_i|)."""
    x = np.asarray(point, dtype=float)
    n = x.shape[0]
    jac = np.empty((n, n))
    for i in range(n):
        h = fd_step * max(1.0, abs(x[i]))
        forward = x.copy()
        backward = x.copy()
        forward[i] += h
        backward[i] -= h
        f_plus = np.asarray(fn(forward), dtype=float)
        f_minus = np.asarray(fn(backward), dtype=float)
        if not (np.all(np.isfinite(f_plus)) and np.all(np.isfinite(f_minus))):
            raise ValueError(f"non-finite derivative evaluation near axis {i}")
        jac[:, i] = (f_plus - f_minus) / (2.0 * h)
    return jac


def jacobian_at(scenario: Scenario, point: Sequence[float], fd_step: float = 1e-5) -> np.ndarray:
    """Jacobian of the community derivative at a state vector."""
    point = np.asarray(point, dtype=float)
    if point.shape != (len(scenario.species),):
        raise ValueError(
            f"point has shape {point.shape}, scenario declares {len(scenario.species)} species"
        )
    return jacobian_of(community_rhs(scenario), point, fd_step)


def _as_classical_pair(scenario: Scenario):
    """Recognize the two-species predation configuration solved in closed form.

    Returns (prey_index, predator_index, growth, encounter, decline, gain)
    or None when the scenario is anything richer.
    """
    if len(scenario.species) != 2 or len(scenario.interactions) != 1:
        return None
    entry = scenario.interactions[0]
    if entry.kind not in (InteractionKind.PREDATION, InteractionKind.PARASITISM):
        return None
    if not isinstance(entry.response, LinearResponse):
        return None
    if any(sp.self_limitation != 0.0 for sp in scenario.species):
        return None
    predator = scenario.species_by_id(entry.species_i)
    prey = scenario.species_by_id(entry.species_j)
    if predator.role != Role.CONSUMER or prey.role != Role.PRODUCER:
        return None
    if entry.response.rate <= 0 or entry.coeff_i <= 0:
        return None
    if prey.growth_rate <= 0 or predator.growth_rate <= 0:
        return None
    ids = scenario.species_ids
    return (
        ids.index(prey.id),
        ids.index(predator.id),
        prey.growth_rate,
        entry.response.rate,
        predator.growth_rate,
        entry.coeff_i * entry.response.rate,
    )


def _newton_starts(scenario: Scenario) -> list[np.ndarray]:
    n = len(scenario.species)
    guesses = []
    for sp in scenario.species:
        if sp.self_limitation > 0 and sp.growth_rate > 0:
            guesses.append(sp.growth_rate / sp.self_limitation)
        else:
            guesses.append(max(scenario.initial_densities.get(sp.id, 1.0), 1.0))
    starts = [np.zeros(n), scenario.initial_state()]
    if n <= 6:
        axes = [(0.1 * g, g, 10.0 * g) for g in guesses]
        starts.extend(np.array(combo) for combo in itertools.product(*axes))
        # boundary candidates: each species absent in turn
        for k in range(n):
            v = np.array(guesses)
            v[k] = 0.0
            starts.append(v)
    else:
        starts.append(np.array(guesses))
    return starts


def find_fixed_points(
    scenario: Scenario,
    residual_tol: float = 1e-10,
    dedupe_tol: float = 1e-8,
    max_iterations: int = 50,
    extra_starts: Sequence[Sequence[float]] | None = None,
) -> list[np.ndarray]:
    """Nonnegative equilibria of the community derivative.

    The two-species predation configuration is answered in closed form:
    the origin plus the analytic coexistence point.  Everything else runs
    damped Newton from a small lattice of starting points (plus any
    `extra_starts`, e.g. the tail of a trajectory), keeps roots with
    residual norm below `residual_tol`, and de-duplicates within
    `dedupe_tol`.  If no start converges the result is an empty list and
    a warning, not an error.
    """
    validate_scenario(scenario)
    n = len(scenario.species)

    classical = _as_classical_pair(scenario)
    if classical is not None:
        prey_idx, pred_idx, growth, encounter, decline, gain = classical
        interior = np.zeros(n)
        interior[prey_idx] = decline / gain
        interior[pred_idx] = growth / encounter
        return [np.zeros(n), interior]

    f = community_rhs(scenario)
    roots: list[np.ndarray] = []
    scale = max(1.0, max((abs(g) for g in scenario.initial_state()), default=1.0))
    converged_any = False
    starts = _newton_starts(scenario)
    if extra_starts is not None:
        starts.extend(np.asarray(s, dtype=float) for s in extra_starts)
    for start in starts:
        x = np.asarray(start, dtype=float).copy()
        ok = False
        for _ in range(max_iterations):
            fx = f(x)
            if not np.all(np.isfinite(fx)):
                break
            norm = np.linalg.norm(fx)
            if norm < residual_tol * 1e-2:
                ok = True
                break
            try:
                jac = jacobian_of(f, x, fd_step=1e-7)
                step = np.linalg.solve(jac, -fx)
            except (np.linalg.LinAlgError, ValueError):
                break
            lam = 1.0
            while lam > 1e-4:
                candidate = x + lam * step
                fc = f(candidate)
                if np.all(np.isfinite(fc)) and np.linalg.norm(fc) < norm:
                    x = candidate
                    break
                lam *= 0.5
            else:
                break
        if not ok:
            fx = f(x)
            ok = np.all(np.isfinite(fx)) and np.linalg.norm(fx) < residual_tol
        if not ok:
            continue
        converged_any = True
        if np.any(x < -1e-9):
            continue
        x = np.where(np.abs(x) < 1e-12, 0.0, np.clip(x, 0.0, None))
        if np.linalg.norm(f(x)) >= residual_tol:
            continue
        if any(np.max(np.abs(x - r)) <= dedupe_tol * scale for r in roots):
            continue
        roots.append(x)
    if not converged_any:
        warnings.warn("Newton iteration did not converge from any starting point", stacklevel=2)
    roots.sort(key=lambda r: tuple(r))
    return roots


@dataclass(frozen=True)
class StabilityReport:
    """Local linearization summary at one fixed point."""

    fixed_point: np.ndarray
    jacobian: np.ndarray
    eigenvalues: tuple[complex, ...]
    classification: Classification


def stability_report(
    scenario: Scenario,
    point: Sequence[float],
    fd_step: float = 1e-5,
    tol: float = 1e-7,
) -> StabilityReport:
    jac = jacobian_at(scenario, point, fd_step)
    ev = np.linalg.eigvals(jac)
    order = np.lexsort((ev.imag, ev.real))
    eigenvalues = tuple(complex(v) for v in ev[order])
    return StabilityReport(
        fixed_point=np.asarray(point, dtype=float),
        jacobian=jac,
        eigenvalues=eigenvalues,
        classification=classify(eigenvalues, tol),
    )


def analyze_scenario(scenario: Scenario, tol: float = 1e-7) -> list[StabilityReport]:
    """Stability report for every fixed point found."""
    return [stability_report(scenario, point, tol=tol) for point in find_fixed_points(scenario)]


def oscillation_period(
    trajectory: Trajectory, variable: str, reference: float
) -> float:
    """Mean oscillation period from upcrossings of a reference level.

    Crossing times are linearly interpolated between samples, which makes
    the estimate robust to the sampling grid.  Needs at least two
    upcrossings.
    """
    values = trajectory.column(variable)
    times = trajectory.times
    crossings = []
    for k in range(len(values) - 1):
        if values[k] < reference <= values[k + 1]:
            frac = (reference - values[k]) / (values[k + 1] - values[k])
            crossings.append(times[k] + frac * (times[k + 1] - times[k]))
    if len(crossings) < 2:
        raise ValueError(
            f"need at least two upcrossings of {reference:g} to estimate a period, "
            f"found {len(crossings)}"
        )
    return float(np.mean(np.diff(crossings)))


def _split_path(path: str) -> list[str]:
    parts = path.split(".")
    if not all(parts):
        raise ValueError(f"unresolvable parameter path '{path}'")
    return parts


def set_parameter(scenario: Scenario, path: str, value: float) -> Scenario:
    """Functionally update one named parameter of a scenario.

    Paths:
        horizon
        species.<id>.growth_rate | self_limitation | trophic_level
        initial.<id>
        interaction.<i>:<j>.coeff_i | coeff_j | alpha | base_strength
        interaction.<i>:<j>.response.rate | handling | saturation
    """
    parts = _split_path(path)
    head = parts[0]
    if head == "horizon" and len(parts) == 1:
        return replace(scenario, horizon=float(value))
    if head == "species" and len(parts) == 3:
        _, sp_id, field_name = parts
        if field_name in ("growth_rate", "self_limitation", "trophic_level"):
            found = False
            species = []
            for sp in scenario.species:
                if sp.id == sp_id:
                    found = True
                    cast = int if field_name == "trophic_level" else float
                    sp = replace(sp, **{field_name: cast(value)})
                species.append(sp)
            if found:
                return replace(scenario, species=tuple(species))
            raise ValueError(f"unresolvable parameter path '{path}': no species '{sp_id}'")
    if head == "initial" and len(parts) == 2:
        sp_id = parts[1]
        if sp_id not in scenario.initial_densities:
            raise ValueError(f"unresolvable parameter path '{path}': no species '{sp_id}'")
        densities = dict(scenario.initial_densities)
        densities[sp_id] = float(value)
        return replace(scenario, initial_densities=densities)
    if head == "interaction" and len(parts) >= 3:
        pair = parts[1].split(":")
        if len(pair) != 2:
            raise ValueError(f"unresolvable parameter path '{path}': expected interaction.<i>:<j>")
        entries = []
        found = False
        for entry in scenario.interactions:
            if {entry.species_i, entry.species_j} == set(pair):
                found = True
                entry = _update_entry(scenario, entry, parts[2:], float(value), path)
            entries.append(entry)
        if found:
            return replace(scenario, interactions=tuple(entries))
        raise ValueError(f"unresolvable parameter path '{path}': no entry for pair {parts[1]}")
    raise ValueError(
        f"unresolvable parameter path '{path}' "
        "(roots: horizon, species.<id>, initial.<id>, interaction.<i>:<j>)"
    )


def _update_entry(
    scenario: Scenario,
    entry: InteractionSpec,
    fields: list[str],
    value: float,
    path: str,
) -> InteractionSpec:
    if fields == ["alpha"] or fields == ["base_strength"]:
        if entry.continuum_alpha is None:
            raise ValueError(
                f"unresolvable parameter path '{path}': entry is not a continuum interaction"
            )
        alpha = value if fields == ["alpha"] else entry.continuum_alpha
        strength = value if fields == ["base_strength"] else entry.continuum_strength
        params = ContinuumParams(
            alpha=alpha,
            base_strength=strength,
            self_limitation_i=scenario.species_by_id(entry.species_i).self_limitation,
            self_limitation_j=scenario.species_by_id(entry.species_j).self_limitation,
        )
        return continuum_interaction(entry.species_i, entry.species_j, params)
    if fields in (["coeff_i"], ["coeff_j"]):
        return replace(entry, **{fields[0]: value})
    if len(fields) == 2 and fields[0] == "response":
        name = fields[1]
        if hasattr(entry.response, name):
            return replace(entry, response=replace(entry.response, **{name: value}))
        raise ValueError(
            f"unresolvable parameter path '{path}': response has no field '{name}'"
        )
    raise ValueError(f"unresolvable parameter path '{path}'")


@dataclass(frozen=True)
class PointSummary:
    """What one sweep grid point produced."""

    value: float
    classification: Classification | None
    final_state: tuple[float, ...] | None = None
    extinctions: tuple[tuple[str, float], ...] = ()
    metric: float | None = None


@dataclass(frozen=True)
class SweepReport:
    """Per-point summaries over a monotone parameter grid.

    `transitions` lists the bracketing grid intervals whose endpoint
    classifications differ.
    """

    parameter_path: str
    grid: tuple[float, ...]
    points: tuple[PointSummary, ...]
    transitions: tuple[tuple[float, float], ...]


def worker_count() -> int:
    """Sweep parallelism from ECOLAB_THREADS (0 = auto, default serial)."""
    raw = os.environ.get("ECOLAB_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    if value == 0:
        return os.cpu_count() or 1
    return max(1, value)


def _map_points(job, grid, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(job, range(len(grid))))
    return [job(k) for k in range(len(grid))]


def _attractor_classification(scenario: Scenario, final: np.ndarray) -> Classification | None:
    points = find_fixed_points(scenario, extra_starts=[final])
    if not points:
        return None
    nearest = min(points, key=lambda pt: float(np.linalg.norm(pt - final)))
    return stability_report(scenario, nearest).classification


def sweep(
    scenario: Scenario,
    parameter_path: str,
    grid: Sequence[float],
    metric: Callable[[Scenario, Trajectory], float] | None = None,
    threads: int | None = None,
) -> SweepReport:
    """Re-validate and re-analyze a scenario across a parameter grid.

    Each point integrates the updated scenario, classifies the fixed
    point nearest the trajectory's final state (the attractor the run
    settled toward) and evaluates the optional user metric.  Points are
    independent and may run on a worker pool; the report is ordered by
    grid index regardless of completion order.
    """
    grid = tuple(float(g) for g in grid)
    if len(grid) < 2:
        raise ValueError("grid needs at least two points")
    diffs = np.diff(grid)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError("grid must be strictly monotone")
    set_parameter(scenario, parameter_path, grid[0])  # fail fast on bad paths
    threads = worker_count() if threads is None else max(1, threads)

    def job(idx: int) -> PointSummary:
        updated = validate_scenario(set_parameter(scenario, parameter_path, grid[idx]))
        result = integrate_report(updated)
        final = result.trajectory.final_state()
        classification = _attractor_classification(updated, final)
        metric_value = None
        if metric is not None:
            metric_value = float(metric(updated, result.trajectory))
        return PointSummary(
            value=grid[idx],
            classification=classification,
            final_state=tuple(float(v) for v in final),
            extinctions=result.extinctions,
            metric=metric_value,
        )

    points = _map_points(job, grid, threads)
    transitions = tuple(
        (grid[k], grid[k + 1])
        for k in range(len(grid) - 1)
        if points[k].classification != points[k + 1].classification
    )
    return SweepReport(
        parameter_path=parameter_path,
        grid=grid,
        points=tuple(points),
        transitions=transitions,
    )


def sweep_epidemic(
    model,
    parameter_path: str,
    grid: Sequence[float],
    horizon: float,
    runs_per_point: int = 20,
    master_seed: int = 0,
) -> SweepReport:
    """Monte Carlo persistence fraction across an epidemic rate grid.

    The metric per grid point is the fraction of seeded runs with
    infection alive at the horizon; classifications do not apply, so the
    report never contains transitions.
    """
    from dataclasses import replace as _replace

    from .epidemic import EpidemicModel, persistence_fraction, run_seed

    if not isinstance(model, EpidemicModel):
        raise TypeError("sweep_epidemic expects an EpidemicModel")
    if parameter_path not in ("beta", "gamma"):
        raise ValueError(
            f"unresolvable parameter path '{parameter_path}' for an epidemic (beta, gamma)"
        )
    grid = tuple(float(g) for g in grid)
    if len(grid) < 2:
        raise ValueError("grid needs at least two points")
    diffs = np.diff(grid)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError("grid must be strictly monotone")

    def job(idx: int) -> PointSummary:
        updated = _replace(model, **{parameter_path: grid[idx]})
        fraction = persistence_fraction(
            updated.graph,
            updated.beta,
            updated.gamma,
            horizon,
            runs_per_point,
            master_seed=run_seed(master_seed, idx),
            kind=updated.kind,
            initial_infected=updated.initial_infected,
        )
        return PointSummary(value=grid[idx], classification=None, metric=fraction)

    points = _map_points(job, grid, worker_count())
    return SweepReport(
        parameter_path=parameter_path,
        grid=grid,
        points=tuple(points),
        transitions=(),
    )
