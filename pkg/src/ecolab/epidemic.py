"""Pathogen spread on contact networks.

Graph generation, exact event-driven SIS/SIR simulation with
exponential waiting times, and the transmission threshold both as the
degree-based mean-field formula and as a seeded Monte Carlo estimate.
"""

from __future__ import annotations

import hashlib
import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Iterable

import numpy as np

from .core import Trajectory

__all__ = [
    "Graph",
    "complete_graph",
    "erdos_renyi",
    "barabasi_albert",
    "from_edges",
    "read_edge_list",
    "EpidemicKind",
    "EpidemicModel",
    "PrevalenceTrajectory",
    "simulate_epidemic",
    "mean_field_threshold",
    "persistence_fraction",
    "ThresholdBracketError",
    "ThresholdEstimate",
    "estimate_threshold",
    "run_seed",
]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes 0..n_nodes-1."""

    n_nodes: int
    edges: frozenset[tuple[int, int]]
    generator_tag: str = "explicit"

    def __post_init__(self) -> None:
        if self.n_nodes <= 0:
            raise ValueError("n_nodes must be positive")
        normalized = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise ValueError(f"edge ({u}, {v}) outside node range [0, {self.n_nodes})")
            normalized.add((u, v) if u < v else (v, u))
        object.__setattr__(self, "edges", frozenset(normalized))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        neighbors: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for u, v in sorted(self.edges):
            neighbors[u].append(v)
            neighbors[v].append(u)
        return tuple(tuple(ns) for ns in neighbors)

    def degrees(self) -> np.ndarray:
        return np.array([len(ns) for ns in self.adjacency], dtype=float)


def complete_graph(n: int) -> Graph:
    edges = frozenset((u, v) for u in range(n) for v in range(u + 1, n))
    return Graph(n_nodes=n, edges=edges, generator_tag="complete")


def erdos_renyi(n: int, p: float, seed: int = 0) -> Graph:
    """Independent edge sampling; deterministic for a given seed."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    rng = random.Random(seed)
    edges = set()
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.add((u, v))
    return Graph(n_nodes=n, edges=frozenset(edges), generator_tag=f"erdos_renyi(p={p!r})")


def barabasi_albert(n: int, m: int, seed: int = 0) -> Graph:
    """Preferential attachment growth, deterministic for a given seed.

    Starts from a clique on m+1 nodes; every later node attaches exactly
    m edges to distinct targets drawn proportionally to degree (sampling
    without replacement, degrees taken as of the node's arrival).
    """
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    rng = random.Random(seed)
    edges: set[tuple[int, int]] = set()
    degree = [0] * n
    for u in range(m + 1):
        for v in range(u + 1, m + 1):
            edges.add((u, v))
            degree[u] += 1
            degree[v] += 1
    total = 2 * len(edges)
    for new in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            pick = rng.random() * total
            acc = 0.0
            for node in range(new):
                acc += degree[node]
                if pick < acc:
                    targets.add(node)
                    break
        for t in targets:
            edges.add((t, new) if t < new else (new, t))
            degree[t] += 1
            degree[new] += 1
            total += 2
    return Graph(n_nodes=n, edges=frozenset(edges), generator_tag=f"barabasi_albert(m={m})")


def from_edges(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    return Graph(n_nodes=n, edges=frozenset(tuple(e) for e in edges), generator_tag="explicit")


def read_edge_list(text: str) -> Graph:
    """Parse a plain edge-list: one "u v" pair per line, 0-indexed.

    Blank lines and lines starting with '#' are skipped.  The node count
    is one past the largest index seen.
    """
    edges = []
    top = -1
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: node indices must be integers, got {line!r}") from None
        if u < 0 or v < 0:
            raise ValueError(f"line {lineno}: node indices must be >= 0")
        edges.append((u, v))
        top = max(top, u, v)
    if not edges:
        raise ValueError("edge list is empty")
    return from_edges(top + 1, edges)


class EpidemicKind(str, Enum):
    SIS = "sis"
    SIR = "sir"


@dataclass(frozen=True)
class EpidemicModel:
    """Stochastic epidemic on a contact graph.

    Infection crosses each susceptible-infected edge at rate `beta`;
    infected nodes recover at rate `gamma` (back to susceptible for SIS,
    to immune for SIR).  The seed fixes the whole event sequence.
    """

    graph: Graph
    kind: EpidemicKind = EpidemicKind.SIS
    beta: float = 0.1
    gamma: float = 1.0
    initial_infected: frozenset[int] = frozenset({0})
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EpidemicKind(self.kind))
        object.__setattr__(self, "initial_infected", frozenset(int(v) for v in self.initial_infected))
        if not self.initial_infected:
            raise ValueError("initial_infected must not be empty")
        for node in self.initial_infected:
            if not 0 <= node < self.graph.n_nodes:
                raise ValueError(f"initial infected node {node} outside range [0, {self.graph.n_nodes})")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValueError("beta must be finite and >= 0")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be finite and > 0")


@dataclass(frozen=True)
class PrevalenceTrajectory:
    """Sampled infected (and recovered) fractions of one run."""

    times: np.ndarray
    infected_fraction: np.ndarray
    recovered_fraction: np.ndarray | None
    extinction_time: float | None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        infected = np.asarray(self.infected_fraction, dtype=float)
        if times.shape != infected.shape:
            raise ValueError("times and infected_fraction must have matching shapes")
        if np.any((infected < 0) | (infected > 1)):
            raise ValueError("infected fractions must lie in [0, 1]")
        recovered = self.recovered_fraction
        if recovered is not None:
            recovered = np.asarray(recovered, dtype=float)
            if np.any((recovered < 0) | (recovered > 1)):
                raise ValueError("recovered fractions must lie in [0, 1]")
            if np.any(infected + recovered > 1.0 + 1e-12):
                raise ValueError("infected + recovered must stay <= 1")
            recovered.flags.writeable = False
        times.flags.writeable = False
        infected.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "infected_fraction", infected)
        object.__setattr__(self, "recovered_fraction", recovered)

    def as_trajectory(self) -> Trajectory:
        if self.recovered_fraction is None:
            return Trajectory(("infected_fraction",), self.times, self.infected_fraction.reshape(-1, 1))
        values = np.column_stack([self.infected_fraction, self.recovered_fraction])
        return Trajectory(("infected_fraction", "recovered_fraction"), self.times, values)


def run_seed(master_seed: int, run_index: int) -> int:
    """Stable per-run seed derived from a master seed and a run index.

    A cryptographic mix keeps sweeps reproducible across platforms and
    independent of worker scheduling.
    """
    mask = (1 << 64) - 1
    digest = hashlib.sha256(
        b"ecolab.run" + (int(master_seed) & mask).to_bytes(8, "little")
        + (int(run_index) & mask).to_bytes(8, "little")
    ).digest()
    return int.from_bytes(digest[:8], "little")


def simulate_epidemic(model: EpidemicModel, horizon: float, sample_dt: float = 1.0) -> PrevalenceTrajectory:
    """Exact continuous-time simulation sampled on a uniform grid.

    Waiting times are exponential in the total event rate; each event is
    an infection across a uniformly chosen susceptible-infected edge or
    the recovery of a uniformly chosen infected node.  No discretization
    enters anywhere, so threshold experiments see no step-size bias.
    Identical (model, seed) pairs give bit-identical trajectories.
    """
    if not (math.isfinite(horizon) and horizon > 0):
        raise ValueError("horizon must be > 0")
    if not (math.isfinite(sample_dt) and sample_dt > 0):
        raise ValueError("sample_dt must be > 0")
    graph = model.graph
    n = graph.n_nodes
    adjacency = graph.adjacency
    rng = random.Random(model.seed)
    sir = model.kind == EpidemicKind.SIR

    S, I, R = 0, 1, 2
    status = [S] * n
    infected: list[int] = []
    position = [-1] * n
    for node in sorted(model.initial_infected):
        status[node] = I
        position[node] = len(infected)
        infected.append(node)
    sus_count = [0] * n
    total_si = 0
    for node in infected:
        count = sum(1 for nb in adjacency[node] if status[nb] == S)
        sus_count[node] = count
        total_si += count

    n_samples = int(math.floor(horizon / sample_dt + 1e-9)) + 1
    sample_times = np.arange(n_samples) * sample_dt
    infected_counts = np.empty(n_samples, dtype=float)
    recovered_counts = np.empty(n_samples, dtype=float) if sir else None

    beta, gamma = model.beta, model.gamma
    t = 0.0
    k = 0
    n_infected = len(infected)
    n_recovered = 0
    extinction_time: float | None = None

    def emit_until(limit: float) -> None:
        nonlocal k
        while k < n_samples and sample_times[k] <= limit:
            infected_counts[k] = n_infected
            if sir:
                recovered_counts[k] = n_recovered
            k += 1

    while True:
        if n_infected == 0:
            extinction_time = t
            break
        total_rate = beta * total_si + gamma * n_infected
        t_next = t + rng.expovariate(total_rate)
        if t_next > horizon:
            emit_until(horizon)
            break
        emit_until(math.nextafter(t_next, -math.inf))
        pick = rng.random() * total_rate
        if pick < beta * total_si:
            # infection: weighted choice of an infected node by its
            # susceptible-neighbor count, then a uniform susceptible neighbor
            target_weight = rng.random() * total_si
            acc = 0
            source = -1
            for node in infected:
                acc += sus_count[node]
                if target_weight < acc:
                    source = node
                    break
            if source < 0:
                # unreachable with exact integer weights; guard roundoff anyway
                source = next(nd for nd in reversed(infected) if sus_count[nd] > 0)
            which = rng.randrange(sus_count[source])
            new = -1
            for nb in adjacency[source]:
                if status[nb] == S:
                    if which == 0:
                        new = nb
                        break
                    which -= 1
            status[new] = I
            position[new] = len(infected)
            infected.append(new)
            n_infected += 1
            count = 0
            for nb in adjacency[new]:
                nb_status = status[nb]
                if nb_status == S:
                    count += 1
                elif nb_status == I:
                    sus_count[nb] -= 1
                    total_si -= 1
            sus_count[new] = count
            total_si += count
        else:
            node = infected[rng.randrange(n_infected)]
            last = infected[-1]
            infected[position[node]] = last
            position[last] = position[node]
            infected.pop()
            position[node] = -1
            n_infected -= 1
            total_si -= sus_count[node]
            sus_count[node] = 0
            if sir:
                status[node] = R
                n_recovered += 1
            else:
                status[node] = S
                for nb in adjacency[node]:
                    if status[nb] == I:
                        sus_count[nb] += 1
                        total_si += 1
        t = t_next

    emit_until(horizon)
    return PrevalenceTrajectory(
        times=sample_times,
        infected_fraction=infected_counts / n,
        recovered_fraction=None if not sir else recovered_counts / n,
        extinction_time=extinction_time,
    )


def mean_field_threshold(graph: Graph, gamma: float = 1.0) -> float:
    """Critical infection rate gamma * <k> / <k^2> from the degree moments.

    Heavy-tailed degree distributions push the threshold far below the
    homogeneous guess gamma / <k>.
    """
    if graph.n_edges == 0:
        raise ValueError("graph has no edges")
    degrees = graph.degrees()
    return float(gamma * degrees.mean() / (degrees**2).mean())


def _threads() -> int:
    raw = os.environ.get("ECOLAB_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    if value == 0:
        return os.cpu_count() or 1
    return max(1, value)


def default_initial_infected(graph: Graph) -> frozenset[int]:
    """A tenth of the nodes (at least one), used by threshold estimation."""
    return frozenset(range(max(1, graph.n_nodes // 10)))


def persistence_fraction(
    graph: Graph,
    beta: float,
    gamma: float,
    horizon: float,
    n_runs: int,
    master_seed: int = 0,
    kind: EpidemicKind = EpidemicKind.SIS,
    initial_infected: frozenset[int] | None = None,
) -> float:
    """Fraction of seeded runs with infected individuals alive at the horizon.

    Run k uses the derived seed run_seed(master_seed, k); the aggregate
    is a count, so worker scheduling cannot change the answer.
    """
    if initial_infected is None:
        initial_infected = default_initial_infected(graph)
    base = EpidemicModel(
        graph=graph, kind=kind, beta=beta, gamma=gamma, initial_infected=initial_infected
    )

    def one(k: int) -> bool:
        model = replace(base, seed=run_seed(master_seed, k))
        return simulate_epidemic(model, horizon, sample_dt=horizon).extinction_time is None

    threads = _threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            alive = sum(pool.map(one, range(n_runs)))
    else:
        alive = sum(one(k) for k in range(n_runs))
    return alive / n_runs


class ThresholdBracketError(RuntimeError):
    """The supplied beta range does not straddle the persistence transition."""


@dataclass(frozen=True)
class ThresholdEstimate:
    beta: float
    bracket: tuple[float, float]
    bracket_width: float
    survival_low: float
    survival_high: float


def estimate_threshold(
    graph: Graph,
    gamma: float,
    beta_range: tuple[float, float],
    runs_per_point: int = 40,
    persistence_horizon: float = 60.0,
    n_bisections: int = 8,
    master_seed: int = 0,
    initial_infected: frozenset[int] | None = None,
) -> ThresholdEstimate:
    """Monte Carlo bisection for the empirical persistence threshold.

    The criterion is "at least half of the seeded runs still carry
    infection at the persistence horizon".  The beta range must bracket
    the transition: survival below 0.1 at the low end and above 0.9 at
    the high end, otherwise a ThresholdBracketError reports the observed
    fractions.  Returns the final bracket midpoint and width.
    """
    low, high = float(beta_range[0]), float(beta_range[1])
    if not (0 <= low < high):
        raise ValueError("beta_range must satisfy 0 <= low < high")
    if initial_infected is None:
        initial_infected = default_initial_infected(graph)

    evaluations = 0

    def survival(beta: float) -> float:
        nonlocal evaluations
        submaster = run_seed(master_seed, evaluations)
        evaluations += 1
        return persistence_fraction(
            graph,
            beta,
            gamma,
            persistence_horizon,
            runs_per_point,
            master_seed=submaster,
            initial_infected=initial_infected,
        )

    survival_low = survival(low)
    survival_high = survival(high)
    if survival_low >= 0.1 or survival_high <= 0.9:
        raise ThresholdBracketError(
            f"beta range [{low:g}, {high:g}] does not bracket the transition: "
            f"survival {survival_low:.2f} at the low end, {survival_high:.2f} at the high end"
        )
    for _ in range(n_bisections):
        mid = 0.5 * (low + high)
        if survival(mid) >= 0.5:
            high = mid
        else:
            low = mid
    return ThresholdEstimate(
        beta=0.5 * (low + high),
        bracket=(low, high),
        bracket_width=high - low,
        survival_low=survival_low,
        survival_high=survival_high,
    )
