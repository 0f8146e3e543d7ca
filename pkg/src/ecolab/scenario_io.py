"""Scenario documents: strict JSON parsing, serialization, CSV and digests.

A document is a JSON object with a top-level "kind" of community,
epidemic, selection or discrete (schema_version 1).  Parsing is strict:
unknown fields are errors, so a typo in a rate name fails loudly instead
of silently running the wrong experiment.  serialize/parse round-trips
to an equal structure.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from .core import (
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
    validate_scenario,
)
from .continuous import ContinuumParams, continuum_interaction
from .discrete import NicholsonBaileyParams
from .epidemic import (
    EpidemicKind,
    EpidemicModel,
    Graph,
    barabasi_albert,
    complete_graph,
    erdos_renyi,
    from_edges,
)
from .selection import SelectionState, constant_gradient, linear_gradient, make_g_matrix

__all__ = [
    "ParseError",
    "EpidemicBundle",
    "SelectionBundle",
    "DiscreteBundle",
    "Document",
    "parse_scenario",
    "serialize_scenario",
    "document_kind",
    "scenario_digest",
    "write_csv",
    "read_csv",
]

SCHEMA_VERSION = 1
KINDS = ("community", "discrete", "epidemic", "selection")


class ParseError(ValueError):
    """Malformed scenario document; the message pinpoints the field."""


@dataclass(frozen=True)
class GradientSpec:
    """Serializable description of a selection gradient."""

    type: str  # "constant" | "linear"
    value: tuple[float, ...] = (0.0, 0.0, 0.0)
    intercept: tuple[float, ...] = (0.0, 0.0, 0.0)
    matrix: tuple[tuple[float, ...], ...] = ((0.0,) * 3,) * 3

    def callable(self):
        if self.type == "constant":
            return constant_gradient(self.value)
        return linear_gradient(self.intercept, [list(row) for row in self.matrix])

    def at(self, means) -> tuple[float, ...]:
        return tuple(float(v) for v in self.callable()(np.asarray(means, dtype=float)))


@dataclass(frozen=True)
class EpidemicBundle:
    model: EpidemicModel
    horizon: float
    sample_dt: float
    graph_spec: dict | None = None

    def __post_init__(self) -> None:
        if self.graph_spec is not None:
            object.__setattr__(self, "graph_spec", dict(self.graph_spec))


@dataclass(frozen=True)
class SelectionBundle:
    means: tuple[float, float, float]
    covariance: tuple[float, float, float, float, float, float]
    natural: GradientSpec
    sexual: GradientSpec
    mutation: tuple[float, float, float]
    steps: int

    def initial_state(self) -> SelectionState:
        g = make_g_matrix(*self.covariance)
        means = np.asarray(self.means, dtype=float)
        return SelectionState(
            means=means,
            g_matrix=g,
            natural_gradient=np.asarray(self.natural.at(means)),
            sexual_gradient=np.asarray(self.sexual.at(means)),
            mutation_step=np.asarray(self.mutation, dtype=float),
        )


@dataclass(frozen=True)
class DiscreteBundle:
    params: NicholsonBaileyParams
    initial_host: float
    initial_parasitoid: float
    generations: int


Document = Union[Scenario, EpidemicBundle, SelectionBundle, DiscreteBundle]


def document_kind(document: Document) -> str:
    if isinstance(document, Scenario):
        return "community"
    if isinstance(document, EpidemicBundle):
        return "epidemic"
    if isinstance(document, SelectionBundle):
        return "selection"
    if isinstance(document, DiscreteBundle):
        return "discrete"
    raise TypeError(f"not a scenario document: {document!r}")


# ---------------------------------------------------------------------------
# strict object walking

def _require_object(data: Any, path: str) -> dict:
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected an object, got {type(data).__name__}")
    return data


def _check_keys(data: dict, path: str, required: set[str], optional: set[str]) -> None:
    unknown = sorted(set(data) - required - optional)
    if unknown:
        allowed = ", ".join(sorted(required | optional))
        raise ParseError(f"{path}: unknown field(s) {', '.join(unknown)} (valid fields: {allowed})")
    missing = sorted(required - set(data))
    if missing:
        raise ParseError(f"{path}: missing required field(s) {', '.join(missing)}")


def _number(data: dict, key: str, path: str, default=None) -> float:
    if key not in data:
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{path}.{key}: expected a number")
    if not math.isfinite(value):
        raise ParseError(f"{path}.{key}: must be finite")
    return float(value)


def _integer(data: dict, key: str, path: str, default=None) -> int:
    if key not in data:
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{path}.{key}: expected an integer")
    return value


def _string(data: dict, key: str, path: str, default=None) -> str:
    if key not in data:
        return default
    value = data[key]
    if not isinstance(value, str):
        raise ParseError(f"{path}.{key}: expected a string")
    return value


def _vector(data: dict, key: str, path: str, length: int, default=None):
    if key not in data:
        return default
    value = data[key]
    if not isinstance(value, list) or len(value) != length:
        raise ParseError(f"{path}.{key}: expected a list of {length} numbers")
    out = []
    for k, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ParseError(f"{path}.{key}[{k}]: expected a number")
        out.append(float(item))
    return tuple(out)


# ---------------------------------------------------------------------------
# parsing

def parse_scenario(text: str) -> Document:
    """Parse a scenario document; see the module docstring for the schema.

    Raises ParseError with line/column on JSON syntax errors and with a
    field path on schema violations; community invariant violations come
    through as ScenarioValidationError from validate_scenario.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    data = _require_object(data, "document")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ParseError(
            f"unknown kind {kind!r}; valid kinds: {', '.join(KINDS)}"
        )
    version = _integer(data, "schema_version", "document", default=SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version} (current: {SCHEMA_VERSION})")
    if kind == "community":
        return _parse_community(data)
    if kind == "epidemic":
        return _parse_epidemic(data)
    if kind == "selection":
        return _parse_selection(data)
    return _parse_discrete(data)


def _parse_response(data: Any, path: str):
    data = _require_object(data, path)
    kind = _string(data, "type", path)
    if kind == "linear":
        _check_keys(data, path, {"type", "rate"}, set())
        return LinearResponse(rate=_number(data, "rate", path))
    if kind == "holling2":
        _check_keys(data, path, {"type", "rate", "handling"}, set())
        return HollingTypeII(rate=_number(data, "rate", path), handling=_number(data, "handling", path))
    if kind == "ivlev":
        _check_keys(data, path, {"type", "rate", "saturation"}, set())
        return IvlevResponse(rate=_number(data, "rate", path), saturation=_number(data, "saturation", path))
    raise ParseError(f"{path}.type: unknown response type {kind!r} (linear, holling2, ivlev)")


def _parse_community(data: dict) -> Scenario:
    _check_keys(
        data,
        "document",
        {"kind", "species", "interactions", "initial_densities", "horizon"},
        {"schema_version", "integrator"},
    )
    species = []
    raw_species = data["species"]
    if not isinstance(raw_species, list):
        raise ParseError("document.species: expected a list")
    for idx, raw in enumerate(raw_species):
        path = f"species[{idx}]"
        raw = _require_object(raw, path)
        _check_keys(
            raw,
            path,
            {"id", "role", "growth_rate"},
            {"name", "trophic_level", "self_limitation"},
        )
        role_raw = _string(raw, "role", path)
        if role_raw not in ("producer", "consumer"):
            raise ParseError(f"{path}.role: expected 'producer' or 'consumer', got {role_raw!r}")
        role = Role(role_raw)
        species.append(
            SpeciesSpec(
                id=_string(raw, "id", path),
                name=_string(raw, "name", path, default=""),
                role=role,
                trophic_level=_integer(
                    raw, "trophic_level", path, default=0 if role == Role.PRODUCER else 1
                ),
                growth_rate=_number(raw, "growth_rate", path),
                self_limitation=_number(raw, "self_limitation", path, default=0.0),
            )
        )
    by_id = {sp.id: sp for sp in species}

    interactions = []
    raw_entries = data["interactions"]
    if not isinstance(raw_entries, list):
        raise ParseError("document.interactions: expected a list")
    for idx, raw in enumerate(raw_entries):
        path = f"interactions[{idx}]"
        raw = _require_object(raw, path)
        kind_raw = _string(raw, "kind", path)
        if kind_raw == "continuum":
            _check_keys(raw, path, {"species_i", "species_j", "kind", "alpha", "base_strength"}, set())
            i_id = _string(raw, "species_i", path)
            j_id = _string(raw, "species_j", path)
            for sp_id in (i_id, j_id):
                if sp_id not in by_id:
                    raise ParseError(f"{path}: unknown species '{sp_id}'")
            try:
                params = ContinuumParams(
                    alpha=_number(raw, "alpha", path),
                    base_strength=_number(raw, "base_strength", path),
                    self_limitation_i=by_id[i_id].self_limitation,
                    self_limitation_j=by_id[j_id].self_limitation,
                )
            except ValueError as exc:
                raise ParseError(f"{path}: {exc}") from None
            interactions.append(continuum_interaction(i_id, j_id, params))
            continue
        try:
            kind = InteractionKind(kind_raw)
        except ValueError:
            valid = ", ".join([k.value for k in InteractionKind] + ["continuum"])
            raise ParseError(f"{path}.kind: unknown kind {kind_raw!r} (valid: {valid})") from None
        if kind in (InteractionKind.PREDATION, InteractionKind.PARASITISM):
            _check_keys(raw, path, {"species_i", "species_j", "kind", "coeff_i", "response"}, set())
            entry = InteractionSpec(
                species_i=_string(raw, "species_i", path),
                species_j=_string(raw, "species_j", path),
                kind=kind,
                coeff_i=_number(raw, "coeff_i", path),
                response=_parse_response(raw["response"], f"{path}.response"),
            )
        else:
            _check_keys(raw, path, {"species_i", "species_j", "kind", "coeff_i", "coeff_j"}, set())
            entry = InteractionSpec(
                species_i=_string(raw, "species_i", path),
                species_j=_string(raw, "species_j", path),
                kind=kind,
                coeff_i=_number(raw, "coeff_i", path),
                coeff_j=_number(raw, "coeff_j", path),
            )
        interactions.append(entry)

    densities_raw = _require_object(data["initial_densities"], "document.initial_densities")
    densities = {}
    for key, value in densities_raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"document.initial_densities.{key}: expected a number")
        densities[key] = float(value)

    integrator = IntegratorConfig()
    if "integrator" in data:
        raw = _require_object(data["integrator"], "document.integrator")
        _check_keys(
            raw,
            "document.integrator",
            set(),
            {"method", "step", "rel_tol", "abs_tol", "extinction_epsilon"},
        )
        method = _string(raw, "method", "document.integrator", default="rk4_fixed")
        integrator = IntegratorConfig(
            method=method,
            step=_number(raw, "step", "document.integrator", default=0.01),
            rel_tol=_number(raw, "rel_tol", "document.integrator", default=1e-6),
            abs_tol=_number(raw, "abs_tol", "document.integrator", default=1e-9),
            extinction_epsilon=_number(
                raw, "extinction_epsilon", "document.integrator", default=1e-9
            ),
        )

    scenario = Scenario(
        species=tuple(species),
        interactions=tuple(interactions),
        initial_densities=densities,
        integrator=integrator,
        horizon=_number(data, "horizon", "document"),
    )
    return validate_scenario(scenario)


def _build_graph(raw: dict, path: str) -> tuple[Graph, dict]:
    raw = _require_object(raw, path)
    generator = _string(raw, "generator", path)
    if generator == "complete":
        _check_keys(raw, path, {"generator", "n"}, set())
        spec = {"generator": "complete", "n": _integer(raw, "n", path)}
        return complete_graph(spec["n"]), spec
    if generator == "erdos_renyi":
        _check_keys(raw, path, {"generator", "n", "p"}, {"seed"})
        spec = {
            "generator": "erdos_renyi",
            "n": _integer(raw, "n", path),
            "p": _number(raw, "p", path),
            "seed": _integer(raw, "seed", path, default=0),
        }
        return erdos_renyi(spec["n"], spec["p"], spec["seed"]), spec
    if generator == "barabasi_albert":
        _check_keys(raw, path, {"generator", "n", "m"}, {"seed"})
        spec = {
            "generator": "barabasi_albert",
            "n": _integer(raw, "n", path),
            "m": _integer(raw, "m", path),
            "seed": _integer(raw, "seed", path, default=0),
        }
        return barabasi_albert(spec["n"], spec["m"], spec["seed"]), spec
    if generator == "explicit":
        _check_keys(raw, path, {"generator", "n", "edges"}, set())
        edges_raw = raw["edges"]
        if not isinstance(edges_raw, list):
            raise ParseError(f"{path}.edges: expected a list of [u, v] pairs")
        edges = []
        for k, pair in enumerate(edges_raw):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in pair)
            ):
                raise ParseError(f"{path}.edges[{k}]: expected [u, v] with integer nodes")
            edges.append((pair[0], pair[1]))
        n = _integer(raw, "n", path)
        spec = {"generator": "explicit", "n": n, "edges": sorted(tuple(sorted(e)) for e in edges)}
        return from_edges(n, edges), spec
    raise ParseError(
        f"{path}.generator: unknown generator {generator!r} "
        "(complete, erdos_renyi, barabasi_albert, explicit)"
    )


def _parse_epidemic(data: dict) -> EpidemicBundle:
    _check_keys(
        data,
        "document",
        {"kind", "graph", "model", "beta", "gamma", "initial_infected", "horizon"},
        {"schema_version", "seed", "sample_dt"},
    )
    graph, graph_spec = _build_graph(data["graph"], "document.graph")
    model_raw = _string(data, "model", "document")
    if model_raw not in ("sis", "sir"):
        raise ParseError(f"document.model: expected 'sis' or 'sir', got {model_raw!r}")
    infected_raw = data["initial_infected"]
    if not isinstance(infected_raw, list) or not all(
        isinstance(x, int) and not isinstance(x, bool) for x in infected_raw
    ):
        raise ParseError("document.initial_infected: expected a list of node indices")
    try:
        model = EpidemicModel(
            graph=graph,
            kind=EpidemicKind(model_raw),
            beta=_number(data, "beta", "document"),
            gamma=_number(data, "gamma", "document"),
            initial_infected=frozenset(infected_raw),
            seed=_integer(data, "seed", "document", default=0),
        )
    except ValueError as exc:
        raise ParseError(f"document: {exc}") from None
    horizon = _number(data, "horizon", "document")
    if horizon <= 0:
        raise ParseError("document.horizon: must be > 0")
    sample_dt = _number(data, "sample_dt", "document", default=1.0)
    if sample_dt <= 0:
        raise ParseError("document.sample_dt: must be > 0")
    return EpidemicBundle(model=model, horizon=horizon, sample_dt=sample_dt, graph_spec=graph_spec)


def _parse_gradient(raw: Any, path: str) -> GradientSpec:
    raw = _require_object(raw, path)
    kind = _string(raw, "type", path)
    if kind == "constant":
        _check_keys(raw, path, {"type", "value"}, set())
        return GradientSpec(type="constant", value=_vector(raw, "value", path, 3))
    if kind == "linear":
        _check_keys(raw, path, {"type", "intercept", "matrix"}, set())
        matrix_raw = raw["matrix"]
        if not isinstance(matrix_raw, list) or len(matrix_raw) != 3:
            raise ParseError(f"{path}.matrix: expected 3 rows of 3 numbers")
        rows = []
        for k, row in enumerate(matrix_raw):
            if not isinstance(row, list) or len(row) != 3:
                raise ParseError(f"{path}.matrix[{k}]: expected 3 numbers")
            for item in row:
                if isinstance(item, bool) or not isinstance(item, (int, float)):
                    raise ParseError(f"{path}.matrix[{k}]: expected 3 numbers")
            rows.append(tuple(float(v) for v in row))
        return GradientSpec(
            type="linear",
            intercept=_vector(raw, "intercept", path, 3),
            matrix=tuple(rows),
        )
    raise ParseError(f"{path}.type: unknown gradient type {kind!r} (constant, linear)")


def _parse_selection(data: dict) -> SelectionBundle:
    _check_keys(
        data,
        "document",
        {"kind", "means", "covariance", "natural_gradient", "sexual_gradient"},
        {"schema_version", "mutation", "steps"},
    )
    means_raw = _require_object(data["means"], "document.means")
    _check_keys(means_raw, "document.means", {"display", "preference", "fitness"}, set())
    means = tuple(_number(means_raw, key, "document.means") for key in ("display", "preference", "fitness"))
    cov_raw = _require_object(data["covariance"], "document.covariance")
    _check_keys(
        cov_raw,
        "document.covariance",
        {"v_display", "v_preference", "v_fitness"},
        {"c_display_preference", "c_display_fitness", "c_preference_fitness"},
    )
    covariance = (
        _number(cov_raw, "v_display", "document.covariance"),
        _number(cov_raw, "v_preference", "document.covariance"),
        _number(cov_raw, "v_fitness", "document.covariance"),
        _number(cov_raw, "c_display_preference", "document.covariance", default=0.0),
        _number(cov_raw, "c_display_fitness", "document.covariance", default=0.0),
        _number(cov_raw, "c_preference_fitness", "document.covariance", default=0.0),
    )
    steps = _integer(data, "steps", "document", default=100)
    if steps < 0:
        raise ParseError("document.steps: must be >= 0")
    bundle = SelectionBundle(
        means=means,
        covariance=covariance,
        natural=_parse_gradient(data["natural_gradient"], "document.natural_gradient"),
        sexual=_parse_gradient(data["sexual_gradient"], "document.sexual_gradient"),
        mutation=_vector(data, "mutation", "document", 3, default=(0.0, 0.0, 0.0)),
        steps=steps,
    )
    try:
        bundle.initial_state()
    except ValueError as exc:
        raise ParseError(f"document: {exc}") from None
    return bundle


def _parse_discrete(data: dict) -> DiscreteBundle:
    _check_keys(
        data,
        "document",
        {"kind", "map", "params", "initial", "generations"},
        {"schema_version"},
    )
    map_name = _string(data, "map", "document")
    if map_name != "nicholson_bailey":
        raise ParseError(f"document.map: unknown map {map_name!r} (nicholson_bailey)")
    params_raw = _require_object(data["params"], "document.params")
    _check_keys(
        params_raw,
        "document.params",
        {"growth_factor", "search_efficiency", "conversion"},
        set(),
    )
    try:
        params = NicholsonBaileyParams(
            growth_factor=_number(params_raw, "growth_factor", "document.params"),
            search_efficiency=_number(params_raw, "search_efficiency", "document.params"),
            conversion=_number(params_raw, "conversion", "document.params"),
        )
    except ValueError as exc:
        raise ParseError(f"document.params: {exc}") from None
    initial_raw = _require_object(data["initial"], "document.initial")
    _check_keys(initial_raw, "document.initial", {"host", "parasitoid"}, set())
    host = _number(initial_raw, "host", "document.initial")
    parasitoid = _number(initial_raw, "parasitoid", "document.initial")
    if host < 0 or parasitoid < 0:
        raise ParseError("document.initial: densities must be >= 0")
    generations = _integer(data, "generations", "document")
    if generations < 0:
        raise ParseError("document.generations: must be >= 0")
    return DiscreteBundle(
        params=params, initial_host=host, initial_parasitoid=parasitoid, generations=generations
    )


# ---------------------------------------------------------------------------
# serialization

def _response_to_json(response) -> dict:
    if isinstance(response, LinearResponse):
        return {"type": "linear", "rate": response.rate}
    if isinstance(response, HollingTypeII):
        return {"type": "holling2", "rate": response.rate, "handling": response.handling}
    return {"type": "ivlev", "rate": response.rate, "saturation": response.saturation}


def _entry_to_json(entry: InteractionSpec) -> dict:
    if entry.continuum_alpha is not None:
        return {
            "species_i": entry.species_i,
            "species_j": entry.species_j,
            "kind": "continuum",
            "alpha": entry.continuum_alpha,
            "base_strength": entry.continuum_strength,
        }
    out = {
        "species_i": entry.species_i,
        "species_j": entry.species_j,
        "kind": entry.kind.value,
        "coeff_i": entry.coeff_i,
    }
    if entry.kind in (InteractionKind.PREDATION, InteractionKind.PARASITISM):
        out["response"] = _response_to_json(entry.response)
    else:
        out["coeff_j"] = entry.coeff_j
    return out


def _community_to_json(scenario: Scenario) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "community",
        "species": [
            {
                "id": sp.id,
                "name": sp.name,
                "role": sp.role.value,
                "trophic_level": sp.trophic_level,
                "growth_rate": sp.growth_rate,
                "self_limitation": sp.self_limitation,
            }
            for sp in scenario.species
        ],
        "interactions": [_entry_to_json(entry) for entry in scenario.interactions],
        "initial_densities": {sp.id: scenario.initial_densities[sp.id] for sp in scenario.species},
        "integrator": {
            "method": scenario.integrator.method,
            "step": scenario.integrator.step,
            "rel_tol": scenario.integrator.rel_tol,
            "abs_tol": scenario.integrator.abs_tol,
            "extinction_epsilon": scenario.integrator.extinction_epsilon,
        },
        "horizon": scenario.horizon,
    }


def _graph_to_json(bundle: EpidemicBundle) -> dict:
    if bundle.graph_spec is not None:
        return dict(bundle.graph_spec)
    return {
        "generator": "explicit",
        "n": bundle.model.graph.n_nodes,
        "edges": sorted(list(e) for e in bundle.model.graph.edges),
    }


def _epidemic_to_json(bundle: EpidemicBundle) -> dict:
    model = bundle.model
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "epidemic",
        "graph": _graph_to_json(bundle),
        "model": model.kind.value,
        "beta": model.beta,
        "gamma": model.gamma,
        "initial_infected": sorted(model.initial_infected),
        "seed": model.seed,
        "horizon": bundle.horizon,
        "sample_dt": bundle.sample_dt,
    }


def _gradient_to_json(spec: GradientSpec) -> dict:
    if spec.type == "constant":
        return {"type": "constant", "value": list(spec.value)}
    return {
        "type": "linear",
        "intercept": list(spec.intercept),
        "matrix": [list(row) for row in spec.matrix],
    }


def _selection_to_json(bundle: SelectionBundle) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "selection",
        "means": dict(zip(("display", "preference", "fitness"), bundle.means)),
        "covariance": {
            "v_display": bundle.covariance[0],
            "v_preference": bundle.covariance[1],
            "v_fitness": bundle.covariance[2],
            "c_display_preference": bundle.covariance[3],
            "c_display_fitness": bundle.covariance[4],
            "c_preference_fitness": bundle.covariance[5],
        },
        "natural_gradient": _gradient_to_json(bundle.natural),
        "sexual_gradient": _gradient_to_json(bundle.sexual),
        "mutation": list(bundle.mutation),
        "steps": bundle.steps,
    }


def _discrete_to_json(bundle: DiscreteBundle) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "discrete",
        "map": "nicholson_bailey",
        "params": {
            "growth_factor": bundle.params.growth_factor,
            "search_efficiency": bundle.params.search_efficiency,
            "conversion": bundle.params.conversion,
        },
        "initial": {"host": bundle.initial_host, "parasitoid": bundle.initial_parasitoid},
        "generations": bundle.generations,
    }


def serialize_scenario(document: Document) -> str:
    """Canonical JSON text for a document; parse(serialize(x)) equals x."""
    kind = document_kind(document)
    if kind == "community":
        payload = _community_to_json(document)
    elif kind == "epidemic":
        payload = _epidemic_to_json(document)
    elif kind == "selection":
        payload = _selection_to_json(document)
    else:
        payload = _discrete_to_json(document)
    return json.dumps(payload, indent=2) + "\n"


def scenario_digest(document: Document) -> str:
    """Stable hex digest of the canonical serialized document."""
    return hashlib.sha256(serialize_scenario(document).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# CSV

def _format_value(x: float) -> str:
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def write_csv(trajectory) -> str:
    """Comma-separated samples, one row per time, shortest round-trip decimals.

    The header is "time,<name1>,<name2>,..." in declaration order; values
    parse back bit-exactly.
    """
    names = tuple(trajectory.variable_names)
    lines = ["time," + ",".join(names)]
    values = np.asarray(trajectory.values, dtype=float)
    for t, row in zip(trajectory.times, values):
        lines.append(",".join([_format_value(float(t))] + [_format_value(float(v)) for v in row]))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CsvSeries:
    """Trajectory-shaped table read back from CSV (not validated)."""

    variable_names: tuple[str, ...]
    times: np.ndarray
    values: np.ndarray


def read_csv(text: str) -> CsvSeries:
    lines = [line for line in text.splitlines() if line]
    if not lines:
        raise ValueError("empty CSV")
    header = lines[0].split(",")
    if header[0] != "time":
        raise ValueError("first CSV column must be 'time'")
    names = tuple(header[1:])
    times = []
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != len(names) + 1:
            raise ValueError(f"row has {len(cells)} cells, expected {len(names) + 1}")
        times.append(float(cells[0]))
        rows.append([float(c) for c in cells[1:]])
    return CsvSeries(names, np.array(times), np.array(rows))
